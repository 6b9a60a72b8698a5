#pragma once
// Error taxonomy, sleep-stage vocabulary and logging shared across the library.

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace sleepfuse {

// Tensor/matrix dimensions that do not line up.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration value: rates out of range, unknown keys, impossible dims.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user data: CSV rows, label strings, non-one-hot labels.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that is structurally valid but unusable (signal too short, empty set).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: singular systems, non-finite loss.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse: double backward without reset, optimizer before any backward.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem / serialization failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The five scoring classes. Enum values are the classifier output indices.
enum class Stage : uint8_t { Wake = 0, N1 = 1, N2 = 2, N3 = 3, Rem = 4 };

inline constexpr std::size_t kNumStages = 5;

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);  // throws ValidationError

// Ordinal used when plotting hypnograms: deeper sleep sits lower.
// W=4, REM=3, N1=2, N2=1, N3=0.
int hypnogram_depth(Stage s);

// Log verbosity, controlled by the GMU_LOG env var (quiet|info|debug).
enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };
LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace sleepfuse
