#include "sleepfuse/common.hpp"

#include <cstdlib>
#include <cstring>

namespace sleepfuse {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Wake: return "W";
    case Stage::N1: return "N1";
    case Stage::N2: return "N2";
    case Stage::N3: return "N3";
    case Stage::Rem: return "REM";
  }
  return "?";
}

Stage stage_from_name(const std::string& name) {
  if (name == "W" || name == "WAKE" || name == "Wake") return Stage::Wake;
  if (name == "N1") return Stage::N1;
  if (name == "N2") return Stage::N2;
  if (name == "N3") return Stage::N3;
  if (name == "REM" || name == "R") return Stage::Rem;
  throw ValidationError("unknown sleep stage '" + name + "'");
}

int hypnogram_depth(Stage s) {
  switch (s) {
    case Stage::Wake: return 4;
    case Stage::Rem: return 3;
    case Stage::N1: return 2;
    case Stage::N2: return 1;
    case Stage::N3: return 0;
  }
  return -1;
}

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("GMU_LOG");
    if (env == nullptr) return LogLevel::Info;
    if (std::strcmp(env, "quiet") == 0) return LogLevel::Quiet;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::fprintf(stderr, "[sleepfuse] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::fprintf(stderr, "[sleepfuse:debug] %s\n", msg.c_str());
}

}  // namespace sleepfuse
