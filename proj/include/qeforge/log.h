#ifndef QEFORGE_LOG_H_
#define QEFORGE_LOG_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qeforge {

enum class LogLevel { kDebug, kInfo, kWarn, kError, kSilent };

using LogFields = std::vector<std::pair<std::string, std::string>>;

void SetLogLevel(LogLevel level);

// One logfmt line on stderr: level=info msg="..." key=value ...
void Log(LogLevel level, std::string_view msg, const LogFields& fields);

inline void LogInfo(std::string_view msg, const LogFields& fields) {
  Log(LogLevel::kInfo, msg, fields);
}
inline void LogWarn(std::string_view msg, const LogFields& fields) {
  Log(LogLevel::kWarn, msg, fields);
}
inline void LogError(std::string_view msg, const LogFields& fields) {
  Log(LogLevel::kError, msg, fields);
}

}  // namespace qeforge

#endif  // QEFORGE_LOG_H_
