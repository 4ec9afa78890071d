#include "qeforge/log.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace qeforge {
namespace {

std::atomic<LogLevel> g_level{LogLevel::kInfo};
std::mutex g_mutex;

std::string Quote(std::string_view v) {
  const bool plain = !v.empty() && v.find_first_of(" \"=\t") == std::string_view::npos;
  if (plain) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace

void SetLogLevel(LogLevel level) { g_level = level; }

void Log(LogLevel level, std::string_view msg, const LogFields& fields) {
  if (level < g_level.load()) return;
  static constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
  std::string line = "level=";
  line += kNames[static_cast<int>(level)];
  line += " msg=" + Quote(msg);
  for (const auto& [k, v] : fields) line += " " + k + "=" + Quote(v);
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << line << '\n';
}

}  // namespace qeforge
