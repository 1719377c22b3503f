#include "fingergan/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace fingergan::log {
namespace {

std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

void emit(Level lvl, const char* tag, std::string_view msg) {
  if (lvl < g_level.load()) return;
  std::lock_guard lock(g_mutex);
  std::clog << '[' << tag << "] " << msg << '\n';
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void debug(std::string_view msg) { emit(Level::debug, "debug", msg); }
void info(std::string_view msg) { emit(Level::info, "info", msg); }
void warn(std::string_view msg) { emit(Level::warn, "warn", msg); }
void error(std::string_view msg) { emit(Level::error, "error", msg); }

}  // namespace fingergan::log
