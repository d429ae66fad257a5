#include "termforge/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace termforge {

namespace {
std::mutex g_mutex;
std::vector<std::string> g_warnings;
std::atomic<bool> g_echo{false};
}  // namespace

void warn(std::string message) {
  std::lock_guard lock(g_mutex);
  if (g_echo.load()) std::cerr << "warning: " << message << '\n';
  g_warnings.push_back(std::move(message));
}

std::vector<std::string> take_warnings() {
  std::lock_guard lock(g_mutex);
  std::vector<std::string> out;
  out.swap(g_warnings);
  return out;
}

std::size_t warning_mark() {
  std::lock_guard lock(g_mutex);
  return g_warnings.size();
}

std::vector<std::string> warnings_since(std::size_t mark) {
  std::lock_guard lock(g_mutex);
  if (mark >= g_warnings.size()) return {};
  return {g_warnings.begin() + static_cast<std::ptrdiff_t>(mark), g_warnings.end()};
}

void set_warning_echo(bool on) { g_echo.store(on); }

}  // namespace termforge
