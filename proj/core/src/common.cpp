#include "fairshift/common.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace fairshift {

namespace {
std::atomic<int> g_verbosity{1};
std::mutex g_log_mutex;
}  // namespace

void set_verbosity(int level) { g_verbosity.store(level); }
int verbosity() { return g_verbosity.load(); }

void warn(const std::string& message) {
  if (g_verbosity.load() >= 1) {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << "warning: " << message << "\n";
  }
}

void info(const std::string& message) {
  if (g_verbosity.load() >= 2) {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << "info: " << message << "\n";
  }
}

}  // namespace fairshift
