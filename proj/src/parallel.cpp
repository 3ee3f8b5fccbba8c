#include "microcircuit/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace microcircuit {

int default_worker_count() {
  if (const char* env = std::getenv("MICROCIRCUIT_WORKERS")) {
    int n = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec == std::errc{} && n > 0) return n;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

}  // namespace microcircuit
