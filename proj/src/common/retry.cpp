#include "scichat/common/retry.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include "scichat/common/rng.hpp"

namespace scichat {

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  if (base_delay.count() <= 0) return std::chrono::milliseconds{0};
  const int shift = std::clamp(attempt - 1, 0, 20);
  const auto raw = std::min<long long>(base_delay.count() << shift, max_delay.count());
  thread_local Rng rng(std::random_device{}());
  const double spread = std::clamp(jitter, 0.0, 1.0) * static_cast<double>(raw);
  const double delay = static_cast<double>(raw) - spread * rng.uniform01();
  return std::chrono::milliseconds{static_cast<long long>(delay)};
}

void RetryPolicy::wait(int attempt) const {
  const auto delay = backoff(attempt);
  if (sleep) {
    sleep(delay);
  } else if (delay.count() > 0) {
    std::this_thread::sleep_for(delay);
  }
}

}  // namespace scichat
