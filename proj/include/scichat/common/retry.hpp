#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "scichat/common/error.hpp"

namespace scichat {

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};
  // Fraction of the backoff that is randomized, in [0, 1].
  double jitter = 0.25;
  // Replaced in tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;

  // Delay before retry number `attempt` (1-based).
  std::chrono::milliseconds backoff(int attempt) const;
  void wait(int attempt) const;

  static RetryPolicy immediate(int max_attempts = 5) {
    RetryPolicy policy;
    policy.max_attempts = max_attempts;
    policy.base_delay = std::chrono::milliseconds{0};
    policy.jitter = 0.0;
    return policy;
  }
};

// Calls fn until it succeeds. Only transient ProviderErrors are retried; once
// the attempt budget is spent a transient error naming the attempt count is thrown.
template <typename Fn>
auto retry_call(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const ProviderError& e) {
      if (!e.transient()) throw;
      if (attempt >= policy.max_attempts) {
        throw ProviderError(ErrorCode::kProviderTransient,
                            "retry budget exhausted after " + std::to_string(attempt) +
                                " attempts: " + e.what(),
                            e.status(), e.item_index());
      }
    }
    policy.wait(attempt);
  }
}

}  // namespace scichat
