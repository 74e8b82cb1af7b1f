#pragma once

#include <cstddef>
#include <semaphore>

namespace scichat {

// Bounds the number of in-flight requests to a provider across all callers.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(std::ptrdiff_t limit) : slots_(limit < 1 ? 1 : limit) {}

  class Permit {
   public:
    explicit Permit(ConcurrencyLimiter& owner) : owner_(owner) { owner_.slots_.acquire(); }
    ~Permit() { owner_.slots_.release(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

   private:
    ConcurrencyLimiter& owner_;
  };

  Permit acquire() { return Permit(*this); }

 private:
  std::counting_semaphore<1 << 16> slots_;
};

}  // namespace scichat
