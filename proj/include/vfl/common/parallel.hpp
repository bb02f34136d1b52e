#pragma once

#include <exception>
#include <mutex>

namespace vfl {

// Exceptions must not escape an OpenMP region. Loop bodies report into the
// slot; the first one is rethrown after the region.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& body) noexcept {
    try {
      body();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr first_;
};

}  // namespace vfl
