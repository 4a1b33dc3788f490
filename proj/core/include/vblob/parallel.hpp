#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>

namespace vblob {

inline constexpr std::size_t kMaxFanout = 16;

/// Process-wide pool of helper threads for parallel_for. A job goes to an
/// idle thread if there is one, else to a new thread up to kMaxThreads, else
/// to a backlog. Threads stay for the life of the process.
class WorkerPool {
 public:
  static constexpr std::size_t kMaxThreads = 512;

  static WorkerPool& instance();
  void submit(std::function<void()> job);

 private:
  struct Impl;
  explicit WorkerPool(Impl* impl) : impl_(impl) {}

  Impl* impl_;
};

namespace detail {

/// Shared between a parallel_for caller and its helper jobs. Helpers that
/// start after the caller has finished the range never touch fn.
struct ForState {
  std::atomic<std::size_t> next{0};
  std::size_t n = 0;
  std::mutex mu;
  std::condition_variable cv;
  std::size_t active = 0;
  bool closed = false;
  std::exception_ptr error;

  bool enter() {
    std::lock_guard lock(mu);
    if (closed) return false;
    ++active;
    return true;
  }
  void leave() {
    std::lock_guard lock(mu);
    if (--active == 0) cv.notify_all();
  }
  void fail(std::exception_ptr e) {
    std::lock_guard lock(mu);
    if (!error) error = e;
  }
};

template <typename Fn>
void run_range(ForState& s, Fn& fn) {
  for (std::size_t i = s.next++; i < s.n; i = s.next++) {
    try {
      fn(i);
    } catch (...) {
      s.fail(std::current_exception());
    }
  }
}

}  // namespace detail

/// Runs fn(0) .. fn(n-1) with up to kMaxFanout concurrent tasks (the caller
/// included) and rethrows the first exception once every task has finished.
/// The caller works through the range itself, so nesting never deadlocks.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  if (n == 1) {
    fn(std::size_t{0});
    return;
  }
  auto state = std::make_shared<detail::ForState>();
  state->n = n;
  auto* f = &fn;
  const std::size_t helpers = (n < kMaxFanout ? n : kMaxFanout) - 1;
  for (std::size_t t = 0; t < helpers; ++t) {
    WorkerPool::instance().submit([state, f] {
      if (!state->enter()) return;
      detail::run_range(*state, *f);
      state->leave();
    });
  }
  detail::run_range(*state, fn);
  std::unique_lock lock(state->mu);
  state->closed = true;
  state->cv.wait(lock, [&] { return state->active == 0; });
  if (state->error) std::rethrow_exception(state->error);
}

}  // namespace vblob
