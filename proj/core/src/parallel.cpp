#include "vblob/parallel.hpp"

#include <deque>
#include <thread>
#include <vector>

namespace vblob {

// Idle workers park on their own condition variable and are handed jobs
// most-recently-parked first, so a burst reuses the threads whose stacks are
// still warm instead of cycling through every thread ever started.
struct WorkerPool::Impl {
  struct Worker {
    std::condition_variable cv;
    std::function<void()> job;
  };

  std::mutex mu;
  std::deque<std::function<void()>> backlog;
  std::vector<Worker*> idle;
  std::size_t threads = 0;

  void work(std::function<void()> job) {
    Worker self;
    std::unique_lock lock(mu);
    for (;;) {
      lock.unlock();
      job();
      job = nullptr;
      lock.lock();
      if (!backlog.empty()) {
        job = std::move(backlog.front());
        backlog.pop_front();
        continue;
      }
      idle.push_back(&self);
      self.cv.wait(lock, [&] { return self.job != nullptr; });
      job = std::move(self.job);
      self.job = nullptr;
    }
  }
};

WorkerPool& WorkerPool::instance() {
  // Never destroyed: detached workers may still be parked at exit.
  static WorkerPool* pool = new WorkerPool(new Impl);
  return *pool;
}

void WorkerPool::submit(std::function<void()> job) {
  std::lock_guard lock(impl_->mu);
  if (!impl_->idle.empty()) {
    auto* w = impl_->idle.back();
    impl_->idle.pop_back();
    w->job = std::move(job);
    w->cv.notify_one();
    return;
  }
  if (impl_->threads < kMaxThreads) {
    ++impl_->threads;
    std::thread([impl = impl_, j = std::move(job)]() mutable { impl->work(std::move(j)); }).detach();
    return;
  }
  impl_->backlog.push_back(std::move(job));
}

}  // namespace vblob
