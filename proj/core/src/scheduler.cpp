#include "apc/scheduler.hpp"

#include <algorithm>
#include <utility>

namespace apc {

void SequentialScheduler::run_round(std::size_t count,
                                    const std::function<void(std::size_t)>& work) {
  for (std::size_t i = 0; i < count; ++i) work(i);
}

WorkerPoolScheduler::WorkerPoolScheduler(std::size_t workers)
    : nworkers_(std::max<std::size_t>(workers, 1)),
      start_(static_cast<std::ptrdiff_t>(nworkers_ + 1)),
      done_(static_cast<std::ptrdiff_t>(nworkers_ + 1)),
      errors_(nworkers_) {
  threads_.reserve(nworkers_);
  for (std::size_t k = 0; k < nworkers_; ++k) {
    threads_.emplace_back([this, k] { worker_loop(k); });
  }
}

WorkerPoolScheduler::~WorkerPoolScheduler() {
  stopping_ = true;
  start_.arrive_and_wait();
  // jthread members join on destruction.
}

void WorkerPoolScheduler::worker_loop(std::size_t worker) {
  const std::size_t n = nworkers_;
  for (;;) {
    start_.arrive_and_wait();
    if (stopping_) return;
    const std::size_t lo = worker * count_ / n;
    const std::size_t hi = (worker + 1) * count_ / n;
    try {
      for (std::size_t i = lo; i < hi; ++i) (*work_)(i);
    } catch (...) {
      errors_[worker] = std::current_exception();
    }
    done_.arrive_and_wait();
  }
}

void WorkerPoolScheduler::run_round(std::size_t count,
                                    const std::function<void(std::size_t)>& work) {
  count_ = count;
  work_ = &work;
  start_.arrive_and_wait();
  done_.arrive_and_wait();
  work_ = nullptr;
  for (auto& err : errors_) {
    if (err) {
      auto rethrow = std::exchange(err, nullptr);
      std::rethrow_exception(rethrow);
    }
  }
}

std::unique_ptr<RoundScheduler> make_scheduler(ExecutionMode mode, std::size_t workers) {
  if (mode == ExecutionMode::kSequential) return std::make_unique<SequentialScheduler>();
  if (workers == 0) workers = std::max(2u, std::thread::hardware_concurrency());
  return std::make_unique<WorkerPoolScheduler>(workers);
}

}  // namespace apc
