#pragma once

#include <barrier>
#include <cstddef>
#include <exception>
#include <functional>
#include <memory>
#include <span>
#include <thread>
#include <vector>

namespace apc {

/// Runs the agent phase of one bulk-synchronous round. `work(i)` is invoked
/// exactly once for every i in [0, count) and all calls have returned when
/// run_round() returns.
class RoundScheduler {
 public:
  virtual ~RoundScheduler() = default;
  virtual void run_round(std::size_t count,
                         const std::function<void(std::size_t)>& work) = 0;
  virtual std::size_t workers() const = 0;
};

class SequentialScheduler final : public RoundScheduler {
 public:
  void run_round(std::size_t count,
                 const std::function<void(std::size_t)>& work) override;
  std::size_t workers() const override { return 1; }
};

// Persistent worker threads synchronised by a pair of barriers (round start,
// round end). Worker k handles the contiguous index range k*count/W ..
// (k+1)*count/W, so assignment is static and independent of timing.
class WorkerPoolScheduler final : public RoundScheduler {
 public:
  explicit WorkerPoolScheduler(std::size_t workers);
  ~WorkerPoolScheduler() override;

  WorkerPoolScheduler(const WorkerPoolScheduler&) = delete;
  WorkerPoolScheduler& operator=(const WorkerPoolScheduler&) = delete;

  void run_round(std::size_t count,
                 const std::function<void(std::size_t)>& work) override;
  std::size_t workers() const override { return threads_.size(); }

 private:
  void worker_loop(std::size_t worker);

  std::size_t nworkers_;
  std::barrier<> start_;
  std::barrier<> done_;
  std::vector<std::exception_ptr> errors_;

  // Written by the coordinator before the start barrier, read by workers after.
  std::size_t count_ = 0;
  const std::function<void(std::size_t)>* work_ = nullptr;
  bool stopping_ = false;

  // Declared last so the threads join before any shared state is destroyed.
  std::vector<std::jthread> threads_;
};

enum class ExecutionMode { kSequential, kThreaded };

std::unique_ptr<RoundScheduler> make_scheduler(ExecutionMode mode,
                                               std::size_t workers = 0);

}  // namespace apc
