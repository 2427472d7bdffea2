#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "opkm/core.hpp"

namespace opkm {

// Work-sharing pool for data-parallel loops. Chunk boundaries depend only on
// (range, grain), never on the worker count, and chunks must write disjoint
// outputs; reductions are left to the caller in fixed chunk order. Under
// those rules results are bitwise independent of the thread count, which the
// CLI contract requires.
class ThreadPool {
public:
  explicit ThreadPool(unsigned threads) {
    if (threads < 1) threads = 1;
    for (unsigned t = 0; t + 1 < threads; ++t) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  unsigned thread_count() const { return static_cast<unsigned>(workers_.size()) + 1; }

  // Runs fn(lo, hi) over [begin, end) in chunks of at most grain. Nested
  // calls from inside a chunk run serially.
  void parallel_for(Index begin, Index end, Index grain,
                    std::function<void(Index, Index)> fn) {
    if (end <= begin) return;
    if (grain < 1) grain = 1;
    const Index nchunks = (end - begin + grain - 1) / grain;
    if (workers_.empty() || nchunks == 1 || inside_chunk_) {
      fn(begin, end);
      return;
    }

    auto job = std::make_shared<Job>();
    job->begin = begin;
    job->end = end;
    job->grain = grain;
    job->nchunks = nchunks;
    job->fn = std::move(fn);
    {
      std::lock_guard<std::mutex> lk(mu_);
      job_ = job;
      ++job_generation_;
    }
    cv_.notify_all();

    run_chunks(*job);

    {
      std::unique_lock<std::mutex> lk(job->done_mu);
      job->done_cv.wait(lk, [&] { return job->done.load() == job->nchunks; });
    }
    std::lock_guard<std::mutex> lk(mu_);
    job_.reset();
  }

  // Pool shared by the library. Size it once, before first use; afterwards
  // the setting is fixed for the process.
  static ThreadPool& global() {
    static ThreadPool pool(default_threads());
    return pool;
  }

  static void set_default_threads(unsigned n) { default_threads_override() = n; }

private:
  struct Job {
    Index begin = 0, end = 0, grain = 1, nchunks = 0;
    std::function<void(Index, Index)> fn;
    std::atomic<Index> next{0};
    std::atomic<Index> done{0};
    std::mutex done_mu;
    std::condition_variable done_cv;
  };

  static unsigned& default_threads_override() {
    static unsigned n = 0;
    return n;
  }

  static unsigned default_threads() {
    unsigned n = default_threads_override();
    if (n) return n;
    n = std::thread::hardware_concurrency();
    return n ? n : 1;
  }

  void run_chunks(Job& job) {
    inside_chunk_ = true;
    for (Index c; (c = job.next.fetch_add(1)) < job.nchunks;) {
      const Index lo = job.begin + c * job.grain;
      const Index hi = std::min(job.end, lo + job.grain);
      job.fn(lo, hi);
      if (job.done.fetch_add(1) + 1 == job.nchunks) {
        std::lock_guard<std::mutex> lk(job.done_mu);
        job.done_cv.notify_all();
      }
    }
    inside_chunk_ = false;
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return stop_ || (job_ && job_generation_ != seen); });
        if (stop_) return;
        job = job_;
        seen = job_generation_;
      }
      if (job) run_chunks(*job);
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::shared_ptr<Job> job_;
  std::uint64_t job_generation_ = 0;
  bool stop_ = false;
  static thread_local bool inside_chunk_;
};

inline thread_local bool ThreadPool::inside_chunk_ = false;

inline void parallel_for(Index begin, Index end, Index grain,
                         std::function<void(Index, Index)> fn) {
  ThreadPool::global().parallel_for(begin, end, grain, std::move(fn));
}

}  // namespace opkm
