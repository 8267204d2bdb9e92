// Minimal persistent worker pool for parallel maps over independent chunks.
//
// Workers persist for the process lifetime so per-thread FFTW plan caches
// survive across calls. Callers are responsible for writing to disjoint
// outputs; reductions happen serially afterwards in a fixed order, so
// results match serial evaluation bitwise.
#pragma once

#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ifdm {

// Worker cap: min(hardware, IFDM_THREADS if set). At most one worker per
// job is ever used beyond the job count.
inline int max_workers() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("IFDM_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < hw) hw = cap;
  }
  return hw;
}

class ThreadPool {
 public:
  static ThreadPool& instance() {
    static ThreadPool pool(max_workers());
    return pool;
  }

  // Run fn(i) for i in [0, count). Blocks until done. Serial when the pool
  // has one worker or count <= 1.
  void run(int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (workers_.empty() || count == 1) {
      for (int i = 0; i < count; ++i) fn(i);
      return;
    }
    {
      std::unique_lock<std::mutex> lock(m_);
      job_ = &fn;
      next_ = 0;
      remaining_ = count;
      count_ = count;
      ++generation_;
    }
    cv_.notify_all();
    // The caller participates too.
    work();
    std::unique_lock<std::mutex> lock(m_);
    done_cv_.wait(lock, [&] { return remaining_ == 0; });
    job_ = nullptr;
  }

 private:
  explicit ThreadPool(int n) {
    for (int i = 1; i < n; ++i)
      workers_.emplace_back([this] { worker_loop(); });
  }

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lock(m_);
      quit_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(m_);
        cv_.wait(lock, [&] { return quit_ || generation_ != seen; });
        if (quit_) return;
        seen = generation_;
      }
      work();
    }
  }

  void work() {
    for (;;) {
      int i;
      {
        std::unique_lock<std::mutex> lock(m_);
        if (!job_ || next_ >= count_) return;
        i = next_++;
      }
      (*job_)(i);
      {
        std::unique_lock<std::mutex> lock(m_);
        if (--remaining_ == 0) done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> workers_;
  std::mutex m_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(int)>* job_ = nullptr;
  int next_ = 0, count_ = 0, remaining_ = 0;
  std::uint64_t generation_ = 0;
  bool quit_ = false;
};

inline void parallel_for_chunks(int count, const std::function<void(int)>& fn) {
  ThreadPool::instance().run(count, fn);
}

}  // namespace ifdm
