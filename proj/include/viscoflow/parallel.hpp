#pragma once

// Persistent worker pool with a fixed block decomposition. Work is split into
// blocks whose boundaries depend only on the problem size, never on the thread
// count, so reductions that combine per-block partials in block order are
// bitwise reproducible for any number of threads.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace viscoflow {

class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads = 1) { resize(threads); }
  ~ThreadPool() { stop(); }
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  unsigned size() const { return static_cast<unsigned>(workers_.size()) + 1; }

  void resize(unsigned threads) {
    stop();
    stopping_ = false;
    for (unsigned t = 1; t < std::max(1u, threads); ++t) workers_.emplace_back([this] { worker(); });
  }

  /// Calls fn(b) for every b in [0, blocks); returns when all calls finished.
  void run(std::size_t blocks, const std::function<void(std::size_t)>& fn) {
    if (blocks == 0) return;
    if (workers_.empty() || blocks == 1) {
      for (std::size_t b = 0; b < blocks; ++b) fn(b);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      job_ = &fn;
      blocks_ = blocks;
      next_.store(0);
      pending_ = workers_.size();
      ++generation_;
    }
    wake_.notify_all();
    drain(fn, blocks);
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  void drain(const std::function<void(std::size_t)>& fn, std::size_t blocks) {
    for (std::size_t b = next_.fetch_add(1); b < blocks; b = next_.fetch_add(1)) fn(b);
  }

  void worker() {
    std::size_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t)>* job;
      std::size_t blocks;
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
        if (stopping_) return;
        seen = generation_;
        job = job_;
        blocks = blocks_;
      }
      drain(*job, blocks);
      {
        std::lock_guard lock(mutex_);
        --pending_;
      }
      done_.notify_one();
    }
  }

  void stop() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) w.join();
    workers_.clear();
  }

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_, done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t blocks_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  bool stopping_ = false;
};

/// Process-wide pool used by the field kernels.
inline ThreadPool& thread_pool() {
  static ThreadPool pool(1);
  return pool;
}

inline void set_thread_count(unsigned n) { thread_pool().resize(n); }

/// Half-open index range of block b when [0, n) is cut into `blocks` pieces.
struct BlockRange {
  std::size_t begin, end;
};

inline std::size_t block_count(std::size_t n) { return std::min<std::size_t>(n, 64); }

inline BlockRange block_range(std::size_t n, std::size_t blocks, std::size_t b) {
  return {n * b / blocks, n * (b + 1) / blocks};
}

/// fn(i) for every i in [0, n), split over the fixed decomposition.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  const std::size_t blocks = block_count(n);
  thread_pool().run(blocks, [&](std::size_t b) {
    const BlockRange r = block_range(n, blocks, b);
    for (std::size_t i = r.begin; i < r.end; ++i) fn(i);
  });
}

/// Deterministic sum of fn(i) over [0, n): per-block partials added in block order.
template <class F>
double parallel_sum(std::size_t n, F&& fn) {
  const std::size_t blocks = block_count(n);
  std::vector<double> partial(blocks, 0.0);
  thread_pool().run(blocks, [&](std::size_t b) {
    const BlockRange r = block_range(n, blocks, b);
    double s = 0.0;
    for (std::size_t i = r.begin; i < r.end; ++i) s += fn(i);
    partial[b] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

/// Deterministic reduction with an arbitrary associative combiner.
template <class T, class F, class Combine>
T parallel_reduce(std::size_t n, T init, F&& fn, Combine&& combine) {
  const std::size_t blocks = block_count(n);
  std::vector<T> partial(blocks, init);
  thread_pool().run(blocks, [&](std::size_t b) {
    const BlockRange r = block_range(n, blocks, b);
    T acc = init;
    for (std::size_t i = r.begin; i < r.end; ++i) acc = combine(acc, fn(i));
    partial[b] = acc;
  });
  T total = init;
  for (const T& p : partial) total = combine(total, p);
  return total;
}

}  // namespace viscoflow
