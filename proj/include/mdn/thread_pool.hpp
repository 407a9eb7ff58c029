#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mdn {

// Fixed-size pool running index-range jobs. Workers pull fixed-size chunks
// from a shared atomic cursor, so the chunk boundaries never depend on the
// thread count; the calling thread participates in every job.
//
// Only one parallel_for may run at a time per pool.
class ThreadPool {
 public:
  // threads == 0 selects std::thread::hardware_concurrency().
  explicit ThreadPool(std::size_t threads = 1);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  std::size_t size() const noexcept { return workers_.size() + 1; }

  // Calls body(begin, end) over [first, last) split into chunks of `grain`
  // indices. Rethrows the first exception raised by any chunk.
  void parallel_for(std::size_t first, std::size_t last, std::size_t grain,
                    const std::function<void(std::size_t, std::size_t)>& body);

 private:
  struct Job {
    const std::function<void(std::size_t, std::size_t)>* body = nullptr;
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t grain = 1;
    std::atomic<std::size_t> cursor{0};
    std::atomic<std::size_t> active{0};
    std::exception_ptr error;
    std::mutex error_mutex;
  };

  void worker_loop();
  void drain(Job& job);

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  Job* job_ = nullptr;
  std::size_t generation_ = 0;
  bool stopping_ = false;
};

// Runs body on `pool` when given, otherwise serially on the caller.
void parallel_for(ThreadPool* pool, std::size_t first, std::size_t last, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mdn
