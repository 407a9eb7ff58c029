#include "mdn/thread_pool.hpp"

#include <algorithm>

namespace mdn {

ThreadPool::ThreadPool(std::size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  workers_.reserve(threads - 1);
  for (std::size_t i = 1; i < threads; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& worker : workers_) worker.join();
}

void ThreadPool::drain(Job& job) {
  for (;;) {
    const std::size_t begin = job.cursor.fetch_add(job.grain);
    if (begin >= job.last) break;
    const std::size_t end = std::min(job.last, begin + job.grain);
    try {
      (*job.body)(begin, end);
    } catch (...) {
      std::lock_guard lock(job.error_mutex);
      if (!job.error) job.error = std::current_exception();
      job.cursor.store(job.last);
    }
  }
}

void ThreadPool::worker_loop() {
  std::size_t seen = 0;
  for (;;) {
    Job* job = nullptr;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stopping_ || (job_ != nullptr && generation_ != seen); });
      if (stopping_) return;
      seen = generation_;
      job = job_;
      job->active.fetch_add(1);
    }
    drain(*job);
    {
      std::lock_guard lock(mutex_);
      job->active.fetch_sub(1);
    }
    done_.notify_all();
  }
}

void ThreadPool::parallel_for(std::size_t first, std::size_t last, std::size_t grain,
                              const std::function<void(std::size_t, std::size_t)>& body) {
  if (first >= last) return;
  grain = std::max<std::size_t>(grain, 1);
  Job job;
  job.body = &body;
  job.first = first;
  job.last = last;
  job.grain = grain;
  job.cursor.store(first);

  if (!workers_.empty() && last - first > grain) {
    {
      std::lock_guard lock(mutex_);
      job_ = &job;
      ++generation_;
    }
    wake_.notify_all();
    drain(job);
    std::unique_lock lock(mutex_);
    job_ = nullptr;
    done_.wait(lock, [&] { return job.active.load() == 0; });
  } else {
    drain(job);
  }
  if (job.error) std::rethrow_exception(job.error);
}

void parallel_for(ThreadPool* pool, std::size_t first, std::size_t last, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (pool != nullptr) {
    pool->parallel_for(first, last, grain, body);
    return;
  }
  for (std::size_t begin = first; begin < last; begin += std::max<std::size_t>(grain, 1)) {
    body(begin, std::min(last, begin + std::max<std::size_t>(grain, 1)));
  }
}

}  // namespace mdn
