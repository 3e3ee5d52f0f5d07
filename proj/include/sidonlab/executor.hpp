#pragma once

// Work-queue parallelism with index-ordered delivery. Results reach the sink
// in index order whatever the thread count, so output produced through
// map_ordered is identical for 1 or N threads.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace sidon {

class Executor {
 public:
  explicit Executor(unsigned threads = 1) : threads_(threads == 0 ? default_threads() : threads) {}

  static unsigned default_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }

  unsigned threads() const noexcept { return threads_; }

  // fn(i) -> T for i in [0, count); sink(i, T&&) is called in increasing i,
  // one call at a time, as soon as the prefix up to i is complete.
  template <class Fn, class Sink>
  void map_ordered(std::size_t count, Fn&& fn, Sink&& sink) const {
    using T = decltype(fn(std::size_t{}));
    if (threads_ <= 1 || count <= 1) {
      for (std::size_t i = 0; i < count; ++i) sink(i, fn(i));
      return;
    }
    std::vector<std::optional<T>> slots(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mutex;
    std::size_t flushed = 0;
    std::exception_ptr error;

    auto worker = [&] {
      for (;;) {
        if (failed.load()) return;
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          T value = fn(i);
          std::lock_guard lock(mutex);
          slots[i].emplace(std::move(value));
          while (flushed < count && slots[flushed]) {
            sink(flushed, std::move(*slots[flushed]));
            slots[flushed].reset();
            ++flushed;
          }
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    };

    std::vector<std::thread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads_, count));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  template <class Fn>
  auto map(std::size_t count, Fn&& fn) const {
    using T = decltype(fn(std::size_t{}));
    std::vector<T> out;
    out.reserve(count);
    map_ordered(count, std::forward<Fn>(fn), [&](std::size_t, T&& v) { out.push_back(std::move(v)); });
    return out;
  }

 private:
  unsigned threads_;
};

}  // namespace sidon
