#include "adl/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace adl {

namespace {
std::atomic<int> g_override{0};

int default_threads() {
  if (const char* env = std::getenv("ADL_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<int>(hw > 8 ? 8 : hw);
}
}  // namespace

int thread_count() {
  int o = g_override.load();
  return o > 0 ? o : default_threads();
}

void set_thread_override(int n) { g_override.store(n); }

namespace {
thread_local bool g_in_parallel = false;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f) {
  if (n <= 0) return;
  int nt = thread_count();
  if (nt <= 1 || n == 1 || g_in_parallel) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
    return;
  }
  if (static_cast<std::int64_t>(nt) > n) nt = static_cast<int>(n);
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(nt));
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int t = 0; t < nt; ++t) {
    workers.emplace_back([&]() {
      g_in_parallel = true;  // nested calls run inline on this worker
      try {
        for (;;) {
          std::int64_t i = next.fetch_add(1);
          if (i >= n || failed.load()) break;
          f(i);
        }
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace adl
