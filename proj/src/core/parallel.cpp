#include "simpl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace simpl {

namespace {

int read_env_threads() {
  const char* env = std::getenv("SIMPL_THREADS");
  if (env == nullptr) return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (...) {
    return 1;
  }
}

std::atomic<int>& threads() {
  static std::atomic<int> value{read_env_threads()};
  return value;
}

}  // namespace

int thread_count() { return threads().load(); }

void set_thread_count(int n) { threads().store(std::max(1, n)); }

void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  const int workers = static_cast<int>(std::min<std::size_t>(thread_count(), blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) body(b * kReductionBlock, std::min(n, (b + 1) * kReductionBlock));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t b = next++; b < blocks; b = next++) {
      try {
        body(b * kReductionBlock, std::min(n, (b + 1) * kReductionBlock));
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!error) error = std::current_exception();
        next = blocks;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_blocks(n, [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    partial[begin / kReductionBlock] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace simpl
