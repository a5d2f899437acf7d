#include "nphm/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace nphm {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) {
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  g_threads.store(std::max(1, n));
}

int thread_count() { return g_threads.load(); }

int parallel_chunks(std::int64_t n,
                    const std::function<void(int, std::int64_t, std::int64_t)>& body) {
  if (n <= 0) return 0;
  const int nt = std::min<std::int64_t>(thread_count(), n);
  if (nt <= 1) {
    body(0, 0, n);
    return 1;
  }
  const std::int64_t per = (n + nt - 1) / nt;
  std::vector<std::thread> workers;
  workers.reserve(nt);
  int chunks = 0;
  for (int c = 0; c < nt; ++c) {
    const std::int64_t b = c * per;
    const std::int64_t e = std::min<std::int64_t>(n, b + per);
    if (b >= e) break;
    ++chunks;
    workers.emplace_back([&body, c, b, e] { body(c, b, e); });
  }
  for (auto& w : workers) w.join();
  return chunks;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body) {
  parallel_chunks(n, [&body](int, std::int64_t b, std::int64_t e) { body(b, e); });
}

}  // namespace nphm
