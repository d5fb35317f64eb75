#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace persist::detail {

// Splits [0, n_items) into fixed-size blocks and hands block b to worker
// b % threads. Each worker folds into its own accumulator; accumulators are
// merged in worker order. Block contents never depend on the worker count.
template <class Acc, class BlockFn, class MergeFn>
Acc for_blocks(std::uint64_t n_items, std::uint64_t block_size, unsigned threads, const Acc& init, BlockFn&& run_block,
               MergeFn&& merge) {
  const std::uint64_t n_blocks = (n_items + block_size - 1) / block_size;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(1, n_blocks))));
  std::vector<Acc> partial(threads, init);
  auto worker = [&](unsigned w) {
    for (std::uint64_t b = w; b < n_blocks; b += threads) {
      const std::uint64_t first = b * block_size;
      const std::uint64_t count = std::min(block_size, n_items - first);
      run_block(b, count, partial[w]);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  Acc total = init;
  for (auto& p : partial) merge(total, p);
  return total;
}

}  // namespace persist::detail
