#pragma once

#include <cstdint>
#include <vector>

#include "ethgnn/blocks.hpp"
#include "ethgnn/rng.hpp"

namespace ethgnn {

// Synthetic block streams for offline runs. The draw sequence below is the
// generator's contract; an oracle can replay it with nothing but a
// std::mt19937_64. All draws come from one engine seeded with `seed`, in
// exactly this order:
//
//   1. Address pool: pool_size addresses, each 20 bytes, one byte per draw
//      (next_u64() % 256), rendered lowercase 0x-hex.
//   2. Per block b = 0..n_blocks-1:
//      a. tx_count = txs_lo + next_u64() % (txs_hi - txs_lo + 1)
//      b. per transaction:
//         - from  = pool[zipf_pick],  to = pool[zipf_pick]   (two picks; a
//           pick draws u = (next_u64() >> 11) * 2^-53 and selects the first
//           index k whose cumulative weight exceeds u * W, where weight of
//           index k is 1/(k+1) and W is the total weight)
//         - hash  = 32 bytes, one byte per draw (next_u64() % 256)
//         - gas   = 21000 + next_u64() % 100000
//         - gas_price = (1 + next_u64() % 200) * 10^9      (1..200 gwei)
//         - value = next_u64() % 10^18 wei                 (under 1 ether)
//
// Blocks are numbered start_number + b, timestamped start_timestamp + 12*b,
// gas_used is the sum of the block's per-tx gas, and gas_limit is
// max(gas_used, 30'000'000). The 1/(k+1) weights make low-index addresses
// hubs, so realistic degree skew appears even in small pools.
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_blocks = 1;
  std::size_t pool_size = 64;
  std::uint32_t txs_lo = 8;    // inclusive bounds on transactions per block
  std::uint32_t txs_hi = 24;
  std::uint64_t start_number = 1;
  std::uint64_t start_timestamp = 1600000000;

  void validate() const {
    std::vector<std::string> problems;
    if (n_blocks < 1) problems.push_back("synth n_blocks must be >= 1");
    if (pool_size < 1) problems.push_back("synth pool_size must be >= 1");
    if (txs_lo > txs_hi) problems.push_back("synth txs_lo must not exceed txs_hi");
    if (!problems.empty()) throw ConfigError(problems);
  }
};

namespace detail {

inline std::string random_hex_bytes(Rng& rng, std::size_t n_bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out = "0x";
  for (std::size_t i = 0; i < n_bytes; ++i) {
    const unsigned byte = static_cast<unsigned>(rng.below(256));
    out.push_back(digits[byte >> 4]);
    out.push_back(digits[byte & 0xf]);
  }
  return out;
}

}  // namespace detail

inline std::vector<std::string> synth_address_pool(Rng& rng, std::size_t pool_size) {
  std::vector<std::string> pool;
  pool.reserve(pool_size);
  for (std::size_t k = 0; k < pool_size; ++k) {
    pool.push_back(detail::random_hex_bytes(rng, 20));
  }
  return pool;
}

inline std::vector<BlockRecord> synth_blocks(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::vector<std::string> pool = synth_address_pool(rng, cfg.pool_size);

  std::vector<double> cum(cfg.pool_size);
  double total = 0.0;
  for (std::size_t k = 0; k < cfg.pool_size; ++k) {
    total += 1.0 / static_cast<double>(k + 1);
    cum[k] = total;
  }

  std::vector<BlockRecord> blocks;
  blocks.reserve(cfg.n_blocks);
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    BlockRecord block;
    block.number = cfg.start_number + b;
    block.timestamp = cfg.start_timestamp + 12 * b;
    const std::uint64_t n_txs = cfg.txs_lo + rng.below(cfg.txs_hi - cfg.txs_lo + 1);
    std::uint64_t gas_sum = 0;
    for (std::uint64_t t = 0; t < n_txs; ++t) {
      TxRecord tx;
      tx.from = pool[rng.pick_cumulative(cum)];
      tx.to = pool[rng.pick_cumulative(cum)];
      tx.hash = detail::random_hex_bytes(rng, 32);
      tx.gas = 21000 + rng.below(100000);
      tx.gas_price = (1 + rng.below(200)) * 1000000000ULL;
      tx.value = U256::from_u64(rng.below(1000000000000000000ULL));
      gas_sum += tx.gas;
      block.transactions.push_back(std::move(tx));
    }
    block.gas_used = gas_sum;
    block.gas_limit = std::max<std::uint64_t>(gas_sum, 30000000);
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace ethgnn
