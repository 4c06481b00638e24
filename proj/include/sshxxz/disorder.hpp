#pragma once

// Static coupling disorder: reproducible realizations and averages of a
// transfer metric at the clean-chain arrival time.

#include <cstdint>
#include <random>
#include <vector>

#include "sshxxz/chain_model.hpp"
#include "sshxxz/propagation.hpp"

namespace sshxxz {

/// Draws xi uniformly on [-1, 1] for each of the n_sites - 1 bonds and each of
/// the n_pairs dipolar pairs (bonds first).
DisorderRealization sample_realization(std::mt19937_64& rng, int n_sites, double d_j, double d_k,
                                       std::size_t n_pairs = 0);

/// Seed of realization `index` under master `seed`; independent of evaluation order.
std::uint64_t realization_seed(std::uint64_t seed, std::uint64_t index);

/// The realization used by averaged_transfer for (seed, index).
DisorderRealization realization_at(const ChainParams& params, double d_j, double d_k,
                                   std::uint64_t seed, std::uint64_t index);

struct DisorderSummary {
  double mean = 0.0;
  double std_error = 0.0;
  int m_r = 0;
  double arrival_time = 0.0;
  std::vector<double> values;  // per realization, by index
};

DisorderSummary averaged_transfer(const ChainParams& params, Metric metric, double arrival_time,
                                  double d_j, double d_k, int m_r, std::uint64_t seed,
                                  unsigned workers = 0);

/// Time of the maximum of `metric` for the clean chain over `grid`.
double clean_arrival_time(const ChainParams& params, Metric metric, const TimeGrid& grid);

}  // namespace sshxxz
