#include "sshxxz/disorder.hpp"

#include <cmath>
#include <stdexcept>

#include "sshxxz/parallel.hpp"

namespace sshxxz {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t dipolar_pair_count(const ChainParams& p) {
  return p.k_dip > 0.0 ? static_cast<std::size_t>(p.n_sites) * (p.n_sites - 1) / 2 : 0;
}

}  // namespace

DisorderRealization sample_realization(std::mt19937_64& rng, int n_sites, double d_j, double d_k,
                                       std::size_t n_pairs) {
  if (n_sites < 2) throw std::invalid_argument("need at least two sites");
  if (!(d_j >= 0.0) || !(d_k >= 0.0)) throw std::invalid_argument("disorder amplitudes must be >= 0");
  std::uniform_real_distribution<double> xi(-1.0, 1.0);
  DisorderRealization r;
  r.d_j = d_j;
  r.d_k = d_k;
  r.xi_j.resize(n_sites - 1);
  for (auto& x : r.xi_j) x = xi(rng);
  r.xi_k.resize(n_pairs);
  for (auto& x : r.xi_k) x = xi(rng);
  return r;
}

std::uint64_t realization_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

DisorderRealization realization_at(const ChainParams& params, double d_j, double d_k,
                                   std::uint64_t seed, std::uint64_t index) {
  std::mt19937_64 rng(realization_seed(seed, index));
  auto r = sample_realization(rng, params.n_sites, d_j, d_k, dipolar_pair_count(params));
  r.seed = seed;
  r.index = index;
  return r;
}

DisorderSummary averaged_transfer(const ChainParams& params, Metric metric, double arrival_time,
                                  double d_j, double d_k, int m_r, std::uint64_t seed,
                                  unsigned workers) {
  params.validate();
  if (m_r < 1) throw std::invalid_argument("need at least one realization");
  if (!(arrival_time >= 0.0)) throw std::invalid_argument("arrival time must be >= 0");
  DisorderSummary out;
  out.m_r = m_r;
  out.arrival_time = arrival_time;
  out.values.resize(m_r);
  parallel_for(static_cast<std::size_t>(m_r), workers, [&](std::size_t i) {
    const auto r = realization_at(params, d_j, d_k, seed, i);
    out.values[i] = TransferEngine(params, &r).metric(metric, arrival_time);
  });

  // Shifted, compensated sums in index order: identical values give an exact
  // mean and a zero error regardless of m_r.
  const double ref = out.values.front();
  double sum = 0.0, comp = 0.0;
  for (double v : out.values) {
    const double x = v - ref;
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  const double shift = (sum + comp) / m_r;
  out.mean = ref + shift;
  if (m_r > 1) {
    double ss = 0.0;
    for (double v : out.values) {
      const double d = (v - ref) - shift;
      ss += d * d;
    }
    out.std_error = std::sqrt(ss / (m_r - 1) / m_r);
  }
  return out;
}

double clean_arrival_time(const ChainParams& params, Metric metric, const TimeGrid& grid) {
  const TransferEngine engine(params);
  const auto values = engine.series(metric, grid);
  return max_in_window(grid, values, [&](double t) { return engine.metric(metric, t); }).t;
}

}  // namespace sshxxz
