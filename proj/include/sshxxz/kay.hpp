#pragma once

// Spectral perfect-transfer search: consecutive one-excitation eigenvalue gaps
// delta_i = lambda_{i+1} - lambda_i must equal q_i pi / T with odd q_i.

#include <span>
#include <string>
#include <vector>

#include "sshxxz/chain_model.hpp"

namespace sshxxz {

struct KaySolution {
  double eta = 0.0;
  double delta = 0.0;
  double arrival_time = 0.0;
  std::vector<int> q;
  double residual = 0.0;  // max_i |delta_i - q_i pi / T|
};

/// max_i |gaps_i - q_i pi / T|.
double kay_residual(std::span<const double> gaps, std::span<const int> q, double arrival_time);

/// Consecutive differences of an ascending spectrum.
std::vector<double> spectral_gaps(std::span<const double> eigenvalues);

struct KayExactOptions {
  int q_max = 37;
  int seed_grid = 200;  // seed cells per axis
  double eta_lo = -1.0, eta_hi = 1.0;
  double delta_lo = -2.0, delta_hi = 2.0;
  double tolerance = 1e-9;
  unsigned workers = 0;
};

/// All (eta, Delta, T) of the four-site chain meeting the gap condition exactly
/// for odd q_i <= q_max, found with a damped Newton solve on the closed-form
/// eigenvalues. Sorted by (q1, q2, q3, eta).
std::vector<KaySolution> kay_exact_n4(const KayExactOptions& options = {});

struct KayFit {
  bool valid = false;
  std::string diagnostic;  // why the point was rejected, when !valid
  double residual = 0.0;
  double arrival_time = 0.0;
  std::vector<int> q;
};

/// Best odd-integer fit of a spectrum's gaps over arrival times T >= t_min.
KayFit best_kay_fit(std::span<const double> eigenvalues, int q_max, double t_min = 1.0);

struct KayRelaxedCell {
  double eta = 0.0;
  double delta = 0.0;
  KayFit fit;
  bool flagged = false;  // fit.valid && fit.residual <= epsilon
};

/// Relaxed gap condition on an (eta, Delta) grid using the numerically
/// diagonalized one-excitation spectrum of `base` (its eta and delta are
/// overridden per cell). Output is row-major over (eta, delta).
std::vector<KayRelaxedCell> kay_relaxed(const ChainParams& base, std::span<const double> etas,
                                        std::span<const double> deltas, double epsilon,
                                        int q_max, unsigned workers = 0);

}  // namespace sshxxz
