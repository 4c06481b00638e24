#pragma once

// First-order Krotov optimization of one-excitation transfer |1> -> |N> with a
// z field u(t) sigma^z_1 / 2 on the first site, and minimum-time scans.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sshxxz/chain_model.hpp"

namespace sshxxz {

/// sin^2(pi t / T).
double sin2_shape(double t, double duration);

/// Piecewise-constant pulse on n_slices equal slices of [0, T]. Slice values
/// live at the slice midpoints; the update is shaped by S, so the pulse at
/// the nodes t = 0 and t = T stays equal to the guess.
struct PulseProtocol {
  double duration = 0.0;
  int n_slices = 0;
  double lambda_a = 0.02;
  std::vector<double> u;            // slice values
  std::vector<double> shape;        // S at slice midpoints
  std::vector<double> guess;        // guess at slice midpoints
  std::vector<double> guess_nodes;  // guess at the n_slices + 1 nodes
  std::vector<double> history;      // J_T before the first and after every iteration

  double dt() const { return duration / n_slices; }
  double midpoint(int k) const { return (k + 0.5) * dt(); }
  /// Pulse at node k: guess(t_k) + S(t_k) times the slice's unshaped update.
  std::vector<double> node_values() const;
};

/// Pulse of the default form: guess(t) sampled on the slices, S = sin^2.
PulseProtocol make_protocol(double duration, int n_slices,
                            const std::function<double(double)>& guess, double lambda_a = 0.02);

/// max(1000, ceil(20 T)).
int default_slices(double duration);

struct KrotovOptions {
  double lambda_a = 0.02;
  int max_iterations = 5000;
  double threshold = 1e-6;  // stop once J_T < threshold
  int stall_window = 50;    // halve lambda_a after this many stalled iterations
  double stall_tolerance = 1e-12;
};

struct ControlResult {
  double infidelity = 1.0;
  bool converged = false;
  int iterations = 0;
  PulseProtocol pulse;
};

/// J_T = 1 - |<N|psi(T)>|^2 for a pulse, with piecewise-constant propagation
/// from |1>. The chain must have k_dip = 0.
double pulse_infidelity(const ChainParams& params, const PulseProtocol& pulse);

/// States at the n_slices + 1 nodes under the pulse, starting from |1>
/// (forward) or, backward from |N> at t = T, when `backward` is set.
std::vector<ComplexVector> pulse_trajectory(const ChainParams& params, const PulseProtocol& pulse,
                                            bool backward = false);

ControlResult krotov_optimize(const ChainParams& params, PulseProtocol pulse,
                              const KrotovOptions& options = {});

/// Default run: guess 0.1 S(t), default slice count.
ControlResult krotov_optimize(const ChainParams& params, double duration,
                              const KrotovOptions& options = {});

struct TminPoint {
  double duration = 0.0;
  double infidelity = 1.0;
  int iterations = 0;
};

struct TminResult {
  std::optional<double> t_min;       // empty when no grid point succeeds
  std::optional<double> grid_t_min;  // smallest successful grid point
  std::vector<TminPoint> evaluated;  // in evaluation order
};

struct TminOptions {
  double success_threshold = 1e-4;
  double refine_to = 0.5;  // bisection resolution below the first successful grid point
  int max_iterations = 5000;
  double lambda_a = 0.02;
};

/// Smallest duration in an ascending grid whose optimized infidelity is below
/// the threshold, located by bisection over the grid (success is taken to be
/// monotone in T) and then refined between neighbouring grid points.
TminResult tmin_scan(const ChainParams& params, std::span<const double> durations,
                     const TminOptions& options = {});

/// Uniform grid lo, lo + step, ..., <= hi.
std::vector<double> duration_grid(double lo, double hi, double step);

}  // namespace sshxxz
