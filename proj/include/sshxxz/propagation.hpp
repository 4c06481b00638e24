#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sshxxz/chain_model.hpp"
#include "sshxxz/spectral.hpp"

namespace sshxxz {

using Complex = std::complex<double>;

/// Uniform time grid t_i = start + i * step, i < count.
struct TimeGrid {
  double start = 0.0;
  double step = 0.05;
  std::size_t count = 0;

  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  double back() const { return at(count - 1); }
  bool empty() const { return count == 0; }

  /// Grid covering [t0, t1] inclusive; the last point is t1 rounded to the step.
  static TimeGrid window(double t0, double t1, double step);
};

/// e^{-i lambda_k t} on successive grid points by complex recurrence, resynced
/// from the exact phase every few hundred steps.
class PhaseStepper {
public:
  PhaseStepper(const RealVector& eigenvalues, const TimeGrid& grid);

  const ComplexVector& phases() const { return phases_; }
  std::size_t index() const { return index_; }
  void advance();

private:
  void resync();

  RealVector eigenvalues_;
  TimeGrid grid_;
  ComplexVector step_;
  ComplexVector phases_;
  std::size_t index_ = 0;
};

/// psi(t) = V exp(-i Lambda t) V^T psi(0) for each requested time.
std::vector<ComplexVector> propagate(const SpectralDecomposition& spec,
                                     const ComplexVector& initial, std::span<const double> times);
ComplexVector propagate(const SpectralDecomposition& spec, const ComplexVector& initial, double t);

/// Basis vector for a pattern, as a complex state.
ComplexVector basis_state(const SubspaceBasis& basis, Pattern p);

/// <to| exp(-iHt) |from> expressed as sum_k weights_k exp(-i lambda_k t).
struct TransitionChannel {
  RealVector weights;
  Complex at(const RealVector& eigenvalues, double t) const;
  Complex at(const ComplexVector& phases) const { return weights.dot(phases); }
};

TransitionChannel make_channel(const SpectralDecomposition& spec, Pattern from, Pattern to);

struct AmplitudeSet {
  double t = 0.0;
  Complex f_1N;    // <N|U|1>
  Complex f_2Nm1;  // <N-1|U|2>
  Complex f_1Nm1;  // <N-1|U|1>
  Complex f_2N;    // <N|U|2>
  Complex f_12;    // <N-1,N|U|1,2>
};

enum class Metric { P1, P2, F1, F12, F2 };
const char* metric_name(Metric m);
/// Case-insensitive inverse of metric_name.
Metric parse_metric(std::string_view name);

enum class GammaMode { Optimal, Bare };

/// 1/2 + |f| cos(gamma) / 3 + |f|^2 / 6.
double fidelity_f1(Complex f_1N, GammaMode mode = GammaMode::Optimal);
double fidelity_f12(const AmplitudeSet& a);

/// Averaged two-qubit fidelity. With gamma != 0 the amplitudes are dressed by
/// a uniform z-field: one-excitation amplitudes gain exp(i gamma), the
/// two-excitation amplitude gains exp(i gamma (N-4)/(N-2)).
double fidelity_f2(const AmplitudeSet& a, double gamma = 0.0, int n_sites = 0);

/// Phase-decomposed interference term: fidelity_f2 = 1/4 + (|f_1N|^2 +
/// |f_2Nm1|^2 + |f_12|^2)/20 + dressed_interference/10.
double dressed_interference(const AmplitudeSet& a, double gamma, int n_sites);

/// gamma produced by a Zeeman field b_z acting for time t in this model's
/// convention (sector energies b_z (N - 2k) / 2, measured from raw amplitudes).
double zeeman_gamma(double b_z, double t, int n_sites);

/// Transfer amplitudes and metrics for one chain. One- and two-excitation
/// sectors are used when k_dip = 0; otherwise the full space is propagated and
/// the same basis states are read out.
class TransferEngine {
public:
  explicit TransferEngine(const ChainParams& params, const DisorderRealization* disorder = nullptr);

  const ChainParams& params() const { return params_; }
  bool has_two_excitation() const { return params_.n_sites >= 4; }

  Complex f_1N(double t) const;
  AmplitudeSet amplitudes(double t) const;
  std::vector<AmplitudeSet> amplitudes(const TimeGrid& grid) const;

  double metric(Metric m, double t) const;
  std::vector<double> series(Metric m, const TimeGrid& grid) const;

  /// One-excitation sector spectrum, or the full-space spectrum when k_dip > 0.
  const SpectralDecomposition& spectrum() const { return *spec1_; }
  const SpectralDecomposition* two_excitation_spectrum() const {
    return spec2_ ? &*spec2_ : nullptr;
  }

private:
  void require_two(Metric m) const;
  bool needs_two(Metric m) const { return m == Metric::P2 || m == Metric::F2; }
  bool needs_extra_one(Metric m) const { return m == Metric::F12 || m == Metric::F2; }

  ChainParams params_;
  // spec1_ is the one-excitation sector, or the full space when k_dip > 0, in
  // which case spec2_ is left empty and two-excitation channels use spec1_.
  std::optional<SpectralDecomposition> spec1_;
  std::optional<SpectralDecomposition> spec2_;
  TransitionChannel c_1N_, c_2Nm1_, c_1Nm1_, c_2N_, c_12_;
};

std::vector<AmplitudeSet> amplitudes(const ChainParams& params, const TimeGrid& grid);

double metric_value(Metric m, const AmplitudeSet& a, int n_sites);

struct TransferMetrics {
  TimeGrid grid;
  std::vector<double> p1, p2, f1, f12, f2;
  double b_z = 0.0;
};

TransferMetrics transfer_metrics(const ChainParams& params, const TimeGrid& grid);

struct WindowMax {
  double t = 0.0;
  double value = 0.0;
};

/// Grid argmax (first index on ties) followed by golden-section refinement of
/// `metric` within one grid step on either side. Throws on an empty grid.
WindowMax max_in_window(const TimeGrid& grid, std::span<const double> values,
                        const std::function<double(double)>& metric);

/// Golden-section maximization on [lo, hi].
WindowMax golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-10);

struct BzOptimum {
  double t = 0.0;
  double b_z = 0.0;
  double f2 = 0.0;
  double gamma = 0.0;
  double f2_no_field = 0.0;  // max_t F2 with b_z = 0
  double t_no_field = 0.0;
};

/// Maximize F2 over the grid times and over the Zeeman field. For each time,
/// the field phase is scanned on `phase_points` points of a full period and
/// refined locally; the reported b_z is the smallest-magnitude field giving
/// the optimal phase.
BzOptimum optimize_bz(const ChainParams& params, const TimeGrid& grid, int phase_points = 720);

struct LeakageReport {
  double max_leakage = 0.0;
  double t_at_max = 0.0;
};

/// Population outside the initial magnetization sector, maximized over the
/// grid. The initial state has excitations on sites 1..k.
LeakageReport leakage(const ChainParams& params, int initial_excitations, const TimeGrid& grid);

}  // namespace sshxxz
