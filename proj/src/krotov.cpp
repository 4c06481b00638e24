#include "sshxxz/krotov.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace sshxxz {

namespace {

using Complex = std::complex<double>;

// One-excitation sector, index i = site i + 1, with H(u) = H0 + u D and
// D = sigma^z_1 / 2 diagonal.
class ControlledChain {
public:
  explicit ControlledChain(const ChainParams& params) {
    params.validate();
    if (params.k_dip > 0.0)
      throw std::invalid_argument("control runs in the one-excitation sector; k_dip must be 0");
    const auto basis = make_sector(params.n_sites, 1);
    h0_ = build_hamiltonian(params, build_couplings(params), basis).matrix;
    d_ = RealVector::Constant(params.n_sites, 0.5);
    d_(0) = -0.5;
    h0_norm_ = h0_.cwiseAbs().colwise().sum().maxCoeff();
  }

  int dim() const { return static_cast<int>(d_.size()); }
  const RealVector& control_diagonal() const { return d_; }

  // psi <- exp(sign * i H(u) dt) psi by a Taylor series summed to round-off.
  void step(ComplexVector& psi, double u, double dt, double sign) const {
    const double norm = (h0_norm_ + 0.5 * std::abs(u)) * dt;
    const int substeps = std::max(1, static_cast<int>(std::ceil(norm / 0.5)));
    const double h = dt / substeps;
    const Complex factor(0.0, sign * h);
    diag_ = u * d_;
    for (int s = 0; s < substeps; ++s) {
      term_ = psi;
      for (int m = 1; m < 40; ++m) {
        next_.noalias() = h0_ * term_;
        next_ += diag_.cwiseProduct(term_);
        term_ = next_ * (factor / static_cast<double>(m));
        psi += term_;
        if (term_.squaredNorm() < 1e-36 * psi.squaredNorm()) break;
      }
    }
  }

  ComplexVector initial() const {
    ComplexVector v = ComplexVector::Zero(dim());
    v(0) = 1.0;
    return v;
  }

  Complex target_overlap(const ComplexVector& psi) const { return psi(dim() - 1); }

  ComplexVector forward(std::span<const double> u, double dt) const {
    ComplexVector psi = initial();
    for (double uk : u) step(psi, uk, dt, -1.0);
    return psi;
  }

private:
  RealMatrix h0_;
  RealVector d_;
  double h0_norm_ = 0.0;
  // Scratch for step(); a ControlledChain is used by one run at a time.
  mutable ComplexVector term_, next_;
  mutable RealVector diag_;
};

void check_protocol(const PulseProtocol& p) {
  if (!(p.duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (!(p.lambda_a > 0.0)) throw std::invalid_argument("lambda_a must be positive");
  const auto n = static_cast<std::size_t>(p.n_slices);
  if (p.n_slices < 1 || p.u.size() != n || p.shape.size() != n || p.guess.size() != n ||
      p.guess_nodes.size() != n + 1)
    throw std::invalid_argument("pulse arrays do not match the slice count");
  for (double v : p.u)
    if (!std::isfinite(v)) throw std::invalid_argument("pulse contains a non-finite value");
}

}  // namespace

double sin2_shape(double t, double duration) {
  const double s = std::sin(std::numbers::pi * t / duration);
  return s * s;
}

std::vector<double> PulseProtocol::node_values() const {
  std::vector<double> out(n_slices + 1);
  for (int k = 0; k <= n_slices; ++k) {
    const int slice = std::min(k, n_slices - 1);
    const double t = k * dt();
    const double unshaped = shape[slice] > 0.0 ? (u[slice] - guess[slice]) / shape[slice] : 0.0;
    out[k] = guess_nodes[k] + sin2_shape(t, duration) * unshaped;
  }
  // sin^2(pi) is not exactly zero in floating point.
  out.front() = guess_nodes.front();
  out.back() = guess_nodes.back();
  return out;
}

PulseProtocol make_protocol(double duration, int n_slices,
                            const std::function<double(double)>& guess, double lambda_a) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (n_slices < 1) throw std::invalid_argument("need at least one slice");
  if (!(lambda_a > 0.0)) throw std::invalid_argument("lambda_a must be positive");
  PulseProtocol p;
  p.duration = duration;
  p.n_slices = n_slices;
  p.lambda_a = lambda_a;
  for (int k = 0; k < n_slices; ++k) {
    const double t = p.midpoint(k);
    p.shape.push_back(sin2_shape(t, duration));
    p.guess.push_back(guess(t));
  }
  p.u = p.guess;
  for (int k = 0; k <= n_slices; ++k) p.guess_nodes.push_back(guess(k * p.dt()));
  return p;
}

int default_slices(double duration) {
  return std::max(1000, static_cast<int>(std::ceil(20.0 * duration)));
}

double pulse_infidelity(const ChainParams& params, const PulseProtocol& pulse) {
  check_protocol(pulse);
  const ControlledChain chain(params);
  return std::max(0.0, 1.0 - std::norm(chain.target_overlap(chain.forward(pulse.u, pulse.dt()))));
}

std::vector<ComplexVector> pulse_trajectory(const ChainParams& params, const PulseProtocol& pulse,
                                            bool backward) {
  check_protocol(pulse);
  const ControlledChain chain(params);
  const int n = pulse.n_slices;
  std::vector<ComplexVector> out(n + 1);
  if (!backward) {
    out[0] = chain.initial();
    for (int k = 0; k < n; ++k) {
      out[k + 1] = out[k];
      chain.step(out[k + 1], pulse.u[k], pulse.dt(), -1.0);
    }
  } else {
    out[n] = ComplexVector::Zero(chain.dim());
    out[n](chain.dim() - 1) = 1.0;
    for (int k = n - 1; k >= 0; --k) {
      out[k] = out[k + 1];
      chain.step(out[k], pulse.u[k], pulse.dt(), +1.0);
    }
  }
  return out;
}

ControlResult krotov_optimize(const ChainParams& params, PulseProtocol pulse,
                              const KrotovOptions& options) {
  check_protocol(pulse);
  if (!(options.lambda_a > 0.0)) throw std::invalid_argument("lambda_a must be positive");
  if (options.max_iterations < 0) throw std::invalid_argument("iteration cap must be >= 0");
  const ControlledChain chain(params);
  const int n = pulse.n_slices;
  const double dt = pulse.dt();
  const int dim = chain.dim();
  const RealVector& d = chain.control_diagonal();
  pulse.lambda_a = options.lambda_a;

  ComplexVector psi_t = chain.forward(pulse.u, dt);
  double j_t = std::max(0.0, 1.0 - std::norm(chain.target_overlap(psi_t)));
  pulse.history.assign(1, j_t);

  std::vector<ComplexVector> chi(n + 1);
  std::vector<double> trial(n);
  int stalled = 0;
  ControlResult out;
  while (out.iterations < options.max_iterations && !(j_t < options.threshold)) {
    ++out.iterations;
    chi[n] = ComplexVector::Zero(dim);
    chi[n](dim - 1) = chain.target_overlap(psi_t);
    for (int k = n - 1; k >= 0; --k) {
      chi[k] = chi[k + 1];
      chain.step(chi[k], pulse.u[k], dt, +1.0);
    }

    ComplexVector psi = chain.initial();
    for (int k = 0; k < n; ++k) {
      const Complex g = chi[k].dot(d.cwiseProduct(psi));  // <chi| D |psi>
      trial[k] = pulse.u[k] + pulse.shape[k] / pulse.lambda_a * g.imag();
      chain.step(psi, trial[k], dt, -1.0);
    }
    const double j_new = std::max(0.0, 1.0 - std::norm(chain.target_overlap(psi)));

    if (j_new > j_t + 1e-12 || !std::isfinite(j_new)) {
      // Overshoot: keep the old pulse and take smaller steps.
      pulse.lambda_a *= 2.0;
      stalled = 0;
      pulse.history.push_back(j_t);
      continue;
    }
    stalled = (j_t - j_new <= options.stall_tolerance * j_t) ? stalled + 1 : 0;
    if (stalled >= options.stall_window) {
      pulse.lambda_a *= 0.5;
      stalled = 0;
    }
    pulse.u = trial;
    psi_t = psi;
    j_t = j_new;
    pulse.history.push_back(j_t);
  }
  out.infidelity = j_t;
  out.converged = j_t < options.threshold;
  out.pulse = std::move(pulse);
  return out;
}

ControlResult krotov_optimize(const ChainParams& params, double duration,
                              const KrotovOptions& options) {
  auto pulse = make_protocol(duration, default_slices(duration),
                             [duration](double t) { return 0.1 * sin2_shape(t, duration); },
                             options.lambda_a);
  return krotov_optimize(params, std::move(pulse), options);
}

TminResult tmin_scan(const ChainParams& params, std::span<const double> durations,
                     const TminOptions& options) {
  if (durations.empty()) throw std::invalid_argument("empty duration grid");
  for (std::size_t i = 1; i < durations.size(); ++i)
    if (!(durations[i] > durations[i - 1])) throw std::invalid_argument("duration grid must ascend");
  if (!(durations.front() > 0.0)) throw std::invalid_argument("durations must be positive");

  TminResult out;
  KrotovOptions kopt;
  kopt.lambda_a = options.lambda_a;
  kopt.max_iterations = options.max_iterations;
  kopt.threshold = options.success_threshold;
  auto succeeds = [&](double t) {
    const auto r = krotov_optimize(params, t, kopt);
    out.evaluated.push_back({t, r.infidelity, r.iterations});
    return r.converged;
  };

  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(durations.size()) - 1;
  if (!succeeds(durations[hi])) return out;
  std::ptrdiff_t lo = -1;
  while (hi - lo > 1) {
    const std::ptrdiff_t mid = lo + (hi - lo) / 2;
    if (succeeds(durations[mid]))
      hi = mid;
    else
      lo = mid;
  }
  out.grid_t_min = durations[hi];
  if (lo < 0) {
    out.t_min = durations[hi];
    return out;
  }
  double a = durations[lo], b = durations[hi];
  while (b - a > options.refine_to) {
    const double m = 0.5 * (a + b);
    if (succeeds(m))
      b = m;
    else
      a = m;
  }
  out.t_min = b;
  return out;
}

std::vector<double> duration_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("invalid duration grid");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * static_cast<double>(i));
  return out;
}

}  // namespace sshxxz
