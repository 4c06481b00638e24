#include "sshxxz/propagation.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sshxxz {

namespace {

constexpr std::size_t kResyncInterval = 256;

Complex dress(Complex f, double angle) { return f * std::polar(1.0, angle); }

}  // namespace

TimeGrid TimeGrid::window(double t0, double t1, double step) {
  if (!(step > 0.0) || !(t1 >= t0)) throw std::invalid_argument("empty or inverted time window");
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / step + 1e-9)) + 1;
  return {t0, step, n};
}

PhaseStepper::PhaseStepper(const RealVector& eigenvalues, const TimeGrid& grid)
    : eigenvalues_(eigenvalues), grid_(grid) {
  const auto n = eigenvalues_.size();
  step_.resize(n);
  phases_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) step_(k) = std::polar(1.0, -eigenvalues_(k) * grid_.step);
  resync();
}

void PhaseStepper::resync() {
  const double t = grid_.at(index_);
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k)
    phases_(k) = std::polar(1.0, -eigenvalues_(k) * t);
}

void PhaseStepper::advance() {
  ++index_;
  if (index_ % kResyncInterval == 0)
    resync();
  else
    phases_.array() *= step_.array();
}

ComplexVector basis_state(const SubspaceBasis& basis, Pattern p) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(basis.dimension()));
  v(static_cast<Eigen::Index>(basis.require_index(p))) = 1.0;
  return v;
}

ComplexVector propagate(const SpectralDecomposition& spec, const ComplexVector& initial,
                        double t) {
  if (initial.size() != static_cast<Eigen::Index>(spec.dimension()))
    throw std::invalid_argument("state and spectrum live in different bases");
  if (t == 0.0) return initial;
  ComplexVector coeffs = spec.eigenvectors.transpose().cast<Complex>() * initial;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k)
    coeffs(k) *= std::polar(1.0, -spec.eigenvalues(k) * t);
  return spec.eigenvectors.cast<Complex>() * coeffs;
}

std::vector<ComplexVector> propagate(const SpectralDecomposition& spec,
                                     const ComplexVector& initial,
                                     std::span<const double> times) {
  if (initial.size() != static_cast<Eigen::Index>(spec.dimension()))
    throw std::invalid_argument("state and spectrum live in different bases");
  const ComplexVector coeffs = spec.eigenvectors.transpose().cast<Complex>() * initial;
  const Eigen::MatrixXcd vecs = spec.eigenvectors.cast<Complex>();
  std::vector<ComplexVector> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t == 0.0) {
      out.push_back(initial);
      continue;
    }
    ComplexVector c = coeffs;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -spec.eigenvalues(k) * t);
    out.push_back(vecs * c);
  }
  return out;
}

Complex TransitionChannel::at(const RealVector& eigenvalues, double t) const {
  Complex sum{0.0, 0.0};
  for (Eigen::Index k = 0; k < weights.size(); ++k)
    sum += weights(k) * std::polar(1.0, -eigenvalues(k) * t);
  return sum;
}

TransitionChannel make_channel(const SpectralDecomposition& spec, Pattern from, Pattern to) {
  const auto a = static_cast<Eigen::Index>(spec.basis->require_index(from));
  const auto b = static_cast<Eigen::Index>(spec.basis->require_index(to));
  return {spec.eigenvectors.row(b).transpose().cwiseProduct(spec.eigenvectors.row(a).transpose())};
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::P1: return "p1";
    case Metric::P2: return "p2";
    case Metric::F1: return "f1";
    case Metric::F12: return "f12";
    case Metric::F2: return "f2";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Metric m : {Metric::P1, Metric::P2, Metric::F1, Metric::F12, Metric::F2})
    if (lower == metric_name(m)) return m;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

double fidelity_f1(Complex f_1N, GammaMode mode) {
  const double mod = std::abs(f_1N);
  const double cos_gamma = (mode == GammaMode::Optimal || mod == 0.0) ? 1.0 : f_1N.real() / mod;
  return 0.5 + mod * cos_gamma / 3.0 + mod * mod / 6.0;
}

double fidelity_f12(const AmplitudeSet& a) {
  return (std::norm(a.f_1Nm1) + std::norm(a.f_2N) + std::norm(a.f_2Nm1) / 2.0 +
          std::norm(a.f_1N) / 2.0) / 3.0 +
         (a.f_1Nm1 * std::conj(a.f_2N)).real() / 3.0;
}

double fidelity_f2(const AmplitudeSet& amps, double gamma, int n_sites) {
  Complex a = amps.f_1N, b = amps.f_2Nm1, c = amps.f_12;
  if (gamma != 0.0) {
    if (n_sites < 4) throw std::invalid_argument("field dressing needs the chain length (N >= 4)");
    a = dress(a, gamma);
    b = dress(b, gamma);
    c = dress(c, gamma * (n_sites - 4.0) / (n_sites - 2.0));
  }
  const double moduli = std::norm(a) + std::norm(b) + std::norm(c);
  const Complex interference = a + b + c + (b + c) * std::conj(a) + c * std::conj(b);
  return 0.25 + moduli / 20.0 + interference.real() / 10.0;
}

double dressed_interference(const AmplitudeSet& amps, double gamma, int n_sites) {
  if (n_sites < 4) throw std::invalid_argument("interference term needs N >= 4");
  const double g2 = gamma * (n_sites - 4.0) / (n_sites - 2.0);
  const double g3 = 2.0 * gamma / (n_sites - 2.0);
  const double m1 = std::abs(amps.f_1N), p1 = std::arg(amps.f_1N);
  const double m2 = std::abs(amps.f_2Nm1), p2 = std::arg(amps.f_2Nm1);
  const double m3 = std::abs(amps.f_12), p3 = std::arg(amps.f_12);
  return m1 * std::cos(p1 + gamma) + m2 * std::cos(p2 + gamma) + m3 * std::cos(p3 + g2) +
         m1 * m2 * std::cos(p2 - p1) + m1 * m3 * std::cos(p3 - p1 - g3) +
         m2 * m3 * std::cos(p3 - p2 - g3);
}

double zeeman_gamma(double b_z, double t, int n_sites) {
  return -0.5 * b_z * t * (n_sites - 2.0);
}

TransferEngine::TransferEngine(const ChainParams& params, const DisorderRealization* disorder)
    : params_(params) {
  params_.validate();
  const int n = params_.n_sites;
  const CouplingSet couplings = build_couplings(params_, disorder);
  const Pattern first = pattern_of_sites({1});
  const Pattern last = pattern_of_sites({n});
  if (params_.k_dip > 0.0) {
    spec1_ = diagonalize(build_hamiltonian(params_, couplings, make_full(n)));
  } else {
    spec1_ = diagonalize(build_hamiltonian(params_, couplings, make_sector(n, 1)));
    if (n >= 4) spec2_ = diagonalize(build_hamiltonian(params_, couplings, make_sector(n, 2)));
  }
  c_1N_ = make_channel(*spec1_, first, last);
  if (n >= 4) {
    const Pattern second = pattern_of_sites({2});
    const Pattern penult = pattern_of_sites({n - 1});
    c_2Nm1_ = make_channel(*spec1_, second, penult);
    c_1Nm1_ = make_channel(*spec1_, first, penult);
    c_2N_ = make_channel(*spec1_, second, last);
    const auto& s2 = spec2_ ? *spec2_ : *spec1_;
    c_12_ = make_channel(s2, pattern_of_sites({1, 2}), pattern_of_sites({n - 1, n}));
  }
}

void TransferEngine::require_two(Metric m) const {
  if (!has_two_excitation() && (needs_two(m) || needs_extra_one(m)))
    throw std::invalid_argument(std::string("metric ") + metric_name(m) +
                                " needs N >= 4 (sites 1, 2, N-1, N distinct)");
}

Complex TransferEngine::f_1N(double t) const { return c_1N_.at(spec1_->eigenvalues, t); }

AmplitudeSet TransferEngine::amplitudes(double t) const {
  require_two(Metric::F2);
  const auto& l1 = spec1_->eigenvalues;
  const auto& l2 = spec2_ ? spec2_->eigenvalues : spec1_->eigenvalues;
  return {t, c_1N_.at(l1, t), c_2Nm1_.at(l1, t), c_1Nm1_.at(l1, t), c_2N_.at(l1, t),
          c_12_.at(l2, t)};
}

std::vector<AmplitudeSet> TransferEngine::amplitudes(const TimeGrid& grid) const {
  require_two(Metric::F2);
  std::vector<AmplitudeSet> out;
  out.reserve(grid.count);
  PhaseStepper s1(spec1_->eigenvalues, grid);
  std::optional<PhaseStepper> s2;
  if (spec2_) s2.emplace(spec2_->eigenvalues, grid);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const auto& ph1 = s1.phases();
    const auto& ph2 = s2 ? s2->phases() : ph1;
    out.push_back({grid.at(i), c_1N_.at(ph1), c_2Nm1_.at(ph1), c_1Nm1_.at(ph1), c_2N_.at(ph1),
                   c_12_.at(ph2)});
    s1.advance();
    if (s2) s2->advance();
  }
  return out;
}

double metric_value(Metric m, const AmplitudeSet& a, int n_sites) {
  switch (m) {
    case Metric::P1: return std::norm(a.f_1N);
    case Metric::F1: return fidelity_f1(a.f_1N);
    case Metric::P2: return std::norm(a.f_12);
    case Metric::F12: return fidelity_f12(a);
    case Metric::F2: return fidelity_f2(a, 0.0, n_sites);
  }
  return 0.0;
}

double TransferEngine::metric(Metric m, double t) const {
  require_two(m);
  if (m == Metric::P1) return std::norm(f_1N(t));
  if (m == Metric::F1) return fidelity_f1(f_1N(t));
  if (m == Metric::P2) {
    const auto& l2 = spec2_ ? spec2_->eigenvalues : spec1_->eigenvalues;
    return std::norm(c_12_.at(l2, t));
  }
  return metric_value(m, amplitudes(t), params_.n_sites);
}

std::vector<double> TransferEngine::series(Metric m, const TimeGrid& grid) const {
  require_two(m);
  std::vector<double> out(grid.count);
  if (m == Metric::P1 || m == Metric::F1 || m == Metric::P2) {
    const bool two = (m == Metric::P2);
    const auto& spec = (two && spec2_) ? *spec2_ : *spec1_;
    const auto& channel = two ? c_12_ : c_1N_;
    PhaseStepper stepper(spec.eigenvalues, grid);
    for (std::size_t i = 0; i < grid.count; ++i) {
      const Complex f = channel.at(stepper.phases());
      out[i] = (m == Metric::F1) ? fidelity_f1(f) : std::norm(f);
      stepper.advance();
    }
    return out;
  }
  const auto amps = amplitudes(grid);
  for (std::size_t i = 0; i < grid.count; ++i) out[i] = metric_value(m, amps[i], params_.n_sites);
  return out;
}

std::vector<AmplitudeSet> amplitudes(const ChainParams& params, const TimeGrid& grid) {
  return TransferEngine(params).amplitudes(grid);
}

TransferMetrics transfer_metrics(const ChainParams& params, const TimeGrid& grid) {
  TransferEngine engine(params);
  TransferMetrics out;
  out.grid = grid;
  out.b_z = params.b_z;
  if (!engine.has_two_excitation()) {
    out.p1 = engine.series(Metric::P1, grid);
    out.f1 = engine.series(Metric::F1, grid);
    return out;
  }
  const auto amps = engine.amplitudes(grid);
  const int n = params.n_sites;
  for (const auto& a : amps) {
    out.p1.push_back(metric_value(Metric::P1, a, n));
    out.p2.push_back(metric_value(Metric::P2, a, n));
    out.f1.push_back(metric_value(Metric::F1, a, n));
    out.f12.push_back(metric_value(Metric::F12, a, n));
    out.f2.push_back(metric_value(Metric::F2, a, n));
  }
  return out;
}

WindowMax golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

WindowMax max_in_window(const TimeGrid& grid, std::span<const double> values,
                        const std::function<double(double)>& metric) {
  if (grid.empty() || values.empty()) throw std::invalid_argument("empty time window");
  if (values.size() != grid.count) throw std::invalid_argument("series does not match its grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  WindowMax out{grid.at(best), values[best]};
  if (!metric || grid.count < 2) return out;
  const double lo = std::max(grid.start, out.t - grid.step);
  const double hi = std::min(grid.back(), out.t + grid.step);
  const WindowMax refined = golden_maximize(metric, lo, hi, 1e-9 * std::max(1.0, hi));
  if (refined.value > out.value) out = refined;
  return out;
}

BzOptimum optimize_bz(const ChainParams& params, const TimeGrid& grid, int phase_points) {
  const int n = params.n_sites;
  if (n < 4) throw std::invalid_argument("b_z optimization needs N >= 4");
  if (phase_points < 4) throw std::invalid_argument("too few phase points");
  TransferEngine engine(params);
  const auto amps = engine.amplitudes(grid);

  // F2 as a function of the per-unit phase phi = -b_z t / 2: one-excitation
  // amplitudes gain exp(i (N-2) phi) and the two-excitation amplitude
  // exp(i (N-4) phi), so F2 = base + Re(A e1 + B e2 + C e3) / 10 with period 2 pi.
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Complex> e1(phase_points), e2(phase_points), e3(phase_points);
  for (int j = 0; j < phase_points; ++j) {
    const double phi = two_pi * j / phase_points;
    e1[j] = std::polar(1.0, (n - 2.0) * phi);
    e2[j] = std::polar(1.0, (n - 4.0) * phi);
    e3[j] = std::polar(1.0, -2.0 * phi);
  }

  BzOptimum out;
  out.f2_no_field = -1.0;
  double best = -1.0;
  std::size_t best_t = 0;
  int best_j = 0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const auto& a = amps[i];
    const double f0 = fidelity_f2(a, 0.0, n);
    if (f0 > out.f2_no_field) {
      out.f2_no_field = f0;
      out.t_no_field = a.t;
    }
    if (f0 > best) {
      best = f0;
      best_t = i;
      best_j = 0;
    }
    if (a.t == 0.0) continue;
    const Complex s = a.f_1N + a.f_2Nm1;
    const double base = 0.25 +
                        (std::norm(a.f_1N) + std::norm(a.f_2Nm1) + std::norm(a.f_12)) / 20.0 +
                        (a.f_2Nm1 * std::conj(a.f_1N)).real() / 10.0;
    const Complex cross = a.f_12 * std::conj(s);
    for (int j = 1; j < phase_points; ++j) {
      const double v = base + (s * e1[j] + a.f_12 * e2[j] + cross * e3[j]).real() / 10.0;
      if (v > best + 1e-14) {
        best = v;
        best_t = i;
        best_j = j;
      }
    }
  }

  const auto& a = amps[best_t];
  double phi = two_pi * best_j / phase_points;
  double value = best;
  if (best_j != 0) {
    const double step = two_pi / phase_points;
    auto f = [&](double p) { return fidelity_f2(a, (n - 2.0) * p, n); };
    const auto refined = golden_maximize(f, phi - step, phi + step, 1e-12);
    if (refined.value > value) {
      phi = refined.t;
      value = refined.value;
    }
  }
  // For even N every harmonic is even, so the period in phi is pi.
  const double period = (n % 2 == 0) ? std::numbers::pi : two_pi;
  phi = std::remainder(phi, period);
  out.t = a.t;
  out.f2 = value;
  out.gamma = (n - 2.0) * phi;
  out.b_z = (a.t > 0.0 && phi != 0.0) ? -2.0 * phi / a.t : 0.0;
  return out;
}

LeakageReport leakage(const ChainParams& params, int initial_excitations, const TimeGrid& grid) {
  params.validate();
  const int n = params.n_sites;
  if (initial_excitations < 1 || initial_excitations > n)
    throw std::invalid_argument("initial excitation count outside [1, N]");
  const auto basis = make_full(n);
  const auto spec = diagonalize(build_hamiltonian(params, build_couplings(params), basis));

  Pattern init = 0;
  for (int s = 0; s < initial_excitations; ++s) init |= Pattern{1} << s;
  const RealVector coeffs = spec.eigenvectors.row(static_cast<Eigen::Index>(init)).transpose();

  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < basis->dimension(); ++i)
    if (std::popcount(basis->state(i)) == initial_excitations)
      rows.push_back(static_cast<Eigen::Index>(i));
  RealMatrix sector_vecs(static_cast<Eigen::Index>(rows.size()), spec.eigenvectors.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    sector_vecs.row(static_cast<Eigen::Index>(r)) = spec.eigenvectors.row(rows[r]);
  const Eigen::MatrixXcd sector_c = sector_vecs.cast<Complex>();

  LeakageReport out;
  PhaseStepper stepper(spec.eigenvalues, grid);
  ComplexVector weighted(coeffs.size());
  for (std::size_t i = 0; i < grid.count; ++i) {
    weighted = stepper.phases().cwiseProduct(coeffs.cast<Complex>());
    const double inside = (sector_c * weighted).squaredNorm();
    const double leaked = std::clamp(1.0 - inside, 0.0, 1.0);
    if (leaked > out.max_leakage) {
      out.max_leakage = leaked;
      out.t_at_max = grid.at(i);
    }
    stepper.advance();
  }
  return out;
}

}  // namespace sshxxz
