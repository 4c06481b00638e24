#include "sshxxz/kay.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "sshxxz/parallel.hpp"
#include "sshxxz/spectral.hpp"

namespace sshxxz {

namespace {

using Gaps3 = std::array<double, 3>;

Gaps3 n4_gaps(double eta, double delta) {
  const auto l = n4_exact_eigenvalues(eta, delta);
  return {l[1] - l[0], l[2] - l[1], l[3] - l[2]};
}

struct Triple {
  int q1, q2, q3;
};

std::array<double, 2> ratio_equations(const Triple& q, double eta, double delta) {
  const auto g = n4_gaps(eta, delta);
  return {q.q2 * g[0] - q.q1 * g[1], q.q3 * g[1] - q.q2 * g[2]};
}

double inf_norm(const std::array<double, 2>& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }

// Damped Newton on the two ratio equations; Jacobian by central differences.
bool newton_solve(const Triple& q, double& eta, double& delta, const KayExactOptions& opt) {
  constexpr double h = 1e-6;
  constexpr double margin = 1e-9;
  auto in_box = [&](double e, double d) {
    return e >= opt.eta_lo - margin && e <= opt.eta_hi + margin && d >= opt.delta_lo - margin &&
           d <= opt.delta_hi + margin && std::abs(e) <= 1.0;
  };
  auto f = ratio_equations(q, eta, delta);
  for (int iter = 0; iter < 80; ++iter) {
    if (inf_norm(f) < 1e-14 * q.q2) return true;
    const double ep = std::min(eta + h, 1.0), em = std::max(eta - h, -1.0);
    const auto fe_p = ratio_equations(q, ep, delta);
    const auto fe_m = ratio_equations(q, em, delta);
    const auto fd_p = ratio_equations(q, eta, delta + h);
    const auto fd_m = ratio_equations(q, eta, delta - h);
    const double a = (fe_p[0] - fe_m[0]) / (ep - em), b = (fd_p[0] - fd_m[0]) / (2 * h);
    const double c = (fe_p[1] - fe_m[1]) / (ep - em), d = (fd_p[1] - fd_m[1]) / (2 * h);
    const double det = a * d - b * c;
    if (!std::isfinite(det) || std::abs(det) < 1e-300) return false;
    const double step_eta = -(d * f[0] - b * f[1]) / det;
    const double step_delta = -(-c * f[0] + a * f[1]) / det;
    double scale = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, scale *= 0.5) {
      const double ne = eta + scale * step_eta, nd = delta + scale * step_delta;
      if (!in_box(ne, nd)) continue;
      const auto nf = ratio_equations(q, ne, nd);
      if (inf_norm(nf) < inf_norm(f)) {
        eta = ne;
        delta = nd;
        f = nf;
        improved = true;
        break;
      }
    }
    if (!improved) return inf_norm(f) < 1e-12 * q.q2;
  }
  return inf_norm(f) < 1e-12 * q.q2;
}

}  // namespace

double kay_residual(std::span<const double> gaps, std::span<const int> q, double arrival_time) {
  if (gaps.size() != q.size()) throw std::invalid_argument("gap and q vectors differ in length");
  double r = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i)
    r = std::max(r, std::abs(gaps[i] - q[i] * std::numbers::pi / arrival_time));
  return r;
}

std::vector<double> spectral_gaps(std::span<const double> eigenvalues) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < eigenvalues.size(); ++i)
    gaps.push_back(eigenvalues[i] - eigenvalues[i - 1]);
  return gaps;
}

std::vector<KaySolution> kay_exact_n4(const KayExactOptions& opt) {
  if (opt.q_max < 1 || opt.q_max % 2 == 0) throw std::invalid_argument("q_max must be odd");
  if (opt.seed_grid < 2) throw std::invalid_argument("seed grid too coarse");
  const int g = opt.seed_grid;
  const auto nodes = static_cast<std::size_t>(g + 1);
  auto eta_at = [&](int a) { return opt.eta_lo + (opt.eta_hi - opt.eta_lo) * a / g; };
  auto delta_at = [&](int b) { return opt.delta_lo + (opt.delta_hi - opt.delta_lo) * b / g; };

  std::vector<Gaps3> node_gaps(nodes * nodes);
  for (int a = 0; a <= g; ++a)
    for (int b = 0; b <= g; ++b) node_gaps[a * nodes + b] = n4_gaps(eta_at(a), delta_at(b));

  std::vector<Triple> triples;
  for (int q1 = 1; q1 <= opt.q_max; q1 += 2)
    for (int q2 = 1; q2 <= opt.q_max; q2 += 2)
      for (int q3 = 1; q3 <= opt.q_max; q3 += 2) triples.push_back({q1, q2, q3});

  std::vector<std::vector<KaySolution>> per_triple(triples.size());
  parallel_for(triples.size(), opt.workers, [&](std::size_t ti) {
    const Triple q = triples[ti];
    std::vector<signed char> s1(nodes * nodes), s2(nodes * nodes);
    for (std::size_t k = 0; k < node_gaps.size(); ++k) {
      const auto& gp = node_gaps[k];
      s1[k] = (q.q2 * gp[0] - q.q1 * gp[1]) >= 0.0 ? 1 : -1;
      s2[k] = (q.q3 * gp[1] - q.q2 * gp[2]) >= 0.0 ? 1 : -1;
    }
    auto straddles = [&](const std::vector<signed char>& s, std::size_t a, std::size_t b) {
      const int sum = s[a * nodes + b] + s[(a + 1) * nodes + b] + s[a * nodes + b + 1] +
                      s[(a + 1) * nodes + b + 1];
      return sum != 4 && sum != -4;
    };
    auto& found = per_triple[ti];
    for (std::size_t a = 0; a + 1 < nodes; ++a)
      for (std::size_t b = 0; b + 1 < nodes; ++b) {
        if (!straddles(s1, a, b) || !straddles(s2, a, b)) continue;
        double eta = 0.5 * (eta_at(static_cast<int>(a)) + eta_at(static_cast<int>(a) + 1));
        double delta = 0.5 * (delta_at(static_cast<int>(b)) + delta_at(static_cast<int>(b) + 1));
        if (!newton_solve(q, eta, delta, opt)) continue;
        if (std::abs(eta) >= 1.0 - 1e-9) continue;
        if (eta < opt.eta_lo || eta > opt.eta_hi || delta < opt.delta_lo || delta > opt.delta_hi)
          continue;
        const auto gaps = n4_gaps(eta, delta);
        if (gaps[0] <= 0.0 || gaps[1] <= 0.0 || gaps[2] <= 0.0) continue;
        KaySolution sol;
        sol.eta = eta;
        sol.delta = delta;
        sol.q = {q.q1, q.q2, q.q3};
        sol.arrival_time = q.q2 * std::numbers::pi / gaps[1];
        sol.residual = kay_residual(gaps, sol.q, sol.arrival_time);
        if (sol.residual >= opt.tolerance) continue;
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](const KaySolution& s) {
          return std::hypot(s.eta - eta, s.delta - delta) < 1e-6;
        });
        if (!duplicate) found.push_back(std::move(sol));
      }
  });

  std::vector<KaySolution> out;
  for (auto& v : per_triple)
    for (auto& s : v) out.push_back(std::move(s));
  std::sort(out.begin(), out.end(), [](const KaySolution& x, const KaySolution& y) {
    if (x.q != y.q) return x.q < y.q;
    return x.eta < y.eta;
  });
  return out;
}

KayFit best_kay_fit(std::span<const double> eigenvalues, int q_max, double t_min) {
  KayFit fit;
  const auto gaps = spectral_gaps(eigenvalues);
  if (gaps.empty()) {
    fit.diagnostic = "fewer than two eigenvalues";
    return fit;
  }
  const double min_gap = *std::min_element(gaps.begin(), gaps.end());
  const double max_gap = *std::max_element(gaps.begin(), gaps.end());
  if (min_gap < 1e-12) {
    fit.diagnostic = "degenerate spectrum: a gap vanishes, no odd q fits it";
    return fit;
  }
  const double pi = std::numbers::pi;
  // Every q_i <= q_max needs gap_i T / pi < q_max + 1.
  const double t_hi = (q_max + 1) * pi / max_gap;
  const double step = pi / (4.0 * max_gap);
  std::set<std::vector<int>> candidates;
  std::vector<int> q(gaps.size());
  for (double t = t_min; t <= t_hi; t += step) {
    bool ok = true;
    for (std::size_t i = 0; i < gaps.size() && ok; ++i) {
      const double x = gaps[i] * t / pi;
      int odd = 2 * static_cast<int>(std::floor(x / 2.0)) + 1;
      if (odd < 1) odd = 1;
      q[i] = odd;
      ok = odd <= q_max;
    }
    if (ok) candidates.insert(q);
  }
  if (candidates.empty()) {
    fit.diagnostic = "no odd q vector within q_max for T >= t_min";
    return fit;
  }

  // For fixed q the minimax over x = pi / T of max_i |gap_i - q_i x| sits where
  // a rising line q_i x - gap_i meets a falling one gap_j - q_j x.
  const double x_max = pi / t_min;
  fit.residual = std::numeric_limits<double>::infinity();
  for (const auto& qv : candidates) {
    auto residual_at = [&](double x) {
      double r = 0.0;
      for (std::size_t i = 0; i < gaps.size(); ++i) r = std::max(r, std::abs(gaps[i] - qv[i] * x));
      return r;
    };
    for (std::size_t i = 0; i < gaps.size(); ++i)
      for (std::size_t j = i; j < gaps.size(); ++j) {
        const double x = std::min(x_max, (gaps[i] + gaps[j]) / (qv[i] + qv[j]));
        const double r = residual_at(x);
        if (r < fit.residual) {
          fit.residual = r;
          fit.arrival_time = pi / x;
          fit.q = qv;
        }
      }
  }
  fit.valid = true;
  return fit;
}

std::vector<KayRelaxedCell> kay_relaxed(const ChainParams& base, std::span<const double> etas,
                                        std::span<const double> deltas, double epsilon,
                                        int q_max, unsigned workers) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (q_max < 1 || q_max % 2 == 0) throw std::invalid_argument("q_max must be odd");
  std::vector<KayRelaxedCell> cells(etas.size() * deltas.size());
  const auto basis = make_sector(base.n_sites, 1);
  parallel_for(cells.size(), workers, [&](std::size_t idx) {
    ChainParams p = base;
    p.eta = etas[idx / deltas.size()];
    p.delta = deltas[idx % deltas.size()];
    p.k_dip = 0.0;
    const auto spec = diagonalize(build_xxz_hamiltonian(p, build_couplings(p), basis));
    KayRelaxedCell cell;
    cell.eta = p.eta;
    cell.delta = p.delta;
    cell.fit = best_kay_fit({spec.eigenvalues.data(), static_cast<std::size_t>(spec.eigenvalues.size())},
                            q_max);
    cell.flagged = cell.fit.valid && cell.fit.residual <= epsilon;
    cells[idx] = std::move(cell);
  });
  return cells;
}

}  // namespace sshxxz
