#include "sshxxz/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "sshxxz/disorder.hpp"
#include "sshxxz/kay.hpp"
#include "sshxxz/parallel.hpp"
#include "sshxxz/spectral.hpp"

#ifndef SSHXXZ_VERSION
#define SSHXXZ_VERSION "unknown"
#endif

namespace sshxxz {

namespace {

struct MetricName {
  MapMetric metric;
  const char* name;
};

constexpr MetricName kMetricNames[] = {
    {MapMetric::MaxP1, "max-P1"},
    {MapMetric::MaxP2, "max-P2"},
    {MapMetric::MaxF12, "max-F12"},
    {MapMetric::MaxF2, "max-F2"},
    {MapMetric::Chi, "chi"},
    {MapMetric::Chi2, "chi2"},
    {MapMetric::TimeToThreshold, "time-to-threshold"},
    {MapMetric::KayResidual, "kay-residual"},
    {MapMetric::DisorderMean, "disorder-mean"},
};

MapCell max_cell(const ChainParams& p, Metric m, const TimeGrid& window) {
  const TransferEngine engine(p);
  const auto values = engine.series(m, window);
  const auto best = max_in_window(window, values, [&](double t) { return engine.metric(m, t); });
  return {best.value, best.t, p.b_z};
}

MapCell localization_cell(const ChainParams& p, int excitations) {
  const auto basis = p.k_dip > 0.0 ? make_full(p.n_sites) : make_sector(p.n_sites, excitations);
  const auto spec = diagonalize(build_hamiltonian(p, build_couplings(p), basis));
  const Pattern edge = excitations == 1 ? pattern_of_sites({1}) : pattern_of_sites({1, 2});
  const auto loc = edge_localization(spec, edge);
  const double eps = std::abs(loc.splitting);
  // sin^2(eps t / 2) first peaks at pi / eps.
  return {loc.chi, eps > 0.0 ? std::numbers::pi / eps : kNotReached, loc.splitting};
}

MapCell threshold_cell(const SweepGrid& g, const ChainParams& p, const TimeGrid& window) {
  const TransferEngine engine(p);
  const auto values = engine.series(g.threshold_metric, window);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < g.threshold) continue;
    if (i == 0) return {window.at(0), window.at(0), values[0]};
    double a = window.at(i - 1), b = window.at(i);
    for (int k = 0; k < 60 && b - a > 1e-10; ++k) {
      const double m = 0.5 * (a + b);
      (engine.metric(g.threshold_metric, m) >= g.threshold ? b : a) = m;
    }
    return {b, b, engine.metric(g.threshold_metric, b)};
  }
  return {kNotReached, kNotReached, 0.0};
}

MapCell kay_cell(const SweepGrid& g, const ChainParams& p) {
  ChainParams clean = p;
  clean.k_dip = 0.0;
  const auto spec =
      diagonalize(build_xxz_hamiltonian(clean, build_couplings(clean), make_sector(p.n_sites, 1)));
  const auto fit = best_kay_fit(
      {spec.eigenvalues.data(), static_cast<std::size_t>(spec.eigenvalues.size())}, g.q_max);
  if (!fit.valid) return {kNotReached, kNotReached, 0.0};
  return {fit.residual, fit.arrival_time, fit.residual <= g.kay_epsilon ? 1.0 : 0.0};
}

MapCell disorder_cell(const SweepGrid& g, const ChainParams& p, const TimeGrid& window) {
  const double t = clean_arrival_time(p, Metric::P1, window);
  // Every cell draws from the same master seed, so neighbouring cells share
  // realizations and the map is smooth in the parameters.
  const auto s = averaged_transfer(p, Metric::P1, t, g.d_j, g.d_k, g.realizations, g.seed, 1);
  return {s.mean, t, s.std_error};
}

}  // namespace

const char* map_metric_name(MapMetric m) {
  for (const auto& e : kMetricNames)
    if (e.metric == m) return e.name;
  return "unknown";
}

MapMetric parse_map_metric(std::string_view id) {
  for (const auto& e : kMetricNames)
    if (id == e.name) return e.metric;
  throw std::invalid_argument("unknown map metric '" + std::string(id) + "'");
}

std::vector<double> AxisRange::values() const {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
    throw std::invalid_argument("axis range must satisfy lo <= hi and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  // Land exactly on hi when it is a lattice point, so symmetric ranges stay symmetric.
  if (count > 1 && std::abs(out.back() - hi) < 1e-9 * step) out.back() = hi;
  return out;
}

void SweepGrid::validate() const {
  (void)delta.values();
  (void)eta.values();
  if (eta.lo < -1.0 || eta.hi > 1.0) throw std::invalid_argument("eta range must lie in [-1, 1]");
  if (!(t_max > 0.0) || !(t_step > 0.0)) throw std::invalid_argument("invalid time window");
  if (metric == MapMetric::KayResidual && (q_max < 1 || q_max % 2 == 0))
    throw std::invalid_argument("q_max must be a positive odd integer");
  if (metric == MapMetric::DisorderMean && realizations < 1)
    throw std::invalid_argument("need at least one realization");
  if (!(d_j >= 0.0) || !(d_k >= 0.0)) throw std::invalid_argument("disorder amplitudes must be >= 0");
}

MapCell evaluate_cell(const SweepGrid& g, const ChainParams& p) {
  p.validate();
  const TimeGrid window = g.window();
  switch (g.metric) {
    case MapMetric::MaxP1: return max_cell(p, Metric::P1, window);
    case MapMetric::MaxP2: return max_cell(p, Metric::P2, window);
    case MapMetric::MaxF12: return max_cell(p, Metric::F12, window);
    case MapMetric::MaxF2: {
      if (!g.optimize_field) return max_cell(p, Metric::F2, window);
      const auto opt = optimize_bz(p, window);
      return {opt.f2, opt.t, opt.b_z};
    }
    case MapMetric::Chi: return localization_cell(p, 1);
    case MapMetric::Chi2: return localization_cell(p, 2);
    case MapMetric::TimeToThreshold: return threshold_cell(g, p, window);
    case MapMetric::KayResidual: return kay_cell(g, p);
    case MapMetric::DisorderMean: return disorder_cell(g, p, window);
  }
  throw std::invalid_argument("unknown map metric");
}

MapResult run_sweep(const SweepGrid& grid, const ChainParams& params_template, unsigned workers) {
  grid.validate();
  params_template.validate();
  MapResult out;
  out.grid = grid;
  out.params = params_template;
  out.deltas = grid.delta.values();
  out.etas = grid.eta.values();
  out.cells.resize(out.deltas.size() * out.etas.size());
  parallel_for(out.cells.size(), workers, [&](std::size_t idx) {
    ChainParams p = params_template;
    p.eta = out.etas[idx / out.deltas.size()];
    p.delta = out.deltas[idx % out.deltas.size()];
    out.cells[idx] = evaluate_cell(grid, p);
  });
  out.code_version = code_version();
  auto meta = map_metadata(out);
  meta.erase("provenance");
  out.params_hash = content_hash(meta);
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

void write_map_csv(std::ostream& out, const MapResult& map) {
  out << "delta,eta,value,t_star,aux\n";
  for (std::size_t ie = 0; ie < map.etas.size(); ++ie)
    for (std::size_t id = 0; id < map.deltas.size(); ++id) {
      const auto& c = map.at(ie, id);
      out << format_number(map.deltas[id]) << ',' << format_number(map.etas[ie]) << ','
          << format_number(c.value) << ',' << format_number(c.t_star) << ','
          << format_number(c.aux) << '\n';
    }
}

nlohmann::json params_json(const ChainParams& p) {
  return {{"n_sites", p.n_sites}, {"j", p.j},         {"eta", p.eta},
          {"delta", p.delta},     {"k_dip", p.k_dip}, {"b_z", p.b_z}};
}

nlohmann::json map_metadata(const MapResult& map) {
  const auto& g = map.grid;
  const char* aux = "b_z";
  const char* t_star = "time of the maximum";
  switch (g.metric) {
    case MapMetric::Chi:
    case MapMetric::Chi2:
      aux = "eigenvalue splitting eps of the two dominant eigenstates";
      t_star = "pi / |eps|, or -1 when eps = 0";
      break;
    case MapMetric::TimeToThreshold:
      aux = "metric value at t_star";
      t_star = "same as value";
      break;
    case MapMetric::KayResidual:
      aux = "1 when residual <= kay_epsilon, else 0";
      t_star = "fitted arrival time";
      break;
    case MapMetric::DisorderMean:
      aux = "standard error of the mean";
      t_star = "clean-chain arrival time (argmax P1 over the window)";
      break;
    case MapMetric::MaxF2:
      aux = g.optimize_field ? "optimal b_z" : "b_z";
      break;
    default: break;
  }
  nlohmann::json j;
  j["metric"] = map_metric_name(g.metric);
  j["params"] = params_json(map.params);
  j["grid"] = {{"delta", {{"lo", g.delta.lo}, {"hi", g.delta.hi}, {"step", g.delta.step},
                          {"count", map.deltas.size()}}},
               {"eta", {{"lo", g.eta.lo}, {"hi", g.eta.hi}, {"step", g.eta.step},
                        {"count", map.etas.size()}}},
               {"t_max", g.t_max},
               {"t_step", g.t_step}};
  switch (g.metric) {
    case MapMetric::TimeToThreshold:
      j["threshold"] = g.threshold;
      j["threshold_metric"] = metric_name(g.threshold_metric);
      break;
    case MapMetric::MaxF2: j["optimize_field"] = g.optimize_field; break;
    case MapMetric::KayResidual:
      j["q_max"] = g.q_max;
      j["kay_epsilon"] = g.kay_epsilon;
      break;
    case MapMetric::DisorderMean:
      j["disorder"] = {{"d_j", g.d_j}, {"d_k", g.d_k}, {"realizations", g.realizations}};
      j["seed"] = g.seed;
      break;
    default: break;
  }
  j["columns"] = {{"delta", "anisotropy"},
                  {"eta", "dimerization"},
                  {"value", map_metric_name(g.metric)},
                  {"t_star", t_star},
                  {"aux", aux}};
  j["not_reached_sentinel"] = kNotReached;
  j["row_order"] = "eta-major, delta varies fastest";
  j["provenance"] = {{"params_hash", map.params_hash},
                     {"code_version", map.code_version},
                     {"seed", g.seed}};
  return j;
}

std::string content_hash(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string code_version() { return SSHXXZ_VERSION; }

}  // namespace sshxxz
