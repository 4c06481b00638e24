// sshxxz: command-line front end for the dimerized XXZ transfer library.
//
// Exit status: 0 success, 2 usage or parameter-domain error, 3 numerical
// failure, 1 anything else (e.g. I/O). Errors are reported on stderr as a
// one-line JSON object. Artifacts are written only after a run succeeds.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sshxxz/chain_model.hpp"
#include "sshxxz/disorder.hpp"
#include "sshxxz/kay.hpp"
#include "sshxxz/krotov.hpp"
#include "sshxxz/parallel.hpp"
#include "sshxxz/propagation.hpp"
#include "sshxxz/spectral.hpp"
#include "sshxxz/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sshxxz;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Keys accepted in the config file; each has a flag of the same meaning.
const std::vector<std::string> kConfigKeys = {"n_sites", "j",  "eta",          "delta",
                                              "k_dip",   "b_z", "seed",        "d_j",
                                              "d_k",     "realizations", "workers", "out_dir"};

struct Artifact {
  std::string name;
  std::string body;
};

struct RunOutput {
  std::vector<Artifact> files;
  json summary;
};

// Values given on the command line; unset ones fall back to the config file.
struct CommonFlags {
  std::optional<int> n_sites;
  std::optional<double> j, eta, delta, k_dip, b_z;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
  std::string config_path;
};

struct ResolvedCommon {
  ChainParams params;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned workers = 0;
  fs::path out_dir;
  json config;  // raw config file contents, for d_j and friends
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  // A nested {"disorder": {"d_j": .., "d_k": ..}} block is flattened.
  if (j.contains("disorder")) {
    const json block = j["disorder"];
    j.erase("disorder");
    if (!block.is_object()) throw UsageError("config key 'disorder' must hold an object");
    for (const auto& [key, value] : block.items()) {
      if (key != "d_j" && key != "d_k") throw UsageError("unknown config key 'disorder." + key + "'");
      if (j.contains(key)) throw UsageError("config gives '" + key + "' twice");
      j[key] = value;
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
      throw UsageError("unknown config key '" + key + "'");
    if (key == "out_dir" ? !value.is_string() : !value.is_number())
      throw UsageError("config key '" + key + "' has the wrong type");
  }
  return j;
}

template <typename T>
T pick(const std::optional<T>& flag, const json& config, const char* key, T fallback) {
  if (flag) return *flag;
  if (config.contains(key)) return config[key].get<T>();
  return fallback;
}

ResolvedCommon resolve(const CommonFlags& f) {
  ResolvedCommon r;
  r.config = load_config(f.config_path);
  const auto& c = r.config;
  if (!f.n_sites && !c.contains("n_sites")) throw UsageError("--n is required");
  r.params.n_sites = pick(f.n_sites, c, "n_sites", 0);
  r.params.j = pick(f.j, c, "j", 1.0);
  r.params.eta = pick(f.eta, c, "eta", 0.0);
  r.params.delta = pick(f.delta, c, "delta", 0.0);
  r.params.k_dip = pick(f.k_dip, c, "k_dip", 0.0);
  r.params.b_z = pick(f.b_z, c, "b_z", 0.0);
  r.seed_given = f.seed.has_value() || c.contains("seed");
  r.seed = pick<std::uint64_t>(f.seed, c, "seed", 0);
  r.workers = pick<unsigned>(f.workers, c, "workers", 0);
  const char* env = std::getenv("SSHXXZ_OUT_DIR");
  r.out_dir = pick<std::string>(f.out_dir, c, "out_dir", env && *env ? env : "sshxxz_out");
  try {
    r.params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return r;
}

std::string csv_row(std::initializer_list<double> values) {
  std::string row;
  for (double v : values) {
    if (!row.empty()) row += ',';
    row += format_number(v);
  }
  return row + '\n';
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

TimeGrid window_grid(double t_max, double step) {
  if (!(t_max > 0.0) || !(step > 0.0)) throw UsageError("window and step must be positive");
  return TimeGrid::window(0.0, t_max, step);
}

// --- subcommands --------------------------------------------------------

struct SpectrumOpts {
  int excitations = 1;
  bool full = false;
};

RunOutput run_spectrum(const ResolvedCommon& c, const SpectrumOpts& o) {
  const auto& p = c.params;
  if (!o.full && (o.excitations < 0 || o.excitations > p.n_sites))
    throw UsageError("--sector must lie in [0, n]");
  if ((o.full || p.k_dip > 0.0) && p.n_sites > 14)
    throw UsageError("full-space spectra are limited to n <= 14");
  const bool full = o.full || p.k_dip > 0.0;
  const auto basis = full ? make_full(p.n_sites) : make_sector(p.n_sites, o.excitations);
  const auto spec = diagonalize(build_hamiltonian(p, build_couplings(p), basis));
  std::string csv = "index,eigenvalue\n";
  json eig = json::array();
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
    require_finite(spec.eigenvalues(k), "eigenvalue");
    csv += format_number(static_cast<double>(k)) + ',' + format_number(spec.eigenvalues(k)) + '\n';
    eig.push_back(spec.eigenvalues(k));
  }
  json summary = {{"sector", full ? json("full") : json(o.excitations)},
                  {"dimension", spec.dimension()},
                  {"eigenvalues", eig}};
  const int k = full ? 1 : o.excitations;
  if ((k == 1 || (k == 2 && p.n_sites >= 3)) && spec.dimension() >= 2) {
    const auto loc = edge_localization(spec, k == 2 ? pattern_of_sites({1, 2}) : pattern_of_sites({1}));
    summary["localization"] = {{"edge_state", k == 2 ? "|1,2>" : "|1>"},
                               {"chi", loc.chi},
                               {"k1", loc.k1},
                               {"k2", loc.k2},
                               {"splitting", loc.splitting}};
    const std::string loc_csv =
        "eta,delta,chi,k1,k2,epsilon\n" +
        csv_row({p.eta, p.delta, loc.chi, static_cast<double>(loc.k1), static_cast<double>(loc.k2),
                 loc.splitting});
    return {{{"spectrum.csv", csv}, {"localization.csv", loc_csv}}, summary};
  }
  return {{{"spectrum.csv", csv}}, summary};
}

struct TransferOpts {
  double window = 2000.0;
  double step = 0.05;
  bool optimize_bz = false;
};

RunOutput run_transfer(const ResolvedCommon& c, const TransferOpts& o) {
  const auto& p = c.params;
  const TimeGrid grid = window_grid(o.window, o.step);
  const TransferEngine engine(p);
  const bool two = engine.has_two_excitation();
  const std::vector<Metric> metrics =
      two ? std::vector<Metric>{Metric::P1, Metric::P2, Metric::F1, Metric::F12, Metric::F2}
          : std::vector<Metric>{Metric::P1, Metric::F1};
  std::vector<std::vector<double>> series;
  for (Metric m : metrics) series.push_back(engine.series(m, grid));

  std::string csv = "t";
  for (Metric m : metrics) csv += std::string(",") + metric_name(m);
  csv += '\n';
  for (std::size_t i = 0; i < grid.count; ++i) {
    csv += format_number(grid.at(i));
    for (const auto& s : series) {
      require_finite(s[i], "transfer metric");
      csv += ',' + format_number(s[i]);
    }
    csv += '\n';
  }
  json maxima = json::object();
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    const Metric m = metrics[k];
    const auto best = max_in_window(grid, series[k], [&](double t) { return engine.metric(m, t); });
    maxima[metric_name(m)] = {{"value", best.value}, {"t_star", best.t}};
  }
  json summary = {{"window", {{"t_max", o.window}, {"step", o.step}}},
                  {"maxima", maxima},
                  {"t_star", maxima[metric_name(Metric::P1)]["t_star"]},
                  {"value", maxima[metric_name(Metric::P1)]["value"]}};
  if (o.optimize_bz) {
    if (!two) throw UsageError("--optimize-bz needs n >= 4");
    const auto opt = optimize_bz(p, grid);
    summary["bz_optimum"] = {{"t", opt.t},         {"b_z", opt.b_z},
                             {"F2", opt.f2},       {"gamma", opt.gamma},
                             {"F2_no_field", opt.f2_no_field}, {"t_no_field", opt.t_no_field}};
  }
  return {{{"transfer.csv", csv}}, summary};
}

struct MapOpts {
  std::string metric = "max-P1";
  double delta_lo = -2.0, delta_hi = 2.0, delta_step = 0.02;
  double eta_lo = -1.0, eta_hi = 1.0, eta_step = 0.01;
  double window = 2000.0, step = 0.05;
  double threshold = 0.99;
  std::string threshold_metric = "P1";
  bool optimize_field = false;
  int q_max = 37;
  double kay_epsilon = 1e-3;
  std::optional<double> d_j, d_k;
  std::optional<int> realizations;
};

RunOutput run_map(const ResolvedCommon& c, const MapOpts& o) {
  SweepGrid g;
  try {
    g.metric = parse_map_metric(o.metric);
    g.threshold_metric = parse_metric(o.threshold_metric);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  g.delta = {o.delta_lo, o.delta_hi, o.delta_step};
  g.eta = {o.eta_lo, o.eta_hi, o.eta_step};
  g.t_max = o.window;
  g.t_step = o.step;
  g.threshold = o.threshold;
  g.optimize_field = o.optimize_field;
  g.q_max = o.q_max;
  g.kay_epsilon = o.kay_epsilon;
  g.d_j = pick(o.d_j, c.config, "d_j", 0.0);
  g.d_k = pick(o.d_k, c.config, "d_k", 0.0);
  g.realizations = pick(o.realizations, c.config, "realizations", 100);
  g.seed = c.seed;
  if (g.metric == MapMetric::DisorderMean && !c.seed_given)
    throw UsageError("disorder-mean maps need --seed");
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto map = run_sweep(g, c.params, c.workers);
  for (const auto& cell : map.cells) {
    require_finite(cell.value, "map value");
    require_finite(cell.t_star, "map time");
  }
  std::ostringstream csv;
  write_map_csv(csv, map);
  return {{{"map.csv", csv.str()}, {"map.json", map_metadata(map).dump(2) + "\n"}},
          {{"cells", map.cells.size()}, {"params_hash", map.params_hash}}};
}

struct KayOpts {
  std::string mode = "exact";
  int q_max = 37;
  int seed_grid = 200;
  double epsilon = 1e-3;
  double delta_lo = -2.0, delta_hi = 2.0, delta_step = 0.02;
  double eta_lo = -1.0, eta_hi = 1.0, eta_step = 0.01;
};

RunOutput run_kay(const ResolvedCommon& c, const KayOpts& o) {
  if (o.mode == "exact") {
    if (c.params.n_sites != 4) throw UsageError("exact Kay search is for n = 4");
    KayExactOptions opt;
    opt.q_max = o.q_max;
    opt.seed_grid = o.seed_grid;
    opt.workers = c.workers;
    const auto sols = kay_exact_n4(opt);
    std::string csv = "q1,q2,q3,eta,delta,arrival_time,residual,p1_at_T\n";
    for (const auto& s : sols) {
      csv += csv_row({double(s.q[0]), double(s.q[1]), double(s.q[2]), s.eta, s.delta,
                      s.arrival_time, s.residual, n4_exact_p1(s.eta, s.delta, s.arrival_time)});
    }
    return {{{"kay_exact.csv", csv}}, {{"mode", "exact"}, {"solutions", sols.size()}}};
  }
  if (o.mode != "relaxed") throw UsageError("--mode must be exact or relaxed");
  const auto etas = AxisRange{o.eta_lo, o.eta_hi, o.eta_step}.values();
  const auto deltas = AxisRange{o.delta_lo, o.delta_hi, o.delta_step}.values();
  const auto cells = kay_relaxed(c.params, etas, deltas, o.epsilon, o.q_max, c.workers);
  std::string csv = "delta,eta,residual,arrival_time,flagged\n";
  std::size_t flagged = 0;
  for (const auto& cell : cells) {
    flagged += cell.flagged;
    csv += csv_row({cell.delta, cell.eta, cell.fit.valid ? cell.fit.residual : kNotReached,
                    cell.fit.valid ? cell.fit.arrival_time : kNotReached,
                    cell.flagged ? 1.0 : 0.0});
  }
  return {{{"kay_relaxed.csv", csv}},
          {{"mode", "relaxed"}, {"epsilon", o.epsilon}, {"cells", cells.size()},
           {"flagged", flagged}}};
}

struct DisorderOpts {
  std::optional<double> d_j, d_k;
  std::optional<int> realizations;
  std::optional<double> arrival_time;
  std::string metric = "P1";
  double window = 2000.0, step = 0.05;
  bool per_realization = false;
};

RunOutput run_disorder(const ResolvedCommon& c, const DisorderOpts& o) {
  if (!c.seed_given) throw UsageError("disorder runs need --seed");
  Metric m;
  try {
    m = parse_metric(o.metric);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const double d_j = pick(o.d_j, c.config, "d_j", 0.0);
  const double d_k = pick(o.d_k, c.config, "d_k", 0.0);
  const int m_r = pick(o.realizations, c.config, "realizations", 100);
  if (d_j < 0.0 || d_k < 0.0) throw UsageError("disorder amplitudes must be >= 0");
  if (m_r < 1) throw UsageError("--realizations must be >= 1");
  const double t = o.arrival_time ? *o.arrival_time
                                  : clean_arrival_time(c.params, m, window_grid(o.window, o.step));
  if (!(t >= 0.0)) throw UsageError("--arrival-time must be >= 0");
  const auto s = averaged_transfer(c.params, m, t, d_j, d_k, m_r, c.seed, c.workers);
  require_finite(s.mean, "disorder mean");
  RunOutput out;
  out.summary = {{"metric", metric_name(m)}, {"d_j", d_j},           {"d_k", d_k},
                 {"realizations", m_r},      {"arrival_time", t},    {"mean", s.mean},
                 {"std_error", s.std_error}, {"clean_arrival_time", !o.arrival_time.has_value()}};
  if (o.per_realization) {
    std::string csv = "index,value\n";
    for (std::size_t i = 0; i < s.values.size(); ++i) csv += csv_row({double(i), s.values[i]});
    out.files.push_back({"disorder_realizations.csv", csv});
  }
  return out;
}

struct DipolarOpts {
  int excitations = 1;
  double window = 2000.0, step = 0.05;
};

RunOutput run_dipolar(const ResolvedCommon& c, const DipolarOpts& o) {
  const auto& p = c.params;
  if (p.n_sites > 12) throw UsageError("dipolar runs use the full space; n <= 12");
  if (o.excitations < 1 || o.excitations > p.n_sites)
    throw UsageError("--excitations must lie in [1, n]");
  const auto rep = leakage(p, o.excitations, window_grid(o.window, o.step));
  require_finite(rep.max_leakage, "leakage");
  return {{{"dipolar.csv", "max_leakage,t_at_max\n" + csv_row({rep.max_leakage, rep.t_at_max})}},
          {{"excitations", o.excitations},
           {"max_leakage", rep.max_leakage},
           {"t_at_max", rep.t_at_max},
           {"window", {{"t_max", o.window}, {"step", o.step}}}}};
}

struct ControlOpts {
  double duration = 40.0;
  std::optional<int> slices;
  double lambda = 0.02;
  int max_iters = 5000;
  double threshold = 1e-6;
};

RunOutput run_control(const ResolvedCommon& c, const ControlOpts& o) {
  if (!(o.duration > 0.0)) throw UsageError("--duration must be positive");
  if (!(o.lambda > 0.0)) throw UsageError("--lambda must be positive");
  if (o.max_iters < 0) throw UsageError("--max-iters must be >= 0");
  if (c.params.k_dip > 0.0) throw UsageError("control needs k_dip = 0");
  const int slices = o.slices.value_or(default_slices(o.duration));
  if (slices < 1) throw UsageError("--slices must be >= 1");
  KrotovOptions kopt;
  kopt.lambda_a = o.lambda;
  kopt.max_iterations = o.max_iters;
  kopt.threshold = o.threshold;
  const double T = o.duration;
  auto pulse = make_protocol(T, slices, [T](double t) { return 0.1 * sin2_shape(t, T); }, o.lambda);
  const auto r = krotov_optimize(c.params, std::move(pulse), kopt);
  require_finite(r.infidelity, "infidelity");
  std::string pulse_csv = "t,u\n";
  const auto nodes = r.pulse.node_values();
  for (std::size_t k = 0; k < nodes.size(); ++k)
    pulse_csv += csv_row({static_cast<double>(k) * r.pulse.dt(), nodes[k]});
  std::string conv = "iteration,infidelity\n";
  for (std::size_t k = 0; k < r.pulse.history.size(); ++k)
    conv += csv_row({static_cast<double>(k), r.pulse.history[k]});
  return {{{"pulse.csv", pulse_csv}, {"convergence.csv", conv}},
          {{"duration", T},
           {"slices", slices},
           {"infidelity", r.infidelity},
           {"converged", r.converged},
           {"iterations", r.iterations},
           {"final_lambda", r.pulse.lambda_a}}};
}

struct TminOpts {
  std::vector<double> etas;
  double t_lo = 5.0, t_hi = 400.0, t_step = 2.5;
  double threshold = 1e-4;
  double refine = 0.5;
  int max_iters = 5000;
  double lambda = 0.02;
};

RunOutput run_tmin(const ResolvedCommon& c, const TminOpts& o) {
  if (c.params.k_dip > 0.0) throw UsageError("control needs k_dip = 0");
  std::vector<double> etas = o.etas.empty() ? std::vector<double>{c.params.eta} : o.etas;
  for (double e : etas)
    if (std::abs(e) > 1.0) throw UsageError("eta must lie in [-1, 1]");
  std::vector<double> durations;
  try {
    durations = duration_grid(o.t_lo, o.t_hi, o.t_step);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(o.t_lo > 0.0)) throw UsageError("--t-lo must be positive");
  TminOptions topt;
  topt.success_threshold = o.threshold;
  topt.refine_to = o.refine;
  topt.max_iterations = o.max_iters;
  topt.lambda_a = o.lambda;

  std::vector<TminResult> results(etas.size());
  parallel_for(etas.size(), c.workers, [&](std::size_t i) {
    ChainParams p = c.params;
    p.eta = etas[i];
    results[i] = tmin_scan(p, durations, topt);
  });
  std::string csv = "eta,t_min,grid_t_min\n";
  std::string evals = "eta,duration,infidelity,iterations\n";
  json found = json::array();
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const auto& r = results[i];
    csv += csv_row({etas[i], r.t_min.value_or(kNotReached), r.grid_t_min.value_or(kNotReached)});
    for (const auto& e : r.evaluated)
      evals += csv_row({etas[i], e.duration, e.infidelity, double(e.iterations)});
    found.push_back({{"eta", etas[i]},
                     {"t_min", r.t_min ? json(*r.t_min) : json(nullptr)},
                     {"found", r.t_min.has_value()}});
  }
  return {{{"tmin.csv", csv}, {"tmin_evaluations.csv", evals}}, {{"scans", found}}};
}

// --- output -------------------------------------------------------------

std::string iso_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_outputs(const std::string& command, const ResolvedCommon& c, const json& inputs,
                   RunOutput out, std::chrono::system_clock::time_point started,
                   double wall_seconds) {
  fs::create_directories(c.out_dir);
  const json params = params_json(c.params);
  json summary = {{"command", command}, {"params", params}, {"inputs", inputs},
                  {"result", out.summary}};
  if (c.seed_given) summary["seed"] = c.seed;
  out.files.push_back({"summary.json", summary.dump(2) + "\n"});
  json files = json::array();
  for (const auto& f : out.files) {
    std::string body = f.body;
    // CSV artifacts carry their parameters in a leading comment line.
    if (f.name.ends_with(".csv"))
      body = "# " + json{{"command", command}, {"params", params}, {"inputs", inputs}}.dump() +
             "\n" + body;
    std::ofstream os(c.out_dir / f.name, std::ios::binary);
    os << body;
    if (!os) throw std::runtime_error("failed to write " + (c.out_dir / f.name).string());
    files.push_back(f.name);
  }
  json manifest = {{"command", command},
                   {"params", params},
                   {"inputs", inputs},
                   {"seed", c.seed_given ? json(c.seed) : json(nullptr)},
                   {"workers", c.workers == 0 ? default_workers() : c.workers},
                   {"version", code_version()},
                   {"started_utc", iso_timestamp(started)},
                   {"wall_seconds", wall_seconds},
                   {"files", files}};
  std::ofstream ms(c.out_dir / "manifest.json", std::ios::binary);
  ms << manifest.dump(2) << "\n";
  if (!ms) throw std::runtime_error("failed to write manifest");
}

int report(int code, const char* kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
  return code;
}

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "JSON config file; flags override its keys");
  sub->add_option("--n", f.n_sites, "number of sites");
  sub->add_option("--j", f.j, "exchange scale J");
  sub->add_option("--eta", f.eta, "dimerization, |eta| <= 1");
  sub->add_option("--delta", f.delta, "anisotropy");
  sub->add_option("--k-dip", f.k_dip, "dipolar strength K/a^3 in units of J");
  sub->add_option("--bz", f.b_z, "Zeeman field b_z in units of J");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  sub->add_option("--out", f.out_dir, "output directory (default $SSHXXZ_OUT_DIR or ./sshxxz_out)");
}

json inputs_of(const CLI::App* sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string& full = opt->get_name();
    // Output location and thread count do not change any result.
    if (full == "--help" || full == "--out" || full == "--workers" || opt->count() == 0) continue;
    const auto results = opt->results();
    std::string name = opt->get_name();
    if (name.rfind("--", 0) == 0) name = name.substr(2);
    if (results.size() == 1)
      j[name] = results.front();
    else
      j[name] = results;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer, localization and control in dimerized XXZ spin chains"};
  app.require_subcommand(1);
  CommonFlags common;

  SpectrumOpts spectrum;
  auto* s_spec = app.add_subcommand("spectrum", "eigenvalues of one excitation sector");
  add_common(s_spec, common);
  s_spec->add_option("--sector", spectrum.excitations, "excitation number k");
  s_spec->add_flag("--full", spectrum.full, "diagonalize the full 2^N space");

  TransferOpts transfer;
  auto* s_tr = app.add_subcommand("transfer", "time series of transfer probabilities and fidelities");
  add_common(s_tr, common);
  s_tr->add_option("--window", transfer.window, "t_max of the window [0, t_max]");
  s_tr->add_option("--step", transfer.step, "time step");
  s_tr->add_flag("--optimize-bz", transfer.optimize_bz, "maximize F2 over the Zeeman field");

  MapOpts map;
  auto* s_map = app.add_subcommand("map", "metric over a (delta, eta) grid");
  add_common(s_map, common);
  s_map->add_option("--metric", map.metric,
                    "max-P1 | max-P2 | max-F12 | max-F2 | chi | chi2 | time-to-threshold | "
                    "kay-residual | disorder-mean");
  s_map->add_option("--delta-lo", map.delta_lo);
  s_map->add_option("--delta-hi", map.delta_hi);
  s_map->add_option("--delta-step", map.delta_step);
  s_map->add_option("--eta-lo", map.eta_lo);
  s_map->add_option("--eta-hi", map.eta_hi);
  s_map->add_option("--eta-step", map.eta_step);
  s_map->add_option("--window", map.window);
  s_map->add_option("--step", map.step);
  s_map->add_option("--threshold", map.threshold);
  s_map->add_option("--threshold-metric", map.threshold_metric);
  s_map->add_flag("--optimize-field", map.optimize_field);
  s_map->add_option("--q-max", map.q_max);
  s_map->add_option("--kay-epsilon", map.kay_epsilon);
  s_map->add_option("--d-j", map.d_j);
  s_map->add_option("--d-k", map.d_k);
  s_map->add_option("--realizations", map.realizations);

  KayOpts kay;
  auto* s_kay = app.add_subcommand("kay", "perfect-transfer points from the gap condition");
  add_common(s_kay, common);
  s_kay->add_option("--mode", kay.mode, "exact (n = 4) or relaxed");
  s_kay->add_option("--q-max", kay.q_max);
  s_kay->add_option("--seed-grid", kay.seed_grid);
  s_kay->add_option("--epsilon", kay.epsilon);
  s_kay->add_option("--delta-lo", kay.delta_lo);
  s_kay->add_option("--delta-hi", kay.delta_hi);
  s_kay->add_option("--delta-step", kay.delta_step);
  s_kay->add_option("--eta-lo", kay.eta_lo);
  s_kay->add_option("--eta-hi", kay.eta_hi);
  s_kay->add_option("--eta-step", kay.eta_step);

  DisorderOpts dis;
  auto* s_dis = app.add_subcommand("disorder", "disorder-averaged transfer at the arrival time");
  add_common(s_dis, common);
  s_dis->add_option("--d-j", dis.d_j);
  s_dis->add_option("--d-k", dis.d_k);
  s_dis->add_option("--realizations", dis.realizations);
  s_dis->add_option("--arrival-time", dis.arrival_time, "default: clean-chain argmax in the window");
  s_dis->add_option("--metric", dis.metric);
  s_dis->add_option("--window", dis.window);
  s_dis->add_option("--step", dis.step);
  s_dis->add_flag("--per-realization", dis.per_realization);

  DipolarOpts dip;
  auto* s_dip = app.add_subcommand("dipolar", "magnetization leakage with the dipolar term");
  add_common(s_dip, common);
  s_dip->add_option("--excitations", dip.excitations);
  s_dip->add_option("--window", dip.window);
  s_dip->add_option("--step", dip.step);

  ControlOpts ctl;
  auto* s_ctl = app.add_subcommand("control", "Krotov optimization of |1> -> |N>");
  add_common(s_ctl, common);
  s_ctl->add_option("--duration", ctl.duration);
  s_ctl->add_option("--slices", ctl.slices);
  s_ctl->add_option("--lambda", ctl.lambda);
  s_ctl->add_option("--max-iters", ctl.max_iters);
  s_ctl->add_option("--threshold", ctl.threshold);

  TminOpts tmin;
  auto* s_tmin = app.add_subcommand("tmin", "minimum control time scans");
  add_common(s_tmin, common);
  s_tmin->add_option("--etas", tmin.etas, "eta values (default: --eta)")->delimiter(',');
  s_tmin->add_option("--t-lo", tmin.t_lo);
  s_tmin->add_option("--t-hi", tmin.t_hi);
  s_tmin->add_option("--t-step", tmin.t_step);
  s_tmin->add_option("--threshold", tmin.threshold);
  s_tmin->add_option("--refine", tmin.refine);
  s_tmin->add_option("--max-iters", tmin.max_iters);
  s_tmin->add_option("--lambda", tmin.lambda);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kExitUsage, "usage", e.what());
  }

  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    const ResolvedCommon c = resolve(common);
    RunOutput out;
    if (command == "spectrum") out = run_spectrum(c, spectrum);
    else if (command == "transfer") out = run_transfer(c, transfer);
    else if (command == "map") out = run_map(c, map);
    else if (command == "kay") out = run_kay(c, kay);
    else if (command == "disorder") out = run_disorder(c, dis);
    else if (command == "dipolar") out = run_dipolar(c, dip);
    else if (command == "control") out = run_control(c, ctl);
    else if (command == "tmin") out = run_tmin(c, tmin);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_outputs(command, c, inputs_of(sub), std::move(out), started, wall);
    std::cout << (c.out_dir / "summary.json").string() << "\n";
    return kExitOk;
  } catch (const UsageError& e) {
    return report(kExitUsage, "usage", e.what());
  } catch (const std::invalid_argument& e) {
    return report(kExitUsage, "domain", e.what());
  } catch (const std::out_of_range& e) {
    return report(kExitUsage, "domain", e.what());
  } catch (const NumericalError& e) {
    return report(kExitNumerical, "numerical", e.what());
  } catch (const json::exception& e) {
    return report(kExitUsage, "config", e.what());
  } catch (const std::runtime_error& e) {
    // Eigensolver and other numerical failures surface as runtime_error.
    const std::string what = e.what();
    if (what.rfind("failed to write", 0) == 0) return report(kExitOther, "io", what);
    return report(kExitNumerical, "numerical", what);
  } catch (const std::exception& e) {
    return report(kExitOther, "internal", e.what());
  }
}
