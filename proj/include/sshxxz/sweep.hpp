#pragma once

// (Delta, eta) parameter-plane maps of transfer, localization, spectral and
// disorder metrics, with CSV/JSON emitters.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sshxxz/chain_model.hpp"
#include "sshxxz/propagation.hpp"

namespace sshxxz {

enum class MapMetric {
  MaxP1,
  MaxP2,
  MaxF12,
  MaxF2,
  Chi,
  Chi2,
  TimeToThreshold,
  KayResidual,
  DisorderMean,
};

const char* map_metric_name(MapMetric m);
/// Throws std::invalid_argument for an unknown id.
MapMetric parse_map_metric(std::string_view id);

/// Sentinel for cells where a time-to-threshold was not reached or a fit is
/// undefined.
inline constexpr double kNotReached = -1.0;

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  /// lo, lo + step, ..., hi (hi included when it lies on the lattice).
  std::vector<double> values() const;
};

struct SweepGrid {
  AxisRange delta{-2.0, 2.0, 0.02};
  AxisRange eta{-1.0, 1.0, 0.01};
  MapMetric metric = MapMetric::MaxP1;
  double t_max = 2000.0;
  double t_step = 0.05;
  double threshold = 0.99;            // time-to-threshold
  Metric threshold_metric = Metric::P1;
  bool optimize_field = false;        // max-F2: also maximize over b_z
  int q_max = 37;                     // kay-residual
  double kay_epsilon = 1e-3;
  double d_j = 0.0, d_k = 0.0;        // disorder-mean
  int realizations = 100;
  std::uint64_t seed = 0;

  void validate() const;
  TimeGrid window() const { return TimeGrid::window(0.0, t_max, t_step); }
};

struct MapCell {
  double value = 0.0;
  double t_star = 0.0;  // time of the maximum / first crossing / fitted arrival
  double aux = 0.0;     // b_z, splitting, stderr or Kay flag, per metric
};

struct MapResult {
  SweepGrid grid;
  ChainParams params;
  std::vector<double> deltas;
  std::vector<double> etas;
  std::vector<MapCell> cells;  // index i_eta * deltas.size() + i_delta
  std::string params_hash;
  std::string code_version;

  const MapCell& at(std::size_t i_eta, std::size_t i_delta) const {
    return cells[i_eta * deltas.size() + i_delta];
  }
};

/// Single-cell evaluation; params.eta and params.delta select the point.
MapCell evaluate_cell(const SweepGrid& grid, const ChainParams& params);

MapResult run_sweep(const SweepGrid& grid, const ChainParams& params_template,
                    unsigned workers = 0);

/// %.12g rendering used by every CSV artifact.
std::string format_number(double v);

/// Header "delta,eta,value,t_star,aux", then one row per cell, eta-major.
void write_map_csv(std::ostream& out, const MapResult& map);

/// Grid, parameters, provenance and the meaning of every column.
nlohmann::json map_metadata(const MapResult& map);

nlohmann::json params_json(const ChainParams& params);

/// Stable FNV-1a hash of the canonical JSON dump.
std::string content_hash(const nlohmann::json& j);

std::string code_version();

}  // namespace sshxxz
