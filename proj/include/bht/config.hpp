#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bht/model.hpp"

namespace bht {

using Json = nlohmann::json;

struct RunControls {
  std::string method = "direct";       // "direct" | "propagate"
  std::string extraction = "odd";      // propagate only: "plain" | "odd" | "richardson"
  double tolerance = 1e-6;             // propagation stationarity threshold (relative to the drive)
  double t_max = 1e5;
  Index direct_cap = 2500;
  double gmres_tolerance = 1e-10;
  int gmres_restart = 30;
  int gmres_max_iterations = 3000;
  double window = 0.6;
  int fit_degree = 7;
  double memory_cap_gib = 4.0;
  Index matrix_csv_cap = 1000;  // largest N for which the |Rt| matrix CSV is written
  bool write_checkpoint = true;
};

struct SweepAxes {
  std::vector<double> interactions;  // empty: default grid
  std::vector<int> particles;        // empty: model N
};

struct VerifyControls {
  std::vector<std::pair<int, int>> sizes{{4, 2}, {6, 3}};
  bool flip_current_sign = false;
};

/// Heavy runs (N above this) need --heavy.
inline constexpr Index kHeavyDimension = 1000;

struct ExperimentConfig {
  ModelParams model;
  RunControls run;
  SweepAxes sweep;
  VerifyControls verify;
  std::filesystem::path output_dir = "bht_out";
  std::uint64_t seed = 1;
  int jobs = 1;
  bool heavy = false;

  Json to_json() const;
  /// Missing keys keep their defaults; model.dGamma null or absent means Gamma/10.
  static ExperimentConfig from_json(const Json& j);
  /// Throws ValidationError if the model or run controls are inconsistent.
  void validate() const;
};

/// `key.path=value`; value is parsed as JSON when possible, else kept as a string.
void apply_override(Json& config, const std::string& assignment);

ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides);

/// U = 0 followed by 25 geometric points from 0.05 to 10.
std::vector<double> default_interaction_grid();

}  // namespace bht
