#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bht/config.hpp"
#include "bht/rmt.hpp"
#include "bht/steady_state.hpp"
#include "bht/transport.hpp"

namespace bht {

/// Everything one parameter point produces, before anything is written.
struct PipelineResult {
  ModelParams params;
  BasisPtr basis;
  std::string method;
  DensityMatrix deviation;
  double residual = 0.0;  // steady_state_residual of the deviation
  bool converged = false;
  int iterations = 0;      // GMRES iterations or accepted RK steps
  std::vector<PropagationReport> propagations;
  ChainOperator current_op;
  EigenDecomposition current_dec;
  EigenDecomposition deviation_dec;
  TransportReport transport;
  LambdaSigmaRelation lambda_sigma;
  std::optional<SpacingStatistics> spacing;  // only when N >= 50
};

/// basis -> operators -> steady state -> Rt -> current, quantiles, spectra.
/// Non-convergence of a propagation is reported in the result, not thrown.
PipelineResult run_pipeline(const ModelParams& params, const RunControls& run);

struct RunRecord {
  Json config;
  ModelParams params;
  Index dimension = 0;
  std::string method;
  double current = 0.0;
  double spectral_current = 0.0;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
  double wall_seconds = 0.0;
  double ks_poisson = std::nan("");
  double ks_gue = std::nan("");
  Json extra = Json::object();
  std::vector<std::string> files;
  std::string error;  // set when the point failed

  Json to_json() const;
};

/// Runs one point and writes its artifacts below `directory`.
RunRecord run_point(const ExperimentConfig& config, const std::filesystem::path& directory);

RunRecord cmd_run(const ExperimentConfig& config);

struct SweepResult {
  std::vector<RunRecord> records;  // in grid order: N outer, U inner
  struct Crossover {
    int particles;
    double current_at_zero;
    std::optional<double> interaction;  // first U with current < half the U = 0 value
  };
  std::vector<Crossover> crossovers;
  std::filesystem::path summary_path;
};

SweepResult cmd_sweep(const ExperimentConfig& config);

struct SpectraRecord {
  double interaction;
  Index dimension;
  SpacingStatistics stats;
  std::filesystem::path csv_path;
  std::filesystem::path meta_path;
};

std::vector<SpectraRecord> cmd_spectra(const ExperimentConfig& config);

/// Throws ValidationError for runs above kHeavyDimension without config.heavy.
void require_heavy_allowed(const ExperimentConfig& config, Index dimension);

/// '#'-prefixed comment line carrying the config as compact JSON.
std::string provenance_header(const ExperimentConfig& config);

}  // namespace bht
