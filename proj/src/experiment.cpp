#include "bht/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "bht/checkpoint.hpp"

namespace bht {

namespace fs = std::filesystem;

namespace {

std::size_t memory_cap_bytes(const RunControls& run) {
  return static_cast<std::size_t>(run.memory_cap_gib * static_cast<double>(std::size_t{1} << 30));
}

DensityMatrix traceless_hermitian(DensityMatrix rho) {
  Matrix& m = rho.matrix();
  m = 0.5 * (m + m.adjoint()).eval();
  m.diagonal().array() -= m.trace() / static_cast<double>(m.rows());
  return rho;
}

std::string number(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

std::string point_name(const ModelParams& p) {
  return "L" + std::to_string(p.sites) + "_N" + std::to_string(p.particles) + "_U" + number(p.interaction);
}

Json params_json(const ModelParams& p) {
  return {{"L", p.sites}, {"N", p.particles}, {"J", p.hopping}, {"U", p.interaction}, {"Gamma", p.gamma},
          {"dGamma", p.delta_gamma}};
}

Json report_json(const PropagationReport& r) {
  return {{"elapsed_time", r.elapsed_time},
          {"steps", r.steps},
          {"rejected_steps", r.rejected_steps},
          {"residual", r.residual},
          {"threshold", r.threshold},
          {"converged", r.converged},
          {"max_trace_drift", r.max_trace_drift},
          {"max_hermiticity_drift", r.max_hermiticity_drift},
          {"resymmetrizations", r.resymmetrizations}};
}

std::vector<double> to_std(const RealVector& v) { return {v.begin(), v.end()}; }

Json nan_to_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

class CsvFile {
 public:
  CsvFile(const fs::path& path, const ExperimentConfig& config, const std::string& columns) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    out_ << provenance_header(config) << '\n' << columns << '\n';
    out_ << std::setprecision(15);
  }
  std::ofstream& stream() { return out_; }

 private:
  std::ofstream out_;
};

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

Json spacing_meta(const SpacingStatistics& s) {
  return {{"window_fraction", s.central_fraction},
          {"window", {s.window_begin, s.window_end}},
          {"fit_degree", s.fit_degree},
          {"sample_size", s.spacings.size()},
          {"collapsed_degeneracies", s.collapsed_degeneracies},
          {"mean_spacing", s.mean_spacing},
          {"ks_poisson", s.ks_poisson},
          {"ks_gue", s.ks_gue}};
}

}  // namespace

std::string provenance_header(const ExperimentConfig& config) { return "# config: " + config.to_json().dump(); }

void require_heavy_allowed(const ExperimentConfig& config, Index dimension) {
  if (dimension > kHeavyDimension && !config.heavy)
    throw ValidationError("dimension " + std::to_string(dimension) + " exceeds " + std::to_string(kHeavyDimension) +
                          "; heavy presets need --heavy");
}

PipelineResult run_pipeline(const ModelParams& params, const RunControls& run) {
  params.validate();
  const BasisPtr basis = enumerate_basis(params.sites, params.particles, memory_cap_bytes(run));
  const LindbladOperators ops = LindbladOperators::build(basis, params);

  std::vector<PropagationReport> propagations;
  bool converged = true;
  int iterations = 0;
  std::optional<DensityMatrix> deviation;

  if (run.method == "direct") {
    DirectSolveOptions options;
    options.max_dimension = run.direct_cap;
    options.gmres = {run.gmres_tolerance, run.gmres_restart, run.gmres_max_iterations};
    auto [dev, report] = solve_deviation_direct(params, ops, options);
    iterations = report.iterations;
    deviation = std::move(dev);
  } else {
    require(params.delta_gamma != 0.0, "run_pipeline: propagation needs dGamma != 0");
    PropagationOptions options;
    options.tolerance = run.tolerance;
    options.t_max = run.t_max;
    auto propagate = [&](const ModelParams& p) {
      auto [rho, report] =
          propagate_to_steady_state(DensityMatrix::maximally_mixed(basis), p, LindbladOperators::build(basis, p), options);
      propagations.push_back(report);
      converged = converged && report.converged;
      iterations += static_cast<int>(report.steps);
      return rho;
    };
    const DensityMatrix steady = propagate(params);
    if (run.extraction == "plain") {
      deviation = extract_deviation(steady, params.delta_gamma);
    } else if (run.extraction == "odd") {
      deviation = extract_deviation_odd(steady, params.delta_gamma);
    } else {
      ModelParams half = params;
      half.delta_gamma = 0.5 * params.delta_gamma;
      const DensityMatrix steady_half = propagate(half);
      deviation = richardson_deviation(extract_deviation_odd(steady, params.delta_gamma),
                                       extract_deviation_odd(steady_half, half.delta_gamma));
    }
  }
  DensityMatrix dev = traceless_hermitian(std::move(*deviation));

  const double residual = steady_state_residual(dev, params, ops);
  ChainOperator current_op = build_current(basis, params.hopping);
  EigenDecomposition current_dec = decompose_hermitian(current_op);
  EigenDecomposition deviation_dec = decompose_hermitian(dev);
  TransportReport transport = make_transport_report(params, dev, current_op, deviation_dec);
  LambdaSigmaRelation relation = lambda_sigma_relation(deviation_dec, current_dec, params.hopping);
  std::optional<SpacingStatistics> spacing;
  if (basis->dimension() >= 50) {
    const RealVector& eig = deviation_dec.eigenvalues;
    spacing = unfold_spacings(std::span<const double>(eig.data(), static_cast<std::size_t>(eig.size())), run.window,
                              run.fit_degree);
  }
  return PipelineResult{params,
                        basis,
                        run.method,
                        std::move(dev),
                        residual,
                        converged,
                        iterations,
                        std::move(propagations),
                        std::move(current_op),
                        std::move(current_dec),
                        std::move(deviation_dec),
                        std::move(transport),
                        std::move(relation),
                        std::move(spacing)};
}

Json RunRecord::to_json() const {
  return {{"config", config},
          {"params", params_json(params)},
          {"dimension", dimension},
          {"method", method},
          {"current", current},
          {"spectral_current", spectral_current},
          {"residual", residual},
          {"converged", converged},
          {"iterations", iterations},
          {"wall_seconds", wall_seconds},
          {"ks_poisson", nan_to_null(ks_poisson)},
          {"ks_gue", nan_to_null(ks_gue)},
          {"extra", extra},
          {"files", files},
          {"error", error}};
}

RunRecord run_point(const ExperimentConfig& config, const fs::path& directory) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.config = config.to_json();
  record.params = config.model;
  record.dimension = count_states(config.model.sites, config.model.particles);
  require_heavy_allowed(config, record.dimension);

  const PipelineResult result = run_pipeline(config.model, config.run);
  record.method = result.method;
  record.current = result.transport.current;
  record.spectral_current = result.transport.spectral_current;
  record.residual = result.residual;
  record.converged = result.converged;
  record.iterations = result.iterations;
  if (result.spacing) {
    record.ks_poisson = result.spacing->ks_poisson;
    record.ks_gue = result.spacing->ks_gue;
  }

  const LambdaSigmaRelation& rel = result.lambda_sigma;
  record.extra["lambda_sigma"] = {{"scale", rel.scale},
                                  {"max_deviation", rel.max_deviation},
                                  {"correlation", rel.correlation},
                                  {"fitted_ratio", rel.fitted_ratio}};
  if (config.model.interaction == 0.0) {
    const double integral_current =
        semi_analytic_current(result.current_dec, config.model, PrefactorConvention::kLinearResponse);
    record.extra["semi_analytic"] = {
        {"current", integral_current},
        {"prefactor_linear_response", semi_analytic_prefactor(PrefactorConvention::kLinearResponse, config.model)},
        {"prefactor_4JN2", semi_analytic_prefactor(PrefactorConvention::kParticleSquared, config.model)},
        {"prefactor_fitted", fitted_prefactor(record.current, result.current_dec, config.model)}};
  }
  Json props = Json::array();
  for (const auto& p : result.propagations) props.push_back(report_json(p));
  record.extra["propagations"] = props;

  fs::create_directories(directory);
  const Index n = result.basis->dimension();
  auto add = [&](const fs::path& p) { record.files.push_back(p.string()); };

  {
    const fs::path path = directory / "quantiles.csv";
    CsvFile csv(path, config, "j,lambda,I_j,hardcore_overlap");
    const TransportReport& t = result.transport;
    for (Index j = 0; j < n; ++j)
      csv.stream() << j + 1 << ',' << t.lambda[j] << ',' << t.quantiles[j] << ',' << t.hardcore[j] << '\n';
    add(path);
  }
  {
    const fs::path path = directory / "spectrum.csv";
    CsvFile csv(path, config, "j,scaled_lambda,sigma");
    for (Index j = 0; j < n; ++j) csv.stream() << j + 1 << ',' << rel.scaled_lambda[j] << ',' << rel.sigma[j] << '\n';
    add(path);
  }
  if (n <= config.run.matrix_csv_cap) {
    // |Rt| in the current eigenbasis, rows/columns ordered by ascending sigma.
    const fs::path path = directory / "rtilde_current_basis.csv";
    const Matrix& q = result.current_dec.eigenvectors;
    const RealMatrix magnitude = (q.adjoint() * result.deviation.matrix() * q).cwiseAbs();
    CsvFile csv(path, config, "# row-major |<Phi_j|Rt|Phi_k>|, " + std::to_string(n) + "x" + std::to_string(n));
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) csv.stream() << (c ? "," : "") << magnitude(r, c);
      csv.stream() << '\n';
    }
    add(path);
  }
  if (result.spacing) {
    const fs::path path = directory / "spacing.csv";
    {
      std::ofstream out(path);
      out << provenance_header(config) << '\n';
      write_distribution_csv(out, emit_distribution(*result.spacing));
    }
    add(path);
    const fs::path meta = directory / "spacing_meta.json";
    write_json(meta, {{"config", record.config}, {"spacing", spacing_meta(*result.spacing)}});
    add(meta);
  }
  {
    const fs::path path = directory / "transport.json";
    const TransportReport& t = result.transport;
    write_json(path, {{"config", record.config},
                      {"params", params_json(t.params)},
                      {"current", t.current},
                      {"spectral_current", t.spectral_current},
                      {"lambda", to_std(t.lambda)},
                      {"I_j", to_std(t.quantiles)},
                      {"hardcore_overlap", to_std(t.hardcore)}});
    add(path);
  }
  if (config.run.write_checkpoint) {
    const fs::path path = directory / "rtilde.bhrho";
    write_checkpoint(path, result.deviation);
    add(path);
  }

  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path record_path = directory / "record.json";
  record.files.push_back(record_path.string());
  write_json(record_path, record.to_json());
  return record;
}

RunRecord cmd_run(const ExperimentConfig& config) {
  config.validate();
  return run_point(config, config.output_dir);
}

SweepResult cmd_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::vector<double> interactions =
      config.sweep.interactions.empty() ? default_interaction_grid() : config.sweep.interactions;
  const std::vector<int> particles =
      config.sweep.particles.empty() ? std::vector<int>{config.model.particles} : config.sweep.particles;
  require(!interactions.empty() && !particles.empty(), "sweep: empty axes");

  std::vector<ExperimentConfig> points;
  for (int n : particles)
    for (double u : interactions) {
      ExperimentConfig c = config;
      c.model.particles = n;
      c.model.interaction = u;
      c.model.validate();
      require_heavy_allowed(c, count_states(c.model.sites, n));
      points.push_back(std::move(c));
    }

  SweepResult result;
  result.records.resize(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      const ExperimentConfig& c = points[i];
      try {
        result.records[i] = run_point(c, c.output_dir / point_name(c.model));
      } catch (const std::exception& e) {
        RunRecord failed;
        failed.config = c.to_json();
        failed.params = c.model;
        failed.dimension = count_states(c.model.sites, c.model.particles);
        failed.error = e.what();
        result.records[i] = std::move(failed);
      }
    }
  };
  std::vector<std::thread> pool;
  const int jobs = std::min<int>(config.jobs, static_cast<int>(points.size()));
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Crossover: first U (ascending) where the current falls below half its U = 0 value.
  std::map<int, std::vector<const RunRecord*>> by_n;
  for (const auto& r : result.records) by_n[r.params.particles].push_back(&r);
  for (int n : particles) {
    auto rows = by_n[n];
    std::sort(rows.begin(), rows.end(),
              [](const RunRecord* a, const RunRecord* b) { return a->params.interaction < b->params.interaction; });
    SweepResult::Crossover cross{n, std::nan(""), std::nullopt};
    for (const RunRecord* r : rows)
      if (r->params.interaction == 0.0 && r->error.empty()) cross.current_at_zero = r->current;
    if (std::isfinite(cross.current_at_zero))
      for (const RunRecord* r : rows)
        if (r->error.empty() && r->current < 0.5 * cross.current_at_zero) {
          cross.interaction = r->params.interaction;
          break;
        }
    result.crossovers.push_back(cross);
  }

  fs::create_directories(config.output_dir);
  result.summary_path = config.output_dir / "summary.csv";
  {
    CsvFile csv(result.summary_path, config, "U,N,dim,current,KS_poisson,KS_gue,status");
    for (const auto& r : result.records) {
      auto& out = csv.stream();
      out << r.params.interaction << ',' << r.params.particles << ',' << r.dimension << ',';
      if (r.error.empty())
        out << r.current << ',' << r.ks_poisson << ',' << r.ks_gue << ',' << (r.converged ? "ok" : "not_converged");
      else
        out << "nan,nan,nan,error";
      out << '\n';
    }
  }
  {
    CsvFile csv(config.output_dir / "crossover.csv", config, "N,current_U0,U_crossover");
    for (const auto& c : result.crossovers) {
      csv.stream() << c.particles << ',' << c.current_at_zero << ',';
      if (c.interaction)
        csv.stream() << *c.interaction;
      else
        csv.stream() << "nan";
      csv.stream() << '\n';
    }
  }
  Json records = Json::array();
  for (const auto& r : result.records) records.push_back(r.to_json());
  write_json(config.output_dir / "sweep.json", {{"config", config.to_json()}, {"records", records}});
  return result;
}

std::vector<SpectraRecord> cmd_spectra(const ExperimentConfig& config) {
  config.validate();
  const std::vector<double> interactions =
      config.sweep.interactions.empty() ? std::vector<double>{config.model.interaction} : config.sweep.interactions;
  const Index n = count_states(config.model.sites, config.model.particles);
  require_heavy_allowed(config, n);
  require(n >= 50, "spectra: dimension " + std::to_string(n) + " is below the 50 levels needed for statistics");
  if (n < 300)
    std::cerr << "warning: dimension " << n << " < 300; spacing statistics will be noisy\n";

  fs::create_directories(config.output_dir);
  std::vector<SpectraRecord> out;
  for (double u : interactions) {
    ExperimentConfig c = config;
    c.model.interaction = u;
    const PipelineResult result = run_pipeline(c.model, c.run);
    const SpacingStatistics& stats = *result.spacing;
    const std::string stem = "spacing_U" + number(u);
    SpectraRecord rec{u, n, stats, config.output_dir / (stem + ".csv"), config.output_dir / (stem + "_meta.json")};
    {
      std::ofstream csv(rec.csv_path);
      csv << provenance_header(c) << '\n';
      write_distribution_csv(csv, emit_distribution(stats));
    }
    Json meta = spacing_meta(stats);
    meta["current"] = result.transport.current;
    meta["dimension"] = n;
    write_json(rec.meta_path, {{"config", c.to_json()}, {"spacing", meta}});
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace bht
