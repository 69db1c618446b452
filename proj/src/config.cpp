#include "bht/config.hpp"

#include <cmath>
#include <fstream>

namespace bht {

Json ExperimentConfig::to_json() const {
  Json sizes = Json::array();
  for (const auto& [l, n] : verify.sizes) sizes.push_back({l, n});
  return {
      {"model",
       {{"L", model.sites},
        {"N", model.particles},
        {"J", model.hopping},
        {"U", model.interaction},
        {"Gamma", model.gamma},
        {"dGamma", model.delta_gamma}}},
      {"run",
       {{"method", run.method},
        {"extraction", run.extraction},
        {"tolerance", run.tolerance},
        {"t_max", run.t_max},
        {"direct_cap", run.direct_cap},
        {"gmres_tolerance", run.gmres_tolerance},
        {"gmres_restart", run.gmres_restart},
        {"gmres_max_iterations", run.gmres_max_iterations},
        {"window", run.window},
        {"fit_degree", run.fit_degree},
        {"memory_cap_gib", run.memory_cap_gib},
        {"matrix_csv_cap", run.matrix_csv_cap},
        {"write_checkpoint", run.write_checkpoint}}},
      {"sweep", {{"U", sweep.interactions}, {"N", sweep.particles}}},
      {"verify", {{"sizes", sizes}, {"flip_current_sign", verify.flip_current_sign}}},
      {"output", {{"dir", output_dir.string()}}},
      {"seed", seed},
      {"jobs", jobs},
      {"heavy", heavy},
  };
}

namespace {

template <typename T>
void read(const Json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig c;
  try {
    bool explicit_delta = false;
    if (j.contains("model")) {
      const Json& m = j.at("model");
      read(m, "L", c.model.sites);
      read(m, "N", c.model.particles);
      read(m, "J", c.model.hopping);
      read(m, "U", c.model.interaction);
      read(m, "Gamma", c.model.gamma);
      explicit_delta = m.contains("dGamma") && !m.at("dGamma").is_null();
      read(m, "dGamma", c.model.delta_gamma);
    }
    if (!explicit_delta) c.model.delta_gamma = c.model.gamma / 10.0;
    if (j.contains("run")) {
      const Json& r = j.at("run");
      read(r, "method", c.run.method);
      read(r, "extraction", c.run.extraction);
      read(r, "tolerance", c.run.tolerance);
      read(r, "t_max", c.run.t_max);
      read(r, "direct_cap", c.run.direct_cap);
      read(r, "gmres_tolerance", c.run.gmres_tolerance);
      read(r, "gmres_restart", c.run.gmres_restart);
      read(r, "gmres_max_iterations", c.run.gmres_max_iterations);
      read(r, "window", c.run.window);
      read(r, "fit_degree", c.run.fit_degree);
      read(r, "memory_cap_gib", c.run.memory_cap_gib);
      read(r, "matrix_csv_cap", c.run.matrix_csv_cap);
      read(r, "write_checkpoint", c.run.write_checkpoint);
    }
    if (j.contains("sweep")) {
      const Json& s = j.at("sweep");
      read(s, "U", c.sweep.interactions);
      read(s, "N", c.sweep.particles);
    }
    if (j.contains("verify")) {
      const Json& v = j.at("verify");
      if (v.contains("sizes")) {
        c.verify.sizes.clear();
        for (const auto& pair : v.at("sizes")) c.verify.sizes.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
      }
      read(v, "flip_current_sign", c.verify.flip_current_sign);
    }
    if (j.contains("output")) {
      std::string dir;
      read(j.at("output"), "dir", dir);
      if (!dir.empty()) c.output_dir = dir;
    }
    read(j, "seed", c.seed);
    read(j, "jobs", c.jobs);
    read(j, "heavy", c.heavy);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

void ExperimentConfig::validate() const {
  model.validate();
  require(run.method == "direct" || run.method == "propagate", "config: run.method must be 'direct' or 'propagate'");
  require(run.extraction == "plain" || run.extraction == "odd" || run.extraction == "richardson",
          "config: run.extraction must be 'plain', 'odd' or 'richardson'");
  require(run.method != "propagate" || model.delta_gamma != 0.0, "config: propagation needs dGamma != 0");
  require(run.tolerance > 0.0 && run.t_max > 0.0, "config: tolerance and t_max must be positive");
  require(run.window > 0.0 && run.window <= 1.0, "config: run.window must be in (0, 1]");
  require(run.fit_degree >= 1, "config: run.fit_degree must be >= 1");
  require(run.gmres_restart >= 1, "config: run.gmres_restart must be >= 1");
  require(jobs >= 1, "config: jobs must be >= 1");
  for (double u : sweep.interactions) require(u >= 0.0, "config: sweep.U entries must be >= 0");
  for (int n : sweep.particles) require(n >= 0, "config: sweep.N entries must be >= 0");
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!part.empty(), "--set: empty key segment in '" + key + "'");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides) {
  Json j = Json::object();
  if (path) {
    std::ifstream in(*path);
    require(static_cast<bool>(in), "config: cannot open " + path->string());
    j = Json::parse(in, nullptr, false);
    require(!j.is_discarded() && j.is_object(), "config: " + path->string() + " is not a JSON object");
  }
  for (const auto& o : overrides) apply_override(j, o);
  ExperimentConfig c = ExperimentConfig::from_json(j);
  c.validate();
  return c;
}

std::vector<double> default_interaction_grid() {
  std::vector<double> grid{0.0};
  constexpr int points = 25;
  const double lo = std::log(0.05), hi = std::log(10.0);
  for (int k = 0; k < points; ++k) grid.push_back(std::exp(lo + (hi - lo) * k / (points - 1)));
  grid.back() = 10.0;
  return grid;
}

}  // namespace bht
