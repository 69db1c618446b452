// Acceptance suite: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails. Criteria marked heavy run only with --heavy.
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "bht/experiment.hpp"
#include "bht/verify.hpp"

using namespace bht;

namespace {

struct Ledger {
  int failures = 0;
  double trace_drift = 0.0;
  double hermiticity_drift = 0.0;
  std::vector<double> spacing_means;

  void report(const std::string& id, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << id << "  " << detail << std::endl;
    if (!ok) ++failures;
  }
  void skip(const std::string& id, const std::string& why) { std::cout << "SKIP " << id << "  " << why << std::endl; }
  void track(const PropagationReport& r) {
    trace_drift = std::max(trace_drift, r.max_trace_drift);
    hermiticity_drift = std::max(hermiticity_drift, r.max_hermiticity_drift);
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(4) << v;
  return out.str();
}

ModelParams model(int l, int n, double u = 0.0, double gamma = 0.04) {
  ModelParams p;
  p.sites = l;
  p.particles = n;
  p.interaction = u;
  p.gamma = gamma;
  p.delta_gamma = gamma / 10.0;
  return p;
}

RunControls direct_controls() {
  RunControls run;
  run.method = "direct";
  run.direct_cap = 2500;
  return run;
}

void criterion1(Ledger& led) {
  const Index a = enumerate_basis(6, 3)->dimension();
  const Index b = enumerate_basis(8, 4)->dimension();
  const Index c = enumerate_basis(10, 5)->dimension();
  led.report("C1 dimensions", a == 56 && b == 330 && c == 2002,
             "N(6,3)=" + std::to_string(a) + " N(8,4)=" + std::to_string(b) + " N(10,5)=" + std::to_string(c));
}

void criterion2(Ledger& led) {
  double worst = 0.0;
  for (auto [l, n] : {std::pair{4, 2}, {6, 3}, {8, 4}}) {
    const auto basis = enumerate_basis(l, n);
    const LindbladOperators ops = LindbladOperators::build(basis, model(l, n));
    worst = std::max(worst, commutator_identity_error(ops.hamiltonian, build_current(basis, 1.0), ops, 1.0));
  }
  led.report("C2 commutator identity", worst <= 1e-12, "max error " + fmt(worst) + " (tol 1e-12)");
}

void criterion3(Ledger& led) {
  ModelParams p = model(6, 3, 1.0);
  p.delta_gamma = 0.0;
  const auto basis = enumerate_basis(6, 3);
  PropagationOptions opts;
  opts.tolerance = 1e-9;
  const auto [rho, rep] = propagate_to_steady_state(DensityMatrix::random_physical(basis, 1), p,
                                                     LindbladOperators::build(basis, p), opts);
  led.track(rep);
  Matrix diff = rho.matrix();
  diff.diagonal().array() -= 1.0 / 56.0;
  const double err = max_abs(diff);
  led.report("C3 equilibrium steady state", rep.converged && err <= 1e-7,
             "max |R - 1/N| " + fmt(err) + " (tol 1e-7), t=" + fmt(rep.elapsed_time));
}

void criterion4(Ledger& led) {
  double worst = 0.0;
  bool converged = true;
  std::string detail;
  for (auto [l, n] : {std::pair{4, 2}, {6, 3}})
    for (double u : {0.0, 1.0}) {
      const ModelParams p = model(l, n, u);
      const auto basis = enumerate_basis(l, n);
      const DensityMatrix direct = solve_deviation_direct(p, LindbladOperators::build(basis, p)).first;
      PropagationOptions opts;
      opts.tolerance = 1e-9;
      auto steady = [&](double dg) {
        ModelParams q = p;
        q.delta_gamma = dg;
        auto [rho, rep] =
            propagate_to_steady_state(DensityMatrix::maximally_mixed(basis), q, LindbladOperators::build(basis, q), opts);
        led.track(rep);
        converged = converged && rep.converged;
        return extract_deviation_odd(rho, dg);
      };
      const DensityMatrix extracted = richardson_deviation(steady(p.delta_gamma), steady(p.delta_gamma / 2));
      const double err = max_abs(extracted.matrix() - direct.matrix());
      worst = std::max(worst, err);
      detail += " (" + std::to_string(l) + "," + std::to_string(n) + ",U=" + fmt(u) + "):" + fmt(err);
    }
  led.report("C4 propagation vs direct", converged && worst <= 1e-6, "tol 1e-6;" + detail);
}

void criterion5(Ledger& led) {
  const auto basis = enumerate_basis(8, 4);
  const EigenDecomposition current = decompose_hermitian(build_current(basis, 1.0));
  LambdaSigmaRelation rel[2];
  const double gammas[2] = {0.04, 0.02};
  for (int k = 0; k < 2; ++k) {
    const ModelParams p = model(8, 4, 0.0, gammas[k]);
    const auto [dev, rep] = solve_deviation_direct(p, LindbladOperators::build(basis, p), {2500, {}});
    rel[k] = lambda_sigma_relation(decompose_hermitian(dev), current, 1.0);
  }
  const bool ok = rel[0].correlation > 0.99 && rel[1].max_deviation < rel[0].max_deviation;
  led.report("C5 lambda-sigma correspondence", ok,
             "corr " + fmt(rel[0].correlation) + ", max dev " + fmt(rel[0].max_deviation) + " -> " +
                 fmt(rel[1].max_deviation) + " at Gamma/2, scale N J^2/4, fitted ratio " + fmt(rel[0].fitted_ratio) +
                 " (a sigma/(4N) form would give 0.25)");
}

SpacingStatistics spectrum_stats(Ledger& led, int l, int n, double u) {
  const PipelineResult r = run_pipeline(model(l, n, u), direct_controls());
  led.spacing_means.push_back(r.spacing->mean_spacing);
  return *r.spacing;
}

void criterion6(Ledger& led, bool heavy) {
  {
    const SpacingStatistics s0 = spectrum_stats(led, 8, 4, 0.0);
    const SpacingStatistics s1 = spectrum_stats(led, 8, 4, 1.0);
    const bool ok = s1.ks_gue < s1.ks_poisson && s0.ks_poisson < s0.ks_gue;
    led.report("C6 fast (8,4) spacing ordering", ok,
               "U=0 KS(P)=" + fmt(s0.ks_poisson) + " KS(GUE)=" + fmt(s0.ks_gue) + "; U=1 KS(P)=" + fmt(s1.ks_poisson) +
                   " KS(GUE)=" + fmt(s1.ks_gue));
  }
  if (!heavy) {
    led.skip("C6 heavy (10,5) spacing ordering", "needs --heavy");
    return;
  }
  const SpacingStatistics s0 = spectrum_stats(led, 10, 5, 0.0);
  const SpacingStatistics s1 = spectrum_stats(led, 10, 5, 1.0);
  const SpacingStatistics s10 = spectrum_stats(led, 10, 5, 10.0);
  const bool ok = s1.ks_gue < s1.ks_poisson && s0.ks_poisson < s0.ks_gue && s10.ks_poisson < s10.ks_gue;
  led.report("C6 heavy (10,5) spacing ordering", ok,
             "U=0 KS(P)=" + fmt(s0.ks_poisson) + " KS(GUE)=" + fmt(s0.ks_gue) + "; U=1 KS(P)=" + fmt(s1.ks_poisson) +
                 " KS(GUE)=" + fmt(s1.ks_gue) + "; U=10 KS(P)=" + fmt(s10.ks_poisson) + " KS(GUE)=" + fmt(s10.ks_gue));
}

void criterion7(Ledger& led, bool heavy) {
  if (!heavy) {
    led.skip("C7 current-vs-U phenomenology", "needs --heavy");
    return;
  }
  ExperimentConfig c = load_config(std::nullopt, {"model.L=10", "sweep.N=[2,3,4]"});
  c.output_dir = std::filesystem::temp_directory_path() / "bht_acceptance_sweep";
  c.run.write_checkpoint = false;
  const SweepResult s = cmd_sweep(c);
  std::map<int, double> at0, at10;
  bool ok_points = true;
  for (const auto& r : s.records) {
    ok_points = ok_points && r.error.empty() && r.converged;
    if (r.params.interaction == 0.0) at0[r.params.particles] = r.current;
    if (r.params.interaction == 10.0) at10[r.params.particles] = r.current;
  }
  const bool a = at0[2] < at0[3] && at0[3] < at0[4];
  bool b = true;
  std::string drops;
  for (int n : {2, 3, 4}) {
    b = b && at0[n] > 5.0 * at10[n];
    drops += " N=" + std::to_string(n) + ":" + fmt(at0[n] / at10[n]);
  }
  const bool cc = at10[2] > at10[3] && at10[3] > at10[4];
  std::string currents;
  for (int n : {2, 3, 4}) currents += " I(N=" + std::to_string(n) + ")=" + fmt(at0[n]) + "/" + fmt(at10[n]);
  led.report("C7a current rises with N at U=0", ok_points && a, currents + " (U=0/U=10)");
  led.report("C7b drop factor > 5 by U=10", ok_points && b, "drops" + drops);
  led.report("C7c current falls with N at U=10", ok_points && cc, "summary " + s.summary_path.string());
}

void criterion8(Ledger& led) {
  const auto basis = enumerate_basis(6, 3);
  const ChainOperator current = build_current(basis, 1.0);
  {
    const PipelineResult r = run_pipeline(model(6, 3, 10.0), direct_controls());
    const EigenDecomposition& d = r.deviation_dec;
    const RealVector& q = r.transport.quantiles;
    const Index n = d.dimension();
    const std::vector<int> left{3, 0, 0, 0, 0, 0}, right{0, 0, 0, 0, 0, 3};
    const RealVector ol = fock_overlap(d, basis->index_of(left));
    const RealVector orr = fock_overlap(d, basis->index_of(right));
    const double qmax = q.cwiseAbs().maxCoeff();
    // Gamma_1 > Gamma_2 fills site 1: the largest lambda sits on |3,0,...,0>,
    // the smallest on |0,...,0,3>.
    const double overlap = std::min(ol(n - 1), orr(0));
    const double q_ext = std::max(std::abs(q(0)), std::abs(q(n - 1)));
    // Carriers: eigenstates in the top decile of |I_j| are mostly hard-core.
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(q(a)) > std::abs(q(b)); });
    const Index top = std::max<Index>(1, n / 10);
    double hc = 0.0;
    for (Index k = 0; k < top; ++k) hc += r.transport.hardcore(order[k]);
    hc /= static_cast<double>(top);
    led.report("C8a U=10 extremal states localize", overlap > 0.9 && q_ext < 0.01 * qmax,
               "overlaps " + fmt(overlap) + " (>0.9), |I_extremal|/max|I| " + fmt(q_ext / qmax) +
                   " (<0.01), top-decile hard-core overlap " + fmt(hc));
  }
  {
    const PipelineResult r = run_pipeline(model(6, 3, 0.0), direct_controls());
    const RealVector& lambda = r.deviation_dec.eigenvalues;
    const RealVector& q = r.transport.quantiles;
    const double qmax = q.cwiseAbs().maxCoeff();
    const double lmax = lambda.cwiseAbs().maxCoeff();
    int sign_violations = 0;
    double worst_step = 0.0;
    for (Index j = 0; j < lambda.size(); ++j) {
      if (std::abs(lambda(j)) > 1e-6 * lmax && lambda(j) * q(j) < 0.0) ++sign_violations;
      if (j > 0) worst_step = std::max(worst_step, q(j - 1) - q(j));
    }
    led.report("C8b U=0 quantiles smooth and sign-ordered", sign_violations == 0 && worst_step <= 1e-3 * qmax,
               "sign violations " + std::to_string(sign_violations) + ", largest decrease of I_j along j " +
                   fmt(worst_step / qmax) + " of max|I| (tol 1e-3)");
  }
}

void criterion9(Ledger& led) {
  const ModelParams p = model(8, 4);
  const PipelineResult r = run_pipeline(p, direct_controls());
  const double pipeline = r.transport.current;
  const double semi = semi_analytic_current(r.current_dec, p);
  const double fitted = fitted_prefactor(pipeline, r.current_dec, p);
  const double alt = semi_analytic_prefactor(PrefactorConvention::kParticleSquared, p);
  const double rel = std::abs(semi - pipeline) / std::abs(pipeline);
  led.report("C9 semi-analytic current", rel < 0.1,
             "pipeline " + fmt(pipeline) + ", semi-analytic " + fmt(semi) + " (rel diff " + fmt(rel) +
                 "), prefactor used 4/J^2=" + fmt(semi_analytic_prefactor(PrefactorConvention::kLinearResponse, p)) +
                 ", fitted " + fmt(fitted) + ", 4JN^2 form gives " + fmt(alt));
}

void criterion10(Ledger& led) {
  led.report("C10a propagation drift", led.trace_drift <= 1e-9 && led.hermiticity_drift <= 1e-9,
             "trace " + fmt(led.trace_drift) + ", hermiticity " + fmt(led.hermiticity_drift) + " (tol 1e-9)");
  bool means_ok = !led.spacing_means.empty();
  std::string means;
  for (double m : led.spacing_means) {
    means_ok = means_ok && m >= 0.98 && m <= 1.02;
    means += " " + fmt(m);
  }
  led.report("C10b unfolded spacing means", means_ok, "means" + means + " (in [0.98, 1.02])");

  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  int gue_ok = 0, poisson_ok = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const int n = 500;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) a(i, k) = Complex(normal(rng), normal(rng));
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (a + a.adjoint())), Eigen::EigenvaluesOnly);
    const RealVector& e = es.eigenvalues();
    const SpacingStatistics g = unfold_spacings(std::span<const double>(e.data(), n));
    if (g.ks_gue < g.ks_poisson) ++gue_ok;
    std::vector<double> x(1000);
    for (double& v : x) v = uniform(rng);
    std::sort(x.begin(), x.end());
    const SpacingStatistics p = unfold_spacings(x);
    if (p.ks_poisson < p.ks_gue) ++poisson_ok;
  }
  led.report("C10c synthetic classification", gue_ok >= 95 && poisson_ok >= 95,
             "GUE " + std::to_string(gue_ok) + "/100, Poisson " + std::to_string(poisson_ok) + "/100 (>= 95)");
}

}  // namespace

int main(int argc, char** argv) {
  bool heavy = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--heavy") == 0) heavy = true;

  Ledger led;
  try {
    criterion1(led);
    criterion2(led);
    criterion3(led);
    criterion4(led);
    criterion5(led);
    criterion6(led, heavy);
    criterion7(led, heavy);
    criterion8(led);
    criterion9(led);
    criterion10(led);
  } catch (const std::exception& e) {
    std::cout << "FAIL aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (led.failures == 0 ? "acceptance: all criteria passed" : "acceptance: " + std::to_string(led.failures) + " failed")
            << (heavy ? "" : " (heavy criteria skipped)") << std::endl;
  return led.failures == 0 ? 0 : 1;
}
