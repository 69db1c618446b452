#include "bht/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace bht {

Reference parse_reference(const std::string& name) {
  if (name == "poisson") return Reference::kPoisson;
  if (name == "gue") return Reference::kGue;
  if (name == "goe") return Reference::kGoe;
  throw ValidationError("unknown reference distribution '" + name + "'");
}

std::string to_string(Reference reference) {
  switch (reference) {
    case Reference::kPoisson: return "poisson";
    case Reference::kGue: return "gue";
    case Reference::kGoe: return "goe";
  }
  return "?";
}

double reference_integrated(Reference reference, double s) {
  require(s >= 0.0, "reference_integrated: s must be >= 0");
  constexpr double pi = std::numbers::pi;
  switch (reference) {
    case Reference::kPoisson:
      return -std::expm1(-s);
    case Reference::kGue: {
      // integral of (32/pi^2) t^2 exp(-a t^2), a = 4/pi
      constexpr double a = 4.0 / pi;
      const double gauss = std::exp(-a * s * s);
      const double value = 32.0 / (pi * pi) *
                           (-s * gauss / (2.0 * a) + std::sqrt(pi) / (4.0 * a * std::sqrt(a)) * std::erf(std::sqrt(a) * s));
      return std::clamp(value, 0.0, 1.0);
    }
    case Reference::kGoe:
      return -std::expm1(-pi * s * s / 4.0);
  }
  return 0.0;
}

double reference_density(Reference reference, double s) {
  require(s >= 0.0, "reference_density: s must be >= 0");
  constexpr double pi = std::numbers::pi;
  switch (reference) {
    case Reference::kPoisson: return std::exp(-s);
    case Reference::kGue: return 32.0 / (pi * pi) * s * s * std::exp(-4.0 * s * s / pi);
    case Reference::kGoe: return pi / 2.0 * s * std::exp(-pi * s * s / 4.0);
  }
  return 0.0;
}

double SpacingStatistics::empirical_integrated(double s) const {
  if (sorted_spacings.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_spacings.begin(), sorted_spacings.end(), s);
  return static_cast<double>(it - sorted_spacings.begin()) / static_cast<double>(sorted_spacings.size());
}

namespace {

// Least-squares polynomial coefficients (ascending powers) on x in [-1, 1].
RealVector fit_polynomial(const RealVector& x, const RealVector& y, int degree) {
  RealMatrix vandermonde(x.size(), degree + 1);
  vandermonde.col(0).setOnes();
  for (int p = 1; p <= degree; ++p) vandermonde.col(p) = vandermonde.col(p - 1).cwiseProduct(x);
  return vandermonde.colPivHouseholderQr().solve(y);
}

double derivative_at(const RealVector& coeffs, double x) {
  double value = 0.0;
  for (Index p = coeffs.size() - 1; p >= 1; --p) value = value * x + static_cast<double>(p) * coeffs[p];
  return value;
}

}  // namespace

SpacingStatistics unfold_spacings(std::span<const double> eigenvalues, double central_fraction, int max_degree) {
  require(eigenvalues.size() >= 50, "unfold_spacings: need at least 50 eigenvalues");
  require(central_fraction > 0.0 && central_fraction <= 1.0, "unfold_spacings: central fraction must be in (0, 1]");
  require(max_degree >= 1, "unfold_spacings: polynomial degree must be >= 1");

  SpacingStatistics stats;
  stats.eigenvalues.assign(eigenvalues.begin(), eigenvalues.end());
  std::stable_sort(stats.eigenvalues.begin(), stats.eigenvalues.end());
  stats.central_fraction = central_fraction;

  const auto n = static_cast<Index>(stats.eigenvalues.size());
  const Index keep = std::clamp<Index>(static_cast<Index>(std::llround(central_fraction * static_cast<double>(n))), 2, n);
  stats.window_begin = (n - keep) / 2;
  stats.window_end = stats.window_begin + keep;

  const double width = stats.eigenvalues.back() - stats.eigenvalues.front();
  const double collapse = 1e-12 * width;
  std::vector<double> levels;
  levels.reserve(keep);
  for (Index k = stats.window_begin; k < stats.window_end; ++k) {
    const double v = stats.eigenvalues[k];
    if (!levels.empty() && v - levels.back() <= collapse) {
      ++stats.collapsed_degeneracies;
      continue;
    }
    levels.push_back(v);
  }
  const auto m = static_cast<Index>(levels.size());
  require(m >= 3, "unfold_spacings: fewer than three distinct levels in the window");

  const double center = 0.5 * (levels.front() + levels.back());
  const double half = 0.5 * (levels.back() - levels.front());
  RealVector x(m), staircase(m);
  for (Index k = 0; k < m; ++k) {
    x[k] = (levels[k] - center) / half;
    staircase[k] = static_cast<double>(k);
  }

  RealVector coeffs;
  int degree = std::min<int>(max_degree, static_cast<int>(m) - 1);
  for (; degree >= 1; --degree) {
    coeffs = fit_polynomial(x, staircase, degree);
    bool monotone = true;
    for (Index k = 0; k < m && monotone; ++k) monotone = derivative_at(coeffs, x[k]) > 0.0;
    if (monotone) break;
  }
  // Degree 1 always has a positive slope for an ascending staircase.
  stats.fit_degree = degree;

  stats.spacings.resize(m - 1);
  for (Index k = 0; k + 1 < m; ++k) {
    const double density = derivative_at(coeffs, x[k]) / half;
    stats.spacings[k] = std::max(0.0, (levels[k + 1] - levels[k]) * density);
  }
  stats.sorted_spacings = stats.spacings;
  std::sort(stats.sorted_spacings.begin(), stats.sorted_spacings.end());
  double sum = 0.0;
  for (double s : stats.spacings) sum += s;
  stats.mean_spacing = sum / static_cast<double>(stats.spacings.size());
  stats.ks_poisson = ks_distance(stats.sorted_spacings, Reference::kPoisson);
  stats.ks_gue = ks_distance(stats.sorted_spacings, Reference::kGue);
  return stats;
}

double ks_distance(std::span<const double> sorted_sample, Reference reference) {
  require(!sorted_sample.empty(), "ks_distance: empty sample");
  const double n = static_cast<double>(sorted_sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_sample.size(); ++i) {
    const double f = reference_integrated(reference, std::max(0.0, sorted_sample[i]));
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "ks_distance: empty sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value_1pct(std::size_t sample_size) {
  return 1.6276 / std::sqrt(static_cast<double>(sample_size));
}

std::vector<DistributionRow> emit_distribution(const SpacingStatistics& stats, double s_max, double step) {
  require(step > 0.0 && s_max >= 0.0, "emit_distribution: invalid grid");
  const auto points = static_cast<std::size_t>(std::llround(s_max / step)) + 1;
  std::vector<DistributionRow> rows;
  rows.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double s = static_cast<double>(k) * step;
    rows.push_back({s, stats.empirical_integrated(s), reference_integrated(Reference::kPoisson, s),
                    reference_integrated(Reference::kGue, s)});
  }
  return rows;
}

void write_distribution_csv(std::ostream& out, const std::vector<DistributionRow>& rows) {
  const auto old_precision = out.precision(12);
  out << "s,empirical,poisson_ref,gue_ref\n";
  for (const auto& r : rows) out << r.s << ',' << r.empirical << ',' << r.poisson << ',' << r.gue << '\n';
  out.precision(old_precision);
}

}  // namespace bht
