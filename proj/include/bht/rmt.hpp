#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bht/types.hpp"

namespace bht {

enum class Reference { kPoisson, kGue, kGoe };

Reference parse_reference(const std::string& name);
std::string to_string(Reference reference);

/// Integrated spacing distribution of the reference ensemble: Poisson
/// 1 - exp(-s), or the Wigner surmise for GUE/GOE.
double reference_integrated(Reference reference, double s);
double reference_density(Reference reference, double s);

/// Unfolded nearest-neighbour spacings of one spectrum.
struct SpacingStatistics {
  std::vector<double> eigenvalues;  // full input, sorted
  double central_fraction = 0.6;
  Index window_begin = 0;  // rank window [begin, end) of the sorted input
  Index window_end = 0;
  int fit_degree = 0;
  Index collapsed_degeneracies = 0;
  std::vector<double> spacings;         // in spectral order
  std::vector<double> sorted_spacings;  // ascending, for the integrated distribution
  double mean_spacing = 0.0;
  double ks_poisson = 0.0;
  double ks_gue = 0.0;

  /// Fraction of unfolded spacings <= s.
  double empirical_integrated(double s) const;
};

/// Keeps the central `central_fraction` of the spectrum by rank, collapses
/// exact degeneracies (gap < 1e-12 * spectral width), fits the integrated
/// staircase with a polynomial of degree <= max_degree whose derivative is
/// positive on the window, and returns s_k = (l_{k+1} - l_k) f(l_k) with f
/// the fitted mean density.
SpacingStatistics unfold_spacings(std::span<const double> eigenvalues, double central_fraction = 0.6,
                                  int max_degree = 7);

/// sup |F_empirical - F_reference| for an ascending sample.
double ks_distance(std::span<const double> sorted_sample, Reference reference);

/// Two-sample sup distance between ascending samples.
double ks_distance(std::span<const double> sorted_a, std::span<const double> sorted_b);

/// Asymptotic one-sample critical value at significance alpha = 0.01.
double ks_critical_value_1pct(std::size_t sample_size);

struct DistributionRow {
  double s;
  double empirical;
  double poisson;
  double gue;
};

/// Integrated distributions on the grid s = 0, step, ..., s_max.
std::vector<DistributionRow> emit_distribution(const SpacingStatistics& stats, double s_max = 4.0,
                                               double step = 0.02);

void write_distribution_csv(std::ostream& out, const std::vector<DistributionRow>& rows);

}  // namespace bht
