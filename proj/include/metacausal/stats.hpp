#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metacausal/errors.hpp"

namespace metacausal::stats {

// Lower bound applied to every estimated Laplace scale.
inline constexpr double kScaleFloor = 1e-6;

struct LaplaceParams {
  double mu = 0.0;
  double b = 1.0;
};

// log(1/(2b)) - |x - mu|/b
double laplace_logpdf(double x, LaplaceParams p);
double laplace_cdf(double x, LaplaceParams p);

struct LineFit {
  double alpha = 0.0;  // slope
  double beta = 0.0;   // intercept
};

// sum_i w_i |y_i - (alpha x_i + beta)|
double l1_objective(std::span<const double> xs, std::span<const double> ys,
                    std::span<const double> weights, LineFit line);

// Weighted least-absolute-deviations line. Zero-weight points are ignored.
// The result is an exact minimizer (it interpolates two data points); among
// tied optima the lower weighted medians are taken. Throws DegenerateFit when
// fewer than two points carry weight or all weighted x coincide.
LineFit l1_fit(std::span<const double> xs, std::span<const double> ys,
               std::span<const double> weights);

// Smallest v_k with cumulative weight >= half of the total weight.
double weighted_median(std::span<const double> values,
                       std::span<const double> weights);

// Weighted Laplace-scale MLE, max(kScaleFloor, sum w|r| / sum w).
double estimate_scale(std::span<const double> residuals,
                      std::span<const double> weights);

// Critical values of A^2 for the Laplace case with location and scale
// estimated from the sample, tabulated over sample size.
class CriticalValueTable {
 public:
  struct Entry {
    std::size_t n;
    double critical;
  };
  struct Provenance {
    std::string version;
    std::uint64_t seed = 0;
    std::size_t simulations = 0;
    double level = 0.05;
  };

  CriticalValueTable(std::vector<Entry> entries, Provenance provenance);

  // Shipped table (see data/ad_critical_values.json).
  static const CriticalValueTable& builtin();
  static CriticalValueTable from_json(const std::string& text);
  static CriticalValueTable from_file(const std::string& path);
  std::string to_json() const;

  // Linear interpolation in n, clamped to the tabulated range.
  double critical_value(std::size_t n) const;

  std::span<const Entry> entries() const { return entries_; }
  const Provenance& provenance() const { return provenance_; }

 private:
  std::vector<Entry> entries_;
  Provenance provenance_;
};

struct ADTestResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool passed = false;
  std::size_t n = 0;
};

inline constexpr std::size_t kMinADSamples = 20;

// A^2 of the residuals against a Laplace law fitted by MLE (median location,
// mean-absolute-deviation scale).
double ad_statistic_laplace(std::span<const double> residuals);

// Weighted-EDF generalisation of ad_statistic_laplace: location is the
// weighted median, scale the weighted MLE, and the statistic is scaled by the
// total weight. Equal unit weights reproduce ad_statistic_laplace.
double weighted_ad_statistic_laplace(std::span<const double> residuals,
                                     std::span<const double> weights);

// Goodness-of-fit test at rejection level 0.05. Throws InsufficientData for
// fewer than kMinADSamples residuals. A sample without spread never passes.
ADTestResult anderson_darling_laplace(
    std::span<const double> residuals,
    const CriticalValueTable& table = CriticalValueTable::builtin());

}  // namespace metacausal::stats
