#pragma once
// Probability of drawing one same-class pair from every one of n classes, and
// the number of random restarts needed to see such a draw with a given
// confidence.

#include <array>
#include <vector>

namespace metacausal::bounds {

// n! / n^(2n), evaluated in log space.
double expected_success_prob(int n);

struct SuccessBound {
  double probability = 0.0;
  // Set when d >= 1: some class may be empty, so the bound collapses to 0.
  bool deviation_saturated = false;
};

// Worst-case lower bound for class probabilities deviating from 1/n by up to a
// relative d: large classes are exhausted first, then (odd n) the average
// class, then the small ones. Odd n uses (n-1)/2 large and small classes and
// one 1/n middle class.
SuccessBound lower_bound_success_prob(int n, double d);

// ceil(ln(1 - confidence) / ln(1 - p)); 1 when p = 1.
long long required_resamples(double p, double confidence = 0.95);

// Same ceiling applied to a measured single-initialization convergence rate.
long long empirical_resamples(double convergence_rate, double confidence = 0.95);

inline constexpr std::array<double, 3> kTableDeviations{0.0, 0.1, 0.2};

// Rows d in {0, 0.1, 0.2}, columns n in {1..4}.
std::array<std::array<int, 4>, 3> table2_theoretical(double confidence = 0.95);

// Resample counts from measured convergence rates (one rate per n).
std::vector<int> empirical_row(const std::vector<double>& rates,
                               double confidence = 0.95);

}  // namespace metacausal::bounds
