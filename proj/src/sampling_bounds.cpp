#include "metacausal/sampling_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "metacausal/errors.hpp"

namespace metacausal::bounds {
namespace {

long long ceil_resamples(double log_fail, double p) {
  if (p == 1.0) return 1;
  const double k = log_fail / std::log1p(-p);
  if (!(k < 9.0e18)) throw DomainError("required_resamples: count exceeds 64 bits");
  // Guard against ceil() stepping past an exact integer by rounding noise.
  const double r = std::round(k);
  if (std::fabs(k - r) < 1e-9 * std::max(1.0, r))
    return static_cast<long long>(std::max(1.0, r));
  return static_cast<long long>(std::max(1.0, std::ceil(k)));
}

}  // namespace

double expected_success_prob(int n) {
  if (n < 1) throw ArgumentError("expected_success_prob: n must be >= 1");
  const double nn = n;
  if (n > 100) return std::exp(std::lgamma(nn + 1.0) - 2.0 * nn * std::log(nn));
  double p = 1.0;
  for (int i = 1; i <= n; ++i) p *= i / (nn * nn);
  return p;
}

SuccessBound lower_bound_success_prob(int n, double d) {
  if (n < 1) throw ArgumentError("lower_bound_success_prob: n must be >= 1");
  if (!(d >= 0.0)) throw ArgumentError("lower_bound_success_prob: d must be >= 0");
  if (d >= 1.0) return {0.0, true};
  if (n == 1) return {1.0, false};

  const double nn = n;
  const double big = (1.0 + d) / nn;
  const double small = (1.0 - d) / nn;
  // P(new): each draw opens a class not seen yet; P(same): its partner
  // lands in that class. Large classes go first.
  double p_new = 1.0;
  double p_same = 1.0;
  if (n % 2 == 0) {
    const int half = n / 2;
    for (int i = half; i <= n; ++i) p_new *= (nn - (1.0 + d) * (n - i)) / nn;
    for (int i = 1; i <= half - 1; ++i) p_new *= i * (1.0 - d) / nn;
    for (int i = 0; i < half; ++i) p_same *= big * small;
  } else {
    const int half = (n - 1) / 2;
    for (int i = half + 1; i <= n; ++i) p_new *= (nn - (1.0 + d) * (n - i)) / nn;
    p_new *= (nn - (1.0 + d) * half - 1.0) / nn;
    for (int i = 1; i <= half - 1; ++i) p_new *= i * (1.0 - d) / nn;
    for (int i = 0; i < half; ++i) p_same *= big * small;
    p_same *= 1.0 / nn;
  }
  return {p_new * p_same, false};
}

long long required_resamples(double p, double confidence) {
  if (!(p > 0.0) || p > 1.0) throw ArgumentError("required_resamples: p must lie in (0, 1]");
  if (!(confidence > 0.0) || !(confidence < 1.0))
    throw ArgumentError("required_resamples: confidence must lie in (0, 1)");
  return ceil_resamples(std::log1p(-confidence), p);
}

long long empirical_resamples(double convergence_rate, double confidence) {
  if (!(convergence_rate > 0.0) || convergence_rate > 1.0)
    throw ArgumentError("empirical_resamples: rate must lie in (0, 1]");
  return required_resamples(convergence_rate, confidence);
}

std::array<std::array<int, 4>, 3> table2_theoretical(double confidence) {
  std::array<std::array<int, 4>, 3> table{};
  for (std::size_t r = 0; r < kTableDeviations.size(); ++r)
    for (int n = 1; n <= 4; ++n)
      table[r][n - 1] = static_cast<int>(required_resamples(
          lower_bound_success_prob(n, kTableDeviations[r]).probability, confidence));
  return table;
}

std::vector<int> empirical_row(const std::vector<double>& rates, double confidence) {
  std::vector<int> row;
  for (double r : rates) row.push_back(static_cast<int>(empirical_resamples(r, confidence)));
  return row;
}

}  // namespace metacausal::bounds
