#pragma once
// EM over a mixture of directed linear Laplace mechanisms with weighted L1
// M-steps and per-mechanism causal-direction selection.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "metacausal/mechanism.hpp"

namespace metacausal::em {

// Row-major m x k matrix of per-point mechanism responsibilities.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::vector<double> column(std::size_t k) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MixtureState {
  std::vector<MechanismParams> mechanisms;
  Matrix responsibilities;
  double log_likelihood = 0.0;
};

struct EMConfig {
  int steps = 5;
  double convergence_tol = 0.2;

  // 5 steps for one or two mechanisms, 10 beyond.
  static EMConfig for_k(int k) { return {k <= 2 ? 5 : 10, 0.2}; }
};

// Minimum total responsibility a mechanism needs to be re-fitted.
inline constexpr double kMinEffectivePoints = 2.0;

// Consecutive point pairs define initial XY lines with b = 1. Returns nullopt
// (resample) when a pair is vertical or the point count is odd or zero.
std::optional<std::vector<MechanismParams>> init_from_pairs(
    std::span<const Point> points);

// Log Laplace density of every point under every mechanism, each evaluated on
// the mechanism's own residual axis.
Matrix log_densities(std::span<const Point> data,
                     std::span<const MechanismParams> mechs);

// Per-point normalized densities. Rows whose densities all vanish are uniform.
Matrix responsibilities(std::span<const Point> data,
                        std::span<const MechanismParams> mechs);

// sum_i log((1/k) sum_k p_k(x_i, y_i)), equal component weights.
double mixture_log_likelihood(std::span<const Point> data,
                              std::span<const MechanismParams> mechs);

MixtureState make_state(std::span<const Point> data,
                        std::vector<MechanismParams> mechs);

// One M-step (weighted L1 fit in both directions per mechanism, direction with
// the lower weighted Anderson-Darling statistic kept) followed by an E-step.
// Mechanisms with less than kMinEffectivePoints total weight stay frozen.
MixtureState em_step(std::span<const Point> data, const MixtureState& state);

// Exactly config.steps EM steps.
MixtureState run_em(std::span<const Point> data, MixtureState init,
                    const EMConfig& config);

// Strict: an estimate only matches a truth of the same direction.
// Reorient: an estimate of the other direction is first rewritten as the same
// line in the truth's orientation (x = a y + c  <=>  y = x/a - c/a).
enum class DirectionPolicy { Strict, Reorient };

// The same line with cause and effect swapped; b is rescaled by 1/|alpha|.
// Throws DegenerateFit for a zero slope.
MechanismParams reoriented(const MechanismParams& m);

// Best assignment of estimated to true mechanisms, minimizing the summed
// max(|d alpha|, |d beta|). Assignments within tolerance are preferred.
struct Matching {
  std::vector<int> assignment;  // estimate index -> truth index
  double cost = 0.0;
  double mean_abs_slope_error = 0.0;
  double mean_abs_intercept_error = 0.0;
  bool within_tolerance = false;
};

std::optional<Matching> match_mechanisms(
    std::span<const MechanismParams> est, std::span<const MechanismParams> truth,
    double tol = 0.2, DirectionPolicy policy = DirectionPolicy::Strict);

// True iff some assignment keeps every |d alpha| and |d beta| within tol
// (with matching directions under Strict). Length mismatch yields false.
bool check_convergence(std::span<const MechanismParams> est,
                       std::span<const MechanismParams> truth, double tol = 0.2,
                       DirectionPolicy policy = DirectionPolicy::Strict);

}  // namespace metacausal::em
