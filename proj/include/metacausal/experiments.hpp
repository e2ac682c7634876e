#pragma once
// Seeded batch experiments behind the `reproduce` command: recovery confusion
// rows, single-initialization EM convergence and parameter accuracy.

#include <array>
#include <cstdint>

#include "metacausal/discovery.hpp"

namespace metacausal::experiments {

// Average points per mechanism in every generated setup.
inline constexpr int kPointsPerClass = 500;

// Seed of one generated setup; experiments differ by `table`.
std::uint64_t setup_seed(std::uint64_t master, int table, int k, double d, int index);

// Histogram of recovered counts over `datasets` seeded k_true setups at
// deviation d; index 0 counts undecided runs. `base` supplies everything but
// the deviation and the seeds.
std::array<int, 5> confusion_row(int k_true, double d, int datasets,
                                 std::uint64_t master,
                                 const discovery::DiscoveryConfig& base,
                                 unsigned threads = 1);

struct ConvergenceCell {
  int k = 0;
  double d = 0.0;
  int trials = 0;
  int converged = 0;         // under the requested direction policy
  int converged_strict = 0;  // additionally with matching directions
  // Summed per-mechanism absolute errors over converged trials.
  double slope_error_sum = 0.0;
  double intercept_error_sum = 0.0;

  double rate() const { return trials ? static_cast<double>(converged) / trials : 0.0; }
  double mean_slope_error() const;
  double mean_intercept_error() const;
};

// `setups` seeded setups, each with `inits` random initializations run for
// EMConfig::for_k(k) steps and matched against the generating mechanisms.
// Errors are accumulated under `policy`.
ConvergenceCell convergence_cell(
    int k, double d, int setups, int inits, std::uint64_t master,
    unsigned threads = 1, em::DirectionPolicy policy = em::DirectionPolicy::Reorient);

}  // namespace metacausal::experiments
