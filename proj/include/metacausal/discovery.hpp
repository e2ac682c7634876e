#pragma once
// Recovering the number of linear mechanisms behind bivariate data: sampled
// EM restarts, best-likelihood selection, dominance filtering and residual
// Laplace tests, tried for k = 1, 2, ... in order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "metacausal/datagen.hpp"
#include "metacausal/mixture_em.hpp"
#include "metacausal/rng.hpp"
#include "metacausal/stats.hpp"

namespace metacausal::discovery {

enum class ResampleMode { Theoretical, Empirical };

// Text: keep when second < (1 - margin) * top.
// Pseudocode: keep when second < margin * (1 - top); kept for comparison only.
enum class FilterRule { Text, Pseudocode };

struct DiscoveryConfig {
  int k_max = 4;
  double confidence = 0.95;
  double max_class_dev = 0.0;
  ResampleMode resample_mode = ResampleMode::Empirical;
  // Single-init convergence rate per k (index 0 is k = 1). Empty selects
  // default_empirical_rates(max_class_dev).
  std::vector<double> empirical_rates;
  double dominance_margin = 0.4;
  int min_class_points = 20;
  FilterRule filter_rule = FilterRule::Text;
  std::uint64_t master_seed = 0;
  std::uint64_t dataset_id = 0;
  unsigned threads = 1;  // 0 = hardware concurrency

  // Throws ArgumentError on out-of-range fields.
  void validate() const;
};

// Measured single-initialization EM convergence rates for k = 1..4 at the
// smallest tabulated deviation (0, 0.1, 0.2) not below d; d > 0.2 uses 0.2.
std::vector<double> default_empirical_rates(double max_class_dev);

// Number of restarts for mechanism count k under the configured mode.
int resample_count(const DiscoveryConfig& config, int k);

// Seed of restart r for mechanism count k.
std::uint64_t restart_seed(std::uint64_t stream_seed, int k, int restart);

// Draws 2k distinct points whose consecutive pairs are not vertical and turns
// them into initial mechanisms.
std::vector<MechanismParams> sample_init(std::span<const Point> data, int k,
                                         Rng& rng);

// n_resamples EM runs from random inits; the highest log-likelihood wins,
// ties going to the earliest restart. Restart r draws from
// Rng(restart_seed(stream_seed, k, r)).
em::MixtureState lo_ransac_best(std::span<const Point> data, int k,
                                int n_resamples, std::uint64_t stream_seed,
                                unsigned threads = 1);
em::MixtureState lo_ransac_best(std::span<const Point> data, int k,
                                int n_resamples, Rng& rng);

// Indices of the points whose top class is class_index and whose runner-up
// responsibility passes the rule. With one class every point is kept.
std::vector<std::size_t> dominance_filter(const em::Matrix& responsibilities,
                                          std::size_t class_index,
                                          double margin = 0.4,
                                          FilterRule rule = FilterRule::Text);

struct Validation {
  bool passed = false;
  std::vector<stats::ADTestResult> ad;     // one per mechanism
  std::vector<std::size_t> class_sizes;    // points left after filtering
};

Validation validate_k(std::span<const Point> data, const em::MixtureState& state,
                      const DiscoveryConfig& config,
                      const stats::CriticalValueTable& table =
                          stats::CriticalValueTable::builtin());

struct KAttempt {
  int k = 0;
  int resamples = 0;
  std::uint64_t stream_seed = 0;
  em::MixtureState best;
  Validation validation;
};

struct DiscoveryResult {
  int k_hat = 0;  // 0: no k passed
  bool decided = false;
  std::vector<KAttempt> per_k;
};

DiscoveryResult recover_mechanism_count(
    std::span<const Point> data, const DiscoveryConfig& config,
    const stats::CriticalValueTable& table = stats::CriticalValueTable::builtin());

}  // namespace metacausal::discovery
