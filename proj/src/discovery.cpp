#include "metacausal/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metacausal/errors.hpp"
#include "metacausal/parallel.hpp"
#include "metacausal/reference_values.hpp"
#include "metacausal/sampling_bounds.hpp"

namespace metacausal::discovery {
namespace {

constexpr int kMaxInitAttempts = 10000;

int checked_count(long long n) {
  if (n > 100000000) throw ArgumentError("resample count too large to run");
  return static_cast<int>(n);
}

}  // namespace

void DiscoveryConfig::validate() const {
  if (k_max < 1) throw ArgumentError("k_max must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ArgumentError("confidence must lie in (0, 1)");
  if (!(max_class_dev >= 0.0)) throw ArgumentError("max_class_dev must be >= 0");
  if (!(dominance_margin > 0.0 && dominance_margin < 1.0))
    throw ArgumentError("dominance_margin must lie in (0, 1)");
  if (min_class_points < 1) throw ArgumentError("min_class_points must be >= 1");
  for (double r : empirical_rates)
    if (!(r > 0.0 && r <= 1.0)) throw ArgumentError("empirical rates must lie in (0, 1]");
}

std::vector<double> default_empirical_rates(double max_class_dev) {
  if (!(max_class_dev >= 0.0)) throw ArgumentError("max_class_dev must be >= 0");
  const auto& rates = reference::kConvergenceRates;
  std::size_t row = rates.size() - 1;
  for (std::size_t r = 0; r < bounds::kTableDeviations.size(); ++r) {
    if (bounds::kTableDeviations[r] >= max_class_dev - 1e-12) {
      row = r;
      break;
    }
  }
  return {rates[row].begin(), rates[row].end()};
}

int resample_count(const DiscoveryConfig& config, int k) {
  if (k < 1) throw ArgumentError("resample_count: k must be >= 1");
  if (config.resample_mode == ResampleMode::Theoretical) {
    const auto bound = bounds::lower_bound_success_prob(k, config.max_class_dev);
    if (bound.deviation_saturated || !(bound.probability > 0.0))
      throw ArgumentError("resample_count: bound is zero for this deviation");
    return checked_count(bounds::required_resamples(bound.probability, config.confidence));
  }
  const std::vector<double> rates = config.empirical_rates.empty()
                                        ? default_empirical_rates(config.max_class_dev)
                                        : config.empirical_rates;
  if (static_cast<std::size_t>(k) > rates.size())
    throw ArgumentError("resample_count: no empirical rate for this k");
  return checked_count(bounds::empirical_resamples(rates[static_cast<std::size_t>(k) - 1],
                                                   config.confidence));
}

std::uint64_t restart_seed(std::uint64_t stream_seed, int k, int restart) {
  return derive_seed(stream_seed, {static_cast<std::uint64_t>(k),
                                   static_cast<std::uint64_t>(restart)});
}

std::vector<MechanismParams> sample_init(std::span<const Point> data, int k,
                                         Rng& rng) {
  const std::size_t need = 2 * static_cast<std::size_t>(k);
  if (k < 1 || data.size() < need)
    throw ArgumentError("sample_init: need at least 2k points");
  std::vector<Point> picked(need);
  std::vector<std::size_t> idx(need);
  for (int attempt = 0; attempt < kMaxInitAttempts; ++attempt) {
    for (std::size_t j = 0; j < need; ++j) {
      std::size_t cand;
      do {
        cand = static_cast<std::size_t>(rng.below(data.size()));
      } while (std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(j),
                         cand) != idx.begin() + static_cast<std::ptrdiff_t>(j));
      idx[j] = cand;
      picked[j] = data[cand];
    }
    if (auto init = em::init_from_pairs(picked)) return *init;
  }
  throw DegenerateFit("sample_init: could not draw non-vertical pairs");
}

em::MixtureState lo_ransac_best(std::span<const Point> data, int k,
                                int n_resamples, std::uint64_t stream_seed,
                                unsigned threads) {
  if (n_resamples < 1) throw ArgumentError("lo_ransac_best: n_resamples must be >= 1");
  if (k < 1 || data.size() < 2 * static_cast<std::size_t>(k))
    throw ArgumentError("lo_ransac_best: need at least 2k points");
  const em::EMConfig config = em::EMConfig::for_k(k);

  struct Outcome {
    std::vector<MechanismParams> mechanisms;
    double log_likelihood = -std::numeric_limits<double>::infinity();
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(n_resamples));
  parallel_for(outcomes.size(), threads, [&](std::size_t r) {
    Rng rng(restart_seed(stream_seed, k, static_cast<int>(r)));
    auto init = sample_init(data, k, rng);
    em::MixtureState s = em::run_em(data, em::make_state(data, std::move(init)), config);
    if (std::isfinite(s.log_likelihood))
      outcomes[r] = {std::move(s.mechanisms), s.log_likelihood};
  });

  std::size_t best = outcomes.size();
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (outcomes[r].mechanisms.empty()) continue;
    if (best == outcomes.size() ||
        outcomes[r].log_likelihood > outcomes[best].log_likelihood)
      best = r;
  }
  if (best == outcomes.size())
    throw DegenerateFit("lo_ransac_best: every restart diverged");
  return em::make_state(data, std::move(outcomes[best].mechanisms));
}

em::MixtureState lo_ransac_best(std::span<const Point> data, int k,
                                int n_resamples, Rng& rng) {
  return lo_ransac_best(data, k, n_resamples, rng.engine()(), 1);
}

std::vector<std::size_t> dominance_filter(const em::Matrix& responsibilities,
                                          std::size_t class_index, double margin,
                                          FilterRule rule) {
  if (class_index >= responsibilities.cols())
    throw ArgumentError("dominance_filter: class index out of range");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < responsibilities.rows(); ++i) {
    const auto row = responsibilities.row(i);
    std::size_t top = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[top]) top = j;
    if (top != class_index) continue;
    double second = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j)
      if (j != top) second = std::max(second, row[j]);
    const bool keep = rule == FilterRule::Text
                          ? second < (1.0 - margin) * row[top]
                          : second < margin * (1.0 - row[top]);
    if (keep || row.size() == 1) kept.push_back(i);
  }
  return kept;
}

Validation validate_k(std::span<const Point> data, const em::MixtureState& state,
                      const DiscoveryConfig& config,
                      const stats::CriticalValueTable& table) {
  if (state.responsibilities.rows() != data.size())
    throw ArgumentError("validate_k: state does not belong to this data");
  Validation v;
  v.passed = true;
  const std::size_t floor_points =
      std::max<std::size_t>(static_cast<std::size_t>(config.min_class_points),
                            stats::kMinADSamples);
  for (std::size_t j = 0; j < state.mechanisms.size(); ++j) {
    const auto kept = dominance_filter(state.responsibilities, j,
                                       config.dominance_margin, config.filter_rule);
    v.class_sizes.push_back(kept.size());
    if (kept.size() < floor_points) {
      v.ad.push_back({0.0, table.critical_value(std::max<std::size_t>(kept.size(), 1)),
                      false, kept.size()});
      v.passed = false;
      continue;
    }
    std::vector<double> r;
    r.reserve(kept.size());
    for (std::size_t i : kept) r.push_back(residual(state.mechanisms[j], data[i]));
    v.ad.push_back(stats::anderson_darling_laplace(r, table));
    v.passed = v.passed && v.ad.back().passed;
  }
  return v;
}

DiscoveryResult recover_mechanism_count(std::span<const Point> data,
                                        const DiscoveryConfig& config,
                                        const stats::CriticalValueTable& table) {
  if (data.empty()) throw ArgumentError("recover_mechanism_count: empty data");
  config.validate();
  DiscoveryResult result;
  const std::uint64_t stream = derive_seed(config.master_seed, {config.dataset_id});
  for (int k = 1; k <= config.k_max; ++k) {
    if (data.size() < 2 * static_cast<std::size_t>(k)) break;
    KAttempt attempt;
    attempt.k = k;
    attempt.resamples = resample_count(config, k);
    attempt.stream_seed = stream;
    attempt.best = lo_ransac_best(data, k, attempt.resamples, stream, config.threads);
    attempt.validation = validate_k(data, attempt.best, config, table);
    const bool passed = attempt.validation.passed;
    result.per_k.push_back(std::move(attempt));
    if (passed) {
      result.k_hat = k;
      result.decided = true;
      break;
    }
  }
  return result;
}

}  // namespace metacausal::discovery
