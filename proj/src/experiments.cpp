#include "metacausal/experiments.hpp"

#include <cmath>
#include <vector>

#include "metacausal/errors.hpp"
#include "metacausal/parallel.hpp"

namespace metacausal::experiments {

std::uint64_t setup_seed(std::uint64_t master, int table, int k, double d, int index) {
  const auto milli = static_cast<std::uint64_t>(std::llround(d * 1000.0));
  return derive_seed(master, {static_cast<std::uint64_t>(table),
                              static_cast<std::uint64_t>(k), milli,
                              static_cast<std::uint64_t>(index)});
}

std::array<int, 5> confusion_row(int k_true, double d, int datasets,
                                 std::uint64_t master,
                                 const discovery::DiscoveryConfig& base,
                                 unsigned threads) {
  if (k_true < 1 || k_true > kMaxMechanisms)
    throw ArgumentError("confusion_row: k_true must lie in [1, 4]");
  if (datasets < 1) throw ArgumentError("confusion_row: datasets must be >= 1");
  std::vector<int> k_hat(static_cast<std::size_t>(datasets));
  parallel_for(k_hat.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = setup_seed(master, 1, k_true, d, static_cast<int>(i));
    const Dataset data = datagen::generate_setup(k_true, d, kPointsPerClass, seed);
    discovery::DiscoveryConfig config = base;
    config.max_class_dev = d;
    config.master_seed = seed;
    config.dataset_id = i;
    config.threads = 1;
    k_hat[i] = discovery::recover_mechanism_count(data.points, config).k_hat;
  });
  std::array<int, 5> counts{};
  for (int v : k_hat) ++counts[static_cast<std::size_t>(v)];
  return counts;
}

double ConvergenceCell::mean_slope_error() const {
  return converged ? slope_error_sum / (static_cast<double>(converged) * k) : 0.0;
}

double ConvergenceCell::mean_intercept_error() const {
  return converged ? intercept_error_sum / (static_cast<double>(converged) * k) : 0.0;
}

ConvergenceCell convergence_cell(int k, double d, int setups, int inits,
                                 std::uint64_t master, unsigned threads,
                                 em::DirectionPolicy policy) {
  if (k < 1 || k > kMaxMechanisms)
    throw ArgumentError("convergence_cell: k must lie in [1, 4]");
  if (setups < 1 || inits < 1)
    throw ArgumentError("convergence_cell: setups and inits must be >= 1");
  struct SetupResult {
    int converged = 0;
    int strict = 0;
    double slope = 0.0;
    double intercept = 0.0;
  };
  std::vector<SetupResult> results(static_cast<std::size_t>(setups));
  const em::EMConfig config = em::EMConfig::for_k(k);
  parallel_for(results.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = setup_seed(master, 3, k, d, static_cast<int>(i));
    const Dataset data = datagen::generate_setup(k, d, kPointsPerClass, seed);
    const auto& truth = data.generator->mechanisms;
    SetupResult& r = results[i];
    for (int init = 0; init < inits; ++init) {
      Rng rng(discovery::restart_seed(seed, k, init));
      auto mechs = discovery::sample_init(data.points, k, rng);
      const em::MixtureState s =
          em::run_em(data.points, em::make_state(data.points, std::move(mechs)), config);
      if (em::check_convergence(s.mechanisms, truth, config.convergence_tol))
        ++r.strict;
      const auto m =
          em::match_mechanisms(s.mechanisms, truth, config.convergence_tol, policy);
      if (m && m->within_tolerance) {
        ++r.converged;
        r.slope += m->mean_abs_slope_error * k;
        r.intercept += m->mean_abs_intercept_error * k;
      }
    }
  });
  ConvergenceCell cell;
  cell.k = k;
  cell.d = d;
  cell.trials = setups * inits;
  for (const auto& r : results) {
    cell.converged += r.converged;
    cell.converged_strict += r.strict;
    cell.slope_error_sum += r.slope;
    cell.intercept_error_sum += r.intercept;
  }
  return cell;
}

}  // namespace metacausal::experiments
