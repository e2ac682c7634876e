#include <doctest.h>

#include <vector>

#include "metacausal/datagen.hpp"
#include "metacausal/discovery.hpp"
#include "metacausal/errors.hpp"
#include "metacausal/sampling_bounds.hpp"

using namespace metacausal;
using namespace metacausal::discovery;

namespace {

em::Matrix matrix_from(const std::vector<std::vector<double>>& rows) {
  em::Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

TEST_CASE("dominance_filter text rule") {
  const em::Matrix r = matrix_from({{0.7, 0.3}, {0.55, 0.45}, {0.2, 0.8}, {0.65, 0.35}});
  CHECK(dominance_filter(r, 0) == std::vector<std::size_t>{0, 3});
  CHECK(dominance_filter(r, 1) == std::vector<std::size_t>{2});
  // 0.35 < 0.5 * 0.65 fails once the margin is widened.
  CHECK(dominance_filter(r, 0, 0.5) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(dominance_filter(r, 2), ArgumentError);

  const em::Matrix one = matrix_from({{1.0}, {1.0}, {1.0}});
  CHECK(dominance_filter(one, 0).size() == 3);
}

TEST_CASE("dominance_filter pseudocode rule") {
  // second < 0.4 (1 - top): for two classes second = 1 - top, so nothing passes.
  const em::Matrix two = matrix_from({{0.99, 0.01}, {0.7, 0.3}});
  CHECK(dominance_filter(two, 0, 0.4, FilterRule::Pseudocode).empty());
  const em::Matrix three = matrix_from({{0.5, 0.1, 0.4}, {0.6, 0.05, 0.35}});
  CHECK(dominance_filter(three, 0, 0.4, FilterRule::Pseudocode).empty());
  const em::Matrix spread = matrix_from({{0.4, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}});
  CHECK(dominance_filter(spread, 0, 0.4, FilterRule::Pseudocode).size() == 1);
}

TEST_CASE("resample counts") {
  DiscoveryConfig c;
  c.resample_mode = ResampleMode::Theoretical;
  const auto table = bounds::table2_theoretical();
  for (std::size_t r = 0; r < 3; ++r) {
    c.max_class_dev = bounds::kTableDeviations[r];
    for (int k = 1; k <= 4; ++k) CHECK(resample_count(c, k) == table[r][k - 1]);
  }
  c.max_class_dev = 1.0;
  CHECK_THROWS_AS(resample_count(c, 2), ArgumentError);

  DiscoveryConfig e;
  CHECK(resample_count(e, 1) == 2);
  CHECK(resample_count(e, 2) == 8);
  CHECK(resample_count(e, 3) == 24);
  CHECK(resample_count(e, 4) == 173);
  e.empirical_rates = {0.5};
  CHECK(resample_count(e, 1) == 5);
  CHECK_THROWS_AS(resample_count(e, 2), ArgumentError);
}

TEST_CASE("default empirical rates pick the covering deviation row") {
  CHECK(default_empirical_rates(0.0)[1] == doctest::Approx(0.3480));
  CHECK(default_empirical_rates(0.05)[1] == doctest::Approx(0.3404));
  CHECK(default_empirical_rates(0.1)[1] == doctest::Approx(0.3404));
  CHECK(default_empirical_rates(0.15)[1] == doctest::Approx(0.3134));
  CHECK(default_empirical_rates(0.9)[3] == doctest::Approx(0.0168));
  CHECK_THROWS_AS(default_empirical_rates(-0.1), ArgumentError);
}

TEST_CASE("config validation") {
  DiscoveryConfig c;
  CHECK_NOTHROW(c.validate());
  c.dominance_margin = 1.0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = {};
  c.k_max = 0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = {};
  c.empirical_rates = {0.5, 0.0};
  CHECK_THROWS_AS(c.validate(), ArgumentError);
}

TEST_CASE("sample_init draws non-vertical distinct pairs") {
  const Dataset d = datagen::generate_setup(2, 0.0, 100, 1);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto m = sample_init(d.points, 3, rng);
    CHECK(m.size() == 3);
    for (const auto& p : m) {
      CHECK(p.b == 1.0);
      CHECK(p.direction == Direction::XY);
    }
  }
  const std::vector<Point> vertical{{1, 0}, {1, 1}, {1, 2}};
  CHECK_THROWS_AS(sample_init(vertical, 1, rng), DegenerateFit);
  CHECK_THROWS_AS(sample_init(vertical, 2, rng), ArgumentError);
}

TEST_CASE("lo_ransac_best argument checks") {
  const Dataset d = datagen::generate_setup(1, 0.0, 100, 3);
  CHECK_THROWS_AS(lo_ransac_best(d.points, 1, 0, 1), ArgumentError);
  const std::vector<Point> tiny{{0, 0}, {1, 1}, {2, 2}};
  CHECK_THROWS_AS(lo_ransac_best(tiny, 2, 4, 1), ArgumentError);
}

TEST_CASE("k=1 restarts agree") {
  const Dataset d = datagen::generate_setup(1, 0.0, 500, 4);
  const auto a = lo_ransac_best(d.points, 1, 2, 10);
  const auto b = lo_ransac_best(d.points, 1, 1, 999);
  CHECK(a.mechanisms == b.mechanisms);
}

TEST_CASE("lo_ransac_best ignores the thread count") {
  const Dataset d = datagen::generate_setup(2, 0.0, 300, 5);
  const auto a = lo_ransac_best(d.points, 2, 6, 77, 1);
  const auto b = lo_ransac_best(d.points, 2, 6, 77, 3);
  CHECK(a.mechanisms == b.mechanisms);
  CHECK(a.log_likelihood == b.log_likelihood);
}

TEST_CASE("lo_ransac_best keeps the best restart") {
  const Dataset d = datagen::generate_setup(2, 0.0, 300, 6);
  const auto best = lo_ransac_best(d.points, 2, 6, 88);
  for (int r = 0; r < 6; ++r) {
    Rng rng(restart_seed(88, 2, r));
    auto init = sample_init(d.points, 2, rng);
    const auto s = em::run_em(d.points, em::make_state(d.points, init), em::EMConfig::for_k(2));
    CHECK(s.log_likelihood <= best.log_likelihood);
  }
}

TEST_CASE("eight restarts usually recover k=2 setups") {
  int converged = 0;
  const int datasets = 100;
  for (int i = 0; i < datasets; ++i) {
    const std::uint64_t seed = derive_seed(2024, {static_cast<std::uint64_t>(i)});
    const Dataset d = datagen::generate_setup(2, 0.0, 500, seed);
    const auto s = lo_ransac_best(d.points, 2, 8, seed);
    converged += em::check_convergence(s.mechanisms, d.generator->mechanisms, 0.2,
                                       em::DirectionPolicy::Reorient);
  }
  CHECK(converged >= 80);
}

TEST_CASE("validate_k on single-mechanism data") {
  int passed = 0;
  const int trials = 60;
  DiscoveryConfig c;
  for (int i = 0; i < trials; ++i) {
    const Dataset d = datagen::generate_setup(1, 0.0, 500, 1000 + i);
    const auto s = lo_ransac_best(d.points, 1, 2, i);
    passed += validate_k(d.points, s, c).passed;
  }
  CHECK(passed >= 50);
}

TEST_CASE("validate_k rejects one line through two mechanisms") {
  const std::vector<MechanismParams> truth{{3.0, 4.0, 0.5, Direction::XY},
                                           {-3.0, -4.0, 0.5, Direction::XY}};
  const Dataset d = datagen::generate_dataset(truth, {0.5, 0.5}, 500, std::uint64_t{7});
  const auto s = lo_ransac_best(d.points, 1, 2, 7);
  const Validation v = validate_k(d.points, s, DiscoveryConfig{});
  CHECK_FALSE(v.passed);
  CHECK(v.class_sizes == std::vector<std::size_t>{1000});
}

TEST_CASE("validate_k enforces the minimum class size") {
  Rng rng(8);
  std::vector<Point> pts;
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-5, 5);
    pts.push_back({x, x + rng.laplace(0, 0.3)});
  }
  for (int i = 0; i < 10; ++i) {
    const double x = rng.uniform(-5, 5);
    pts.push_back({x, -x + 40 + rng.laplace(0, 0.3)});
  }
  const std::vector<MechanismParams> m{{1.0, 0.0, 0.3, Direction::XY},
                                       {-1.0, 40.0, 0.3, Direction::XY}};
  const auto s = em::make_state(pts, m);
  const Validation v = validate_k(pts, s, DiscoveryConfig{});
  REQUIRE(v.class_sizes.size() == 2);
  CHECK(v.class_sizes[1] == 10);
  CHECK_FALSE(v.ad[1].passed);
  CHECK_FALSE(v.passed);
}

TEST_CASE("recover_mechanism_count") {
  DiscoveryConfig c;
  CHECK_THROWS_AS(recover_mechanism_count(std::vector<Point>{}, c), ArgumentError);

  const Dataset d = datagen::generate_setup(1, 0.0, 500, 11);
  c.master_seed = 5;
  const DiscoveryResult a = recover_mechanism_count(d.points, c);
  const DiscoveryResult b = recover_mechanism_count(d.points, c);
  CHECK(a.k_hat == b.k_hat);
  REQUIRE(a.per_k.size() == b.per_k.size());
  for (std::size_t i = 0; i < a.per_k.size(); ++i) {
    CHECK(a.per_k[i].best.mechanisms == b.per_k[i].best.mechanisms);
    CHECK(a.per_k[i].resamples == b.per_k[i].resamples);
  }
  CHECK(a.decided == (a.k_hat > 0));
  for (const auto& attempt : a.per_k)
    CHECK(attempt.validation.passed == (attempt.k == a.k_hat));
}

TEST_CASE("recover_mechanism_count on single-mechanism data") {
  int hits = 0;
  DiscoveryConfig c;
  c.k_max = 2;
  for (int i = 0; i < 20; ++i) {
    const Dataset d = datagen::generate_setup(1, 0.0, 500, 500 + i);
    c.dataset_id = static_cast<std::uint64_t>(i);
    hits += recover_mechanism_count(d.points, c).k_hat == 1;
  }
  CHECK(hits >= 14);
}

TEST_CASE("an undecided result still reports every attempt") {
  DiscoveryConfig c;
  c.k_max = 2;
  c.empirical_rates = {0.9, 0.9};
  // Two Gaussian clouds: no k passes a Laplace residual test.
  Rng rng(12);
  std::vector<Point> pts;
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-5, 5);
    pts.push_back({x, 2.0 * x + 3.0 * rng.normal()});
  }
  const DiscoveryResult r = recover_mechanism_count(pts, c);
  CHECK_FALSE(r.decided);
  CHECK(r.k_hat == 0);
  CHECK(r.per_k.size() == 2);
}
