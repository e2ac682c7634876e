#include <doctest.h>

#include <cmath>
#include <vector>

#include "metacausal/datagen.hpp"
#include "metacausal/errors.hpp"
#include "metacausal/mixture_em.hpp"
#include "metacausal/stats.hpp"

using namespace metacausal;
using namespace metacausal::em;

namespace {

std::vector<Point> line_points(double a, double c, int n, double noise, Rng& rng) {
  std::vector<Point> p;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(-5, 5);
    p.push_back({x, a * x + c + (noise > 0 ? rng.laplace(0, noise) : 0.0)});
  }
  return p;
}

void check_rows_sum_to_one(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += v;
    CHECK(std::fabs(s - 1.0) < 1e-9);
  }
}

}  // namespace

TEST_CASE("init_from_pairs") {
  const std::vector<Point> one{{0, 1}, {1, 3}};
  const auto m = init_from_pairs(one);
  REQUIRE(m.has_value());
  REQUIRE(m->size() == 1);
  CHECK((*m)[0] == MechanismParams{2.0, 1.0, 1.0, Direction::XY});

  const std::vector<Point> vertical{{0, 0}, {0, 1}};
  CHECK_FALSE(init_from_pairs(vertical).has_value());

  const std::vector<Point> two{{0, 1}, {1, 3}, {0, 0}, {2, -2}};
  const auto m2 = init_from_pairs(two);
  REQUIRE(m2.has_value());
  REQUIRE(m2->size() == 2);
  CHECK((*m2)[1].alpha == doctest::Approx(-1.0));
  CHECK((*m2)[1].beta == doctest::Approx(0.0));

  const std::vector<Point> odd{{0, 1}, {1, 3}, {2, 2}};
  CHECK_FALSE(init_from_pairs(odd).has_value());
}

TEST_CASE("responsibilities examples") {
  Rng rng(1);
  const auto pts = line_points(1.0, 0.0, 50, 0.5, rng);
  const std::vector<MechanismParams> single{{1.0, 0.0, 0.5, Direction::XY}};
  const Matrix r1 = responsibilities(pts, single);
  for (std::size_t i = 0; i < r1.rows(); ++i) CHECK(r1(i, 0) == 1.0);

  // Density ratio exp(-|10|/0.5) / exp(0) for a point on line 0 and 10 off line 1.
  const std::vector<MechanismParams> two{{0.0, 0.0, 0.5, Direction::XY},
                                         {0.0, 10.0, 0.5, Direction::XY}};
  const std::vector<Point> on_first{{1.0, 0.0}};
  const Matrix r2 = responsibilities(on_first, two);
  CHECK(r2(0, 0) >= 0.99);
  CHECK(r2(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-20.0))));

  const std::vector<Point> middle{{3.0, 5.0}};
  const Matrix r3 = responsibilities(middle, two);
  CHECK(r3(0, 0) == doctest::Approx(0.5));
  CHECK(r3(0, 1) == doctest::Approx(0.5));

  // Far enough out that every density underflows.
  const std::vector<MechanismParams> narrow{{0.0, 0.0, 1e-6, Direction::XY},
                                            {0.0, 1.0, 1e-6, Direction::XY},
                                            {0.0, 2.0, 1e-6, Direction::YX}};
  const std::vector<Point> far{{1e3, -1e3}};
  const Matrix r4 = responsibilities(far, narrow);
  check_rows_sum_to_one(r4);
  CHECK_THROWS_AS(responsibilities(pts, std::vector<MechanismParams>{}), ArgumentError);
}

TEST_CASE("YX densities use the x residual") {
  const std::vector<MechanismParams> m{{2.0, 1.0, 1.0, Direction::YX}};
  const std::vector<Point> p{{7.0, 3.0}, {10.0, 3.0}};
  const Matrix ld = log_densities(p, m);
  CHECK(ld(0, 0) == doctest::Approx(-std::log(2.0)));
  CHECK(ld(1, 0) == doctest::Approx(-std::log(2.0) - 3.0));
}

TEST_CASE("responsibility rows sum to one on mixed data") {
  const Dataset d = datagen::generate_setup(4, 0.2, 200, 3);
  Rng rng(4);
  const auto mechs = datagen::sample_mechanisms(4, rng);
  check_rows_sum_to_one(responsibilities(d.points, mechs));
  const MixtureState s = run_em(d.points, make_state(d.points, mechs), EMConfig::for_k(4));
  check_rows_sum_to_one(s.responsibilities);
}

TEST_CASE("k=1 log-likelihood is the Laplace log-likelihood") {
  Rng rng(5);
  const auto pts = line_points(2.0, -1.0, 100, 0.7, rng);
  const MechanismParams m{2.1, -0.9, 0.8, Direction::XY};
  double expected = 0.0;
  for (const Point& p : pts) expected += -std::log(2.0 * m.b) - std::fabs(residual(m, p)) / m.b;
  const std::vector<MechanismParams> ms{m};
  CHECK(mixture_log_likelihood(pts, ms) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("k=1 noiseless line is exact after one step") {
  Rng rng(6);
  const auto pts = line_points(1.5, 0.5, 200, 0.0, rng);
  MixtureState s = make_state(pts, *init_from_pairs(std::vector<Point>{pts[0], pts[1]}));
  s = em_step(pts, s);
  const MechanismParams m = s.mechanisms[0];
  const MechanismParams line = m.direction == Direction::XY ? m : reoriented(m);
  CHECK(line.alpha == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(line.beta == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("k=1 EM step does not lower the likelihood") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = datagen::generate_setup(1, 0.0, 500, seed);
    Rng rng(seed + 100);
    const std::vector<MechanismParams> init{{rng.uniform(-3, 3), rng.uniform(-3, 3), 1.0,
                                             Direction::XY}};
    const MixtureState s0 = make_state(d.points, init);
    const MixtureState s1 = em_step(d.points, s0);
    CHECK(s1.log_likelihood >= s0.log_likelihood - 1e-9);
  }
}

TEST_CASE("k=1 run_em equals a direct L1 fit") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = datagen::generate_setup(1, 0.0, 500, seed);
    const std::vector<MechanismParams> init{{1.0, 0.0, 1.0, Direction::XY}};
    const MixtureState s = run_em(d.points, make_state(d.points, init), EMConfig::for_k(1));
    const MechanismParams m = s.mechanisms[0];
    std::vector<double> cause, effect, w(d.size(), 1.0);
    for (const Point& p : d.points) {
      cause.push_back(m.direction == Direction::XY ? p.x : p.y);
      effect.push_back(m.direction == Direction::XY ? p.y : p.x);
    }
    const stats::LineFit f = stats::l1_fit(cause, effect, w);
    CHECK(std::fabs(m.alpha - f.alpha) < 1e-6);
    CHECK(std::fabs(m.beta - f.beta) < 1e-6);
  }
}

TEST_CASE("well-separated k=2 with correct-pair init converges") {
  const std::vector<MechanismParams> truth{{2.0, 4.0, 0.3, Direction::XY},
                                           {-1.5, -3.0, 0.3, Direction::XY}};
  const Dataset d = datagen::generate_dataset(truth, {0.5, 0.5}, 500, std::uint64_t{7});
  std::vector<Point> pair;
  for (int c = 0; c < 2; ++c) {
    int taken = 0;
    for (std::size_t i = 0; i < d.size() && taken < 2; ++i)
      if ((*d.labels)[i] == c) {
        pair.push_back(d.points[i]);
        ++taken;
      }
  }
  const auto init = init_from_pairs(pair);
  REQUIRE(init.has_value());
  const MixtureState s = run_em(d.points, make_state(d.points, *init), EMConfig::for_k(2));
  CHECK(check_convergence(s.mechanisms, truth, 0.2, DirectionPolicy::Reorient));
}

TEST_CASE("k=3 with correct-pair init converges on a separable instance") {
  const std::vector<MechanismParams> truth{{3.0, 0.0, 0.2, Direction::XY},
                                           {0.3, 4.0, 0.2, Direction::XY},
                                           {-2.0, -4.0, 0.2, Direction::XY}};
  const Dataset d = datagen::generate_dataset(truth, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 500,
                                              std::uint64_t{8});
  std::vector<Point> pairs;
  for (int c = 0; c < 3; ++c) {
    int taken = 0;
    for (std::size_t i = 0; i < d.size() && taken < 2; ++i)
      if ((*d.labels)[i] == c) {
        pairs.push_back(d.points[i]);
        ++taken;
      }
  }
  const auto init = init_from_pairs(pairs);
  REQUIRE(init.has_value());
  const MixtureState s = run_em(d.points, make_state(d.points, *init), EMConfig::for_k(3));
  CHECK(check_convergence(s.mechanisms, truth, 0.2, DirectionPolicy::Reorient));
}

TEST_CASE("run_em is deterministic and respects the step count") {
  const Dataset d = datagen::generate_setup(2, 0.0, 300, 9);
  Rng rng(10);
  const auto mechs = datagen::sample_mechanisms(2, rng);
  const MixtureState init = make_state(d.points, mechs);
  const MixtureState a = run_em(d.points, init, {3, 0.2});
  const MixtureState b = run_em(d.points, init, {3, 0.2});
  CHECK(a.mechanisms == b.mechanisms);
  CHECK(a.log_likelihood == b.log_likelihood);

  MixtureState manual = init;
  for (int i = 0; i < 3; ++i) manual = em_step(d.points, manual);
  CHECK(manual.mechanisms == a.mechanisms);
  CHECK_FALSE(run_em(d.points, init, {4, 0.2}).mechanisms == a.mechanisms);
  CHECK_THROWS_AS(run_em(d.points, init, {0, 0.2}), ArgumentError);
}

TEST_CASE("starved mechanisms stay frozen") {
  Rng rng(11);
  const auto pts = line_points(1.0, 0.0, 100, 0.2, rng);
  const std::vector<MechanismParams> mechs{{1.0, 0.0, 0.2, Direction::XY},
                                           {0.0, 1000.0, 0.01, Direction::XY}};
  const MixtureState s = em_step(pts, make_state(pts, mechs));
  CHECK(s.mechanisms[1] == mechs[1]);
}

TEST_CASE("EM config per mechanism count") {
  CHECK(EMConfig::for_k(1).steps == 5);
  CHECK(EMConfig::for_k(2).steps == 5);
  CHECK(EMConfig::for_k(3).steps == 10);
  CHECK(EMConfig::for_k(4).steps == 10);
  CHECK(EMConfig::for_k(4).convergence_tol == 0.2);
}

TEST_CASE("check_convergence") {
  const std::vector<MechanismParams> truth{{1.0, 2.0, 1.0, Direction::XY},
                                           {-3.0, 0.5, 0.5, Direction::YX}};
  CHECK(check_convergence(truth, truth));

  auto off = truth;
  off[0].alpha += 0.25;
  CHECK_FALSE(check_convergence(off, truth));
  auto near = truth;
  near[0].alpha += 0.15;
  near[1].beta -= 0.19;
  CHECK(check_convergence(near, truth));

  const std::vector<MechanismParams> permuted{truth[1], truth[0]};
  CHECK(check_convergence(permuted, truth));

  const std::vector<MechanismParams> shorter{truth[0]};
  CHECK_FALSE(check_convergence(shorter, truth));

  auto flipped = truth;
  flipped[0].direction = Direction::YX;
  CHECK_FALSE(check_convergence(flipped, truth));
}

TEST_CASE("reoriented describes the same line") {
  const MechanismParams m{2.0, 1.0, 0.5, Direction::XY};
  const MechanismParams r = reoriented(m);
  CHECK(r.direction == Direction::YX);
  CHECK(r.alpha == doctest::Approx(0.5));
  CHECK(r.beta == doctest::Approx(-0.5));
  CHECK(r.b == doctest::Approx(0.25));
  // A point on y = 2x + 1 satisfies x = 0.5 y - 0.5.
  CHECK(residual(r, {3.0, 7.0}) == doctest::Approx(0.0));
  const MechanismParams back = reoriented(r);
  CHECK(back.alpha == doctest::Approx(m.alpha));
  CHECK(back.beta == doctest::Approx(m.beta));
  CHECK_THROWS_AS(reoriented({0.0, 1.0, 1.0, Direction::XY}), DegenerateFit);

  const std::vector<MechanismParams> truth{m};
  const std::vector<MechanismParams> est{r};
  CHECK_FALSE(check_convergence(est, truth, 0.2, DirectionPolicy::Strict));
  CHECK(check_convergence(est, truth, 0.2, DirectionPolicy::Reorient));
}

TEST_CASE("match_mechanisms reports the assignment and errors") {
  const std::vector<MechanismParams> truth{{1.0, 0.0, 1.0, Direction::XY},
                                           {-2.0, 3.0, 1.0, Direction::XY}};
  const std::vector<MechanismParams> est{{-2.1, 3.05, 1.0, Direction::XY},
                                         {1.02, 0.1, 1.0, Direction::XY}};
  const auto m = match_mechanisms(est, truth);
  REQUIRE(m.has_value());
  CHECK(m->assignment == std::vector<int>{1, 0});
  CHECK(m->within_tolerance);
  CHECK(m->mean_abs_slope_error == doctest::Approx((0.1 + 0.02) / 2));
  CHECK(m->mean_abs_intercept_error == doctest::Approx((0.05 + 0.1) / 2));
  CHECK_FALSE(match_mechanisms(std::vector<MechanismParams>{}, std::vector<MechanismParams>{}));
}
