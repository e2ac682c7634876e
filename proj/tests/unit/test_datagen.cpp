#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "metacausal/datagen.hpp"
#include "metacausal/stats.hpp"

using namespace metacausal;

namespace {

// |count - n p| within z binomial standard deviations.
bool within_binomial(std::size_t count, std::size_t n, double p, double z = 4.0) {
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  return std::fabs(static_cast<double>(count) - mean) <= z * sd;
}

std::vector<std::size_t> class_counts(const Dataset& d, std::size_t k) {
  std::vector<std::size_t> c(k, 0);
  for (int l : *d.labels) ++c[static_cast<std::size_t>(l)];
  return c;
}

}  // namespace

TEST_CASE("class_probabilities") {
  const auto p4 = datagen::class_probabilities(4, 0.2);
  REQUIRE(p4.size() == 4);
  CHECK(p4[0] == doctest::Approx(0.3));
  CHECK(p4[1] == doctest::Approx(0.3));
  CHECK(p4[2] == doctest::Approx(0.2));
  CHECK(p4[3] == doctest::Approx(0.2));

  for (double d : {0.0, 0.3, 0.99}) CHECK(datagen::class_probabilities(1, d) == std::vector<double>{1.0});

  const auto p3 = datagen::class_probabilities(3, 0.1);
  CHECK(std::fabs(p3[0] - 0.36667) < 1e-5);
  CHECK(std::fabs(p3[1] - 0.33333) < 1e-5);
  CHECK(std::fabs(p3[2] - 0.3) < 1e-5);

  for (int k = 1; k <= 4; ++k)
    for (double d : {0.0, 0.1, 0.2, 0.5}) {
      const auto p = datagen::class_probabilities(k, d);
      CHECK(std::fabs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
    }
  CHECK_THROWS_AS(datagen::class_probabilities(2, 1.0), ArgumentError);
  CHECK_THROWS_AS(datagen::class_probabilities(0, 0.0), ArgumentError);
}

TEST_CASE("sampled mechanisms respect the generation ranges") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const MechanismParams m = datagen::sample_mechanism(rng);
    CHECK(std::fabs(m.alpha) >= 0.2);
    CHECK(std::fabs(m.alpha) <= 5.0);
    CHECK(m.beta >= -5.0);
    CHECK(m.beta <= 5.0);
    CHECK(m.b >= 0.1);
    CHECK(m.b <= 4.0);
  }
  CHECK(datagen::sample_mechanisms(3, rng).size() == 3);
  CHECK_THROWS_AS(datagen::sample_mechanisms(5, rng), ArgumentError);
  CHECK_THROWS_AS(datagen::sample_mechanisms(0, rng), ArgumentError);
}

TEST_CASE("mechanism draw moments") {
  Rng rng(2);
  const int n = 100000;
  double sum_abs = 0.0;
  int xy = 0, positive = 0;
  for (int i = 0; i < n; ++i) {
    const MechanismParams m = datagen::sample_mechanism(rng);
    sum_abs += std::fabs(m.alpha);
    xy += m.direction == Direction::XY;
    positive += m.alpha > 0;
  }
  CHECK(std::fabs(sum_abs / n - 2.6) < 0.05);
  CHECK(std::fabs(static_cast<double>(xy) / n - 0.5) < 0.01);
  CHECK(std::fabs(static_cast<double>(positive) / n - 0.5) < 0.01);
}

TEST_CASE("near-noiseless identity line") {
  const std::vector<MechanismParams> m{{1.0, 0.0, 1e-6, Direction::XY}};
  const Dataset d = datagen::generate_dataset(m, {1.0}, 500, std::uint64_t{3});
  REQUIRE(d.size() == 500);
  for (const Point& p : d.points) {
    CHECK(std::fabs(p.y - p.x) < 1e-3);
    CHECK(p.x >= -5.0);
    CHECK(p.x <= 5.0);
  }
}

TEST_CASE("YX mechanisms put the cause on the y axis") {
  const std::vector<MechanismParams> m{{2.0, 1.0, 1e-6, Direction::YX}};
  const Dataset d = datagen::generate_dataset(m, {1.0}, 200, std::uint64_t{4});
  for (const Point& p : d.points) {
    CHECK(std::fabs(p.x - (2.0 * p.y + 1.0)) < 1e-3);
    CHECK(std::fabs(p.y) <= 5.0);
  }
}

TEST_CASE("class counts follow the class probabilities") {
  Rng rng(5);
  const auto m2 = datagen::sample_mechanisms(2, rng);
  const Dataset d2 = datagen::generate_dataset(m2, datagen::class_probabilities(2, 0.0), 500,
                                               std::uint64_t{6});
  REQUIRE(d2.size() == 1000);
  CHECK(within_binomial(class_counts(d2, 2)[0], 1000, 0.5));

  const auto m4 = datagen::sample_mechanisms(4, rng);
  const auto p4 = datagen::class_probabilities(4, 0.2);
  const Dataset d4 = datagen::generate_dataset(m4, p4, 500, std::uint64_t{7});
  const auto c4 = class_counts(d4, 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(within_binomial(c4[i], 2000, p4[i]));
}

TEST_CASE("generate_dataset argument checks") {
  Rng rng(8);
  const auto m = datagen::sample_mechanisms(2, rng);
  CHECK_THROWS_AS(datagen::generate_dataset(m, {1.0}, 10, rng), ArgumentError);
  CHECK_THROWS_AS(datagen::generate_dataset(m, {0.7, 0.7}, 10, rng), ArgumentError);
  CHECK_THROWS_AS(datagen::generate_dataset(m, {0.5, 0.5}, 0, rng), ArgumentError);
  CHECK_THROWS_AS(datagen::generate_dataset({}, {}, 10, rng), ArgumentError);
}

TEST_CASE("generation is a pure function of the seed") {
  const Dataset a = datagen::generate_setup(3, 0.1, 200, 42);
  const Dataset b = datagen::generate_setup(3, 0.1, 200, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.points[i].x == b.points[i].x);
    CHECK(a.points[i].y == b.points[i].y);
  }
  CHECK(*a.labels == *b.labels);
  CHECK(a.generator->mechanisms == b.generator->mechanisms);
  CHECK(a.generator->seed == 42);
  const Dataset c = datagen::generate_setup(3, 0.1, 200, 43);
  CHECK_FALSE(c.points[0].x == a.points[0].x);
}

TEST_CASE("true-label residuals pass the Laplace test") {
  int passed = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset d = datagen::generate_setup(2, 0.0, 500, seed);
    for (std::size_t c = 0; c < 2; ++c) {
      std::vector<double> r;
      for (std::size_t i = 0; i < d.size(); ++i)
        if ((*d.labels)[i] == static_cast<int>(c))
          r.push_back(residual(d.generator->mechanisms[c], d.points[i]));
      ++total;
      passed += stats::anderson_darling_laplace(r).passed;
    }
  }
  CHECK(static_cast<double>(passed) / total >= 0.90);
}

TEST_CASE("dataset CSV round trip") {
  const Dataset d = datagen::generate_setup(2, 0.0, 50, 9);
  std::stringstream ss;
  io::write_dataset_csv(ss, d);
  const Dataset back = io::read_dataset_csv(ss);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.points[i].x == d.points[i].x);
    CHECK(back.points[i].y == d.points[i].y);
  }
  CHECK(*back.labels == *d.labels);
}

TEST_CASE("dataset CSV errors name the line") {
  std::stringstream bad("x,y\n1,2\n3,abc\n");
  try {
    io::read_dataset_csv(bad);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::stringstream empty("");
  CHECK_THROWS_AS(io::read_dataset_csv(empty), IoError);
  std::stringstream header("a,b\n1,2\n");
  CHECK_THROWS_AS(io::read_dataset_csv(header), IoError);
}

TEST_CASE("generator metadata round trip") {
  const Dataset d = datagen::generate_setup(3, 0.2, 10, 77);
  const GeneratorInfo g = io::generator_from_json(io::generator_to_json(*d.generator));
  CHECK(g.mechanisms == d.generator->mechanisms);
  CHECK(g.class_probs == d.generator->class_probs);
  CHECK(g.seed == 77);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, -3.25, 1e-300, 123456789.123456789}) CHECK(std::stod(io::format_double(v)) == v);
}
