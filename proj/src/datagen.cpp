#include "metacausal/datagen.hpp"

#include <cmath>
#include <numeric>

#include "metacausal/errors.hpp"

namespace metacausal {

std::string_view to_string(Direction d) { return d == Direction::XY ? "XY" : "YX"; }

Direction direction_from_string(std::string_view s) {
  if (s == "XY") return Direction::XY;
  if (s == "YX") return Direction::YX;
  throw ArgumentError("unknown direction '" + std::string(s) + "'");
}

namespace datagen {

std::vector<double> class_probabilities(int k, double d) {
  if (k < 1) throw ArgumentError("class_probabilities: k must be >= 1");
  if (!(d >= 0.0) || d >= 1.0)
    throw ArgumentError("class_probabilities: deviation must lie in [0, 1)");
  const int half = k / 2;
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < half; ++i) p.push_back((1.0 + d) / k);
  if (k % 2 == 1) p.push_back(1.0 / k);
  for (int i = 0; i < half; ++i) p.push_back((1.0 - d) / k);
  return p;
}

MechanismParams sample_mechanism(Rng& rng) {
  MechanismParams m;
  const double magnitude = rng.uniform(0.2, 5.0);
  m.alpha = rng.coin() ? magnitude : -magnitude;
  m.beta = rng.uniform(-5.0, 5.0);
  m.b = rng.uniform(0.1, 4.0);
  m.direction = rng.coin() ? Direction::XY : Direction::YX;
  return m;
}

std::vector<MechanismParams> sample_mechanisms(int k, Rng& rng) {
  if (k < 1 || k > kMaxMechanisms)
    throw ArgumentError("sample_mechanisms: k must lie in [1, 4]");
  std::vector<MechanismParams> mechs;
  for (int i = 0; i < k; ++i) mechs.push_back(sample_mechanism(rng));
  return mechs;
}

Dataset generate_dataset(const std::vector<MechanismParams>& mechs,
                         const std::vector<double>& probs, int n_per_class_avg,
                         Rng& rng) {
  if (mechs.empty()) throw ArgumentError("generate_dataset: no mechanisms");
  if (probs.size() != mechs.size())
    throw ArgumentError("generate_dataset: probs and mechanisms differ in length");
  if (n_per_class_avg < 1)
    throw ArgumentError("generate_dataset: n_per_class_avg must be >= 1");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::fabs(total - 1.0) > 1e-12)
    throw ArgumentError("generate_dataset: class probabilities must sum to 1");
  for (double p : probs)
    if (p < 0.0) throw ArgumentError("generate_dataset: negative class probability");
  for (const auto& m : mechs)
    if (!(m.b > 0.0)) throw ArgumentError("generate_dataset: noise scale must be > 0");

  const std::size_t m_total = mechs.size() * static_cast<std::size_t>(n_per_class_avg);
  Dataset data;
  data.points.reserve(m_total);
  std::vector<int> labels;
  labels.reserve(m_total);
  for (std::size_t i = 0; i < m_total; ++i) {
    const double u = rng.uniform();
    std::size_t c = 0;
    double acc = probs[0];
    while (u >= acc && c + 1 < probs.size()) acc += probs[++c];
    const MechanismParams& mech = mechs[c];
    const double cause = rng.uniform(-5.0, 5.0);
    const double effect = mech.alpha * cause + mech.beta + rng.laplace(0.0, mech.b);
    data.points.push_back(mech.direction == Direction::XY ? Point{cause, effect}
                                                          : Point{effect, cause});
    labels.push_back(static_cast<int>(c));
  }
  data.labels = std::move(labels);
  data.generator = GeneratorInfo{mechs, probs, 0};
  return data;
}

Dataset generate_dataset(const std::vector<MechanismParams>& mechs,
                         const std::vector<double>& probs, int n_per_class_avg,
                         std::uint64_t seed) {
  Rng rng(seed);
  Dataset data = generate_dataset(mechs, probs, n_per_class_avg, rng);
  data.generator->seed = seed;
  return data;
}

Dataset generate_setup(int k, double d, int n_per_class_avg, std::uint64_t seed) {
  Rng rng(seed);
  const auto mechs = sample_mechanisms(k, rng);
  Dataset data = generate_dataset(mechs, class_probabilities(k, d), n_per_class_avg, rng);
  data.generator->seed = seed;
  return data;
}

}  // namespace datagen
}  // namespace metacausal
