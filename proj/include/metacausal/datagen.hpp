#pragma once
// Synthetic switching-mechanism datasets over two variables.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "metacausal/mechanism.hpp"
#include "metacausal/rng.hpp"

namespace metacausal {

inline constexpr int kMaxMechanisms = 4;

struct GeneratorInfo {
  std::vector<MechanismParams> mechanisms;
  std::vector<double> class_probs;
  std::uint64_t seed = 0;
};

struct Dataset {
  std::vector<Point> points;
  std::optional<std::vector<int>> labels;
  std::optional<GeneratorInfo> generator;

  std::size_t size() const { return points.size(); }
};

namespace datagen {

// Worst-case class split for k classes and maximum relative deviation d:
// floor(k/2) classes at (1+d)/k, then 1/k when k is odd, then floor(k/2)
// classes at (1-d)/k.
std::vector<double> class_probabilities(int k, double d);

// |alpha| ~ U[0.2, 5] with random sign, beta ~ U[-5, 5], b ~ U[0.1, 4],
// direction uniform over {XY, YX}.
MechanismParams sample_mechanism(Rng& rng);
std::vector<MechanismParams> sample_mechanisms(int k, Rng& rng);

// k * n_per_class_avg points; each point picks its mechanism from probs, its
// cause ~ U[-5, 5], and its effect from the mechanism plus Laplace noise.
Dataset generate_dataset(const std::vector<MechanismParams>& mechs,
                         const std::vector<double>& probs, int n_per_class_avg,
                         Rng& rng);

// Same, drawing from Rng(seed) and recording the seed in the generator info.
Dataset generate_dataset(const std::vector<MechanismParams>& mechs,
                         const std::vector<double>& probs, int n_per_class_avg,
                         std::uint64_t seed);

// Full benchmark setup: mechanisms, worst-case probabilities and data, all
// derived from one seed.
Dataset generate_setup(int k, double d, int n_per_class_avg, std::uint64_t seed);

}  // namespace datagen

namespace io {

// Shortest round-trip decimal rendering, locale independent.
std::string format_double(double v);

// Header `x,y[,label]`.
void write_dataset_csv(std::ostream& out, const Dataset& data);
// Throws IoError naming the offending line.
Dataset read_dataset_csv(std::istream& in);

std::string generator_to_json(const GeneratorInfo& g);
GeneratorInfo generator_from_json(const std::string& text);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace io
}  // namespace metacausal
