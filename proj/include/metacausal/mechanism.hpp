#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace metacausal {

// XY: y = alpha x + beta + noise.  YX: x = alpha y + beta + noise.
enum class Direction { XY, YX };

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// One directed linear mechanism with Laplace(0, b) noise on its own axis.
struct MechanismParams {
  double alpha = 0.0;
  double beta = 0.0;
  double b = 1.0;
  Direction direction = Direction::XY;

  friend bool operator==(const MechanismParams&, const MechanismParams&) = default;
};

// Effect minus predicted effect, measured on the mechanism's effect axis.
inline double residual(const MechanismParams& m, Point p) {
  return m.direction == Direction::XY ? p.y - (m.alpha * p.x + m.beta)
                                      : p.x - (m.alpha * p.y + m.beta);
}

}  // namespace metacausal
