#include "metacausal/mixture_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metacausal/errors.hpp"
#include "metacausal/stats.hpp"

namespace metacausal::em {
namespace {

struct DirectedFit {
  MechanismParams params;
  double ad_statistic;
};

std::optional<DirectedFit> fit_direction(std::span<const double> cause,
                                         std::span<const double> effect,
                                         std::span<const double> weights,
                                         Direction direction) {
  stats::LineFit line;
  try {
    line = stats::l1_fit(cause, effect, weights);
  } catch (const DegenerateFit&) {
    return std::nullopt;
  }
  std::vector<double> r(cause.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = effect[i] - (line.alpha * cause[i] + line.beta);
  const double b = stats::estimate_scale(r, weights);
  const double ad = stats::weighted_ad_statistic_laplace(r, weights);
  return DirectedFit{{line.alpha, line.beta, b, direction}, ad};
}

}  // namespace

std::vector<double> Matrix::column(std::size_t k) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = data_[i * cols_ + k];
  return c;
}

std::optional<std::vector<MechanismParams>> init_from_pairs(
    std::span<const Point> points) {
  if (points.empty() || points.size() % 2 != 0) return std::nullopt;
  std::vector<MechanismParams> mechs;
  for (std::size_t p = 0; p + 1 < points.size(); p += 2) {
    const Point a = points[p];
    const Point b = points[p + 1];
    if (a.x == b.x) return std::nullopt;
    const double alpha = (b.y - a.y) / (b.x - a.x);
    mechs.push_back({alpha, a.y - alpha * a.x, 1.0, Direction::XY});
  }
  return mechs;
}

Matrix log_densities(std::span<const Point> data,
                     std::span<const MechanismParams> mechs) {
  Matrix ld(data.size(), mechs.size());
  for (std::size_t k = 0; k < mechs.size(); ++k) {
    const double b = mechs[k].b;
    const double norm = -std::log(2.0 * b);
    for (std::size_t i = 0; i < data.size(); ++i)
      ld(i, k) = norm - std::fabs(residual(mechs[k], data[i])) / b;
  }
  return ld;
}

Matrix responsibilities(std::span<const Point> data,
                        std::span<const MechanismParams> mechs) {
  if (mechs.empty()) throw ArgumentError("responsibilities: no mechanisms");
  Matrix c = log_densities(data, mechs);
  const std::size_t k = mechs.size();
  const double uniform = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < data.size(); ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) top = std::max(top, c(i, j));
    if (!std::isfinite(top)) {
      for (std::size_t j = 0; j < k; ++j) c(i, j) = uniform;
      continue;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      c(i, j) = std::exp(c(i, j) - top);
      sum += c(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) c(i, j) /= sum;
  }
  return c;
}

double mixture_log_likelihood(std::span<const Point> data,
                              std::span<const MechanismParams> mechs) {
  if (mechs.empty()) throw ArgumentError("mixture_log_likelihood: no mechanisms");
  const Matrix ld = log_densities(data, mechs);
  const double log_k = std::log(static_cast<double>(mechs.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = ld.row(i);
    const double top = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - top);
    total += top + std::log(s) - log_k;
  }
  return total;
}

MixtureState make_state(std::span<const Point> data,
                        std::vector<MechanismParams> mechs) {
  MixtureState s;
  s.responsibilities = responsibilities(data, mechs);
  s.log_likelihood = mixture_log_likelihood(data, mechs);
  s.mechanisms = std::move(mechs);
  return s;
}

MixtureState em_step(std::span<const Point> data, const MixtureState& state) {
  const std::size_t k = state.mechanisms.size();
  if (k == 0) throw ArgumentError("em_step: empty mixture");
  if (state.responsibilities.rows() != data.size() || state.responsibilities.cols() != k)
    throw ArgumentError("em_step: responsibilities do not match data");

  std::vector<double> xs(data.size()), ys(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    xs[i] = data[i].x;
    ys[i] = data[i].y;
  }
  std::vector<MechanismParams> next = state.mechanisms;
  for (std::size_t j = 0; j < k; ++j) {
    const std::vector<double> w = state.responsibilities.column(j);
    if (std::accumulate(w.begin(), w.end(), 0.0) < kMinEffectivePoints) continue;
    const auto xy = fit_direction(xs, ys, w, Direction::XY);
    const auto yx = fit_direction(ys, xs, w, Direction::YX);
    if (xy && (!yx || xy->ad_statistic <= yx->ad_statistic))
      next[j] = xy->params;
    else if (yx)
      next[j] = yx->params;
  }
  return make_state(data, std::move(next));
}

MixtureState run_em(std::span<const Point> data, MixtureState init,
                    const EMConfig& config) {
  if (config.steps < 1) throw ArgumentError("run_em: steps must be >= 1");
  MixtureState s = std::move(init);
  for (int step = 0; step < config.steps; ++step) s = em_step(data, s);
  return s;
}

MechanismParams reoriented(const MechanismParams& m) {
  if (m.alpha == 0.0) throw DegenerateFit("reoriented: zero slope");
  return {1.0 / m.alpha, -m.beta / m.alpha, m.b / std::fabs(m.alpha),
          m.direction == Direction::XY ? Direction::YX : Direction::XY};
}

std::optional<Matching> match_mechanisms(std::span<const MechanismParams> est,
                                         std::span<const MechanismParams> truth,
                                         double tol, DirectionPolicy policy) {
  if (est.size() != truth.size() || est.empty()) return std::nullopt;
  std::vector<int> perm(truth.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::optional<Matching> best;
  do {
    bool directions_match = true;
    bool within = true;
    double cost = 0.0, slope_err = 0.0, intercept_err = 0.0;
    for (std::size_t e = 0; e < est.size(); ++e) {
      const auto& t = truth[static_cast<std::size_t>(perm[e])];
      MechanismParams m = est[e];
      if (m.direction != t.direction) {
        if (policy == DirectionPolicy::Strict || m.alpha == 0.0) {
          directions_match = false;
          break;
        }
        m = reoriented(m);
      }
      const double da = std::fabs(m.alpha - t.alpha);
      const double db = std::fabs(m.beta - t.beta);
      within = within && da <= tol && db <= tol;
      cost += std::max(da, db);
      slope_err += da;
      intercept_err += db;
    }
    if (!directions_match) continue;
    const bool better = !best || (within && !best->within_tolerance) ||
                        (within == best->within_tolerance && cost < best->cost);
    if (better) {
      const double n = static_cast<double>(est.size());
      best = Matching{perm, cost, slope_err / n, intercept_err / n, within};
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool check_convergence(std::span<const MechanismParams> est,
                       std::span<const MechanismParams> truth, double tol,
                       DirectionPolicy policy) {
  const auto m = match_mechanisms(est, truth, tol, policy);
  return m && m->within_tolerance;
}

}  // namespace metacausal::em
