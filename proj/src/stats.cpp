#include "metacausal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace metacausal::stats {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ArgumentError(std::string(what) + ": length mismatch");
}

// ln F(z) and ln(1 - F(z)) for the standard Laplace CDF, without cancellation.
std::pair<double, double> log_cdf_pair(double z) {
  if (z <= 0.0) {
    const double lf = -kLn2 + z;
    return {lf, std::log1p(-0.5 * std::exp(z))};
  }
  const double ls = -kLn2 - z;
  return {std::log1p(-0.5 * std::exp(-z)), ls};
}

struct WeightedPoint {
  double x;
  double y;
  double w;
};

// Minimizes sum w_i |y_i - y_p - a (x_i - x_p)| over a: the lower weighted
// median of the pivot slopes, weighted by w_i |x_i - x_p|. Returns the slope
// and the index of the point it interpolates (npos when nothing has spread).
struct PivotStep {
  double slope;
  std::size_t partner;
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Candidate {
  double slope;
  double w;
  std::size_t index;
};

// Lower weighted median of the candidates by quickselect; among equal slopes
// the smallest index is reported.
PivotStep weighted_select(std::vector<Candidate>& c, double half) {
  std::size_t lo = 0, hi = c.size();
  double acc = 0.0;
  while (hi - lo > 1) {
    const double a = c[lo].slope, b = c[lo + (hi - lo) / 2].slope, d = c[hi - 1].slope;
    const double pivot = std::max(std::min(a, b), std::min(std::max(a, b), d));
    const auto first = c.begin() + static_cast<std::ptrdiff_t>(lo);
    const auto last = c.begin() + static_cast<std::ptrdiff_t>(hi);
    const auto mid1 = std::partition(first, last, [&](const Candidate& x) { return x.slope < pivot; });
    const auto mid2 = std::partition(mid1, last, [&](const Candidate& x) { return x.slope == pivot; });
    double wl = 0.0, we = 0.0;
    for (auto it = first; it != mid1; ++it) wl += it->w;
    std::size_t tie = kNone;
    for (auto it = mid1; it != mid2; ++it) {
      we += it->w;
      tie = std::min(tie, it->index);
    }
    if (acc + wl >= half && mid1 != first) {
      hi = static_cast<std::size_t>(mid1 - c.begin());
    } else if (acc + wl + we >= half || mid2 == last) {
      return {pivot, tie};
    } else {
      acc += wl + we;
      lo = static_cast<std::size_t>(mid2 - c.begin());
    }
  }
  return {c[lo].slope, c[lo].index};
}

PivotStep best_slope_through(const std::vector<WeightedPoint>& pts,
                             std::size_t pivot, std::vector<Candidate>& cands) {
  cands.clear();
  const WeightedPoint& p = pts[pivot];
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = pts[i].x - p.x;
    if (i == pivot || dx == 0.0) continue;
    const double w = pts[i].w * std::fabs(dx);
    cands.push_back({(pts[i].y - p.y) / dx, w, i});
    total += w;
  }
  if (cands.empty()) return {0.0, kNone};
  return weighted_select(cands, 0.5 * total);
}

double objective(const std::vector<WeightedPoint>& pts, double a, double c) {
  double s = 0.0;
  for (const auto& p : pts) s += p.w * std::fabs(p.y - a * p.x - c);
  return s;
}

// Iteratively reweighted least squares with eps-smoothed weights; a warm
// start for the exact pivoting below.
LineFit irls_start(const std::vector<WeightedPoint>& pts) {
  constexpr double kEps = 1e-9;
  constexpr int kMaxIter = 20;
  std::vector<double> v(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) v[i] = pts[i].w;
  LineFit line;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxIter; ++it) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sw += v[i];
      sx += v[i] * pts[i].x;
      sy += v[i] * pts[i].y;
      sxx += v[i] * pts[i].x * pts[i].x;
      sxy += v[i] * pts[i].x * pts[i].y;
    }
    const double mx = sx / sw, my = sy / sw;
    const double var = sxx / sw - mx * mx;
    if (!(var > 0.0) || !std::isfinite(var)) break;
    line.alpha = (sxy / sw - mx * my) / var;
    line.beta = my - line.alpha * mx;
    const double obj = objective(pts, line.alpha, line.beta);
    if (prev - obj <= 1e-4 * obj) break;
    prev = obj;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double r = std::fabs(pts[i].y - line.alpha * pts[i].x - line.beta);
      v[i] = pts[i].w / std::max(r, kEps);
    }
  }
  return line;
}

LineFit exhaustive_pairs(const std::vector<WeightedPoint>& pts) {
  LineFit best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].x == pts[j].x) continue;
      const double a = (pts[j].y - pts[i].y) / (pts[j].x - pts[i].x);
      const double c = pts[i].y - a * pts[i].x;
      const double o = objective(pts, a, c);
      if (o < best_obj || (o == best_obj && (a < best.alpha ||
                                             (a == best.alpha && c < best.beta)))) {
        best_obj = o;
        best = {a, c};
      }
    }
  return best;
}

}  // namespace

double laplace_logpdf(double x, LaplaceParams p) {
  if (!std::isfinite(x)) throw ArgumentError("laplace_logpdf: non-finite x");
  if (!(p.b > 0.0)) throw ArgumentError("laplace_logpdf: scale must be > 0");
  return -std::log(2.0 * p.b) - std::fabs(x - p.mu) / p.b;
}

double laplace_cdf(double x, LaplaceParams p) {
  if (!(p.b > 0.0)) throw ArgumentError("laplace_cdf: scale must be > 0");
  const double z = (x - p.mu) / p.b;
  return z <= 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

double l1_objective(std::span<const double> xs, std::span<const double> ys,
                    std::span<const double> weights, LineFit line) {
  check_lengths(xs.size(), ys.size(), "l1_objective");
  check_lengths(xs.size(), weights.size(), "l1_objective");
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += weights[i] * std::fabs(ys[i] - line.alpha * xs[i] - line.beta);
  return s;
}

LineFit l1_fit(std::span<const double> xs, std::span<const double> ys,
               std::span<const double> weights) {
  check_lengths(xs.size(), ys.size(), "l1_fit");
  check_lengths(xs.size(), weights.size(), "l1_fit");
  std::vector<WeightedPoint> pts;
  pts.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i]))
      throw ArgumentError("l1_fit: weights must be finite and non-negative");
    if (weights[i] > 0.0) pts.push_back({xs[i], ys[i], weights[i]});
  }
  if (pts.size() < 2) throw DegenerateFit("l1_fit: fewer than two weighted points");
  const double x0 = pts.front().x;
  if (std::all_of(pts.begin(), pts.end(), [&](const auto& p) { return p.x == x0; }))
    throw DegenerateFit("l1_fit: all weighted x values are equal");

  const LineFit start = irls_start(pts);
  std::size_t pivot = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double r = std::fabs(pts[i].y - start.alpha * pts[i].x - start.beta);
    if (r < best_r) {
      best_r = r;
      pivot = i;
    }
  }

  // Each pivot step minimizes over lines through the current pivot, so the
  // objective never increases; a fixed point is optimal along both edges of
  // the vertex and hence globally optimal by convexity.
  std::vector<Candidate> cands;
  PivotStep stepped = best_slope_through(pts, pivot, cands);
  double alpha = stepped.slope;
  double obj = objective(pts, alpha, pts[pivot].y - alpha * pts[pivot].x);
  constexpr int kMaxPivots = 200;
  bool converged = false;
  for (int it = 0; it < kMaxPivots && stepped.partner != kNone; ++it) {
    const std::size_t next_pivot = stepped.partner;
    const PivotStep cand = best_slope_through(pts, next_pivot, cands);
    const double cand_obj =
        objective(pts, cand.slope, pts[next_pivot].y - cand.slope * pts[next_pivot].x);
    if (!(cand_obj < obj * (1.0 - 1e-14))) {
      converged = true;
      break;
    }
    pivot = next_pivot;
    stepped = cand;
    alpha = cand.slope;
    obj = cand_obj;
  }
  if (!converged && pts.size() <= 200) {
    const LineFit ex = exhaustive_pairs(pts);
    if (objective(pts, ex.alpha, ex.beta) < obj) alpha = ex.alpha;
  }

  std::vector<double> offsets(pts.size()), w(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    offsets[i] = pts[i].y - alpha * pts[i].x;
    w[i] = pts[i].w;
  }
  return {alpha, weighted_median(offsets, w)};
}

double weighted_median(std::span<const double> values,
                       std::span<const double> weights) {
  check_lengths(values.size(), weights.size(), "weighted_median");
  std::vector<Candidate> c;
  c.reserve(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (weights[i] > 0.0) {
      c.push_back({values[i], weights[i], i});
      total += weights[i];
    }
  if (c.empty()) throw ArgumentError("weighted_median: no positive weight");
  return weighted_select(c, 0.5 * total).slope;
}

double estimate_scale(std::span<const double> residuals,
                      std::span<const double> weights) {
  check_lengths(residuals.size(), weights.size(), "estimate_scale");
  double sw = 0.0, s = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (weights[i] < 0.0) throw ArgumentError("estimate_scale: negative weight");
    sw += weights[i];
    s += weights[i] * std::fabs(residuals[i]);
  }
  if (!(sw > 0.0)) throw ArgumentError("estimate_scale: total weight must be > 0");
  return std::max(kScaleFloor, s / sw);
}

CriticalValueTable::CriticalValueTable(std::vector<Entry> entries,
                                       Provenance provenance)
    : entries_(std::move(entries)), provenance_(std::move(provenance)) {
  if (entries_.empty()) throw ArgumentError("critical value table is empty");
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.n < b.n; });
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].n == entries_[i - 1].n)
      throw ArgumentError("critical value table has duplicate n");
}

CriticalValueTable CriticalValueTable::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("critical value table: ") + e.what());
  }
  Provenance prov;
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    prov.version = p.value("version", std::string{});
    prov.seed = p.value("seed", std::uint64_t{0});
    prov.simulations = p.value("simulations", std::size_t{0});
    prov.level = p.value("level", 0.05);
  }
  std::vector<Entry> entries;
  for (const auto& [key, value] : j.at("critical_values").items())
    entries.push_back({static_cast<std::size_t>(std::stoul(key)), value.get<double>()});
  return CriticalValueTable(std::move(entries), std::move(prov));
}

CriticalValueTable CriticalValueTable::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open critical value table: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string CriticalValueTable::to_json() const {
  nlohmann::ordered_json j;
  j["provenance"] = {{"version", provenance_.version},
                     {"seed", provenance_.seed},
                     {"simulations", provenance_.simulations},
                     {"level", provenance_.level},
                     {"method", "Monte-Carlo 95th percentile of A^2, Laplace sample "
                                "with median location and MLE scale re-estimated per draw"}};
  nlohmann::ordered_json cv;
  for (const auto& e : entries_) cv[std::to_string(e.n)] = e.critical;
  j["critical_values"] = cv;
  return j.dump(2);
}

double CriticalValueTable::critical_value(std::size_t n) const {
  if (n <= entries_.front().n) return entries_.front().critical;
  if (n >= entries_.back().n) return entries_.back().critical;
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (n <= entries_[i].n) {
      const auto& lo = entries_[i - 1];
      const auto& hi = entries_[i];
      const double t = static_cast<double>(n - lo.n) / static_cast<double>(hi.n - lo.n);
      return lo.critical + t * (hi.critical - lo.critical);
    }
  }
  return entries_.back().critical;
}

double ad_statistic_laplace(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n == 0) throw InsufficientData("ad_statistic_laplace: empty sample");
  std::vector<double> z(residuals.begin(), residuals.end());
  std::sort(z.begin(), z.end());
  const double mu = (n % 2 == 1) ? z[n / 2] : 0.5 * (z[n / 2 - 1] + z[n / 2]);
  double sum_abs = 0.0;
  for (double v : z) sum_abs += std::fabs(v - mu);
  const double b = std::max(kScaleFloor, sum_abs / static_cast<double>(n));
  std::vector<double> log_f(n), log_sf(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lf, ls] = log_cdf_pair((z[i] - mu) / b);
    log_f[i] = lf;
    log_sf[i] = ls;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += static_cast<double>(2 * i + 1) * (log_f[i] + log_sf[n - 1 - i]);
  return -static_cast<double>(n) - s / static_cast<double>(n);
}

double weighted_ad_statistic_laplace(std::span<const double> residuals,
                                     std::span<const double> weights) {
  check_lengths(residuals.size(), weights.size(), "weighted_ad_statistic_laplace");
  std::vector<std::size_t> idx;
  idx.reserve(residuals.size());
  double total = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i)
    if (weights[i] > 0.0) {
      idx.push_back(i);
      total += weights[i];
    }
  if (idx.empty()) throw InsufficientData("weighted AD: no positive weight");
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return residuals[a] < residuals[b]; });

  // Weighted median location; the midpoint when the half-weight falls exactly
  // between two order statistics, as for the unweighted even-n median.
  double mu = residuals[idx.back()];
  {
    double acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      acc += weights[idx[k]];
      if (acc >= 0.5 * total) {
        mu = residuals[idx[k]];
        if (acc == 0.5 * total && k + 1 < idx.size())
          mu = 0.5 * (mu + residuals[idx[k + 1]]);
        break;
      }
    }
  }
  double sum_abs = 0.0;
  for (std::size_t i : idx) sum_abs += weights[i] * std::fabs(residuals[i] - mu);
  const double b = std::max(kScaleFloor, sum_abs / total);

  // Integral of (G(u) - u)^2 / (u (1 - u)) over [0, 1] for the weighted EDF G
  // on u = F(z), accumulated per step of G in log space.
  double integral = -1.0;
  double cum = 0.0;
  double prev_lf = -std::numeric_limits<double>::infinity();
  double prev_ls = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto [lf, ls] = log_cdf_pair((residuals[idx[k]] - mu) / b);
    const double c = cum / total;
    if (k == 0) {
      integral -= ls;
    } else {
      integral += c * c * (lf - prev_lf) - (1.0 - c) * (1.0 - c) * (ls - prev_ls);
    }
    cum += weights[idx[k]];
    prev_lf = lf;
    prev_ls = ls;
  }
  integral -= prev_lf;
  return total * integral;
}

ADTestResult anderson_darling_laplace(std::span<const double> residuals,
                                      const CriticalValueTable& table) {
  if (residuals.size() < kMinADSamples)
    throw InsufficientData("anderson_darling_laplace: fewer than 20 residuals");
  ADTestResult r;
  r.n = residuals.size();
  r.statistic = ad_statistic_laplace(residuals);
  r.critical_value = table.critical_value(r.n);
  const auto [lo, hi] = std::minmax_element(residuals.begin(), residuals.end());
  const bool has_spread = *hi > *lo;
  r.passed = has_spread && std::isfinite(r.statistic) && r.statistic <= r.critical_value;
  return r;
}

}  // namespace metacausal::stats
