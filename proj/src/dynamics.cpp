#include "metacausal/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "metacausal/errors.hpp"

namespace metacausal::dynamics {
namespace {

constexpr double kMinMove = 1e-12;

double wrap(double v, double arena) {
  double w = std::fmod(v, arena);
  if (w < 0.0) w += arena;
  return w >= arena ? 0.0 : w;
}

Vec2 wrap(Vec2 v, double arena) { return {wrap(v.x, arena), wrap(v.y, arena)}; }

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

TypeLabel pursuit_type(Vec2 displacement, Vec2 towards_other) {
  if (norm(displacement) < kMinMove) return TypeLabel::no_edge();
  return dot(displacement, towards_other) > 0.0 ? kChasing : kEscaping;
}

const TypeLabel kGoverns{"governs"};

}  // namespace

// ---------------------------------------------------------------- tag -----

Vec2 torus_delta(Vec2 from, Vec2 to, double arena) {
  auto d = [arena](double a, double b) {
    double v = b - a;
    v -= arena * std::round(v / arena);
    return v;
  };
  return {d(from.x, to.x), d(from.y, to.y)};
}

double tag_distance(const TagState& s, double arena) {
  return norm(torus_delta(s.a_pos, s.b_pos, arena));
}

TagState tag_initial(Rng& rng, const TagParams& p, double max_separation) {
  if (!(max_separation > p.tag_radius) || max_separation >= p.arena / 4.0)
    throw ArgumentError("tag_initial: separation must lie in (tag_radius, arena/4)");
  TagState s;
  s.a_pos = {rng.uniform(0.0, p.arena), rng.uniform(0.0, p.arena)};
  const double r = rng.uniform(p.tag_radius, max_separation);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  s.b_pos = wrap(Vec2{s.a_pos.x + r * std::cos(phi), s.a_pos.y + r * std::sin(phi)},
                 p.arena);
  s.chaser = rng.coin() ? Agent::A : Agent::B;
  return s;
}

TagState tag_step(const TagState& state, Rng& rng, const TagParams& p) {
  TagState next = state;
  if (next.cooldown > 0) --next.cooldown;
  if (state.cooldown == 0 && tag_distance(state, p.arena) < p.tag_radius) {
    next.chaser = state.chaser == Agent::A ? Agent::B : Agent::A;
    next.cooldown = p.cooldown_steps;
  }
  const bool a_chases = next.chaser == Agent::A;
  const Vec2 chaser = a_chases ? state.a_pos : state.b_pos;
  const Vec2 evader = a_chases ? state.b_pos : state.a_pos;
  Vec2 sep = torus_delta(chaser, evader, p.arena);
  double dist = norm(sep);
  Vec2 u;
  if (dist < kMinMove) {
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    u = {std::cos(phi), std::sin(phi)};
    dist = 0.0;
  } else {
    u = {sep.x / dist, sep.y / dist};
  }
  const double j = rng.uniform(-p.jitter, p.jitter);
  Vec2 dir{u.x - j * u.y, u.y + j * u.x};
  const double dn = norm(dir);
  const Vec2 e_move{dir.x / dn * p.evader_speed, dir.y / dn * p.evader_speed};

  // Stop short of the evader's new position along the pursuit line, so the
  // chaser still faces it and the evader still faces away after the move.
  const double speed = next.cooldown > 0 ? p.cooldown_speed : p.chaser_speed;
  const double c_len = std::min(speed, dist + 0.5 * dot(e_move, u));
  const Vec2 c_move{u.x * c_len, u.y * c_len};

  const Vec2 a_move = a_chases ? c_move : e_move;
  const Vec2 b_move = a_chases ? e_move : c_move;
  next.a_pos = wrap(Vec2{state.a_pos.x + a_move.x, state.a_pos.y + a_move.y}, p.arena);
  next.b_pos = wrap(Vec2{state.b_pos.x + b_move.x, state.b_pos.y + b_move.y}, p.arena);
  next.a_vel = a_move;
  next.b_vel = b_move;
  return next;
}

MetaCausalState tag_identify(const TagState& prev, const TagState& curr,
                             double arena) {
  MetaCausalState t(2);
  t.set(1, 0, pursuit_type(torus_delta(prev.a_pos, curr.a_pos, arena),
                           torus_delta(curr.a_pos, curr.b_pos, arena)));
  t.set(0, 1, pursuit_type(torus_delta(prev.b_pos, curr.b_pos, arena),
                           torus_delta(curr.b_pos, curr.a_pos, arena)));
  return t;
}

MetaCausalState tag_state_for(Agent chaser) {
  MetaCausalState t(2);
  t.set(1, 0, chaser == Agent::A ? kChasing : kEscaping);
  t.set(0, 1, chaser == Agent::B ? kChasing : kEscaping);
  return t;
}

TagObservation observe_tag(const TagState& s, bool with_velocity) {
  TagObservation o{s.a_pos, s.b_pos, std::nullopt, std::nullopt};
  if (with_velocity) {
    o.a_vel = s.a_vel;
    o.b_vel = s.b_vel;
  }
  return o;
}

TagModel make_tag_model(const TagParams& p) {
  const double arena = p.arena;
  TagModel::Spec spec;
  spec.n = 2;
  spec.type_domain = TypeDomain({kChasing, kEscaping});
  spec.process.transition = [p](const TagState& s, Rng& rng) { return tag_step(s, rng, p); };
  spec.process.valid = [arena](const TagState& s) {
    auto in = [arena](Vec2 v) { return v.x >= 0 && v.x < arena && v.y >= 0 && v.y < arena; };
    return in(s.a_pos) && in(s.b_pos);
  };
  spec.abstraction = [](const TagState& s) { return observe_tag(s, true); };
  spec.id_fn = IdentificationFunction<TagObservation>(2);
  spec.id_fn.set_encoder(1, 0, [arena](const TagObservation& o) {
    const Vec2 v = o.a_vel.value_or(Vec2{});
    return pursuit_type(v, torus_delta(o.a_pos, o.b_pos, arena));
  });
  spec.id_fn.set_encoder(0, 1, [arena](const TagObservation& o) {
    const Vec2 v = o.b_vel.value_or(Vec2{});
    return pursuit_type(v, torus_delta(o.b_pos, o.a_pos, arena));
  });
  spec.machine_states = {tag_state_for(Agent::A), tag_state_for(Agent::B),
                         MetaCausalState(2)};
  spec.consistent = [arena](const MetaCausalState& t,
                            std::span<const TagObservation> obs) {
    const TagObservation& last = obs.back();
    TagState prev, curr;
    curr.a_pos = last.a_pos;
    curr.b_pos = last.b_pos;
    if (last.a_vel && last.b_vel) {
      prev.a_pos = {last.a_pos.x - last.a_vel->x, last.a_pos.y - last.a_vel->y};
      prev.b_pos = {last.b_pos.x - last.b_vel->x, last.b_pos.y - last.b_vel->y};
    } else if (obs.size() >= 2) {
      prev.a_pos = obs[obs.size() - 2].a_pos;
      prev.b_pos = obs[obs.size() - 2].b_pos;
    } else {
      return true;  // one snapshot of positions says nothing about motion
    }
    return tag_identify(prev, curr, arena) == t;
  };
  return TagModel(std::move(spec));
}

// ------------------------------------------------------------- stress -----

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

double stress_decay(double s, double ext) { return 0.95 * clip01(s + 0.5 * ext); }

double stress_sigmoid_raw(double x) {
  return 1.01 * (1.0 / (1.0 + std::exp(-15.0 * x + 7.5)) - 0.5) + 0.5;
}

double stress_sigmoid(double x) { return clip01(stress_sigmoid_raw(x)); }

double stress_sigmoid_curvature(double x) {
  const double g = 1.0 / (1.0 + std::exp(-15.0 * x + 7.5));
  return 1.01 * 225.0 * g * (1.0 - g) * (1.0 - 2.0 * g);
}

StressState stress_step(const StressState& state) {
  StressState next = state;
  next.d_internal = stress_decay(state.s, state.ext);
  next.s = stress_sigmoid(next.d_internal);
  return next;
}

TypeLabel stress_identify(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("stress level outside [0, 1]");
  if (s > 0.5) return kReinforcing;
  if (s < 0.5) return kSuppressing;
  return kNeutral;
}

MetaCausalState stress_state_for(const TypeLabel& a) {
  MetaCausalState t(2);
  t.set(0, 0, kConstantEdge);
  t.set(0, 1, a);
  return t;
}

MetaCausalState stress_transition(const MetaCausalState& t, const StressState& s) {
  if (t.size() != 2) throw DomainError("stress model has two variables");
  return stress_state_for(stress_identify(s.s));
}

StressModel make_stress_model() {
  StressModel::Spec spec;
  spec.n = 2;
  spec.type_domain = TypeDomain({kConstantEdge, kReinforcing, kSuppressing, kNeutral});
  spec.process.transition = [](const StressState& s, Rng&) { return stress_step(s); };
  spec.process.valid = [](const StressState& s) {
    auto in = [](double v) { return v >= 0.0 && v <= 1.0; };
    return in(s.s) && in(s.ext) && in(s.d_internal);
  };
  spec.abstraction = [](const StressState& s) { return s; };
  spec.id_fn = IdentificationFunction<StressState>(2);
  spec.id_fn.set_encoder(0, 0, [](const StressState&) { return kConstantEdge; });
  spec.id_fn.set_encoder(0, 1, [](const StressState& s) { return stress_identify(s.s); });
  spec.machine_states = {stress_state_for(kReinforcing), stress_state_for(kSuppressing),
                         stress_state_for(kNeutral)};
  return StressModel(std::move(spec));
}

// ----------------------------------------------------------- follower -----

FollowerState follower_step(const FollowerState& state, Rng& rng,
                            const FollowerParams& p) {
  FollowerState next = state;
  next.b_pos = state.b_pos + rng.uniform(-p.b_step, p.b_step);
  const double jitter = rng.uniform(-p.noise, p.noise);
  next.a_pos = state.policy == Policy::Following ? next.b_pos - p.offset + jitter
                                                 : p.rest_position + jitter;
  return next;
}

std::vector<FollowerState> follower_trace(FollowerState start, std::size_t steps,
                                          Rng& rng, const FollowerParams& p) {
  std::vector<FollowerState> trace{start};
  trace.reserve(steps + 1);
  for (std::size_t i = 0; i < steps; ++i) trace.push_back(follower_step(trace.back(), rng, p));
  return trace;
}

double follower_dependence(std::span<const FollowerState> trace) {
  if (trace.size() < 3) throw InsufficientData("follower trace needs >= 3 states");
  const std::size_t m = trace.size() - 1;
  std::vector<double> da(m), db(m);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    da[i] = trace[i + 1].a_pos - trace[i].a_pos;
    db[i] = trace[i + 1].b_pos - trace[i].b_pos;
    ma += da[i];
    mb += db[i];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sab += (da[i] - ma) * (db[i] - mb);
    saa += (da[i] - ma) * (da[i] - ma);
    sbb += (db[i] - mb) * (db[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::fabs(sab / std::sqrt(saa * sbb));
}

FollowerAttribution follower_identify(Policy policy,
                                      std::span<const FollowerState> trace,
                                      const FollowerParams& p) {
  (void)policy;
  FollowerAttribution a;
  a.dependence = follower_dependence(trace);
  a.edge_present = a.dependence > p.edge_threshold;
  a.state.set(kFollowerPolicy, kFollowerA, kGoverns);
  if (a.edge_present) {
    a.state.set(kFollowerB, kFollowerA, kFollows);
    a.classical_root_cause = "B_X";
  }
  a.meta_root_cause = "A_pi";
  return a;
}

// -------------------------------------------------------------- locks -----

LocksState make_locks(Lock lock1, Lock lock2) {
  const bool open = lock1 == Lock::Open && lock2 == Lock::Open;
  return {lock1, lock2, open ? Door::Openable : Door::Closed};
}

MetaCausalState locks_state(const LocksState& s) {
  if ((s.door == Door::Openable) != (s.lock1 == Lock::Open && s.lock2 == Lock::Open))
    throw DomainError("door openability disagrees with the locks");
  MetaCausalState t(3);
  auto edge = [](Lock self, Lock other) {
    if (self == Lock::Open) return TypeLabel::no_edge();
    return other == Lock::Locked ? kBlocking : kControlling;
  };
  t.set(0, 2, edge(s.lock1, s.lock2));
  t.set(1, 2, edge(s.lock2, s.lock1));
  return t;
}

LocksState open_lock(const LocksState& s, int which) {
  if (which != 1 && which != 2) throw ArgumentError("lock index must be 1 or 2");
  const Lock target = which == 1 ? s.lock1 : s.lock2;
  if (target == Lock::Open) throw ArgumentError("lock is already open");
  return which == 1 ? make_locks(Lock::Open, s.lock2) : make_locks(s.lock1, Lock::Open);
}

LocksAttribution locks_attribution(const LocksState& before, int which) {
  const LocksState after = open_lock(before, which);
  LocksAttribution a;
  a.classical_delta = (after.door == Door::Openable ? 1 : 0) -
                      (before.door == Door::Openable ? 1 : 0);
  a.meta_changed = locks_state(before) != locks_state(after);
  return a;
}

}  // namespace metacausal::dynamics
