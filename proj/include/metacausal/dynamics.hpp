#pragma once
// Worked systems: a two-agent game of tag, a stress/fatigue feedback loop, a
// follower whose policy creates or removes an edge, and a door behind two
// locks.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metacausal/mcm_core.hpp"
#include "metacausal/rng.hpp"

namespace metacausal::dynamics {

// ---------------------------------------------------------------- tag -----

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

enum class Agent { A, B };

struct TagParams {
  double arena = 100.0;        // side of the square torus
  double chaser_speed = 1.2;
  double evader_speed = 1.0;
  double jitter = 0.3;         // max perpendicular deviation of the evader
  double tag_radius = 1.0;
  int cooldown_steps = 10;     // steps after a tag before the next one counts
  double cooldown_speed = 0.5; // chaser speed while cooling down
};

// Velocities hold the displacement of the last step. The agent indices are
// A = 0 and B = 1, so entry (1, 0) types A's behavior towards B.
struct TagState {
  Vec2 a_pos, b_pos;
  Vec2 a_vel, b_vel;
  Agent chaser = Agent::A;
  int cooldown = 0;
};

inline const TypeLabel kChasing{"chasing"};
inline const TypeLabel kEscaping{"escaping"};

// Shortest displacement from `from` to `to` on the torus.
Vec2 torus_delta(Vec2 from, Vec2 to, double arena);
double tag_distance(const TagState& s, double arena = 100.0);

// Random start with the agents at most max_separation apart, so the pursuit
// never reaches antipodal separations where "away" becomes ambiguous.
TagState tag_initial(Rng& rng, const TagParams& p = {}, double max_separation = 20.0);

// A tag (distance below the radius, no cooldown) swaps the roles before the
// move. The chaser then heads straight for the evader, stopping short of it;
// the evader flees along the separation with a bounded sideways jitter.
TagState tag_step(const TagState& state, Rng& rng, const TagParams& p = {});

// Entry (1,0): "chasing" when A's displacement points towards B's new
// position, "escaping" otherwise, NoEdge when A did not move. Entry (0,1)
// likewise for B.
MetaCausalState tag_identify(const TagState& prev, const TagState& curr,
                             double arena = 100.0);

// The state tag_identify produces while `chaser` is pursuing.
MetaCausalState tag_state_for(Agent chaser);

// Positions, plus the last displacement when the observer measured it.
struct TagObservation {
  Vec2 a_pos, b_pos;
  std::optional<Vec2> a_vel, b_vel;
};

TagObservation observe_tag(const TagState& s, bool with_velocity = true);

using TagModel = MetaCausalModel<TagState, TagObservation>;

// Machine states: the two chasing configurations and the all-NoEdge rest
// state. A trace without velocities needs two observations.
TagModel make_tag_model(const TagParams& p = {});

// ------------------------------------------------------------- stress -----

struct StressState {
  double s = 0.0;           // resulting stress
  double ext = 0.0;         // external stressor
  double d_internal = 0.0;  // decayed stress of the last step
};

double clip01(double v);
// 0.95 clip(s + 0.5 ext)
double stress_decay(double s, double ext);
// 1.01 (sigmoid(15x - 7.5) - 0.5) + 0.5, without clipping.
double stress_sigmoid_raw(double x);
// stress_sigmoid_raw clipped to [0, 1].
double stress_sigmoid(double x);
// Analytic second derivative of stress_sigmoid_raw.
double stress_sigmoid_curvature(double x);

// One update; ext is an input and carries over unchanged.
StressState stress_step(const StressState& state);

inline const TypeLabel kReinforcing{"+1"};
inline const TypeLabel kSuppressing{"-1"};
inline const TypeLabel kNeutral{"0"};
inline const TypeLabel kConstantEdge{"1"};

// sign(s - 0.5) as "+1", "-1" or "0".
TypeLabel stress_identify(double s);

// Variables: 0 = external stressor, 1 = stress. Returns
// [[1, sign(s - 0.5)], [NoEdge, NoEdge]] regardless of t.
MetaCausalState stress_transition(const MetaCausalState& t, const StressState& s);
MetaCausalState stress_state_for(const TypeLabel& a);

using StressModel = MetaCausalModel<StressState, StressState>;
StressModel make_stress_model();

// ----------------------------------------------------------- follower -----

enum class Policy { Following, StandingStill };

struct FollowerState {
  double a_pos = 0.0;
  double b_pos = 0.0;
  Policy policy = Policy::Following;
};

struct FollowerParams {
  double offset = 1.0;       // A trails B by this much when following
  double b_step = 1.0;       // B's random-walk step is U(-b_step, b_step)
  double noise = 0.1;        // A's position jitter is U(-noise, noise)
  double rest_position = 0.0;
  double edge_threshold = 0.5;
};

// Variables: 0 = A_X, 1 = B_X, 2 = A_pi (A's policy).
inline constexpr std::size_t kFollowerA = 0;
inline constexpr std::size_t kFollowerB = 1;
inline constexpr std::size_t kFollowerPolicy = 2;
inline const TypeLabel kFollows{"follows"};

FollowerState follower_step(const FollowerState& state, Rng& rng,
                            const FollowerParams& p = {});
std::vector<FollowerState> follower_trace(FollowerState start, std::size_t steps,
                                          Rng& rng, const FollowerParams& p = {});

// |corr(dA, dB)|, 0 when either displacement series is constant.
double follower_dependence(std::span<const FollowerState> trace);

struct FollowerAttribution {
  MetaCausalState state{3};
  bool edge_present = false;
  double dependence = 0.0;
  std::string meta_root_cause;                    // always "A_pi"
  std::optional<std::string> classical_root_cause; // "B_X" while following
};

// Edge B_X -> A_X from the trace's displacement dependence, plus the fixed
// A_pi -> A_X policy edge. `policy` is recorded in the attribution only.
FollowerAttribution follower_identify(Policy policy,
                                      std::span<const FollowerState> trace,
                                      const FollowerParams& p = {});

// -------------------------------------------------------------- locks -----

enum class Lock { Locked, Open };
enum class Door { Closed, Openable };

struct LocksState {
  Lock lock1 = Lock::Locked;
  Lock lock2 = Lock::Locked;
  Door door = Door::Closed;
};

LocksState make_locks(Lock lock1, Lock lock2);

inline const TypeLabel kBlocking{"blocking"};
inline const TypeLabel kControlling{"controlling"};

// Variables: 0 = lock1, 1 = lock2, 2 = door. A locked lock's edge to the door
// is "blocking" while the other lock is also locked and "controlling" once it
// is the only constraint left; open locks have no edge.
MetaCausalState locks_state(const LocksState& s);

// Opens lock `which` (1 or 2).
LocksState open_lock(const LocksState& s, int which);

struct LocksAttribution {
  int classical_delta = 0;
  bool meta_changed = false;
};

LocksAttribution locks_attribution(const LocksState& before, int which);

}  // namespace metacausal::dynamics
