#pragma once
// Meta-causal formalism: typed edges, meta-causal states (typed adjacency
// matrices) and the finite-state machine whose inputs are environment states.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "metacausal/errors.hpp"
#include "metacausal/rng.hpp"

namespace metacausal {

inline constexpr std::string_view kNoEdgeSymbol = "⊥";

// A symbol from a finite type domain. The default-constructed label is the
// distinguished no-edge element.
class TypeLabel {
 public:
  TypeLabel() : name_(kNoEdgeSymbol) {}
  explicit TypeLabel(std::string name) : name_(std::move(name)) {
    if (name_.empty()) throw ArgumentError("type label must be non-empty");
  }

  static TypeLabel no_edge() { return TypeLabel(); }

  const std::string& name() const { return name_; }
  bool is_no_edge() const { return name_ == kNoEdgeSymbol; }

  friend bool operator==(const TypeLabel&, const TypeLabel&) = default;
  friend auto operator<=>(const TypeLabel&, const TypeLabel&) = default;

 private:
  std::string name_;
};

// Finite, enumerable set of labels containing NoEdge exactly once.
class TypeDomain {
 public:
  // NoEdge is added when absent; duplicate labels are rejected.
  explicit TypeDomain(std::vector<TypeLabel> labels);

  bool contains(const TypeLabel& t) const {
    return std::find(labels_.begin(), labels_.end(), t) != labels_.end();
  }
  std::span<const TypeLabel> labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<TypeLabel> labels_;
};

// N x N matrix of type labels; entry (i, j) types the edge X_i -> X_j.
class MetaCausalState {
 public:
  explicit MetaCausalState(std::size_t n);
  MetaCausalState(std::size_t n, std::vector<TypeLabel> row_major);
  static MetaCausalState from_rows(
      const std::vector<std::vector<std::string>>& rows);

  std::size_t size() const { return n_; }
  const TypeLabel& at(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, TypeLabel t);

  std::span<const TypeLabel> entries() const { return entries_; }

  // Compact rendering, rows separated by ';', e.g. "1,+1;⊥,⊥".
  std::string to_string() const;

  friend bool operator==(const MetaCausalState&,
                         const MetaCausalState&) = default;
  friend auto operator<=>(const MetaCausalState&,
                          const MetaCausalState&) = default;

 private:
  std::size_t n_;
  std::vector<TypeLabel> entries_;
};

bool edge_present(const MetaCausalState& t, std::size_t i, std::size_t j);

// {"n": int, "types": [[string]]}, with "⊥" for NoEdge.
std::string to_json(const MetaCausalState& t);
MetaCausalState state_from_json(std::string_view text);

// Environment dynamics. Randomized transitions draw from the supplied stream.
template <class State>
struct MediationProcess {
  std::function<State(const State&, Rng&)> transition;
  std::function<bool(const State&)> valid = [](const State&) { return true; };
};

// Per-pair type encoders over abstracted states. Pairs without an encoder,
// including the diagonal unless a self-loop encoder is declared, are NoEdge.
template <class Observation>
class IdentificationFunction {
 public:
  using Encoder = std::function<TypeLabel(const Observation&)>;

  explicit IdentificationFunction(std::size_t n) : n_(n), encoders_(n * n) {
    if (n == 0) throw ArgumentError("identification function needs n >= 1");
  }

  void set_encoder(std::size_t i, std::size_t j, Encoder e) {
    check(i, j);
    encoders_[i * n_ + j] = std::move(e);
  }

  TypeLabel operator()(const Observation& o, std::size_t i,
                       std::size_t j) const {
    check(i, j);
    const Encoder& e = encoders_[i * n_ + j];
    return e ? e(o) : TypeLabel::no_edge();
  }

  MetaCausalState identify(const Observation& o) const {
    MetaCausalState t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t.set(i, j, (*this)(o, i, j));
    return t;
  }

  std::size_t size() const { return n_; }

 private:
  void check(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw ArgumentError("variable index out of range");
  }

  std::size_t n_;
  std::vector<Encoder> encoders_;
};

struct Ambiguous {
  std::vector<MetaCausalState> candidates;
};

using InferenceResult = std::variant<MetaCausalState, Ambiguous>;

// Finite-state machine with meta-causal states as machine states and
// environment states as the input alphabet.
template <class State, class Observation = State>
class MetaCausalModel {
 public:
  using Abstraction = std::function<Observation(const State&)>;
  // Whether a machine state could have produced an observation trace.
  using Consistency = std::function<bool(const MetaCausalState&,
                                         std::span<const Observation>)>;

  struct Spec {
    std::size_t n = 1;
    TypeDomain type_domain{std::vector<TypeLabel>{}};
    MediationProcess<State> process;
    Abstraction abstraction;
    IdentificationFunction<Observation> id_fn{1};
    // Enumerated machine states considered by infer_state.
    std::vector<MetaCausalState> machine_states;
    // Defaults to "identifying the last observation yields the state".
    Consistency consistent;
  };

  explicit MetaCausalModel(Spec spec) : spec_(std::move(spec)) {
    if (spec_.n == 0) throw ArgumentError("model needs n >= 1");
    if (spec_.id_fn.size() != spec_.n)
      throw ArgumentError("identification function size differs from n");
    if (!spec_.process.transition)
      throw ArgumentError("mediation process needs a transition");
    if (!spec_.abstraction) throw ArgumentError("model needs an abstraction");
    for (const auto& t : spec_.machine_states) check_state(t);
  }

  std::size_t size() const { return spec_.n; }
  const TypeDomain& type_domain() const { return spec_.type_domain; }
  const MediationProcess<State>& process() const { return spec_.process; }
  std::span<const MetaCausalState> machine_states() const {
    return spec_.machine_states;
  }

  Observation observe(const State& s) const { return spec_.abstraction(s); }

  MetaCausalState actual_state(const State& s) const {
    if (!spec_.process.valid(s))
      throw DomainError("environment state outside the state space");
    MetaCausalState t = spec_.id_fn.identify(spec_.abstraction(s));
    check_state(t);
    return t;
  }

  // delta(T, s): advance the environment, then identify the new state.
  std::pair<MetaCausalState, State> step(const MetaCausalState& t,
                                         const State& s, Rng& rng) const {
    check_state(t);
    if (!spec_.process.valid(s))
      throw DomainError("environment state outside the state space");
    State next = spec_.process.transition(s, rng);
    if (!spec_.process.valid(next))
      throw DomainError("transition left the state space");
    return {actual_state(next), std::move(next)};
  }

  bool consistent(const MetaCausalState& t,
                  std::span<const Observation> observations) const {
    if (spec_.consistent) return spec_.consistent(t, observations);
    return spec_.id_fn.identify(observations.back()) == t;
  }

  void check_state(const MetaCausalState& t) const {
    if (t.size() != spec_.n)
      throw DomainError("meta-causal state has wrong dimension");
    for (const auto& label : t.entries())
      if (!spec_.type_domain.contains(label))
        throw DomainError("label '" + label.name() + "' not in type domain");
  }

 private:
  Spec spec_;
};

// Unique machine state consistent with a time-ordered observation trace.
template <class State, class Observation>
InferenceResult infer_state(const MetaCausalModel<State, Observation>& model,
                            std::span<const Observation> observations) {
  if (observations.empty())
    throw ArgumentError("infer_state needs at least one observation");
  std::vector<MetaCausalState> hits;
  for (const auto& t : model.machine_states())
    if (model.consistent(t, observations)) hits.push_back(t);
  if (hits.empty())
    throw NoConsistentState("observations match no meta-causal state");
  if (hits.size() == 1) return hits.front();
  return Ambiguous{std::move(hits)};
}

// Probe-based reducibility check: true iff delta(T_s, s) = T_s for every
// probe. Sound for the probe set only, not a proof over the state space.
template <class State, class Observation>
bool is_reducible(const MetaCausalModel<State, Observation>& model,
                  std::span<const State> probes, Rng& rng) {
  if (probes.empty()) throw ArgumentError("is_reducible needs probe states");
  for (const State& s : probes) {
    const MetaCausalState t = model.actual_state(s);
    if (model.step(t, s, rng).first != t) return false;
  }
  return true;
}

// For a reducible model, the table Z -> meta-causal state (Z indexes the
// distinct states met on the probes). Empty when some transition is not a loop.
template <class State, class Observation>
std::optional<std::vector<MetaCausalState>> conditioning_table(
    const MetaCausalModel<State, Observation>& model,
    std::span<const State> probes, Rng& rng) {
  if (!is_reducible(model, probes, rng)) return std::nullopt;
  std::set<MetaCausalState> seen;
  for (const State& s : probes) seen.insert(model.actual_state(s));
  return std::vector<MetaCausalState>(seen.begin(), seen.end());
}

}  // namespace metacausal
