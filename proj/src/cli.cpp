#include "metacausal/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metacausal/datagen.hpp"
#include "metacausal/discovery.hpp"
#include "metacausal/dynamics.hpp"
#include "metacausal/errors.hpp"
#include "metacausal/experiments.hpp"
#include "metacausal/reference_values.hpp"
#include "metacausal/sampling_bounds.hpp"

namespace metacausal::cli {
namespace {

using Json = nlohmann::ordered_json;
using io::format_double;

constexpr const char* kToolVersion = "1.0.0";

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
  std::optional<double> budget;
};

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  std::uint64_t master_seed = 0;
  Json task_seeds = Json::array();
  std::vector<std::string> artifacts;
  std::optional<double> budget;
  Json result = Json::object();

  std::string dump() const {
    Json j;
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["master_seed"] = master_seed;
    j["task_seeds"] = task_seeds;
    j["artifacts"] = artifacts;
    j["wall_clock_budget_s"] = budget ? Json(*budget) : Json(nullptr);
    if (!result.empty()) j["result"] = result;
    return j.dump(2) + "\n";
  }
};

std::string manifest_path(const std::string& artifact) { return artifact + ".manifest.json"; }

// Writes the primary artifact to `path` (or `out` when empty) and, for file
// output, the manifest next to it.
void emit(const std::string& path, const std::string& body, Manifest& m,
          std::ostream& out) {
  if (path.empty()) {
    out << body;
    return;
  }
  m.artifacts.insert(m.artifacts.begin(), path);
  io::write_file(path, body);
  io::write_file(manifest_path(path), m.dump());
}

std::string direction_name(Direction d) { return std::string(to_string(d)); }

Json mechanism_json(const MechanismParams& m) {
  return {{"alpha", m.alpha}, {"beta", m.beta}, {"b", m.b},
          {"direction", direction_name(m.direction)}};
}

void add_common(CLI::App* sub, Common& c, bool threads = false) {
  sub->add_option("--seed", c.seed, "Master seed (default: METACAUSAL_SEED or 0)");
  sub->add_option("--out", c.out, "Output path (stdout when omitted)");
  if (threads) sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
}

Manifest start_manifest(const std::string& command, int argc, const char* const* argv,
                        const Common& c) {
  Manifest m;
  m.command = command;
  for (int i = 0; i < argc; ++i) m.argv.emplace_back(argv[i]);
  m.master_seed = c.seed;
  m.budget = c.budget;
  return m;
}

// ---------------------------------------------------------------- gen -----

struct GenArgs {
  Common common;
  std::optional<int> k;
  double dev = 0.0;
  int n = experiments::kPointsPerClass;
};

int cmd_gen(const GenArgs& a, int argc, const char* const* argv, std::ostream& out) {
  int k = 0;
  if (a.k) {
    k = *a.k;
  } else {
    Rng pick(derive_seed(a.common.seed, {0x6b}));
    k = 1 + static_cast<int>(pick.below(kMaxMechanisms));
  }
  const Dataset data = datagen::generate_setup(k, a.dev, a.n, a.common.seed);
  std::ostringstream csv;
  io::write_dataset_csv(csv, data);

  Manifest m = start_manifest("gen", argc, argv, a.common);
  m.config = {{"k", k}, {"dev", a.dev}, {"n_per_class", a.n}};
  m.task_seeds.push_back(a.common.seed);
  if (a.common.out.empty()) {
    out << csv.str();
    return kExitOk;
  }
  const std::string csv_path = a.common.out + ".csv";
  const std::string gen_path = a.common.out + ".generator.json";
  io::write_file(gen_path, io::generator_to_json(*data.generator) + "\n");
  m.artifacts.push_back(gen_path);
  emit(csv_path, csv.str(), m, out);
  return kExitOk;
}

// ----------------------------------------------------------- discover -----

struct DiscoverArgs {
  Common common;
  std::string in;
  int k_max = 4;
  double dev = 0.0;
  std::string resamples = "empirical";
  std::vector<double> rates;
  double confidence = 0.95;
  double margin = 0.4;
  int min_class_points = 20;
  std::string filter = "text";
  std::string critical_values;
  std::uint64_t dataset_id = 0;
};

discovery::DiscoveryConfig make_config(const std::string& resamples, double dev,
                                       int k_max) {
  discovery::DiscoveryConfig c;
  c.k_max = k_max;
  c.max_class_dev = dev;
  c.resample_mode = resamples == "theoretical" ? discovery::ResampleMode::Theoretical
                                               : discovery::ResampleMode::Empirical;
  return c;
}

Json config_json(const discovery::DiscoveryConfig& c) {
  Json rates = Json::array();
  for (double r : c.empirical_rates.empty() ? discovery::default_empirical_rates(c.max_class_dev)
                                            : c.empirical_rates)
    rates.push_back(r);
  return {{"k_max", c.k_max},
          {"confidence", c.confidence},
          {"max_class_dev", c.max_class_dev},
          {"resample_mode",
           c.resample_mode == discovery::ResampleMode::Theoretical ? "theoretical" : "empirical"},
          {"empirical_rates", rates},
          {"dominance_margin", c.dominance_margin},
          {"min_class_points", c.min_class_points},
          {"filter_rule", c.filter_rule == discovery::FilterRule::Text ? "text" : "pseudocode"},
          {"master_seed", c.master_seed},
          {"dataset_id", c.dataset_id}};
}

int cmd_discover(const DiscoverArgs& a, int argc, const char* const* argv,
                 std::ostream& out) {
  std::ifstream in(a.in);
  if (!in) throw IoError("cannot open dataset: " + a.in);
  const Dataset data = io::read_dataset_csv(in);

  discovery::DiscoveryConfig config = make_config(a.resamples, a.dev, a.k_max);
  config.empirical_rates = a.rates;
  config.confidence = a.confidence;
  config.dominance_margin = a.margin;
  config.min_class_points = a.min_class_points;
  config.filter_rule =
      a.filter == "pseudocode" ? discovery::FilterRule::Pseudocode : discovery::FilterRule::Text;
  config.master_seed = a.common.seed;
  config.dataset_id = a.dataset_id;
  config.threads = a.common.threads;
  config.validate();

  const stats::CriticalValueTable table =
      a.critical_values.empty() ? stats::CriticalValueTable::builtin()
                                : stats::CriticalValueTable::from_file(a.critical_values);
  const auto result = discovery::recover_mechanism_count(data.points, config, table);

  Manifest m = start_manifest("discover", argc, argv, a.common);
  m.config = config_json(config);
  m.config["input"] = a.in;
  m.config["critical_values"] = a.critical_values.empty() ? "builtin" : a.critical_values;

  Json j;
  j["k_hat"] = result.k_hat;
  j["decided"] = result.decided;
  j["n_points"] = data.size();
  Json per_k = Json::array();
  for (const auto& att : result.per_k) {
    Json e;
    e["k"] = att.k;
    e["resamples"] = att.resamples;
    e["stream_seed"] = att.stream_seed;
    e["log_likelihood"] = att.best.log_likelihood;
    e["passed"] = att.validation.passed;
    Json mechs = Json::array();
    for (std::size_t i = 0; i < att.best.mechanisms.size(); ++i) {
      Json mj = mechanism_json(att.best.mechanisms[i]);
      const auto& ad = att.validation.ad[i];
      mj["filtered_points"] = att.validation.class_sizes[i];
      mj["ad_statistic"] = ad.statistic;
      mj["ad_critical_value"] = ad.critical_value;
      mj["ad_passed"] = ad.passed;
      mechs.push_back(mj);
    }
    e["mechanisms"] = mechs;
    per_k.push_back(e);
    m.task_seeds.push_back({{"k", att.k}, {"stream_seed", att.stream_seed}});
  }
  j["per_k"] = per_k;
  j["config"] = m.config;
  if (!a.common.out.empty()) j["manifest"] = manifest_path(a.common.out);
  m.result = {{"k_hat", result.k_hat}};
  emit(a.common.out, j.dump(2) + "\n", m, out);
  return kExitOk;
}

// ------------------------------------------------------------- bounds -----

struct BoundsArgs {
  Common common;
  std::vector<int> n{1, 2, 3, 4};
  std::vector<double> dev{0.0, 0.1, 0.2};
  double confidence = 0.95;
};

int cmd_bounds(const BoundsArgs& a, int argc, const char* const* argv, std::ostream& out) {
  for (double d : a.dev)
    if (!(d >= 0.0 && d < 1.0)) throw ArgumentError("--dev values must lie in [0, 1)");
  std::ostringstream csv;
  csv << "n,d,expected,lower_bound,resamples\n";
  for (double d : a.dev)
    for (int n : a.n) {
      const auto bound = bounds::lower_bound_success_prob(n, d);
      csv << n << ',' << format_double(d) << ','
          << format_double(bounds::expected_success_prob(n)) << ','
          << format_double(bound.probability) << ','
          << bounds::required_resamples(bound.probability, a.confidence) << '\n';
    }
  Manifest m = start_manifest("bounds", argc, argv, a.common);
  m.config = {{"n", a.n}, {"dev", a.dev}, {"confidence", a.confidence}};
  emit(a.common.out, csv.str(), m, out);
  return kExitOk;
}

// ---------------------------------------------------------- reproduce -----

struct ReproduceArgs {
  Common common;
  int table = 0;
  double scale = 0.3;
  std::optional<int> k;
  std::optional<double> dev;
  int inits = 10;
  std::optional<int> count;  // datasets (Table 1) or setups (Tables 3, 4)
  std::string resamples = "empirical";
};

std::vector<std::size_t> dev_rows(const std::optional<double>& dev) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < reference::kDeviations.size(); ++r)
    if (!dev || std::fabs(reference::kDeviations[r] - *dev) < 1e-9) rows.push_back(r);
  if (rows.empty()) throw ArgumentError("--dev must be one of 0, 0.1, 0.2");
  return rows;
}

std::vector<int> k_cols(const std::optional<int>& k) {
  if (k) {
    if (*k < 1 || *k > kMaxMechanisms) throw ArgumentError("--k must lie in [1, 4]");
    return {*k};
  }
  return {1, 2, 3, 4};
}

int scaled(double scale, int full) {
  return std::max(1, static_cast<int>(std::lround(scale * full)));
}

std::string table1(const ReproduceArgs& a, Manifest& m) {
  const int datasets = a.count.value_or(scaled(a.scale, 100));
  std::ostringstream csv;
  csv << "d,k_true,datasets,k_hat_none,k_hat_1,k_hat_2,k_hat_3,k_hat_4,"
         "ref_none,ref_1,ref_2,ref_3,ref_4\n";
  for (std::size_t r : dev_rows(a.dev))
    for (int k : k_cols(a.k)) {
      const double d = reference::kDeviations[r];
      const auto base = make_config(a.resamples, d, kMaxMechanisms);
      const auto counts =
          experiments::confusion_row(k, d, datasets, a.common.seed, base, a.common.threads);
      csv << format_double(d) << ',' << k << ',' << datasets;
      for (int c : counts) csv << ',' << c;
      for (int c : reference::kConfusion[r][static_cast<std::size_t>(k - 1)]) csv << ',' << c;
      csv << '\n';
      m.task_seeds.push_back({{"d", d}, {"k_true", k},
                              {"first_setup_seed",
                               experiments::setup_seed(a.common.seed, 1, k, d, 0)}});
    }
  m.config = {{"table", 1}, {"datasets_per_row", datasets},
              {"resamples", a.resamples}, {"points_per_class", experiments::kPointsPerClass}};
  return csv.str();
}

std::string table2(const ReproduceArgs& a, Manifest& m) {
  std::ostringstream csv;
  csv << "d,analysis,k1,k2,k3,k4,ref_k1,ref_k2,ref_k3,ref_k4,max_abs_diff\n";
  const auto theo = bounds::table2_theoretical();
  for (std::size_t r : dev_rows(a.dev)) {
    const double d = reference::kDeviations[r];
    const std::vector<double> rates(reference::kConvergenceRates[r].begin(),
                                    reference::kConvergenceRates[r].end());
    const auto emp = bounds::empirical_row(rates);
    auto row = [&](const char* name, auto values, const auto& ref) {
      csv << format_double(d) << ',' << name;
      int diff = 0;
      for (std::size_t c = 0; c < 4; ++c) csv << ',' << values[c];
      for (std::size_t c = 0; c < 4; ++c) {
        csv << ',' << ref[c];
        diff = std::max(diff, std::abs(values[c] - ref[c]));
      }
      csv << ',' << diff << '\n';
    };
    row("theoretical", theo[r], reference::kResamplesTheoretical[r]);
    row("empirical", emp, reference::kResamplesEmpirical[r]);
  }
  m.config = {{"table", 2}, {"confidence", 0.95}};
  return csv.str();
}

std::string table34(const ReproduceArgs& a, Manifest& m) {
  const int setups = a.count.value_or(scaled(a.scale, 500));
  std::ostringstream csv;
  if (a.table == 3)
    csv << "d,k,trials,converged,rate,converged_strict,rate_strict,ref_rate,diff_points\n";
  else
    csv << "d,k,converged,slope_error,intercept_error,ref_slope_error,ref_intercept_error\n";
  for (std::size_t r : dev_rows(a.dev))
    for (int k : k_cols(a.k)) {
      const double d = reference::kDeviations[r];
      const auto cell = experiments::convergence_cell(k, d, setups, a.inits, a.common.seed,
                                                      a.common.threads);
      const auto kk = static_cast<std::size_t>(k - 1);
      csv << format_double(d) << ',' << k << ',';
      if (a.table == 3) {
        const double ref = reference::kConvergenceRates[r][kk];
        csv << cell.trials << ',' << cell.converged << ',' << format_double(cell.rate()) << ','
            << cell.converged_strict << ','
            << format_double(static_cast<double>(cell.converged_strict) / cell.trials) << ','
            << format_double(ref) << ',' << format_double(100.0 * (cell.rate() - ref)) << '\n';
      } else {
        const auto ref = reference::kParameterErrors[r][kk];
        csv << cell.converged << ',' << format_double(cell.mean_slope_error()) << ','
            << format_double(cell.mean_intercept_error()) << ',' << format_double(ref.slope)
            << ',' << format_double(ref.intercept) << '\n';
      }
      m.task_seeds.push_back({{"d", d}, {"k", k},
                              {"first_setup_seed",
                               experiments::setup_seed(a.common.seed, 3, k, d, 0)}});
    }
  m.config = {{"table", a.table}, {"setups", setups}, {"inits_per_setup", a.inits},
              {"convergence_tol", 0.2}, {"direction_policy", "reorient"},
              {"points_per_class", experiments::kPointsPerClass}};
  return csv.str();
}

int cmd_reproduce(const ReproduceArgs& a, int argc, const char* const* argv,
                  std::ostream& out, std::ostream& err) {
  if (!(a.scale > 0.0 && a.scale <= 1.0)) throw ArgumentError("--scale must lie in (0, 1]");
  Manifest m = start_manifest("reproduce", argc, argv, a.common);
  const auto t0 = std::chrono::steady_clock::now();
  std::string body;
  switch (a.table) {
    case 1: body = table1(a, m); break;
    case 2: body = table2(a, m); break;
    case 3:
    case 4: body = table34(a, m); break;
    default: throw ArgumentError("table must be 1, 2, 3 or 4");
  }
  m.config["scale"] = a.scale;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (a.common.budget && elapsed > *a.common.budget)
    err << "warning: run took " << elapsed << " s, budget " << *a.common.budget << " s\n";
  emit(a.common.out, body, m, out);
  return kExitOk;
}

// ----------------------------------------------------------- simulate -----

struct SimulateArgs {
  Common common;
  std::string system;
  int steps = 500;
  std::string ext_schedule;
  double s0 = 0.0;
  std::string policy = "following";
  int first_lock = 1;
  std::string curve_out;
};

std::vector<double> read_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ext schedule: " + path);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string field = line.substr(0, line.find(','));
    if (field.empty()) continue;
    if (line_no == 1 && (field == "ext" || field == "ext_stress")) continue;
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || !(v >= 0.0 && v <= 1.0))
      throw IoError("ext schedule line " + std::to_string(line_no) +
                    ": expected a value in [0, 1]");
    values.push_back(v);
  }
  return values;
}

std::string simulate_tag(const SimulateArgs& a, Manifest& m) {
  Rng rng(a.common.seed);
  const dynamics::TagParams p;
  dynamics::TagState s = dynamics::tag_initial(rng, p);
  std::ostringstream csv;
  csv << "step,a_x,a_y,b_x,b_y,chaser,distance,tag_event,edge_b_to_a,edge_a_to_b\n";
  int tags = 0;
  for (int step = 1; step <= a.steps; ++step) {
    const dynamics::TagState next = dynamics::tag_step(s, rng, p);
    const auto t = dynamics::tag_identify(s, next, p.arena);
    const bool tag = next.chaser != s.chaser;
    tags += tag;
    csv << step << ',' << format_double(next.a_pos.x) << ',' << format_double(next.a_pos.y)
        << ',' << format_double(next.b_pos.x) << ',' << format_double(next.b_pos.y) << ','
        << (next.chaser == dynamics::Agent::A ? "A" : "B") << ','
        << format_double(dynamics::tag_distance(next, p.arena)) << ',' << (tag ? 1 : 0) << ','
        << t.at(1, 0).name() << ',' << t.at(0, 1).name() << '\n';
    s = next;
  }
  m.result = {{"tag_events", tags}};
  return csv.str();
}

std::string stress_curve() {
  std::ostringstream csv;
  csv << "x,f_s,f_s_decayed,identity,curvature_sign,type_sign\n";
  for (int i = 0; i <= 200; ++i) {
    const double x = i / 200.0;
    const double c = dynamics::stress_sigmoid_curvature(x);
    csv << format_double(x) << ',' << format_double(dynamics::stress_sigmoid(x)) << ','
        << format_double(dynamics::stress_sigmoid(dynamics::stress_decay(x, 0.0))) << ','
        << format_double(x) << ',' << (c > 0 ? 1 : c < 0 ? -1 : 0) << ','
        << dynamics::stress_identify(x).name() << '\n';
  }
  return csv.str();
}

std::string simulate_stress(const SimulateArgs& a, Manifest& m) {
  if (!(a.s0 >= 0.0 && a.s0 <= 1.0)) throw ArgumentError("--s0 must lie in [0, 1]");
  const std::vector<double> schedule =
      a.ext_schedule.empty() ? std::vector<double>{} : read_schedule(a.ext_schedule);
  dynamics::StressState s{a.s0, 0.0, 0.0};
  std::ostringstream csv;
  csv << "step,ext,s_prev,d,s,cobweb_f_s,type,state\n";
  for (int step = 0; step < a.steps; ++step) {
    s.ext = static_cast<std::size_t>(step) < schedule.size()
                ? schedule[static_cast<std::size_t>(step)]
                : 0.0;
    const dynamics::StressState next = dynamics::stress_step(s);
    const auto t = dynamics::stress_transition(MetaCausalState(2), next);
    csv << step << ',' << format_double(s.ext) << ',' << format_double(s.s) << ','
        << format_double(next.d_internal) << ',' << format_double(next.s) << ','
        << format_double(dynamics::stress_sigmoid(0.95 * s.s)) << ','
        << dynamics::stress_identify(next.s).name() << ',' << t.to_string() << '\n';
    s = next;
  }
  m.config["s0"] = a.s0;
  m.config["ext_schedule"] = a.ext_schedule;
  m.result = {{"final_s", s.s}, {"final_type", dynamics::stress_identify(s.s).name()}};
  return csv.str();
}

std::string simulate_follower(const SimulateArgs& a, Manifest& m, std::ostream& err) {
  Rng rng(a.common.seed);
  const auto policy =
      a.policy == "still" ? dynamics::Policy::StandingStill : dynamics::Policy::Following;
  const auto trace =
      dynamics::follower_trace({0.0, 0.0, policy}, static_cast<std::size_t>(a.steps), rng);
  const auto attr = dynamics::follower_identify(policy, trace);
  std::ostringstream csv;
  csv << "step,policy,a_x,b_x\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    csv << i << ',' << a.policy << ',' << format_double(trace[i].a_pos) << ','
        << format_double(trace[i].b_pos) << '\n';
  m.result = {{"edge_b_to_a", attr.edge_present},
              {"dependence", attr.dependence},
              {"meta_root_cause", attr.meta_root_cause},
              {"classical_root_cause",
               attr.classical_root_cause ? Json(*attr.classical_root_cause) : Json(nullptr)}};
  err << "edge B_X -> A_X: " << (attr.edge_present ? "present" : "absent")
      << " (|corr| = " << attr.dependence << "), meta root cause " << attr.meta_root_cause
      << "\n";
  return csv.str();
}

std::string simulate_locks(const SimulateArgs& a, Manifest& m) {
  if (a.first_lock != 1 && a.first_lock != 2) throw ArgumentError("--first must be 1 or 2");
  auto name = [](dynamics::Lock l) { return l == dynamics::Lock::Locked ? "locked" : "open"; };
  std::ostringstream csv;
  csv << "step,action,lock1,lock2,door,edge_lock1_door,edge_lock2_door,classical_delta,"
         "meta_changed\n";
  dynamics::LocksState s = dynamics::make_locks(dynamics::Lock::Locked, dynamics::Lock::Locked);
  auto row = [&](int step, const std::string& action, int delta, bool changed) {
    const auto t = dynamics::locks_state(s);
    csv << step << ',' << action << ',' << name(s.lock1) << ',' << name(s.lock2) << ','
        << (s.door == dynamics::Door::Openable ? "openable" : "closed") << ','
        << t.at(0, 2).name() << ',' << t.at(1, 2).name() << ',' << delta << ','
        << (changed ? 1 : 0) << '\n';
  };
  row(0, "none", 0, false);
  const int order[2] = {a.first_lock, 3 - a.first_lock};
  for (int i = 0; i < 2; ++i) {
    const auto attr = dynamics::locks_attribution(s, order[i]);
    s = dynamics::open_lock(s, order[i]);
    row(i + 1, "open_lock" + std::to_string(order[i]), attr.classical_delta, attr.meta_changed);
  }
  m.config["first_lock"] = a.first_lock;
  return csv.str();
}

int cmd_simulate(const SimulateArgs& a, int argc, const char* const* argv,
                 std::ostream& out, std::ostream& err) {
  if (a.steps < 1) throw ArgumentError("--steps must be >= 1");
  Manifest m = start_manifest("simulate", argc, argv, a.common);
  m.config = {{"system", a.system}, {"steps", a.steps}};
  m.task_seeds.push_back(a.common.seed);
  std::string body;
  if (a.system == "tag") body = simulate_tag(a, m);
  else if (a.system == "stress") body = simulate_stress(a, m);
  else if (a.system == "follower") body = simulate_follower(a, m, err);
  else if (a.system == "locks") body = simulate_locks(a, m);
  else throw ArgumentError("unknown system: " + a.system);
  if (!a.curve_out.empty()) {
    if (a.system != "stress") throw ArgumentError("--curve-out applies to the stress system");
    io::write_file(a.curve_out, stress_curve());
    m.artifacts.push_back(a.curve_out);
  }
  emit(a.common.out, body, m, out);
  return kExitOk;
}

}  // namespace

unsigned long long default_seed() {
  const char* env = std::getenv("METACAUSAL_SEED");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  return (end && *end == '\0') ? v : 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Meta-causal models and switching-mechanism discovery"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  const std::uint64_t seed0 = default_seed();

  GenArgs gen;
  gen.common.seed = seed0;
  auto* g = app.add_subcommand("gen", "Generate a seeded switching-mechanism dataset");
  add_common(g, gen.common);
  g->add_option("--k", gen.k, "Number of mechanisms (uniform in [1, 4] when omitted)")
      ->check(CLI::Range(1, kMaxMechanisms));
  g->add_option("--dev", gen.dev, "Maximum relative class deviation")->check(CLI::Range(0.0, 0.999999));
  g->add_option("--n", gen.n, "Average points per mechanism")->check(CLI::PositiveNumber);

  DiscoverArgs disc;
  disc.common.seed = seed0;
  auto* d = app.add_subcommand("discover", "Recover the number of mechanisms in a dataset");
  add_common(d, disc.common, true);
  d->add_option("--in", disc.in, "Dataset CSV (x,y[,label])")->required();
  d->add_option("--k-max", disc.k_max, "Largest mechanism count tried")->check(CLI::Range(1, kMaxMechanisms));
  d->add_option("--dev", disc.dev, "Assumed maximum class deviation")->check(CLI::Range(0.0, 0.999999));
  d->add_option("--resamples", disc.resamples, "Restart counts")
      ->check(CLI::IsMember({"empirical", "theoretical"}));
  d->add_option("--rates", disc.rates, "Empirical convergence rates for k = 1..k_max")->delimiter(',');
  d->add_option("--confidence", disc.confidence, "Probability of one good restart");
  d->add_option("--margin", disc.margin, "Dominance margin");
  d->add_option("--min-class-points", disc.min_class_points, "Smallest tested class");
  d->add_option("--filter", disc.filter, "Dominance rule")->check(CLI::IsMember({"text", "pseudocode"}));
  d->add_option("--critical-values", disc.critical_values, "Critical value table JSON");
  d->add_option("--dataset-id", disc.dataset_id, "Stream index under the master seed");

  BoundsArgs bnd;
  bnd.common.seed = seed0;
  auto* b = app.add_subcommand("bounds", "Success probabilities and restart counts");
  add_common(b, bnd.common);
  b->add_option("--n", bnd.n, "Mechanism counts")->delimiter(',')->check(CLI::PositiveNumber);
  b->add_option("--dev", bnd.dev, "Class deviations in [0, 1)")->delimiter(',');
  b->add_option("--confidence", bnd.confidence, "Target confidence")->check(CLI::Range(0.0, 0.999999));

  ReproduceArgs rep;
  rep.common.seed = seed0;
  auto* r = app.add_subcommand("reproduce", "Recompute a published table at reduced scale");
  add_common(r, rep.common, true);
  r->add_option("table", rep.table, "Table id (1-4)")->required()->check(CLI::Range(1, 4));
  r->add_option("--scale", rep.scale, "Fraction of the full trial count");
  r->add_option("--k", rep.k, "Restrict to one mechanism count");
  r->add_option("--dev", rep.dev, "Restrict to one deviation (0, 0.1 or 0.2)");
  r->add_option("--inits", rep.inits, "Initializations per setup (tables 3, 4)")->check(CLI::PositiveNumber);
  r->add_option("--count", rep.count, "Datasets or setups per row, overriding --scale")
      ->check(CLI::PositiveNumber);
  r->add_option("--resamples", rep.resamples, "Restart counts for table 1")
      ->check(CLI::IsMember({"empirical", "theoretical"}));
  r->add_option("--budget", rep.common.budget, "Wall-clock budget in seconds (recorded, warned)");

  SimulateArgs sim;
  sim.common.seed = seed0;
  auto* s = app.add_subcommand("simulate", "Run one of the worked dynamical systems");
  add_common(s, sim.common);
  s->add_option("--system", sim.system, "tag | stress | follower | locks")
      ->required()
      ->check(CLI::IsMember({"tag", "stress", "follower", "locks"}));
  s->add_option("--steps", sim.steps, "Number of steps");
  s->add_option("--ext-schedule", sim.ext_schedule, "External stressor per step (CSV)");
  s->add_option("--s0", sim.s0, "Initial stress level");
  s->add_option("--policy", sim.policy, "Follower policy")->check(CLI::IsMember({"following", "still"}));
  s->add_option("--first", sim.first_lock, "Lock opened first (1 or 2)");
  s->add_option("--curve-out", sim.curve_out, "Write f_s curve samples (stress)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    if (!app.get_subcommands().empty())
      err << app.get_subcommands().front()->help();
    return kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen, argc, argv, out);
    if (*d) return cmd_discover(disc, argc, argv, out);
    if (*b) return cmd_bounds(bnd, argc, argv, out);
    if (*r) return cmd_reproduce(rep, argc, argv, out, err);
    if (*s) return cmd_simulate(sim, argc, argv, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace metacausal::cli
