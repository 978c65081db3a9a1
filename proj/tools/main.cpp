// fafkit command-line front end: runs estimations, gaussianity tests, and
// parameter sweeps, writing reproducible CSV or JSON reports. Every knob that
// affects a result is echoed back into the report, along with the derived
// shot budgets and batch counts, so runs can be audited and replayed.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fafkit/bell.hpp"
#include "fafkit/majorana.hpp"
#include "fafkit/matching.hpp"
#include "fafkit/qstate.hpp"
#include "fafkit/report.hpp"
#include "fafkit/rng.hpp"
#include "fafkit/statelib.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using namespace faf;

constexpr double kPi = 3.14159265358979323846;

/// Every knob reachable from flags or a JSON config file. Sentinels mark
/// "not provided" where a default must be distinguishable from zero.
struct Options {
  std::string state;
  std::string circuit;  // inline JSON (leading '{') or a file path
  int n = 0;
  int q = 0;
  int k = 1;
  double eps2 = 0.0;
  uint64_t basis_index = 0;
  long shots = 0;
  long shots_per_layer = 0;
  double epsilon = 0.0;
  double delta = 0.05;
  double depol = 0.0;
  bool has_seed = false;
  uint64_t seed = 0;
  std::string noise_kind;
  double noise_p = -1.0;  // < 0: not provided
  std::string placement = "after_two_qubit_gate";
  int depth = 0;
  double g = 1.0;
  int count = 0;
  int theta_steps = 9;
  int p_steps = 11;
  std::string out;
  std::string circuit_out;
  std::string format = "csv";
};

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Accumulates echoed parameters plus either key/value results or a table,
/// then renders as commented CSV or a JSON document. The timestamp always
/// occupies a line of its own so reports diff cleanly across reruns.
class Report {
 public:
  Report(std::string command, std::string format)
      : command_(std::move(command)), format_(std::move(format)) {
    if (format_ != "csv" && format_ != "json")
      throw ContractError("format must be csv or json");
  }

  void param(const std::string& key, ordered_json value) {
    params_.emplace_back(key, std::move(value));
  }
  void result(const std::string& key, ordered_json value) {
    results_.emplace_back(key, std::move(value));
  }
  void table_header(std::vector<std::string> names) {
    header_ = std::move(names);
  }
  void add_row(std::vector<ordered_json> cells) {
    rows_.push_back(std::move(cells));
  }

  std::string render() const {
    return format_ == "csv" ? render_csv() : render_json();
  }

 private:
  static std::string cell(const ordered_json& v) {
    if (v.is_number_float()) return fmt12(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  std::string render_csv() const {
    std::ostringstream os;
    os << "# fafkit report\n# command = " << command_ << "\n";
    for (const auto& [k, v] : params_) os << "# " << k << " = " << cell(v) << "\n";
    os << "# timestamp = " << utc_timestamp() << "\n";
    if (!results_.empty()) {
      os << "key,value\n";
      for (const auto& [k, v] : results_) os << k << "," << cell(v) << "\n";
    }
    if (!header_.empty()) {
      for (size_t i = 0; i < header_.size(); ++i)
        os << (i ? "," : "") << header_[i];
      os << "\n";
      for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i)
          os << (i ? "," : "") << cell(row[i]);
        os << "\n";
      }
    }
    return os.str();
  }

  std::string render_json() const {
    ordered_json j;
    j["command"] = command_;
    ordered_json p = ordered_json::object();
    for (const auto& [k, v] : params_) p[k] = v;
    j["params"] = std::move(p);
    if (!results_.empty()) {
      ordered_json r = ordered_json::object();
      for (const auto& [k, v] : results_) r[k] = v;
      j["results"] = std::move(r);
    }
    if (!header_.empty()) {
      ordered_json rows = ordered_json::array();
      for (const auto& row : rows_) {
        ordered_json o = ordered_json::object();
        for (size_t i = 0; i < header_.size() && i < row.size(); ++i)
          o[header_[i]] = row[i];
        rows.push_back(std::move(o));
      }
      j["rows"] = std::move(rows);
    }
    j["timestamp"] = utc_timestamp();
    return j.dump(2) + "\n";
  }

  std::string command_;
  std::string format_;
  std::vector<std::pair<std::string, ordered_json>> params_;
  std::vector<std::pair<std::string, ordered_json>> results_;
  std::vector<std::string> header_;
  std::vector<std::vector<ordered_json>> rows_;
};

/// Relative output paths land in $FAFKIT_OUT_DIR when that is set.
std::string resolve_out_path(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* dir = std::getenv("FAFKIT_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  std::string full = dir;
  if (full.back() != '/') full += '/';
  return full + path;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const std::string full = resolve_out_path(path);
  std::ofstream os(full);
  if (!os) throw ContractError("cannot open output file: " + full);
  os << text;
}

// --- state and circuit plumbing ---------------------------------------------

EnsembleKind ensemble_kind_from(std::string name) {
  for (char& c : name)
    if (c == '-') c = '_';
  for (EnsembleKind k :
       {EnsembleKind::Haar, EnsembleKind::SubsetPhase,
        EnsembleKind::GaussianRandom, EnsembleKind::Cat, EnsembleKind::Ghz,
        EnsembleKind::Defect, EnsembleKind::Basis})
    if (name == ensemble_kind_name(k)) return k;
  throw ContractError("unknown state kind '" + name + "'");
}

bool kind_is_stochastic(EnsembleKind k) {
  return k == EnsembleKind::Haar || k == EnsembleKind::SubsetPhase ||
         k == EnsembleKind::GaussianRandom;
}

EnsembleSpec ensemble_spec_from(const Options& o, EnsembleKind kind) {
  EnsembleSpec spec;
  spec.kind = kind;
  spec.n = o.n;
  spec.q = o.q;
  spec.eps2 = o.eps2;
  spec.basis_index = o.basis_index;
  return spec;
}

/// State-family knobs that feed the run, in a stable order.
void echo_state(Report& rep, const Options& o, EnsembleKind kind) {
  rep.param("state", ensemble_kind_name(kind));
  rep.param("n", o.n);
  switch (kind) {
    case EnsembleKind::SubsetPhase: rep.param("q", o.q); break;
    case EnsembleKind::Cat: rep.param("eps2", o.eps2); break;
    case EnsembleKind::Basis: rep.param("basis_index", o.basis_index); break;
    default: break;
  }
  if (kind_is_stochastic(kind)) rep.param("seed", o.seed);
}

Rng require_seed(const Options& o, const char* who) {
  if (!o.has_seed)
    throw ContractError(std::string(who) + ": --seed is required");
  return Rng(o.seed);
}

/// Builds the requested pure state; stochastic families insist on a seed.
PureState make_cli_state(const Options& o, EnsembleKind kind, Rng& rng) {
  if (kind_is_stochastic(kind) && !o.has_seed)
    throw ContractError("state kind '" +
                        std::string(ensemble_kind_name(kind)) +
                        "' needs --seed");
  return make_state(ensemble_spec_from(o, kind), rng);
}

CircuitSpec load_circuit(const std::string& arg) {
  if (arg.empty()) throw ContractError("empty circuit spec");
  if (arg.front() == '{') return circuit_from_json(arg);
  std::ifstream is(arg);
  if (!is) throw ContractError("cannot read circuit file: " + arg);
  std::ostringstream text;
  text << is.rdbuf();
  return circuit_from_json(text.str());
}

ChannelKind channel_kind_from(std::string name) {
  for (char& c : name)
    if (c == '-') c = '_';
  for (ChannelKind k : {ChannelKind::Depolarizing, ChannelKind::AmplitudeDamping,
                        ChannelKind::Dephasing, ChannelKind::BitFlip})
    if (name == NoiseChannel::kind_name(k)) return k;
  throw ContractError("unknown noise kind '" + name + "'");
}

/// Optional noise from --noise-kind / --noise-p / --placement. A kind without
/// a strength falls back to the hardware-fit depolarizing default.
std::optional<NoiseSpec> noise_from(const Options& o) {
  if (o.noise_kind.empty() && o.noise_p < 0.0) return std::nullopt;
  NoiseSpec ns;
  ns.kind = o.noise_kind.empty() ? ChannelKind::Depolarizing
                                 : channel_kind_from(o.noise_kind);
  ns.strength = o.noise_p < 0.0 ? kHardwareFitDepolarizing : o.noise_p;
  if (o.placement == "after_two_qubit_gate")
    ns.placement = NoiseSpec::Placement::AfterTwoQubitGate;
  else if (o.placement == "after_layer")
    ns.placement = NoiseSpec::Placement::AfterLayer;
  else
    throw ContractError("placement must be after_two_qubit_gate or after_layer");
  return ns;
}

void echo_noise(Report& rep, const std::optional<NoiseSpec>& ns) {
  if (!ns) {
    rep.param("noise", "none");
    return;
  }
  rep.param("noise", NoiseChannel::kind_name(ns->kind));
  rep.param("noise_p", ns->strength);
  rep.param("placement", ns->placement == NoiseSpec::Placement::AfterLayer
                             ? "after_layer"
                             : "after_two_qubit_gate");
}

void echo_estimate(Report& rep, const std::string& prefix,
                   const EstimateReport& est) {
  rep.result(prefix, est.mean);
  rep.result(prefix + "_std_error", est.std_error);
  if (est.warning) rep.result(prefix + "_warning", *est.warning);
}

// --- command handlers --------------------------------------------------------

int cmd_faf(const Options& o, Report& rep) {
  if (!o.circuit.empty() && !o.state.empty())
    throw ContractError("faf: give either --state or --circuit, not both");
  if (!o.circuit.empty()) {
    const CircuitSpec spec = load_circuit(o.circuit);
    rep.param("circuit", o.circuit.front() == '{' ? "(inline)" : o.circuit);
    rep.param("n", spec.n);
    rep.param("k", o.k);
    double val;
    if (spec.noise) {
      val = faf_k(run_circuit(spec, PureState::basis_state(spec.n, 0)), o.k);
    } else {
      val =
          faf_k(run_circuit_pure(spec, PureState::basis_state(spec.n, 0)), o.k);
    }
    rep.result("faf", val);
    return 0;
  }
  if (o.state.empty()) throw ContractError("faf: needs --state or --circuit");
  const EnsembleKind kind = ensemble_kind_from(o.state);
  Rng rng(o.seed);
  const PureState psi = make_cli_state(o, kind, rng);
  echo_state(rep, o, kind);
  rep.param("k", o.k);
  rep.result("faf", faf_k(psi, o.k));
  return 0;
}

int cmd_witness(const Options& o, Report& rep) {
  if (!o.circuit.empty() && !o.state.empty())
    throw ContractError("witness: give either --state or --circuit, not both");
  const MixedState rho = [&]() -> MixedState {
    if (!o.circuit.empty()) {
      const CircuitSpec spec = load_circuit(o.circuit);
      rep.param("circuit", o.circuit.front() == '{' ? "(inline)" : o.circuit);
      rep.param("n", spec.n);
      return run_circuit(spec, PureState::basis_state(spec.n, 0));
    }
    if (o.state.empty())
      throw ContractError("witness: needs --state or --circuit");
    const EnsembleKind kind = ensemble_kind_from(o.state);
    Rng rng(o.seed);
    const PureState psi = make_cli_state(o, kind, rng);
    echo_state(rep, o, kind);
    rep.param("depol", o.depol);
    return o.depol > 0.0 ? global_depolarize(psi, o.depol)
                         : MixedState::from_pure(psi);
  }();
  rep.result("faf1", faf_k(rho, 1));
  rep.result("purity", purity(rho));
  rep.result("witness", witness_faf(rho));
  return 0;
}

int cmd_bell_estimate(const Options& o, Report& rep) {
  Rng rng = require_seed(o, "bell-estimate");
  if (o.shots < 2) throw ContractError("bell-estimate: needs --shots >= 2");
  const EnsembleKind kind = ensemble_kind_from(o.state);
  const PureState psi = make_cli_state(o, kind, rng);
  echo_state(rep, o, kind);
  if (!kind_is_stochastic(kind)) rep.param("seed", o.seed);
  rep.param("depol", o.depol);
  rep.param("shots", o.shots);
  rep.param("delta", o.delta);
  rep.param("mom_batches", mom_batch_count(o.delta));

  BellRecord rec;
  if (o.depol > 0.0)
    rec = draw_bell_record(global_depolarize(psi, o.depol), o.shots, rng);
  else
    rec = draw_bell_record(psi, o.shots, rng);
  echo_estimate(rep, "faf1", estimate_faf1(rec, o.delta));
  echo_estimate(rep, "purity", estimate_purity(rec));
  echo_estimate(rep, "witness", estimate_witness(rec, o.delta));
  echo_estimate(rep, "coherence", estimate_coherence(rec));
  return 0;
}

int cmd_single_estimate(const Options& o, Report& rep) {
  Rng rng = require_seed(o, "single-estimate");
  if (o.shots_per_layer < 2)
    throw ContractError("single-estimate: needs --shots-per-layer >= 2");
  const EnsembleKind kind = ensemble_kind_from(o.state);
  const PureState psi = make_cli_state(o, kind, rng);
  echo_state(rep, o, kind);
  if (!kind_is_stochastic(kind)) rep.param("seed", o.seed);
  rep.param("depol", o.depol);
  rep.param("shots_per_layer", o.shots_per_layer);
  rep.param("layers", 2 * o.n - 1);
  rep.param("delta", o.delta);
  rep.param("mom_batches", mom_batch_count(o.delta));

  EstimateReport est;
  if (o.depol > 0.0)
    est = estimate_faf1_single(global_depolarize(psi, o.depol),
                               o.shots_per_layer, o.delta, rng);
  else
    est = estimate_faf1_single(psi, o.shots_per_layer, o.delta, rng);
  echo_estimate(rep, "faf1", est);
  rep.result("total_shots", est.n_shots);
  return 0;
}

void echo_verdict(Report& rep, const TestVerdict& v) {
  rep.result("verdict", v.accept ? "ACCEPT" : "REJECT");
  rep.result("shots_used", v.n_shots_used);
  rep.result("shots_budget", v.n_shots_budget);
  if (v.evidence) rep.result("evidence_lambda", v.evidence->lambda);
  if (v.details) {
    rep.result("estimate", v.details->mean);
    rep.result("estimate_std_error", v.details->std_error);
  }
}

int cmd_test_bell(const Options& o, Report& rep) {
  Rng rng = require_seed(o, "test-bell");
  if (o.epsilon <= 0.0) throw ContractError("test-bell: needs --epsilon > 0");
  const EnsembleKind kind = ensemble_kind_from(o.state);
  const PureState psi = make_cli_state(o, kind, rng);
  echo_state(rep, o, kind);
  if (!kind_is_stochastic(kind)) rep.param("seed", o.seed);
  rep.param("depol", o.depol);
  rep.param("epsilon", o.epsilon);
  rep.param("delta", o.delta);
  rep.param("tester_budget", bell_test_shot_budget(o.n, o.epsilon, o.delta));

  TestVerdict v;
  if (o.depol > 0.0)
    v = bell_gaussianity_test(global_depolarize(psi, o.depol), o.epsilon,
                              o.delta, rng);
  else
    v = bell_gaussianity_test(psi, o.epsilon, o.delta, rng);
  echo_verdict(rep, v);
  return v.accept ? 0 : 1;
}

int cmd_test_single(const Options& o, Report& rep) {
  Rng rng = require_seed(o, "test-single");
  if (o.epsilon <= 0.0) throw ContractError("test-single: needs --epsilon > 0");
  const EnsembleKind kind = ensemble_kind_from(o.state);
  const PureState psi = make_cli_state(o, kind, rng);
  echo_state(rep, o, kind);
  if (!kind_is_stochastic(kind)) rep.param("seed", o.seed);
  rep.param("depol", o.depol);
  rep.param("epsilon", o.epsilon);
  rep.param("delta", o.delta);
  const double eta = 0.5 * o.epsilon * o.epsilon;
  rep.param("eta", eta);
  rep.param("shots_per_layer_budget", single_copy_shot_budget(o.n, eta));
  rep.param("mom_batches", mom_batch_count(o.delta));

  TestVerdict v;
  if (o.depol > 0.0)
    v = single_copy_test(global_depolarize(psi, o.depol), o.epsilon, o.delta,
                         rng);
  else
    v = single_copy_test(psi, o.epsilon, o.delta, rng);
  echo_verdict(rep, v);
  return v.accept ? 0 : 1;
}

int cmd_sweep_theta(const Options& o, Report& rep) {
  Rng rng = require_seed(o, "sweep-theta");
  if (o.theta_steps < 2)
    throw ContractError("sweep-theta: needs --theta-steps >= 2");
  const long shots = o.shots > 0 ? o.shots : 20000;
  const std::optional<NoiseSpec> noise = noise_from(o);
  rep.param("theta_steps", o.theta_steps);
  echo_noise(rep, noise);
  rep.param("shots", shots);
  rep.param("witness_delta", 0.05);
  rep.param("mom_batches", mom_batch_count(0.05));
  rep.param("seed", o.seed);

  std::vector<double> thetas(o.theta_steps);
  for (int i = 0; i < o.theta_steps; ++i)
    thetas[i] = 0.5 * kPi * i / (o.theta_steps - 1);
  const std::vector<SweepRow> rows =
      theta_sweep_experiment(thetas, noise, shots, rng);
  rep.table_header({"theta", "p", "witness_exact", "witness_est",
                    "est_std_error", "shots", "seed"});
  for (const SweepRow& r : rows)
    rep.add_row({r.theta, r.p, r.witness_exact, r.witness_est, r.est_std_error,
                 r.shots, r.seed});
  return 0;
}

int cmd_sweep_depol(const Options& o, Report& rep) {
  if (o.state.empty()) throw ContractError("sweep-depol: needs --state");
  if (o.p_steps < 2) throw ContractError("sweep-depol: needs --p-steps >= 2");
  const EnsembleKind kind = ensemble_kind_from(o.state);
  Rng rng(o.seed);
  const PureState psi = make_cli_state(o, kind, rng);
  echo_state(rep, o, kind);
  rep.param("p_steps", o.p_steps);
  rep.param("faf1_pure", faf_k(psi, 1));

  rep.table_header({"p", "faf1", "purity", "witness", "witness_lower"});
  for (int i = 0; i < o.p_steps; ++i) {
    const double p = static_cast<double>(i) / (o.p_steps - 1);
    const DepolPredictions pred = depol_predictions(psi, p);
    rep.add_row({p, pred.faf1, pred.purity, pred.witness, pred.witness_lower});
  }
  return 0;
}

int cmd_brickwork(const Options& o, Report& rep) {
  Rng rng = require_seed(o, "brickwork");
  CircuitSpec spec = brickwork_matchgate(o.n, o.depth, o.g, rng);
  spec.noise = noise_from(o);
  rep.param("n", o.n);
  rep.param("depth", o.depth);
  rep.param("g", o.g);
  rep.param("seed", o.seed);
  echo_noise(rep, spec.noise);
  rep.param("ops", spec.ops.size());

  if (!o.circuit_out.empty()) {
    const std::string path = resolve_out_path(o.circuit_out);
    std::ofstream os(path);
    if (!os) throw ContractError("cannot open circuit file: " + path);
    os << circuit_to_json(spec) << "\n";
    rep.result("circuit_file", o.circuit_out);
  }

  if (spec.noise) {
    const MixedState rho = run_circuit(spec, PureState::basis_state(o.n, 0));
    rep.result("faf1", faf_k(rho, 1));
    rep.result("purity", purity(rho));
    rep.result("witness", witness_faf(rho));
  } else {
    const PureState out =
        run_circuit_pure(spec, PureState::basis_state(o.n, 0));
    rep.result("faf1", faf_k(out, 1));
  }
  return 0;
}

int cmd_layers(const Options& o, Report& rep) {
  const std::vector<MeasurementLayer> layers = build_layers(o.n);
  rep.param("n", o.n);
  rep.param("layers", static_cast<long>(layers.size()));
  rep.param("pairs", static_cast<long>(o.n) * (2 * o.n - 1));
  rep.table_header({"layer", "position", "a", "b", "observable"});
  for (const MeasurementLayer& layer : layers)
    for (size_t i = 0; i < layer.pairs.size(); ++i)
      rep.add_row({layer.index, static_cast<long>(i), layer.pairs[i].first,
                   layer.pairs[i].second, layer.observables[i].to_string()});
  return 0;
}

int cmd_ensemble_stats(const Options& o, Report& rep) {
  if (o.count < 2) throw ContractError("ensemble-stats: needs --count >= 2");
  const EnsembleKind kind = ensemble_kind_from(o.state);
  Rng rng(o.seed);
  if (kind_is_stochastic(kind) && !o.has_seed)
    throw ContractError("ensemble-stats: --seed is required for this kind");
  echo_state(rep, o, kind);
  rep.param("count", o.count);

  const std::vector<double> vals =
      sample_ensemble_faf(ensemble_spec_from(o, kind), o.count, rng);
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= vals.size();
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= (vals.size() - 1);
  rep.result("mean", mean);
  rep.result("std_error", std::sqrt(var / vals.size()));
  rep.result("min", *std::min_element(vals.begin(), vals.end()));
  rep.result("max", *std::max_element(vals.begin(), vals.end()));
  switch (kind) {
    case EnsembleKind::Haar:
      rep.result("reference_mean", haar_faf_mean(o.n));
      break;
    case EnsembleKind::SubsetPhase:
      rep.result("reference_lower", subset_phase_faf_lower(o.n, o.q));
      break;
    case EnsembleKind::Cat:
      if (o.n >= 3) rep.result("reference_mean", cat_faf1(o.n, o.eps2));
      break;
    case EnsembleKind::Ghz:
      if (o.n >= 3) rep.result("reference_mean", cat_faf1(o.n, 0.5));
      break;
    case EnsembleKind::Defect:
      rep.result("reference_mean", 4.0);
      break;
    default:
      rep.result("reference_mean", 0.0);
      break;
  }
  return 0;
}

// --- config files ------------------------------------------------------------

/// Merge a JSON config over the defaults; explicitly passed flags win. Keys
/// mirror the long flag names without the leading dashes.
void apply_config(Options& o, const CLI::App* sub, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ContractError("cannot read config file: " + path);
  std::ostringstream text;
  text << is.rdbuf();
  json j;
  try {
    j = json::parse(text.str());
  } catch (const json::exception& e) {
    throw ContractError(std::string("config: parse error: ") + e.what());
  }
  if (!j.is_object()) throw ContractError("config: expected a JSON object");

  auto passed = [sub](const char* flag) { return sub->count(flag) > 0; };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "command") {
        if (value.get<std::string>() != sub->get_name())
          throw ContractError("config: command '" +
                              value.get<std::string>() +
                              "' does not match subcommand '" +
                              sub->get_name() + "'");
      } else if (key == "state") {
        if (!passed("--state")) o.state = value.get<std::string>();
      } else if (key == "circuit") {
        if (!passed("--circuit")) o.circuit = value.get<std::string>();
      } else if (key == "n") {
        if (!passed("--n")) o.n = value.get<int>();
      } else if (key == "q") {
        if (!passed("--q")) o.q = value.get<int>();
      } else if (key == "k") {
        if (!passed("--k")) o.k = value.get<int>();
      } else if (key == "eps2") {
        if (!passed("--eps2")) o.eps2 = value.get<double>();
      } else if (key == "basis-index") {
        if (!passed("--basis-index")) o.basis_index = value.get<uint64_t>();
      } else if (key == "shots") {
        if (!passed("--shots")) o.shots = value.get<long>();
      } else if (key == "shots-per-layer") {
        if (!passed("--shots-per-layer"))
          o.shots_per_layer = value.get<long>();
      } else if (key == "epsilon") {
        if (!passed("--epsilon")) o.epsilon = value.get<double>();
      } else if (key == "delta") {
        if (!passed("--delta")) o.delta = value.get<double>();
      } else if (key == "depol") {
        if (!passed("--depol")) o.depol = value.get<double>();
      } else if (key == "seed") {
        if (!passed("--seed")) {
          o.seed = value.get<uint64_t>();
          o.has_seed = true;
        }
      } else if (key == "noise-kind") {
        if (!passed("--noise-kind")) o.noise_kind = value.get<std::string>();
      } else if (key == "noise-p") {
        if (!passed("--noise-p")) o.noise_p = value.get<double>();
      } else if (key == "placement") {
        if (!passed("--placement")) o.placement = value.get<std::string>();
      } else if (key == "depth") {
        if (!passed("--depth")) o.depth = value.get<int>();
      } else if (key == "g") {
        if (!passed("--g")) o.g = value.get<double>();
      } else if (key == "count") {
        if (!passed("--count")) o.count = value.get<int>();
      } else if (key == "theta-steps") {
        if (!passed("--theta-steps")) o.theta_steps = value.get<int>();
      } else if (key == "p-steps") {
        if (!passed("--p-steps")) o.p_steps = value.get<int>();
      } else if (key == "out") {
        if (!passed("--out")) o.out = value.get<std::string>();
      } else if (key == "circuit-out") {
        if (!passed("--circuit-out")) o.circuit_out = value.get<std::string>();
      } else if (key == "format") {
        if (!passed("--format")) o.format = value.get<std::string>();
      } else {
        throw ContractError("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ContractError(std::string("config: bad value: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fermionic non-gaussianity toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fafkit 0.1.0");

  Options opt;
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON config file; flags override its values");
    sub->add_option("--out", opt.out, "report file (default: stdout)");
    sub->add_option("--format", opt.format, "csv or json");
    sub->add_option("--seed", opt.seed, "RNG seed");
    return sub;
  };
  auto add_state = [&](CLI::App* sub) {
    sub->add_option("--state", opt.state,
                    "state kind: haar, subset-phase, gaussian-random, cat, "
                    "ghz, defect, basis");
    sub->add_option("--n", opt.n, "qubit / mode count");
    sub->add_option("--q", opt.q, "subset-phase support exponent");
    sub->add_option("--eps2", opt.eps2, "cat branch weight");
    sub->add_option("--basis-index", opt.basis_index, "basis state index");
    return sub;
  };

  CLI::App* faf_cmd = add_state(add_common(
      app.add_subcommand("faf", "exact antiflatness of a state or circuit")));
  faf_cmd->add_option("--k", opt.k, "antiflatness order");
  faf_cmd->add_option("--circuit", opt.circuit,
                      "circuit JSON (inline or file), run from vacuum");

  CLI::App* witness_cmd = add_state(add_common(app.add_subcommand(
      "witness", "exact purity-corrected witness of a state or circuit")));
  witness_cmd->add_option("--depol", opt.depol, "global depolarizing strength");
  witness_cmd->add_option("--circuit", opt.circuit,
                          "circuit JSON (inline or file), run from vacuum");

  CLI::App* bell_cmd = add_state(add_common(app.add_subcommand(
      "bell-estimate", "two-copy estimates: faf1, purity, witness, coherence")));
  bell_cmd->add_option("--shots", opt.shots, "two-copy shot count");
  bell_cmd->add_option("--delta", opt.delta, "confidence parameter");
  bell_cmd->add_option("--depol", opt.depol, "global depolarizing strength");

  CLI::App* single_cmd = add_state(add_common(app.add_subcommand(
      "single-estimate", "single-copy layered estimate of faf1")));
  single_cmd->add_option("--shots-per-layer", opt.shots_per_layer,
                         "shots collected per measurement layer");
  single_cmd->add_option("--delta", opt.delta, "confidence parameter");
  single_cmd->add_option("--depol", opt.depol, "global depolarizing strength");

  CLI::App* test_bell_cmd = add_state(add_common(app.add_subcommand(
      "test-bell", "one-sided two-copy gaussianity test")));
  test_bell_cmd->add_option("--epsilon", opt.epsilon, "distance parameter");
  test_bell_cmd->add_option("--delta", opt.delta, "failure probability");
  test_bell_cmd->add_option("--depol", opt.depol,
                            "global depolarizing strength");

  CLI::App* test_single_cmd = add_state(add_common(app.add_subcommand(
      "test-single", "single-copy gaussianity test")));
  test_single_cmd->add_option("--epsilon", opt.epsilon, "distance parameter");
  test_single_cmd->add_option("--delta", opt.delta, "failure probability");
  test_single_cmd->add_option("--depol", opt.depol,
                              "global depolarizing strength");

  CLI::App* sweep_theta_cmd = add_common(app.add_subcommand(
      "sweep-theta", "witness vs theta on the fixture circuit"));
  sweep_theta_cmd->add_option("--theta-steps", opt.theta_steps,
                              "grid points over [0, pi/2]");
  sweep_theta_cmd->add_option("--shots", opt.shots, "shots per grid point");
  sweep_theta_cmd->add_option("--noise-kind", opt.noise_kind,
                              "depolarizing, amplitude-damping, dephasing, "
                              "bit-flip");
  sweep_theta_cmd->add_option("--noise-p", opt.noise_p, "noise strength");
  sweep_theta_cmd->add_option("--placement", opt.placement,
                              "after_two_qubit_gate or after_layer");

  CLI::App* sweep_depol_cmd = add_state(add_common(app.add_subcommand(
      "sweep-depol", "closed-form witness curve under global depolarizing")));
  sweep_depol_cmd->add_option("--p-steps", opt.p_steps,
                              "grid points over [0, 1]");

  CLI::App* brickwork_cmd = add_common(app.add_subcommand(
      "brickwork", "random matchgate brickwork circuit from vacuum"));
  brickwork_cmd->add_option("--n", opt.n, "mode count (even)");
  brickwork_cmd->add_option("--depth", opt.depth, "layer count");
  brickwork_cmd->add_option("--g", opt.g, "matchgate strength");
  brickwork_cmd->add_option("--noise-kind", opt.noise_kind,
                            "depolarizing, amplitude-damping, dephasing, "
                            "bit-flip");
  brickwork_cmd->add_option("--noise-p", opt.noise_p, "noise strength");
  brickwork_cmd->add_option("--placement", opt.placement,
                            "after_two_qubit_gate or after_layer");
  brickwork_cmd->add_option("--circuit-out", opt.circuit_out,
                            "write the circuit JSON here");

  CLI::App* layers_cmd = add_common(
      app.add_subcommand("layers", "commuting measurement layer partition"));
  layers_cmd->add_option("--n", opt.n, "mode count")->required();

  CLI::App* stats_cmd = add_state(add_common(app.add_subcommand(
      "ensemble-stats", "sample statistics of faf1 over an ensemble")));
  stats_cmd->add_option("--count", opt.count, "number of draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    opt.has_seed = sub->count("--seed") > 0;
    if (!config_path.empty()) apply_config(opt, sub, config_path);

    Report rep(sub->get_name(), opt.format);
    int code = 0;
    if (sub == faf_cmd) code = cmd_faf(opt, rep);
    else if (sub == witness_cmd) code = cmd_witness(opt, rep);
    else if (sub == bell_cmd) code = cmd_bell_estimate(opt, rep);
    else if (sub == single_cmd) code = cmd_single_estimate(opt, rep);
    else if (sub == test_bell_cmd) code = cmd_test_bell(opt, rep);
    else if (sub == test_single_cmd) code = cmd_test_single(opt, rep);
    else if (sub == sweep_theta_cmd) code = cmd_sweep_theta(opt, rep);
    else if (sub == sweep_depol_cmd) code = cmd_sweep_depol(opt, rep);
    else if (sub == brickwork_cmd) code = cmd_brickwork(opt, rep);
    else if (sub == layers_cmd) code = cmd_layers(opt, rep);
    else if (sub == stats_cmd) code = cmd_ensemble_stats(opt, rep);
    else throw ContractError("unknown subcommand");

    write_output(opt.out, rep.render());
    return code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
