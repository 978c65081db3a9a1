#include "fafkit/statelib.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "fafkit/bell.hpp"

namespace faf {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

const char* ensemble_kind_name(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::Haar: return "haar";
    case EnsembleKind::SubsetPhase: return "subset_phase";
    case EnsembleKind::GaussianRandom: return "gaussian_random";
    case EnsembleKind::Cat: return "cat";
    case EnsembleKind::Ghz: return "ghz";
    case EnsembleKind::Defect: return "defect";
    case EnsembleKind::Basis: return "basis";
  }
  return "unknown";
}

Eigen::MatrixXd random_antisymmetric(int dim, Rng& rng) {
  if (dim < 2 || dim % 2 != 0)
    throw ContractError("random_antisymmetric: dimension must be even");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      m(i, j) = rng.normal();
      m(j, i) = -m(i, j);
    }
  return m;
}

PureState make_state(const EnsembleSpec& spec, Rng& rng) {
  const int n = spec.n;
  switch (spec.kind) {
    case EnsembleKind::Haar: {
      if (n < 1 || n > kMaxPureQubits) throw SizeError("make_state: bad n");
      Vec v(uint64_t{1} << n);
      for (Eigen::Index x = 0; x < v.size(); ++x)
        v(x) = cplx(rng.normal(), rng.normal());
      v /= v.norm();
      return PureState(n, std::move(v));
    }
    case EnsembleKind::SubsetPhase: {
      if (n < 1 || n > kMaxPureQubits) throw SizeError("make_state: bad n");
      if (spec.q < 0 || spec.q > n)
        throw ContractError("make_state: subset size q outside 0..n");
      const uint64_t dim = uint64_t{1} << n;
      const uint64_t support = uint64_t{1} << spec.q;
      // Uniform subset without replacement via partial Fisher-Yates.
      std::vector<uint64_t> idx(dim);
      for (uint64_t x = 0; x < dim; ++x) idx[x] = x;
      for (uint64_t i = 0; i < support; ++i) {
        const uint64_t j = i + rng.uniform_int(dim - i);
        std::swap(idx[i], idx[j]);
      }
      Vec v = Vec::Zero(dim);
      const double amp = 1.0 / std::sqrt(static_cast<double>(support));
      for (uint64_t i = 0; i < support; ++i)
        v(idx[i]) = rng.bernoulli(0.5) ? amp : -amp;
      return PureState(n, std::move(v));
    }
    case EnsembleKind::GaussianRandom: {
      GaussianParams params{random_antisymmetric(2 * n, rng), Parity::Even};
      return gaussian_pure(params);
    }
    case EnsembleKind::Cat: {
      if (n < 1 || n > kMaxPureQubits) throw SizeError("make_state: bad n");
      if (!(spec.eps2 >= 0.0 && spec.eps2 <= 1.0))
        throw ContractError("make_state: cat weight outside [0, 1]");
      Vec v = Vec::Zero(uint64_t{1} << n);
      v(0) = std::sqrt(1.0 - spec.eps2);
      v(v.size() - 1) += std::sqrt(spec.eps2);
      return PureState(n, std::move(v));
    }
    case EnsembleKind::Ghz: {
      EnsembleSpec ghz = spec;
      ghz.kind = EnsembleKind::Cat;
      ghz.eps2 = 0.5;
      return make_state(ghz, rng);
    }
    case EnsembleKind::Defect: {
      if (n < 4 || n > kMaxPureQubits)
        throw ContractError("make_state: defect needs 4 <= n <= cap");
      Vec v = Vec::Zero(uint64_t{1} << n);
      const double s = 1.0 / std::sqrt(2.0);
      v(0) = s;
      v(uint64_t{0xF} << (n - 4)) = s;  // first four qubits flipped
      return PureState(n, std::move(v));
    }
    case EnsembleKind::Basis:
      return PureState::basis_state(n, spec.basis_index);
  }
  throw ContractError("make_state: unknown ensemble kind");
}

double cat_faf1(int n, double eps2) {
  if (n < 3) throw ContractError("cat_faf1: closed form needs n >= 3");
  if (!(eps2 >= 0.0 && eps2 <= 1.0))
    throw ContractError("cat_faf1: weight outside [0, 1]");
  return 4.0 * n * eps2 * (1.0 - eps2);
}

std::vector<double> sample_ensemble_faf(const EnsembleSpec& spec, int count,
                                        Rng& rng) {
  if (count < 1) throw ContractError("sample_ensemble_faf: count < 1");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = faf_k(make_state(spec, rng), 1);
  return out;
}

MixedState global_depolarize(const PureState& psi, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ContractError("global_depolarize: p outside [0, 1]");
  if (psi.n > kMaxMixedQubits)
    throw SizeError("global_depolarize: density-matrix cap exceeded");
  const uint64_t dim = psi.dim();
  Mat rho = (1.0 - p) * (psi.amps * psi.amps.adjoint());
  rho += (p / static_cast<double>(dim)) * Mat::Identity(dim, dim);
  return MixedState::unchecked(psi.n, std::move(rho));
}

DepolPredictions depol_predictions(double r_psi, double p, int n) {
  if (n < 1) throw ContractError("depol_predictions: bad n");
  if (!(p >= 0.0 && p <= 1.0))
    throw ContractError("depol_predictions: p outside [0, 1]");
  if (!(r_psi >= -1e-9 && r_psi <= n + 1e-9))
    throw ContractError("depol_predictions: r_psi outside [0, n]");
  const double x = (1.0 - p) * (1.0 - p);
  const double dim = std::ldexp(1.0, n);
  DepolPredictions out;
  out.faf1 = n - x * r_psi;
  out.purity = (1.0 + (dim - 1.0) * x) / dim;
  out.witness = n * std::pow(1.0 + (dim - 1.0) * x, 1.0 / n) - n - x * r_psi;
  out.witness_lower = x * (n - r_psi);
  return out;
}

DepolPredictions depol_predictions(const PureState& psi, double p) {
  const double r = psi.n - faf_k(psi, 1);
  return depol_predictions(r, p, psi.n);
}

double haar_faf_mean(int n) {
  if (n < 1) throw ContractError("haar_faf_mean: bad n");
  const double dim = std::ldexp(1.0, n);
  return n - n * (2.0 * n - 1.0) / (dim + 1.0);
}

double subset_phase_faf_lower(int n, int q) {
  if (n < 1 || q < 0 || q > n)
    throw ContractError("subset_phase_faf_lower: bad arguments");
  const double raw = n - n * (2.0 * n - 1.0) / std::ldexp(1.0, q);
  return std::max(0.0, raw);
}

long nongaussian_gate_lower_bound(double faf1_target, int m) {
  if (m < 1) throw ContractError("nongaussian_gate_lower_bound: bad m");
  if (faf1_target < -1e-9)
    throw ContractError("nongaussian_gate_lower_bound: negative target");
  const double per_gate = 4.0 * m;
  // Tolerate float fuzz just above an exact multiple.
  return static_cast<long>(
      std::max(0.0, std::ceil(faf1_target / per_gate - 1e-9)));
}

// --- circuits ---------------------------------------------------------------

NoiseChannel NoiseSpec::channel() const {
  switch (kind) {
    case ChannelKind::Depolarizing: return NoiseChannel::depolarizing(strength);
    case ChannelKind::AmplitudeDamping:
      return NoiseChannel::amplitude_damping(strength);
    case ChannelKind::Dephasing: return NoiseChannel::dephasing(strength);
    case ChannelKind::BitFlip: return NoiseChannel::bit_flip(strength);
  }
  throw ContractError("NoiseSpec: unknown channel kind");
}

namespace {

Mat herm_exp_unitary(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success)
    throw Error("herm_exp_unitary: eigensolver failed");
  Vec ph(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < ph.size(); ++i)
    ph(i) = std::exp(cplx(0.0, -es.eigenvalues()(i)));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Mat rxx_gate(double phi) {
  Mat u = Mat::Zero(4, 4);
  const double c = std::cos(0.5 * phi);
  const cplx ms(0.0, -std::sin(0.5 * phi));
  u(0, 0) = u(1, 1) = u(2, 2) = u(3, 3) = c;
  u(0, 3) = u(3, 0) = u(1, 2) = u(2, 1) = ms;
  return u;
}

Mat rz_gate(double phi) {
  Mat u = Mat::Zero(2, 2);
  u(0, 0) = std::exp(cplx(0.0, -0.5 * phi));
  u(1, 1) = std::exp(cplx(0.0, 0.5 * phi));
  return u;
}

Mat rzz_gate(double th) {
  Mat u = Mat::Zero(4, 4);
  const cplx lo = std::exp(cplx(0.0, -0.5 * th));
  const cplx hi = std::exp(cplx(0.0, 0.5 * th));
  u(0, 0) = u(3, 3) = lo;
  u(1, 1) = u(2, 2) = hi;
  return u;
}

/// The six sorted Majorana index pairs of modes q0+1 and q1+1, lexicographic.
std::array<std::pair<int, int>, 6> matchgate_pairs(int q0, int q1) {
  std::array<int, 4> idx = {2 * q0 + 1, 2 * q0 + 2, 2 * q1 + 1, 2 * q1 + 2};
  std::sort(idx.begin(), idx.end());
  return {{{idx[0], idx[1]},
           {idx[0], idx[2]},
           {idx[0], idx[3]},
           {idx[1], idx[2]},
           {idx[1], idx[3]},
           {idx[2], idx[3]}}};
}

/// 4x4 matchgate unitary for an adjacent pair (q0, q0+1), where all six
/// bilinears act locally.
Mat matchgate_local_unitary(const CircuitOp& op) {
  const auto pairs = matchgate_pairs(0, 1);
  Mat h = Mat::Zero(4, 4);
  const double scale = op.g / std::sqrt(6.0);
  for (int k = 0; k < 6; ++k) {
    const PauliString b = majorana_bilinear(pairs[k].first, pairs[k].second, 2);
    const uint64_t flip = b.flip_mask();
    for (uint64_t x = 0; x < 4; ++x)
      h(x ^ flip, x) += scale * op.couplings[k] * b.coeff(x);
  }
  return herm_exp_unitary(h);
}

/// Full-register matchgate unitary; needed when the Jordan-Wigner strings
/// leave the two-qubit block (non-adjacent or wrap-around pairs).
Mat matchgate_full_unitary(const CircuitOp& op, int n) {
  const auto pairs = matchgate_pairs(op.q0, op.q1);
  const uint64_t dim = uint64_t{1} << n;
  Mat h = Mat::Zero(dim, dim);
  const double scale = op.g / std::sqrt(6.0);
  for (int k = 0; k < 6; ++k) {
    const PauliString b = majorana_bilinear(pairs[k].first, pairs[k].second, n);
    const uint64_t flip = b.flip_mask();
    for (uint64_t x = 0; x < dim; ++x)
      h(x ^ flip, x) += scale * op.couplings[k] * b.coeff(x);
  }
  return herm_exp_unitary(h);
}

void check_op(const CircuitOp& op, int n) {
  auto in_range = [n](int q) { return q >= 0 && q < n; };
  if (op.kind == CircuitOp::Kind::Rz) {
    if (!in_range(op.q0) || op.q1 != -1)
      throw ContractError("circuit op: rz takes one qubit");
    return;
  }
  if (!in_range(op.q0) || !in_range(op.q1) || op.q0 == op.q1)
    throw ContractError("circuit op: needs two distinct qubits in range");
}

bool is_two_qubit(const CircuitOp& op) {
  return op.kind != CircuitOp::Kind::Rz;
}

template <typename State>
void apply_op(State& state, const CircuitOp& op) {
  switch (op.kind) {
    case CircuitOp::Kind::Rxx: {
      const int t[2] = {op.q0, op.q1};
      apply_unitary(state, rxx_gate(op.angle), t);
      return;
    }
    case CircuitOp::Kind::Rz: {
      const int t[1] = {op.q0};
      apply_unitary(state, rz_gate(op.angle), t);
      return;
    }
    case CircuitOp::Kind::Rzz: {
      const int t[2] = {op.q0, op.q1};
      apply_unitary(state, rzz_gate(op.angle), t);
      return;
    }
    case CircuitOp::Kind::Matchgate: {
      if (op.q1 == op.q0 + 1) {
        const int t[2] = {op.q0, op.q1};
        apply_unitary(state, matchgate_local_unitary(op), t);
      } else {
        const Mat u = matchgate_full_unitary(op, state.n);
        if constexpr (std::is_same_v<State, PureState>) {
          state.amps = u * state.amps;
        } else {
          state.rho = u * state.rho * u.adjoint();
        }
      }
      return;
    }
  }
  throw ContractError("circuit op: unknown kind");
}

void check_spec(const CircuitSpec& spec) {
  if (spec.n < 1) throw ContractError("circuit: bad mode count");
  for (const auto& op : spec.ops) check_op(op, spec.n);
  int prev = 0;
  for (int e : spec.layer_ends) {
    if (e <= prev || e > static_cast<int>(spec.ops.size()))
      throw ContractError("circuit: layer boundaries must ascend within ops");
    prev = e;
  }
  if (spec.noise &&
      !(spec.noise->strength >= 0.0 && spec.noise->strength <= 1.0))
    throw ContractError("circuit: noise strength outside [0, 1]");
}

}  // namespace

CircuitSpec brickwork_matchgate(int n, int depth, double g, Rng& rng) {
  if (n < 2 || n % 2 != 0 || n > kMaxPureQubits)
    throw ContractError("brickwork_matchgate: n must be even and in range");
  if (depth < 0) throw ContractError("brickwork_matchgate: negative depth");
  CircuitSpec spec;
  spec.n = n;
  for (int d = 0; d < depth; ++d) {
    const int start = d % 2;  // staggered bricks, periodic wrap on odd rows
    for (int q = start; q < n; q += 2) {
      CircuitOp op;
      op.kind = CircuitOp::Kind::Matchgate;
      op.q0 = q;
      op.q1 = (q + 1) % n;
      op.g = g;
      for (double& c : op.couplings) c = rng.normal();
      spec.ops.push_back(op);
    }
    spec.layer_ends.push_back(static_cast<int>(spec.ops.size()));
  }
  return spec;
}

PureState run_circuit_pure(const CircuitSpec& spec, const PureState& initial) {
  check_spec(spec);
  if (spec.noise)
    throw ContractError("run_circuit_pure: spec carries noise");
  if (initial.n != spec.n)
    throw ContractError("run_circuit_pure: qubit count mismatch");
  PureState state = initial;
  for (const auto& op : spec.ops) apply_op(state, op);
  return state;
}

MixedState run_circuit(const CircuitSpec& spec, const MixedState& initial) {
  check_spec(spec);
  if (initial.n != spec.n)
    throw ContractError("run_circuit: qubit count mismatch");
  MixedState state = initial;
  std::optional<NoiseChannel> ch;
  if (spec.noise) ch = spec.noise->channel();
  const bool per_gate =
      spec.noise &&
      spec.noise->placement == NoiseSpec::Placement::AfterTwoQubitGate;
  const bool per_layer =
      spec.noise && spec.noise->placement == NoiseSpec::Placement::AfterLayer;
  size_t next_end = 0;
  for (size_t i = 0; i < spec.ops.size(); ++i) {
    const auto& op = spec.ops[i];
    apply_op(state, op);
    if (per_gate && is_two_qubit(op)) {
      apply_channel(state, *ch, op.q0);
      apply_channel(state, *ch, op.q1);
    }
    if (per_layer) {
      while (next_end < spec.layer_ends.size() &&
             spec.layer_ends[next_end] == static_cast<int>(i) + 1) {
        for (int q = 0; q < spec.n; ++q) apply_channel(state, *ch, q);
        ++next_end;
      }
    }
  }
  // Ops past the last recorded boundary form an implicit final layer.
  if (per_layer && !spec.ops.empty() &&
      (spec.layer_ends.empty() ||
       spec.layer_ends.back() < static_cast<int>(spec.ops.size())))
    for (int q = 0; q < spec.n; ++q) apply_channel(state, *ch, q);
  return state;
}

MixedState run_circuit(const CircuitSpec& spec, const PureState& initial) {
  return run_circuit(spec, MixedState::from_pure(initial));
}

CircuitSpec theta_fixture_circuit(double theta,
                                  std::optional<NoiseSpec> noise) {
  CircuitSpec spec;
  spec.n = 4;
  auto rxx = [](int a, int b, double phi) {
    CircuitOp op;
    op.kind = CircuitOp::Kind::Rxx;
    op.q0 = a;
    op.q1 = b;
    op.angle = phi;
    return op;
  };
  auto rz = [](int q, double phi) {
    CircuitOp op;
    op.kind = CircuitOp::Kind::Rz;
    op.q0 = q;
    op.angle = phi;
    return op;
  };
  CircuitOp knob;
  knob.kind = CircuitOp::Kind::Rzz;
  knob.q0 = 1;
  knob.q1 = 2;
  knob.angle = theta;

  spec.ops.push_back(rxx(0, 1, 0.5 * kPi));
  spec.ops.push_back(rxx(2, 3, 0.5 * kPi));
  spec.layer_ends.push_back(2);
  spec.ops.push_back(knob);
  spec.layer_ends.push_back(3);
  spec.ops.push_back(rxx(1, 2, 0.5 * kPi));
  for (int q = 0; q < 4; ++q) spec.ops.push_back(rz(q, 0.5 * kPi));
  spec.layer_ends.push_back(static_cast<int>(spec.ops.size()));
  spec.noise = noise;
  return spec;
}

double theta_fixture_witness(double theta) {
  const double s = std::sin(theta);
  return 4.0 * s * s;
}

std::vector<SweepRow> theta_sweep_experiment(const std::vector<double>& thetas,
                                             std::optional<NoiseSpec> noise,
                                             long shots, Rng& rng) {
  if (thetas.empty()) throw ContractError("theta_sweep: no angles");
  std::vector<SweepRow> rows;
  rows.reserve(thetas.size());
  for (double theta : thetas) {
    const CircuitSpec spec = theta_fixture_circuit(theta, noise);
    const MixedState rho = run_circuit(spec, PureState::basis_state(4, 0));
    Rng child = rng.split();
    SweepRow row;
    row.theta = theta;
    row.p = noise ? noise->strength : 0.0;
    row.witness_exact = witness_faf(rho);
    const EstimateReport est = estimate_witness_bell(rho, shots, 0.05, child);
    row.witness_est = est.mean;
    row.est_std_error = est.std_error;
    row.shots = shots;
    row.seed = child.seed();
    rows.push_back(row);
  }
  return rows;
}

// --- serialization ----------------------------------------------------------

namespace {

using nlohmann::json;

const char* op_kind_name(CircuitOp::Kind k) {
  switch (k) {
    case CircuitOp::Kind::Matchgate: return "matchgate";
    case CircuitOp::Kind::Rxx: return "rxx";
    case CircuitOp::Kind::Rz: return "rz";
    case CircuitOp::Kind::Rzz: return "rzz";
  }
  return "unknown";
}

CircuitOp::Kind op_kind_from(const std::string& s) {
  if (s == "matchgate") return CircuitOp::Kind::Matchgate;
  if (s == "rxx") return CircuitOp::Kind::Rxx;
  if (s == "rz") return CircuitOp::Kind::Rz;
  if (s == "rzz") return CircuitOp::Kind::Rzz;
  throw ContractError("circuit json: unknown op kind '" + s + "'");
}

ChannelKind channel_kind_from(const std::string& s) {
  if (s == "depolarizing") return ChannelKind::Depolarizing;
  if (s == "amplitude_damping") return ChannelKind::AmplitudeDamping;
  if (s == "dephasing") return ChannelKind::Dephasing;
  if (s == "bit_flip") return ChannelKind::BitFlip;
  throw ContractError("circuit json: unknown channel kind '" + s + "'");
}

}  // namespace

std::string circuit_to_json(const CircuitSpec& spec) {
  json j;
  j["n"] = spec.n;
  j["ops"] = json::array();
  for (const auto& op : spec.ops) {
    json o;
    o["kind"] = op_kind_name(op.kind);
    if (op.kind == CircuitOp::Kind::Rz)
      o["qubits"] = {op.q0};
    else
      o["qubits"] = {op.q0, op.q1};
    if (op.kind == CircuitOp::Kind::Matchgate) {
      o["g"] = op.g;
      o["couplings"] = op.couplings;
    } else {
      o["angle"] = op.angle;
    }
    j["ops"].push_back(o);
  }
  j["layer_ends"] = spec.layer_ends;
  if (spec.noise) {
    j["noise"] = {
        {"kind", NoiseChannel::kind_name(spec.noise->kind)},
        {"strength", spec.noise->strength},
        {"placement",
         spec.noise->placement == NoiseSpec::Placement::AfterTwoQubitGate
             ? "after_two_qubit_gate"
             : "after_layer"},
    };
  }
  return j.dump(2);
}

CircuitSpec circuit_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractError(std::string("circuit json: parse error: ") + e.what());
  }
  try {
    CircuitSpec spec;
    spec.n = j.at("n").get<int>();
    for (const auto& o : j.at("ops")) {
      CircuitOp op;
      op.kind = op_kind_from(o.at("kind").get<std::string>());
      const auto qs = o.at("qubits").get<std::vector<int>>();
      if (op.kind == CircuitOp::Kind::Rz) {
        if (qs.size() != 1)
          throw ContractError("circuit json: rz takes one qubit");
        op.q0 = qs[0];
      } else {
        if (qs.size() != 2)
          throw ContractError("circuit json: op takes two qubits");
        op.q0 = qs[0];
        op.q1 = qs[1];
      }
      if (op.kind == CircuitOp::Kind::Matchgate) {
        op.g = o.at("g").get<double>();
        const auto cs = o.at("couplings").get<std::vector<double>>();
        if (cs.size() != 6)
          throw ContractError("circuit json: matchgate needs 6 couplings");
        std::copy(cs.begin(), cs.end(), op.couplings.begin());
      } else {
        op.angle = o.at("angle").get<double>();
      }
      spec.ops.push_back(op);
    }
    if (j.contains("layer_ends"))
      spec.layer_ends = j.at("layer_ends").get<std::vector<int>>();
    if (j.contains("noise")) {
      NoiseSpec ns;
      ns.kind = channel_kind_from(j.at("noise").at("kind").get<std::string>());
      ns.strength = j.at("noise").at("strength").get<double>();
      const auto pl = j.at("noise").at("placement").get<std::string>();
      if (pl == "after_two_qubit_gate")
        ns.placement = NoiseSpec::Placement::AfterTwoQubitGate;
      else if (pl == "after_layer")
        ns.placement = NoiseSpec::Placement::AfterLayer;
      else
        throw ContractError("circuit json: unknown noise placement");
      spec.noise = ns;
    }
    check_spec(spec);
    return spec;
  } catch (const json::exception& e) {
    throw ContractError(std::string("circuit json: bad schema: ") + e.what());
  }
}

}  // namespace faf
