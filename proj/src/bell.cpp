#include "fafkit/bell.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace faf {

namespace {

constexpr size_t kPairCacheBudget = size_t{1} << 28;  // bytes

void check_bell_modes(int n) {
  if (n < 1) throw ContractError("bell: need at least 1 mode");
  if (2 * n > kMaxBellJointQubits)
    throw SizeError("bell: two-copy register exceeds " +
                    std::to_string(kMaxBellJointQubits) + " qubits");
}

/// q = (1/2) sum_a g_a computed directly from the bits.
int bell_q(uint32_t u, uint32_t v, int n) {
  int sum = 0;
  int pref = 0;  // parity of v_0..v_{j-1}
  for (int j = 0; j < n; ++j) {
    const int uj = (u >> j) & 1;
    const int vj = (v >> j) & 1;
    sum += ((uj + pref) & 1) ? -1 : +1;        // g_{2j+1}
    sum -= ((uj + vj + pref) & 1) ? -1 : +1;   // g_{2j+2}
    pref ^= vj;
  }
  return sum / 2;
}

/// Transform two copies into the Bell measurement basis: per mode j,
/// CNOT(copy1_j -> copy2_j) then H(copy1_j), acting on a 2n-qubit register
/// with copy 1 on qubits 0..n-1.
void bell_circuit(Vec& joint, int n) {
  Mat cnot = Mat::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
  Mat h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  for (int j = 0; j < n; ++j) {
    const int pair[2] = {j, n + j};
    apply_gate_vec(joint, 2 * n, cnot, pair);
    const int one[1] = {j};
    apply_gate_vec(joint, 2 * n, h, one);
  }
}

/// CDF of outcome probabilities for two given pure copies.
std::vector<double> joint_cdf(const Vec& a, const Vec& b, int n) {
  const uint64_t da = uint64_t{1} << n;
  Vec joint(da * da);
  for (uint64_t ia = 0; ia < da; ++ia)
    for (uint64_t ib = 0; ib < da; ++ib) joint(ia * da + ib) = a(ia) * b(ib);
  bell_circuit(joint, n);
  std::vector<double> cdf(joint.size());
  double acc = 0.0;
  for (Eigen::Index x = 0; x < joint.size(); ++x) {
    acc += std::norm(joint(x));
    cdf[x] = acc;
  }
  return cdf;
}

uint64_t draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double r = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
  return static_cast<uint64_t>(
      std::min<std::ptrdiff_t>(it - cdf.begin(),
                               static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

}  // namespace

std::vector<int> bits_to_g(uint32_t u, uint32_t v, int n) {
  check_bell_modes(n);
  std::vector<int> g(2 * n);
  int pref = 0;
  for (int j = 0; j < n; ++j) {
    const int uj = (u >> j) & 1;
    const int vj = (v >> j) & 1;
    g[2 * j] = ((uj + pref) & 1) ? -1 : +1;
    g[2 * j + 1] = -(((uj + vj + pref) & 1) ? -1 : +1);
    pref ^= vj;
  }
  return g;
}

BellSample make_bell_sample(uint32_t u, uint32_t v, int n) {
  check_bell_modes(n);
  BellSample s;
  s.u = u;
  s.v = v;
  s.q = bell_q(u, v, n);
  s.lambda = 2.0 * static_cast<double>(s.q) * static_cast<double>(s.q);
  s.swap_sign = (std::popcount(u & v) & 1) ? -1 : +1;
  return s;
}

BellSampler::BellSampler(const PureState& psi) : n_(psi.n) {
  check_bell_modes(n_);
  cdf_ = joint_cdf(psi.amps, psi.amps, n_);
}

BellSampler::BellSampler(const MixedState& rho) : n_(rho.n) {
  check_bell_modes(n_);
  comps_ = eig_decompose(rho);
  comp_cdf_.resize(comps_.size());
  double acc = 0.0;
  for (size_t i = 0; i < comps_.size(); ++i) {
    acc += comps_[i].first;
    comp_cdf_[i] = acc;
  }
}

std::vector<double>& BellSampler::pair_cdf(size_t i, size_t j) {
  const uint32_t key = static_cast<uint32_t>(i * comps_.size() + j);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  std::vector<double> cdf = joint_cdf(comps_[i].second.amps,
                                      comps_[j].second.amps, n_);
  const size_t bytes = cdf.size() * sizeof(double);
  if (cache_bytes_ + bytes <= kPairCacheBudget) {
    cache_bytes_ += bytes;
    return cache_.emplace(key, std::move(cdf)).first->second;
  }
  scratch_ = std::move(cdf);
  return scratch_;
}

BellSample BellSampler::decode(uint64_t x) const {
  // Qubit j of the register is bit 2n-1-j of the index; copy 2 starts at
  // qubit n. Repack into per-mode bit positions (mode j -> bit j).
  uint32_t u = 0, v = 0;
  for (int j = 0; j < n_; ++j) {
    u |= static_cast<uint32_t>((x >> (2 * n_ - 1 - j)) & 1u) << j;
    v |= static_cast<uint32_t>((x >> (n_ - 1 - j)) & 1u) << j;
  }
  return make_bell_sample(u, v, n_);
}

BellSample BellSampler::sample(Rng& rng) {
  if (!cdf_.empty()) return decode(draw_from_cdf(cdf_, rng));
  const double r1 = rng.uniform() * comp_cdf_.back();
  const size_t i = std::upper_bound(comp_cdf_.begin(), comp_cdf_.end(), r1) -
                   comp_cdf_.begin();
  const double r2 = rng.uniform() * comp_cdf_.back();
  const size_t j = std::upper_bound(comp_cdf_.begin(), comp_cdf_.end(), r2) -
                   comp_cdf_.begin();
  return decode(draw_from_cdf(
      pair_cdf(std::min(i, comps_.size() - 1), std::min(j, comps_.size() - 1)),
      rng));
}

BellSample bell_sample(const PureState& psi, Rng& rng) {
  BellSampler s(psi);
  return s.sample(rng);
}

BellSample bell_sample(const MixedState& rho, Rng& rng) {
  BellSampler s(rho);
  return s.sample(rng);
}

namespace {

template <typename State>
BellRecord draw_record_impl(const State& state, long n_shots, Rng& rng) {
  if (n_shots < 1) throw ContractError("draw_bell_record: need >= 1 shot");
  BellSampler sampler(state);
  BellRecord rec;
  rec.n = sampler.n_modes();
  rec.seed = rng.seed();
  rec.samples.reserve(static_cast<size_t>(n_shots));
  for (long s = 0; s < n_shots; ++s) rec.samples.push_back(sampler.sample(rng));
  return rec;
}

std::vector<double> lambdas(const BellRecord& rec) {
  std::vector<double> xs(rec.samples.size());
  for (size_t i = 0; i < xs.size(); ++i) xs[i] = rec.samples[i].lambda;
  return xs;
}

}  // namespace

BellRecord draw_bell_record(const PureState& psi, long n_shots, Rng& rng) {
  return draw_record_impl(psi, n_shots, rng);
}

BellRecord draw_bell_record(const MixedState& rho, long n_shots, Rng& rng) {
  return draw_record_impl(rho, n_shots, rng);
}

EstimateReport estimate_faf1(const BellRecord& rec) {
  return mean_report(lambdas(rec), rec.seed);
}

EstimateReport estimate_faf1(const BellRecord& rec, double delta) {
  return median_of_means_report(lambdas(rec), mom_batch_count(delta), rec.seed);
}

EstimateReport estimate_purity(const BellRecord& rec) {
  std::vector<double> xs(rec.samples.size());
  for (size_t i = 0; i < xs.size(); ++i)
    xs[i] = static_cast<double>(rec.samples[i].swap_sign);
  return mean_report(xs, rec.seed);
}

EstimateReport estimate_coherence(const BellRecord& rec) {
  std::vector<double> xs(rec.samples.size());
  for (size_t i = 0; i < xs.size(); ++i)
    xs[i] = static_cast<double>(rec.samples[i].swap_sign) -
            (rec.samples[i].v_all_zero() ? 1.0 : 0.0);
  return mean_report(xs, rec.seed);
}

EstimateReport estimate_witness(const BellRecord& rec, double delta) {
  const EstimateReport faf = estimate_faf1(rec, delta);
  const EstimateReport pur = estimate_purity(rec);
  const int n = rec.n;
  const double floor = std::pow(2.0, -n);
  double p = pur.mean;
  std::optional<std::string> warning;
  if (p < floor || p > 1.0) {
    p = std::clamp(p, floor, 1.0);
    warning = "purity estimate clamped to [2^-n, 1] before taking the n-th root";
  }
  const double root = std::pow(p, 1.0 / n);
  EstimateReport w;
  w.mean = faf.mean - 2.0 * n * (1.0 - root);
  // First-order error propagation through p -> 2n(1 - p^{1/n}).
  const double dp = 2.0 * std::pow(p, 1.0 / n - 1.0);
  w.std_error = std::sqrt(faf.std_error * faf.std_error +
                          dp * dp * pur.std_error * pur.std_error);
  w.n_shots = faf.n_shots;
  w.n_batches = faf.n_batches;
  w.seed = rec.seed;
  w.warning = warning;
  return w;
}

EstimateReport estimate_faf1_bell(const PureState& psi, long n_shots,
                                  double delta, Rng& rng) {
  return estimate_faf1(draw_bell_record(psi, n_shots, rng), delta);
}

EstimateReport estimate_faf1_bell(const MixedState& rho, long n_shots,
                                  double delta, Rng& rng) {
  return estimate_faf1(draw_bell_record(rho, n_shots, rng), delta);
}

EstimateReport estimate_purity_bell(const MixedState& rho, long n_shots,
                                    Rng& rng) {
  return estimate_purity(draw_bell_record(rho, n_shots, rng));
}

EstimateReport estimate_witness_bell(const MixedState& rho, long n_shots,
                                     double delta, Rng& rng) {
  return estimate_witness(draw_bell_record(rho, n_shots, rng), delta);
}

EstimateReport estimate_coherence_bell(const MixedState& rho, long n_shots,
                                       Rng& rng) {
  return estimate_coherence(draw_bell_record(rho, n_shots, rng));
}

long bell_test_shot_budget(int n, double eps, double delta) {
  check_bell_modes(n);
  if (!(eps > 0.0)) throw ContractError("bell test: eps must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw ContractError("bell test: delta must be in (0, 1)");
  const double raw = (static_cast<double>(n) * n / (eps * eps)) *
                     std::log(1.0 / delta);
  return static_cast<long>(std::ceil(raw));
}

namespace {

template <typename State>
TestVerdict bell_test_impl(const State& state, double eps, double delta,
                           Rng& rng) {
  BellSampler sampler(state);
  TestVerdict verdict;
  verdict.epsilon = eps;
  verdict.delta = delta;
  verdict.n_shots_budget = bell_test_shot_budget(sampler.n_modes(), eps, delta);
  for (long s = 0; s < verdict.n_shots_budget; ++s) {
    const BellSample shot = sampler.sample(rng);
    if (shot.lambda != 0.0) {
      verdict.accept = false;
      verdict.n_shots_used = s + 1;
      verdict.evidence = shot;
      return verdict;
    }
  }
  verdict.accept = true;
  verdict.n_shots_used = verdict.n_shots_budget;
  return verdict;
}

}  // namespace

TestVerdict bell_gaussianity_test(const PureState& psi, double eps,
                                  double delta, Rng& rng) {
  return bell_test_impl(psi, eps, delta, rng);
}

TestVerdict bell_gaussianity_test(const MixedState& rho, double eps,
                                  double delta, Rng& rng) {
  return bell_test_impl(rho, eps, delta, rng);
}

void write_bell_record(std::ostream& os, const BellRecord& rec) {
  os << "# fafkit bell record v1\n";
  os << "# n=" << rec.n << "\n";
  os << "seed,shot,u_hex,v_hex,lambda,swap\n";
  for (size_t i = 0; i < rec.samples.size(); ++i) {
    const BellSample& s = rec.samples[i];
    os << rec.seed << "," << i << "," << std::hex << s.u << "," << s.v
       << std::dec << "," << s.lambda << "," << s.swap_sign << "\n";
  }
}

BellRecord read_bell_record(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# fafkit bell record", 0) != 0)
    throw ContractError("bell record: bad magic line");
  if (!std::getline(is, line) || line.rfind("# n=", 0) != 0)
    throw ContractError("bell record: missing mode count");
  BellRecord rec;
  rec.n = std::stoi(line.substr(4));
  check_bell_modes(rec.n);
  if (!std::getline(is, line) || line != "seed,shot,u_hex,v_hex,lambda,swap")
    throw ContractError("bell record: bad header row");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    auto next = [&]() {
      if (!std::getline(row, field, ','))
        throw ContractError("bell record: short row");
      return field;
    };
    const uint64_t seed = std::stoull(next());
    next();  // shot index, implied by position
    const uint32_t u = static_cast<uint32_t>(std::stoul(next(), nullptr, 16));
    const uint32_t v = static_cast<uint32_t>(std::stoul(next(), nullptr, 16));
    const double lambda = std::stod(next());
    const int swap_sign = std::stoi(next());
    if (rec.samples.empty()) rec.seed = seed;
    BellSample s = make_bell_sample(u, v, rec.n);
    if (s.lambda != lambda || s.swap_sign != swap_sign)
      throw ContractError("bell record: derived fields disagree with bits");
    rec.samples.push_back(s);
  }
  if (rec.samples.empty()) throw ContractError("bell record: no samples");
  return rec;
}

}  // namespace faf
