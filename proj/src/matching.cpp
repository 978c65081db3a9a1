#include "fafkit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace faf {

std::vector<MeasurementLayer> build_layers(int n) {
  if (n < 1 || n > 32) throw ContractError("build_layers: bad mode count");
  const int m = 2 * n - 1;
  auto wrap = [m](int x) { return 1 + (((x - 1) % m) + m) % m; };
  std::vector<MeasurementLayer> layers;
  layers.reserve(m);
  for (int l = 1; l <= m; ++l) {
    MeasurementLayer layer;
    layer.index = l;
    layer.pairs.emplace_back(l, 2 * n);
    for (int j = 1; j <= n - 1; ++j) {
      const int a = wrap(l + j), b = wrap(l - j);
      layer.pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
    for (const auto& [a, b] : layer.pairs)
      layer.observables.push_back(majorana_bilinear(a, b, n));
    layers.push_back(std::move(layer));
  }
  return layers;
}

namespace {

std::vector<int8_t> sample_layer_pure(PureState psi,
                                      const MeasurementLayer& layer,
                                      Rng& rng) {
  std::vector<int8_t> out(layer.observables.size());
  for (size_t e = 0; e < layer.observables.size(); ++e)
    out[e] = static_cast<int8_t>(measure_pauli(psi, layer.observables[e], rng));
  return out;
}

}  // namespace

std::vector<int8_t> sample_layer(const PureState& psi,
                                 const MeasurementLayer& layer, Rng& rng) {
  return sample_layer_pure(psi, layer, rng);
}

std::vector<int8_t> sample_layer(const MixedState& rho,
                                 const MeasurementLayer& layer, Rng& rng) {
  // Drawing a spectral component and measuring it reproduces the joint
  // outcome distribution of the mixture.
  SingleCopySampler sampler(rho);
  const LayerShotMatrix one = sampler.collect(layer, 1, rng);
  return std::vector<int8_t>(one.data.begin(), one.data.end());
}

SingleCopySampler::SingleCopySampler(const PureState& psi) : n_(psi.n) {
  comps_.emplace_back(1.0, psi);
  comp_cdf_.push_back(1.0);
}

SingleCopySampler::SingleCopySampler(const MixedState& rho) : n_(rho.n) {
  comps_ = eig_decompose(rho);
  double acc = 0.0;
  for (const auto& [p, v] : comps_) {
    acc += p;
    comp_cdf_.push_back(acc);
  }
}

LayerShotMatrix SingleCopySampler::collect(const MeasurementLayer& layer,
                                           long n_shots, Rng& rng) {
  if (n_shots < 1) throw ContractError("collect: need >= 1 shot");
  LayerShotMatrix mat;
  mat.layer_index = layer.index;
  mat.n_obs = static_cast<int>(layer.observables.size());
  mat.n_shots = n_shots;
  mat.data.resize(static_cast<size_t>(n_shots) * mat.n_obs);
  for (long s = 0; s < n_shots; ++s) {
    size_t i = 0;
    if (comps_.size() > 1) {
      const double r = rng.uniform() * comp_cdf_.back();
      i = std::upper_bound(comp_cdf_.begin(), comp_cdf_.end(), r) -
          comp_cdf_.begin();
      i = std::min(i, comps_.size() - 1);
    }
    PureState copy = comps_[i].second;
    for (int e = 0; e < mat.n_obs; ++e)
      mat.data[static_cast<size_t>(s) * mat.n_obs + e] = static_cast<int8_t>(
          measure_pauli(copy, layer.observables[e], rng));
  }
  return mat;
}

double u_statistic(const LayerShotMatrix& shots) {
  const long m = shots.n_shots;
  if (m < 2) throw ContractError("u_statistic: need >= 2 shots");
  double total = 0.0;
  for (int e = 0; e < shots.n_obs; ++e) {
    double col = 0.0;
    for (long s = 0; s < m; ++s) col += shots.at(s, e);
    total += col * col;
  }
  const double mm = static_cast<double>(m);
  return (total - mm * shots.n_obs) / (mm * (mm - 1.0));
}

double faf1_point_estimate(const std::vector<LayerShotMatrix>& per_layer) {
  const int m = static_cast<int>(per_layer.size());
  if (m < 1 || m % 2 == 0)
    throw ContractError("faf1_point_estimate: layer count must be 2n-1");
  const int n = (m + 1) / 2;
  double sum = 0.0;
  for (const auto& mat : per_layer) sum += u_statistic(mat);
  return static_cast<double>(n) - sum;
}

long single_copy_shot_budget(int n, double eta) {
  if (n < 1) throw ContractError("single_copy_shot_budget: bad mode count");
  if (!(eta > 0.0)) throw ContractError("single_copy_shot_budget: eta <= 0");
  return static_cast<long>(
      std::ceil(24.0 * static_cast<double>(n) * n / (eta * eta)));
}

namespace {

EstimateReport estimate_single_impl(SingleCopySampler& sampler,
                                    long shots_per_layer, double delta,
                                    Rng& rng) {
  if (shots_per_layer < 2)
    throw ContractError("estimate_faf1_single: need >= 2 shots per layer");
  const auto layers = build_layers(sampler.n_modes());
  const int reps = mom_batch_count(delta);
  std::vector<double> rep_estimates(reps);
  for (int r = 0; r < reps; ++r) {
    std::vector<LayerShotMatrix> per_layer;
    per_layer.reserve(layers.size());
    for (const auto& layer : layers)
      per_layer.push_back(sampler.collect(layer, shots_per_layer, rng));
    rep_estimates[r] = faf1_point_estimate(per_layer);
  }
  EstimateReport rep;
  rep.mean = median(rep_estimates);
  rep.std_error = std::sqrt(sample_variance(rep_estimates) /
                            static_cast<double>(reps));
  rep.n_shots = static_cast<long>(reps) *
                static_cast<long>(layers.size()) * shots_per_layer;
  rep.n_batches = reps;
  rep.seed = rng.seed();
  rep.batch_means = std::move(rep_estimates);
  return rep;
}

TestVerdict single_test_impl(SingleCopySampler& sampler, double eps,
                             double delta, Rng& rng) {
  if (!(eps > 0.0)) throw ContractError("single_copy_test: eps <= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw ContractError("single_copy_test: delta must be in (0, 1)");
  const double eta = 0.5 * eps * eps;  // target accuracy
  const long shots = single_copy_shot_budget(sampler.n_modes(), eta);
  EstimateReport est = estimate_single_impl(sampler, shots, delta, rng);
  TestVerdict verdict;
  verdict.epsilon = eps;
  verdict.delta = delta;
  verdict.n_shots_budget = est.n_shots;
  verdict.n_shots_used = est.n_shots;
  // Accept below the midpoint of the 0 vs 2 eps^2 gap; accuracy eta leaves
  // margin eps^2/2 on both sides.
  verdict.accept = est.mean < eps * eps;
  verdict.details = std::move(est);
  return verdict;
}

template <typename State>
EstimateReport rand_pair_impl(const State& state, long n_trials, Rng& rng) {
  if (n_trials < 1) throw ContractError("randomized_pair_estimate: no trials");
  const int n = state.n;
  const CovarianceMatrix gamma = covariance(state);
  std::vector<double> exps;  // <B_ab> for a < b, row-major
  exps.reserve(static_cast<size_t>(n) * (2 * n - 1));
  for (int a = 1; a <= 2 * n; ++a)
    for (int b = a + 1; b <= 2 * n; ++b)
      exps.push_back(gamma.gamma(a - 1, b - 1));
  const double n_pairs = static_cast<double>(exps.size());
  std::vector<double> xs(static_cast<size_t>(n_trials));
  for (long t = 0; t < n_trials; ++t) {
    const double mean = exps[rng.uniform_int(exps.size())];
    const double p_plus = 0.5 * (1.0 + mean);
    const int x = rng.bernoulli(p_plus) ? 1 : -1;
    const int y = rng.bernoulli(p_plus) ? 1 : -1;
    xs[static_cast<size_t>(t)] = static_cast<double>(n) - n_pairs * x * y;
  }
  return mean_report(xs, rng.seed());
}

}  // namespace

EstimateReport estimate_faf1_single(const PureState& psi, long shots_per_layer,
                                    double delta, Rng& rng) {
  SingleCopySampler sampler(psi);
  return estimate_single_impl(sampler, shots_per_layer, delta, rng);
}

EstimateReport estimate_faf1_single(const MixedState& rho,
                                    long shots_per_layer, double delta,
                                    Rng& rng) {
  SingleCopySampler sampler(rho);
  return estimate_single_impl(sampler, shots_per_layer, delta, rng);
}

TestVerdict single_copy_test(const PureState& psi, double eps, double delta,
                             Rng& rng) {
  SingleCopySampler sampler(psi);
  return single_test_impl(sampler, eps, delta, rng);
}

TestVerdict single_copy_test(const MixedState& rho, double eps, double delta,
                             Rng& rng) {
  SingleCopySampler sampler(rho);
  return single_test_impl(sampler, eps, delta, rng);
}

EstimateReport randomized_pair_estimate(const PureState& psi, long n_trials,
                                        Rng& rng) {
  return rand_pair_impl(psi, n_trials, rng);
}

EstimateReport randomized_pair_estimate(const MixedState& rho, long n_trials,
                                        Rng& rng) {
  return rand_pair_impl(rho, n_trials, rng);
}

void write_layer_shots_csv(std::ostream& os,
                           const std::vector<LayerShotMatrix>& per_layer) {
  os << "layer,shot,outcomes\n";
  for (const auto& mat : per_layer)
    for (long s = 0; s < mat.n_shots; ++s) {
      os << mat.layer_index << "," << s << ",";
      for (int e = 0; e < mat.n_obs; ++e) {
        if (e) os << " ";
        os << (mat.at(s, e) > 0 ? "+1" : "-1");
      }
      os << "\n";
    }
}

}  // namespace faf
