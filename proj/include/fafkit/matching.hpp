#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "fafkit/bell.hpp"  // TestVerdict
#include "fafkit/majorana.hpp"
#include "fafkit/qstate.hpp"
#include "fafkit/report.hpp"
#include "fafkit/rng.hpp"

namespace faf {

/// One round of commuting Majorana bilinears measured together. The 2n-1
/// layers jointly cover every index pair exactly once.
struct MeasurementLayer {
  int index = 0;  // 1-based layer label
  std::vector<std::pair<int, int>> pairs;
  std::vector<PauliString> observables;
};

/// Round-robin pairing: layer l holds (l, 2n) plus the wrapped pairs
/// (l+j, l-j) mod 2n-1 for j = 1..n-1. Each layer is a perfect matching of
/// the 2n Majorana indices.
std::vector<MeasurementLayer> build_layers(int n);

/// Outcomes of repeated shots of one layer, row-major [shot][observable].
struct LayerShotMatrix {
  int layer_index = 0;
  int n_obs = 0;
  long n_shots = 0;
  std::vector<int8_t> data;

  int8_t at(long shot, int e) const {
    return data[static_cast<size_t>(shot) * n_obs + e];
  }
};

/// One shot: fresh preparation, then the layer's observables measured
/// sequentially with collapse. They commute, so the order is irrelevant.
std::vector<int8_t> sample_layer(const PureState& psi,
                                 const MeasurementLayer& layer, Rng& rng);
std::vector<int8_t> sample_layer(const MixedState& rho,
                                 const MeasurementLayer& layer, Rng& rng);

/// Repeated shots of each layer against fresh preparations.
class SingleCopySampler {
 public:
  explicit SingleCopySampler(const PureState& psi);
  explicit SingleCopySampler(const MixedState& rho);

  int n_modes() const { return n_; }
  LayerShotMatrix collect(const MeasurementLayer& layer, long n_shots,
                          Rng& rng);

 private:
  int n_;
  std::vector<std::pair<double, PureState>> comps_;
  std::vector<double> comp_cdf_;
};

/// Unbiased estimator of sum_e <B_e>^2 over the layer's observables:
/// averages products of outcomes across distinct shot pairs. Needs >= 2
/// shots. Computed as (||column sums||^2 - M n_obs) / (M (M-1)).
double u_statistic(const LayerShotMatrix& shots);

/// n - sum_l u_statistic(layer l); layers.size() must be 2n-1.
double faf1_point_estimate(const std::vector<LayerShotMatrix>& per_layer);

/// Shots per layer per repetition so that one repetition has standard
/// deviation at most eta/2: ceil(24 n^2 / eta^2).
long single_copy_shot_budget(int n, double eta);

/// faf_1 from single-copy data: median over ceil(8 ln(1/delta)) repetitions,
/// each using shots_per_layer fresh shots of every layer. n_shots reports
/// total state preparations.
EstimateReport estimate_faf1_single(const PureState& psi, long shots_per_layer,
                                    double delta, Rng& rng);
EstimateReport estimate_faf1_single(const MixedState& rho,
                                    long shots_per_layer, double delta,
                                    Rng& rng);

/// Two-sided single-copy test: estimates faf_1 to accuracy eps^2/2 and
/// accepts iff the estimate is below eps^2 (midpoint of the Gaussian-vs-far
/// gap).
TestVerdict single_copy_test(const PureState& psi, double eps, double delta,
                             Rng& rng);
TestVerdict single_copy_test(const MixedState& rho, double eps, double delta,
                             Rng& rng);

/// Naive baseline: per trial draw one of the n(2n-1) pairs uniformly and
/// measure its bilinear once on each of two fresh preparations. The mean of
/// n - n(2n-1) X Y is unbiased for faf_1 but its variance carries the
/// n(2n-1) amplification factor.
EstimateReport randomized_pair_estimate(const PureState& psi, long n_trials,
                                        Rng& rng);
EstimateReport randomized_pair_estimate(const MixedState& rho, long n_trials,
                                        Rng& rng);

void write_layer_shots_csv(std::ostream& os,
                           const std::vector<LayerShotMatrix>& per_layer);

}  // namespace faf
