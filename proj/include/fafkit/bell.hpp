#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fafkit/qstate.hpp"
#include "fafkit/report.hpp"
#include "fafkit/rng.hpp"

namespace faf {

/// Joint two-copy register cap (2n qubits).
inline constexpr int kMaxBellJointQubits = 24;

/// One shot of the two-copy Bell-basis measurement. Bit j of u (v) is the
/// copy-1 (copy-2) outcome for mode j, mode 0 in the least significant bit.
struct BellSample {
  uint32_t u = 0;
  uint32_t v = 0;
  int q = 0;          // (1/2) sum_a g_a; always an integer
  double lambda = 0;  // 2 q^2
  int swap_sign = 1;  // (-1)^{u . v}, eigenvalue of the copy-swap observable

  bool v_all_zero() const { return v == 0; }
};

/// Majorana one-point signs g_1..g_{2n} reconstructed from one shot.
std::vector<int> bits_to_g(uint32_t u, uint32_t v, int n);

/// Builds q, lambda and swap_sign from raw bits.
BellSample make_bell_sample(uint32_t u, uint32_t v, int n);

/// Samples the Bell-measurement outcome distribution of two independent
/// copies. The distribution is precomputed per pure component, so repeated
/// shots are cheap.
class BellSampler {
 public:
  explicit BellSampler(const PureState& psi);
  explicit BellSampler(const MixedState& rho);

  int n_modes() const { return n_; }
  BellSample sample(Rng& rng);

 private:
  std::vector<double>& pair_cdf(size_t i, size_t j);
  BellSample decode(uint64_t x) const;

  int n_;
  // Pure path: single CDF. Mixed path: spectral components and per-pair CDFs
  // cached up to a byte budget.
  std::vector<double> cdf_;
  std::vector<std::pair<double, PureState>> comps_;
  std::vector<double> comp_cdf_;
  std::unordered_map<uint32_t, std::vector<double>> cache_;
  size_t cache_bytes_ = 0;
  std::vector<double> scratch_;
};

/// One Bell shot against a fresh two-copy preparation.
BellSample bell_sample(const PureState& psi, Rng& rng);
BellSample bell_sample(const MixedState& rho, Rng& rng);

/// A batch of shots with the provenance needed to re-analyze offline.
struct BellRecord {
  int n = 0;
  uint64_t seed = 0;
  std::vector<BellSample> samples;
};

BellRecord draw_bell_record(const PureState& psi, long n_shots, Rng& rng);
BellRecord draw_bell_record(const MixedState& rho, long n_shots, Rng& rng);

// --- estimators over a record ----------------------------------------------

/// Plain mean of lambda (the faf_1 estimator is unbiased).
EstimateReport estimate_faf1(const BellRecord& rec);
/// Median-of-means over ceil(8 ln(1/delta)) batches.
EstimateReport estimate_faf1(const BellRecord& rec, double delta);
/// Mean of the swap eigenvalue; estimates tr(rho^2).
EstimateReport estimate_purity(const BellRecord& rec);
/// Mean of swap_sign - [v == 0]; estimates the coherence gap
/// tr(rho^2) - tr(diag(rho)^2).
EstimateReport estimate_coherence(const BellRecord& rec);
/// Witness from one record: faf_1 (median-of-means) plus the purity
/// correction; the purity estimate is clamped to [2^-n, 1] before the n-th
/// root and a warning is attached when clamping fires.
EstimateReport estimate_witness(const BellRecord& rec, double delta);

// --- convenience: draw then estimate ---------------------------------------

EstimateReport estimate_faf1_bell(const PureState& psi, long n_shots,
                                  double delta, Rng& rng);
EstimateReport estimate_faf1_bell(const MixedState& rho, long n_shots,
                                  double delta, Rng& rng);
EstimateReport estimate_purity_bell(const MixedState& rho, long n_shots,
                                    Rng& rng);
EstimateReport estimate_witness_bell(const MixedState& rho, long n_shots,
                                     double delta, Rng& rng);
EstimateReport estimate_coherence_bell(const MixedState& rho, long n_shots,
                                       Rng& rng);

// --- one-sided Gaussianity test --------------------------------------------

struct TestVerdict {
  bool accept = false;
  long n_shots_used = 0;
  long n_shots_budget = 0;
  double epsilon = 0;
  double delta = 0;
  std::optional<BellSample> evidence;     // first nonzero-lambda shot
  std::optional<EstimateReport> details;  // estimator-based tests only
};

/// Shot budget ceil((n^2 / eps^2) ln(1/delta)).
long bell_test_shot_budget(int n, double eps, double delta);

/// Accepts every pure Gaussian state; rejects any state with
/// faf_1 >= eps^2 with probability at least 1 - delta. Stops at the first
/// shot with lambda != 0.
TestVerdict bell_gaussianity_test(const PureState& psi, double eps,
                                  double delta, Rng& rng);
TestVerdict bell_gaussianity_test(const MixedState& rho, double eps,
                                  double delta, Rng& rng);

// --- serialization ---------------------------------------------------------

void write_bell_record(std::ostream& os, const BellRecord& rec);
BellRecord read_bell_record(std::istream& is);

}  // namespace faf
