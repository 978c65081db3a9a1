#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fafkit/qstate.hpp"
#include "fafkit/rng.hpp"

namespace faf {

/// Antisymmetric 2n x 2n matrix of Majorana two-point functions.
struct CovarianceMatrix {
  int n_modes = 0;
  Eigen::MatrixXd gamma;

  /// Validates antisymmetry (1e-9) and size.
  CovarianceMatrix(int n_modes, Eigen::MatrixXd gamma);

  /// The n canonical values nu_j in [0, 1], descending. Each appears twice
  /// in the spectrum of -gamma^2; tiny negative eigenvalues (>= -1e-9) are
  /// clamped to zero.
  std::vector<double> canonical_values() const;
};

/// Majorana operator with 1-based index a in 1..2n under the Jordan-Wigner
/// convention: odd index 2j-1 -> Z...Z X I...I, even index 2j -> Z...Z Y I...I
/// with the non-identity block at qubit j-1.
PauliString jw_majorana(int a, int n);

/// Hermitian bilinear -i g_a g_b for a != b; squares to the identity.
/// Swapping the indices negates the string.
PauliString majorana_bilinear(int a, int b, int n);

CovarianceMatrix covariance(const PureState& s);
CovarianceMatrix covariance(const MixedState& s);

/// n - (1/2) tr[(-gamma^2)^k], computed from the canonical values.
double faf_k(const CovarianceMatrix& g, int k);
double faf_k(const PureState& s, int k);
double faf_k(const MixedState& s, int k);

/// faf_1 together with a purity correction; strictly positive values certify
/// non-Gaussianity of mixed states.
double witness_faf(const MixedState& s);
double witness_faf(const PureState& s);  // purity 1, reduces to faf_1

/// (lower, upper) bounds on the squared distance to the pure Gaussian
/// manifold implied by faf_1: (faf1/(4n), faf1/2), each clamped to [0, 1].
std::pair<double, double> distance_bounds(double faf1, int n);

enum class Parity { Even, Odd };

/// Generator of a Gaussian element: an antisymmetric real 2n x 2n matrix of
/// bilinear coefficients plus the fermion-parity sector of the reference.
struct GaussianParams {
  Eigen::MatrixXd generator;
  Parity parity = Parity::Even;

  int n_modes() const { return static_cast<int>(generator.rows()) / 2; }
};

/// Reference state for a parity sector: |0...0> (even) or |10...0> (odd,
/// first mode occupied).
PureState parity_reference(int n, Parity parity);

/// Dense 2^n x 2^n matchgate unitary exp(-i H), H = (1/2) sum_{a<b} h_ab B_ab.
Mat free_fermion_unitary(const Eigen::MatrixXd& h, int n);

/// Pure Gaussian state exp(-i H) |ref>.
PureState gaussian_pure(const GaussianParams& params);

/// Mixed Gaussian state exp((1/2) sum_{a<b} K_ab B_ab) / Z (K antisymmetric
/// real; the exponent is Hermitian).
MixedState gaussian_mixed(const Eigen::MatrixXd& k_gen);

struct EpsGOptions {
  int restarts = 32;
  double simplex_tol = 1e-6;     // simplex diameter convergence threshold
  int max_evals_per_restart = 60000;
  /// Stop early once some restart reaches fidelity >= this value.
  std::optional<double> stop_fidelity;
};

struct EpsGResult {
  double eps_g;           // sqrt(1 - max fidelity found)
  double best_fidelity;   // max |<G|psi>|^2 over restarts
  int restarts_run = 0;
  Parity best_parity = Parity::Even;
};

/// Estimate of the distance to the pure Gaussian manifold,
/// sqrt(min_G (1 - |<G|psi>|^2)), by derivative-free local search over
/// generators from random starts in both parity sectors. An upper bound on
/// the true distance up to optimizer quality. Capped at n <= 4.
EpsGResult eps_g_bruteforce(const PureState& s, Rng& rng,
                            const EpsGOptions& opts = {});

}  // namespace faf
