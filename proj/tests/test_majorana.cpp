#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fafkit/majorana.hpp"
#include "fafkit/statelib.hpp"
#include "oracles.hpp"

using namespace faf;

namespace {

double max_abs_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Thermal single-mode state with <B_12> = nu: diag((1+nu)/2, (1-nu)/2).
MixedState thermal_mode(double nu) {
  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 0.5 * (1.0 + nu);
  rho(1, 1) = 0.5 * (1.0 - nu);
  return MixedState::from_matrix(1, std::move(rho));
}

}  // namespace

TEST_CASE("jw strings match the dense definition") {
  CHECK(jw_majorana(1, 2).to_string() == "+XI");
  CHECK(jw_majorana(4, 2).to_string() == "+ZY");
  CHECK(jw_majorana(3, 2).to_string() == "+ZX");
  CHECK(jw_majorana(2, 3).to_string() == "+YII");

  const int n = 3;
  for (int a = 1; a <= 2 * n; ++a) {
    const PauliString g = jw_majorana(a, n);
    const Mat dense = pauli_to_matrix(g);
    CHECK(max_abs_diff(dense, oracle::majorana_dense(a, n)) < 1e-14);
    CHECK(max_abs_diff(dense, dense.adjoint()) < 1e-14);
    CHECK((g * g).to_string() == "+III");
  }

  CHECK_THROWS_AS(jw_majorana(0, 2), ContractError);
  CHECK_THROWS_AS(jw_majorana(5, 2), ContractError);
}

TEST_CASE("jw strings pairwise anticommute") {
  const int n = 3;
  for (int a = 1; a <= 2 * n; ++a)
    for (int b = a + 1; b <= 2 * n; ++b) {
      const PauliString ga = jw_majorana(a, n);
      const PauliString gb = jw_majorana(b, n);
      CHECK_FALSE(ga.commutes_with(gb));
      CHECK((ga * gb).to_string() == (gb * ga).negated().to_string());
    }
}

TEST_CASE("bilinears are hermitian involutions with the right signs") {
  CHECK(majorana_bilinear(1, 2, 1).to_string() == "+Z");
  CHECK(majorana_bilinear(1, 3, 2).to_string() == "-YX");

  const int n = 3;
  for (int a = 1; a <= 2 * n; ++a)
    for (int b = 1; b <= 2 * n; ++b) {
      if (a == b) continue;
      const PauliString bl = majorana_bilinear(a, b, n);
      const Mat dense = pauli_to_matrix(bl);
      CHECK(max_abs_diff(dense, oracle::bilinear_dense(a, b, n)) < 1e-14);
      CHECK(max_abs_diff(dense, dense.adjoint()) < 1e-14);
      CHECK((bl * bl).to_string() == "+III");
      CHECK(majorana_bilinear(b, a, n).to_string() ==
            bl.negated().to_string());
    }
  CHECK_THROWS_AS(majorana_bilinear(2, 2, 3), ContractError);
}

TEST_CASE("diagonal bilinears read occupation off the vacuum") {
  const PureState vac = PureState::basis_state(4, 0);
  for (int j = 1; j <= 4; ++j) {
    const cplx e = expectation(vac, majorana_bilinear(2 * j - 1, 2 * j, 4));
    CHECK(std::abs(e - cplx(1.0, 0.0)) < 1e-14);
  }
}

TEST_CASE("covariance of frozen states") {
  const CovarianceMatrix vac = covariance(PureState::basis_state(3, 0));
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(6, 6);
  for (int j = 0; j < 3; ++j) {
    expect(2 * j, 2 * j + 1) = 1.0;
    expect(2 * j + 1, 2 * j) = -1.0;
  }
  CHECK((vac.gamma - expect).cwiseAbs().maxCoeff() < 1e-12);
  for (double nu : vac.canonical_values()) CHECK(nu == doctest::Approx(1.0));

  Rng rng(11);
  const CovarianceMatrix ghz =
      covariance(make_state({EnsembleKind::Ghz, 4}, rng));
  CHECK(ghz.gamma.cwiseAbs().maxCoeff() < 1e-12);
  for (double nu : ghz.canonical_values()) CHECK(std::abs(nu) < 1e-9);

  const CovarianceMatrix mm = covariance(MixedState::maximally_mixed(2));
  CHECK(mm.gamma.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("covariance matches dense traces on random states") {
  Rng rng(12);
  const int n = 3;
  const PureState psi = oracle::random_state(n, rng);
  const Mat rho_psi = psi.amps * psi.amps.adjoint();
  CHECK((covariance(psi).gamma - oracle::covariance_dense(rho_psi, n))
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  const MixedState rho = oracle::random_mixed(n, 3, rng);
  const CovarianceMatrix g = covariance(rho);
  CHECK((g.gamma - oracle::covariance_dense(rho.rho, n))
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  // Singular values within [0, 1], doubly degenerate.
  const Eigen::MatrixXd m = -(g.gamma * g.gamma);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  for (int j = 0; j < n; ++j)
    CHECK(std::abs(es.eigenvalues()(2 * j) - es.eigenvalues()(2 * j + 1)) <
          1e-8);
  const auto nus = g.canonical_values();
  for (int j = 0; j < n; ++j) {
    CHECK(nus[j] <= 1.0 + 1e-8);
    if (j > 0) CHECK(nus[j] <= nus[j - 1] + 1e-12);
  }
}

TEST_CASE("covariance constructor validation") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  g(0, 1) = 0.5;
  g(1, 0) = -0.5;
  g(0, 1) += 1e-10;  // within the 1e-9 antisymmetry tolerance
  CHECK_NOTHROW(CovarianceMatrix(2, g));
  g(0, 1) += 1e-8;
  CHECK_THROWS_AS(CovarianceMatrix(2, g), ContractError);
  CHECK_THROWS_AS(CovarianceMatrix(2, Eigen::MatrixXd::Zero(3, 3)),
                  ContractError);
}

TEST_CASE("faf closed forms on cat and defect states") {
  Rng rng(13);
  for (double e : {0.1, 0.3, 0.5}) {
    const PureState cat = make_state({EnsembleKind::Cat, 4, 0, e}, rng);
    CHECK(std::abs(faf_k(cat, 1) - 16.0 * e * (1.0 - e)) < 1e-9);
    CHECK(cat_faf1(4, e) == doctest::Approx(16.0 * e * (1.0 - e)));
  }
  const PureState cat03 = make_state({EnsembleKind::Cat, 4, 0, 0.3}, rng);
  CHECK(std::abs(faf_k(cat03, 1) - 3.36) < 1e-9);

  for (int n : {4, 5}) {
    const PureState defect = make_state({EnsembleKind::Defect, n}, rng);
    CHECK(std::abs(faf_k(defect, 1) - 4.0) < 1e-9);
  }

  const PureState vac = PureState::basis_state(3, 0);
  for (int k : {1, 2, 3}) CHECK(std::abs(faf_k(vac, k)) < 1e-12);

  const MixedState rho = oracle::random_mixed(3, 2, rng);
  for (int k : {1, 2}) {
    const double f = faf_k(rho, k);
    CHECK(f >= -1e-9);
    CHECK(f <= 3.0 + 1e-9);
  }
  CHECK_THROWS_AS(faf_k(vac, 0), ContractError);
}

TEST_CASE("faf1 equals the term-by-term bilinear sum") {
  Rng rng(14);
  for (int trial = 0; trial < 3; ++trial) {
    const PureState psi = oracle::random_state(3, rng);
    double sum = 0.0;
    for (int a = 1; a <= 6; ++a)
      for (int b = a + 1; b <= 6; ++b) {
        const double v = expectation(psi, majorana_bilinear(a, b, 3)).real();
        sum += v * v;
      }
    CHECK(std::abs(faf_k(psi, 1) - (3.0 - sum)) < 1e-9);
  }
  const MixedState rho = oracle::random_mixed(2, 3, rng);
  double sum = 0.0;
  for (int a = 1; a <= 4; ++a)
    for (int b = a + 1; b <= 4; ++b) {
      const double v = expectation(rho, majorana_bilinear(a, b, 2)).real();
      sum += v * v;
    }
  CHECK(std::abs(faf_k(rho, 1) - (2.0 - sum)) < 1e-9);
}

TEST_CASE("faf_k agrees with direct matrix powers of the covariance") {
  Rng rng(15);
  const MixedState rho = oracle::random_mixed(3, 2, rng);
  const CovarianceMatrix g = covariance(rho);
  const Eigen::MatrixXd m = -(g.gamma * g.gamma);
  CHECK(std::abs(faf_k(g, 1) - (3.0 - 0.5 * m.trace())) < 1e-9);
  CHECK(std::abs(faf_k(g, 2) - (3.0 - 0.5 * (m * m).trace())) < 1e-9);
  CHECK(std::abs(faf_k(g, 3) - (3.0 - 0.5 * (m * m * m).trace())) < 1e-9);
}

TEST_CASE("faf ignores appended vacuum modes") {
  Rng rng(16);
  const PureState psi = oracle::random_state(3, rng);
  const PureState padded = tensor(psi, PureState::basis_state(1, 0));
  CHECK(std::abs(faf_k(psi, 1) - faf_k(padded, 1)) < 1e-9);
  CHECK(std::abs(faf_k(psi, 2) - faf_k(padded, 2)) < 1e-9);
}

TEST_CASE("witness closed forms") {
  for (int n : {2, 3})
    CHECK(std::abs(witness_faf(MixedState::maximally_mixed(n))) < 1e-9);

  Rng rng(17);
  const PureState cat = make_state({EnsembleKind::Cat, 4, 0, 0.5}, rng);
  CHECK(std::abs(witness_faf(cat) - 4.0) < 1e-9);
  CHECK(std::abs(witness_faf(MixedState::from_pure(cat)) - 4.0) < 1e-9);

  // Thermal Gaussian product nu = (0.9, 0.3): negative witness, exact value
  // faf1 - 2n(1 - sqrt(purity)) with purity = prod (1+nu^2)/2.
  const MixedState th = tensor(thermal_mode(0.9), thermal_mode(0.3));
  const double pur = (1 + 0.81) / 2.0 * (1 + 0.09) / 2.0;
  CHECK(std::abs(purity(th) - pur) < 1e-12);
  const double expect = (2.0 - 0.81 - 0.09) - 4.0 * (1.0 - std::sqrt(pur));
  CHECK(witness_faf(th) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(witness_faf(th) < 0.0);

  // Depolarized GHZ_4 at p = 1/2: witness hits the closed form
  // 4 (1 + 15 x)^{1/4} - 4 with x = 1/4.
  const PureState ghz = make_state({EnsembleKind::Ghz, 4}, rng);
  Mat rho = 0.5 * (ghz.amps * ghz.amps.adjoint());
  rho += 0.5 / 16.0 * Mat::Identity(16, 16);
  const MixedState dep = MixedState::from_matrix(4, std::move(rho));
  CHECK(std::abs(witness_faf(dep) - (4.0 * std::pow(4.75, 0.25) - 4.0)) <
        1e-9);
}

TEST_CASE("distance bounds") {
  const auto zero = distance_bounds(0.0, 3);
  CHECK(zero.first == 0.0);
  CHECK(zero.second == 0.0);

  const auto full = distance_bounds(4.0, 4);
  CHECK(full.first == doctest::Approx(0.25));
  CHECK(full.second == doctest::Approx(1.0));  // clamped from 2

  const double faf = cat_faf1(4, 0.01);
  CHECK(std::abs(faf - 0.1584) < 1e-12);
  const auto [lo, hi] = distance_bounds(faf, 4);
  CHECK(lo == doctest::Approx(0.0099).epsilon(1e-10));
  CHECK(hi == doctest::Approx(0.0792).epsilon(1e-10));
  CHECK(lo <= 0.01);
  CHECK(0.01 <= hi);

  const auto clamped = distance_bounds(3.0, 3);
  CHECK(clamped.second == doctest::Approx(1.0));
  CHECK_THROWS_AS(distance_bounds(1.0, 0), ContractError);
}

TEST_CASE("parity references") {
  const PureState even = parity_reference(3, Parity::Even);
  CHECK(std::abs(even.amps(0) - cplx(1.0, 0.0)) < 1e-15);
  const PureState odd = parity_reference(3, Parity::Odd);
  CHECK(std::abs(odd.amps(4) - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("free-fermion unitary matches the dense exponential") {
  Rng rng(18);
  const int n = 2;
  const Eigen::MatrixXd h = random_antisymmetric(2 * n, rng);
  Mat ham = Mat::Zero(4, 4);
  for (int a = 1; a <= 2 * n; ++a)
    for (int b = a + 1; b <= 2 * n; ++b)
      ham += 0.5 * h(a - 1, b - 1) * oracle::bilinear_dense(a, b, n);
  const Mat u = free_fermion_unitary(h, n);
  CHECK(max_abs_diff(u, oracle::expm_minus_i(ham)) < 1e-10);
  CHECK(max_abs_diff(u.adjoint() * u, Mat::Identity(4, 4)) < 1e-12);

  // gaussian_pure equals the unitary applied to the reference, both parities.
  for (Parity par : {Parity::Even, Parity::Odd}) {
    const PureState ref = parity_reference(n, par);
    const PureState out = gaussian_pure({h, par});
    CHECK((out.amps - u * ref.amps).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("pure gaussian states are exactly gaussian") {
  Rng rng(19);
  const int n = 3;
  for (Parity par : {Parity::Even, Parity::Odd}) {
    const PureState g = gaussian_pure({random_antisymmetric(2 * n, rng), par});
    for (int k : {1, 2, 3}) CHECK(std::abs(faf_k(g, k)) < 1e-7);
    const CovarianceMatrix cov = covariance(g);
    const Eigen::MatrixXd sq = cov.gamma * cov.gamma;
    CHECK((sq + Eigen::MatrixXd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() <
          1e-7);
  }

  // h = 0 leaves the reference untouched.
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  CHECK((gaussian_pure({zero, Parity::Even}).amps -
         parity_reference(n, Parity::Even).amps)
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK((gaussian_pure({zero, Parity::Odd}).amps -
         parity_reference(n, Parity::Odd).amps)
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(4, 4);
  bad(0, 1) = 1.0;  // not antisymmetric
  CHECK_THROWS_AS(gaussian_pure({bad, Parity::Even}), ContractError);
  CHECK_THROWS_AS(free_fermion_unitary(Eigen::MatrixXd::Zero(26, 26), 13),
                  SizeError);
}

TEST_CASE("mixed gaussian closed forms") {
  // K = 0: maximally mixed.
  const MixedState mm = gaussian_mixed(Eigen::MatrixXd::Zero(4, 4));
  CHECK(max_abs_diff(mm.rho, 0.25 * Mat::Identity(4, 4)) < 1e-12);

  // Single mode, K_12 = kappa: <B_12> = tanh(kappa / 2).
  Eigen::MatrixXd k1 = Eigen::MatrixXd::Zero(2, 2);
  k1(0, 1) = 0.8;
  k1(1, 0) = -0.8;
  const MixedState one = gaussian_mixed(k1);
  CHECK(std::abs(covariance(one).gamma(0, 1) - std::tanh(0.4)) < 1e-10);
  CHECK(std::abs(one.rho(0, 0).real() - 0.5 * (1 + std::tanh(0.4))) < 1e-10);

  // Two-mode block diagonal: canonical values tanh(kappa_j / 2), purity
  // prod (1 + nu_j^2) / 2.
  Eigen::MatrixXd k2 = Eigen::MatrixXd::Zero(4, 4);
  k2(0, 1) = 1.2;
  k2(1, 0) = -1.2;
  k2(2, 3) = 0.5;
  k2(3, 2) = -0.5;
  const MixedState two = gaussian_mixed(k2);
  const auto nus = covariance(two).canonical_values();
  CHECK(nus[0] == doctest::Approx(std::tanh(0.6)).epsilon(1e-9));
  CHECK(nus[1] == doctest::Approx(std::tanh(0.25)).epsilon(1e-9));
  const double pur_expect =
      (1 + std::pow(std::tanh(0.6), 2)) / 2 *
      (1 + std::pow(std::tanh(0.25), 2)) / 2;
  CHECK(purity(two) == doctest::Approx(pur_expect).epsilon(1e-9));
}

TEST_CASE("witness is nonpositive on random mixed gaussian states") {
  Rng rng(20);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(3));
    const MixedState rho = gaussian_mixed(random_antisymmetric(2 * n, rng));
    CHECK(witness_faf(rho) <= 1e-9);
  }
}

TEST_CASE("eps_g optimizer reproduces known distances") {
  Rng rng(22);

  PureState vac = PureState::basis_state(3, 0);
  EpsGOptions vac_opts;
  vac_opts.stop_fidelity = 0.9999;
  CHECK(eps_g_bruteforce(vac, rng, vac_opts).eps_g <= 0.02);

  // Cat at eps^2 = 0.16: closest Gaussian is the vacuum, distance 0.4.
  PureState cat = make_state({EnsembleKind::Cat, 4, 0, 0.16}, rng);
  EpsGOptions cat_opts;
  cat_opts.stop_fidelity = 0.83;
  const EpsGResult cr = eps_g_bruteforce(cat, rng, cat_opts);
  CHECK(std::abs(cr.eps_g - 0.4) <= 0.02);
  CHECK(cr.best_parity == Parity::Even);
  CHECK(cr.best_fidelity <= 0.84 + 1e-6);  // reported value upper-bounds eps

  PureState defect = make_state({EnsembleKind::Defect, 4}, rng);
  EpsGOptions def_opts;
  def_opts.stop_fidelity = 0.48;
  const EpsGResult dr = eps_g_bruteforce(defect, rng, def_opts);
  CHECK(std::abs(dr.eps_g - std::sqrt(0.5)) <= 0.02);

  PureState big = PureState::basis_state(5, 0);
  CHECK_THROWS_AS(eps_g_bruteforce(big, rng), SizeError);
}

TEST_CASE("distance bounds sandwich the optimizer distance") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    PureState psi = oracle::random_state(4, rng);
    const double f1 = faf_k(psi, 1);
    const auto [lo, hi] = distance_bounds(f1, 4);
    EpsGOptions opts;
    opts.stop_fidelity = std::max(0.0, 1.0 - hi - 0.02);
    const EpsGResult r = eps_g_bruteforce(psi, rng, opts);
    const double e2 = r.eps_g * r.eps_g;
    CHECK(lo <= e2 + 0.03);
    CHECK(e2 <= hi + 0.03);
  }
}

TEST_CASE("faf_k is invariant under free-fermion unitaries") {
  Rng rng(21);
  for (int n = 2; n <= 5; ++n) {
    PureState psi = oracle::random_state(n, rng);
    double before[4];
    for (int k : {1, 2, 3}) before[k] = faf_k(psi, k);
    const Mat u = free_fermion_unitary(random_antisymmetric(2 * n, rng), n);
    std::vector<int> all(n);
    for (int q = 0; q < n; ++q) all[q] = q;
    apply_unitary(psi, u, all);
    for (int k : {1, 2, 3}) CHECK(std::abs(faf_k(psi, k) - before[k]) < 1e-7);
  }
}
