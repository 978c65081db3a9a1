#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "fafkit/qstate.hpp"
#include "oracles.hpp"

using namespace faf;

namespace {

PauliString from_word(const std::string& word, int phase_pow = 0) {
  std::vector<Pauli> ls;
  for (char c : word) {
    switch (c) {
      case 'I': ls.push_back(Pauli::I); break;
      case 'X': ls.push_back(Pauli::X); break;
      case 'Y': ls.push_back(Pauli::Y); break;
      case 'Z': ls.push_back(Pauli::Z); break;
    }
  }
  return PauliString(phase_pow, std::move(ls));
}

Mat oracle_matrix(const PauliString& p) {
  std::string word;
  for (Pauli l : p.letters()) word += pauli_char(l);
  return p.phase() * oracle::pauli_word(word);
}

double max_abs_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

PauliString random_string(int n, Rng& rng, bool hermitian = false) {
  std::vector<Pauli> ls(n);
  for (int q = 0; q < n; ++q)
    ls[q] = static_cast<Pauli>(rng.uniform_int(4));
  const int phase = hermitian ? 2 * static_cast<int>(rng.uniform_int(2))
                              : static_cast<int>(rng.uniform_int(4));
  return PauliString(phase, std::move(ls));
}

Mat random_unitary(int dim, Rng& rng) {
  Mat h(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) h(i, j) = cplx(rng.normal(), rng.normal());
  h = (h + h.adjoint()).eval();
  return oracle::expm_minus_i(h, 0.3);
}

Mat partial_trace_keep_first(const Mat& rho, int n_keep, int n_total) {
  const uint64_t dk = uint64_t{1} << n_keep;
  const uint64_t dr = uint64_t{1} << (n_total - n_keep);
  Mat out = Mat::Zero(dk, dk);
  for (uint64_t a = 0; a < dk; ++a)
    for (uint64_t b = 0; b < dk; ++b)
      for (uint64_t r = 0; r < dr; ++r) out(a, b) += rho(a * dr + r, b * dr + r);
  return out;
}

}  // namespace

TEST_CASE("pauli string products match dense matrices") {
  const PauliString x = from_word("X"), y = from_word("Y"), z = from_word("Z");
  const PauliString xy = x * y;
  CHECK(xy.phase_pow() == 1);  // XY = iZ
  CHECK(xy.letters()[0] == Pauli::Z);
  CHECK(max_abs_diff(pauli_to_matrix(x) * pauli_to_matrix(y),
                     pauli_to_matrix(xy)) < 1e-14);
  CHECK((y * x).phase_pow() == 3);

  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const PauliString a = random_string(4, rng), b = random_string(4, rng);
    CHECK(max_abs_diff(pauli_to_matrix(a) * pauli_to_matrix(b),
                       pauli_to_matrix(a * b)) < 1e-13);
    // group structure: commutation flag matches the dense commutator
    const Mat ma = pauli_to_matrix(a), mb = pauli_to_matrix(b);
    const bool dense_commute = max_abs_diff(ma * mb, mb * ma) < 1e-12;
    CHECK(a.commutes_with(b) == dense_commute);
  }
}

TEST_CASE("pauli_to_matrix matches the kron oracle") {
  CHECK(max_abs_diff(pauli_to_matrix(from_word("XYZI")),
                     oracle::pauli_word("XYZI")) < 1e-15);
  CHECK(max_abs_diff(pauli_to_matrix(from_word("ZZ", 3)),
                     cplx(0, -1) * oracle::pauli_word("ZZ")) < 1e-15);
  Rng rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    const PauliString p = random_string(3, rng);
    CHECK(max_abs_diff(pauli_to_matrix(p), oracle_matrix(p)) < 1e-14);
  }
}

TEST_CASE("pauli string helpers") {
  const PauliString p = from_word("XYZI", 1);
  CHECK(p.to_string() == "+iXYZI");
  CHECK(p.negated().to_string() == "-iXYZI");
  CHECK(p.weight() == 3);
  CHECK(!p.is_hermitian());
  CHECK(from_word("ZZ").is_hermitian());
  CHECK(PauliString::identity(3) == from_word("III"));
  CHECK(PauliString::single(Pauli::Y, 1, 3) == from_word("IYI"));
  CHECK_THROWS_AS(from_word("X") * from_word("XX"), ContractError);
}

TEST_CASE("apply_unitary on statevectors matches embedded dense route") {
  Rng rng(73);
  const int n = 4;
  for (const std::vector<int> targets :
       {std::vector<int>{2}, {0, 1}, {0, 2}, {3, 1}}) {
    const Mat u = random_unitary(1 << targets.size(), rng);
    PureState s = oracle::random_state(n, rng);
    const Vec expect = oracle::embed(u, targets, n) * s.amps;
    apply_unitary(s, u, targets);
    CHECK((s.amps - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("apply_unitary on density matrices matches embedded dense route") {
  Rng rng(74);
  const int n = 3;
  for (const std::vector<int> targets : {std::vector<int>{1}, {2, 0}}) {
    const Mat u = random_unitary(1 << targets.size(), rng);
    MixedState s = oracle::random_mixed(n, 3, rng);
    const Mat uf = oracle::embed(u, targets, n);
    const Mat expect = uf * s.rho * uf.adjoint();
    apply_unitary(s, u, targets);
    CHECK(max_abs_diff(s.rho, expect) < 1e-12);
  }
  MixedState s = oracle::random_mixed(2, 2, rng);
  Mat not_unitary = Mat::Identity(2, 2) * 0.5;
  const int t[1] = {0};
  CHECK_THROWS_AS(apply_unitary(s, not_unitary, t), ContractError);
}

TEST_CASE("entangling rotation acts correctly on |++>") {
  // exp(-i pi/4 ZZ) on |++> leaves each qubit maximally mixed; doubling the
  // angle disentangles again into |-->.
  Vec plus(4);
  plus.fill(0.5);
  const double pi = 3.14159265358979323846;
  const Mat zz = oracle::pauli_word("ZZ");
  const int t[2] = {0, 1};

  PureState s(2, plus);
  apply_unitary(s, oracle::expm_minus_i(zz, 0.25 * pi), t);
  const Mat red =
      partial_trace_keep_first(s.amps * s.amps.adjoint(), 1, 2);
  CHECK(max_abs_diff(red, 0.5 * Mat::Identity(2, 2)) < 1e-12);

  PureState s2(2, plus);
  apply_unitary(s2, oracle::expm_minus_i(zz, 0.5 * pi), t);
  Vec minus(4);
  minus << 0.5, -0.5, -0.5, 0.5;
  CHECK(std::abs(std::abs(s2.amps.dot(minus)) - 1.0) < 1e-12);
}

TEST_CASE("noise channels: closed forms on one qubit") {
  Rng rng(75);
  const MixedState base = oracle::random_mixed(1, 2, rng);

  MixedState s = base;
  apply_channel(s, NoiseChannel::dephasing(0.4), 0);
  CHECK(std::abs(s.rho(0, 1) - 0.6 * base.rho(0, 1)) < 1e-14);
  CHECK(std::abs(s.rho(0, 0) - base.rho(0, 0)) < 1e-14);

  s = base;
  apply_channel(s, NoiseChannel::depolarizing(0.3), 0);
  const Mat expect_dep =
      0.7 * base.rho + 0.3 * 0.5 * Mat::Identity(2, 2);
  CHECK(max_abs_diff(s.rho, expect_dep) < 1e-14);

  MixedState one = MixedState::from_pure(PureState::basis_state(1, 1));
  apply_channel(one, NoiseChannel::amplitude_damping(0.25), 0);
  CHECK(std::abs(one.rho(0, 0).real() - 0.25) < 1e-14);
  CHECK(std::abs(one.rho(1, 1).real() - 0.75) < 1e-14);

  s = base;
  apply_channel(s, NoiseChannel::bit_flip(0.5), 0);
  const Mat x = oracle::pauli_word("X");
  CHECK(max_abs_diff(s.rho, 0.75 * base.rho + 0.25 * x * base.rho * x) <
        1e-14);
}

TEST_CASE("noise channels match the dense operator-sum oracle") {
  Rng rng(76);
  const int n = 3;
  for (const NoiseChannel& ch :
       {NoiseChannel::depolarizing(0.17), NoiseChannel::amplitude_damping(0.6),
        NoiseChannel::dephasing(0.83), NoiseChannel::bit_flip(0.29)}) {
    MixedState s = oracle::random_mixed(n, 4, rng);
    const int qubit = static_cast<int>(rng.uniform_int(n));
    std::vector<Mat> kraus;
    for (const auto& k : ch.kraus) kraus.push_back(Mat(k));
    const Mat expect = oracle::channel_dense(s.rho, kraus, qubit, n);
    apply_channel(s, ch, qubit);
    CHECK(max_abs_diff(s.rho, expect) < 1e-12);
    CHECK(std::abs(s.rho.trace().real() - 1.0) < 1e-12);
  }
}

TEST_CASE("channel chains preserve trace and never raise purity above one") {
  Rng rng(77);
  MixedState s = oracle::random_mixed(2, 2, rng);
  for (int step = 0; step < 20; ++step) {
    const double p = rng.uniform();
    const int qubit = static_cast<int>(rng.uniform_int(2));
    switch (rng.uniform_int(4)) {
      case 0: apply_channel(s, NoiseChannel::depolarizing(p), qubit); break;
      case 1: apply_channel(s, NoiseChannel::amplitude_damping(p), qubit); break;
      case 2: apply_channel(s, NoiseChannel::dephasing(p), qubit); break;
      default: apply_channel(s, NoiseChannel::bit_flip(p), qubit); break;
    }
    CHECK(std::abs(s.rho.trace().real() - 1.0) < 1e-10);
    CHECK(purity(s) < 1.0 + 1e-10);
  }
}

TEST_CASE("channel strength validation") {
  CHECK_THROWS_AS(NoiseChannel::depolarizing(-0.1), ContractError);
  CHECK_THROWS_AS(NoiseChannel::dephasing(1.5), ContractError);
}

TEST_CASE("depolarizing channels compose multiplicatively") {
  Rng rng(78);
  for (auto [p1, p2] : {std::pair{0.3, 0.5}, std::pair{0.05, 0.9},
                        std::pair{1.0, 0.4}, std::pair{0.0, 0.7}}) {
    MixedState chained = oracle::random_mixed(2, 3, rng);
    MixedState direct = chained;
    const double p_eff = 1.0 - (1.0 - p1) * (1.0 - p2);
    apply_channel(chained, NoiseChannel::depolarizing(p1), 1);
    apply_channel(chained, NoiseChannel::depolarizing(p2), 1);
    apply_channel(direct, NoiseChannel::depolarizing(p_eff), 1);
    CHECK(max_abs_diff(chained.rho, direct.rho) < 1e-9);
  }
}

TEST_CASE("measuring a stabilizer of GHZ is deterministic") {
  Vec v = Vec::Zero(16);
  v(0) = v(15) = 1.0 / std::sqrt(2.0);
  PureState ghz(4, v);
  Rng rng(78);
  const PauliString zz = from_word("ZZII");
  for (int shot = 0; shot < 20; ++shot) {
    PureState s = ghz;
    CHECK(measure_pauli(s, zz, rng) == 1);
    CHECK((s.amps - ghz.amps).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("repeated measurement of the same string is stable") {
  Rng rng(79);
  for (int trial = 0; trial < 30; ++trial) {
    PureState s = oracle::random_state(3, rng);
    const PauliString p = random_string(3, rng, /*hermitian=*/true);
    const int first = measure_pauli(s, p, rng);
    CHECK(measure_pauli(s, p, rng) == first);
  }
  PureState s = oracle::random_state(2, rng);
  CHECK_THROWS_AS(measure_pauli(s, from_word("XX", 1), rng), ContractError);
}

TEST_CASE("measurement statistics follow the expectation value") {
  Rng rng(80);
  const PureState psi = oracle::random_state(3, rng);
  const PauliString p = from_word("ZXY");
  const double exact = expectation(psi, p).real();
  const int shots = 20000;
  double sum = 0;
  for (int i = 0; i < shots; ++i) {
    PureState copy = psi;
    sum += measure_pauli(copy, p, rng);
  }
  const double mean = sum / shots;
  const double sigma = std::sqrt((1.0 - exact * exact) / shots);
  CHECK(std::abs(mean - exact) < 4.0 * sigma + 1e-9);
}

TEST_CASE("mixed-state measurement statistics and collapse") {
  Rng rng(81);
  const MixedState rho = oracle::random_mixed(2, 3, rng);
  const PauliString p = from_word("XZ");
  const double exact = expectation(rho, p).real();
  const int shots = 20000;
  double sum = 0;
  for (int i = 0; i < shots; ++i) {
    MixedState copy = rho;
    const int out = measure_pauli(copy, p, rng);
    sum += out;
    if (i < 50) {  // collapsed state must be a +-1 eigenstate
      CHECK(std::abs(expectation(copy, p).real() - out) < 1e-9);
      CHECK(std::abs(copy.rho.trace().real() - 1.0) < 1e-9);
    }
  }
  const double mean = sum / shots;
  const double sigma = std::sqrt((1.0 - exact * exact) / shots);
  CHECK(std::abs(mean - exact) < 4.0 * sigma + 1e-9);
}

TEST_CASE("computational-basis sampling frequencies") {
  Rng rng(82);
  Vec v = Vec::Zero(8);
  v(0) = std::sqrt(0.7);
  v(7) = std::sqrt(0.3);
  const PureState cat(3, v);
  const int shots = 20000;
  std::map<uint64_t, int> counts;
  for (int i = 0; i < shots; ++i) ++counts[sample_computational(cat, rng)];
  CHECK(counts.size() == 2);
  const double f0 = static_cast<double>(counts[0]) / shots;
  CHECK(std::abs(f0 - 0.7) < 4.0 * std::sqrt(0.7 * 0.3 / shots));

  // uniform superposition: every outcome within 4 sigma of 1/8
  Vec u(8);
  u.fill(1.0 / std::sqrt(8.0));
  const PureState plus(3, u);
  counts.clear();
  for (int i = 0; i < shots; ++i) ++counts[sample_computational(plus, rng)];
  for (uint64_t x = 0; x < 8; ++x) {
    const double f = static_cast<double>(counts[x]) / shots;
    CHECK(std::abs(f - 0.125) < 4.0 * std::sqrt(0.125 * 0.875 / shots));
  }
}

TEST_CASE("purity and tensor products") {
  Rng rng(83);
  const MixedState a = oracle::random_mixed(2, 2, rng);
  const MixedState b = oracle::random_mixed(1, 2, rng);
  CHECK(std::abs(purity(a) - (a.rho * a.rho).trace().real()) < 1e-12);
  CHECK(purity(MixedState::maximally_mixed(3)) == doctest::Approx(1.0 / 8));
  CHECK(purity(MixedState::from_pure(oracle::random_state(3, rng))) ==
        doctest::Approx(1.0).epsilon(1e-10));
  const MixedState ab = tensor(a, b);
  CHECK(purity(ab) == doctest::Approx(purity(a) * purity(b)).epsilon(1e-10));

  const PureState pa = PureState::basis_state(2, 1);
  const PureState pb = PureState::basis_state(1, 1);
  const PureState pab = tensor(pa, pb);
  CHECK(pab.amps(3).real() == doctest::Approx(1.0));  // |01>|1> -> index 011
}

TEST_CASE("eig_decompose reconstructs the state") {
  Rng rng(84);
  const MixedState rho = oracle::random_mixed(3, 3, rng);
  const auto decomp = eig_decompose(rho);
  CHECK(decomp.size() == 3);
  double total = 0;
  Mat rebuilt = Mat::Zero(8, 8);
  for (size_t i = 0; i < decomp.size(); ++i) {
    const auto& [p, psi] = decomp[i];
    if (i > 0) CHECK(p <= decomp[i - 1].first);
    CHECK(psi.amps.norm() == doctest::Approx(1.0).epsilon(1e-10));
    total += p;
    rebuilt += p * (psi.amps * psi.amps.adjoint());
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_abs_diff(rebuilt, rho.rho) < 1e-10);
}

TEST_CASE("constructor validation") {
  Vec bad(4);
  bad.fill(1.0);  // norm 2
  CHECK_THROWS_AS(PureState(2, bad), ContractError);
  CHECK_THROWS_AS(PureState::basis_state(kMaxPureQubits + 1, 0), SizeError);
  CHECK_THROWS_AS(MixedState::maximally_mixed(kMaxMixedQubits + 1), SizeError);

  Mat nonherm = Mat::Zero(2, 2);
  nonherm(0, 1) = 1.0;
  nonherm(0, 0) = 1.0;
  CHECK_THROWS_AS(MixedState::from_matrix(1, nonherm), ContractError);

  Mat neg = Mat::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(MixedState::from_matrix(1, neg), ContractError);

  PureState s = PureState::basis_state(2, 0);
  const Mat u = Mat::Identity(2, 2);
  const int dup[2] = {1, 1};
  CHECK_THROWS_AS(apply_unitary(s, u, dup), ContractError);
  const int oob[1] = {5};
  CHECK_THROWS_AS(apply_unitary(s, u, oob), ContractError);
}

TEST_CASE("rng determinism and stream splitting") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng parent(5);
  Rng c1 = parent.split();
  Rng c2 = parent.split();
  bool differ = false;
  for (int i = 0; i < 10; ++i)
    if (c1.next_u64() != c2.next_u64()) differ = true;
  CHECK(differ);
  // normal() moments sanity
  Rng g(9);
  double m = 0, v = 0;
  const int cnt = 50000;
  for (int i = 0; i < cnt; ++i) {
    const double x = g.normal();
    m += x;
    v += x * x;
  }
  m /= cnt;
  v = v / cnt - m * m;
  CHECK(std::abs(m) < 0.02);
  CHECK(std::abs(v - 1.0) < 0.03);
}
