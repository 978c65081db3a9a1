#include "fafkit/qstate.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>

namespace faf {

namespace {

constexpr cplx kI{0.0, 1.0};

const std::array<cplx, 4> kPhaseTable = {cplx{1, 0}, cplx{0, 1}, cplx{-1, 0},
                                         cplx{0, -1}};

// Single-letter products: kMulLetter[a][b] is the letter of a*b and
// kMulPhase[a][b] the power of i in a*b = i^k c.
constexpr uint8_t kMulLetter[4][4] = {
    {0, 1, 2, 3},
    {1, 0, 3, 2},
    {2, 3, 0, 1},
    {3, 2, 1, 0},
};
constexpr uint8_t kMulPhase[4][4] = {
    {0, 0, 0, 0},
    {0, 0, 1, 3},
    {0, 3, 0, 1},
    {0, 1, 3, 0},
};

void check_qubit_count(int n, int cap, const char* what) {
  if (n < 1) throw ContractError(std::string(what) + ": need at least 1 qubit");
  if (n > cap)
    throw SizeError(std::string(what) + ": " + std::to_string(n) +
                    " qubits exceeds dense cap " + std::to_string(cap));
}

void check_targets(int n, std::span<const int> targets) {
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= n)
      throw ContractError("target qubit out of range");
    for (size_t j = i + 1; j < targets.size(); ++j)
      if (targets[i] == targets[j])
        throw ContractError("duplicate target qubit");
  }
}

int parity(uint64_t x) { return std::popcount(x) & 1; }

}  // namespace

char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

PauliString::PauliString(int phase_pow, std::vector<Pauli> letters)
    : phase_pow_(((phase_pow % 4) + 4) % 4), letters_(std::move(letters)) {
  if (letters_.empty()) throw ContractError("empty Pauli string");
  if (letters_.size() > 64) throw SizeError("Pauli string longer than 64 qubits");
  const int n = static_cast<int>(letters_.size());
  for (int q = 0; q < n; ++q) {
    const uint64_t bit = uint64_t{1} << (n - 1 - q);
    switch (letters_[q]) {
      case Pauli::I: break;
      case Pauli::X: x_mask_ |= bit; break;
      case Pauli::Y: x_mask_ |= bit; z_mask_ |= bit; break;
      case Pauli::Z: z_mask_ |= bit; break;
    }
  }
}

PauliString PauliString::identity(int n_qubits) {
  return PauliString(0, std::vector<Pauli>(n_qubits, Pauli::I));
}

PauliString PauliString::single(Pauli p, int qubit, int n_qubits) {
  if (qubit < 0 || qubit >= n_qubits) throw ContractError("qubit out of range");
  std::vector<Pauli> ls(n_qubits, Pauli::I);
  ls[qubit] = p;
  return PauliString(0, std::move(ls));
}

cplx PauliString::phase() const { return kPhaseTable[phase_pow_]; }

int PauliString::weight() const {
  int w = 0;
  for (Pauli p : letters_)
    if (p != Pauli::I) ++w;
  return w;
}

PauliString PauliString::operator*(const PauliString& rhs) const {
  if (n_qubits() != rhs.n_qubits())
    throw ContractError("Pauli product: length mismatch");
  int k = phase_pow_ + rhs.phase_pow_;
  std::vector<Pauli> out(letters_.size());
  for (size_t q = 0; q < letters_.size(); ++q) {
    const int a = static_cast<int>(letters_[q]);
    const int b = static_cast<int>(rhs.letters_[q]);
    out[q] = static_cast<Pauli>(kMulLetter[a][b]);
    k += kMulPhase[a][b];
  }
  return PauliString(k, std::move(out));
}

PauliString PauliString::negated() const {
  return PauliString(phase_pow_ + 2, letters_);
}

bool PauliString::commutes_with(const PauliString& rhs) const {
  if (n_qubits() != rhs.n_qubits())
    throw ContractError("Pauli commutator: length mismatch");
  return (parity(x_mask_ & rhs.z_mask_) ^ parity(z_mask_ & rhs.x_mask_)) == 0;
}

std::string PauliString::to_string() const {
  static const char* signs[4] = {"+", "+i", "-", "-i"};
  std::string s = signs[phase_pow_];
  for (Pauli p : letters_) s += pauli_char(p);
  return s;
}

cplx PauliString::coeff(uint64_t x) const {
  const int y_count = std::popcount(x_mask_ & z_mask_);
  const int k = (phase_pow_ + y_count) & 3;
  cplx c = kPhaseTable[k];
  return parity(x & z_mask_) ? -c : c;
}

Mat pauli_to_matrix(const PauliString& p) {
  check_qubit_count(p.n_qubits(), kMaxPureQubits, "pauli_to_matrix");
  const uint64_t dim = uint64_t{1} << p.n_qubits();
  Mat m = Mat::Zero(dim, dim);
  for (uint64_t x = 0; x < dim; ++x) m(x ^ p.flip_mask(), x) = p.coeff(x);
  return m;
}

// ---------------------------------------------------------------------------

PureState::PureState(int n_qubits, Vec amplitudes)
    : n(n_qubits), amps(std::move(amplitudes)) {
  check_qubit_count(n, kMaxPureQubits, "PureState");
  if (static_cast<uint64_t>(amps.size()) != dim())
    throw ContractError("PureState: amplitude count != 2^n");
  if (std::abs(amps.norm() - 1.0) > kNormTol)
    throw ContractError("PureState: vector is not normalized");
}

PureState PureState::basis_state(int n_qubits, uint64_t index) {
  check_qubit_count(n_qubits, kMaxPureQubits, "PureState");
  const uint64_t dim = uint64_t{1} << n_qubits;
  if (index >= dim) throw ContractError("basis_state: index out of range");
  Vec v = Vec::Zero(dim);
  v(index) = 1.0;
  return PureState(n_qubits, std::move(v));
}

MixedState MixedState::from_matrix(int n_qubits, Mat rho) {
  check_qubit_count(n_qubits, kMaxMixedQubits, "MixedState");
  const uint64_t dim = uint64_t{1} << n_qubits;
  if (rho.rows() != static_cast<Eigen::Index>(dim) ||
      rho.cols() != static_cast<Eigen::Index>(dim))
    throw ContractError("MixedState: matrix is not 2^n x 2^n");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
    throw ContractError("MixedState: matrix is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > kNormTol ||
      std::abs(rho.trace().imag()) > kNormTol)
    throw ContractError("MixedState: trace != 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol)
    throw ContractError("MixedState: matrix is not positive semidefinite");
  MixedState s;
  s.n = n_qubits;
  s.rho = std::move(rho);
  return s;
}

MixedState MixedState::from_pure(const PureState& psi) {
  if (psi.n > kMaxMixedQubits)
    throw SizeError("MixedState: pure state exceeds density-matrix cap");
  MixedState s;
  s.n = psi.n;
  s.rho = psi.amps * psi.amps.adjoint();
  return s;
}

MixedState MixedState::maximally_mixed(int n_qubits) {
  check_qubit_count(n_qubits, kMaxMixedQubits, "MixedState");
  const uint64_t dim = uint64_t{1} << n_qubits;
  MixedState s;
  s.n = n_qubits;
  s.rho = Mat::Identity(dim, dim) / static_cast<double>(dim);
  return s;
}

MixedState MixedState::unchecked(int n_qubits, Mat rho) {
  MixedState s;
  s.n = n_qubits;
  s.rho = std::move(rho);
  return s;
}

// ---------------------------------------------------------------------------

void apply_gate_vec(Vec& amps, int n, const Mat& u,
                    std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  if (k < 1 || k > n) throw ContractError("apply_gate_vec: bad target count");
  check_targets(n, targets);
  const uint64_t block = uint64_t{1} << k;
  if (u.rows() != static_cast<Eigen::Index>(block) ||
      u.cols() != static_cast<Eigen::Index>(block))
    throw ContractError("apply_gate_vec: matrix size != 2^k");

  uint64_t tmask = 0;
  std::vector<uint64_t> offs(block, 0);
  for (int i = 0; i < k; ++i) {
    const uint64_t bit = uint64_t{1} << (n - 1 - targets[i]);
    tmask |= bit;
    for (uint64_t r = 0; r < block; ++r)
      if ((r >> (k - 1 - i)) & 1u) offs[r] |= bit;
  }

  const uint64_t dim = uint64_t{1} << n;
  Vec in(block), out(block);
  for (uint64_t base = 0; base < dim; ++base) {
    if (base & tmask) continue;
    for (uint64_t r = 0; r < block; ++r) in(r) = amps(base | offs[r]);
    out.noalias() = u * in;
    for (uint64_t r = 0; r < block; ++r) amps(base | offs[r]) = out(r);
  }
}

Vec apply_pauli_vec(const PauliString& p, const Vec& amps, int n) {
  if (p.n_qubits() != n) throw ContractError("apply_pauli_vec: length mismatch");
  const uint64_t dim = uint64_t{1} << n;
  Vec out(dim);
  const uint64_t flip = p.flip_mask();
  for (uint64_t x = 0; x < dim; ++x) out(x ^ flip) = p.coeff(x) * amps(x);
  return out;
}

namespace {

void check_unitary(const Mat& u) {
  const Mat g = u.adjoint() * u;
  if ((g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw ContractError("apply_unitary: matrix is not unitary");
}

// rho <- A rho (A acting on `targets`).
void left_apply(Mat& rho, int n, const Mat& a, std::span<const int> targets) {
  Vec col(rho.rows());
  for (Eigen::Index c = 0; c < rho.cols(); ++c) {
    col = rho.col(c);
    apply_gate_vec(col, n, a, targets);
    rho.col(c) = col;
  }
}

// rho <- rho A^dagger.
void right_apply_dagger(Mat& rho, int n, const Mat& a,
                        std::span<const int> targets) {
  const Mat ac = a.conjugate();
  Vec row(rho.cols());
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    row = rho.row(r).transpose();
    apply_gate_vec(row, n, ac, targets);
    rho.row(r) = row.transpose();
  }
}

}  // namespace

void apply_unitary(PureState& s, const Mat& u, std::span<const int> targets) {
  check_unitary(u);
  apply_gate_vec(s.amps, s.n, u, targets);
}

void apply_unitary(MixedState& s, const Mat& u, std::span<const int> targets) {
  check_unitary(u);
  left_apply(s.rho, s.n, u, targets);
  right_apply_dagger(s.rho, s.n, u, targets);
}

cplx expectation(const PureState& s, const PauliString& p) {
  return s.amps.dot(apply_pauli_vec(p, s.amps, s.n));
}

cplx expectation(const MixedState& s, const PauliString& p) {
  if (p.n_qubits() != s.n) throw ContractError("expectation: length mismatch");
  const uint64_t flip = p.flip_mask();
  cplx tr = 0.0;
  for (uint64_t x = 0; x < s.dim(); ++x) tr += s.rho(x, x ^ flip) * p.coeff(x);
  return tr;
}

namespace {

void check_measurable(const PauliString& p) {
  if (!p.is_hermitian())
    throw ContractError("measure_pauli: string is not Hermitian");
}

int draw_outcome(double exp_val, Rng& rng) {
  double p_plus = 0.5 * (1.0 + exp_val);
  p_plus = std::clamp(p_plus, 0.0, 1.0);
  return rng.uniform() < p_plus ? +1 : -1;
}

}  // namespace

int measure_pauli(PureState& s, const PauliString& p, Rng& rng) {
  check_measurable(p);
  const Vec pv = apply_pauli_vec(p, s.amps, s.n);
  const double exp_val = s.amps.dot(pv).real();
  const int outcome = draw_outcome(exp_val, rng);
  Vec proj = 0.5 * (s.amps + static_cast<double>(outcome) * pv);
  const double norm = proj.norm();
  if (norm < 1e-12)
    throw Error("measure_pauli: projection has vanishing weight");
  s.amps = proj / norm;
  return outcome;
}

int measure_pauli(MixedState& s, const PauliString& p, Rng& rng) {
  check_measurable(p);
  if (p.n_qubits() != s.n) throw ContractError("measure_pauli: length mismatch");
  const double exp_val = expectation(s, p).real();
  const int outcome = draw_outcome(exp_val, rng);
  const double sgn = outcome;
  const uint64_t flip = p.flip_mask();
  const uint64_t dim = s.dim();
  // (I + sP)/2 rho (I + sP)/2 expanded into shifted copies of rho.
  Mat out(dim, dim);
  for (uint64_t x = 0; x < dim; ++x) {
    const cplx cx = p.coeff(x ^ flip);  // P(x, x^flip)
    for (uint64_t y = 0; y < dim; ++y) {
      const cplx cy = p.coeff(y);  // P(y^flip, y)
      out(x, y) = 0.25 * (s.rho(x, y) + sgn * cx * s.rho(x ^ flip, y) +
                          sgn * s.rho(x, y ^ flip) * cy +
                          cx * s.rho(x ^ flip, y ^ flip) * cy);
    }
  }
  const double tr = out.trace().real();
  if (tr < 1e-12)
    throw Error("measure_pauli: projection has vanishing weight");
  s.rho = out / tr;
  return outcome;
}

namespace {

uint64_t sample_from_weights(const double* w, uint64_t dim, Rng& rng) {
  double total = 0.0;
  for (uint64_t x = 0; x < dim; ++x) total += w[x];
  const double r = rng.uniform() * total;
  double acc = 0.0;
  for (uint64_t x = 0; x < dim; ++x) {
    acc += w[x];
    if (r < acc) return x;
  }
  return dim - 1;
}

}  // namespace

uint64_t sample_computational(const PureState& s, Rng& rng) {
  const uint64_t dim = s.dim();
  std::vector<double> w(dim);
  for (uint64_t x = 0; x < dim; ++x) w[x] = std::norm(s.amps(x));
  return sample_from_weights(w.data(), dim, rng);
}

uint64_t sample_computational(const MixedState& s, Rng& rng) {
  const uint64_t dim = s.dim();
  std::vector<double> w(dim);
  for (uint64_t x = 0; x < dim; ++x) w[x] = std::max(0.0, s.rho(x, x).real());
  return sample_from_weights(w.data(), dim, rng);
}

double purity(const MixedState& s) {
  // tr(rho^2) = ||rho||_F^2 for Hermitian rho.
  return s.rho.squaredNorm();
}

PureState tensor(const PureState& a, const PureState& b) {
  const int n = a.n + b.n;
  check_qubit_count(n, kMaxPureQubits, "tensor");
  Vec v(uint64_t{1} << n);
  for (uint64_t ia = 0; ia < a.dim(); ++ia)
    for (uint64_t ib = 0; ib < b.dim(); ++ib)
      v((ia << b.n) | ib) = a.amps(ia) * b.amps(ib);
  return PureState(n, std::move(v));
}

MixedState tensor(const MixedState& a, const MixedState& b) {
  const int n = a.n + b.n;
  check_qubit_count(n, kMaxMixedQubits, "tensor");
  const uint64_t db = b.dim();
  Mat m(uint64_t{1} << n, uint64_t{1} << n);
  for (uint64_t ra = 0; ra < a.dim(); ++ra)
    for (uint64_t ca = 0; ca < a.dim(); ++ca)
      m.block(ra * db, ca * db, db, db) = a.rho(ra, ca) * b.rho;
  return MixedState::unchecked(n, std::move(m));
}

std::vector<std::pair<double, PureState>> eig_decompose(const MixedState& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s.rho);
  if (es.info() != Eigen::Success)
    throw Error("eig_decompose: eigensolver failed");
  const auto& vals = es.eigenvalues();
  if (vals.minCoeff() < -kPsdTol)
    throw ContractError("eig_decompose: state is not positive semidefinite");
  std::vector<std::pair<double, PureState>> out;
  double total = 0.0;
  for (Eigen::Index i = vals.size() - 1; i >= 0; --i) {
    const double p = vals(i);
    if (p < kEigClampTol) continue;
    total += p;
    out.emplace_back(p, PureState(s.n, es.eigenvectors().col(i)));
  }
  if (out.empty()) throw Error("eig_decompose: no eigenvalue above threshold");
  for (auto& [p, v] : out) p /= total;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

NoiseChannel make_channel(ChannelKind kind, double strength,
                          std::vector<Eigen::Matrix2cd> kraus) {
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (const auto& k : kraus) sum += k.adjoint() * k;
  if ((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw ContractError("NoiseChannel: Kraus set is not trace preserving");
  return NoiseChannel{kind, strength, std::move(kraus)};
}

void check_strength(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ContractError(std::string(name) + ": strength outside [0, 1]");
}

}  // namespace

NoiseChannel NoiseChannel::depolarizing(double p) {
  check_strength(p, "depolarizing");
  Eigen::Matrix2cd i2 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd x{{0, 1}, {1, 0}};
  Eigen::Matrix2cd y{{0, -kI}, {kI, 0}};
  Eigen::Matrix2cd z{{1, 0}, {0, -1}};
  const double a = std::sqrt(1.0 - 0.75 * p), b = std::sqrt(0.25 * p);
  return make_channel(ChannelKind::Depolarizing, p,
                      {a * i2, b * x, b * y, b * z});
}

NoiseChannel NoiseChannel::amplitude_damping(double gamma) {
  check_strength(gamma, "amplitude_damping");
  Eigen::Matrix2cd k0{{1, 0}, {0, std::sqrt(1.0 - gamma)}};
  Eigen::Matrix2cd k1{{0, std::sqrt(gamma)}, {0, 0}};
  return make_channel(ChannelKind::AmplitudeDamping, gamma, {k0, k1});
}

NoiseChannel NoiseChannel::dephasing(double p) {
  check_strength(p, "dephasing");
  Eigen::Matrix2cd i2 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd z{{1, 0}, {0, -1}};
  // Off-diagonal elements scale by exactly 1 - p.
  return make_channel(ChannelKind::Dephasing, p,
                      {std::sqrt(1.0 - 0.5 * p) * i2, std::sqrt(0.5 * p) * z});
}

NoiseChannel NoiseChannel::bit_flip(double p) {
  check_strength(p, "bit_flip");
  Eigen::Matrix2cd i2 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd x{{0, 1}, {1, 0}};
  return make_channel(ChannelKind::BitFlip, p,
                      {std::sqrt(1.0 - 0.5 * p) * i2, std::sqrt(0.5 * p) * x});
}

const char* NoiseChannel::kind_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::Depolarizing: return "depolarizing";
    case ChannelKind::AmplitudeDamping: return "amplitude_damping";
    case ChannelKind::Dephasing: return "dephasing";
    case ChannelKind::BitFlip: return "bit_flip";
  }
  return "unknown";
}

void apply_channel(MixedState& s, const NoiseChannel& ch, int qubit) {
  if (qubit < 0 || qubit >= s.n)
    throw ContractError("apply_channel: qubit out of range");
  const int targets[1] = {qubit};
  Mat acc = Mat::Zero(s.rho.rows(), s.rho.cols());
  Mat tmp;
  for (const auto& k : ch.kraus) {
    tmp = s.rho;
    Mat km = k;
    left_apply(tmp, s.n, km, targets);
    right_apply_dagger(tmp, s.n, km, targets);
    acc += tmp;
  }
  s.rho = std::move(acc);
}

}  // namespace faf
