#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fafkit/errors.hpp"
#include "fafkit/rng.hpp"

namespace faf {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Dense statevector cap: pure states up to this many qubits.
inline constexpr int kMaxPureQubits = 12;
/// Dense density-matrix cap.
inline constexpr int kMaxMixedQubits = 10;

inline constexpr double kNormTol = 1e-10;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kEigClampTol = 1e-12;

/// Bit of qubit `q` in basis index `x`. Qubit 0 is the most significant bit,
/// so |q0 q1 ... q_{n-1}> has index q0*2^{n-1} + ... + q_{n-1}.
inline int qubit_bit(uint64_t x, int q, int n) {
  return static_cast<int>((x >> (n - 1 - q)) & 1u);
}

enum class Pauli : uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);

// Pauli string with a phase restricted to {1, i, -1, -i}, stored as the
// exponent k in i^k. Closed under multiplication.
class PauliString {
 public:
  PauliString(int phase_pow, std::vector<Pauli> letters);

  static PauliString identity(int n_qubits);
  /// Single non-identity letter at `qubit`, identity elsewhere.
  static PauliString single(Pauli p, int qubit, int n_qubits);

  int n_qubits() const { return static_cast<int>(letters_.size()); }
  int phase_pow() const { return phase_pow_; }
  cplx phase() const;
  const std::vector<Pauli>& letters() const { return letters_; }
  Pauli letter(int q) const { return letters_[q]; }

  int weight() const;  // number of non-identity letters
  bool is_hermitian() const { return phase_pow_ % 2 == 0; }

  PauliString operator*(const PauliString& rhs) const;
  PauliString negated() const;
  bool commutes_with(const PauliString& rhs) const;
  bool operator==(const PauliString& rhs) const = default;

  /// e.g. "+XYZI", "-iZZ".
  std::string to_string() const;

  // Bit masks over basis-index bit positions (qubit q -> bit n-1-q).
  uint64_t x_mask() const { return x_mask_; }
  uint64_t z_mask() const { return z_mask_; }
  uint64_t y_mask() const { return x_mask_ & z_mask_; }

  /// Action on a basis state: P|x> = coeff(x) |x ^ flip_mask()>.
  uint64_t flip_mask() const { return x_mask_; }
  cplx coeff(uint64_t x) const;

 private:
  int phase_pow_;  // 0..3
  std::vector<Pauli> letters_;
  uint64_t x_mask_ = 0;  // letters in {X, Y}
  uint64_t z_mask_ = 0;  // letters in {Z, Y}
};

/// Dense matrix of the string, 2^n x 2^n including the phase.
Mat pauli_to_matrix(const PauliString& p);

// ---------------------------------------------------------------------------

/// Normalized dense statevector.
struct PureState {
  int n = 0;
  Vec amps;

  PureState() = default;
  /// Validates the size cap and the norm (tolerance kNormTol).
  PureState(int n_qubits, Vec amplitudes);

  static PureState basis_state(int n_qubits, uint64_t index);

  uint64_t dim() const { return uint64_t{1} << n; }
};

/// Density matrix. Factory from_matrix validates Hermiticity, unit trace and
/// positive semidefiniteness; internal operations preserve those invariants
/// by construction and skip the O(D^3) check.
struct MixedState {
  int n = 0;
  Mat rho;

  MixedState() = default;

  static MixedState from_matrix(int n_qubits, Mat rho);
  static MixedState from_pure(const PureState& psi);
  static MixedState maximally_mixed(int n_qubits);

  /// No validation; for code paths that preserve the invariants.
  static MixedState unchecked(int n_qubits, Mat rho);

  uint64_t dim() const { return uint64_t{1} << n; }
};

// --- low-level kernels on raw amplitude vectors ----------------------------

/// Apply a 2^k x 2^k unitary to `targets` (distinct qubits; targets[0] is the
/// most significant index bit of the gate block). O(2^n * 4^k).
void apply_gate_vec(Vec& amps, int n, const Mat& u, std::span<const int> targets);

/// |out> = P |in>.
Vec apply_pauli_vec(const PauliString& p, const Vec& amps, int n);

// --- state operations ------------------------------------------------------

void apply_unitary(PureState& s, const Mat& u, std::span<const int> targets);
void apply_unitary(MixedState& s, const Mat& u, std::span<const int> targets);

cplx expectation(const PureState& s, const PauliString& p);
cplx expectation(const MixedState& s, const PauliString& p);

/// Projective measurement of a Hermitian Pauli string; collapses in place and
/// returns the outcome (+1 or -1).
int measure_pauli(PureState& s, const PauliString& p, Rng& rng);
int measure_pauli(MixedState& s, const PauliString& p, Rng& rng);

/// One computational-basis sample (qubit 0 = most significant bit).
uint64_t sample_computational(const PureState& s, Rng& rng);
uint64_t sample_computational(const MixedState& s, Rng& rng);

double purity(const MixedState& s);

PureState tensor(const PureState& a, const PureState& b);
MixedState tensor(const MixedState& a, const MixedState& b);

/// Spectral decomposition: (probability, eigenstate) pairs with probability
/// descending. Eigenvalues below kEigClampTol are dropped and the remainder
/// renormalized.
std::vector<std::pair<double, PureState>> eig_decompose(const MixedState& s);

// --- single-qubit noise channels -------------------------------------------

enum class ChannelKind : uint8_t { Depolarizing, AmplitudeDamping, Dephasing, BitFlip };

/// CPTP single-qubit channel given by explicit Kraus operators. Factories
/// validate strength ranges and the trace-preservation identity to 1e-12.
struct NoiseChannel {
  ChannelKind kind;
  double strength;
  std::vector<Eigen::Matrix2cd> kraus;

  static NoiseChannel depolarizing(double p);
  static NoiseChannel amplitude_damping(double gamma);
  static NoiseChannel dephasing(double p);
  static NoiseChannel bit_flip(double p);

  static const char* kind_name(ChannelKind k);
};

/// Apply the channel to one qubit of a density matrix.
void apply_channel(MixedState& s, const NoiseChannel& ch, int qubit);

}  // namespace faf
