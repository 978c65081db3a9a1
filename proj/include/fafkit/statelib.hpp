#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fafkit/majorana.hpp"
#include "fafkit/qstate.hpp"
#include "fafkit/report.hpp"
#include "fafkit/rng.hpp"

namespace faf {

// --- reference state families ----------------------------------------------

enum class EnsembleKind {
  Haar,           // Haar-random statevector
  SubsetPhase,    // uniform support on 2^q indices with random phases
  GaussianRandom, // gaussian_pure with N(0,1) generator entries, even parity
  Cat,            // sqrt(1-eps2)|0..0> + sqrt(eps2)|1..1>
  Ghz,            // cat with eps2 = 1/2
  Defect,         // GHZ block on the first four qubits, vacuum elsewhere
  Basis,          // computational basis state
};

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Haar;
  int n = 0;
  int q = 0;                // SubsetPhase: varying-qubit count, 0..n
  double eps2 = 0.0;        // Cat: weight of the flipped branch, in [0, 1]
  uint64_t basis_index = 0; // Basis
};

PureState make_state(const EnsembleSpec& spec, Rng& rng);

const char* ensemble_kind_name(EnsembleKind k);

/// faf_1 of the cat family, valid for n >= 3: 4 n eps2 (1 - eps2).
double cat_faf1(int n, double eps2);

/// faf_1 values of `count` independent draws.
std::vector<double> sample_ensemble_faf(const EnsembleSpec& spec, int count,
                                        Rng& rng);

/// Antisymmetric matrix with independent N(0,1) strict-upper entries.
Eigen::MatrixXd random_antisymmetric(int dim, Rng& rng);

// --- global depolarizing closed forms --------------------------------------

MixedState global_depolarize(const PureState& psi, double p);

struct DepolPredictions {
  double faf1 = 0;
  double purity = 0;
  double witness = 0;
  double witness_lower = 0;  // (1-p)^2 faf1(psi), a floor on the witness
};

/// Closed forms for (1-p) psi + p I/2^n in terms of r_psi = n - faf1(psi).
DepolPredictions depol_predictions(double r_psi, double p, int n);
DepolPredictions depol_predictions(const PureState& psi, double p);

// --- ensemble-mean references ----------------------------------------------

/// Haar average of faf_1: n - n(2n-1)/(2^n + 1).
double haar_faf_mean(int n);

/// Lower bound on the subset-phase ensemble mean of faf_1:
/// max(0, n - n(2n-1)/2^q).
double subset_phase_faf_lower(int n, int q);

/// Minimum count of m-mode non-Gaussian gates needed to reach the given
/// faf_1 from a Gaussian start; each gate moves faf_1 by at most 4m.
long nongaussian_gate_lower_bound(double faf1_target, int m);

// --- circuits ---------------------------------------------------------------

struct CircuitOp {
  enum class Kind { Matchgate, Rxx, Rz, Rzz };
  Kind kind = Kind::Rz;
  int q0 = 0;
  int q1 = -1;   // second qubit; -1 for single-qubit ops
  double angle = 0.0;                  // Rxx / Rz / Rzz
  double g = 0.0;                      // Matchgate strength
  std::array<double, 6> couplings{};   // Matchgate bilinear coefficients
};

struct NoiseSpec {
  enum class Placement { AfterTwoQubitGate, AfterLayer };
  ChannelKind kind = ChannelKind::Depolarizing;
  double strength = 0.0;
  Placement placement = Placement::AfterTwoQubitGate;

  NoiseChannel channel() const;
};

struct CircuitSpec {
  int n = 0;
  std::vector<CircuitOp> ops;
  /// Prefix op counts closing each layer; an implicit final layer covers any
  /// remaining ops. Used for Placement::AfterLayer.
  std::vector<int> layer_ends;
  std::optional<NoiseSpec> noise;
};

/// Depolarizing strength fitted to the hardware run this family of circuits
/// reproduces; default for noisy sweeps.
inline constexpr double kHardwareFitDepolarizing = 0.036;

/// Random matchgate brickwork on an even number of modes: depth layers of
/// staggered nearest-neighbor (periodic) gates, couplings N(0,1), strength g.
CircuitSpec brickwork_matchgate(int n, int depth, double g, Rng& rng);

/// Fixed four-mode probe circuit whose output interpolates from Gaussian to
/// maximally witnessed as theta goes 0 -> pi/2.
CircuitSpec theta_fixture_circuit(double theta,
                                  std::optional<NoiseSpec> noise = {});

/// Noiseless witness of the fixture output: 4 sin^2(theta).
double theta_fixture_witness(double theta);

/// Pure evolution; rejects specs that carry noise.
PureState run_circuit_pure(const CircuitSpec& spec, const PureState& initial);

MixedState run_circuit(const CircuitSpec& spec, const MixedState& initial);
MixedState run_circuit(const CircuitSpec& spec, const PureState& initial);

// --- theta sweep ------------------------------------------------------------

struct SweepRow {
  double theta = 0;
  double p = 0;
  double witness_exact = 0;
  double witness_est = 0;
  double est_std_error = 0;
  long shots = 0;
  uint64_t seed = 0;
};

/// For each theta: build the fixture, evolve, record the exact witness and a
/// Bell-estimated witness from `shots` two-copy shots (delta = 0.05 batching).
std::vector<SweepRow> theta_sweep_experiment(const std::vector<double>& thetas,
                                             std::optional<NoiseSpec> noise,
                                             long shots, Rng& rng);

// --- serialization ----------------------------------------------------------

std::string circuit_to_json(const CircuitSpec& spec);
CircuitSpec circuit_from_json(const std::string& text);

}  // namespace faf
