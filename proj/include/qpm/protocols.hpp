// Copyright 2026 The qpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qpm/scenario.hpp"

namespace qpm {

// ---------------------------------------------------------------------------
// Teleportation and the universal two-qubit protocol

/// Bell measurement on A'A, shared phi+_d, decoder for outcome (u, v) applies X^u Z^v.
ClassicalProtocol standard_teleport_protocol(int d);

/// The eight three-qubit measurement states on A'_1 A'_2 A, ordered (c, k) with
/// c = 2 c0 + c1.
std::vector<PureVector> universal_measurement_states();
/// Bob's correction for message c = 2 c0 + c1 and target index y in {0, 1}.
Operator universal_correction(int c, int y);
/// Two qubit inputs, one ebit, two classical bits; tau = 5/6 psi_y + 1/6 psi_y^perp.
ClassicalProtocol universal_protocol_2qubit();

/// Channel A'(input_dims) -> B' implemented by a classical protocol for fixed y.
ChoiState effective_channel(const ClassicalProtocol& p, const Dims& input_dims, int y);

/// (1 + 4T + sqrt(2) sqrt(8T^2 - 21T + 13)) / 6 for purity T in [1/2, 1].
double mixed_input_fidelity(double purity);
/// Runs the universal protocol on inputs lambda psi + (1 - lambda) psi^perp and
/// returns the mean fidelity with the mixed target over `samples` random pairs.
double simulate_mixed_input_fidelity(double lambda, int samples = 20, std::uint64_t seed = 1);

/// 5/6 - sin^2(2 theta) / 12 for theta in [0, pi/4].
double swap_fidelity(double theta);
/// Both inputs are halves of cos(theta)|00> + sin(theta)|11>; returns the fidelity of
/// the (B', reference_y) state with that state, for the given y.
double simulate_swap_fidelity(double theta, int y);

struct NoisyPoint {
  double visibility;
  double fidelity;
};
/// Universal protocol with shared state v phi+ + (1 - v) 1/4, averaged over the SIC grid.
std::vector<NoisyPoint> noisy_resource_sweep(const std::vector<double>& visibilities);
/// Linear law v 5/6 + (1 - v) / 2.
double noisy_resource_fidelity(double visibility);

// ---------------------------------------------------------------------------
// No-signaling boxes and random access codes

/// Label arithmetic on [d^2]^N strings: row-major, x_0 most significant.
std::vector<int> unpack_string(std::int64_t index, int n_entries, int alphabet);
std::int64_t pack_string(const std::vector<int>& entries, int alphabet);

/// p(a, b | x, y) with a, b in [d^2], x in [d^2]^N, y in [N], stored as integer
/// numerators over one common denominator so that every marginal is exact.
class NsBox {
 public:
  NsBox(int n_inputs, int d, std::vector<std::int64_t> numerators, std::int64_t denominator);

  int n_inputs() const { return n_; }
  int d() const { return d_; }
  int alphabet() const { return d_ * d_; }
  std::int64_t x_count() const { return x_count_; }
  std::int64_t denominator() const { return den_; }

  std::int64_t numerator(int a, int b, std::int64_t x, int y) const;
  double probability(int a, int b, std::int64_t x, int y) const;

  /// Largest deviation (as a fraction) of Alice's marginal across y and Bob's across x.
  double signaling_residual() const;
  /// Largest |sum_{a,b} p - 1| over (x, y).
  double normalization_residual() const;
  /// (1 / (N d^{2N})) sum_{x,y} p(a + b = x_y mod d^2 | x, y).
  double bell_value() const;

 private:
  std::size_t index(int a, int b, std::int64_t x, int y) const;

  int n_;
  int d_;
  std::int64_t x_count_;
  std::vector<std::int64_t> num_;
  std::int64_t den_;
};

/// p = 1/d^2 when a + b = x_y (mod d^2), else 0.
NsBox ns_box(int n_inputs, int d);
/// a = x_0, b = 0 deterministically.
NsBox local_deterministic_box(int n_inputs, int d);
/// p = 1/d^4 everywhere.
NsBox uniform_box(int n_inputs, int d);

enum class RacKind { kBox, kClassical, kQuantum };

/// Exact guess distribution p(b | x, y) of a random access code over [d^2]^N.
class RacStrategy {
 public:
  RacStrategy(RacKind kind, int n_inputs, int d, std::vector<double> table, std::string label);

  RacKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  int n_inputs() const { return n_; }
  int d() const { return d_; }
  int alphabet() const { return d_ * d_; }
  std::int64_t x_count() const { return x_count_; }

  double guess_probability(int b, std::int64_t x, int y) const;
  /// (1 / (N d^{2N})) sum_{x,y} p(x_y | x, y).
  double success_probability() const;

 private:
  RacKind kind_;
  int n_;
  int d_;
  std::int64_t x_count_;
  std::vector<double> table_;  // [(x * N + y) * alphabet + b]
  std::string label_;
};

/// Alice sends her box outcome a; Bob outputs a + b mod d^2.
RacStrategy rac_from_box(const NsBox& box);

/// Deterministic strategy: Alice sends encode[x], Bob outputs decode[m][y].
struct DeterministicRac {
  std::vector<int> encode;               // [x]
  std::vector<std::vector<int>> decode;  // [message][y]
  double weight = 1.0;
};
/// Convex mixture of deterministic strategies (weights normalised internally).
RacStrategy classical_rac(int n_inputs, int d, const std::vector<DeterministicRac>& parts);
/// Bob ignores everything and guesses uniformly.
RacStrategy random_guess_rac(int n_inputs, int d);

/// Entanglement-assisted code: Alice measures {A_{c|x}} on A, Bob {B_{b|y,c}} on B.
struct QuantumRacParts {
  int n_inputs = 0;
  int d = 0;
  Operator shared_state;                             // dims {d_a, d_b}
  std::vector<Povm> alice;                           // [x], outcomes c
  std::vector<std::vector<Povm>> bob;                // [y][c], outcomes b
};
RacStrategy quantum_rac(const QuantumRacParts& parts);

// ---------------------------------------------------------------------------
// Stochastic teleportation from a random access code

struct StochasticTeleportSpec {
  int n_inputs = 2;
  int d = 2;
};

/// Relabeling group used for symmetrisation: x -> alpha x + beta over GF(d^2).
class AffineRelabeling {
 public:
  explicit AffineRelabeling(int q);
  int size() const { return static_cast<int>(maps_.size()); }
  int apply(int g, int label) const { return maps_[g][label]; }
  int inverse(int g, int label) const { return inverses_[g][label]; }

 private:
  std::vector<std::vector<int>> maps_;
  std::vector<std::vector<int>> inverses_;
};

/// Bell-measure every (input_k, A_k) pair, run the code on the outcomes, and
/// correct Bob's copy y with the guessed Weyl operator.
class StochasticTeleportSimulator {
 public:
  StochasticTeleportSimulator(RacStrategy rac, StochasticTeleportSpec spec, bool symmetrize = true);

  /// Bob's output for the product input and target y.
  Operator output_state(const std::vector<PureVector>& inputs, int y) const;
  /// Average of <psi_y| tau |psi_y> over the SIC product grid and y.
  double average_fidelity() const;
  /// (d P + 1) / (d + 1).
  double formula_fidelity() const;

  const RacStrategy& rac() const { return rac_; }
  bool symmetrized() const { return symmetrize_; }

 private:
  RacStrategy rac_;
  StochasticTeleportSpec spec_;
  bool symmetrize_;
  // probability that Bob's final label is b given Alice's Bell outcomes x and y
  std::vector<double> final_label_;  // [(x * N + y) * alphabet + b]
};

StochasticTeleportSimulator compose_stochastic_teleport(const RacStrategy& rac,
                                                        const StochasticTeleportSpec& spec,
                                                        bool symmetrize = true);

struct RacBound {
  double success;   // (1/N)(1 + (N - 1)/d)
  double fidelity;  // (2N + d - 1) / (N (d + 1))
};
RacBound rac_bound(int n_inputs, int d);

// ---------------------------------------------------------------------------
// Classical <-> quantum message transformers

/// Teleports the quantum message through an extra phi+_{d_C}; the classical
/// message is the Bell outcome (alphabet d_C^2).
ClassicalProtocol result1_classicalize(const QuantumProtocol& p);
/// Dense-codes the classical message (alphabet d_C^2) into a d_C-dimensional
/// quantum message using an extra phi+_{d_C}.
QuantumProtocol result1_quantize(const ClassicalProtocol& p);

}  // namespace qpm
