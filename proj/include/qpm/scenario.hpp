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
#include <vector>

#include "qpm/quantum.hpp"

namespace qpm {

/// How the input catalogue was produced.
enum class InputSetKind { kExplicit, kDesign };

/// Prepare-and-measure task with quantum inputs: the input catalogue on H_A',
/// Bob's Y choices and the target channel for each choice.
///
/// The catalogue is materialised at construction; targets are evaluated on every
/// catalogue entry once and cached.
class ScenarioSpec {
 public:
  ScenarioSpec(Dims input_dims, std::vector<Operator> inputs, Dims output_dims,
               std::vector<ChoiState> targets, InputSetKind kind = InputSetKind::kExplicit);

  /// Catalogue = product of SIC 2-designs on every input factor.
  static ScenarioSpec with_design(const Dims& input_dims, const Dims& output_dims,
                                  std::vector<ChoiState> targets);
  /// Explicit list of pure inputs.
  static ScenarioSpec with_states(const Dims& input_dims, const std::vector<PureVector>& states,
                                  const Dims& output_dims, std::vector<ChoiState> targets);

  /// N inputs of dimension d, Y = N partial-trace targets, SIC product catalogue.
  static ScenarioSpec stochastic_teleportation(int n_inputs, int d);

  /// Same targets; catalogue extended by `count` seeded Haar product states.
  ScenarioSpec augmented(int count, std::uint64_t seed) const;

  const Dims& input_dims() const { return input_dims_; }
  const Dims& output_dims() const { return output_dims_; }
  int input_dim() const { return input_dims_.total(); }
  int output_dim() const { return output_dims_.total(); }
  int input_count() const { return static_cast<int>(inputs_.size()); }
  int y_count() const { return static_cast<int>(targets_.size()); }
  InputSetKind kind() const { return kind_; }

  const Operator& input(int k) const { return inputs_.at(k); }
  const std::vector<Operator>& inputs() const { return inputs_; }
  const ChoiState& target(int y) const { return targets_.at(y); }
  const std::vector<ChoiState>& targets() const { return targets_; }
  /// Theta_y(input k).
  const Operator& target_state(int k, int y) const { return target_states_.at(k).at(y); }
  bool targets_pure() const { return targets_pure_; }

 private:
  Dims input_dims_;
  Dims output_dims_;
  std::vector<Operator> inputs_;
  std::vector<ChoiState> targets_;
  InputSetKind kind_;
  std::vector<std::vector<Operator>> target_states_;
  bool targets_pure_ = true;
};

enum class MessageKind { kClassical, kQuantum };

std::string to_string(MessageKind kind);

/// Communication resources: message dimension, shared state on A (x) B, message type.
struct ResourceSpec {
  ResourceSpec() = default;
  ResourceSpec(int d_c, Operator shared_state, int d_a, int d_b, MessageKind kind);

  int d_c = 1;
  int d_a = 1;
  int d_b = 1;
  Operator shared_state;  // dims {d_a, d_b}
  MessageKind kind = MessageKind::kClassical;

  /// `ebits` copies of phi+_2 (dimension 2^ebits per side) or phi+_d for `local_dim`.
  static ResourceSpec maximally_entangled(int local_dim, int d_c, MessageKind kind);
  /// v phi+_d + (1 - v) 1 / d^2.
  static ResourceSpec isotropic(int local_dim, double v, int d_c, MessageKind kind);
};

/// Classical message: joint POVM {M^c} on A'A and decoder Choi states eta_{c,y} on B -> B'.
struct ClassicalProtocol {
  ResourceSpec resource;
  Povm encoder;                                 // dims: input_dims ++ {d_a}
  std::vector<std::vector<ChoiState>> decoders;  // [c][y]

  void validate(const ScenarioSpec& s, double tol = tol::kIdentity) const;
};

/// Quantum message: encoder Choi state on C (x) A'A and decoders eta_y on B' (x) (B C).
struct QuantumProtocol {
  ResourceSpec resource;
  ChoiState encoder;               // in: input_dims ++ {d_a}, out: {d_c}
  std::vector<ChoiState> decoders;  // [y], in: {d_b, d_c}

  void validate(const ScenarioSpec& s, double tol = tol::kIdentity) const;
};

/// tau_{psi,y} for every catalogue entry and every y.
struct CorrelationTable {
  std::vector<std::vector<Operator>> entries;  // [input][y]

  int input_count() const { return static_cast<int>(entries.size()); }
  int y_count() const { return entries.empty() ? 0 : static_cast<int>(entries.front().size()); }
  const Operator& at(int k, int y) const { return entries.at(k).at(y); }
  /// max entrywise difference between two tables of the same shape.
  double max_difference(const CorrelationTable& other) const;
};

/// sigma_{c|rho} = tr_{A'A}[(rho (x) shared)(M^c (x) 1_B)] for every c.
std::vector<Operator> remote_states(const ClassicalProtocol& p, const Operator& input);
/// sigma_rho on B (x) C.
Operator remote_state(const QuantumProtocol& p, const Operator& input);

CorrelationTable correlations_classical(const ClassicalProtocol& p, const ScenarioSpec& s);
CorrelationTable correlations_quantum(const QuantumProtocol& p, const ScenarioSpec& s);

/// F(tau_{k,y}, Theta_y(input k)) for every entry.
std::vector<std::vector<double>> fidelity_table(const CorrelationTable& t, const ScenarioSpec& s);
double avg_fidelity(const CorrelationTable& t, const ScenarioSpec& s);
/// Minimum over the catalogue; a lower bound on the continuous minimum only for
/// input-independent protocols.
double worst_fidelity(const CorrelationTable& t, const ScenarioSpec& s);
/// max - min fidelity over the catalogue.
double indep_spread(const CorrelationTable& t, const ScenarioSpec& s);

struct UniversalityReport {
  double spread = 0.0;
  double min_fidelity = 0.0;
  double max_fidelity = 0.0;
  bool universal = false;
};

/// Evaluates `correlations` on the 2-design catalogue augmented with `extra`
/// seeded random product inputs; universal when spread < 1e-6.
template <typename CorrelationFn>
UniversalityReport check_universality(const ScenarioSpec& s, CorrelationFn&& correlations,
                                      int extra = 100, std::uint64_t seed = 7) {
  const ScenarioSpec aug = s.augmented(extra, seed);
  const CorrelationTable t = correlations(aug);
  UniversalityReport r;
  r.min_fidelity = worst_fidelity(t, aug);
  r.spread = indep_spread(t, aug);
  r.max_fidelity = r.min_fidelity + r.spread;
  r.universal = r.spread < 1e-6 && s.kind() == InputSetKind::kDesign;
  return r;
}

}  // namespace qpm
