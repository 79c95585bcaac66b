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

#include "qpm/scenario.hpp"

#include "gtest/gtest.h"
#include "qpm/protocols.hpp"
#include "qpm/random.hpp"

using namespace qpm;

namespace {

ScenarioSpec random_single_qudit(int d, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PureVector> states;
  for (int i = 0; i < count; ++i) states.push_back(haar_state(Dims{d}, rng));
  return ScenarioSpec::with_states(Dims{d}, states, Dims{d}, {identity_choi(Dims{d})});
}

// Alice flips a fair coin and sends it; Bob outputs the maximally mixed state.
ClassicalProtocol coin_protocol(int d) {
  ClassicalProtocol p;
  p.resource = ResourceSpec::maximally_entangled(1, 2, MessageKind::kClassical);
  const Operator half = Operator::identity(Dims{d, 1}) * cd(0.5);
  p.encoder = Povm({half, half});
  for (int c = 0; c < 2; ++c) p.decoders.push_back({depolarizing_choi(Dims{1}, Dims{d})});
  return p;
}

}  // namespace

TEST(correlations_classical, teleportation_is_exact) {
  const ScenarioSpec s = random_single_qudit(2, 20, 3);
  const CorrelationTable t = correlations_classical(standard_teleport_protocol(2), s);
  for (int k = 0; k < s.input_count(); ++k) EXPECT_LT(max_abs_diff(t.at(k, 0), s.input(k)), 1e-10);
}

TEST(correlations_classical, coin_and_depolarizer_give_maximally_mixed) {
  const ScenarioSpec s = random_single_qudit(3, 5, 4);
  const CorrelationTable t = correlations_classical(coin_protocol(3), s);
  for (int k = 0; k < s.input_count(); ++k) {
    EXPECT_LT(max_abs_diff(t.at(k, 0), Operator::identity(Dims{3}) * cd(1.0 / 3.0)), 1e-12);
  }
}

TEST(correlations_classical, remote_states_are_complete) {
  Rng rng(9);
  const ClassicalProtocol p = universal_protocol_2qubit();
  for (int trial = 0; trial < 10; ++trial) {
    const Operator in = haar_product_state(Dims{2, 2}, rng).projector();
    double total = 0.0;
    for (const Operator& s : remote_states(p, in)) total += s.trace().real();
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(correlations_classical, rejects_mismatched_dimensions) {
  const ScenarioSpec s = random_single_qudit(3, 2, 1);
  EXPECT_THROW(correlations_classical(standard_teleport_protocol(2), s), DimensionError);
}

TEST(correlations_quantum, identity_encoder_reproduces_teleportation) {
  // the message carries the whole input; Bob just keeps it
  const ScenarioSpec s = random_single_qudit(2, 10, 5);
  QuantumProtocol q;
  q.resource = ResourceSpec::maximally_entangled(1, 2, MessageKind::kQuantum);
  q.encoder = identity_choi(Dims{2, 1});
  q.decoders = {partial_trace_choi(Dims{1, 2}, {1})};
  const CorrelationTable tq = correlations_quantum(q, s);
  const CorrelationTable tc = correlations_classical(standard_teleport_protocol(2), s);
  EXPECT_LT(tq.max_difference(tc), 1e-10);
}

TEST(correlations_quantum, depolarizing_encoder_is_input_independent) {
  const ScenarioSpec s = random_single_qudit(2, 8, 6);
  QuantumProtocol q;
  q.resource = ResourceSpec::maximally_entangled(2, 2, MessageKind::kQuantum);
  q.encoder = depolarizing_choi(Dims{2, 2}, Dims{2});
  Rng rng(1);
  q.decoders = {random_choi(Dims{2, 2}, Dims{2}, rng)};
  const CorrelationTable t = correlations_quantum(q, s);
  for (int k = 1; k < s.input_count(); ++k) {
    EXPECT_LT(max_abs_diff(t.at(k, 0), t.at(0, 0)), 1e-12);
    EXPECT_NEAR(t.at(k, 0).trace().real(), 1.0, 1e-9);
  }
}

TEST(metrics, exact_teleport_table) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  const CorrelationTable t = correlations_classical(standard_teleport_protocol(2), s);
  EXPECT_NEAR(avg_fidelity(t, s), 1.0, 1e-12);
  EXPECT_NEAR(worst_fidelity(t, s), 1.0, 1e-12);
  EXPECT_NEAR(indep_spread(t, s), 0.0, 1e-12);
}

TEST(metrics, depolarized_table_gives_half) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  const CorrelationTable t = correlations_classical(coin_protocol(2), s);
  EXPECT_NEAR(avg_fidelity(t, s), 0.5, 1e-12);
}

TEST(metrics, constant_output_fails_on_orthogonal_input) {
  // always output |0>, ask for the second qubit, which is |1>
  const Dims in{2, 2};
  std::vector<PureVector> states = {kron(PureVector::basis(Dims{2}, 0), PureVector::basis(Dims{2}, 1))};
  const ScenarioSpec s = ScenarioSpec::with_states(in, states, Dims{2}, {partial_trace_choi(in, {1})});
  ClassicalProtocol p;
  p.resource = ResourceSpec::maximally_entangled(1, 1, MessageKind::kClassical);
  p.encoder = Povm({Operator::identity(Dims{2, 2, 1})});
  Matrix fixed = Matrix::Zero(2, 2);
  fixed(0, 0) = 1.0;
  // replacement channel onto |0><0|
  p.decoders = {{ChoiState(Operator(fixed, Dims{2}).with_dims(Dims{2, 1}), Dims{1}, Dims{2})}};
  const CorrelationTable t = correlations_classical(p, s);
  EXPECT_NEAR(worst_fidelity(t, s), 0.0, 1e-12);
}

TEST(metrics, universal_protocol_values) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const ClassicalProtocol p = universal_protocol_2qubit();
  const CorrelationTable t = correlations_classical(p, s);
  EXPECT_NEAR(avg_fidelity(t, s), 5.0 / 6.0, 1e-10);
  EXPECT_NEAR(worst_fidelity(t, s), 5.0 / 6.0, 1e-10);
  const UniversalityReport r =
      check_universality(s, [&](const ScenarioSpec& aug) { return correlations_classical(p, aug); });
  EXPECT_LT(r.spread, 1e-10);
  EXPECT_TRUE(r.universal);
}

TEST(metrics, worst_never_exceeds_average) {
  Rng rng(11);
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    ClassicalProtocol p;
    p.resource = ResourceSpec::maximally_entangled(2, 4, MessageKind::kClassical);
    p.encoder = random_projective_povm(Dims{2, 2}, 4, rng);
    for (int c = 0; c < 4; ++c) p.decoders.push_back({random_choi(Dims{2}, Dims{2}, rng)});
    const CorrelationTable t = correlations_classical(p, s);
    const double avg = avg_fidelity(t, s);
    EXPECT_LE(worst_fidelity(t, s), avg + 1e-12);
    EXPECT_LE(avg, 1.0 + 1e-12);
  }
}

TEST(scenario_spec, rejects_bad_targets) {
  EXPECT_THROW(ScenarioSpec::with_design(Dims{2}, Dims{2}, {identity_choi(Dims{3})}), DimensionError);
}

TEST(scenario_spec, stochastic_targets_are_marginals) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  EXPECT_EQ(s.input_count(), 16);
  EXPECT_EQ(s.y_count(), 2);
  EXPECT_TRUE(s.targets_pure());
  const Operator marg = partial_trace(s.input(5), {1});
  EXPECT_LT(max_abs_diff(s.target_state(5, 1), marg), 1e-12);
}
