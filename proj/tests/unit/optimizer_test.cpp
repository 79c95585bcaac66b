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

#include "qpm/optimizer.hpp"

#include "gtest/gtest.h"
#include "qpm/random.hpp"

using namespace qpm;

namespace {

const double kFiveSixths = 5.0 / 6.0;

SeesawConfig quick(int restarts, std::uint64_t seed = 1) {
  SeesawConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = seed;
  return cfg;
}

ClassicalProtocol with_depolarizing_decoders(ClassicalProtocol p) {
  for (auto& row : p.decoders) {
    for (ChoiState& eta : row) eta = depolarizing_choi(eta.in_dims(), eta.out_dims());
  }
  return p;
}

}  // namespace

TEST(measurement_sdp, universal_decoders_recover_five_sixths) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const SeesawSdp sdp = build_measurement_sdp(universal_protocol_2qubit(), s, Objective::kAverage);
  const SdpSolution sol = sdp.problem.solve();
  EXPECT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.objective, kFiveSixths, 1e-5);
}

TEST(measurement_sdp, flat_for_depolarizing_decoders) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const ClassicalProtocol p = with_depolarizing_decoders(universal_protocol_2qubit());
  const SeesawSdp sdp = build_measurement_sdp(p, s, Objective::kAverage);
  const SdpSolution sol = sdp.problem.solve();
  EXPECT_NEAR(sol.objective, protocol_objective(p, s, Objective::kAverage), 1e-7);
  EXPECT_NEAR(sol.objective, 0.5, 1e-7);
}

TEST(measurement_sdp, teleport_optimum_is_one) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  const SdpSolution sol = build_measurement_sdp(standard_teleport_protocol(2), s, Objective::kAverage).problem.solve();
  EXPECT_NEAR(sol.objective, 1.0, 1e-6);
}

TEST(decoder_sdp, bell_measurement_gives_correction_unitaries) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  ClassicalProtocol p = with_depolarizing_decoders(standard_teleport_protocol(2));
  const SeesawSdp sdp = build_decoder_sdp(p, s, Objective::kAverage);
  const SdpSolution sol = sdp.problem.solve();
  EXPECT_NEAR(sol.objective, 1.0, 1e-6);
  const ClassicalProtocol exact = standard_teleport_protocol(2);
  for (int c = 0; c < 4; ++c) {
    const Operator found(sol.blocks[sdp.blocks[c]], Dims{2, 2});
    EXPECT_LT(max_abs_diff(found, exact.decoders[c][0].matrix()), 1e-4);
  }
}

TEST(decoder_sdp, universal_measurement_gives_five_sixths) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const ClassicalProtocol p = with_depolarizing_decoders(universal_protocol_2qubit());
  EXPECT_NEAR(build_decoder_sdp(p, s, Objective::kAverage).problem.solve().objective, kFiveSixths, 1e-5);
}

TEST(decoder_sdp, trivial_measurement_gives_blind_guess) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  ClassicalProtocol p;
  p.resource = ResourceSpec::maximally_entangled(2, 1, MessageKind::kClassical);
  p.encoder = Povm({Operator::identity(Dims{2, 2})});
  p.decoders = {{identity_choi(Dims{2})}};
  EXPECT_NEAR(build_decoder_sdp(p, s, Objective::kAverage).problem.solve().objective, 0.5, 1e-6);
}

TEST(state_sdp, universal_protocol_prefers_maximal_entanglement) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const SeesawSdp sdp = build_state_sdp(universal_protocol_2qubit(), s, Objective::kAverage);
  const SdpSolution sol = sdp.problem.solve();
  EXPECT_NEAR(sol.objective, kFiveSixths, 1e-6);
  const Operator rho(sol.blocks[sdp.blocks[0]], Dims{2, 2});
  EXPECT_GT(fidelity(psd_project(rho).hermitian_part() * cd(1.0 / rho.trace().real()),
                     max_entangled(2).projector()),
            1.0 - 1e-6);
}

TEST(state_sdp, depolarizing_decoders_make_state_irrelevant) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const ClassicalProtocol p = with_depolarizing_decoders(universal_protocol_2qubit());
  EXPECT_NEAR(build_state_sdp(p, s, Objective::kAverage).problem.solve().objective, 0.5, 1e-7);
}

TEST(state_sdp, optimum_dominates_maximally_mixed_state) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  ClassicalProtocol p = universal_protocol_2qubit();
  p.resource = ResourceSpec::isotropic(2, 0.0, 4, MessageKind::kClassical);
  const double mixed = protocol_objective(p, s, Objective::kAverage);
  EXPECT_GE(build_state_sdp(p, s, Objective::kAverage).problem.solve().objective, mixed - 1e-8);
}

TEST(sub_problems, fixed_point_after_warm_start) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  Rng rng(3);
  const ClassicalProtocol p =
      random_classical_protocol(s, ResourceSpec::maximally_entangled(2, 4, MessageKind::kClassical), rng);
  for (const SeesawSdp& sdp : {build_measurement_sdp(p, s, Objective::kAverage),
                               build_decoder_sdp(p, s, Objective::kAverage)}) {
    const SdpSolution first = sdp.problem.solve();
    SdpOptions opt;
    opt.warm_start = &first.warm;
    const SdpSolution again = sdp.problem.solve(opt);
    EXPECT_LT(again.objective - first.objective, 1e-7);
  }
}

TEST(seesaw, two_qubits_one_ebit_reaches_five_sixths) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const auto result = seesaw_run(s, ResourceSpec::maximally_entangled(2, 4, MessageKind::kClassical), quick(3));
  EXPECT_GE(result.best_run().fidelity, kFiveSixths - 1e-4);
  for (const auto& run : result.runs) {
    for (std::size_t i = 1; i < run.trace.size(); ++i) EXPECT_GE(run.trace[i], run.trace[i - 1] - 1e-7);
  }
}

TEST(seesaw, separable_baseline_reaches_two_thirds) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const auto result = seesaw_run(s, ResourceSpec::maximally_entangled(1, 4, MessageKind::kClassical), quick(2));
  EXPECT_GE(result.best_run().fidelity, 2.0 / 3.0 - 1e-4);
  EXPECT_LT(result.best_run().fidelity, kFiveSixths - 1e-2);
}

TEST(seesaw, deterministic_for_fixed_seed) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const ResourceSpec r = ResourceSpec::maximally_entangled(2, 4, MessageKind::kClassical);
  SeesawConfig cfg = quick(2, 42);
  cfg.max_outer_iterations = 5;
  const auto a = seesaw_run(s, r, cfg);
  const auto b = seesaw_run(s, r, cfg);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(a.runs[i].seed, b.runs[i].seed);
    EXPECT_EQ(a.runs[i].trace, b.runs[i].trace);
  }
  EXPECT_NE(a.runs[0].seed, a.runs[1].seed);
}

TEST(seesaw, worst_case_from_universal_protocol) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  SeesawConfig cfg = quick(1);
  cfg.objective = Objective::kWorst;
  const auto run = seesaw_from(universal_protocol_2qubit(), s, cfg);
  EXPECT_NEAR(run.fidelity, kFiveSixths, 1e-5);
}

TEST(seesaw, single_input_worst_equals_average) {
  const Dims in{2};
  const ScenarioSpec s = ScenarioSpec::with_states(in, {PureVector::basis(in, 0)}, in, {identity_choi(in)});
  const ResourceSpec r = ResourceSpec::maximally_entangled(1, 1, MessageKind::kClassical);
  Rng rng(1);
  const ClassicalProtocol p = random_classical_protocol(s, r, rng);
  EXPECT_DOUBLE_EQ(protocol_objective(p, s, Objective::kWorst), protocol_objective(p, s, Objective::kAverage));
}

TEST(seesaw, reduction_to_classical_enumeration) {
  // three orthogonal qutrit inputs, one bit, product shared state: brute force over
  // deterministic encodings gives (number of used messages) / 3 = 2/3
  const Dims in{3};
  std::vector<PureVector> basis;
  for (int i = 0; i < 3; ++i) basis.push_back(PureVector::basis(in, i));
  const ScenarioSpec s = ScenarioSpec::with_states(in, basis, in, {identity_choi(in)});
  double brute = 0.0;
  for (int enc = 0; enc < 8; ++enc) {
    int used = 0;
    for (int m = 0; m < 2; ++m) {
      bool any = false;
      for (int k = 0; k < 3; ++k) any = any || (((enc >> k) & 1) == m);
      used += any;
    }
    brute = std::max(brute, used / 3.0);
  }
  const ResourceSpec r = ResourceSpec::maximally_entangled(1, 2, MessageKind::kClassical);
  EXPECT_NEAR(seesaw_run(s, r, quick(5)).best_run().fidelity, brute, 1e-6);
}

TEST(quantum_seesaw, unrestricted_message_is_perfect) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  const ResourceSpec r = ResourceSpec::maximally_entangled(1, 2, MessageKind::kQuantum);
  EXPECT_NEAR(seesaw_run_quantum(s, r, quick(2)).best_run().fidelity, 1.0, 1e-5);
}

TEST(quantum_seesaw, qubit_message_with_extra_ebit_matches_two_bits) {
  // one qubit message plus two ebits: one ebit as in the classical protocol and one
  // that turns the qubit into two bits
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const ResourceSpec r = ResourceSpec::maximally_entangled(4, 2, MessageKind::kQuantum);
  EXPECT_GE(seesaw_run_quantum(s, r, quick(3)).best_run().fidelity, kFiveSixths - 1e-4);
}

TEST(quantum_seesaw, no_message_matches_classical_baseline) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  const double q = seesaw_run_quantum(s, ResourceSpec::maximally_entangled(2, 1, MessageKind::kQuantum), quick(2))
                       .best_run()
                       .fidelity;
  const double c =
      seesaw_run(s, ResourceSpec::maximally_entangled(2, 1, MessageKind::kClassical), quick(2)).best_run().fidelity;
  EXPECT_NEAR(q, c, 1e-6);
  EXPECT_NEAR(q, 0.5, 1e-6);
}

TEST(seesaw_config, rejects_bad_values) {
  SeesawConfig cfg;
  cfg.restarts = 0;
  EXPECT_THROW(cfg.validate(), ValueError);
  EXPECT_THROW(objective_from_string("median"), ValueError);
}

TEST(rac, adaptivity_ignores_relabeling) {
  QuantumRacParts parts;
  parts.n_inputs = 1;
  parts.d = 2;
  Rng rng(2);
  const Povm a = random_projective_povm(Dims{2}, 4, rng);
  const Povm swapped({a[1], a[0], a[3], a[2]});
  parts.bob = {{a, swapped}};
  EXPECT_FALSE(is_adaptive(parts));
  parts.bob = {{a, random_projective_povm(Dims{2}, 4, rng)}};
  EXPECT_TRUE(is_adaptive(parts));
}
