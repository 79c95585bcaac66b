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

#include "qpm/protocols.hpp"

#include <cmath>
#include <numbers>

#include "gtest/gtest.h"
#include "qpm/random.hpp"

using namespace qpm;

namespace {

Operator universal_law(const PureVector& psi) {
  const Operator p = psi.projector();
  return p * cd(5.0 / 6.0) + (Operator::identity(psi.dims()) - p) * cd(1.0 / 6.0);
}

QuantumProtocol random_quantum_protocol(Rng& rng, int n_inputs) {
  QuantumProtocol q;
  const int da = 2;
  const int db = 2;
  const int dc = 2;
  q.resource = ResourceSpec(dc, random_density(Dims{da, db}, 2, rng), da, db, MessageKind::kQuantum);
  std::vector<int> in(n_inputs, 2);
  in.push_back(da);
  q.encoder = random_choi(Dims(in), Dims{dc}, rng);
  for (int y = 0; y < n_inputs; ++y) q.decoders.push_back(random_choi(Dims{db, dc}, Dims{2}, rng));
  return q;
}

ClassicalProtocol random_classical_protocol(Rng& rng, int n_inputs) {
  ClassicalProtocol p;
  p.resource = ResourceSpec(4, random_density(Dims{2, 2}, 3, rng), 2, 2, MessageKind::kClassical);
  std::vector<int> in(n_inputs, 2);
  in.push_back(2);
  // rank-mixed POVM: random projective measurement blended with a coin
  const Povm proj = random_projective_povm(Dims(in), 4, rng);
  std::vector<Operator> effects;
  for (int c = 0; c < 4; ++c) effects.push_back(proj[c] * cd(0.7) + Operator::identity(Dims(in)) * cd(0.3 / 4.0));
  p.encoder = Povm(std::move(effects));
  for (int c = 0; c < 4; ++c) {
    std::vector<ChoiState> row;
    for (int y = 0; y < n_inputs; ++y) row.push_back(random_choi(Dims{2}, Dims{2}, rng));
    p.decoders.push_back(std::move(row));
  }
  return p;
}

}  // namespace

TEST(teleport, exact_for_supported_dimensions) {
  for (int d = 2; d <= 4; ++d) {
    const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, d);
    const CorrelationTable t = correlations_classical(standard_teleport_protocol(d), s);
    EXPECT_NEAR(avg_fidelity(t, s), 1.0, 1e-12);
    EXPECT_NEAR(worst_fidelity(t, s), 1.0, 1e-12);
  }
  EXPECT_THROW(standard_teleport_protocol(5), ValueError);
}

TEST(teleport, wrong_correction_breaks_fidelity) {
  ClassicalProtocol p = standard_teleport_protocol(2);
  p.decoders[3][0] = identity_choi(Dims{2});
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  EXPECT_LT(avg_fidelity(correlations_classical(p, s), s), 1.0 - 1e-3);
}

TEST(teleport, adjoint_corrections_fail_for_qutrits) {
  const int d = 3;
  ClassicalProtocol p = standard_teleport_protocol(d);
  for (int u = 0; u < d; ++u) {
    for (int v = 0; v < d; ++v) p.decoders[u * d + v][0] = unitary_choi(weyl(d, u, v).matrix().adjoint(), Dims{d});
  }
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, d);
  EXPECT_LT(avg_fidelity(correlations_classical(p, s), s), 1.0 - 1e-2);
}

TEST(universal, measurement_states_are_orthonormal) {
  const std::vector<PureVector> states = universal_measurement_states();
  ASSERT_EQ(states.size(), 8u);
  Matrix gram(8, 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) gram(i, j) = states[i].amplitudes().dot(states[j].amplitudes());
  }
  EXPECT_LT((gram - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-12);
  const ClassicalProtocol p = universal_protocol_2qubit();
  EXPECT_EQ(p.encoder.size(), 4u);
  EXPECT_LT(p.encoder.completeness_residual(), 1e-12);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_LT(max_abs_diff(p.encoder[c] * p.encoder[c], p.encoder[c]), 1e-12);
    EXPECT_NEAR(p.encoder[c].trace().real(), 2.0, 1e-12);
  }
}

TEST(universal, output_law_on_random_inputs) {
  const ClassicalProtocol p = universal_protocol_2qubit();
  Rng rng(2026);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const PureVector a = haar_state(Dims{2}, rng);
    const PureVector b = haar_state(Dims{2}, rng);
    const std::vector<Operator> sigma = remote_states(p, kron(a, b).projector());
    for (int y = 0; y < 2; ++y) {
      Operator tau = Operator::zero(Dims{2});
      for (int c = 0; c < 4; ++c) tau += apply_choi(p.decoders[c][y], sigma[c]);
      worst = std::max(worst, max_abs_diff(tau, universal_law(y == 0 ? a : b)));
    }
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(universal, correction_range) {
  EXPECT_GT(max_abs_diff(universal_correction(1, 0), universal_correction(1, 1)), 0.5);
  EXPECT_THROW(universal_correction(4, 0), ValueError);
}

TEST(extensions, mixed_input_closed_form) {
  EXPECT_NEAR(mixed_input_fidelity(1.0), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(mixed_input_fidelity(0.5), 1.0, 1e-15);
  EXPECT_THROW(mixed_input_fidelity(0.3), ValueError);
  const double lambda = 0.75;
  const double t = 2 * lambda * lambda - 2 * lambda + 1;
  EXPECT_NEAR(simulate_mixed_input_fidelity(lambda), mixed_input_fidelity(t), 1e-9);
  EXPECT_NEAR(simulate_mixed_input_fidelity(0.6, 5, 3), mixed_input_fidelity(2 * 0.36 - 1.2 + 1), 1e-9);
}

TEST(extensions, swap_closed_form) {
  EXPECT_NEAR(swap_fidelity(0.0), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(swap_fidelity(std::numbers::pi / 4), 0.75, 1e-15);
  for (double theta : {0.0, std::numbers::pi / 8, 0.3, std::numbers::pi / 4}) {
    for (int y = 0; y < 2; ++y) EXPECT_NEAR(simulate_swap_fidelity(theta, y), swap_fidelity(theta), 1e-9);
  }
}

TEST(extensions, noisy_sweep_is_linear) {
  const std::vector<NoisyPoint> pts = noisy_resource_sweep({0.0, 0.25, 0.5, 0.75, 1.0});
  for (const NoisyPoint& pt : pts) EXPECT_NEAR(pt.fidelity, noisy_resource_fidelity(pt.visibility), 1e-10);
  EXPECT_NEAR(pts[0].fidelity, 0.5, 1e-10);
  EXPECT_NEAR(pts[2].fidelity, 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(pts[4].fidelity, 5.0 / 6.0, 1e-10);
}

TEST(strings, pack_round_trip) {
  for (std::int64_t x = 0; x < 81; ++x) EXPECT_EQ(pack_string(unpack_string(x, 2, 9), 9), x);
  EXPECT_EQ(unpack_string(7, 2, 4), (std::vector<int>{1, 3}));
}

TEST(ns_box, perfect_and_no_signaling) {
  for (auto [n, d] : {std::pair{2, 2}, {3, 2}, {2, 3}}) {
    const NsBox box = ns_box(n, d);
    EXPECT_EQ(box.signaling_residual(), 0.0);
    EXPECT_EQ(box.normalization_residual(), 0.0);
    EXPECT_DOUBLE_EQ(box.bell_value(), 1.0);
    EXPECT_DOUBLE_EQ(rac_from_box(box).success_probability(), 1.0);
  }
  const NsBox box = ns_box(2, 2);
  for (int a = 0; a < 4; ++a) {
    double pa = 0.0;
    for (int b = 0; b < 4; ++b) pa += box.probability(a, b, 6, 1);
    EXPECT_DOUBLE_EQ(pa, 0.25);
  }
}

TEST(ns_box, local_and_uniform_boxes) {
  const RacStrategy local = rac_from_box(local_deterministic_box(2, 2));
  EXPECT_NEAR(local.success_probability(), 0.5 * (1.0 + 0.25), 1e-15);
  EXPECT_NEAR(rac_from_box(uniform_box(2, 2)).success_probability(), 0.25, 1e-15);
  EXPECT_NEAR(rac_from_box(uniform_box(2, 3)).success_probability(), 1.0 / 9.0, 1e-15);
}

TEST(ns_box, rejects_signaling_free_but_unnormalised_tables) {
  EXPECT_THROW(NsBox(1, 2, std::vector<std::int64_t>(4 * 4 * 4, 0), 1), ValueError);
  EXPECT_THROW(NsBox(1, 2, std::vector<std::int64_t>(3), 1), DimensionError);
}

TEST(affine_relabeling, sharply_two_transitive) {
  for (int q : {4, 9, 16}) {
    const AffineRelabeling g(q);
    EXPECT_EQ(g.size(), q * (q - 1));
    // each ordered pair of distinct labels is hit by exactly one group element
    std::vector<int> hits(q * q, 0);
    for (int e = 0; e < g.size(); ++e) {
      ++hits[g.apply(e, 0) * q + g.apply(e, 1)];
      for (int l = 0; l < q; ++l) EXPECT_EQ(g.inverse(e, g.apply(e, l)), l);
    }
    for (int a = 0; a < q; ++a) {
      for (int b = 0; b < q; ++b) EXPECT_EQ(hits[a * q + b], a == b ? 0 : 1);
    }
  }
  EXPECT_THROW(AffineRelabeling(6), ValueError);
}

TEST(stochastic_teleport, box_code_teleports_perfectly) {
  Rng rng(4);
  for (auto [n, d] : {std::pair{2, 2}, {3, 2}, {2, 3}}) {
    const StochasticTeleportSimulator sim = compose_stochastic_teleport(rac_from_box(ns_box(n, d)), {n, d});
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<PureVector> in;
      for (int k = 0; k < n; ++k) in.push_back(haar_state(Dims{d}, rng));
      for (int y = 0; y < n; ++y) EXPECT_LT(max_abs_diff(sim.output_state(in, y), in[y].projector()), 1e-12);
    }
    EXPECT_NEAR(sim.formula_fidelity(), 1.0, 1e-15);
  }
}

TEST(stochastic_teleport, formula_matches_simulator) {
  const StochasticTeleportSpec spec{2, 2};
  const RacStrategy codes[] = {random_guess_rac(2, 2), rac_from_box(local_deterministic_box(2, 2)),
                               rac_from_box(ns_box(2, 2))};
  for (const RacStrategy& rac : codes) {
    const StochasticTeleportSimulator sim = compose_stochastic_teleport(rac, spec);
    EXPECT_NEAR(sim.average_fidelity(), sim.formula_fidelity(), 1e-9) << rac.label();
  }
  EXPECT_NEAR(compose_stochastic_teleport(random_guess_rac(2, 2), spec).formula_fidelity(), 0.5, 1e-15);
}

TEST(stochastic_teleport, formula_matches_simulator_qutrits) {
  const StochasticTeleportSimulator sim =
      compose_stochastic_teleport(rac_from_box(local_deterministic_box(2, 3)), {2, 3});
  EXPECT_NEAR(sim.average_fidelity(), sim.formula_fidelity(), 1e-9);
}

TEST(stochastic_teleport, unsymmetrized_code_is_input_dependent) {
  // y = 1 fails only for x_1 in {2, 3}, always with the same wrong label
  DeterministicRac code;
  code.decode.resize(16);
  for (int x = 0; x < 16; ++x) {
    code.encode.push_back(x);
    code.decode[x] = {x / 4, x % 4 < 2 ? x % 4 : 0};
  }
  const RacStrategy rac = classical_rac(2, 2, {code});
  const StochasticTeleportSimulator raw = compose_stochastic_teleport(rac, {2, 2}, false);
  const StochasticTeleportSimulator sym = compose_stochastic_teleport(rac, {2, 2}, true);
  Rng rng(8);
  double lo = 1.0, hi = 0.0, sym_lo = 1.0, sym_hi = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::vector<PureVector> in = {haar_state(Dims{2}, rng), haar_state(Dims{2}, rng)};
    const Matrix& v = in[1].amplitudes();
    const double f = (v.adjoint() * raw.output_state(in, 1).matrix() * v)(0, 0).real();
    const double g = (v.adjoint() * sym.output_state(in, 1).matrix() * v)(0, 0).real();
    lo = std::min(lo, f), hi = std::max(hi, f);
    sym_lo = std::min(sym_lo, g), sym_hi = std::max(sym_hi, g);
  }
  EXPECT_GT(hi - lo, 1e-3);
  EXPECT_LT(sym_hi - sym_lo, 1e-10);
}

TEST(stochastic_teleport, rejects_alphabet_mismatch) {
  EXPECT_THROW(compose_stochastic_teleport(random_guess_rac(2, 2), {3, 2}), ValueError);
}

TEST(rac, quantum_code_from_parts) {
  // Alice sends nothing useful, Bob guesses with a fixed uniform POVM
  QuantumRacParts parts;
  parts.n_inputs = 2;
  parts.d = 2;
  parts.shared_state = max_entangled(2).projector();
  const Operator quarter = Operator::identity(Dims{2}) * cd(0.25);
  for (int x = 0; x < 16; ++x) parts.alice.push_back(Povm({quarter, quarter, quarter, quarter}));
  parts.bob.assign(2, std::vector<Povm>(4, Povm({quarter, quarter, quarter, quarter})));
  EXPECT_NEAR(quantum_rac(parts).success_probability(), 0.25, 1e-12);
}

TEST(rac, classical_table_validation) {
  DeterministicRac r;
  r.encode.assign(16, 0);
  r.decode = {{0, 9}};
  EXPECT_THROW(classical_rac(2, 2, {r}), ValueError);
}

TEST(bounds, closed_forms) {
  EXPECT_NEAR(rac_bound(2, 2).success, 0.75, 1e-15);
  EXPECT_NEAR(rac_bound(2, 2).fidelity, 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(rac_bound(1, 3).success, 1.0, 1e-15);
  EXPECT_NEAR(rac_bound(1, 3).fidelity, 1.0, 1e-15);
  EXPECT_NEAR(rac_bound(3, 2).success, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(rac_bound(3, 2).fidelity, 7.0 / 9.0, 1e-15);
  EXPECT_THROW(rac_bound(0, 2), ValueError);
}

TEST(result1, teleport_quantize_round_trip) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2);
  const ClassicalProtocol p = standard_teleport_protocol(2);
  const QuantumProtocol q = result1_quantize(p);
  EXPECT_EQ(q.resource.d_c, 2);
  EXPECT_NEAR(avg_fidelity(correlations_quantum(q, s), s), 1.0, 1e-10);
}

TEST(result1, universal_protocol_both_directions) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  const ClassicalProtocol p = universal_protocol_2qubit();
  const CorrelationTable base = correlations_classical(p, s);
  const QuantumProtocol q = result1_quantize(p);
  EXPECT_LT(correlations_quantum(q, s).max_difference(base), 1e-9);
  const ClassicalProtocol back = result1_classicalize(q);
  EXPECT_EQ(back.encoder.size(), 4u);
  EXPECT_LT(correlations_classical(back, s).max_difference(base), 1e-9);
}

TEST(result1, random_protocols_preserve_tables) {
  Rng rng(77);
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(1, 2).augmented(5, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const QuantumProtocol q = random_quantum_protocol(rng, 1);
    EXPECT_LT(correlations_classical(result1_classicalize(q), s).max_difference(correlations_quantum(q, s)), 1e-9);
    const ClassicalProtocol p = random_classical_protocol(rng, 1);
    EXPECT_LT(correlations_quantum(result1_quantize(p), s).max_difference(correlations_classical(p, s)), 1e-9);
  }
}

TEST(result1, rejects_non_square_alphabet) {
  ClassicalProtocol p = standard_teleport_protocol(2);
  std::vector<Operator> effects = {p.encoder[0] + p.encoder[1], p.encoder[2], p.encoder[3]};
  p.encoder = Povm(std::move(effects));
  p.decoders.pop_back();
  EXPECT_THROW(result1_quantize(p), ValueError);
}
