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

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpm/parallel.hpp"

namespace qpm {

// ---------------------------------------------------------------------------
// ScenarioSpec

ScenarioSpec::ScenarioSpec(Dims input_dims, std::vector<Operator> inputs, Dims output_dims,
                           std::vector<ChoiState> targets, InputSetKind kind)
    : input_dims_(std::move(input_dims)),
      output_dims_(std::move(output_dims)),
      inputs_(std::move(inputs)),
      targets_(std::move(targets)),
      kind_(kind) {
  if (inputs_.empty()) throw ValueError("ScenarioSpec: empty input catalogue");
  if (targets_.empty()) throw ValueError("ScenarioSpec: no targets");
  for (Operator& in : inputs_) {
    if (in.dim() != input_dims_.total()) throw DimensionError("ScenarioSpec: input dimension");
    in = in.with_dims(input_dims_);
  }
  for (const ChoiState& t : targets_) {
    if (t.d_in() != input_dims_.total() || t.d_out() != output_dims_.total()) {
      throw DimensionError("ScenarioSpec: target channel dimensions");
    }
    if (t.marginal_residual() > tol::kIdentity) throw ValueError("ScenarioSpec: invalid target Choi");
  }
  target_states_.resize(inputs_.size());
  for (std::size_t k = 0; k < inputs_.size(); ++k) {
    for (const ChoiState& t : targets_) {
      Operator ts = apply_choi(t, inputs_[k]).hermitian_part();
      const HermitianEig e = hermitian_eig(ts);
      const int n = static_cast<int>(e.values.size());
      if (n > 1 && e.values(n - 2) >= tol::kRankOne) targets_pure_ = false;
      target_states_[k].push_back(std::move(ts));
    }
  }
}

ScenarioSpec ScenarioSpec::with_design(const Dims& input_dims, const Dims& output_dims,
                                       std::vector<ChoiState> targets) {
  std::vector<Design2> designs;
  for (int f : input_dims.factors()) designs.push_back(sic_povm(f));
  std::vector<Operator> inputs;
  for (const auto& tuple : product_design(designs)) {
    PureVector v = tuple.front();
    for (std::size_t k = 1; k < tuple.size(); ++k) v = kron(v, tuple[k]);
    inputs.push_back(v.projector());
  }
  return ScenarioSpec(input_dims, std::move(inputs), output_dims, std::move(targets),
                      InputSetKind::kDesign);
}

ScenarioSpec ScenarioSpec::with_states(const Dims& input_dims, const std::vector<PureVector>& states,
                                       const Dims& output_dims, std::vector<ChoiState> targets) {
  std::vector<Operator> inputs;
  for (const PureVector& v : states) inputs.push_back(v.projector());
  return ScenarioSpec(input_dims, std::move(inputs), output_dims, std::move(targets));
}

ScenarioSpec ScenarioSpec::stochastic_teleportation(int n_inputs, int d) {
  if (n_inputs < 1 || d < 2) throw ValueError("stochastic_teleportation: need N >= 1, d >= 2");
  const Dims in(std::vector<int>(n_inputs, d));
  std::vector<ChoiState> targets;
  for (int y = 0; y < n_inputs; ++y) targets.push_back(partial_trace_choi(in, {y}));
  return with_design(in, Dims{d}, std::move(targets));
}

ScenarioSpec ScenarioSpec::augmented(int count, std::uint64_t seed) const {
  std::vector<Operator> inputs = inputs_;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) inputs.push_back(haar_product_state(input_dims_, rng).projector());
  return ScenarioSpec(input_dims_, std::move(inputs), output_dims_, targets_, kind_);
}

std::string to_string(MessageKind kind) {
  return kind == MessageKind::kClassical ? "classical" : "quantum";
}

// ---------------------------------------------------------------------------
// ResourceSpec

ResourceSpec::ResourceSpec(int d_c_, Operator shared, int d_a_, int d_b_, MessageKind kind_)
    : d_c(d_c_), d_a(d_a_), d_b(d_b_), shared_state(std::move(shared)), kind(kind_) {
  if (d_c < 1) throw ValueError("ResourceSpec: d_C must be >= 1");
  if (shared_state.dim() != d_a * d_b) throw DimensionError("ResourceSpec: shared state dims");
  shared_state = shared_state.with_dims(Dims{d_a, d_b});
  if (!shared_state.is_state(tol::kIdentity)) {
    throw ValueError("ResourceSpec: shared state must be unit-trace PSD");
  }
}

ResourceSpec ResourceSpec::maximally_entangled(int local_dim, int d_c, MessageKind kind) {
  if (local_dim == 1) return ResourceSpec(d_c, Operator::identity(Dims{1, 1}), 1, 1, kind);
  return ResourceSpec(d_c, max_entangled(local_dim).projector(), local_dim, local_dim, kind);
}

ResourceSpec ResourceSpec::isotropic(int local_dim, double v, int d_c, MessageKind kind) {
  if (v < 0.0 || v > 1.0) throw ValueError("isotropic: visibility must lie in [0, 1]");
  const int n = local_dim * local_dim;
  Operator rho = max_entangled(local_dim).projector() * cd(v) +
                 Operator::identity(Dims{local_dim, local_dim}) * cd((1.0 - v) / n);
  return ResourceSpec(d_c, rho, local_dim, local_dim, kind);
}

// ---------------------------------------------------------------------------
// Protocol validation

void ClassicalProtocol::validate(const ScenarioSpec& s, double tol) const {
  const Dims enc_dims = s.input_dims().concat(Dims{resource.d_a});
  if (encoder.size() != static_cast<std::size_t>(resource.d_c)) {
    throw DimensionError("ClassicalProtocol: encoder must have d_C outcomes");
  }
  if (encoder.dims().total() != enc_dims.total()) throw DimensionError("ClassicalProtocol: encoder dims");
  Povm check(encoder.effects(), tol);
  if (decoders.size() != static_cast<std::size_t>(resource.d_c)) {
    throw DimensionError("ClassicalProtocol: need decoders for every message");
  }
  for (const auto& row : decoders) {
    if (row.size() != static_cast<std::size_t>(s.y_count())) {
      throw DimensionError("ClassicalProtocol: need decoders for every y");
    }
    for (const ChoiState& eta : row) {
      if (eta.d_in() != resource.d_b || eta.d_out() != s.output_dim()) {
        throw DimensionError("ClassicalProtocol: decoder dims");
      }
      ChoiState checked(eta.matrix(), eta.in_dims(), eta.out_dims(), tol);
    }
  }
}

void QuantumProtocol::validate(const ScenarioSpec& s, double tol) const {
  if (encoder.d_in() != s.input_dim() * resource.d_a || encoder.d_out() != resource.d_c) {
    throw DimensionError("QuantumProtocol: encoder dims");
  }
  ChoiState checked(encoder.matrix(), encoder.in_dims(), encoder.out_dims(), tol);
  if (decoders.size() != static_cast<std::size_t>(s.y_count())) {
    throw DimensionError("QuantumProtocol: need a decoder for every y");
  }
  for (const ChoiState& eta : decoders) {
    if (eta.d_in() != resource.d_b * resource.d_c || eta.d_out() != s.output_dim()) {
      throw DimensionError("QuantumProtocol: decoder dims");
    }
    ChoiState c(eta.matrix(), eta.in_dims(), eta.out_dims(), tol);
  }
}

// ---------------------------------------------------------------------------
// Correlations

double CorrelationTable::max_difference(const CorrelationTable& other) const {
  if (input_count() != other.input_count() || y_count() != other.y_count()) {
    throw DimensionError("CorrelationTable: shape mismatch");
  }
  double worst = 0.0;
  for (int k = 0; k < input_count(); ++k) {
    for (int y = 0; y < y_count(); ++y) worst = std::max(worst, max_abs_diff(at(k, y), other.at(k, y)));
  }
  return worst;
}

std::vector<Operator> remote_states(const ClassicalProtocol& p, const Operator& input) {
  const int db = p.resource.d_b;
  const Operator joint = kron(input.with_dims(Dims{input.dim()}), p.resource.shared_state);
  const int np = joint.dim() / db;
  if (p.encoder.dims().total() != np) throw DimensionError("remote_states: encoder dims");
  const Matrix& z = joint.matrix();
  std::vector<Operator> out;
  out.reserve(p.encoder.size());
  for (const Operator& m : p.encoder.effects()) {
    // sigma[b,b'] = sum_{q,q'} z[(q,b),(q',b')] M[q',q]
    Matrix sigma = Matrix::Zero(db, db);
    const Matrix& mm = m.matrix();
    for (int q = 0; q < np; ++q) {
      for (int qp = 0; qp < np; ++qp) {
        const cd w = mm(qp, q);
        if (w == cd(0.0)) continue;
        sigma += w * z.block(q * db, qp * db, db, db);
      }
    }
    out.emplace_back(sigma, Dims{db});
  }
  return out;
}

Operator remote_state(const QuantumProtocol& p, const Operator& input) {
  const int db = p.resource.d_b;
  const int dc = p.resource.d_c;
  const Operator joint = kron(input.with_dims(Dims{input.dim()}), p.resource.shared_state)
                             .with_dims(Dims{input.dim() * p.resource.d_a, db});
  // (Gamma (x) id_B)(rho (x) shared) lands on C (x) B; decoders expect B (x) C.
  const Operator cb = apply_choi_leading(p.encoder, joint).with_dims(Dims{dc, db});
  return permute_subsystems(cb, {1, 0});
}

CorrelationTable correlations_classical(const ClassicalProtocol& p, const ScenarioSpec& s) {
  if (p.encoder.dims().total() != s.input_dim() * p.resource.d_a) {
    throw DimensionError("correlations_classical: encoder does not act on A'A");
  }
  if (p.decoders.size() != p.encoder.size()) throw DimensionError("correlations_classical: decoders");
  CorrelationTable t;
  t.entries.assign(s.input_count(), std::vector<Operator>(s.y_count()));
  parallel_for(s.input_count(), [&](int k) {
    const std::vector<Operator> sigma = remote_states(p, s.input(k));
    for (int y = 0; y < s.y_count(); ++y) {
      Operator tau = Operator::zero(s.output_dims());
      for (std::size_t c = 0; c < sigma.size(); ++c) {
        tau += apply_choi(p.decoders[c].at(y), sigma[c]).with_dims(s.output_dims());
      }
      t.entries[k][y] = tau.hermitian_part();
    }
  });
  return t;
}

CorrelationTable correlations_quantum(const QuantumProtocol& p, const ScenarioSpec& s) {
  if (p.encoder.d_in() != s.input_dim() * p.resource.d_a) {
    throw DimensionError("correlations_quantum: encoder does not act on A'A");
  }
  if (p.decoders.size() != static_cast<std::size_t>(s.y_count())) {
    throw DimensionError("correlations_quantum: decoders");
  }
  CorrelationTable t;
  t.entries.assign(s.input_count(), std::vector<Operator>(s.y_count()));
  parallel_for(s.input_count(), [&](int k) {
    const Operator sigma = remote_state(p, s.input(k));
    for (int y = 0; y < s.y_count(); ++y) {
      t.entries[k][y] = apply_choi(p.decoders[y], sigma).with_dims(s.output_dims()).hermitian_part();
    }
  });
  return t;
}

// ---------------------------------------------------------------------------
// Metrics

std::vector<std::vector<double>> fidelity_table(const CorrelationTable& t, const ScenarioSpec& s) {
  if (t.input_count() != s.input_count() || t.y_count() != s.y_count()) {
    throw DimensionError("fidelity_table: table does not match scenario");
  }
  std::vector<std::vector<double>> f(t.input_count(), std::vector<double>(t.y_count()));
  for (int k = 0; k < t.input_count(); ++k) {
    for (int y = 0; y < t.y_count(); ++y) f[k][y] = fidelity(t.at(k, y), s.target_state(k, y));
  }
  return f;
}

double avg_fidelity(const CorrelationTable& t, const ScenarioSpec& s) {
  double acc = 0.0;
  for (const auto& row : fidelity_table(t, s)) {
    for (double f : row) acc += f;
  }
  return acc / (static_cast<double>(t.input_count()) * t.y_count());
}

double worst_fidelity(const CorrelationTable& t, const ScenarioSpec& s) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& row : fidelity_table(t, s)) {
    for (double f : row) worst = std::min(worst, f);
  }
  return worst;
}

double indep_spread(const CorrelationTable& t, const ScenarioSpec& s) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& row : fidelity_table(t, s)) {
    for (double f : row) {
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
  }
  return hi - lo;
}

}  // namespace qpm
