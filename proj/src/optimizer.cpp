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

#include <algorithm>
#include <numeric>

#include "qpm/parallel.hpp"
#include "qpm/random.hpp"

namespace qpm {

std::string to_string(Objective objective) { return objective == Objective::kAverage ? "average" : "worst"; }

Objective objective_from_string(const std::string& name) {
  if (name == "average" || name == "avg") return Objective::kAverage;
  if (name == "worst") return Objective::kWorst;
  throw ValueError("unknown objective '" + name + "' (expected average or worst)");
}

void SeesawConfig::validate() const {
  if (max_outer_iterations <= 0 || window <= 0 || restarts <= 0 || solver_max_iterations <= 0) {
    throw ValueError("SeesawConfig: iteration counts must be positive");
  }
  if (!(window_tolerance > 0.0) || !(solver_tolerance > 0.0)) {
    throw ValueError("SeesawConfig: tolerances must be positive");
  }
}

namespace {

void require_pure(const ScenarioSpec& s) {
  if (!s.targets_pure()) throw ValueError("see-saw objectives need rank-one targets");
}

// tr_B[rho (1_A (x) w)] for rho on A (x) B.
Matrix contract_second(const Matrix& rho, int da, int db, const Matrix& w) {
  Matrix out(da, da);
  const Matrix wt = w.transpose();
  for (int a = 0; a < da; ++a) {
    for (int ap = 0; ap < da; ++ap) out(a, ap) = (rho.block(a * db, ap * db, db, db).array() * wt.array()).sum();
  }
  return out;
}

// tr_{A'}[(psi (x) 1_A) m] for m on A' (x) A.
Matrix contract_first(const Matrix& psi, const Matrix& m, int da) {
  const int n = static_cast<int>(psi.rows());
  Matrix out = Matrix::Zero(da, da);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (psi(j, i) == cd(0.0)) continue;
      out += psi(j, i) * m.block(i * da, j * da, da, da);
    }
  }
  return out;
}

Matrix herm(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Adds t - F_{k,y} + s_{k,y} = 0 style rows: sum of terms - t - slack = 0.
void add_worst_row(SeesawSdp& sdp, std::vector<SdpProblem::Term> terms) {
  const int slack = sdp.problem.add_block("slack", 1);
  terms.push_back({slack, -Matrix::Identity(1, 1)});
  sdp.problem.add_constraint(terms, {{sdp.worst_scalar, -1.0}}, 0.0);
}

void init_worst(SeesawSdp& sdp) {
  sdp.worst_scalar = sdp.problem.add_free_scalar("t");
  sdp.problem.set_scalar_objective(sdp.worst_scalar, 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Classical sub-problems

SeesawSdp build_measurement_sdp(const ClassicalProtocol& p, const ScenarioSpec& s, Objective objective) {
  require_pure(s);
  p.validate(s);
  const int nc = static_cast<int>(p.encoder.size());
  const int da = p.resource.d_a;
  const int db = p.resource.d_b;
  const int dim = s.input_dim() * da;
  const int kk = s.input_count();
  const int ny = s.y_count();
  const double w = 1.0 / (static_cast<double>(kk) * ny);
  const Matrix& rho = p.resource.shared_state.matrix();

  SeesawSdp out;
  for (int c = 0; c < nc; ++c) out.blocks.push_back(out.problem.add_block("M" + std::to_string(c), dim));
  out.problem.add_sum_equals(out.blocks, Matrix::Identity(dim, dim));

  // G_{c,k,y} = psi_k (x) tr_B[rho (1 (x) L_{c,y}^dag(target))]
  auto coeff = [&](int c, int k, int y) {
    const Matrix wt = apply_choi_adjoint(p.decoders[c][y], s.target_state(k, y)).matrix();
    return herm(contract_second(rho, da, db, wt));
  };
  if (objective == Objective::kAverage) {
    for (int c = 0; c < nc; ++c) {
      Matrix g = Matrix::Zero(dim, dim);
      for (int k = 0; k < kk; ++k) {
        Matrix q = Matrix::Zero(da, da);
        for (int y = 0; y < ny; ++y) q += coeff(c, k, y);
        g += kron(Operator(s.input(k).matrix()), Operator(q)).matrix() * w;
      }
      out.problem.set_objective(out.blocks[c], herm(g));
    }
  } else {
    init_worst(out);
    for (int k = 0; k < kk; ++k) {
      for (int y = 0; y < ny; ++y) {
        std::vector<SdpProblem::Term> terms;
        for (int c = 0; c < nc; ++c) {
          terms.push_back({out.blocks[c], herm(kron(Operator(s.input(k).matrix()), Operator(coeff(c, k, y))).matrix())});
        }
        add_worst_row(out, std::move(terms));
      }
    }
  }
  return out;
}

SeesawSdp build_decoder_sdp(const ClassicalProtocol& p, const ScenarioSpec& s, Objective objective) {
  require_pure(s);
  p.validate(s);
  const int nc = static_cast<int>(p.encoder.size());
  const int db = p.resource.d_b;
  const int kk = s.input_count();
  const int ny = s.y_count();
  const double w = 1.0 / (static_cast<double>(kk) * ny);
  const Dims in{db};
  const Dims& out_dims = s.output_dims();
  const int dout = out_dims.total();

  std::vector<std::vector<Operator>> sigma(kk);
  parallel_for(kk, [&](int k) { sigma[k] = remote_states(p, s.input(k)); });

  SeesawSdp out;
  for (int c = 0; c < nc; ++c) {
    for (int y = 0; y < ny; ++y) {
      const int b = out.problem.add_block("eta" + std::to_string(c) + "_" + std::to_string(y), dout * db);
      out.problem.add_partial_trace_equals(b, dout, db, Matrix::Identity(db, db) / static_cast<double>(db));
      out.blocks.push_back(b);
    }
  }
  auto grad = [&](int c, int k, int y) {
    return choi_gradient(sigma[k][c].with_dims(in), s.target_state(k, y), in, out_dims).matrix();
  };
  if (objective == Objective::kAverage) {
    for (int c = 0; c < nc; ++c) {
      for (int y = 0; y < ny; ++y) {
        Matrix g = Matrix::Zero(dout * db, dout * db);
        for (int k = 0; k < kk; ++k) g += grad(c, k, y) * w;
        out.problem.set_objective(out.blocks[c * ny + y], herm(g));
      }
    }
  } else {
    init_worst(out);
    for (int k = 0; k < kk; ++k) {
      for (int y = 0; y < ny; ++y) {
        std::vector<SdpProblem::Term> terms;
        for (int c = 0; c < nc; ++c) terms.push_back({out.blocks[c * ny + y], grad(c, k, y)});
        add_worst_row(out, std::move(terms));
      }
    }
  }
  return out;
}

SeesawSdp build_state_sdp(const ClassicalProtocol& p, const ScenarioSpec& s, Objective objective) {
  require_pure(s);
  p.validate(s);
  const int nc = static_cast<int>(p.encoder.size());
  const int da = p.resource.d_a;
  const int db = p.resource.d_b;
  const int kk = s.input_count();
  const int ny = s.y_count();
  const double w = 1.0 / (static_cast<double>(kk) * ny);

  SeesawSdp out;
  const int b = out.problem.add_block("rho", da * db);
  out.blocks.push_back(b);
  out.problem.add_constraint({{b, Matrix::Identity(da * db, da * db)}}, {}, 1.0);

  // H_{k,y} = sum_c tr_{A'}[(psi_k (x) 1) M^c] (x) L_{c,y}^dag(target)
  auto coeff = [&](int k, int y) {
    Matrix h = Matrix::Zero(da * db, da * db);
    for (int c = 0; c < nc; ++c) {
      const Matrix n = herm(contract_first(s.input(k).matrix(), p.encoder[c].matrix(), da));
      const Matrix wt = apply_choi_adjoint(p.decoders[c][y], s.target_state(k, y)).matrix();
      h += kron(Operator(n), Operator(herm(wt))).matrix();
    }
    return h;
  };
  if (objective == Objective::kAverage) {
    Matrix h = Matrix::Zero(da * db, da * db);
    for (int k = 0; k < kk; ++k) {
      for (int y = 0; y < ny; ++y) h += coeff(k, y) * w;
    }
    out.problem.set_objective(b, herm(h));
  } else {
    init_worst(out);
    for (int k = 0; k < kk; ++k) {
      for (int y = 0; y < ny; ++y) add_worst_row(out, {{b, herm(coeff(k, y))}});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quantum-message sub-problems

SeesawSdp build_quantum_encoder_sdp(const QuantumProtocol& p, const ScenarioSpec& s, Objective objective) {
  require_pure(s);
  p.validate(s);
  const int da = p.resource.d_a;
  const int db = p.resource.d_b;
  const int dc = p.resource.d_c;
  const int din = s.input_dim() * da;
  const int kk = s.input_count();
  const int ny = s.y_count();
  const double w = 1.0 / (static_cast<double>(kk) * ny);
  const Operator shared = p.resource.shared_state.with_dims(Dims{da, db});

  SeesawSdp out;
  const int b = out.problem.add_block("mu", dc * din);
  out.blocks.push_back(b);
  out.problem.add_partial_trace_equals(b, dc, din, Matrix::Identity(din, din) / static_cast<double>(din));

  // tr(W sigma_k) with W = L_y^dag(target) on (B, C), reordered to (C, B)
  auto grad = [&](int k, const Operator& w_bc) {
    const Operator z = kron(s.input(k).with_dims(Dims{s.input_dim()}), shared);
    const Operator w_cb = permute_subsystems(w_bc.with_dims(Dims{db, dc}), {1, 0});
    return choi_gradient(z, w_cb, Dims{din}, Dims{dc}).matrix();
  };
  auto adjoint_target = [&](int k, int y) { return apply_choi_adjoint(p.decoders[y], s.target_state(k, y)); };
  if (objective == Objective::kAverage) {
    std::vector<Matrix> per(kk);
    parallel_for(kk, [&](int k) {
      Operator wk = Operator::zero(Dims{db * dc});
      for (int y = 0; y < ny; ++y) wk += adjoint_target(k, y).with_dims(Dims{db * dc});
      per[k] = grad(k, wk.hermitian_part());
    });
    Matrix g = Matrix::Zero(dc * din, dc * din);
    for (const Matrix& m : per) g += m * w;
    out.problem.set_objective(b, herm(g));
  } else {
    init_worst(out);
    for (int k = 0; k < kk; ++k) {
      for (int y = 0; y < ny; ++y) add_worst_row(out, {{b, herm(grad(k, adjoint_target(k, y).hermitian_part()))}});
    }
  }
  return out;
}

SeesawSdp build_quantum_decoder_sdp(const QuantumProtocol& p, const ScenarioSpec& s, Objective objective) {
  require_pure(s);
  p.validate(s);
  const int db = p.resource.d_b;
  const int dc = p.resource.d_c;
  const int kk = s.input_count();
  const int ny = s.y_count();
  const double w = 1.0 / (static_cast<double>(kk) * ny);
  const Dims in{db, dc};
  const Dims& out_dims = s.output_dims();
  const int dout = out_dims.total();

  std::vector<Operator> sigma(kk);
  parallel_for(kk, [&](int k) { sigma[k] = remote_state(p, s.input(k)); });

  SeesawSdp out;
  for (int y = 0; y < ny; ++y) {
    const int b = out.problem.add_block("eta" + std::to_string(y), dout * db * dc);
    out.problem.add_partial_trace_equals(b, dout, db * dc,
                                         Matrix::Identity(db * dc, db * dc) / static_cast<double>(db * dc));
    out.blocks.push_back(b);
  }
  auto grad = [&](int k, int y) {
    return choi_gradient(sigma[k].with_dims(in), s.target_state(k, y), in, out_dims).matrix();
  };
  if (objective == Objective::kAverage) {
    for (int y = 0; y < ny; ++y) {
      Matrix g = Matrix::Zero(dout * db * dc, dout * db * dc);
      for (int k = 0; k < kk; ++k) g += grad(k, y) * w;
      out.problem.set_objective(out.blocks[y], herm(g));
    }
  } else {
    init_worst(out);
    for (int k = 0; k < kk; ++k) {
      for (int y = 0; y < ny; ++y) add_worst_row(out, {{out.blocks[y], grad(k, y)}});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Objectives and starting points

double protocol_objective(const ClassicalProtocol& p, const ScenarioSpec& s, Objective objective) {
  const CorrelationTable t = correlations_classical(p, s);
  return objective == Objective::kAverage ? avg_fidelity(t, s) : worst_fidelity(t, s);
}

double protocol_objective(const QuantumProtocol& p, const ScenarioSpec& s, Objective objective) {
  const CorrelationTable t = correlations_quantum(p, s);
  return objective == Objective::kAverage ? avg_fidelity(t, s) : worst_fidelity(t, s);
}

ClassicalProtocol random_classical_protocol(const ScenarioSpec& s, const ResourceSpec& r, Rng& rng) {
  if (r.kind != MessageKind::kClassical) throw ValueError("random_classical_protocol: resource is not classical");
  ClassicalProtocol p;
  p.resource = r;
  p.encoder = random_projective_povm(s.input_dims().concat(Dims{r.d_a}), r.d_c, rng);
  for (int c = 0; c < r.d_c; ++c) {
    std::vector<ChoiState> row;
    for (int y = 0; y < s.y_count(); ++y) row.push_back(random_choi(Dims{r.d_b}, s.output_dims(), rng));
    p.decoders.push_back(std::move(row));
  }
  return p;
}

QuantumProtocol random_quantum_protocol(const ScenarioSpec& s, const ResourceSpec& r, Rng& rng) {
  if (r.kind != MessageKind::kQuantum) throw ValueError("random_quantum_protocol: resource is not quantum");
  QuantumProtocol p;
  p.resource = r;
  p.encoder = random_choi(s.input_dims().concat(Dims{r.d_a}), Dims{r.d_c}, rng);
  for (int y = 0; y < s.y_count(); ++y) p.decoders.push_back(random_choi(Dims{r.d_b, r.d_c}, s.output_dims(), rng));
  return p;
}

// ---------------------------------------------------------------------------
// Alternating search

namespace {

struct StepState {
  SdpWarmStart warm;
  bool have_warm = false;
};

template <typename Protocol, typename Build, typename Apply>
void seesaw_step(Protocol& p, double& f, const ScenarioSpec& s, const SeesawConfig& cfg, StepState& st, int iteration,
                 std::vector<double>& trace, Build build, Apply apply) {
  const SeesawSdp sdp = build(p, s, cfg.objective);
  SdpOptions opt;
  opt.tolerance = cfg.solver_tolerance;
  opt.max_iterations = cfg.solver_max_iterations;
  if (st.have_warm) opt.warm_start = &st.warm;
  const SdpSolution sol = sdp.problem.solve(opt);
  if (sol.status == SdpStatus::kInfeasible) {
    throw NumericalError("see-saw sub-problem infeasible at outer iteration " + std::to_string(iteration));
  }
  st.warm = sol.warm;
  st.have_warm = true;
  Protocol candidate = p;
  apply(candidate, sdp, sol);
  const double fc = protocol_objective(candidate, s, cfg.objective);
  // the solver is first-order, so a step that does not help is dropped
  if (fc >= f) {
    p = std::move(candidate);
    f = fc;
  }
  trace.push_back(f);
}

void apply_measurement(ClassicalProtocol& p, const SeesawSdp& sdp, const SdpSolution& sol) {
  const Dims dims = p.encoder.dims();
  std::vector<Operator> effects;
  for (int b : sdp.blocks) effects.emplace_back(sol.blocks[b], dims);
  p.encoder = repair_povm(effects);
}

void apply_decoders(ClassicalProtocol& p, const SeesawSdp& sdp, const SdpSolution& sol) {
  const int ny = static_cast<int>(p.decoders.front().size());
  for (std::size_t c = 0; c < p.decoders.size(); ++c) {
    for (int y = 0; y < ny; ++y) {
      const ChoiState& old = p.decoders[c][y];
      const Operator raw(sol.blocks[sdp.blocks[c * ny + y]], old.out_dims().concat(old.in_dims()));
      p.decoders[c][y] = repair_choi(raw, old.in_dims(), old.out_dims());
    }
  }
}

void apply_state(ClassicalProtocol& p, const SeesawSdp& sdp, const SdpSolution& sol) {
  const Dims dims{p.resource.d_a, p.resource.d_b};
  Operator rho = psd_project(Operator(sol.blocks[sdp.blocks[0]], dims));
  rho *= cd(1.0 / rho.trace().real());
  p.resource = ResourceSpec(p.resource.d_c, rho.hermitian_part(), p.resource.d_a, p.resource.d_b, p.resource.kind);
}

void apply_encoder(QuantumProtocol& p, const SeesawSdp& sdp, const SdpSolution& sol) {
  const ChoiState& old = p.encoder;
  const Operator raw(sol.blocks[sdp.blocks[0]], old.out_dims().concat(old.in_dims()));
  p.encoder = repair_choi(raw, old.in_dims(), old.out_dims());
}

void apply_quantum_decoders(QuantumProtocol& p, const SeesawSdp& sdp, const SdpSolution& sol) {
  for (std::size_t y = 0; y < p.decoders.size(); ++y) {
    const ChoiState& old = p.decoders[y];
    const Operator raw(sol.blocks[sdp.blocks[y]], old.out_dims().concat(old.in_dims()));
    p.decoders[y] = repair_choi(raw, old.in_dims(), old.out_dims());
  }
}

bool window_closed(double gain, const SeesawConfig& cfg, int& stalls) {
  stalls = gain < cfg.window_tolerance ? stalls + 1 : 0;
  return stalls >= cfg.window;
}

template <typename Result, typename Start>
Result run_restarts(const ScenarioSpec& s, const SeesawConfig& cfg, Start start) {
  cfg.validate();
  Result result;
  result.runs.resize(cfg.restarts);
  parallel_for(cfg.restarts, [&](int r) {
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    Rng rng(seed);
    auto initial = start(rng);
    std::vector<double> warmup;
    if (cfg.objective == Objective::kWorst) {
      // the worst-case search starts from an average-case optimum of the same seed
      SeesawConfig avg = cfg;
      avg.objective = Objective::kAverage;
      auto first = seesaw_from(std::move(initial), s, avg);
      initial = std::move(first.protocol);
      warmup = std::move(first.trace);
    }
    auto run = seesaw_from(std::move(initial), s, cfg);
    run.warmup_trace = std::move(warmup);
    run.restart = r;
    run.seed = seed;
    result.runs[r] = std::move(run);
  });
  for (int r = 1; r < cfg.restarts; ++r) {
    if (result.runs[r].fidelity > result.runs[result.best].fidelity) result.best = r;
  }
  return result;
}

}  // namespace

SeesawRun<ClassicalProtocol> seesaw_from(ClassicalProtocol start, const ScenarioSpec& s, const SeesawConfig& cfg) {
  cfg.validate();
  start.validate(s);
  if (cfg.optimize_state && start.resource.kind != MessageKind::kClassical) {
    throw ValueError("seesaw: state optimisation needs a classical resource");
  }
  SeesawRun<ClassicalProtocol> run;
  run.seed = cfg.seed;
  double f = protocol_objective(start, s, cfg.objective);
  run.trace.push_back(f);
  StepState meas, dec, state;
  int stalls = 0;
  for (int it = 0; it < cfg.max_outer_iterations; ++it) {
    const double before = f;
    seesaw_step(start, f, s, cfg, meas, it, run.trace, build_measurement_sdp, apply_measurement);
    seesaw_step(start, f, s, cfg, dec, it, run.trace, build_decoder_sdp, apply_decoders);
    if (cfg.optimize_state) seesaw_step(start, f, s, cfg, state, it, run.trace, build_state_sdp, apply_state);
    run.outer_iterations = it + 1;
    if (window_closed(f - before, cfg, stalls)) {
      run.converged = true;
      break;
    }
  }
  run.fidelity = f;
  run.protocol = std::move(start);
  return run;
}

SeesawRun<QuantumProtocol> seesaw_from(QuantumProtocol start, const ScenarioSpec& s, const SeesawConfig& cfg) {
  cfg.validate();
  start.validate(s);
  if (cfg.optimize_state) throw ValueError("seesaw: state optimisation is only available for classical messages");
  SeesawRun<QuantumProtocol> run;
  run.seed = cfg.seed;
  double f = protocol_objective(start, s, cfg.objective);
  run.trace.push_back(f);
  StepState enc, dec;
  int stalls = 0;
  for (int it = 0; it < cfg.max_outer_iterations; ++it) {
    const double before = f;
    seesaw_step(start, f, s, cfg, enc, it, run.trace, build_quantum_encoder_sdp, apply_encoder);
    seesaw_step(start, f, s, cfg, dec, it, run.trace, build_quantum_decoder_sdp, apply_quantum_decoders);
    run.outer_iterations = it + 1;
    if (window_closed(f - before, cfg, stalls)) {
      run.converged = true;
      break;
    }
  }
  run.fidelity = f;
  run.protocol = std::move(start);
  return run;
}

SeesawResult<ClassicalProtocol> seesaw_run(const ScenarioSpec& s, const ResourceSpec& r, const SeesawConfig& cfg) {
  return run_restarts<SeesawResult<ClassicalProtocol>>(s, cfg,
                                                       [&](Rng& rng) { return random_classical_protocol(s, r, rng); });
}

SeesawResult<QuantumProtocol> seesaw_run_quantum(const ScenarioSpec& s, const ResourceSpec& r,
                                                 const SeesawConfig& cfg) {
  return run_restarts<SeesawResult<QuantumProtocol>>(s, cfg,
                                                     [&](Rng& rng) { return random_quantum_protocol(s, r, rng); });
}

// ---------------------------------------------------------------------------
// Random access codes

namespace {

// maximize sum_c tr(E_c G_c) subject to sum_c E_c = 1
Povm best_povm(const std::vector<Matrix>& gains, const Dims& dims, const SeesawConfig& cfg, StepState& st) {
  SdpProblem problem;
  std::vector<int> blocks;
  const int n = dims.total();
  for (std::size_t c = 0; c < gains.size(); ++c) {
    blocks.push_back(problem.add_block("E" + std::to_string(c), n));
    problem.set_objective(blocks.back(), herm(gains[c]));
  }
  problem.add_sum_equals(blocks, Matrix::Identity(n, n));
  SdpOptions opt;
  opt.tolerance = cfg.solver_tolerance;
  opt.max_iterations = cfg.solver_max_iterations;
  if (st.have_warm) opt.warm_start = &st.warm;
  const SdpSolution sol = problem.solve(opt);
  if (sol.status == SdpStatus::kInfeasible) throw NumericalError("random access code sub-problem infeasible");
  st.warm = sol.warm;
  st.have_warm = true;
  std::vector<Operator> effects;
  for (int b : blocks) effects.emplace_back(sol.blocks[b], dims);
  return repair_povm(effects);
}

struct RacRun {
  QuantumRacParts parts;
  double success = 0.0;
  std::vector<double> trace;
};

RacRun rac_run(QuantumRacParts parts, const SeesawConfig& cfg) {
  const int nn = parts.n_inputs;
  const int n = parts.d * parts.d;
  std::int64_t xs = 1;
  for (int k = 0; k < nn; ++k) xs *= n;
  const int da = parts.shared_state.dims()[0];
  const int db = parts.shared_state.dims()[1];
  const Matrix& rho = parts.shared_state.matrix();
  const int messages = static_cast<int>(parts.alice.front().size());
  const double norm = 1.0 / (static_cast<double>(nn) * static_cast<double>(xs));

  RacRun run;
  double f = quantum_rac(parts).success_probability();
  run.trace.push_back(f);
  std::vector<StepState> alice_warm(xs), bob_warm(static_cast<std::size_t>(nn) * messages);
  int stalls = 0;
  for (int it = 0; it < cfg.max_outer_iterations; ++it) {
    const double before = f;
    // Alice: one measurement per x against Bob's current decoders
    {
      QuantumRacParts cand = parts;
      parallel_for(static_cast<int>(xs), [&](int x) {
        const std::vector<int> s = unpack_string(x, nn, n);
        std::vector<Matrix> gains(messages, Matrix::Zero(da, da));
        for (int c = 0; c < messages; ++c) {
          for (int y = 0; y < nn; ++y) gains[c] += contract_second(rho, da, db, parts.bob[y][c][s[y]].matrix());
        }
        cand.alice[x] = best_povm(gains, Dims{da}, cfg, alice_warm[x]);
      });
      const double fc = quantum_rac(cand).success_probability();
      if (fc >= f) {
        parts = std::move(cand);
        f = fc;
      }
      run.trace.push_back(f);
    }
    // Bob: one measurement per (y, c) against Alice's conditional states
    {
      std::vector<std::vector<Matrix>> cond(xs, std::vector<Matrix>(messages));
      for (std::int64_t x = 0; x < xs; ++x) {
        for (int c = 0; c < messages; ++c) {
          cond[x][c] = contract_first(parts.alice[x][c].matrix(), rho, db);
        }
      }
      QuantumRacParts cand = parts;
      parallel_for(nn * messages, [&](int idx) {
        const int y = idx / messages;
        const int c = idx % messages;
        std::vector<Matrix> gains(n, Matrix::Zero(db, db));
        for (std::int64_t x = 0; x < xs; ++x) gains[unpack_string(x, nn, n)[y]] += cond[x][c] * norm;
        cand.bob[y][c] = best_povm(gains, Dims{db}, cfg, bob_warm[idx]);
      });
      const double fc = quantum_rac(cand).success_probability();
      if (fc >= f) {
        parts = std::move(cand);
        f = fc;
      }
      run.trace.push_back(f);
    }
    if (window_closed(f - before, cfg, stalls)) break;
  }
  run.parts = std::move(parts);
  run.success = f;
  return run;
}

}  // namespace

RacSeesawResult rac_seesaw(int n_inputs, int d, const Operator& shared_state, int messages, const SeesawConfig& cfg) {
  cfg.validate();
  if (shared_state.dims().size() != 2) throw DimensionError("rac_seesaw: shared state must be bipartite");
  if (!shared_state.is_state(tol::kState)) throw ValueError("rac_seesaw: shared state must be a density operator");
  if (messages < 1) throw ValueError("rac_seesaw: need at least one message");
  const int n = d * d;
  std::int64_t xs = 1;
  for (int k = 0; k < n_inputs; ++k) xs *= n;
  const int da = shared_state.dims()[0];
  const int db = shared_state.dims()[1];

  std::vector<RacRun> runs(cfg.restarts);
  parallel_for(cfg.restarts, [&](int r) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    QuantumRacParts parts;
    parts.n_inputs = n_inputs;
    parts.d = d;
    parts.shared_state = shared_state;
    for (std::int64_t x = 0; x < xs; ++x) parts.alice.push_back(random_projective_povm(Dims{da}, messages, rng));
    parts.bob.resize(n_inputs);
    for (int y = 0; y < n_inputs; ++y) {
      for (int c = 0; c < messages; ++c) parts.bob[y].push_back(random_projective_povm(Dims{db}, n, rng));
    }
    runs[r] = rac_run(std::move(parts), cfg);
  });
  RacSeesawResult out;
  int best = 0;
  for (int r = 0; r < cfg.restarts; ++r) {
    out.restart_values.push_back(runs[r].success);
    if (runs[r].success > runs[best].success) best = r;
  }
  out.parts = std::move(runs[best].parts);
  out.success = runs[best].success;
  out.trace = std::move(runs[best].trace);
  out.restart = best;
  out.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(best));
  return out;
}

bool is_adaptive(const QuantumRacParts& parts, double tol) {
  for (const std::vector<Povm>& row : parts.bob) {
    for (std::size_t c = 1; c < row.size(); ++c) {
      const Povm& a = row[0];
      const Povm& b = row[c];
      const int n = static_cast<int>(a.size());
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      bool related = false;
      if (n <= 6) {
        do {
          double worst = 0.0;
          for (int k = 0; k < n && worst <= tol; ++k) worst = std::max(worst, max_abs_diff(a[k], b[perm[k]]));
          related = worst <= tol;
        } while (!related && std::next_permutation(perm.begin(), perm.end()));
      } else {
        // greedy matching for large alphabets
        std::vector<bool> used(n, false);
        related = true;
        for (int k = 0; k < n && related; ++k) {
          int match = -1;
          for (int j = 0; j < n; ++j) {
            if (!used[j] && max_abs_diff(a[k], b[j]) <= tol) {
              match = j;
              break;
            }
          }
          if (match < 0) related = false;
          else used[match] = true;
        }
      }
      if (!related) return true;
    }
  }
  return false;
}

}  // namespace qpm
