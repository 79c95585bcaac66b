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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qpm/parallel.hpp"
#include "qpm/random.hpp"

namespace qpm {

namespace {

int mod(int a, int n) { return ((a % n) + n) % n; }

Operator pauli_power(int x_exp, int z_exp) { return weyl(2, mod(x_exp, 2), mod(z_exp, 2)); }

}  // namespace

// ---------------------------------------------------------------------------
// Teleportation

ClassicalProtocol standard_teleport_protocol(int d) {
  if (d < 2 || d > 4) throw ValueError("standard_teleport_protocol: d must be 2, 3 or 4");
  ClassicalProtocol p;
  p.resource = ResourceSpec::maximally_entangled(d, d * d, MessageKind::kClassical);
  p.encoder = bell_basis(d);
  for (int u = 0; u < d; ++u) {
    for (int v = 0; v < d; ++v) p.decoders.push_back({unitary_choi(weyl(d, u, v).matrix(), Dims{d})});
  }
  return p;
}

std::vector<PureVector> universal_measurement_states() {
  const Dims dims{2, 2, 2};
  Vector fid = Vector::Zero(8);
  const double a = std::sqrt(2.0 / 3.0);
  const double b = 1.0 / std::sqrt(3.0) / std::sqrt(2.0);
  fid(0b001) = a;   // |00>_{A'} |1>_A
  fid(0b010) = -b;  // |01>_{A'} |0>_A
  fid(0b100) = -b;  // |10>_{A'} |0>_A
  const PureVector fiducial(fid, dims);
  std::vector<PureVector> out;
  for (int c = 0; c < 4; ++c) {
    const int c0 = c / 2;
    const int c1 = c % 2;
    for (int k = 0; k < 2; ++k) {
      const Operator u = kron({pauli_power(c1 + c0 + k, c1), pauli_power(c1 + k, c0), pauli_power(k, 0)});
      out.emplace_back(u.matrix() * fiducial.amplitudes(), dims);
    }
  }
  return out;
}

Operator universal_correction(int c, int y) {
  if (c < 0 || c > 3 || y < 0 || y > 1) throw ValueError("universal_correction: c in [0,4), y in {0,1}");
  const int c0 = c / 2;
  const int c1 = c % 2;
  const int yy = y + 1;  // targets are labelled 1 and 2 in the exponent formula
  return pauli_power(1 + yy * c0 + c1, 1 + (1 + yy) * c0 + yy * c1);
}

ClassicalProtocol universal_protocol_2qubit() {
  const std::vector<PureVector> states = universal_measurement_states();
  ClassicalProtocol p;
  p.resource = ResourceSpec::maximally_entangled(2, 4, MessageKind::kClassical);
  std::vector<Operator> effects;
  for (int c = 0; c < 4; ++c) effects.push_back(states[2 * c].projector() + states[2 * c + 1].projector());
  p.encoder = Povm(std::move(effects));
  for (int c = 0; c < 4; ++c) {
    std::vector<ChoiState> row;
    for (int y = 0; y < 2; ++y) row.push_back(unitary_choi(universal_correction(c, y).matrix(), Dims{2}));
    p.decoders.push_back(std::move(row));
  }
  return p;
}

ChoiState effective_channel(const ClassicalProtocol& p, const Dims& input_dims, int y) {
  const int din = input_dims.total();
  const Dims out_dims = p.decoders.at(0).at(y).out_dims();
  const int dout = out_dims.total();
  Matrix eta = Matrix::Zero(dout * din, dout * din);
  for (int i = 0; i < din; ++i) {
    for (int j = 0; j < din; ++j) {
      Matrix unit = Matrix::Zero(din, din);
      unit(i, j) = 1.0;
      const std::vector<Operator> sigma = remote_states(p, Operator(unit, input_dims));
      Matrix out = Matrix::Zero(dout, dout);
      for (std::size_t c = 0; c < sigma.size(); ++c) out += apply_choi(p.decoders[c][y], sigma[c]).matrix();
      for (int o = 0; o < dout; ++o) {
        for (int op = 0; op < dout; ++op) eta(o * din + i, op * din + j) = out(o, op) / static_cast<double>(din);
      }
    }
  }
  return ChoiState(Operator(eta, out_dims.concat(input_dims)), input_dims, out_dims);
}

double mixed_input_fidelity(double purity) {
  if (!(purity >= 0.5 && purity <= 1.0)) throw ValueError("mixed_input_fidelity: purity must lie in [1/2, 1]");
  const double t = purity;
  const double inner = std::max(0.0, 8.0 * t * t - 21.0 * t + 13.0);
  return (1.0 + 4.0 * t + std::sqrt(2.0) * std::sqrt(inner)) / 6.0;
}

double simulate_mixed_input_fidelity(double lambda, int samples, std::uint64_t seed) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValueError("simulate_mixed_input_fidelity: lambda in [0,1]");
  const ClassicalProtocol p = universal_protocol_2qubit();
  const Dims in{2, 2};
  const ChoiState ch[2] = {effective_channel(p, in, 0), effective_channel(p, in, 1)};
  Rng rng(seed);
  const Operator id = Operator::identity(Dims{2});
  double acc = 0.0;
  for (int s = 0; s < samples; ++s) {
    Operator rho[2];
    for (Operator& r : rho) {
      const Operator psi = haar_state(Dims{2}, rng).projector();
      r = psi * cd(lambda) + (id - psi) * cd(1.0 - lambda);
    }
    const Operator joint = kron(rho[0], rho[1]);
    for (int y = 0; y < 2; ++y) acc += fidelity(apply_choi(ch[y], joint).hermitian_part(), rho[y]);
  }
  return acc / (2.0 * samples);
}

double swap_fidelity(double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 4 + 1e-15)) {
    throw ValueError("swap_fidelity: theta must lie in [0, pi/4]");
  }
  const double s = std::sin(2.0 * theta);
  return 5.0 / 6.0 - s * s / 12.0;
}

double simulate_swap_fidelity(double theta, int y) {
  if (y < 0 || y > 1) throw ValueError("simulate_swap_fidelity: y in {0, 1}");
  Vector amp = Vector::Zero(4);
  amp(0) = std::cos(theta);
  amp(3) = std::sin(theta);
  const PureVector pair(amp, Dims{2, 2});  // (A'_k, R_k)
  // (A'_1, R_1, A'_2, R_2) -> (A'_1, A'_2, R_1, R_2)
  const PureVector joint = permute_subsystems(kron(pair, pair), {0, 2, 1, 3});
  const ChoiState ch = effective_channel(universal_protocol_2qubit(), Dims{2, 2}, y);
  const Operator out = apply_choi_leading(ch, joint.projector().with_dims(Dims{4, 2, 2}));  // (B', R_1, R_2)
  const Operator kept = partial_trace(out.with_dims(Dims{2, 2, 2}), {0, 1 + y}).hermitian_part();
  return fidelity(kept, pair.projector());
}

std::vector<NoisyPoint> noisy_resource_sweep(const std::vector<double>& visibilities) {
  const ScenarioSpec s = ScenarioSpec::stochastic_teleportation(2, 2);
  ClassicalProtocol p = universal_protocol_2qubit();
  std::vector<NoisyPoint> out;
  for (double v : visibilities) {
    p.resource = ResourceSpec::isotropic(2, v, 4, MessageKind::kClassical);
    out.push_back({v, avg_fidelity(correlations_classical(p, s), s)});
  }
  return out;
}

double noisy_resource_fidelity(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw ValueError("noisy_resource_fidelity: v in [0,1]");
  return visibility * 5.0 / 6.0 + (1.0 - visibility) / 2.0;
}

// ---------------------------------------------------------------------------
// Strings over [d^2]

std::vector<int> unpack_string(std::int64_t index, int n_entries, int alphabet) {
  std::vector<int> out(n_entries);
  for (int k = n_entries - 1; k >= 0; --k) {
    out[k] = static_cast<int>(index % alphabet);
    index /= alphabet;
  }
  return out;
}

std::int64_t pack_string(const std::vector<int>& entries, int alphabet) {
  std::int64_t idx = 0;
  for (int e : entries) idx = idx * alphabet + e;
  return idx;
}

namespace {

std::int64_t string_count(int n_inputs, int d) {
  if (n_inputs < 1 || d < 2) throw ValueError("need N >= 1 and d >= 2");
  std::int64_t count = 1;
  for (int k = 0; k < n_inputs; ++k) {
    count *= d * d;
    if (count > 50'000'000) throw DimensionError("input strings exceed capacity");
  }
  return count;
}

int entry(std::int64_t x, int k, int n_inputs, int alphabet) {
  for (int j = n_inputs - 1; j > k; --j) x /= alphabet;
  return static_cast<int>(x % alphabet);
}

}  // namespace

// ---------------------------------------------------------------------------
// NsBox

NsBox::NsBox(int n_inputs, int d, std::vector<std::int64_t> numerators, std::int64_t denominator)
    : n_(n_inputs), d_(d), x_count_(string_count(n_inputs, d)), num_(std::move(numerators)), den_(denominator) {
  const std::int64_t n = alphabet();
  const std::int64_t expected = x_count_ * n_ * n * n;
  if (expected > 50'000'000) throw DimensionError("NsBox: table exceeds capacity");
  if (static_cast<std::int64_t>(num_.size()) != expected) throw DimensionError("NsBox: table size");
  if (den_ <= 0) throw ValueError("NsBox: denominator must be positive");
  for (std::int64_t v : num_) {
    if (v < 0) throw ValueError("NsBox: negative probability");
  }
  if (normalization_residual() != 0.0) throw ValueError("NsBox: not normalised");
}

std::size_t NsBox::index(int a, int b, std::int64_t x, int y) const {
  const std::int64_t n = alphabet();
  return static_cast<std::size_t>(((x * n_ + y) * n + a) * n + b);
}

std::int64_t NsBox::numerator(int a, int b, std::int64_t x, int y) const { return num_.at(index(a, b, x, y)); }

double NsBox::probability(int a, int b, std::int64_t x, int y) const {
  return static_cast<double>(numerator(a, b, x, y)) / static_cast<double>(den_);
}

double NsBox::normalization_residual() const {
  const int n = alphabet();
  std::int64_t worst = 0;
  for (std::int64_t x = 0; x < x_count_; ++x) {
    for (int y = 0; y < n_; ++y) {
      std::int64_t s = 0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) s += numerator(a, b, x, y);
      }
      worst = std::max(worst, std::abs(s - den_));
    }
  }
  return static_cast<double>(worst) / static_cast<double>(den_);
}

double NsBox::signaling_residual() const {
  const int n = alphabet();
  std::int64_t worst = 0;
  // Alice's marginal must not depend on y
  for (std::int64_t x = 0; x < x_count_; ++x) {
    for (int a = 0; a < n; ++a) {
      std::int64_t ref = 0;
      for (int y = 0; y < n_; ++y) {
        std::int64_t s = 0;
        for (int b = 0; b < n; ++b) s += numerator(a, b, x, y);
        if (y == 0) ref = s;
        worst = std::max(worst, std::abs(s - ref));
      }
    }
  }
  // Bob's marginal must not depend on x
  for (int y = 0; y < n_; ++y) {
    for (int b = 0; b < n; ++b) {
      std::int64_t ref = 0;
      for (std::int64_t x = 0; x < x_count_; ++x) {
        std::int64_t s = 0;
        for (int a = 0; a < n; ++a) s += numerator(a, b, x, y);
        if (x == 0) ref = s;
        worst = std::max(worst, std::abs(s - ref));
      }
    }
  }
  return static_cast<double>(worst) / static_cast<double>(den_);
}

double NsBox::bell_value() const {
  const int n = alphabet();
  std::int64_t hits = 0;
  for (std::int64_t x = 0; x < x_count_; ++x) {
    for (int y = 0; y < n_; ++y) {
      const int target = entry(x, y, n_, n);
      for (int a = 0; a < n; ++a) hits += numerator(a, mod(target - a, n), x, y);
    }
  }
  return static_cast<double>(hits) / (static_cast<double>(den_) * n_ * static_cast<double>(x_count_));
}

NsBox ns_box(int n_inputs, int d) {
  const std::int64_t xs = string_count(n_inputs, d);
  const int n = d * d;
  std::vector<std::int64_t> num(static_cast<std::size_t>(xs * n_inputs * n * n), 0);
  for (std::int64_t x = 0; x < xs; ++x) {
    for (int y = 0; y < n_inputs; ++y) {
      const int target = entry(x, y, n_inputs, n);
      for (int a = 0; a < n; ++a) {
        const int b = mod(target - a, n);
        num[static_cast<std::size_t>(((x * n_inputs + y) * n + a) * n + b)] = 1;
      }
    }
  }
  return NsBox(n_inputs, d, std::move(num), n);
}

NsBox local_deterministic_box(int n_inputs, int d) {
  const std::int64_t xs = string_count(n_inputs, d);
  const int n = d * d;
  std::vector<std::int64_t> num(static_cast<std::size_t>(xs * n_inputs * n * n), 0);
  for (std::int64_t x = 0; x < xs; ++x) {
    for (int y = 0; y < n_inputs; ++y) {
      const int a = entry(x, 0, n_inputs, n);
      num[static_cast<std::size_t>(((x * n_inputs + y) * n + a) * n + 0)] = 1;
    }
  }
  return NsBox(n_inputs, d, std::move(num), 1);
}

NsBox uniform_box(int n_inputs, int d) {
  const std::int64_t xs = string_count(n_inputs, d);
  const int n = d * d;
  std::vector<std::int64_t> num(static_cast<std::size_t>(xs * n_inputs * n * n), 1);
  return NsBox(n_inputs, d, std::move(num), static_cast<std::int64_t>(n) * n);
}

// ---------------------------------------------------------------------------
// RacStrategy

RacStrategy::RacStrategy(RacKind kind, int n_inputs, int d, std::vector<double> table, std::string label)
    : kind_(kind), n_(n_inputs), d_(d), x_count_(string_count(n_inputs, d)), table_(std::move(table)),
      label_(std::move(label)) {
  const std::int64_t n = alphabet();
  if (static_cast<std::int64_t>(table_.size()) != x_count_ * n_ * n) throw DimensionError("RacStrategy: table size");
  for (std::int64_t x = 0; x < x_count_; ++x) {
    for (int y = 0; y < n_; ++y) {
      double s = 0.0;
      for (int b = 0; b < n; ++b) {
        const double p = table_[static_cast<std::size_t>((x * n_ + y) * n + b)];
        if (p < -1e-9) throw ValueError("RacStrategy: negative probability");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-9) throw ValueError("RacStrategy: guesses not normalised");
    }
  }
}

double RacStrategy::guess_probability(int b, std::int64_t x, int y) const {
  return table_.at(static_cast<std::size_t>((x * n_ + y) * alphabet() + b));
}

double RacStrategy::success_probability() const {
  const int n = alphabet();
  double acc = 0.0;
  for (std::int64_t x = 0; x < x_count_; ++x) {
    for (int y = 0; y < n_; ++y) acc += guess_probability(entry(x, y, n_, n), x, y);
  }
  return acc / (static_cast<double>(n_) * static_cast<double>(x_count_));
}

RacStrategy rac_from_box(const NsBox& box) {
  const int n = box.alphabet();
  const int nn = box.n_inputs();
  std::vector<double> table(static_cast<std::size_t>(box.x_count() * nn * n), 0.0);
  for (std::int64_t x = 0; x < box.x_count(); ++x) {
    for (int y = 0; y < nn; ++y) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          table[static_cast<std::size_t>((x * nn + y) * n + mod(a + b, n))] += box.probability(a, b, x, y);
        }
      }
    }
  }
  return RacStrategy(RacKind::kBox, nn, box.d(), std::move(table), "box");
}

RacStrategy classical_rac(int n_inputs, int d, const std::vector<DeterministicRac>& parts) {
  const std::int64_t xs = string_count(n_inputs, d);
  const int n = d * d;
  if (parts.empty()) throw ValueError("classical_rac: no strategies");
  double total = 0.0;
  for (const DeterministicRac& part : parts) {
    if (part.weight < 0.0) throw ValueError("classical_rac: negative weight");
    total += part.weight;
  }
  if (total <= 0.0) throw ValueError("classical_rac: weights sum to zero");
  std::vector<double> table(static_cast<std::size_t>(xs * n_inputs * n), 0.0);
  for (const DeterministicRac& part : parts) {
    if (static_cast<std::int64_t>(part.encode.size()) != xs) throw DimensionError("classical_rac: encode table");
    for (std::int64_t x = 0; x < xs; ++x) {
      const int m = part.encode[static_cast<std::size_t>(x)];
      if (m < 0 || m >= static_cast<int>(part.decode.size())) throw ValueError("classical_rac: message out of range");
      for (int y = 0; y < n_inputs; ++y) {
        const int g = part.decode[m].at(y);
        if (g < 0 || g >= n) throw ValueError("classical_rac: guess out of range");
        table[static_cast<std::size_t>((x * n_inputs + y) * n + g)] += part.weight / total;
      }
    }
  }
  return RacStrategy(RacKind::kClassical, n_inputs, d, std::move(table), "classical");
}

RacStrategy random_guess_rac(int n_inputs, int d) {
  const std::int64_t xs = string_count(n_inputs, d);
  const int n = d * d;
  std::vector<DeterministicRac> parts;
  for (int g = 0; g < n; ++g) {
    DeterministicRac r;
    r.encode.assign(static_cast<std::size_t>(xs), 0);
    r.decode.assign(1, std::vector<int>(n_inputs, g));
    parts.push_back(std::move(r));
  }
  RacStrategy out = classical_rac(n_inputs, d, parts);
  return out;
}

RacStrategy quantum_rac(const QuantumRacParts& parts) {
  const std::int64_t xs = string_count(parts.n_inputs, parts.d);
  const int n = parts.d * parts.d;
  if (static_cast<std::int64_t>(parts.alice.size()) != xs) throw DimensionError("quantum_rac: one POVM per x");
  if (static_cast<int>(parts.bob.size()) != parts.n_inputs) throw DimensionError("quantum_rac: one row per y");
  const Dims& sd = parts.shared_state.dims();
  if (sd.size() != 2) throw DimensionError("quantum_rac: shared state must be bipartite");
  const int da = sd[0];
  const int db = sd[1];
  const Matrix& rho = parts.shared_state.matrix();
  std::vector<double> table(static_cast<std::size_t>(xs * parts.n_inputs * n), 0.0);
  parallel_for(static_cast<int>(xs), [&](int x) {
    const Povm& a = parts.alice[x];
    for (std::size_t c = 0; c < a.size(); ++c) {
      if (a[c].dim() != da) throw DimensionError("quantum_rac: Alice effect dims");
      // sigma = tr_A[(A_{c|x} (x) 1) rho]
      Matrix sigma = Matrix::Zero(db, db);
      const Matrix& e = a[c].matrix();
      for (int i = 0; i < da; ++i) {
        for (int j = 0; j < da; ++j) {
          if (e(j, i) == cd(0.0)) continue;
          sigma += e(j, i) * rho.block(i * db, j * db, db, db);
        }
      }
      for (int y = 0; y < parts.n_inputs; ++y) {
        const Povm& b = parts.bob[y].at(c);
        if (static_cast<int>(b.size()) != n) throw DimensionError("quantum_rac: Bob needs d^2 outcomes");
        for (int g = 0; g < n; ++g) {
          table[static_cast<std::size_t>((x * parts.n_inputs + y) * n + g)] +=
              (b[g].matrix() * sigma).trace().real();
        }
      }
    }
  });
  for (double& v : table) v = std::max(0.0, v);
  return RacStrategy(RacKind::kQuantum, parts.n_inputs, parts.d, std::move(table), "quantum");
}

// ---------------------------------------------------------------------------
// Relabeling group over GF(q)

AffineRelabeling::AffineRelabeling(int q) {
  // q = p^k with a fixed reduction rule t^k = sum r_i t^i
  int p = 0;
  int k = 0;
  std::vector<int> reduce;
  switch (q) {
    case 4:
      p = 2, k = 2, reduce = {1, 1};
      break;
    case 9:
      p = 3, k = 2, reduce = {2, 0};
      break;
    case 16:
      p = 2, k = 4, reduce = {1, 1, 0, 0};
      break;
    default: {
      bool prime = q >= 2;
      for (int f = 2; f * f <= q; ++f) prime = prime && (q % f != 0);
      if (!prime) throw ValueError("AffineRelabeling: unsupported label count " + std::to_string(q));
      p = q, k = 1, reduce = {0};
    }
  }
  auto digits = [&](int v) {
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i, v /= p) out[i] = v % p;
    return out;
  };
  auto value = [&](const std::vector<int>& dg) {
    int v = 0;
    for (int i = k - 1; i >= 0; --i) v = v * p + dg[i];
    return v;
  };
  auto add = [&](int a, int b) {
    std::vector<int> da = digits(a), dbv = digits(b);
    for (int i = 0; i < k; ++i) da[i] = (da[i] + dbv[i]) % p;
    return value(da);
  };
  auto mul = [&](int a, int b) {
    if (k == 1) return (a * b) % p;
    const std::vector<int> da = digits(a), dbv = digits(b);
    std::vector<int> prod(2 * k - 1, 0);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) prod[i + j] = (prod[i + j] + da[i] * dbv[j]) % p;
    }
    for (int deg = 2 * k - 2; deg >= k; --deg) {
      const int coef = prod[deg];
      prod[deg] = 0;
      for (int i = 0; i < k; ++i) prod[deg - k + i] = (prod[deg - k + i] + coef * reduce[i]) % p;
    }
    prod.resize(k);
    return value(prod);
  };
  for (int alpha = 1; alpha < q; ++alpha) {
    for (int beta = 0; beta < q; ++beta) {
      std::vector<int> m(q), inv(q);
      for (int l = 0; l < q; ++l) m[l] = add(mul(alpha, l), beta);
      for (int l = 0; l < q; ++l) inv[m[l]] = l;
      std::vector<int> check = m;
      std::sort(check.begin(), check.end());
      for (int l = 0; l < q; ++l) {
        if (check[l] != l) throw NumericalError("AffineRelabeling: map is not a bijection");
      }
      maps_.push_back(std::move(m));
      inverses_.push_back(std::move(inv));
    }
  }
}

// ---------------------------------------------------------------------------
// Stochastic teleportation

StochasticTeleportSimulator::StochasticTeleportSimulator(RacStrategy rac, StochasticTeleportSpec spec,
                                                         bool symmetrize)
    : rac_(std::move(rac)), spec_(spec), symmetrize_(symmetrize) {
  if (spec_.n_inputs < 1 || spec_.d < 2) throw ValueError("StochasticTeleportSpec: need N >= 1, d >= 2");
  if (rac_.n_inputs() != spec_.n_inputs || rac_.d() != spec_.d) {
    throw ValueError("compose_stochastic_teleport: code alphabet does not match the task");
  }
  const int n = rac_.alphabet();
  const int nn = spec_.n_inputs;
  const std::int64_t xs = rac_.x_count();
  final_label_.assign(static_cast<std::size_t>(xs * nn * n), 0.0);
  if (!symmetrize_) {
    for (std::int64_t x = 0; x < xs; ++x) {
      for (int y = 0; y < nn; ++y) {
        for (int b = 0; b < n; ++b) {
          final_label_[static_cast<std::size_t>((x * nn + y) * n + b)] = rac_.guess_probability(b, x, y);
        }
      }
    }
    return;
  }
  // shared uniform relabeling g: Alice encodes g(x_k), Bob outputs g^{-1}(guess)
  const AffineRelabeling group(n);
  const double w = 1.0 / group.size();
  for (int g = 0; g < group.size(); ++g) {
    for (std::int64_t x = 0; x < xs; ++x) {
      std::vector<int> s = unpack_string(x, nn, n);
      for (int& e : s) e = group.apply(g, e);
      const std::int64_t gx = pack_string(s, n);
      for (int y = 0; y < nn; ++y) {
        for (int bp = 0; bp < n; ++bp) {
          final_label_[static_cast<std::size_t>((x * nn + y) * n + group.inverse(g, bp))] +=
              w * rac_.guess_probability(bp, gx, y);
        }
      }
    }
  }
}

Operator StochasticTeleportSimulator::output_state(const std::vector<PureVector>& inputs, int y) const {
  const int d = spec_.d;
  const int n = d * d;
  const int nn = spec_.n_inputs;
  if (static_cast<int>(inputs.size()) != nn) throw DimensionError("output_state: need N inputs");
  if (y < 0 || y >= nn) throw ValueError("output_state: y out of range");
  const Povm bell = bell_basis(d);
  const Operator phi = max_entangled(d).projector();
  // per pair: outcome probabilities and Bob's post-measurement state
  std::vector<std::vector<double>> prob(nn, std::vector<double>(n));
  std::vector<Operator> bob_state(n);
  for (int k = 0; k < nn; ++k) {
    if (inputs[k].dim() != d) throw DimensionError("output_state: input dimension");
    const Operator joint = kron(inputs[k].projector(), phi);  // (A'_k, A_k, B_k)
    for (int x = 0; x < n; ++x) {
      const Operator m = kron(bell[x], Operator::identity(Dims{d}));
      const Operator post = partial_trace(m * joint * m, {2});
      prob[k][x] = post.trace().real();
      if (k == y) bob_state[x] = post * cd(1.0 / prob[k][x]);
    }
  }
  std::vector<Operator> corrections;
  for (int b = 0; b < n; ++b) corrections.push_back(weyl(d, b / d, b % d));
  Operator tau = Operator::zero(Dims{d});
  for (std::int64_t x = 0; x < rac_.x_count(); ++x) {
    const std::vector<int> s = unpack_string(x, nn, n);
    double px = 1.0;
    for (int k = 0; k < nn; ++k) px *= prob[k][s[k]];
    if (px == 0.0) continue;
    for (int b = 0; b < n; ++b) {
      const double pb = final_label_[static_cast<std::size_t>((x * nn + y) * n + b)];
      if (pb == 0.0) continue;
      tau += corrections[b] * bob_state[s[y]] * corrections[b].adjoint() * cd(px * pb);
    }
  }
  return tau.hermitian_part();
}

double StochasticTeleportSimulator::average_fidelity() const {
  const Design2& sic = sic_povm(spec_.d);
  const auto grid = product_design(std::vector<Design2>(spec_.n_inputs, sic));
  const int nn = spec_.n_inputs;
  std::vector<double> per(grid.size(), 0.0);
  parallel_for(static_cast<int>(grid.size()), [&](int g) {
    for (int y = 0; y < nn; ++y) {
      const Operator tau = output_state(grid[g], y);
      const Vector& v = grid[g][y].amplitudes();
      per[g] += (v.adjoint() * tau.matrix() * v)(0, 0).real();
    }
  });
  return std::accumulate(per.begin(), per.end(), 0.0) / (static_cast<double>(grid.size()) * nn);
}

double StochasticTeleportSimulator::formula_fidelity() const {
  const double d = spec_.d;
  return (d * rac_.success_probability() + 1.0) / (d + 1.0);
}

StochasticTeleportSimulator compose_stochastic_teleport(const RacStrategy& rac, const StochasticTeleportSpec& spec,
                                                        bool symmetrize) {
  return StochasticTeleportSimulator(rac, spec, symmetrize);
}

RacBound rac_bound(int n_inputs, int d) {
  if (n_inputs < 1 || d < 2) throw ValueError("rac_bound: need N >= 1 and d >= 2");
  const double nn = n_inputs;
  const double dd = d;
  return {(1.0 + (nn - 1.0) / dd) / nn, (2.0 * nn + dd - 1.0) / (nn * (dd + 1.0))};
}

// ---------------------------------------------------------------------------
// Result-1 style transformers

namespace {

// rho_AB (x) phi+_{A_aux B_aux} reordered to (A A_aux) (B B_aux).
Operator extend_with_ebit(const Operator& shared, int da, int db, int dc) {
  const Operator ext = kron(shared.with_dims(Dims{da, db}), max_entangled(dc).projector());
  return permute_subsystems(ext, {0, 2, 1, 3}).with_dims(Dims{da * dc, db * dc});
}

Dims widen_last(const Dims& dims, int factor) {
  std::vector<int> f = dims.factors();
  f.back() *= factor;
  return Dims(f);
}

}  // namespace

ClassicalProtocol result1_classicalize(const QuantumProtocol& p) {
  const int dc = p.resource.d_c;
  const int da = p.resource.d_a;
  const int db = p.resource.d_b;
  ClassicalProtocol out;
  out.resource = ResourceSpec(dc * dc, extend_with_ebit(p.resource.shared_state, da, db, dc), da * dc, db * dc,
                              MessageKind::kClassical);

  // encode, then Bell-measure (C, A_aux)
  const std::vector<Matrix> kraus = kraus_from_choi(p.encoder);
  const Povm bell = bell_basis(dc);
  const Dims enc_dims = widen_last(p.encoder.in_dims(), dc);
  std::vector<Operator> effects;
  for (int x = 0; x < dc * dc; ++x) {
    Matrix m = Matrix::Zero(enc_dims.total(), enc_dims.total());
    for (const Matrix& k : kraus) {
      // (K (x) 1_aux): (A'A, A_aux) -> (C, A_aux)
      Matrix big = Matrix::Zero(dc * dc, enc_dims.total());
      for (int o = 0; o < dc; ++o) {
        for (int i = 0; i < k.cols(); ++i) {
          for (int a = 0; a < dc; ++a) big(o * dc + a, i * dc + a) = k(o, i);
        }
      }
      m += big.adjoint() * bell[x].matrix() * big;
    }
    effects.emplace_back(0.5 * (m + m.adjoint()), enc_dims);
  }
  out.encoder = Povm(std::move(effects));

  // Bob undoes the teleportation byproduct on B_aux, then decodes
  for (int x = 0; x < dc * dc; ++x) {
    const Matrix fix = kron(Operator::identity(Dims{db}), weyl(dc, x / dc, x % dc)).matrix();
    std::vector<ChoiState> row;
    for (const ChoiState& eta : p.decoders) {
      std::vector<Matrix> ks = kraus_from_choi(eta);
      for (Matrix& k : ks) k = k * fix;
      row.push_back(choi_from_kraus(ks, Dims{db * dc}, eta.out_dims()));
    }
    out.decoders.push_back(std::move(row));
  }
  return out;
}

QuantumProtocol result1_quantize(const ClassicalProtocol& p) {
  const int alphabet = static_cast<int>(p.encoder.size());
  const int dc = static_cast<int>(std::lround(std::sqrt(static_cast<double>(alphabet))));
  if (dc * dc != alphabet) throw ValueError("result1_quantize: message alphabet must be a perfect square");
  const int da = p.resource.d_a;
  const int db = p.resource.d_b;
  QuantumProtocol out;
  out.resource = ResourceSpec(dc, extend_with_ebit(p.resource.shared_state, da, db, dc), da * dc, db * dc,
                              MessageKind::kQuantum);

  // measure {M^c}, then apply the dense-coding unitary on A_aux and send it
  const int dt = p.encoder.dims().total();
  std::vector<Matrix> kraus;
  for (int c = 0; c < alphabet; ++c) {
    const Matrix root = sqrt_psd(p.encoder[c]).matrix();
    const Matrix u = weyl(dc, c / dc, c % dc).matrix();
    for (int j = 0; j < dt; ++j) {
      if (root.row(j).norm() < 1e-14) continue;
      Matrix k(dc, dt * dc);
      for (int i = 0; i < dt; ++i) k.block(0, i * dc, dc, dc) = root(j, i) * u;
      kraus.push_back(std::move(k));
    }
  }
  const Dims enc_in = widen_last(p.encoder.dims(), dc);
  out.encoder = choi_from_kraus(kraus, enc_in, Dims{dc});

  // Bell-measure (C, B_aux) to read c, then apply the c-th decoder on B
  const int ny = static_cast<int>(p.decoders.at(0).size());
  for (int y = 0; y < ny; ++y) {
    std::vector<Matrix> ks;
    Dims out_dims;
    for (int c = 0; c < alphabet; ++c) {
      const ChoiState& eta = p.decoders[c][y];
      out_dims = eta.out_dims();
      // <beta_c| on (B_aux, C)
      const PureVector beta = permute_subsystems(bell_vector(dc, c / dc, c % dc), {1, 0});
      const Matrix bra = beta.amplitudes().adjoint();
      for (const Matrix& l : kraus_from_choi(eta)) {
        Matrix k(l.rows(), l.cols() * dc * dc);
        for (int o = 0; o < l.rows(); ++o) {
          for (int b = 0; b < l.cols(); ++b) k.block(o, b * dc * dc, 1, dc * dc) = l(o, b) * bra;
        }
        ks.push_back(std::move(k));
      }
    }
    out.decoders.push_back(choi_from_kraus(ks, Dims{db * dc, dc}, out_dims));
  }
  return out;
}

}  // namespace qpm
