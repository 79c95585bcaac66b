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

#include <vector>

#include "qpm/random.hpp"
#include "qpm/tensor.hpp"

namespace qpm {

/// Measurement with outcomes 0..n-1; effects share one Dims.
class Povm {
 public:
  Povm() = default;
  /// Validates positivity and completeness within `tol`.
  explicit Povm(std::vector<Operator> effects, double tol = tol::kIdentity);
  static Povm unchecked(std::vector<Operator> effects);

  std::size_t size() const { return effects_.size(); }
  const Operator& operator[](std::size_t i) const { return effects_.at(i); }
  const std::vector<Operator>& effects() const { return effects_; }
  const Dims& dims() const { return effects_.front().dims(); }

  /// Largest Frobenius deviation of sum(effects) from the identity.
  double completeness_residual() const;

 private:
  std::vector<Operator> effects_;
};

/// Choi state of a channel from `in_dims` to `out_dims`, stored on out (x) in.
///
/// The channel acts as L(X) = d_in tr_in[(1_out (x) X^T) eta]; the invariants are
/// eta >= 0 and tr_out(eta) = 1_in / d_in.
class ChoiState {
 public:
  ChoiState() = default;
  ChoiState(Operator matrix, Dims in_dims, Dims out_dims, double tol = tol::kIdentity);
  static ChoiState unchecked(Operator matrix, Dims in_dims, Dims out_dims);

  const Operator& matrix() const { return m_; }
  const Dims& in_dims() const { return in_; }
  const Dims& out_dims() const { return out_; }
  int d_in() const { return in_.total(); }
  int d_out() const { return out_.total(); }

  /// max |tr_out(eta) - 1/d_in| entrywise.
  double marginal_residual() const;

 private:
  Operator m_;
  Dims in_;
  Dims out_;
};

// --- Weyl-Heisenberg structure -------------------------------------------

/// Shift X|j> = |j+1 mod d> and clock Z|j> = w^j |j>, w = exp(2 pi i / d).
struct WeylOps {
  int d;
  Operator x_op;
  Operator z_op;
};

WeylOps weyl_ops(int d);

/// X^i Z^j; exponents are reduced mod d (negative allowed).
Operator weyl(int d, int i, int j);

/// (X^u Z^v (x) 1)|phi+_d>, with label x = u*d + v.
PureVector bell_vector(int d, int u, int v);

/// The d^2 Bell projectors, outcome u*d + v.
Povm bell_basis(int d);

/// sum_i |ii> / sqrt(d).
PureVector max_entangled(int d);

/// (1/d^2) sum_{i,j} V_ij rho V_ij^dagger.
Operator weyl_twirl(const Operator& rho);

// --- Channels in Choi form -------------------------------------------------

ChoiState choi_from_kraus(const std::vector<Matrix>& kraus, const Dims& in_dims,
                          const Dims& out_dims);
/// Canonical Kraus operators (eigenvectors of d_in * eta with positive weight).
std::vector<Matrix> kraus_from_choi(const ChoiState& eta, double cutoff = 1e-13);

ChoiState unitary_choi(const Matrix& u, const Dims& dims);
ChoiState identity_choi(const Dims& dims);
/// Replaces every input by 1_out / d_out.
ChoiState depolarizing_choi(const Dims& in_dims, const Dims& out_dims);
/// Choi state of X -> tr_{not keep}(X).
ChoiState partial_trace_choi(const Dims& in_dims, const std::vector<int>& keep);

/// L(x) for x on the channel input.
Operator apply_choi(const ChoiState& eta, const Operator& x);

/// (L (x) id)(x) for x on in (x) rest; the leading factors of x must multiply to d_in.
/// Result carries out_dims followed by the remaining factors of x.
Operator apply_choi_leading(const ChoiState& eta, const Operator& x);

/// Heisenberg-picture adjoint L^dagger(w) for w on the output.
Operator apply_choi_adjoint(const ChoiState& eta, const Operator& w);

/// Coefficient G on out (x) in with tr(G eta) = tr(w (L_eta (x) id)(z)) for every eta.
/// z lives on in (x) rest, w on out (x) rest.
Operator choi_gradient(const Operator& z, const Operator& w, const Dims& in_dims,
                       const Dims& out_dims);

/// Makes tr_out(eta) exactly 1/d_in by congruence with (1 (x) S^{-1/2}) and
/// projects to the PSD cone first.
ChoiState repair_choi(const Operator& eta, const Dims& in_dims, const Dims& out_dims);

/// Makes the effects sum exactly to the identity by congruence with S^{-1/2}.
Povm repair_povm(const std::vector<Operator>& effects);

// --- Random channels ---------------------------------------------------------

/// Channel with `n_kraus` Haar-distributed Kraus operators (isometry slice).
std::vector<Matrix> random_kraus(int d_in, int d_out, int n_kraus, Rng& rng);
/// Choi state from the partial trace of a Haar-random pure state, renormalised.
ChoiState random_choi(const Dims& in_dims, const Dims& out_dims, Rng& rng);
/// Projective measurement with `outcomes` effects conjugated by a Haar unitary.
Povm random_projective_povm(const Dims& dims, int outcomes, Rng& rng);

// --- Fidelity ----------------------------------------------------------------

/// (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2; uses <s|rho|s> when either state is pure.
double fidelity(const Operator& rho, const Operator& sigma);

// --- Spherical 2-designs ------------------------------------------------------

struct Design2 {
  int d = 0;
  std::vector<PureVector> vectors;
  double weight() const { return 1.0 / static_cast<double>(vectors.size()); }
};

/// Weyl-Heisenberg SIC for d in {2,3,4}; vector k0*d + k1 is X^k0 Z^k1 |fiducial>.
/// Throws ValueError for other d and NumericalError if the frozen fiducial
/// fails verification.
const Design2& sic_povm(int d);

/// max_{j != k} | |<phi_j|phi_k>|^2 - 1/(d+1) |
double equiangularity_deviation(const Design2& design);
/// max entry of |(1/K) sum (phi phi^dag)^{(x)2} - 2 P_sym / (d(d+1))|
double second_moment_residual(const Design2& design);
/// Projector onto the symmetric subspace of C^d (x) C^d.
Matrix symmetric_projector(int d);

/// Cartesian product of the design vectors, first factor varying slowest.
std::vector<std::vector<PureVector>> product_design(const std::vector<Design2>& designs);

}  // namespace qpm
