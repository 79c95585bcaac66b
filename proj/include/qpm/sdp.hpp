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

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "qpm/tensor.hpp"

namespace qpm {

/// Real coordinates of an n x n hermitian matrix: the n diagonal entries, then
/// sqrt(2) Re and sqrt(2) Im of each upper entry (row-major over i < j). With this
/// map tr(A X) equals the Euclidean inner product of the coordinate vectors.
int hermitian_coord_count(int n);
Eigen::VectorXd hermitian_to_coords(const Matrix& h);
Matrix coords_to_hermitian(const Eigen::Ref<const Eigen::VectorXd>& v, int n);

/// Hermitian basis element dual to coordinate p: tr(hermitian_basis(n, p) X) = coords(X)[p].
Matrix hermitian_basis(int n, int p);

enum class SdpStatus { kOptimal, kMaxIterations, kInfeasible };

std::string to_string(SdpStatus status);

struct SdpWarmStart {
  Eigen::VectorXd z;
  Eigen::VectorXd u;
  double rho = 1.0;
};

struct SdpSolution {
  std::vector<Matrix> blocks;
  std::vector<double> scalars;
  double objective = 0.0;
  SdpStatus status = SdpStatus::kInfeasible;
  double primal_residual = 0.0;  // max residual over constraints scaled to unit-norm rows
  double psd_violation = 0.0;    // most negative block eigenvalue, clipped at 0
  int iterations = 0;
  SdpWarmStart warm;
};

struct SdpOptions {
  double tolerance = 1e-8;
  int max_iterations = 100000;
  double relaxation = 1.6;
  const SdpWarmStart* warm_start = nullptr;
};

/// maximize sum_b tr(C_b X_b) + sum_s c_s t_s
/// subject to sum_b tr(A_{ib} X_b) + sum_s a_{is} t_s = r_i, X_b >= 0, t_s free.
///
/// Blocks of dimension 1 act as nonnegative slack variables. Constraints are stored
/// sparsely in the real coordinates above; the affine projector is factorised once
/// and reused across solves with different objectives.
class SdpProblem {
 public:
  struct Term {
    int block;
    Matrix coeff;  // hermitian
  };

  int add_block(std::string name, int dim);
  int add_free_scalar(std::string name);

  int block_count() const { return static_cast<int>(block_dims_.size()); }
  int scalar_count() const { return static_cast<int>(scalar_names_.size()); }
  int block_dim(int b) const { return block_dims_.at(b); }
  const std::string& block_name(int b) const { return block_names_.at(b); }
  int constraint_count() const { return static_cast<int>(rhs_.size()); }
  int variable_count() const { return total_; }

  /// Replaces the objective coefficient of a block (hermitian within 1e-10).
  void set_objective(int block, const Matrix& coeff);
  void set_scalar_objective(int scalar, double coeff);
  void clear_objective();

  /// sum over terms tr(coeff X_block) + sum over scalars coeff t = rhs.
  void add_constraint(const std::vector<Term>& terms,
                      const std::vector<std::pair<int, double>>& scalar_terms, double rhs);
  /// Sum of the listed blocks equals `target` (entrywise in the hermitian basis).
  void add_sum_equals(const std::vector<int>& blocks, const Matrix& target);
  /// tr_out(X_block) = target for a block on out (x) in.
  void add_partial_trace_equals(int block, int d_out, int d_in, const Matrix& target);
  /// Raw coordinate-level constraint: (block, coordinate, value) triplets.
  void add_coordinate_constraint(const std::vector<std::pair<int, double>>& global_terms,
                                 double rhs);

  /// Offset of a block's (or scalar's) first coordinate in the stacked variable.
  int offset(int block) const { return offsets_.at(block); }
  int scalar_offset(int scalar) const { return scalar_offsets_.at(scalar); }

  double evaluate_objective(const std::vector<Matrix>& blocks,
                            const std::vector<double>& scalars) const;

  SdpSolution solve(const SdpOptions& options = {}) const;

 private:
  struct Factorization;
  const Factorization& factorization() const;
  void invalidate();

  std::vector<std::string> block_names_;
  std::vector<int> block_dims_;
  std::vector<int> offsets_;
  std::vector<std::string> scalar_names_;
  std::vector<int> scalar_offsets_;
  int total_ = 0;

  Eigen::VectorXd objective_;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::vector<double> rhs_;
  mutable std::shared_ptr<const Factorization> factor_;
};

}  // namespace qpm
