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

#include "qpm/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace qpm {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Coordinate of the upper entry (i, j), i < j; the imaginary part follows.
int upper_index(int n, int i, int j) {
  // entries of rows < i: sum_{r<i} (n - 1 - r)
  const int before = i * (2 * n - i - 1) / 2;
  return n + 2 * (before + (j - i - 1));
}

}  // namespace

int hermitian_coord_count(int n) { return n * n; }

Eigen::VectorXd hermitian_to_coords(const Matrix& h) {
  const int n = static_cast<int>(h.rows());
  Eigen::VectorXd v(n * n);
  for (int i = 0; i < n; ++i) v(i) = h(i, i).real();
  int p = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      // average the two triangles so small non-hermitian drift cancels
      const cd a = 0.5 * (h(i, j) + std::conj(h(j, i)));
      v(p++) = kSqrt2 * a.real();
      v(p++) = kSqrt2 * a.imag();
    }
  }
  return v;
}

Matrix coords_to_hermitian(const Eigen::Ref<const Eigen::VectorXd>& v, int n) {
  Matrix h(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = v(i);
  int p = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const cd a(v(p) / kSqrt2, v(p + 1) / kSqrt2);
      h(i, j) = a;
      h(j, i) = std::conj(a);
      p += 2;
    }
  }
  return h;
}

Matrix hermitian_basis(int n, int p) {
  if (p < 0 || p >= n * n) throw DimensionError("hermitian_basis: coordinate out of range");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n * n);
  e(p) = 1.0;
  // coordinates are orthonormal in the trace inner product, so the basis
  // element is the hermitian matrix with these coordinates
  return coords_to_hermitian(e, n);
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal:
      return "optimal";
    case SdpStatus::kMaxIterations:
      return "max-iterations";
    case SdpStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Problem assembly

int SdpProblem::add_block(std::string name, int dim) {
  if (dim < 1) throw DimensionError("SdpProblem: block dimension must be positive");
  block_names_.push_back(std::move(name));
  block_dims_.push_back(dim);
  offsets_.push_back(total_);
  total_ += dim * dim;
  objective_.conservativeResize(total_);
  objective_.tail(dim * dim).setZero();
  invalidate();
  return block_count() - 1;
}

int SdpProblem::add_free_scalar(std::string name) {
  scalar_names_.push_back(std::move(name));
  scalar_offsets_.push_back(total_);
  total_ += 1;
  objective_.conservativeResize(total_);
  objective_(total_ - 1) = 0.0;
  invalidate();
  return scalar_count() - 1;
}

void SdpProblem::set_objective(int block, const Matrix& coeff) {
  const int n = block_dim(block);
  if (coeff.rows() != n || coeff.cols() != n) throw DimensionError("SdpProblem: objective dims");
  if ((coeff - coeff.adjoint()).cwiseAbs().maxCoeff() > tol::kHermitian * std::max(1.0, coeff.cwiseAbs().maxCoeff())) {
    throw ValueError("SdpProblem: objective coefficient not hermitian");
  }
  objective_.segment(offsets_[block], n * n) = hermitian_to_coords(coeff);
}

void SdpProblem::set_scalar_objective(int scalar, double coeff) {
  objective_(scalar_offsets_.at(scalar)) = coeff;
}

void SdpProblem::clear_objective() { objective_.setZero(); }

void SdpProblem::add_coordinate_constraint(const std::vector<std::pair<int, double>>& global_terms,
                                           double rhs) {
  const int row = constraint_count();
  for (const auto& [col, val] : global_terms) {
    if (col < 0 || col >= total_) throw DimensionError("SdpProblem: coordinate out of range");
    if (val != 0.0) triplets_.emplace_back(row, col, val);
  }
  rhs_.push_back(rhs);
  invalidate();
}

void SdpProblem::add_constraint(const std::vector<Term>& terms,
                                const std::vector<std::pair<int, double>>& scalar_terms,
                                double rhs) {
  std::vector<std::pair<int, double>> global;
  for (const Term& t : terms) {
    const int n = block_dim(t.block);
    if (t.coeff.rows() != n || t.coeff.cols() != n) throw DimensionError("SdpProblem: term dims");
    if ((t.coeff - t.coeff.adjoint()).cwiseAbs().maxCoeff() >
        tol::kHermitian * std::max(1.0, t.coeff.cwiseAbs().maxCoeff())) {
      throw ValueError("SdpProblem: constraint coefficient not hermitian");
    }
    const Eigen::VectorXd v = hermitian_to_coords(t.coeff);
    for (int p = 0; p < v.size(); ++p) {
      if (std::abs(v(p)) > 1e-15) global.emplace_back(offsets_[t.block] + p, v(p));
    }
  }
  for (const auto& [s, val] : scalar_terms) global.emplace_back(scalar_offsets_.at(s), val);
  add_coordinate_constraint(global, rhs);
}

void SdpProblem::add_sum_equals(const std::vector<int>& blocks, const Matrix& target) {
  if (blocks.empty()) throw ValueError("SdpProblem: empty block list");
  const int n = block_dim(blocks.front());
  for (int b : blocks) {
    if (block_dim(b) != n) throw DimensionError("SdpProblem: add_sum_equals block dims differ");
  }
  if (target.rows() != n) throw DimensionError("SdpProblem: add_sum_equals target dims");
  const Eigen::VectorXd t = hermitian_to_coords(target);
  for (int p = 0; p < n * n; ++p) {
    std::vector<std::pair<int, double>> terms;
    for (int b : blocks) terms.emplace_back(offsets_[b] + p, 1.0);
    add_coordinate_constraint(terms, t(p));
  }
}

void SdpProblem::add_partial_trace_equals(int block, int d_out, int d_in, const Matrix& target) {
  const int n = block_dim(block);
  if (n != d_out * d_in) throw DimensionError("SdpProblem: partial trace dims");
  if (target.rows() != d_in) throw DimensionError("SdpProblem: partial trace target dims");
  const Eigen::VectorXd t = hermitian_to_coords(target);
  const int off = offsets_[block];
  // tr((1_out (x) E_p) X) picks, for each output index o, the same coordinate
  // of the (o, o) diagonal sub-block.
  for (int i = 0; i < d_in; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int o = 0; o < d_out; ++o) terms.emplace_back(off + o * d_in + i, 1.0);
    add_coordinate_constraint(terms, t(i));
  }
  for (int i = 0; i < d_in; ++i) {
    for (int j = i + 1; j < d_in; ++j) {
      const int p = upper_index(d_in, i, j);
      for (int part = 0; part < 2; ++part) {
        std::vector<std::pair<int, double>> terms;
        for (int o = 0; o < d_out; ++o) {
          terms.emplace_back(off + upper_index(n, o * d_in + i, o * d_in + j) + part, 1.0);
        }
        add_coordinate_constraint(terms, t(p + part));
      }
    }
  }
}

double SdpProblem::evaluate_objective(const std::vector<Matrix>& blocks,
                                      const std::vector<double>& scalars) const {
  double acc = 0.0;
  for (int b = 0; b < block_count(); ++b) {
    acc += objective_.segment(offsets_[b], block_dim(b) * block_dim(b)).dot(hermitian_to_coords(blocks.at(b)));
  }
  for (int s = 0; s < scalar_count(); ++s) acc += objective_(scalar_offsets_[s]) * scalars.at(s);
  return acc;
}

void SdpProblem::invalidate() { factor_.reset(); }

// ---------------------------------------------------------------------------
// Affine projector

struct SdpProblem::Factorization {
  Eigen::SparseMatrix<double> a;  // rows scaled to unit norm
  Eigen::SparseMatrix<double> at;
  Eigen::VectorXd b;
  Eigen::VectorXd row_scale;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool dense = false;
  Eigen::MatrixXd pinv;

  Eigen::VectorXd solve_normal(const Eigen::VectorXd& r) const {
    if (dense) return pinv * r;
    return ldlt.solve(r);
  }

  // v - A^T (A A^T)^+ (A v - b); also returns the multiplier w.
  Eigen::VectorXd project(const Eigen::VectorXd& v, Eigen::VectorXd* w_out = nullptr) const {
    if (a.rows() == 0) return v;
    const Eigen::VectorXd w = solve_normal(a * v - b);
    if (w_out) *w_out = w;
    return v - at * w;
  }
};

const SdpProblem::Factorization& SdpProblem::factorization() const {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (factor_) return *factor_;
  auto f = std::make_shared<Factorization>();
  const int m = constraint_count();
  f->a.resize(m, total_);
  f->a.setFromTriplets(triplets_.begin(), triplets_.end());
  f->b = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), m);
  f->row_scale = Eigen::VectorXd::Ones(m);
  if (m > 0) {
    Eigen::VectorXd norms = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < f->a.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(f->a, k); it; ++it) {
        norms(it.row()) += it.value() * it.value();
      }
    }
    for (int i = 0; i < m; ++i) {
      if (norms(i) == 0.0) {
        if (std::abs(f->b(i)) > tol::kSolver) throw ValueError("SdpProblem: constraint 0 = nonzero");
        continue;
      }
      f->row_scale(i) = 1.0 / std::sqrt(norms(i));
    }
    f->a = f->row_scale.asDiagonal() * f->a;
    f->b = f->row_scale.asDiagonal() * f->b;
    f->at = f->a.transpose();
    const Eigen::SparseMatrix<double> aat = f->a * f->at;
    f->ldlt.compute(aat);
    bool ok = f->ldlt.info() == Eigen::Success;
    if (ok) {
      const Eigen::VectorXd d = f->ldlt.vectorD();
      ok = d.minCoeff() > 1e-10 * std::max(1.0, d.maxCoeff());
    }
    if (!ok) {
      // dependent rows: fall back to a dense pseudo-inverse
      f->dense = true;
      const Eigen::MatrixXd dense_aat(aat);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_aat);
      const Eigen::VectorXd ev = es.eigenvalues();
      const double cut = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
      Eigen::VectorXd inv = ev;
      for (int i = 0; i < inv.size(); ++i) inv(i) = ev(i) > cut ? 1.0 / ev(i) : 0.0;
      f->pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    }
  }
  factor_ = std::move(f);
  return *factor_;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

// Projects every block onto the PSD cone in place; returns the most negative
// eigenvalue seen (0 when none).
double project_cone(Eigen::VectorXd& v, const std::vector<int>& offsets, const std::vector<int>& dims) {
  double most_negative = 0.0;
  for (std::size_t b = 0; b < dims.size(); ++b) {
    const int n = dims[b];
    auto seg = v.segment(offsets[b], n * n);
    if (n == 1) {
      most_negative = std::min(most_negative, seg(0));
      seg(0) = std::max(0.0, seg(0));
      continue;
    }
    const Matrix h = coords_to_hermitian(seg, n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Eigen::VectorXd& ev = es.eigenvalues();
    most_negative = std::min(most_negative, ev(0));
    if (ev(0) >= 0.0) continue;
    int first = 0;
    while (first < n && ev(first) < 0.0) ++first;
    const int keep = n - first;
    Matrix p = Matrix::Zero(n, n);
    if (keep > 0) {
      const Matrix vecs = es.eigenvectors().rightCols(keep);
      p = vecs * ev.tail(keep).asDiagonal() * vecs.adjoint();
    }
    seg = hermitian_to_coords(p);
  }
  return most_negative;
}

}  // namespace

SdpSolution SdpProblem::solve(const SdpOptions& options) const {
  const Factorization& f = factorization();
  const int n = total_;
  SdpSolution sol;

  const double cscale = objective_.size() ? objective_.cwiseAbs().maxCoeff() : 0.0;
  const Eigen::VectorXd c = cscale > 0.0 ? Eigen::VectorXd(objective_ / cscale) : Eigen::VectorXd::Zero(n);

  // consistency of the affine system
  const Eigen::VectorXd x0 = f.project(Eigen::VectorXd::Zero(n));
  if (f.a.rows() > 0 && (f.a * x0 - f.b).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + f.b.cwiseAbs().maxCoeff())) {
    sol.status = SdpStatus::kInfeasible;
    return sol;
  }

  Eigen::VectorXd z, u;
  double rho = 1.0;
  if (options.warm_start && options.warm_start->z.size() == n) {
    z = options.warm_start->z;
    u = options.warm_start->u;
    rho = options.warm_start->rho;
  } else {
    z = x0;
    project_cone(z, offsets_, block_dims_);
    u = Eigen::VectorXd::Zero(n);
  }

  const double alpha = options.relaxation;
  const double tol = options.tolerance;
  Eigen::VectorXd x(n), w, z_prev(n), xh(n);
  bool converged = false;
  int it = 0;
  double rp = 0.0;
  double rd = 0.0;
  for (it = 1; it <= options.max_iterations; ++it) {
    x = f.project(z - u + c / rho, &w);
    xh = alpha * x + (1.0 - alpha) * z;
    z_prev = z;
    z = xh + u;
    project_cone(z, offsets_, block_dims_);
    u += xh - z;

    if (it % 10 == 0 || it == options.max_iterations) {
      rp = (x - z).cwiseAbs().maxCoeff();
      rd = rho * (z - z_prev).cwiseAbs().maxCoeff();
      const double pobj = c.dot(z);
      const double dobj = f.a.rows() > 0 ? rho * f.b.dot(w) : 0.0;
      const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (!std::isfinite(rp) || !std::isfinite(rd) || !std::isfinite(gap)) throw NumericalError("sdp: iterates diverged");
      if (rp < tol && rd < tol && gap < tol &&
          (f.a.rows() == 0 || (f.a * z - f.b).cwiseAbs().maxCoeff() < tol)) {
        converged = true;
        break;
      }
      if (it % 50 == 0) {
        // keep primal and dual residuals balanced
        double next = rho;
        if (rp > 10.0 * rd) {
          next = std::min(rho * 2.0, 1e6);
        } else if (rd > 10.0 * rp) {
          next = std::max(rho / 2.0, 1e-6);
        }
        // u is the scaled dual; rescale only when rho actually moves
        u *= rho / next;
        rho = next;
      }
    }
  }
  sol.iterations = std::min(it, options.max_iterations);
  sol.warm = {z, u, rho};

  // z lies in the cone; its affine residual is reported below
  const Eigen::VectorXd& out = z;
  sol.blocks.reserve(block_count());
  for (int b = 0; b < block_count(); ++b) {
    sol.blocks.push_back(coords_to_hermitian(out.segment(offsets_[b], block_dims_[b] * block_dims_[b]), block_dims_[b]));
  }
  for (int s = 0; s < scalar_count(); ++s) sol.scalars.push_back(out(scalar_offsets_[s]));
  sol.objective = objective_.dot(out);
  sol.primal_residual = f.a.rows() > 0 ? (f.a * out - f.b).cwiseAbs().maxCoeff() : 0.0;
  Eigen::VectorXd xcheck = x;
  sol.psd_violation = -project_cone(xcheck, offsets_, block_dims_);
  if (converged) {
    sol.status = SdpStatus::kOptimal;
  } else if (sol.primal_residual > 1e-6) {
    sol.status = SdpStatus::kInfeasible;
  } else {
    sol.status = SdpStatus::kMaxIterations;
  }
  return sol;
}

}  // namespace qpm
