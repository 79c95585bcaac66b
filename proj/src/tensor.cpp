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

#include "qpm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qpm {

namespace {

void check_indices(const Dims& dims, const std::vector<int>& idx, const char* what) {
  std::vector<bool> seen(dims.size(), false);
  for (int i : idx) {
    if (i < 0 || static_cast<std::size_t>(i) >= dims.size() || seen[i]) {
      throw DimensionError(std::string(what) + ": invalid subsystem index set for dims " +
                           dims.str());
    }
    seen[i] = true;
  }
}

// Digits of a flat index in the mixed radix given by `dims`.
void to_digits(int index, const std::vector<int>& f, std::vector<int>& digits) {
  for (int k = static_cast<int>(f.size()) - 1; k >= 0; --k) {
    digits[k] = index % f[k];
    index /= f[k];
  }
}

int from_digits(const std::vector<int>& digits, const std::vector<int>& f) {
  int index = 0;
  for (std::size_t k = 0; k < f.size(); ++k) index = index * f[k] + digits[k];
  return index;
}

// For each flat index of the permuted space, the flat index in the original space.
std::vector<int> permutation_map(const Dims& dims, const std::vector<int>& order) {
  if (order.size() != dims.size()) {
    throw DimensionError("permute_subsystems: order must list every factor");
  }
  check_indices(dims, order, "permute_subsystems");
  const Dims out = dims.select(order);
  const int n = dims.total();
  std::vector<int> map(n);
  std::vector<int> new_digits(dims.size()), old_digits(dims.size());
  for (int i = 0; i < n; ++i) {
    to_digits(i, out.factors(), new_digits);
    for (std::size_t k = 0; k < order.size(); ++k) old_digits[order[k]] = new_digits[k];
    map[i] = from_digits(old_digits, dims.factors());
  }
  return map;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dims

Dims::Dims(std::vector<int> factors) : factors_(std::move(factors)) {
  long long total = 1;
  for (int f : factors_) {
    if (f < 1) throw DimensionError("Dims: every factor must be >= 1");
    total *= f;
    if (total > kMaxDimension) {
      throw DimensionError("Dims: total dimension exceeds cap of " +
                           std::to_string(kMaxDimension));
    }
  }
  total_ = static_cast<int>(total);
}

Dims Dims::concat(const Dims& other) const {
  std::vector<int> f = factors_;
  f.insert(f.end(), other.factors_.begin(), other.factors_.end());
  return Dims(std::move(f));
}

Dims Dims::select(const std::vector<int>& idx) const {
  std::vector<int> f;
  f.reserve(idx.size());
  for (int i : idx) f.push_back(factors_.at(i));
  return Dims(std::move(f));
}

std::vector<int> Dims::strides() const {
  std::vector<int> s(factors_.size(), 1);
  for (int k = static_cast<int>(factors_.size()) - 2; k >= 0; --k) {
    s[k] = s[k + 1] * factors_[k + 1];
  }
  return s;
}

std::string Dims::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < factors_.size(); ++i) os << (i ? "," : "") << factors_[i];
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(Matrix entries, Dims dims) : m_(std::move(entries)), dims_(std::move(dims)) {
  if (m_.rows() != m_.cols()) throw DimensionError("Operator: matrix must be square");
  if (m_.rows() != dims_.total()) {
    throw DimensionError("Operator: matrix size " + std::to_string(m_.rows()) +
                         " does not match dims " + dims_.str());
  }
}

Operator::Operator(Matrix entries)
    : Operator(entries, Dims{static_cast<int>(entries.rows())}) {}

Operator Operator::identity(const Dims& dims) {
  return Operator(Matrix::Identity(dims.total(), dims.total()), dims);
}

Operator Operator::zero(const Dims& dims) {
  return Operator(Matrix::Zero(dims.total(), dims.total()), dims);
}

Operator Operator::with_dims(const Dims& dims) const { return Operator(m_, dims); }

Operator Operator::hermitian_part() const {
  return Operator(0.5 * (m_ + m_.adjoint()), dims_);
}

bool Operator::is_hermitian(double tol) const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool Operator::is_psd(double tol) const {
  if (!is_hermitian(std::max(tol, tol::kHermitian))) return false;
  return hermitian_eig(*this).values.minCoeff() >= -tol;
}

bool Operator::is_unit_trace(double tol) const { return std::abs(m_.trace() - 1.0) <= tol; }

bool Operator::is_state(double tol) const { return is_unit_trace(tol) && is_psd(tol); }

Operator& Operator::operator+=(const Operator& o) {
  if (!(dims_ == o.dims_)) throw DimensionError("Operator +: dims mismatch");
  m_ += o.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  if (!(dims_ == o.dims_)) throw DimensionError("Operator -: dims mismatch");
  m_ -= o.m_;
  return *this;
}

Operator& Operator::operator*=(cd s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DimensionError("Operator *: dimension mismatch");
  return Operator(a.m_ * b.m_, a.dims_);
}

// ---------------------------------------------------------------------------
// PureVector

PureVector::PureVector(Vector amplitudes, Dims dims) : v_(std::move(amplitudes)), dims_(std::move(dims)) {
  if (v_.size() != dims_.total()) throw DimensionError("PureVector: length does not match dims");
  if (std::abs(v_.norm() - 1.0) > tol::kConstruction) {
    throw ValueError("PureVector: amplitudes must have unit norm");
  }
}

PureVector PureVector::normalized(Vector amplitudes, Dims dims) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw ValueError("PureVector: zero vector");
  amplitudes /= n;
  return PureVector(std::move(amplitudes), std::move(dims));
}

PureVector PureVector::basis(const Dims& dims, int index) {
  Vector v = Vector::Zero(dims.total());
  v(index) = 1.0;
  return PureVector(std::move(v), dims);
}

Operator PureVector::projector() const { return Operator(v_ * v_.adjoint(), dims_); }

// ---------------------------------------------------------------------------
// Tensor operations

Operator kron(const Operator& a, const Operator& b) {
  const Dims dims = a.dims().concat(b.dims());
  const Matrix& am = a.matrix();
  const Matrix& bm = b.matrix();
  const int nb = b.dim();
  Matrix out(dims.total(), dims.total());
  for (int i = 0; i < am.rows(); ++i) {
    for (int j = 0; j < am.cols(); ++j) {
      out.block(i * nb, j * nb, nb, nb) = am(i, j) * bm;
    }
  }
  return Operator(std::move(out), dims);
}

Operator kron(const std::vector<Operator>& factors) {
  if (factors.empty()) throw DimensionError("kron: empty factor list");
  Operator out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

PureVector kron(const PureVector& a, const PureVector& b) {
  const Dims dims = a.dims().concat(b.dims());
  Vector out(dims.total());
  const int nb = b.dim();
  for (int i = 0; i < a.dim(); ++i) out.segment(i * nb, nb) = a.amplitudes()(i) * b.amplitudes();
  return PureVector::normalized(std::move(out), dims);
}

Operator partial_trace(const Operator& op, std::vector<int> keep) {
  const Dims& dims = op.dims();
  check_indices(dims, keep, "partial_trace");
  std::sort(keep.begin(), keep.end());
  std::vector<int> traced;
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
    if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);
  }
  const std::vector<int> strides = dims.strides();
  auto offsets = [&](const std::vector<int>& which) {
    const Dims sub = dims.select(which);
    std::vector<int> off(sub.total());
    std::vector<int> digits(which.size());
    for (int i = 0; i < sub.total(); ++i) {
      to_digits(i, sub.factors(), digits);
      int o = 0;
      for (std::size_t k = 0; k < which.size(); ++k) o += digits[k] * strides[which[k]];
      off[i] = o;
    }
    return off;
  };
  const std::vector<int> ko = offsets(keep);
  const std::vector<int> to = offsets(traced);
  const Matrix& m = op.matrix();
  const int nk = static_cast<int>(ko.size());
  Matrix out = Matrix::Zero(nk, nk);
  for (int r = 0; r < nk; ++r) {
    for (int c = 0; c < nk; ++c) {
      cd s = 0.0;
      for (int t : to) s += m(ko[r] + t, ko[c] + t);
      out(r, c) = s;
    }
  }
  if (keep.empty()) return Operator(std::move(out), Dims{1});
  return Operator(std::move(out), dims.select(keep));
}

Operator partial_transpose(const Operator& op, const std::vector<int>& subsystems) {
  const Dims& dims = op.dims();
  check_indices(dims, subsystems, "partial_transpose");
  const int n = dims.total();
  const std::vector<int>& f = dims.factors();
  std::vector<int> rd(f.size()), cd_(f.size());
  Matrix out(n, n);
  const Matrix& m = op.matrix();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      to_digits(r, f, rd);
      to_digits(c, f, cd_);
      for (int s : subsystems) std::swap(rd[s], cd_[s]);
      out(r, c) = m(from_digits(rd, f), from_digits(cd_, f));
    }
  }
  return Operator(std::move(out), dims);
}

Operator permute_subsystems(const Operator& op, const std::vector<int>& order) {
  const std::vector<int> map = permutation_map(op.dims(), order);
  const int n = op.dim();
  Matrix out(n, n);
  const Matrix& m = op.matrix();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out(r, c) = m(map[r], map[c]);
  }
  return Operator(std::move(out), op.dims().select(order));
}

PureVector permute_subsystems(const PureVector& v, const std::vector<int>& order) {
  const std::vector<int> map = permutation_map(v.dims(), order);
  Vector out(v.dim());
  for (int i = 0; i < v.dim(); ++i) out(i) = v.amplitudes()(map[i]);
  return PureVector::normalized(std::move(out), v.dims().select(order));
}

HermitianEig hermitian_eig(const Operator& op) {
  const Matrix h = 0.5 * (op.matrix() + op.matrix().adjoint());
  if (!h.allFinite()) throw NumericalError("hermitian_eig: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() == Eigen::Success) return {es.eigenvalues(), es.eigenvectors()};
  // the tridiagonal QR occasionally stalls on exact projectors; a diagonal shift unsticks it
  const double scale = std::max(h.cwiseAbs().maxCoeff(), 1.0);
  for (double shift : {1e-3, 0.5}) {
    const Matrix shifted = h + Matrix::Identity(h.rows(), h.cols()) * cd(shift * scale);
    es.compute(shifted);
    if (es.info() == Eigen::Success) {
      return {es.eigenvalues().array() - shift * scale, es.eigenvectors()};
    }
  }
  throw NumericalError("hermitian_eig: solver failed");
}

namespace {

Operator spectral_map(const Operator& op, auto&& fn) {
  const HermitianEig e = hermitian_eig(op);
  Eigen::VectorXd mapped = e.values.unaryExpr(fn);
  Matrix out = e.vectors * mapped.cast<cd>().asDiagonal() * e.vectors.adjoint();
  return Operator(std::move(out), op.dims());
}

}  // namespace

Operator psd_project(const Operator& op) {
  return spectral_map(op, [](double x) { return std::max(x, 0.0); });
}

Operator sqrt_psd(const Operator& op) {
  return spectral_map(op, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

Operator inv_sqrt_psd(const Operator& op, double floor) {
  return spectral_map(op, [floor](double x) { return 1.0 / std::sqrt(std::max(x, floor)); });
}

double frobenius_distance(const Operator& a, const Operator& b) {
  return (a.matrix() - b.matrix()).norm();
}

double max_abs_diff(const Operator& a, const Operator& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace qpm
