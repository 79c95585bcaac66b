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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qpm {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Named numerical tolerances shared by every module.
namespace tol {
inline constexpr double kConstruction = 1e-12;
inline constexpr double kHermitian = 1e-10;
inline constexpr double kIdentity = 1e-9;
inline constexpr double kSolver = 1e-8;
inline constexpr double kState = 1e-8;
/// Second-largest eigenvalue below this marks a state as pure.
inline constexpr double kRankOne = 1e-10;
}  // namespace tol

/// Largest total Hilbert-space dimension any Operator may carry.
inline constexpr int kMaxDimension = 1024;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible dimensions, bad subsystem indices, capacity overflow.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a documented precondition (not a state, not a POVM, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to reach its contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Ordered subsystem dimensions. Factor 0 is the leftmost tensor factor.
class Dims {
 public:
  Dims() = default;
  explicit Dims(std::vector<int> factors);
  Dims(std::initializer_list<int> factors) : Dims(std::vector<int>(factors)) {}

  std::size_t size() const { return factors_.size(); }
  int operator[](std::size_t i) const { return factors_.at(i); }
  const std::vector<int>& factors() const { return factors_; }
  int total() const { return total_; }

  Dims concat(const Dims& other) const;
  /// Factors at the given positions, in the given order.
  Dims select(const std::vector<int>& idx) const;
  /// Row-major stride of each factor.
  std::vector<int> strides() const;

  bool operator==(const Dims& other) const { return factors_ == other.factors_; }
  std::string str() const;

 private:
  std::vector<int> factors_;
  int total_ = 1;
};

/// Square complex matrix tagged with its tensor structure.
class Operator {
 public:
  Operator() = default;
  Operator(Matrix entries, Dims dims);
  /// Single-factor operator.
  explicit Operator(Matrix entries);

  static Operator identity(const Dims& dims);
  static Operator zero(const Dims& dims);

  const Matrix& matrix() const { return m_; }
  const Dims& dims() const { return dims_; }
  int dim() const { return dims_.total(); }

  /// Same entries, reinterpreted with a different factorisation of the same total.
  Operator with_dims(const Dims& dims) const;

  cd trace() const { return m_.trace(); }
  Operator adjoint() const { return Operator(m_.adjoint(), dims_); }
  Operator transpose() const { return Operator(m_.transpose(), dims_); }
  /// (A + A^dagger) / 2.
  Operator hermitian_part() const;

  bool is_hermitian(double tol = tol::kHermitian) const;
  bool is_psd(double tol = tol::kIdentity) const;
  bool is_unit_trace(double tol = tol::kIdentity) const;
  /// Hermitian, PSD and unit trace.
  bool is_state(double tol = tol::kState) const;

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cd s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, cd s) { return a *= s; }
  friend Operator operator*(cd s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b);

 private:
  Matrix m_;
  Dims dims_;
};

/// Unit vector tagged with its tensor structure.
class PureVector {
 public:
  PureVector() = default;
  /// Throws ValueError unless the norm is 1 within tol::kConstruction.
  PureVector(Vector amplitudes, Dims dims);
  /// Rescales to unit norm; throws on the zero vector.
  static PureVector normalized(Vector amplitudes, Dims dims);
  static PureVector basis(const Dims& dims, int index);

  const Vector& amplitudes() const { return v_; }
  const Dims& dims() const { return dims_; }
  int dim() const { return dims_.total(); }

  /// |v><v|
  Operator projector() const;

 private:
  Vector v_;
  Dims dims_;
};

Operator kron(const Operator& a, const Operator& b);
Operator kron(const std::vector<Operator>& factors);
PureVector kron(const PureVector& a, const PureVector& b);

/// Traces out every factor not listed in `keep`; kept factors stay in their original order.
Operator partial_trace(const Operator& op, std::vector<int> keep);

/// Transposes the row/column indices of the listed factors only.
Operator partial_transpose(const Operator& op, const std::vector<int>& subsystems);

/// Reorders tensor factors: factor i of the result is factor order[i] of the input.
Operator permute_subsystems(const Operator& op, const std::vector<int>& order);
PureVector permute_subsystems(const PureVector& v, const std::vector<int>& order);

struct HermitianEig {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // orthonormal columns
};

/// Eigendecomposition of the hermitian part of `op`.
HermitianEig hermitian_eig(const Operator& op);

/// Frobenius-nearest PSD operator (negative eigenvalues clipped to zero).
Operator psd_project(const Operator& op);

/// Principal square root of the PSD part of `op`.
Operator sqrt_psd(const Operator& op);

/// Inverse square root; eigenvalues below `floor` are treated as `floor`.
Operator inv_sqrt_psd(const Operator& op, double floor = 1e-14);

double frobenius_distance(const Operator& a, const Operator& b);
double max_abs_diff(const Operator& a, const Operator& b);

}  // namespace qpm
