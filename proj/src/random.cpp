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

#include "qpm/random.hpp"

#include <cmath>
#include <numbers>

namespace qpm {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix haar_unitary(int n, Rng& rng) {
  Matrix g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = rng.complex_normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

PureVector haar_state(const Dims& dims, Rng& rng) {
  Vector v(dims.total());
  for (int i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
  return PureVector::normalized(std::move(v), dims);
}

PureVector haar_product_state(const Dims& dims, Rng& rng) {
  PureVector out = haar_state(Dims{dims[0]}, rng);
  for (std::size_t k = 1; k < dims.size(); ++k) out = kron(out, haar_state(Dims{dims[k]}, rng));
  return out;
}

Operator random_density(const Dims& dims, int rank, Rng& rng) {
  const int n = dims.total();
  Matrix g(n, rank);
  for (int j = 0; j < rank; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = rng.complex_normal();
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return Operator(std::move(rho), dims);
}

Matrix random_hermitian(int n, Rng& rng) {
  Matrix g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = rng.complex_normal();
  }
  return 0.5 * (g + g.adjoint());
}

}  // namespace qpm
