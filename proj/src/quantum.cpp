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

#include "qpm/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace qpm {

namespace {

// Splits the leading factors of `dims` whose product is `lead`; returns the rest.
Dims trailing_after(const Dims& dims, int lead, const char* what) {
  int prod = 1;
  std::size_t k = 0;
  while (k < dims.size() && prod < lead) prod *= dims[k++];
  if (prod != lead) {
    throw DimensionError(std::string(what) + ": leading factors of " + dims.str() +
                         " do not multiply to " + std::to_string(lead));
  }
  std::vector<int> rest(dims.factors().begin() + static_cast<long>(k), dims.factors().end());
  if (rest.empty()) rest.push_back(1);
  return Dims(rest);
}

Dims drop_unit(const Dims& dims) {
  std::vector<int> f;
  for (int x : dims.factors()) {
    if (x != 1) f.push_back(x);
  }
  if (f.empty()) f.push_back(1);
  return Dims(f);
}

}  // namespace

// ---------------------------------------------------------------------------
// Povm

Povm::Povm(std::vector<Operator> effects, double tol) : effects_(std::move(effects)) {
  if (effects_.empty()) throw ValueError("Povm: no effects");
  for (const Operator& e : effects_) {
    if (!(e.dims() == effects_.front().dims())) throw DimensionError("Povm: effects differ in dims");
    if (!e.is_psd(tol)) throw ValueError("Povm: effect is not PSD");
  }
  if (completeness_residual() > tol) throw ValueError("Povm: effects do not sum to identity");
}

Povm Povm::unchecked(std::vector<Operator> effects) {
  Povm p;
  p.effects_ = std::move(effects);
  return p;
}

double Povm::completeness_residual() const {
  Matrix s = Matrix::Zero(dims().total(), dims().total());
  for (const Operator& e : effects_) s += e.matrix();
  return (s - Matrix::Identity(s.rows(), s.cols())).norm();
}

// ---------------------------------------------------------------------------
// ChoiState

ChoiState::ChoiState(Operator matrix, Dims in_dims, Dims out_dims, double tol)
    : m_(std::move(matrix)), in_(std::move(in_dims)), out_(std::move(out_dims)) {
  if (m_.dim() != in_.total() * out_.total()) {
    throw DimensionError("ChoiState: matrix size does not match d_out * d_in");
  }
  m_ = m_.with_dims(out_.concat(in_));
  if (!m_.is_psd(tol)) throw ValueError("ChoiState: matrix is not PSD");
  if (marginal_residual() > tol) throw ValueError("ChoiState: tr_out(eta) != 1/d_in");
}

ChoiState ChoiState::unchecked(Operator matrix, Dims in_dims, Dims out_dims) {
  ChoiState c;
  c.in_ = std::move(in_dims);
  c.out_ = std::move(out_dims);
  c.m_ = matrix.with_dims(c.out_.concat(c.in_));
  return c;
}

double ChoiState::marginal_residual() const {
  const Operator flat = m_.with_dims(Dims{d_out(), d_in()});
  const Matrix marg = partial_trace(flat, {1}).matrix();
  return (marg - Matrix::Identity(d_in(), d_in()) / static_cast<double>(d_in()))
      .cwiseAbs()
      .maxCoeff();
}

// ---------------------------------------------------------------------------
// Weyl-Heisenberg

WeylOps weyl_ops(int d) {
  if (d < 1) throw ValueError("weyl_ops: d must be positive");
  Matrix x = Matrix::Zero(d, d);
  Matrix z = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    x((j + 1) % d, j) = 1.0;
    z(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * j / d);
  }
  return {d, Operator(x), Operator(z)};
}

Operator weyl(int d, int i, int j) {
  if (d < 1) throw ValueError("weyl: d must be positive");
  if (i < 0 || i >= d || j < 0 || j >= d) throw ValueError("weyl: exponents must lie in [0, d)");
  const int a = i;
  const int b = j;
  // (X^a Z^b)|k> = w^{bk} |k+a>
  Matrix m = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    m((k + a) % d, k) = std::polar(1.0, 2.0 * std::numbers::pi * ((b * k) % d) / d);
  }
  return Operator(m);
}

PureVector max_entangled(int d) {
  if (d < 2) throw ValueError("max_entangled: d must be >= 2");
  Vector v = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  return PureVector::normalized(std::move(v), Dims{d, d});
}

PureVector bell_vector(int d, int u, int v) {
  const Matrix u_op = weyl(d, u, v).matrix();
  Matrix full = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) full.block(i * d, j * d, d, d) = u_op(i, j) * Matrix::Identity(d, d);
  }
  return PureVector::normalized(full * max_entangled(d).amplitudes(), Dims{d, d});
}

Povm bell_basis(int d) {
  if (d < 2) throw ValueError("bell_basis: d must be >= 2");
  std::vector<Operator> effects;
  for (int u = 0; u < d; ++u) {
    for (int v = 0; v < d; ++v) effects.push_back(bell_vector(d, u, v).projector());
  }
  return Povm(std::move(effects));
}

Operator weyl_twirl(const Operator& rho) {
  const int d = rho.dim();
  Matrix acc = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Matrix v = weyl(d, i, j).matrix();
      acc += v * rho.matrix() * v.adjoint();
    }
  }
  return Operator(acc / static_cast<double>(d * d), rho.dims());
}

// ---------------------------------------------------------------------------
// Channels

ChoiState choi_from_kraus(const std::vector<Matrix>& kraus, const Dims& in_dims,
                          const Dims& out_dims) {
  const int din = in_dims.total();
  const int dout = out_dims.total();
  Matrix tp = Matrix::Zero(din, din);
  for (const Matrix& k : kraus) {
    if (k.rows() != dout || k.cols() != din) throw DimensionError("choi_from_kraus: Kraus shape");
    tp += k.adjoint() * k;
  }
  if ((tp - Matrix::Identity(din, din)).cwiseAbs().maxCoeff() > tol::kIdentity) {
    throw ValueError("choi_from_kraus: Kraus set is not trace preserving");
  }
  // eta = (1/d_in) sum_k sum_{ij} K|j><i|K^dag (x) |j><i|
  Matrix eta = Matrix::Zero(dout * din, dout * din);
  for (const Matrix& k : kraus) {
    // vec with index (o, j) -> K(o, j)
    Vector kv(dout * din);
    for (int o = 0; o < dout; ++o) {
      for (int j = 0; j < din; ++j) kv(o * din + j) = k(o, j);
    }
    eta += kv * kv.adjoint();
  }
  eta /= static_cast<double>(din);
  return ChoiState(Operator(eta, out_dims.concat(in_dims)), in_dims, out_dims);
}

std::vector<Matrix> kraus_from_choi(const ChoiState& eta, double cutoff) {
  const int din = eta.d_in();
  const int dout = eta.d_out();
  const HermitianEig e = hermitian_eig(eta.matrix());
  std::vector<Matrix> out;
  for (int n = static_cast<int>(e.values.size()) - 1; n >= 0; --n) {
    const double w = e.values(n) * din;
    if (w <= cutoff) continue;
    Matrix k(dout, din);
    for (int o = 0; o < dout; ++o) {
      for (int j = 0; j < din; ++j) k(o, j) = std::sqrt(w) * e.vectors(o * din + j, n);
    }
    out.push_back(std::move(k));
  }
  return out;
}

ChoiState unitary_choi(const Matrix& u, const Dims& dims) { return choi_from_kraus({u}, dims, dims); }

ChoiState identity_choi(const Dims& dims) {
  return unitary_choi(Matrix::Identity(dims.total(), dims.total()), dims);
}

ChoiState depolarizing_choi(const Dims& in_dims, const Dims& out_dims) {
  const int n = in_dims.total() * out_dims.total();
  return ChoiState(Operator(Matrix::Identity(n, n) / static_cast<double>(n), out_dims.concat(in_dims)),
                   in_dims, out_dims);
}

ChoiState partial_trace_choi(const Dims& in_dims, const std::vector<int>& keep_in) {
  std::vector<int> keep = keep_in;
  std::sort(keep.begin(), keep.end());
  std::vector<int> traced;
  for (int k = 0; k < static_cast<int>(in_dims.size()); ++k) {
    if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);
  }
  const Dims out_dims = keep.empty() ? Dims{1} : in_dims.select(keep);
  const Dims tr_dims = traced.empty() ? Dims{1} : in_dims.select(traced);
  const std::vector<int> strides = in_dims.strides();
  std::vector<Matrix> kraus;
  std::vector<int> kd(keep.size()), td(traced.size());
  for (int t = 0; t < tr_dims.total(); ++t) {
    Matrix k = Matrix::Zero(out_dims.total(), in_dims.total());
    int rem = t;
    for (int q = static_cast<int>(traced.size()) - 1; q >= 0; --q) {
      td[q] = rem % in_dims[traced[q]];
      rem /= in_dims[traced[q]];
    }
    for (int o = 0; o < out_dims.total(); ++o) {
      int r = o;
      for (int q = static_cast<int>(keep.size()) - 1; q >= 0; --q) {
        kd[q] = r % in_dims[keep[q]];
        r /= in_dims[keep[q]];
      }
      int full = 0;
      for (std::size_t q = 0; q < keep.size(); ++q) full += kd[q] * strides[keep[q]];
      for (std::size_t q = 0; q < traced.size(); ++q) full += td[q] * strides[traced[q]];
      k(o, full) = 1.0;
    }
    kraus.push_back(std::move(k));
  }
  return choi_from_kraus(kraus, in_dims, out_dims);
}

Operator apply_choi(const ChoiState& eta, const Operator& x) {
  if (x.dim() != eta.d_in()) throw DimensionError("apply_choi: input dimension mismatch");
  return apply_choi_leading(eta, x.with_dims(eta.in_dims())).with_dims(eta.out_dims());
}

Operator apply_choi_leading(const ChoiState& eta, const Operator& x) {
  const int din = eta.d_in();
  const int dout = eta.d_out();
  const Dims rest = trailing_after(x.dims(), din, "apply_choi_leading");
  const int nr = rest.total();
  const Matrix& e = eta.matrix().matrix();
  const Matrix& xm = x.matrix();
  // out[(o,r),(o',r')] = d_in sum_{i,j} x[(j,r),(i,r')] eta[(o,j),(o',i)]
  Matrix out = Matrix::Zero(dout * nr, dout * nr);
  for (int o = 0; o < dout; ++o) {
    for (int op = 0; op < dout; ++op) {
      auto blk = out.block(o * nr, op * nr, nr, nr);
      for (int j = 0; j < din; ++j) {
        for (int i = 0; i < din; ++i) {
          const cd w = e(o * din + j, op * din + i);
          if (w == cd(0.0)) continue;
          blk += w * xm.block(j * nr, i * nr, nr, nr);
        }
      }
    }
  }
  out *= static_cast<double>(din);
  return Operator(std::move(out), drop_unit(eta.out_dims().concat(rest)));
}

Operator apply_choi_adjoint(const ChoiState& eta, const Operator& w) {
  const int din = eta.d_in();
  const int dout = eta.d_out();
  if (w.dim() != dout) throw DimensionError("apply_choi_adjoint: output dimension mismatch");
  const Matrix& e = eta.matrix().matrix();
  // L^dag(w)[i,j] = d_in sum_{o,o'} w[o',o] eta[(o,j),(o',i)]
  Matrix out = Matrix::Zero(din, din);
  for (int o = 0; o < dout; ++o) {
    for (int op = 0; op < dout; ++op) {
      const cd wv = w.matrix()(op, o);
      if (wv == cd(0.0)) continue;
      for (int i = 0; i < din; ++i) {
        for (int j = 0; j < din; ++j) out(i, j) += wv * e(o * din + j, op * din + i);
      }
    }
  }
  return Operator(out * static_cast<double>(din), eta.in_dims());
}

Operator choi_gradient(const Operator& z, const Operator& w, const Dims& in_dims,
                       const Dims& out_dims) {
  const int din = in_dims.total();
  const int dout = out_dims.total();
  if (z.dim() % din != 0) throw DimensionError("choi_gradient: z does not start with the input");
  const int nr = z.dim() / din;
  if (w.dim() != dout * nr) throw DimensionError("choi_gradient: w does not match out (x) rest");
  const Matrix& zm = z.matrix();
  const Matrix& wm = w.matrix();
  // G[(o',i),(o,j)] = d_in sum_{r,r'} w[(o',r'),(o,r)] z[(j,r),(i,r')]
  //                = d_in tr( w_blk(o',o) * z_blk(j,i) )  with blocks over rest
  Matrix g = Matrix::Zero(dout * din, dout * din);
  for (int op = 0; op < dout; ++op) {
    for (int o = 0; o < dout; ++o) {
      const auto wb = wm.block(op * nr, o * nr, nr, nr);
      for (int i = 0; i < din; ++i) {
        for (int j = 0; j < din; ++j) {
          const auto zb = zm.block(j * nr, i * nr, nr, nr);
          g(op * din + i, o * din + j) = (wb.array() * zb.transpose().array()).sum();
        }
      }
    }
  }
  g *= static_cast<double>(din);
  return Operator(0.5 * (g + g.adjoint()), out_dims.concat(in_dims));
}

ChoiState repair_choi(const Operator& eta, const Dims& in_dims, const Dims& out_dims) {
  const int din = in_dims.total();
  const int dout = out_dims.total();
  const Operator psd = psd_project(eta.with_dims(Dims{dout, din}));
  const Operator marg = partial_trace(psd, {1}) * cd(static_cast<double>(din));
  const Operator s = kron(Operator::identity(Dims{dout}), inv_sqrt_psd(marg));
  const Operator fixed = (s * psd * s).hermitian_part();
  return ChoiState::unchecked(fixed, in_dims, out_dims);
}

Povm repair_povm(const std::vector<Operator>& effects) {
  Operator sum = Operator::zero(effects.front().dims());
  std::vector<Operator> psd;
  psd.reserve(effects.size());
  for (const Operator& e : effects) {
    psd.push_back(psd_project(e));
    sum += psd.back();
  }
  const Operator s = inv_sqrt_psd(sum);
  for (Operator& e : psd) e = (s * e * s).hermitian_part();
  return Povm::unchecked(std::move(psd));
}

std::vector<Matrix> random_kraus(int d_in, int d_out, int n_kraus, Rng& rng) {
  if (d_out * n_kraus < d_in) throw ValueError("random_kraus: too few Kraus operators");
  const Matrix u = haar_unitary(d_out * n_kraus, rng);
  std::vector<Matrix> out;
  for (int k = 0; k < n_kraus; ++k) out.push_back(u.block(k * d_out, 0, d_out, d_in));
  return out;
}

ChoiState random_choi(const Dims& in_dims, const Dims& out_dims, Rng& rng) {
  const int n = in_dims.total() * out_dims.total();
  const Operator raw = random_density(Dims{n}, n, rng);
  return repair_choi(raw, in_dims, out_dims);
}

Povm random_projective_povm(const Dims& dims, int outcomes, Rng& rng) {
  const int n = dims.total();
  const Matrix u = haar_unitary(n, rng);
  std::vector<Operator> effects;
  for (int c = 0; c < outcomes; ++c) {
    Matrix e = Matrix::Zero(n, n);
    // basis vectors c, c + outcomes, ... go to effect c
    for (int k = c; k < n; k += outcomes) e += u.col(k) * u.col(k).adjoint();
    effects.emplace_back(e, dims);
  }
  return Povm::unchecked(std::move(effects));
}

// ---------------------------------------------------------------------------
// Fidelity

double fidelity(const Operator& rho, const Operator& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("fidelity: dimension mismatch");
  if (!rho.is_state(tol::kState) || !sigma.is_state(tol::kState)) {
    throw ValueError("fidelity: inputs must be unit-trace PSD operators");
  }
  auto pure_vector = [](const Operator& s, Vector& out) {
    const HermitianEig e = hermitian_eig(s);
    const int n = static_cast<int>(e.values.size());
    if (n == 1 || e.values(n - 2) < tol::kRankOne) {
      out = e.vectors.col(n - 1);
      return true;
    }
    return false;
  };
  Vector v;
  double f = 0.0;
  if (pure_vector(sigma, v)) {
    f = (v.adjoint() * rho.matrix() * v)(0, 0).real();
  } else if (pure_vector(rho, v)) {
    f = (v.adjoint() * sigma.matrix() * v)(0, 0).real();
  } else {
    // restrict to the support of rho and drop round-off eigenvalues, whose square
    // roots would otherwise contribute O(1e-8) noise
    const HermitianEig er = hermitian_eig(rho);
    const double cut = 1e-13 * std::max(1.0, er.values.maxCoeff());
    std::vector<int> support;
    for (int i = 0; i < er.values.size(); ++i) {
      if (er.values(i) > cut) support.push_back(i);
    }
    Matrix half(rho.dim(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
      half.col(static_cast<Eigen::Index>(k)) = er.vectors.col(support[k]) * std::sqrt(er.values(support[k]));
    }
    const Matrix inner = half.adjoint() * sigma.matrix() * half;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    double t = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()(i) > cut) t += std::sqrt(es.eigenvalues()(i));
    }
    f = t * t;
  }
  return std::clamp(f, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Designs

namespace {

// Weyl-Heisenberg SIC fiducials from tools/sic_fiducial_search.py.
const std::map<int, std::vector<cd>>& fiducials() {
  static const std::map<int, std::vector<cd>> table = {
      {2, {{0.88807383397711537, 0.0}, {0.3250575836718681, 0.32505758367186799}}},
      {3,
       {{0.44357594698364439, 0.0},
        {-0.18593520434915456, -0.32204923028058086},
        {0.40772318600945251, -0.70619726416008444}}},
      {4,
       {{0.75028485585320659, 0.0},
        {-0.19915350650405092, 0.028543443725732625},
        {-0.29802920318270115, -0.26806347546354786},
        {0.068909968959496928, 0.48079909639623808}}},
  };
  return table;
}

Design2 build_sic(int d) {
  const auto it = fiducials().find(d);
  if (it == fiducials().end()) {
    throw ValueError("sic_povm: unsupported dimension " + std::to_string(d) + " (supported: 2, 3, 4)");
  }
  Vector fid(d);
  for (int i = 0; i < d; ++i) fid(i) = it->second[i];
  const PureVector base = PureVector::normalized(fid, Dims{d});
  Design2 design;
  design.d = d;
  for (int k0 = 0; k0 < d; ++k0) {
    for (int k1 = 0; k1 < d; ++k1) {
      design.vectors.push_back(
          PureVector::normalized(weyl(d, k0, k1).matrix() * base.amplitudes(), Dims{d}));
    }
  }
  if (equiangularity_deviation(design) > 1e-8 || second_moment_residual(design) > 1e-8) {
    throw NumericalError("sic_povm: frozen fiducial failed verification for d=" + std::to_string(d));
  }
  return design;
}

}  // namespace

const Design2& sic_povm(int d) {
  static std::mutex mu;
  static std::map<int, Design2> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, build_sic(d)).first;
  return it->second;
}

double equiangularity_deviation(const Design2& design) {
  const double target = 1.0 / (design.d + 1);
  double worst = 0.0;
  for (std::size_t j = 0; j < design.vectors.size(); ++j) {
    for (std::size_t k = j + 1; k < design.vectors.size(); ++k) {
      const double ov = std::norm(design.vectors[j].amplitudes().dot(design.vectors[k].amplitudes()));
      worst = std::max(worst, std::abs(ov - target));
    }
  }
  return worst;
}

Matrix symmetric_projector(int d) {
  Matrix p = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      p(i * d + j, i * d + j) += 0.5;
      p(j * d + i, i * d + j) += 0.5;
    }
  }
  return p;
}

double second_moment_residual(const Design2& design) {
  const int d = design.d;
  Matrix m = Matrix::Zero(d * d, d * d);
  for (const PureVector& v : design.vectors) {
    const Operator p = v.projector();
    m += kron(p, p).matrix();
  }
  m *= design.weight();
  const Matrix target = 2.0 * symmetric_projector(d) / static_cast<double>(d * (d + 1));
  return (m - target).cwiseAbs().maxCoeff();
}

std::vector<std::vector<PureVector>> product_design(const std::vector<Design2>& designs) {
  if (designs.empty()) throw ValueError("product_design: empty list");
  long long total = 1;
  for (const Design2& d : designs) total *= static_cast<long long>(d.vectors.size());
  if (total > 1 << 16) throw DimensionError("product_design: grid too large");
  std::vector<std::vector<PureVector>> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> idx(designs.size(), 0);
  for (long long n = 0; n < total; ++n) {
    std::vector<PureVector> tuple;
    for (std::size_t k = 0; k < designs.size(); ++k) tuple.push_back(designs[k].vectors[idx[k]]);
    out.push_back(std::move(tuple));
    for (int k = static_cast<int>(designs.size()) - 1; k >= 0; --k) {
      if (++idx[k] < designs[k].vectors.size()) break;
      idx[k] = 0;
    }
  }
  return out;
}

}  // namespace qpm
