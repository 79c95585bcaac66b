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

#include <cmath>

#include "gtest/gtest.h"
#include "qpm/random.hpp"

using namespace qpm;

TEST(hermitian_coords, trace_inner_product) {
  Rng rng(1);
  for (int n = 1; n <= 6; ++n) {
    const Matrix a = random_hermitian(n, rng);
    const Matrix b = random_hermitian(n, rng);
    EXPECT_NEAR(hermitian_to_coords(a).dot(hermitian_to_coords(b)), (a * b).trace().real(), 1e-12);
    EXPECT_LT((coords_to_hermitian(hermitian_to_coords(a), n) - a).cwiseAbs().maxCoeff(), 1e-14);
    for (int p = 0; p < n * n; ++p) {
      EXPECT_NEAR((hermitian_basis(n, p) * a).trace().real(), hermitian_to_coords(a)(p), 1e-12);
    }
  }
}

TEST(sdp_solve, trace_one) {
  SdpProblem p;
  const int x = p.add_block("X", 2);
  p.set_objective(x, Matrix::Identity(2, 2));
  p.add_constraint({{x, Matrix::Identity(2, 2)}}, {}, 1.0);
  const SdpSolution s = p.solve();
  EXPECT_EQ(s.status, SdpStatus::kOptimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-8);
}

TEST(sdp_solve, top_eigenvalue) {
  SdpProblem p;
  const int x = p.add_block("X", 2);
  Matrix c = Matrix::Zero(2, 2);
  c(0, 0) = 3.0;
  c(1, 1) = 1.0;
  p.set_objective(x, c);
  p.add_constraint({{x, Matrix::Identity(2, 2)}}, {}, 1.0);
  const SdpSolution s = p.solve();
  EXPECT_EQ(s.status, SdpStatus::kOptimal);
  EXPECT_NEAR(s.objective, 3.0, 1e-7);
  EXPECT_NEAR(std::abs(s.blocks[0](0, 0)), 1.0, 1e-6);
  EXPECT_LT(s.primal_residual, 1e-8);
}

TEST(sdp_solve, badly_scaled_objective_stays_finite) {
  // the step size saturates at its upper clamp here
  SdpProblem p;
  const int x = p.add_block("X", 3);
  Matrix c = Matrix::Zero(3, 3);
  c(0, 0) = 1e7;
  c(1, 1) = 2.0;
  p.set_objective(x, c);
  p.add_constraint({{x, Matrix::Identity(3, 3)}}, {}, 1.0);
  const SdpSolution s = p.solve();
  EXPECT_EQ(s.status, SdpStatus::kOptimal);
  EXPECT_TRUE(std::isfinite(s.objective));
  EXPECT_NEAR(s.objective / 1e7, 1.0, 1e-6);
}

TEST(sdp_solve, free_scalar_with_slacks) {
  // maximize t s.t. t + s_i = v_i, s_i >= 0  ->  t = min v
  SdpProblem p;
  const int t = p.add_free_scalar("t");
  p.set_scalar_objective(t, 1.0);
  const double v[3] = {0.7, 0.3, 0.9};
  for (double vi : v) {
    const int s = p.add_block("slack", 1);
    p.add_constraint({{s, Matrix::Identity(1, 1)}}, {{t, 1.0}}, vi);
  }
  const SdpSolution s = p.solve();
  EXPECT_EQ(s.status, SdpStatus::kOptimal);
  EXPECT_NEAR(s.scalars[0], 0.3, 1e-7);
}

TEST(sdp_solve, partial_trace_constraint_matches_dense_form) {
  Rng rng(5);
  const int dout = 2;
  const int din = 3;
  const Matrix target = Matrix::Identity(din, din) / static_cast<double>(din);
  SdpProblem helper;
  const int b = helper.add_block("eta", dout * din);
  helper.add_partial_trace_equals(b, dout, din, target);
  // a Choi state of a random channel satisfies the constraints; compare the maximal value
  // against an equivalent formulation with dense coefficients
  SdpProblem dense;
  const int bd = dense.add_block("eta", dout * din);
  for (int p = 0; p < din * din; ++p) {
    const Matrix e = hermitian_basis(din, p);
    Matrix big = Matrix::Zero(dout * din, dout * din);
    for (int o = 0; o < dout; ++o) big.block(o * din, o * din, din, din) = e;
    dense.add_constraint({{bd, big}}, {}, (e * target).trace().real());
  }
  const Matrix c = random_hermitian(dout * din, rng);
  helper.set_objective(b, c);
  dense.set_objective(bd, c);
  const SdpSolution s1 = helper.solve();
  const SdpSolution s2 = dense.solve();
  EXPECT_EQ(s1.status, SdpStatus::kOptimal);
  EXPECT_NEAR(s1.objective, s2.objective, 1e-6);
}

TEST(sdp_solve, detects_inconsistent_constraints) {
  SdpProblem p;
  const int x = p.add_block("X", 2);
  p.add_constraint({{x, Matrix::Identity(2, 2)}}, {}, 1.0);
  p.add_constraint({{x, Matrix::Identity(2, 2)}}, {}, 2.0);
  EXPECT_EQ(p.solve().status, SdpStatus::kInfeasible);
}

TEST(sdp_solve, detects_empty_cone_intersection) {
  SdpProblem p;
  const int x = p.add_block("X", 2);
  p.add_constraint({{x, Matrix::Identity(2, 2)}}, {}, -1.0);
  SdpOptions opt;
  opt.max_iterations = 2000;
  EXPECT_EQ(p.solve(opt).status, SdpStatus::kInfeasible);
}

namespace {

// Planted primal-dual pair: X* and S* PSD with orthogonal ranges, b = A(X*),
// C = A^T(y) - S*. The optimum is then b.y = <C, X*>.
struct Planted {
  SdpProblem problem;
  double optimum = 0.0;
};

Planted plant(Rng& rng, const std::vector<int>& dims, int constraints) {
  Planted out;
  std::vector<Matrix> xs, ss;
  for (std::size_t b = 0; b < dims.size(); ++b) {
    const int n = dims[b];
    out.problem.add_block("X" + std::to_string(b), n);
    const Matrix u = haar_unitary(n, rng);
    const int rank = 1 + static_cast<int>(rng.below(std::max(1, n - 1)));
    Matrix x = Matrix::Zero(n, n);
    Matrix s = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      const Vector col = u.col(k);
      if (k < rank) {
        x += (0.5 + rng.uniform()) * col * col.adjoint();
      } else {
        s += (0.5 + rng.uniform()) * col * col.adjoint();
      }
    }
    xs.push_back(x);
    ss.push_back(s);
  }
  std::vector<Matrix> c(dims.size());
  for (std::size_t b = 0; b < dims.size(); ++b) c[b] = -ss[b];
  for (int i = 0; i < constraints; ++i) {
    std::vector<SdpProblem::Term> terms;
    double rhs = 0.0;
    const double y = rng.normal();
    for (std::size_t b = 0; b < dims.size(); ++b) {
      const Matrix a = random_hermitian(dims[b], rng);
      rhs += (a * xs[b]).trace().real();
      c[b] += y * a;
      terms.push_back({static_cast<int>(b), a});
    }
    out.problem.add_constraint(terms, {}, rhs);
    out.optimum += y * rhs;
  }
  for (std::size_t b = 0; b < dims.size(); ++b) {
    out.problem.set_objective(static_cast<int>(b), 0.5 * (c[b] + c[b].adjoint()));
  }
  return out;
}

}  // namespace

TEST(sdp_solve, planted_three_block_instance) {
  Rng rng(100);
  Planted inst = plant(rng, {3, 4, 2}, 8);
  const SdpSolution s = inst.problem.solve();
  EXPECT_EQ(s.status, SdpStatus::kOptimal);
  EXPECT_NEAR(s.objective, inst.optimum, 1e-6 * std::max(1.0, std::abs(inst.optimum)));
}

TEST(sdp_solve, planted_instances_property) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> dims;
    const int blocks = 1 + static_cast<int>(rng.below(3));
    int total = 0;
    for (int b = 0; b < blocks; ++b) {
      const int n = trial % 10 == 0 ? 32 : 2 + static_cast<int>(rng.below(10));
      dims.push_back(n);
      total += n * n;
    }
    const int m = 1 + static_cast<int>(rng.below(std::min(total / 2, 40)));
    Planted inst = plant(rng, dims, m);
    const SdpSolution s = inst.problem.solve();
    ASSERT_EQ(s.status, SdpStatus::kOptimal) << "trial " << trial;
    EXPECT_NEAR(s.objective, inst.optimum, 1e-6 * std::max(1.0, std::abs(inst.optimum)))
        << "trial " << trial;
    EXPECT_LT(s.primal_residual, 1e-7);
  }
}

TEST(sdp_solve, warm_start_fixed_point) {
  Rng rng(7);
  Planted inst = plant(rng, {4, 4}, 6);
  const SdpSolution first = inst.problem.solve();
  SdpOptions opt;
  opt.warm_start = &first.warm;
  const SdpSolution again = inst.problem.solve(opt);
  EXPECT_EQ(again.status, SdpStatus::kOptimal);
  EXPECT_LE(again.iterations, 20);
  EXPECT_LT(std::abs(again.objective - first.objective), 1e-7);
}
