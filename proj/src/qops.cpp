// Copyright 2026 The qanneal Authors
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

#include "qanneal/qops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qanneal/errors.hpp"

namespace qanneal {

namespace {

// (exp(x) - 1) / x, accurate near zero.
Complex expm1_over_x(Complex x) {
  if (std::abs(x) < 1e-3) {
    return 1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
  }
  return (std::exp(x) - 1.0) / x;
}

}  // namespace

QubitCount::QubitCount(int n) : n_(n) {
  if (n < 1 || n > kMaxQubits) {
    throw ArgumentError("qubit count " + std::to_string(n) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
  }
}

ComplexMatrix embed_pauli(PauliAxis axis, int site, QubitCount n) {
  if (site < 0 || site >= n.value()) {
    throw ArgumentError("embed_pauli: site " + std::to_string(site) + " out of range for " +
                        std::to_string(n.value()) + " qubits");
  }
  const auto dim = static_cast<Eigen::Index>(n.dim());
  const Eigen::Index mask = Eigen::Index{1} << (n.value() - 1 - site);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (axis == PauliAxis::Z) {
      m(i, i) = (i & mask) ? -1.0 : 1.0;
    } else {
      m(i ^ mask, i) = 1.0;
    }
  }
  return m;
}

Eigen::VectorXd z_diagonal(int site, QubitCount n) {
  if (site < 0 || site >= n.value()) {
    throw ArgumentError("z_diagonal: site out of range");
  }
  const auto dim = static_cast<Eigen::Index>(n.dim());
  const Eigen::Index mask = Eigen::Index{1} << (n.value() - 1 - site);
  Eigen::VectorXd d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d(i) = (i & mask) ? -1.0 : 1.0;
  return d;
}

Eigen::VectorXd zz_diagonal(int a, int b, QubitCount n) {
  return z_diagonal(a, n).cwiseProduct(z_diagonal(b, n));
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_hermitian(const ComplexMatrix& m, const char* who, double tol) {
  const double defect = hermiticity_defect(m);
  if (!(defect <= tol)) {
    throw ContractError(std::string(who) + ": matrix is not Hermitian (defect " +
                        std::to_string(defect) + ")");
  }
}

HermitianEigen::HermitianEigen(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw ContractError("eigendecomposition failed to converge");
  }
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

double HermitianEigen::max_abs_eigenvalue() const {
  return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff();
}

ComplexMatrix HermitianEigen::exp(Complex scale) const {
  const Eigen::Index d = dim();
  if (scale == Complex{0.0, 0.0}) return ComplexMatrix::Identity(d, d);
  ComplexVector e(d);
  for (Eigen::Index i = 0; i < d; ++i) e(i) = std::exp(scale * values_(i));
  return vectors_ * e.asDiagonal() * vectors_.adjoint();
}

ComplexMatrix HermitianEigen::divided_differences(Complex scale) const {
  const Eigen::Index d = dim();
  ComplexMatrix phi = ComplexMatrix::Zero(d, d);
  if (scale == Complex{0.0, 0.0}) return phi;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j; i < d; ++i) {
      const double gap = values_(i) - values_(j);
      const Complex x = scale * gap;
      Complex v;
      if (std::abs(x) < 1e-3) {
        v = std::exp(scale * values_(j)) * scale * expm1_over_x(x);
      } else {
        v = (std::exp(scale * values_(i)) - std::exp(scale * values_(j))) / gap;
      }
      phi(i, j) = v;
      phi(j, i) = v;
    }
  }
  return phi;
}

ComplexMatrix HermitianEigen::exp_derivative(Complex scale, const ComplexMatrix& dm) const {
  const ComplexMatrix inner = vectors_.adjoint() * dm * vectors_;
  return vectors_ * divided_differences(scale).cwiseProduct(inner) * vectors_.adjoint();
}

ComplexMatrix HermitianEigen::exp_derivative_adjoint(Complex scale,
                                                     const ComplexMatrix& cotangent) const {
  const ComplexMatrix inner = vectors_.adjoint() * cotangent * vectors_;
  return vectors_ * divided_differences(scale).conjugate().cwiseProduct(inner) *
         vectors_.adjoint();
}

ComplexMatrix herm_expm(const ComplexMatrix& m, double scale, ExpmReport* report) {
  if (m.rows() != m.cols()) throw ArgumentError("herm_expm: matrix is not square");
  require_hermitian(m, "herm_expm");
  const Eigen::Index d = m.rows();
  if (scale == 0.0) {
    if (report) *report = ExpmReport{};
    return ComplexMatrix::Identity(d, d);
  }
  const HermitianEigen eig(m);
  ExpmReport local;
  ComplexVector e(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double x = scale * eig.values()(i);
    local.max_exponent = std::max(local.max_exponent, std::abs(x));
    if (std::abs(x) > kMaxExponent) {
      local.clipped = true;
      x = std::copysign(kMaxExponent, x);
    }
    e(i) = std::exp(x);
  }
  if (report) *report = local;
  return eig.vectors() * e.asDiagonal() * eig.vectors().adjoint();
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw ArgumentError("commutator: dimension mismatch");
  }
  return a * b - b * a;
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError("frobenius_distance: dimension mismatch");
  }
  return (a - b).norm();
}

bool all_finite(const ComplexMatrix& m) { return m.allFinite(); }

}  // namespace qanneal
