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

#pragma once

// Dense complex linear algebra for N-qubit density-matrix work.
//
// Basis convention: a bit string b1 b2 ... bN labels basis index
// sum_i b_i 2^(N-i), so qubit 0 (the first qubit) is the most significant bit.
// sigma_z |0> = +|0>, i.e. bit 0 carries spin +1.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qanneal {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr int kMaxQubits = 8;
// Largest |exponent| accepted before exp() is considered an overflow.
inline constexpr double kMaxExponent = 700.0;

class QubitCount {
 public:
  explicit QubitCount(int n);
  int value() const { return n_; }
  std::size_t dim() const { return std::size_t{1} << n_; }
  int pairs() const { return n_ * (n_ - 1) / 2; }
  friend bool operator==(QubitCount a, QubitCount b) { return a.n_ == b.n_; }

 private:
  int n_;
};

enum class PauliAxis { X, Z };

// sigma_axis acting on `site`, identity elsewhere.
ComplexMatrix embed_pauli(PauliAxis axis, int site, QubitCount n);

// Diagonal of sigma_z(a) sigma_z(b); also the diagonal of embed_pauli(Z, a) when a == b.
Eigen::VectorXd zz_diagonal(int a, int b, QubitCount n);
Eigen::VectorXd z_diagonal(int site, QubitCount n);

// max_ij |M_ij - conj(M_ji)|
double hermiticity_defect(const ComplexMatrix& m);
void require_hermitian(const ComplexMatrix& m, const char* who, double tol = 1e-10);

struct ExpmReport {
  bool clipped = false;
  double max_exponent = 0.0;  // largest |scale * lambda| seen
};

// Spectral decomposition M = V diag(lambda) V^dagger of a Hermitian matrix.
class HermitianEigen {
 public:
  explicit HermitianEigen(const ComplexMatrix& m);

  const Eigen::VectorXd& values() const { return values_; }
  const ComplexMatrix& vectors() const { return vectors_; }
  Eigen::Index dim() const { return values_.size(); }
  double max_abs_eigenvalue() const;

  // V diag(exp(scale * lambda)) V^dagger. A zero scale returns the identity exactly.
  ComplexMatrix exp(Complex scale) const;

  // Divided differences of f(x) = exp(scale * x) on the spectrum:
  //   Phi_ij = (f(l_i) - f(l_j)) / (l_i - l_j),  Phi_ii = f'(l_i).
  ComplexMatrix divided_differences(Complex scale) const;

  // Directional derivative of exp(scale * M) along dM.
  ComplexMatrix exp_derivative(Complex scale, const ComplexMatrix& dm) const;

  // Adjoint of exp_derivative under <X, Y> = Re tr(X^dagger Y): returns M_bar
  // such that Re<X_bar, D exp(scale M)[dM]> = Re<M_bar, dM> for all dM.
  ComplexMatrix exp_derivative_adjoint(Complex scale, const ComplexMatrix& cotangent) const;

 private:
  Eigen::VectorXd values_;
  ComplexMatrix vectors_;
};

// exp(scale * M) for Hermitian M. Exponents beyond +-kMaxExponent are clipped
// and reported through `report`.
ComplexMatrix herm_expm(const ComplexMatrix& m, double scale, ExpmReport* report = nullptr);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

bool all_finite(const ComplexMatrix& m);

}  // namespace qanneal
