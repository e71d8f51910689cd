//
// Copyright 2026 The dpspectra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Dense symmetric-matrix primitives shared by every other module:
// eigendecomposition, Schatten norms, orthonormal factors and subspace
// distances.

#ifndef DPSPECTRA_MATRIX_CORE_HPP_
#define DPSPECTRA_MATRIX_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "dpspectra/errors.hpp"
#include "dpspectra/random.hpp"

namespace dpspectra {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A finite, exactly symmetric p x p matrix. Construction mirrors one
// triangle onto the other, so entries(i, j) == entries(j, i) bit for bit.
class SymmetricMatrix {
 public:
  enum class Source { kUpper, kLower, kAverage };

  SymmetricMatrix() = default;

  // Symmetrizes `m` by averaging it with its transpose.
  explicit SymmetricMatrix(const Matrix& m) : SymmetricMatrix(m, Source::kAverage) {}

  SymmetricMatrix(const Matrix& m, Source source) {
    if (m.rows() != m.cols()) {
      throw DimensionError("SymmetricMatrix: matrix is " +
                           std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected square");
    }
    if (!m.allFinite()) throw DomainError("SymmetricMatrix: non-finite entry");
    const Eigen::Index p = m.rows();
    m_.resize(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        double v = 0.0;
        switch (source) {
          case Source::kUpper: v = m(i, j); break;
          case Source::kLower: v = m(j, i); break;
          case Source::kAverage: v = 0.5 * (m(i, j) + m(j, i)); break;
        }
        m_(i, j) = v;
        m_(j, i) = v;
      }
    }
  }

  static SymmetricMatrix Zero(Eigen::Index p) {
    return SymmetricMatrix(Matrix::Zero(p, p), Source::kUpper);
  }
  static SymmetricMatrix Identity(Eigen::Index p) {
    return SymmetricMatrix(Matrix::Identity(p, p), Source::kUpper);
  }
  static SymmetricMatrix Diagonal(const Vector& d) {
    return SymmetricMatrix(Matrix(d.asDiagonal()), Source::kUpper);
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }
  double frobenius() const { return m_.norm(); }

  friend SymmetricMatrix operator+(const SymmetricMatrix& a,
                                   const SymmetricMatrix& b) {
    CheckSameDim(a, b);
    return SymmetricMatrix(a.m_ + b.m_, Source::kUpper);
  }
  friend SymmetricMatrix operator-(const SymmetricMatrix& a,
                                   const SymmetricMatrix& b) {
    CheckSameDim(a, b);
    return SymmetricMatrix(a.m_ - b.m_, Source::kUpper);
  }
  friend SymmetricMatrix operator*(double s, const SymmetricMatrix& a) {
    return SymmetricMatrix(s * a.m_, Source::kUpper);
  }

 private:
  static void CheckSameDim(const SymmetricMatrix& a, const SymmetricMatrix& b) {
    if (a.dim() != b.dim()) {
      throw DimensionError("SymmetricMatrix: dimension mismatch " +
                           std::to_string(a.dim()) + " vs " +
                           std::to_string(b.dim()));
    }
  }

  Matrix m_;
};

// A p x r matrix with orthonormal columns (r <= p).
class OrthonormalFactor {
 public:
  static constexpr double kTolerance = 1e-10;

  OrthonormalFactor() = default;

  explicit OrthonormalFactor(Matrix u) : u_(std::move(u)) {
    if (u_.cols() > u_.rows()) {
      throw DimensionError("OrthonormalFactor: " + std::to_string(u_.cols()) +
                           " columns exceed " + std::to_string(u_.rows()) +
                           " rows");
    }
    if (!u_.allFinite()) throw DomainError("OrthonormalFactor: non-finite entry");
    const double err = OrthonormalityError(u_);
    if (err > kTolerance) {
      throw DomainError("OrthonormalFactor: columns not orthonormal, max |U'U - I| = " +
                        std::to_string(err));
    }
  }

  static double OrthonormalityError(const Matrix& u) {
    if (u.cols() == 0) return 0.0;
    const Matrix g = u.transpose() * u;
    return (g - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
  }

  Eigen::Index rows() const { return u_.rows(); }
  Eigen::Index cols() const { return u_.cols(); }
  const Matrix& matrix() const { return u_; }

  // U U^T.
  SymmetricMatrix Projector() const {
    return SymmetricMatrix(u_ * u_.transpose(), SymmetricMatrix::Source::kUpper);
  }

 private:
  Matrix u_;
};

// Eigen-decomposition with eigenvalues in non-increasing order. Each
// eigenvector column has its first nonzero coordinate made positive; the
// convention only affects serialization since downstream metrics are
// projector based.
struct SpectralDecomposition {
  Vector eigenvalues;
  OrthonormalFactor eigenvectors;
};

// Schatten order q in [1, inf]. Infinity is a distinct tag rather than a
// floating-point sentinel.
class SchattenOrder {
 public:
  static SchattenOrder Of(double q) {
    if (!(q >= 1.0) || std::isinf(q)) {
      throw DomainError("SchattenOrder: q must be a finite value >= 1, got " +
                        std::to_string(q));
    }
    return SchattenOrder(q, false);
  }
  static SchattenOrder Infinity() { return SchattenOrder(0.0, true); }
  static SchattenOrder Nuclear() { return SchattenOrder(1.0, false); }
  static SchattenOrder Frobenius() { return SchattenOrder(2.0, false); }

  bool is_infinity() const { return infinite_; }
  // Only meaningful when !is_infinity().
  double q() const { return q_; }

  std::string ToString() const {
    if (infinite_) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", q_);
    return buf;
  }

  friend bool operator==(const SchattenOrder& a, const SchattenOrder& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.q_ == b.q_);
  }

 private:
  SchattenOrder(double q, bool infinite) : q_(q), infinite_(infinite) {}

  double q_;
  bool infinite_;
};

namespace matrix_internal {

inline void CanonicalizeSigns(Matrix& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double scale = v.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > 1e-12 * scale) {
        if (v(i, j) < 0) v.col(j) = -v.col(j);
        break;
      }
    }
  }
}

}  // namespace matrix_internal

// Full symmetric eigendecomposition (Householder tridiagonalization followed
// by implicit symmetric QR). Throws SolverError carrying the reconstruction
// residual when the iteration cap is hit.
inline SpectralDecomposition EigSym(const SymmetricMatrix& m) {
  const Eigen::Index p = m.dim();
  if (p == 0) return {Vector(), OrthonormalFactor(Matrix(0, 0))};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    const Matrix& v = solver.eigenvectors();
    const double residual =
        (v * solver.eigenvalues().asDiagonal() * v.transpose() - m.matrix()).norm();
    throw SolverError("EigSym: eigensolver did not converge", residual);
  }
  // Eigen returns ascending order.
  Vector values = solver.eigenvalues().reverse();
  Matrix vectors = solver.eigenvectors().rowwise().reverse();
  matrix_internal::CanonicalizeSigns(vectors);
  return {std::move(values), OrthonormalFactor(std::move(vectors))};
}

// Leading r eigenvectors. Ties among degenerate eigenvalues keep the
// solver's order.
inline OrthonormalFactor TopR(const SpectralDecomposition& eig, Eigen::Index r) {
  const Eigen::Index p = eig.eigenvectors.rows();
  if (r < 1 || r > p) {
    throw DimensionError("TopR: rank " + std::to_string(r) +
                         " outside [1, " + std::to_string(p) + "]");
  }
  return OrthonormalFactor(eig.eigenvectors.matrix().leftCols(r));
}

inline OrthonormalFactor TopR(const SymmetricMatrix& m, Eigen::Index r) {
  if (r < 1 || r > m.dim()) {
    throw DimensionError("TopR: rank " + std::to_string(r) +
                         " outside [1, " + std::to_string(m.dim()) + "]");
  }
  return TopR(EigSym(m), r);
}

// (sum_k |lambda_k|^q)^(1/q) over a list of eigenvalues.
inline double SchattenNormOfSpectrum(const Vector& eigenvalues, SchattenOrder q) {
  if (eigenvalues.size() == 0) return 0.0;
  const Eigen::ArrayXd a = eigenvalues.cwiseAbs().array();
  if (q.is_infinity()) return a.maxCoeff();
  const double peak = a.maxCoeff();
  if (peak == 0.0) return 0.0;
  if (q.q() == 1.0) return a.sum();
  if (q.q() == 2.0) return std::sqrt(a.square().sum());
  // Scale by the largest magnitude to keep pow() in range.
  return peak * std::pow((a / peak).pow(q.q()).sum(), 1.0 / q.q());
}

inline double SchattenNorm(const SymmetricMatrix& m, SchattenOrder q) {
  if (m.dim() == 0) return 0.0;
  if (!q.is_infinity() && q.q() == 2.0) return m.frobenius();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw SolverError("SchattenNorm: eigensolver did not converge",
                      std::numeric_limits<double>::quiet_NaN());
  }
  return SchattenNormOfSpectrum(solver.eigenvalues(), q);
}

// Largest singular value of an arbitrary (possibly rectangular) matrix.
inline double SpectralNorm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() <= a.cols()) {
    const Matrix g = a * a.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> s(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, s.eigenvalues().maxCoeff()));
  }
  const Matrix g = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> s(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, s.eigenvalues().maxCoeff()));
}

// Schatten-q norm of U1 U1^T - U2 U2^T.
inline double ProjectionDistance(const OrthonormalFactor& u1,
                                 const OrthonormalFactor& u2, SchattenOrder q) {
  if (u1.rows() != u2.rows() || u1.cols() != u2.cols()) {
    throw DimensionError("ProjectionDistance: factors are " +
                         std::to_string(u1.rows()) + "x" + std::to_string(u1.cols()) +
                         " and " + std::to_string(u2.rows()) + "x" +
                         std::to_string(u2.cols()));
  }
  return SchattenNorm(u1.Projector() - u2.Projector(), q);
}

// Left singular vectors of a p x r matrix with i.i.d. N(0, 1) entries.
inline OrthonormalFactor RandomOrthonormal(Eigen::Index p, Eigen::Index r, Rng& rng) {
  if (r < 0 || p < 1 || r > p) {
    throw DimensionError("RandomOrthonormal: need 0 <= r <= p, got p=" +
                         std::to_string(p) + " r=" + std::to_string(r));
  }
  Matrix g(p, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) g(i, j) = StandardNormal(rng);
  }
  if (r == 0) return OrthonormalFactor(g);
  Eigen::BDCSVD<Matrix> svd(g, Eigen::ComputeThinU);
  Matrix u = svd.matrixU();
  // One Gram-Schmidt pass tightens orthonormality to machine precision.
  Eigen::HouseholderQR<Matrix> qr(u);
  Matrix q = qr.householderQ() * Matrix::Identity(p, r);
  const Matrix rr = qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (rr(j, j) < 0) q.col(j) = -q.col(j);
  }
  return OrthonormalFactor(std::move(q));
}

// Orthonormal basis of the complement of span(U), p x (p - r).
inline Matrix OrthogonalComplement(const OrthonormalFactor& u) {
  const Eigen::Index p = u.rows();
  const Eigen::Index r = u.cols();
  Eigen::HouseholderQR<Matrix> qr(u.matrix());
  const Matrix full = qr.householderQ() * Matrix::Identity(p, p);
  return full.rightCols(p - r);
}

}  // namespace dpspectra

#endif  // DPSPECTRA_MATRIX_CORE_HPP_
