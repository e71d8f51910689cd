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

#include "dpspectra/matrix_core.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "dpspectra/errors.hpp"
#include "dpspectra/random.hpp"

namespace dpspectra {
namespace {

SymmetricMatrix RandomSymmetric(Eigen::Index p, Rng& rng, double scale = 1.0) {
  Matrix a(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) a(i, j) = scale * StandardNormal(rng);
  }
  return SymmetricMatrix(a, SymmetricMatrix::Source::kAverage);
}

Matrix RandomRotation(Eigen::Index r, Rng& rng) { return RandomOrthonormal(r, r, rng).matrix(); }

TEST(SymmetricMatrixTest, MirrorsChosenTriangle) {
  Matrix a(2, 2);
  a << 1, 2, 5, 4;
  EXPECT_EQ(SymmetricMatrix(a, SymmetricMatrix::Source::kUpper)(1, 0), 2.0);
  EXPECT_EQ(SymmetricMatrix(a, SymmetricMatrix::Source::kLower)(0, 1), 5.0);
  const SymmetricMatrix avg(a);
  EXPECT_EQ(avg(0, 1), 3.5);
  EXPECT_EQ(avg(1, 0), 3.5);
}

TEST(SymmetricMatrixTest, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(SymmetricMatrix(Matrix::Zero(2, 3)), DimensionError);
  Matrix a = Matrix::Zero(2, 2);
  a(1, 1) = std::nan("");
  EXPECT_THROW(SymmetricMatrix{a}, DomainError);
}

TEST(OrthonormalFactorTest, RejectsNonOrthonormalColumns) {
  Matrix u(2, 1);
  u << 1.0, 1.0;
  EXPECT_THROW(OrthonormalFactor{u}, DomainError);
}

TEST(EigSymTest, DiagonalMatrixSortedDescending) {
  const SpectralDecomposition e = EigSym(SymmetricMatrix::Diagonal((Vector(3) << 3, 1, 2).finished()));
  EXPECT_DOUBLE_EQ(e.eigenvalues(0), 3.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues(1), 2.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues(2), 1.0);
  const Matrix& v = e.eigenvectors.matrix();
  EXPECT_NEAR(std::abs(v(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(v(2, 1)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(v(1, 2)), 1.0, 1e-14);
}

TEST(EigSymTest, IdentityHasUnitSpectrum) {
  const SpectralDecomposition e = EigSym(SymmetricMatrix::Identity(4));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(e.eigenvalues(k), 1.0, 1e-14);
  EXPECT_LE(OrthonormalFactor::OrthonormalityError(e.eigenvectors.matrix()), 1e-12);
}

TEST(EigSymTest, TwoByTwoHandSolution) {
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  const SpectralDecomposition e = EigSym(SymmetricMatrix(a));
  EXPECT_NEAR(e.eigenvalues(0), 3.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues(1), 1.0, 1e-14);
  const double h = 1.0 / std::sqrt(2.0);
  const Matrix& v = e.eigenvectors.matrix();
  // Signs follow the first-coordinate-positive convention.
  EXPECT_NEAR(v(0, 0), h, 1e-14);
  EXPECT_NEAR(v(1, 0), h, 1e-14);
  EXPECT_NEAR(v(0, 1), h, 1e-14);
  EXPECT_NEAR(v(1, 1), -h, 1e-14);
}

TEST(EigSymTest, ReconstructionTraceAndSignConvention) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const SymmetricMatrix m = RandomSymmetric(3 + t, rng);
    const SpectralDecomposition e = EigSym(m);
    const Matrix& v = e.eigenvectors.matrix();
    const Matrix rec = v * e.eigenvalues.asDiagonal() * v.transpose();
    EXPECT_LE((rec - m.matrix()).norm(), 1e-8 * m.frobenius());
    EXPECT_NEAR(e.eigenvalues.sum(), m.trace(), 1e-8 * std::max(1.0, std::abs(m.trace())));
    for (Eigen::Index k = 1; k < e.eigenvalues.size(); ++k) {
      EXPECT_GE(e.eigenvalues(k - 1), e.eigenvalues(k));
    }
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      Eigen::Index i = 0;
      while (std::abs(v(i, j)) <= 1e-12 * v.col(j).cwiseAbs().maxCoeff()) ++i;
      EXPECT_GT(v(i, j), 0.0);
    }
  }
}

TEST(EigSymTest, WeylPerturbation) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const SymmetricMatrix a = RandomSymmetric(8, rng);
    const SymmetricMatrix b = RandomSymmetric(8, rng, 0.1);
    const Vector la = EigSym(a).eigenvalues;
    const Vector lab = EigSym(a + b).eigenvalues;
    EXPECT_LE((lab - la).cwiseAbs().maxCoeff(), SchattenNorm(b, SchattenOrder::Infinity()) + 1e-10);
  }
}

TEST(EigSymTest, HoffmanWielandt) {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const SymmetricMatrix a = RandomSymmetric(6, rng);
    const SymmetricMatrix b = RandomSymmetric(6, rng);
    const Vector d = EigSym(a).eigenvalues - EigSym(b).eigenvalues;
    ASSERT_LE(d.squaredNorm(), (a - b).frobenius() * (a - b).frobenius() * (1 + 1e-12) + 1e-12);
  }
}

TEST(TopRTest, DiagonalPicksLeadingAxes) {
  const OrthonormalFactor u = TopR(SymmetricMatrix::Diagonal((Vector(3) << 5, 4, 3).finished()), 2);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = expected(1, 1) = 1.0;
  EXPECT_LE((u.Projector().matrix() - expected).norm(), 1e-14);
}

TEST(TopRTest, DegenerateSpectrumGivesUnitTraceProjector) {
  const OrthonormalFactor u = TopR(SymmetricMatrix::Identity(3), 1);
  EXPECT_NEAR(u.Projector().trace(), 1.0, 1e-14);
  EXPECT_NEAR(u.matrix().norm(), 1.0, 1e-14);
}

TEST(TopRTest, RankOneRecoversVector) {
  Rng rng(6);
  const OrthonormalFactor v = RandomOrthonormal(7, 1, rng);
  const OrthonormalFactor u = TopR(v.Projector(), 1);
  EXPECT_NEAR(std::abs(u.matrix().col(0).dot(v.matrix().col(0))), 1.0, 1e-12);
}

TEST(TopRTest, RankOutOfRange) {
  EXPECT_THROW(TopR(SymmetricMatrix::Identity(3), 4), DimensionError);
  EXPECT_THROW(TopR(SymmetricMatrix::Identity(3), 0), DimensionError);
}

TEST(TopRTest, Deterministic) {
  Rng rng(7);
  const SymmetricMatrix m = RandomSymmetric(10, rng);
  EXPECT_EQ(TopR(m, 3).matrix(), TopR(m, 3).matrix());
}

TEST(SchattenNormTest, DiagonalValues) {
  const SymmetricMatrix d = SymmetricMatrix::Diagonal((Vector(3) << 3, -4, 0).finished());
  EXPECT_DOUBLE_EQ(SchattenNorm(d, SchattenOrder::Infinity()), 4.0);
  EXPECT_DOUBLE_EQ(SchattenNorm(d, SchattenOrder::Nuclear()), 7.0);
  EXPECT_NEAR(SchattenNorm(d, SchattenOrder::Frobenius()), 5.0, 1e-14);
  EXPECT_NEAR(SchattenNorm(d, SchattenOrder::Of(3.0)), std::cbrt(91.0), 1e-13);
}

TEST(SchattenNormTest, ZeroMatrix) {
  for (double q : {1.0, 1.5, 2.0, 7.0}) {
    EXPECT_EQ(SchattenNorm(SymmetricMatrix::Zero(4), SchattenOrder::Of(q)), 0.0);
  }
  EXPECT_EQ(SchattenNorm(SymmetricMatrix::Zero(4), SchattenOrder::Infinity()), 0.0);
}

TEST(SchattenNormTest, FrobeniusMatchesEntrywiseSum) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const SymmetricMatrix m = RandomSymmetric(9, rng);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < 9; ++i) {
      for (Eigen::Index j = 0; j < 9; ++j) sum += m(i, j) * m(i, j);
    }
    EXPECT_NEAR(SchattenNorm(m, SchattenOrder::Frobenius()), std::sqrt(sum), 1e-10);
  }
}

TEST(SchattenNormTest, Monotone) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const SymmetricMatrix m = RandomSymmetric(6, rng);
    const double inf = SchattenNorm(m, SchattenOrder::Infinity());
    const double two = SchattenNorm(m, SchattenOrder::Frobenius());
    const double one = SchattenNorm(m, SchattenOrder::Nuclear());
    EXPECT_LE(inf, two * (1 + 1e-14));
    EXPECT_LE(two, one * (1 + 1e-14));
  }
}

TEST(SchattenOrderTest, RejectsBelowOne) {
  EXPECT_THROW(SchattenOrder::Of(0.5), DomainError);
  EXPECT_THROW(SchattenOrder::Of(std::nan("")), DomainError);
  EXPECT_TRUE(SchattenOrder::Infinity().is_infinity());
  EXPECT_FALSE(SchattenOrder::Of(2.0).is_infinity());
}

TEST(ProjectionDistanceTest, IdenticalFactors) {
  Rng rng(10);
  const OrthonormalFactor u = RandomOrthonormal(6, 2, rng);
  EXPECT_LE(ProjectionDistance(u, u, SchattenOrder::Frobenius()), 1e-14);
}

TEST(ProjectionDistanceTest, OrthogonalAxes) {
  const OrthonormalFactor e1(Matrix(Vector::Unit(2, 0)));
  const OrthonormalFactor e2(Matrix(Vector::Unit(2, 1)));
  EXPECT_NEAR(ProjectionDistance(e1, e2, SchattenOrder::Frobenius()), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ProjectionDistance(e1, e2, SchattenOrder::Infinity()), 1.0, 1e-14);
  EXPECT_NEAR(ProjectionDistance(e1, e2, SchattenOrder::Nuclear()), 2.0, 1e-14);
}

TEST(ProjectionDistanceTest, RotationInvariant) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const OrthonormalFactor u = RandomOrthonormal(12, 3, rng);
    const OrthonormalFactor w = RandomOrthonormal(12, 3, rng);
    const OrthonormalFactor ur(u.matrix() * RandomRotation(3, rng));
    EXPECT_LE(ProjectionDistance(u, ur, SchattenOrder::Frobenius()), 1e-10);
    EXPECT_NEAR(ProjectionDistance(ur, w, SchattenOrder::Frobenius()),
                ProjectionDistance(u, w, SchattenOrder::Frobenius()), 1e-10);
  }
}

TEST(ProjectionDistanceTest, BoundedByRankTerm) {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index r = 1 + t % 4;
    const OrthonormalFactor u = RandomOrthonormal(10, r, rng);
    const OrthonormalFactor w = RandomOrthonormal(10, r, rng);
    for (double q : {1.0, 2.0, 3.0}) {
      EXPECT_LE(ProjectionDistance(u, w, SchattenOrder::Of(q)),
                std::pow(2.0 * static_cast<double>(r), 1.0 / q) + 1e-12);
    }
    EXPECT_LE(ProjectionDistance(u, w, SchattenOrder::Infinity()), 1.0 + 1e-12);
  }
}

TEST(ProjectionDistanceTest, DimensionMismatch) {
  Rng rng(13);
  EXPECT_THROW(ProjectionDistance(RandomOrthonormal(5, 2, rng), RandomOrthonormal(6, 2, rng),
                                  SchattenOrder::Frobenius()),
               DimensionError);
  EXPECT_THROW(ProjectionDistance(RandomOrthonormal(5, 2, rng), RandomOrthonormal(5, 1, rng),
                                  SchattenOrder::Frobenius()),
               DimensionError);
}

TEST(RandomOrthonormalTest, SquareIsOrthogonal) {
  Rng rng(14);
  const OrthonormalFactor q = RandomOrthonormal(6, 6, rng);
  EXPECT_NEAR(std::abs(q.matrix().determinant()), 1.0, 1e-8);
}

TEST(RandomOrthonormalTest, Orthonormal) {
  Rng rng(15);
  const OrthonormalFactor u = RandomOrthonormal(50, 3, rng);
  EXPECT_LE((u.matrix().transpose() * u.matrix() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RandomOrthonormalTest, SeededBitIdentical) {
  Rng a(16);
  Rng b(16);
  EXPECT_EQ(RandomOrthonormal(20, 4, a).matrix(), RandomOrthonormal(20, 4, b).matrix());
}

TEST(RandomOrthonormalTest, RankAboveDimension) {
  Rng rng(17);
  EXPECT_THROW(RandomOrthonormal(3, 4, rng), DimensionError);
}

TEST(OrthogonalComplementTest, CompletesBasis) {
  Rng rng(18);
  const OrthonormalFactor u = RandomOrthonormal(7, 2, rng);
  const Matrix perp = OrthogonalComplement(u);
  EXPECT_EQ(perp.cols(), 5);
  EXPECT_LE((u.matrix().transpose() * perp).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((u.matrix() * u.matrix().transpose() + perp * perp.transpose() - Matrix::Identity(7, 7))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

}  // namespace
}  // namespace dpspectra
