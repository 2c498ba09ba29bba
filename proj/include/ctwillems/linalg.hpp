/*
 Copyright 2026 The ctwillems Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ctwillems/errors.hpp"

namespace ctwillems {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance for numerical rank decisions: a singular value counts
/// toward the rank when it exceeds tol_rel * sigma_max * max(rows, cols).
inline constexpr double kDefaultRankTol = 1e-8;

/// Relative cutoff below which singular values are zeroed in the pseudoinverse.
inline constexpr double kDefaultPinvCutoff = 1e-10;

inline void require_finite(const Matrix& M, const std::string& what) {
    if (!M.allFinite()) {
        throw ValueError(what + ": matrix entries must be finite");
    }
}

inline void require_finite(const Vector& v, const std::string& what) {
    if (!v.allFinite()) {
        throw ValueError(what + ": vector entries must be finite");
    }
}

/// Thin SVD, singular values sorted nonincreasing.
struct SvdResult {
    Vector singular_values;
    Matrix left_vectors;   // U, rows x min(rows, cols)
    Matrix right_vectors;  // V, cols x min(rows, cols)
};

inline SvdResult svd(const Matrix& M) {
    require_finite(M, "svd");
    Eigen::JacobiSVD<Matrix> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return SvdResult{dec.singularValues(), dec.matrixU(), dec.matrixV()};
}

/// e^{A t} by scaling-and-squaring with a [13/13] Pade approximant.
///
/// Relative accuracy better than 1e-12 for ||A t|| <= 50; t may be zero or
/// negative. Throws DimensionError for non-square A.
inline Matrix matrix_exponential(const Matrix& A, double t = 1.0) {
    if (A.rows() != A.cols()) {
        throw DimensionError("matrix_exponential: matrix must be square");
    }
    require_finite(A, "matrix_exponential");
    if (!std::isfinite(t)) {
        throw ValueError("matrix_exponential: t must be finite");
    }

    const Eigen::Index n = A.rows();
    Matrix M = A * t;

    const double eta = M.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    if (eta == 0.0) {
        return Matrix::Identity(n, n);
    }
    const double theta13 = 5.371920351148152;
    int squarings = 0;
    if (eta > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(eta / theta13)));
        M *= std::ldexp(1.0, -squarings);
    }

    static const double b[14] = {64764752532480000.0, 32382376266240000.0,
                                 7771770303897600.0,  1187353796428800.0,
                                 129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,
                                 1323241920.0,        40840800.0,
                                 960960.0,            16380.0,
                                 182.0,               1.0};

    const Matrix I = Matrix::Identity(n, n);
    const Matrix M2 = M * M;
    const Matrix M4 = M2 * M2;
    const Matrix M6 = M4 * M2;
    const Matrix U =
        M * (M6 * (b[13] * M6 + b[11] * M4 + b[9] * M2) + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * I);
    const Matrix V =
        M6 * (b[12] * M6 + b[10] * M4 + b[8] * M2) + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * I;

    Matrix F = (V - U).partialPivLu().solve(V + U);
    for (int s = 0; s < squarings; ++s) {
        F = F * F;
    }
    return F;
}

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// cutoff_rel * sigma_max are treated as zero.
inline Matrix pseudoinverse(const Matrix& M, double cutoff_rel = kDefaultPinvCutoff) {
    if (!(cutoff_rel > 0.0)) {
        throw ValueError("pseudoinverse: cutoff_rel must be positive");
    }
    const SvdResult dec = svd(M);
    const Eigen::Index r = dec.singular_values.size();
    const double sigma_max = r > 0 ? dec.singular_values(0) : 0.0;
    const double cutoff = cutoff_rel * sigma_max;

    Vector inv = Vector::Zero(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (dec.singular_values(i) > cutoff && dec.singular_values(i) > 0.0) {
            inv(i) = 1.0 / dec.singular_values(i);
        }
    }
    return dec.right_vectors * inv.asDiagonal() * dec.left_vectors.transpose();
}

inline int rank_from_singular_values(const Vector& sv, Eigen::Index rows, Eigen::Index cols,
                                     double tol_rel = kDefaultRankTol) {
    if (sv.size() == 0) return 0;
    const double sigma_max = sv(0);
    if (sigma_max == 0.0) return 0;
    const double threshold = tol_rel * sigma_max * static_cast<double>(std::max(rows, cols));
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) ++rank;
    }
    return rank;
}

/// Number of singular values above tol_rel * sigma_max * max(rows, cols).
inline int numerical_rank(const Matrix& M, double tol_rel = kDefaultRankTol) {
    if (!(tol_rel > 0.0)) {
        throw ValueError("numerical_rank: tol_rel must be positive");
    }
    const SvdResult dec = svd(M);
    return rank_from_singular_values(dec.singular_values, M.rows(), M.cols(), tol_rel);
}

/// All eigenvalues with multiplicity, sorted by (real, imag) for stable output.
/// Intended for small matrices (n <= 16).
inline std::vector<std::complex<double>> eigenvalues(const Matrix& A) {
    if (A.rows() != A.cols()) {
        throw DimensionError("eigenvalues: matrix must be square");
    }
    if (A.rows() > 16) {
        throw DimensionError("eigenvalues: supported up to 16x16");
    }
    require_finite(A, "eigenvalues");

    Eigen::EigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw SingularityError("eigenvalues: QR iteration failed to converge");
    }
    std::vector<std::complex<double>> out(static_cast<std::size_t>(A.rows()));
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

}  // namespace ctwillems
