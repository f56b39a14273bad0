#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "dfr/tensor.hpp"

namespace dfr {

// Orthonormal type-II discrete sine/cosine transforms. Applied to midpoint
// samples they evaluate the trigonometric quadrature sums for all modes at
// once, which is what turns the per-mode residual integrals into a handful
// of separable passes.
enum class TransformKind { Dst2, Cst2 };

struct TransformMatrix {
    std::size_t n = 0;
    TransformKind kind = TransformKind::Dst2;
    Eigen::MatrixXd entries;  // n x n, rows orthonormal
};

// (S2)_ij = sqrt(2/n) * sigma_i * sin(pi/n (j+1/2)(i+1)), sigma_{n-1} = 1/sqrt2
// (C2)_ij = sqrt(2/n) * sigma'_i * cos(pi/n (j+1/2) i),   sigma'_0   = 1/sqrt2
TransformMatrix build_transform(std::size_t n, TransformKind kind);

// First `rows` rows of the full transform; the cheap path when only modes up
// to a small cutoff are needed on a large grid.
Eigen::MatrixXd build_transform_rows(std::size_t n, TransformKind kind, std::size_t rows);

// Applies the per-axis transform along every axis in sequence. Output shape
// equals input shape.
Tensor apply_separable(const Tensor& samples, const std::vector<TransformKind>& kinds);

// Identical contract, explicit nested loops. Test oracle for apply_separable.
Tensor naive_apply(const Tensor& samples, const std::vector<TransformKind>& kinds);

// Applies an arbitrary (rows x n) matrix along one axis of the tensor.
Tensor apply_axis(const Tensor& in, const Eigen::MatrixXd& m, std::size_t axis);

// Quadrature-sum bookkeeping: sum_i trig(k x_i) f(x_i) over the n midpoints
// equals row * unscale of the orthonormal transform of f. Wavenumbers whose
// samples vanish identically (sin k=0, cos k=n) have no row and no
// contribution.
struct QuadratureRow {
    std::size_t row;
    double unscale;
};

// kind Dst2 serves sin(k x), valid k in [1, n]; Cst2 serves cos(k x),
// valid k in [0, n]. Returns nullopt for the identically-zero cases.
// k out of range throws: the caller violated points >= modes.
std::optional<QuadratureRow> quadrature_row(std::size_t n, TransformKind kind, int k);

}  // namespace dfr
