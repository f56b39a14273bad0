#include "dfr/transforms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dfr {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440;
}  // namespace

Eigen::MatrixXd build_transform_rows(std::size_t n, TransformKind kind, std::size_t rows) {
    if (n == 0) throw std::invalid_argument("build_transform: n must be positive");
    if (rows > n) throw std::invalid_argument("build_transform: rows > n");
    Eigen::MatrixXd m(rows, n);
    const double scale = std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < rows; ++i) {
        double sigma;
        if (kind == TransformKind::Dst2)
            sigma = (i == n - 1) ? kInvSqrt2 : 1.0;
        else
            sigma = (i == 0) ? kInvSqrt2 : 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double arg = kPi / static_cast<double>(n) * (static_cast<double>(j) + 0.5);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                kind == TransformKind::Dst2
                    ? scale * sigma * std::sin(arg * static_cast<double>(i + 1))
                    : scale * sigma * std::cos(arg * static_cast<double>(i));
        }
    }
    return m;
}

TransformMatrix build_transform(std::size_t n, TransformKind kind) {
    return TransformMatrix{n, kind, build_transform_rows(n, kind, n)};
}

Tensor apply_axis(const Tensor& in, const Eigen::MatrixXd& m, std::size_t axis) {
    const auto& dims = in.dims();
    if (axis >= dims.size()) throw std::invalid_argument("apply_axis: axis out of range");
    const std::size_t n = dims[axis];
    if (static_cast<std::size_t>(m.cols()) != n)
        throw std::invalid_argument("apply_axis: matrix width does not match axis");
    const std::size_t rows = static_cast<std::size_t>(m.rows());

    std::size_t pre = 1, post = 1;
    for (std::size_t a = 0; a < axis; ++a) pre *= dims[a];
    for (std::size_t a = axis + 1; a < dims.size(); ++a) post *= dims[a];

    std::vector<std::size_t> odims = dims;
    odims[axis] = rows;
    Tensor out(odims);

    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    for (std::size_t p = 0; p < pre; ++p) {
        Eigen::Map<const RowMat> slab(in.data() + p * n * post,
                                      static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(post));
        Eigen::Map<RowMat> oslab(out.data() + p * rows * post,
                                 static_cast<Eigen::Index>(rows),
                                 static_cast<Eigen::Index>(post));
        oslab.noalias() = m * slab;
    }
    return out;
}

Tensor apply_separable(const Tensor& samples, const std::vector<TransformKind>& kinds) {
    if (kinds.size() != samples.rank())
        throw std::invalid_argument("apply_separable: one transform kind per axis required");
    Tensor t = samples;
    for (std::size_t a = 0; a < kinds.size(); ++a) {
        const Eigen::MatrixXd m = build_transform_rows(t.dim(a), kinds[a], t.dim(a));
        t = apply_axis(t, m, a);
    }
    return t;
}

Tensor naive_apply(const Tensor& samples, const std::vector<TransformKind>& kinds) {
    if (kinds.size() != samples.rank())
        throw std::invalid_argument("naive_apply: one transform kind per axis required");
    Tensor t = samples;
    for (std::size_t a = 0; a < kinds.size(); ++a) {
        const auto& dims = t.dims();
        const std::size_t n = dims[a];
        const TransformMatrix tm = build_transform(n, kinds[a]);
        std::size_t pre = 1, post = 1;
        for (std::size_t x = 0; x < a; ++x) pre *= dims[x];
        for (std::size_t x = a + 1; x < dims.size(); ++x) post *= dims[x];
        Tensor out(dims);
        for (std::size_t p = 0; p < pre; ++p)
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t q = 0; q < post; ++q) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        s += tm.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) *
                             t[(p * n + i) * post + q];
                    out[(p * n + r) * post + q] = s;
                }
        t = out;
    }
    return t;
}

std::optional<QuadratureRow> quadrature_row(std::size_t n, TransformKind kind, int k) {
    if (k < 0) throw std::invalid_argument("quadrature_row: negative wavenumber");
    const auto kk = static_cast<std::size_t>(k);
    const double half = std::sqrt(static_cast<double>(n) / 2.0);
    if (kind == TransformKind::Dst2) {
        if (kk == 0) return std::nullopt;  // sin(0 x) == 0
        if (kk > n) throw std::invalid_argument("quadrature_row: sin wavenumber exceeds point count");
        const double sigma = (kk == n) ? kInvSqrt2 : 1.0;
        return QuadratureRow{kk - 1, half / sigma};
    }
    if (kk == n) return std::nullopt;  // cos(n x_i) == 0 at every midpoint
    if (kk > n) throw std::invalid_argument("quadrature_row: cos wavenumber exceeds point count");
    const double sigma = (kk == 0) ? kInvSqrt2 : 1.0;
    return QuadratureRow{kk, half / sigma};
}

}  // namespace dfr
