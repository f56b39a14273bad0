#pragma once

// Test-only oracles: seeded RNG helpers, central finite differences, and
// direct double-loop quadrature, all independent of the library's fast paths.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "dfr/basis.hpp"
#include "dfr/grid.hpp"

namespace oracle {

inline double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit(rng);
}

inline dfr::Point random_interior_point(std::mt19937_64& rng, int dim, double margin = 1e-3) {
    dfr::Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[a] = uniform(rng, margin, std::numbers::pi - margin);
    return p;
}

// A random point on the boundary of [0,pi]^dim.
inline dfr::Point random_boundary_point(std::mt19937_64& rng, int dim) {
    dfr::Point p = random_interior_point(rng, dim, 0.0);
    const int face_axis = static_cast<int>(rng() % static_cast<std::uint64_t>(dim));
    p[face_axis] = (rng() % 2) ? std::numbers::pi : 0.0;
    return p;
}

// Central finite difference of a scalar function of one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-12) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Direct double-loop midpoint quadrature of integrand(p) over the grid.
inline double quadrature(const dfr::MidpointGrid& grid,
                         const std::function<double(const dfr::Point&)>& integrand) {
    double s = 0.0;
    const std::size_t total = grid.total_points();
    for (std::size_t i = 0; i < total; ++i) s += integrand(grid.point(i));
    return s * grid.cell_weight();
}

}  // namespace oracle
