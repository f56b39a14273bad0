#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dfr {

using Point = std::array<double, 3>;  // unused trailing coords are 0

// Tensor-product midpoint quadrature on [0,pi]^n, nodes x_i = (2i+1)pi/(2N).
// All nodes are strictly interior.
struct MidpointGrid {
    std::vector<std::size_t> counts;

    explicit MidpointGrid(std::vector<std::size_t> c) : counts(std::move(c)) {
        if (counts.empty() || counts.size() > 3)
            throw std::invalid_argument("MidpointGrid: dimension must be 1..3");
        for (std::size_t n : counts)
            if (n == 0) throw std::invalid_argument("MidpointGrid: zero point count");
    }

    std::size_t dim() const { return counts.size(); }

    double node(std::size_t axis, std::size_t i) const {
        return (2.0 * static_cast<double>(i) + 1.0) * std::numbers::pi /
               (2.0 * static_cast<double>(counts[axis]));
    }

    std::size_t total_points() const {
        std::size_t t = 1;
        for (std::size_t n : counts) t *= n;
        return t;
    }

    double cell_weight() const {
        double w = 1.0;
        for (std::size_t n : counts) w *= std::numbers::pi / static_cast<double>(n);
        return w;
    }

    // Row-major flat index -> point (last axis fastest), matching Tensor layout.
    Point point(std::size_t flat) const {
        Point p{0.0, 0.0, 0.0};
        for (std::size_t a = dim(); a-- > 0;) {
            p[a] = node(a, flat % counts[a]);
            flat /= counts[a];
        }
        return p;
    }
};

}  // namespace dfr
