#include "dfr/residual.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dfr {

double MaterialField::inv_mu_at(const Point& p) const { return 1.0 / mu(p); }

double MaterialField::mass_at(const Point& p) const {
    return coercive ? eps(p) : -omega * omega * eps(p);
}

void MaterialField::validate() const {
    if (!coercive && omega == 0.0)
        throw std::invalid_argument("MaterialField: omega must be non-zero for the Maxwell form");
}

FieldSamples sample_field(const VecFn& value, const VecFn& curl, const MidpointGrid& grid) {
    FieldSamples out;
    out.dim = static_cast<int>(grid.dim());
    out.curl_count = out.dim == 2 ? 1 : 3;
    std::vector<std::size_t> dims = grid.counts;
    for (int c = 0; c < out.dim; ++c) out.values[c] = Tensor(dims);
    for (int c = 0; c < out.curl_count; ++c) out.curls[c] = Tensor(dims);
    const std::size_t total = grid.total_points();
    for (std::size_t i = 0; i < total; ++i) {
        const Point p = grid.point(i);
        const auto v = value(p);
        const auto cu = curl(p);
        for (int c = 0; c < out.dim; ++c) out.values[c][i] = v[c];
        for (int c = 0; c < out.curl_count; ++c) out.curls[c][i] = cu[c];
    }
    return out;
}

LossBreakdown discretized_loss(const std::vector<double>& r, std::size_t grad_count) {
    LossBreakdown b;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double sq = r[i] * r[i];
        if (i < grad_count)
            b.grad_sq += sq;
        else
            b.x0_sq += sq;
    }
    b.loss = std::sqrt(b.grad_sq + b.x0_sq);
    return b;
}

namespace {

// Per-axis wavenumber trig tables; the fast path for pointwise basis
// evaluation in the naive oracle and the interface-cell corrections.
struct TrigTable {
    std::vector<double> sin_v, cos_v;  // index = wavenumber
    void build(double x, int kmax) {
        sin_v.resize(kmax + 1);
        cos_v.resize(kmax + 1);
        for (int k = 0; k <= kmax; ++k) {
            sin_v[k] = std::sin(k * x);
            cos_v[k] = std::cos(k * x);
        }
    }
};

double eval_from_tables(const SeparableComponent& c, const std::array<int, 3>& k, int dim,
                        const std::array<TrigTable, 3>& tabs) {
    if (c.coeff == 0.0) return 0.0;
    double v = c.coeff;
    for (int a = 0; a < dim; ++a)
        v *= c.trig[a] == Trig::Sin ? tabs[a].sin_v[k[a]] : tabs[a].cos_v[k[a]];
    return v;
}

}  // namespace

ResidualWorkspace::ResidualWorkspace(MidpointGrid grid, ModeSet modes)
    : grid_(std::move(grid)), modes_(std::move(modes)) {
    if (static_cast<int>(grid_.dim()) != modes_.dim)
        throw std::invalid_argument("ResidualWorkspace: grid/mode dimension mismatch");
    for (int a = 0; a < modes_.dim; ++a)
        if (grid_.counts[a] < static_cast<std::size_t>(modes_.cutoffs[a]))
            throw std::invalid_argument(
                "ResidualWorkspace: integration points per axis must be >= mode cutoff");

    basis_.reserve(modes_.modes.size());
    for (const auto& m : modes_.modes) basis_.push_back(make_basis_function(m));

    if (modes_.dim == 2) {
        value_patterns_[0] = {Trig::Cos, Trig::Sin, Trig::Cos};
        value_patterns_[1] = {Trig::Sin, Trig::Cos, Trig::Cos};
        curl_patterns_[0] = {Trig::Cos, Trig::Cos, Trig::Cos};
    } else {
        value_patterns_[0] = {Trig::Cos, Trig::Sin, Trig::Sin};
        value_patterns_[1] = {Trig::Sin, Trig::Cos, Trig::Sin};
        value_patterns_[2] = {Trig::Sin, Trig::Sin, Trig::Cos};
        curl_patterns_[0] = {Trig::Sin, Trig::Cos, Trig::Cos};
        curl_patterns_[1] = {Trig::Cos, Trig::Sin, Trig::Cos};
        curl_patterns_[2] = {Trig::Cos, Trig::Cos, Trig::Sin};
    }

    for (int a = 0; a < modes_.dim; ++a) {
        const std::size_t n = grid_.counts[a];
        const auto cut = static_cast<std::size_t>(modes_.cutoffs[a]);
        sin_rows_[a] = build_transform_rows(n, TransformKind::Dst2, std::min(cut, n));
        cos_rows_[a] = build_transform_rows(n, TransformKind::Cst2, std::min(cut + 1, n));
    }
}

Tensor ResidualWorkspace::transform_pattern(const Tensor& samples,
                                            const std::array<Trig, 3>& pattern) const {
    if (samples.dims() != grid_.counts)
        throw std::invalid_argument("transform_pattern: sample shape does not match grid");
    Tensor t = samples;
    for (int a = 0; a < modes_.dim; ++a) {
        const auto& m = pattern[a] == Trig::Sin ? sin_rows_[a] : cos_rows_[a];
        t = apply_axis(t, m, static_cast<std::size_t>(a));
    }
    return t;
}

Tensor ResidualWorkspace::adjoint_pattern(const Tensor& spectrum,
                                          const std::array<Trig, 3>& pattern) const {
    Tensor t = spectrum;
    for (int a = 0; a < modes_.dim; ++a) {
        const auto& m = pattern[a] == Trig::Sin ? sin_rows_[a] : cos_rows_[a];
        t = apply_axis(t, m.transpose(), static_cast<std::size_t>(a));
    }
    return t;
}

double ResidualWorkspace::lookup(const Tensor& coeffs, const std::array<Trig, 3>& pattern,
                                 const std::array<int, 3>& k) const {
    double scale = 1.0;
    std::size_t flat = 0;
    for (int a = 0; a < modes_.dim; ++a) {
        const auto kind = pattern[a] == Trig::Sin ? TransformKind::Dst2 : TransformKind::Cst2;
        const auto qr = quadrature_row(grid_.counts[a], kind, k[a]);
        if (!qr) return 0.0;
        scale *= qr->unscale;
        flat = flat * coeffs.dim(static_cast<std::size_t>(a)) + qr->row;
    }
    return scale * coeffs[flat];
}

std::vector<double> ResidualWorkspace::residual_coefficients(const FieldSamples& samples,
                                                             const MaterialField& material,
                                                             const RhsCoefficients& rhs) const {
    const int dim = modes_.dim;
    if (samples.dim != dim)
        throw std::invalid_argument("residual_coefficients: sample dimension mismatch");
    for (int c = 0; c < dim; ++c)
        if (samples.values[c].dims() != grid_.counts)
            throw std::invalid_argument("residual_coefficients: value sample shape mismatch");
    for (int c = 0; c < samples.curl_count; ++c)
        if (samples.curls[c].dims() != grid_.counts)
            throw std::invalid_argument("residual_coefficients: curl sample shape mismatch");
    if (rhs.ell.size() != modes_.modes.size())
        throw std::invalid_argument("residual_coefficients: rhs length mismatch");

    const std::size_t total = grid_.total_points();
    std::array<Tensor, 3> tv, tc;
    {
        Tensor weighted(grid_.counts);
        for (int c = 0; c < dim; ++c) {
            for (std::size_t i = 0; i < total; ++i)
                weighted[i] = material.mass_at(grid_.point(i)) * samples.values[c][i];
            tv[c] = transform_pattern(weighted, value_patterns_[c]);
        }
        for (int c = 0; c < samples.curl_count; ++c) {
            for (std::size_t i = 0; i < total; ++i)
                weighted[i] = material.inv_mu_at(grid_.point(i)) * samples.curls[c][i];
            tc[c] = transform_pattern(weighted, curl_patterns_[c]);
        }
    }

    const double w = grid_.cell_weight();
    std::vector<double> r(modes_.modes.size());
    for (std::size_t m = 0; m < basis_.size(); ++m) {
        const BasisFunction& bf = basis_[m];
        double s = 0.0;
        for (int c = 0; c < dim; ++c)
            if (bf.value[c].coeff != 0.0)
                s += bf.value[c].coeff * lookup(tv[c], value_patterns_[c], bf.mode.k);
        for (int c = 0; c < bf.curl_count; ++c)
            if (bf.curl[c].coeff != 0.0)
                s += bf.curl[c].coeff * lookup(tc[c], curl_patterns_[c], bf.mode.k);
        r[m] = w * s - rhs.ell[m];
    }
    return r;
}

RhsCoefficients ResidualWorkspace::rhs_from_samples(const FieldSamples& f) const {
    const int dim = modes_.dim;
    std::array<Tensor, 3> tv;
    for (int c = 0; c < dim; ++c) tv[c] = transform_pattern(f.values[c], value_patterns_[c]);
    const double w = grid_.cell_weight();
    RhsCoefficients rhs;
    rhs.ell.resize(modes_.modes.size());
    for (std::size_t m = 0; m < basis_.size(); ++m) {
        const BasisFunction& bf = basis_[m];
        double s = 0.0;
        for (int c = 0; c < dim; ++c)
            if (bf.value[c].coeff != 0.0)
                s += bf.value[c].coeff * lookup(tv[c], value_patterns_[c], bf.mode.k);
        rhs.ell[m] = w * s;
    }
    return rhs;
}

FieldSamples ResidualWorkspace::basis_weighted_sums(const std::vector<double>& rbar) const {
    if (rbar.size() != basis_.size())
        throw std::invalid_argument("basis_weighted_sums: length mismatch");
    const int dim = modes_.dim;
    FieldSamples out;
    out.dim = dim;
    out.curl_count = dim == 2 ? 1 : 3;

    auto spectrum_dims = [&](const std::array<Trig, 3>& pattern) {
        std::vector<std::size_t> d(static_cast<std::size_t>(dim));
        for (int a = 0; a < dim; ++a)
            d[a] = static_cast<std::size_t>(pattern[a] == Trig::Sin ? sin_rows_[a].rows()
                                                                    : cos_rows_[a].rows());
        return d;
    };

    auto accumulate = [&](bool curl_side, int comp) {
        const auto& pattern = curl_side ? curl_patterns_[comp] : value_patterns_[comp];
        Tensor spec(spectrum_dims(pattern));
        for (std::size_t m = 0; m < basis_.size(); ++m) {
            const auto& sc = curl_side ? basis_[m].curl[comp] : basis_[m].value[comp];
            if (sc.coeff == 0.0 || rbar[m] == 0.0) continue;
            double scale = sc.coeff * rbar[m];
            std::size_t flat = 0;
            bool dead = false;
            for (int a = 0; a < dim; ++a) {
                const auto kind =
                    pattern[a] == Trig::Sin ? TransformKind::Dst2 : TransformKind::Cst2;
                const auto qr = quadrature_row(grid_.counts[a], kind, basis_[m].mode.k[a]);
                if (!qr) {
                    dead = true;
                    break;
                }
                scale *= qr->unscale;
                flat = flat * spec.dim(static_cast<std::size_t>(a)) + qr->row;
            }
            if (!dead) spec[flat] += scale;
        }
        return adjoint_pattern(spec, pattern);
    };

    for (int c = 0; c < dim; ++c) out.values[c] = accumulate(false, c);
    for (int c = 0; c < out.curl_count; ++c) out.curls[c] = accumulate(true, c);
    return out;
}

std::vector<double> naive_residual_coefficients(const FieldSamples& samples,
                                                const MaterialField& material,
                                                const RhsCoefficients& rhs, const ModeSet& modes,
                                                const MidpointGrid& grid) {
    if (rhs.ell.size() != modes.modes.size())
        throw std::invalid_argument("naive_residual_coefficients: rhs length mismatch");
    const int dim = modes.dim;
    std::vector<BasisFunction> fns;
    fns.reserve(modes.modes.size());
    for (const auto& m : modes.modes) fns.push_back(make_basis_function(m));

    int kmax = 0;
    for (int a = 0; a < dim; ++a) kmax = std::max(kmax, modes.cutoffs[a]);

    std::vector<double> r(modes.modes.size(), 0.0);
    const std::size_t total = grid.total_points();
    std::array<TrigTable, 3> tabs;
    for (std::size_t i = 0; i < total; ++i) {
        const Point p = grid.point(i);
        for (int a = 0; a < dim; ++a) tabs[a].build(p[a], kmax);
        const double inv_mu = material.inv_mu_at(p);
        const double mass = material.mass_at(p);
        for (std::size_t m = 0; m < fns.size(); ++m) {
            const BasisFunction& bf = fns[m];
            double s = 0.0;
            for (int c = 0; c < dim; ++c)
                s += mass * samples.values[c][i] *
                     eval_from_tables(bf.value[c], bf.mode.k, dim, tabs);
            for (int c = 0; c < bf.curl_count; ++c)
                s += inv_mu * samples.curls[c][i] *
                     eval_from_tables(bf.curl[c], bf.mode.k, dim, tabs);
            r[m] += s;
        }
    }
    const double w = grid.cell_weight();
    for (std::size_t m = 0; m < r.size(); ++m) r[m] = w * r[m] - rhs.ell[m];
    return r;
}

RhsCoefficients rhs_from_strong_source(const VecFn& source, const ModeSet& modes,
                                       const MidpointGrid& grid) {
    ResidualWorkspace ws(grid, modes);
    const int dim = modes.dim;
    FieldSamples f;
    f.dim = dim;
    f.curl_count = dim == 2 ? 1 : 3;
    for (int c = 0; c < dim; ++c) f.values[c] = Tensor(grid.counts);
    const std::size_t total = grid.total_points();
    for (std::size_t i = 0; i < total; ++i) {
        const auto v = source(grid.point(i));
        for (int c = 0; c < dim; ++c) f.values[c][i] = v[c];
    }
    return ws.rhs_from_samples(f);
}

namespace {

// Exact circle/cell intersection test: the closest and farthest points of an
// axis-aligned cell from the circle center bracket the radius.
bool cell_straddles(const CircleInterface& c, double x0, double x1, double y0, double y1) {
    const double px = std::clamp(c.cx, x0, x1);
    const double py = std::clamp(c.cy, y0, y1);
    const double dmin = std::hypot(px - c.cx, py - c.cy);
    double dmax = 0.0;
    for (double cx : {x0, x1})
        for (double cy : {y0, y1}) dmax = std::max(dmax, std::hypot(cx - c.cx, cy - c.cy));
    return dmin <= c.radius && c.radius <= dmax;
}

}  // namespace

RhsCoefficients rhs_from_exact_weak(const VecFn& exact_value, const VecFn& exact_curl,
                                    const MaterialField& material, const ModeSet& modes,
                                    const MidpointGrid& refined_grid,
                                    const std::optional<CircleInterface>& interface,
                                    int subdivide) {
    ResidualWorkspace ws(refined_grid, modes);
    const int dim = modes.dim;
    const std::size_t total = refined_grid.total_points();
    const double w = refined_grid.cell_weight();

    // b(E*, Phi_k) through the same separable passes as the residual
    std::array<Tensor, 3> tv, tc;
    {
        Tensor weighted(refined_grid.counts);
        for (int c = 0; c < dim; ++c) {
            for (std::size_t i = 0; i < total; ++i) {
                const Point p = refined_grid.point(i);
                weighted[i] = material.mass_at(p) * exact_value(p)[c];
            }
            tv[c] = ws.transform_pattern(weighted, ws.value_pattern(c));
        }
        const int ncurl = dim == 2 ? 1 : 3;
        for (int c = 0; c < ncurl; ++c) {
            for (std::size_t i = 0; i < total; ++i) {
                const Point p = refined_grid.point(i);
                weighted[i] = material.inv_mu_at(p) * exact_curl(p)[c];
            }
            tc[c] = ws.transform_pattern(weighted, ws.curl_pattern(c));
        }
    }

    RhsCoefficients rhs;
    rhs.ell.resize(modes.modes.size());
    const auto& basis = ws.basis();
    for (std::size_t m = 0; m < basis.size(); ++m) {
        const BasisFunction& bf = basis[m];
        double s = 0.0;
        for (int c = 0; c < dim; ++c)
            if (bf.value[c].coeff != 0.0)
                s += bf.value[c].coeff * ws.lookup(tv[c], ws.value_pattern(c), bf.mode.k);
        for (int c = 0; c < bf.curl_count; ++c)
            if (bf.curl[c].coeff != 0.0)
                s += bf.curl[c].coeff * ws.lookup(tc[c], ws.curl_pattern(c), bf.mode.k);
        rhs.ell[m] = w * s;
    }

    if (!interface || dim != 2 || subdivide <= 1) return rhs;

    // Replace the single-midpoint contribution of interface-straddling cells
    // by a subdivide x subdivide sub-midpoint rule.
    const std::size_t nx = refined_grid.counts[0];
    const std::size_t ny = refined_grid.counts[1];
    const double hx = std::numbers::pi / static_cast<double>(nx);
    const double hy = std::numbers::pi / static_cast<double>(ny);

    std::vector<std::pair<Point, double>> corrections;  // (point, weight)
    for (std::size_t i = 0; i < nx; ++i) {
        const double x0 = static_cast<double>(i) * hx;
        for (std::size_t j = 0; j < ny; ++j) {
            const double y0 = static_cast<double>(j) * hy;
            if (!cell_straddles(*interface, x0, x0 + hx, y0, y0 + hy)) continue;
            corrections.push_back({Point{x0 + hx / 2, y0 + hy / 2, 0.0}, -w});
            const double sw = w / static_cast<double>(subdivide * subdivide);
            for (int a = 0; a < subdivide; ++a)
                for (int b = 0; b < subdivide; ++b)
                    corrections.push_back(
                        {Point{x0 + (2 * a + 1) * hx / (2 * subdivide),
                               y0 + (2 * b + 1) * hy / (2 * subdivide), 0.0},
                         sw});
        }
    }

    int kmax = 0;
    for (int a = 0; a < dim; ++a) kmax = std::max(kmax, modes.cutoffs[a]);
    std::array<TrigTable, 3> tabs;
    for (const auto& [p, wt] : corrections) {
        for (int a = 0; a < dim; ++a) tabs[a].build(p[a], kmax);
        const auto v = exact_value(p);
        const auto cu = exact_curl(p);
        const double mass = material.mass_at(p);
        const double inv_mu = material.inv_mu_at(p);
        for (std::size_t m = 0; m < basis.size(); ++m) {
            const BasisFunction& bf = basis[m];
            double s = 0.0;
            for (int c = 0; c < dim; ++c)
                s += mass * v[c] * eval_from_tables(bf.value[c], bf.mode.k, dim, tabs);
            for (int c = 0; c < bf.curl_count; ++c)
                s += inv_mu * cu[c] * eval_from_tables(bf.curl[c], bf.mode.k, dim, tabs);
            rhs.ell[m] += wt * s;
        }
    }
    return rhs;
}

namespace {

template <typename T>
void write_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <typename T>
bool read_le(std::istream& is, T& v) {
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) return false;
    std::memcpy(&v, buf, sizeof(T));
    return true;
}

}  // namespace

void save_rhs_cache(const std::filesystem::path& path, const ModeSet& modes,
                    const RhsCoefficients& rhs) {
    if (rhs.ell.size() != modes.modes.size())
        throw std::invalid_argument("save_rhs_cache: size mismatch");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_rhs_cache: cannot open " + path.string());
    os.write("DFRC", 4);
    write_le<std::uint32_t>(os, 1);
    write_le<std::uint64_t>(os, rhs.ell.size());
    for (std::size_t i = 0; i < rhs.ell.size(); ++i) {
        const auto& m = modes.modes[i];
        write_le<std::uint8_t>(os, static_cast<std::uint8_t>(m.family));
        for (int a = 0; a < 3; ++a) write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.k[a]));
        write_le<double>(os, rhs.ell[i]);
    }
    if (!os) throw std::runtime_error("save_rhs_cache: write failed for " + path.string());
}

std::optional<RhsCoefficients> load_rhs_cache(const std::filesystem::path& path,
                                              const ModeSet& modes) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "DFRC", 4) != 0) return std::nullopt;
    std::uint32_t version = 0;
    std::uint64_t count = 0;
    if (!read_le(is, version) || version != 1) return std::nullopt;
    if (!read_le(is, count) || count != modes.modes.size()) return std::nullopt;
    RhsCoefficients rhs;
    rhs.ell.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint8_t fam = 0;
        std::uint32_t k[3];
        double ell = 0.0;
        if (!read_le(is, fam)) return std::nullopt;
        for (auto& kk : k)
            if (!read_le(is, kk)) return std::nullopt;
        if (!read_le(is, ell)) return std::nullopt;
        const auto& m = modes.modes[i];
        if (fam != static_cast<std::uint8_t>(m.family)) return std::nullopt;
        for (int a = 0; a < 3; ++a)
            if (k[a] != static_cast<std::uint32_t>(m.k[a])) return std::nullopt;
        rhs.ell[i] = ell;
    }
    return rhs;
}

}  // namespace dfr
