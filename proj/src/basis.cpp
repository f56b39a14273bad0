#include "dfr/basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dfr/parallel.hpp"

namespace dfr {

namespace {
constexpr double kPi = std::numbers::pi;

// int_0^pi sin(kx)^2 dx and int_0^pi cos(kx)^2 dx
double axis_l2(Trig t, int k) {
    if (t == Trig::Sin) return k >= 1 ? kPi / 2.0 : 0.0;
    return k >= 1 ? kPi / 2.0 : kPi;
}

// Components whose sin factor carries wavenumber 0 vanish identically.
void canonicalize(SeparableComponent& c, const std::array<int, 3>& k, int dim) {
    for (int a = 0; a < dim; ++a)
        if (c.trig[a] == Trig::Sin && k[a] == 0) c.coeff = 0.0;
}

constexpr std::array<Trig, 3> kCSS{Trig::Cos, Trig::Sin, Trig::Sin};
constexpr std::array<Trig, 3> kSCS{Trig::Sin, Trig::Cos, Trig::Sin};
constexpr std::array<Trig, 3> kSSC{Trig::Sin, Trig::Sin, Trig::Cos};
constexpr std::array<Trig, 3> kSCC{Trig::Sin, Trig::Cos, Trig::Cos};
constexpr std::array<Trig, 3> kCSC{Trig::Cos, Trig::Sin, Trig::Cos};
constexpr std::array<Trig, 3> kCCS{Trig::Cos, Trig::Cos, Trig::Sin};
constexpr std::array<Trig, 3> kCS{Trig::Cos, Trig::Sin, Trig::Cos};
constexpr std::array<Trig, 3> kSC{Trig::Sin, Trig::Cos, Trig::Cos};
constexpr std::array<Trig, 3> kCC{Trig::Cos, Trig::Cos, Trig::Cos};
}  // namespace

const char* family_name(BasisFamily f) {
    switch (f) {
        case BasisFamily::Grad2D: return "grad2d";
        case BasisFamily::Rot2D: return "rot2d";
        case BasisFamily::Grad3D: return "grad3d";
        case BasisFamily::Tm3D: return "tm3d";
        case BasisFamily::Te3D: return "te3d";
    }
    return "?";
}

bool family_is_gradient(BasisFamily f) {
    return f == BasisFamily::Grad2D || f == BasisFamily::Grad3D;
}

int family_dim(BasisFamily f) {
    return (f == BasisFamily::Grad2D || f == BasisFamily::Rot2D) ? 2 : 3;
}

bool mode_is_valid(const ModeIndex& m) {
    const auto& k = m.k;
    for (int a = 0; a < family_dim(m.family); ++a)
        if (k[a] < 0) return false;
    switch (m.family) {
        case BasisFamily::Grad2D:
            return k[0] >= 1 && k[1] >= 1;
        case BasisFamily::Rot2D:
            return !(k[0] == 0 && k[1] == 0);
        case BasisFamily::Grad3D:
            return k[0] >= 1 && k[1] >= 1 && k[2] >= 1;
        case BasisFamily::Tm3D:
            return k[0] >= 1 && !(k[1] == 0 && k[2] == 0);
        case BasisFamily::Te3D:
            return k[1] >= 1 && k[2] >= 1;
    }
    return false;
}

BasisFunction make_basis_function(const ModeIndex& m) {
    if (!mode_is_valid(m)) throw std::invalid_argument("make_basis_function: invalid mode index");
    const auto& k = m.k;
    const double k1 = k[0], k2 = k[1], k3 = k[2];
    const double kk = k1 * k1 + k2 * k2 + (family_dim(m.family) == 3 ? k3 * k3 : 0.0);

    BasisFunction b;
    b.mode = m;
    b.dim = family_dim(m.family);
    b.curl_count = b.dim == 2 ? 1 : 3;
    b.lambda = family_is_gradient(m.family) ? 1.0 : 1.0 + kk;

    switch (m.family) {
        case BasisFamily::Grad2D:
            // grad of sin(k1 x) sin(k2 y); curl of a gradient vanishes
            b.value[0] = {k1, kCS};
            b.value[1] = {k2, kSC};
            b.curl[0] = {0.0, kCC};
            break;
        case BasisFamily::Rot2D:
            // curl*(cos(k1 x) cos(k2 y)) = (-d_y, d_x); curl curl* = |k|^2 cos cos
            b.value[0] = {k2, kCS};
            b.value[1] = {-k1, kSC};
            b.curl[0] = {kk, kCC};
            break;
        case BasisFamily::Grad3D:
            b.value[0] = {k1, kCSS};
            b.value[1] = {k2, kSCS};
            b.value[2] = {k3, kSSC};
            b.curl[0] = {0.0, kSCC};
            b.curl[1] = {0.0, kCSC};
            b.curl[2] = {0.0, kCCS};
            break;
        case BasisFamily::Tm3D:
            // curl(p e_x) with p = sin(k1 x) cos(k2 y) cos(k3 z)
            b.value[0] = {0.0, kCSS};
            b.value[1] = {-k3, kSCS};
            b.value[2] = {k2, kSSC};
            // curl curl(p e_x) = grad(d_x p) + |k|^2 p e_x
            b.curl[0] = {k2 * k2 + k3 * k3, kSCC};
            b.curl[1] = {-k1 * k2, kCSC};
            b.curl[2] = {-k1 * k3, kCCS};
            break;
        case BasisFamily::Te3D:
            // curl curl(q e_x) with q = cos(k1 x) sin(k2 y) sin(k3 z)
            b.value[0] = {k2 * k2 + k3 * k3, kCSS};
            b.value[1] = {-k1 * k2, kSCS};
            b.value[2] = {-k1 * k3, kSSC};
            // curl of that = |k|^2 curl(q e_x)
            b.curl[0] = {0.0, kSCC};
            b.curl[1] = {kk * k3, kCSC};
            b.curl[2] = {-kk * k2, kCCS};
            break;
    }

    for (int c = 0; c < b.dim; ++c) canonicalize(b.value[c], k, b.dim);
    for (int c = 0; c < b.curl_count; ++c) canonicalize(b.curl[c], k, b.dim);

    double norm_sq = 0.0;
    auto add = [&](const SeparableComponent& c) {
        if (c.coeff == 0.0) return;
        double t = c.coeff * c.coeff;
        for (int a = 0; a < b.dim; ++a) t *= axis_l2(c.trig[a], k[a]);
        norm_sq += t;
    };
    for (int c = 0; c < b.dim; ++c) add(b.value[c]);
    for (int c = 0; c < b.curl_count; ++c) add(b.curl[c]);

    const double inv = 1.0 / std::sqrt(norm_sq);
    for (int c = 0; c < b.dim; ++c) b.value[c].coeff *= inv;
    for (int c = 0; c < b.curl_count; ++c) b.curl[c].coeff *= inv;
    return b;
}

double evaluate_component(const SeparableComponent& c, const std::array<int, 3>& k, int dim,
                          const Point& p) {
    if (c.coeff == 0.0) return 0.0;
    double v = c.coeff;
    for (int a = 0; a < dim; ++a) {
        const double arg = k[a] * p[a];
        v *= c.trig[a] == Trig::Sin ? std::sin(arg) : std::cos(arg);
    }
    return v;
}

SeparableComponent differentiate(const SeparableComponent& c, const std::array<int, 3>& k,
                                 std::size_t axis) {
    SeparableComponent d = c;
    if (c.trig[axis] == Trig::Sin) {
        d.trig[axis] = Trig::Cos;
        d.coeff = c.coeff * k[axis];
    } else {
        d.trig[axis] = Trig::Sin;
        d.coeff = -c.coeff * k[axis];
    }
    return d;
}

namespace {
void check_in_domain(const Point& p, int dim) {
    for (int a = 0; a < dim; ++a)
        if (p[a] < 0.0 || p[a] > kPi)
            throw std::domain_error("basis evaluation outside [0,pi]^n");
}
}  // namespace

std::array<double, 3> BasisFunction::evaluate(const Point& p) const {
    check_in_domain(p, dim);
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int c = 0; c < dim; ++c) out[c] = evaluate_component(value[c], mode.k, dim, p);
    return out;
}

std::array<double, 3> BasisFunction::evaluate_curl(const Point& p) const {
    check_in_domain(p, dim);
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int c = 0; c < curl_count; ++c) out[c] = evaluate_component(curl[c], mode.k, dim, p);
    return out;
}

ModeSet enumerate_modes(int dim, const std::array<int, 3>& cutoffs) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("enumerate_modes: dim must be 2 or 3");
    for (int a = 0; a < dim; ++a)
        if (cutoffs[a] < 1) throw std::invalid_argument("enumerate_modes: cutoffs must be >= 1");

    ModeSet set;
    set.dim = dim;
    set.cutoffs = cutoffs;
    auto push_family = [&](BasisFamily fam, const std::array<int, 3>& lo) {
        std::array<int, 3> k{0, 0, 0};
        if (dim == 2) {
            for (k[0] = lo[0]; k[0] <= cutoffs[0]; ++k[0])
                for (k[1] = lo[1]; k[1] <= cutoffs[1]; ++k[1]) {
                    ModeIndex m{fam, k};
                    if (mode_is_valid(m)) set.modes.push_back(m);
                }
        } else {
            for (k[0] = lo[0]; k[0] <= cutoffs[0]; ++k[0])
                for (k[1] = lo[1]; k[1] <= cutoffs[1]; ++k[1])
                    for (k[2] = lo[2]; k[2] <= cutoffs[2]; ++k[2]) {
                        ModeIndex m{fam, k};
                        if (mode_is_valid(m)) set.modes.push_back(m);
                    }
        }
    };

    if (dim == 2) {
        push_family(BasisFamily::Grad2D, {1, 1, 0});
        set.grad_count = set.modes.size();
        push_family(BasisFamily::Rot2D, {0, 0, 0});
    } else {
        push_family(BasisFamily::Grad3D, {1, 1, 1});
        set.grad_count = set.modes.size();
        push_family(BasisFamily::Tm3D, {1, 0, 0});
        push_family(BasisFamily::Te3D, {0, 1, 1});
    }
    return set;
}

double hcurl_inner_product(const BasisFunction& a, const BasisFunction& b,
                           const MidpointGrid& grid) {
    if (a.dim != b.dim || static_cast<std::size_t>(a.dim) != grid.dim())
        throw std::invalid_argument("hcurl_inner_product: dimension mismatch");
    const std::size_t total = grid.total_points();
    double sum = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        const Point p = grid.point(i);
        const auto va = a.evaluate(p);
        const auto vb = b.evaluate(p);
        const auto ca = a.evaluate_curl(p);
        const auto cb = b.evaluate_curl(p);
        double s = 0.0;
        for (int c = 0; c < a.dim; ++c) s += va[c] * vb[c];
        for (int c = 0; c < a.curl_count; ++c) s += ca[c] * cb[c];
        sum += s;
    }
    return sum * grid.cell_weight();
}

GramReport gram_matrix(const ModeSet& modes, const MidpointGrid& grid) {
    const std::size_t nm = modes.modes.size();
    const std::size_t dim = grid.dim();
    GramReport rep;
    rep.gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nm), static_cast<Eigen::Index>(nm));

    int max_wav = 0;
    for (int a = 0; a < modes.dim; ++a) max_wav = std::max(max_wav, modes.cutoffs[a]);
    for (std::size_t a = 0; a < dim; ++a)
        if (grid.counts[a] < 2 * static_cast<std::size_t>(max_wav)) rep.under_resolved = true;

    std::vector<BasisFunction> fns;
    fns.reserve(nm);
    for (const auto& m : modes.modes) fns.push_back(make_basis_function(m));

    const int ncomp = static_cast<int>(dim) + (dim == 2 ? 1 : 3);
    const std::size_t total = grid.total_points();
    const std::size_t chunk = 4096;
    const std::size_t nchunks = (total + chunk - 1) / chunk;

    std::vector<Eigen::MatrixXd> partial(nchunks);
    parallel_chunks(total, chunk, [&](std::size_t ci, std::size_t begin, std::size_t end) {
        Eigen::MatrixXd block(static_cast<Eigen::Index>(nm),
                              static_cast<Eigen::Index>((end - begin) * ncomp));
        for (std::size_t i = begin; i < end; ++i) {
            const Point p = grid.point(i);
            for (std::size_t f = 0; f < nm; ++f) {
                const auto v = fns[f].evaluate(p);
                const auto c = fns[f].evaluate_curl(p);
                const std::size_t col0 = (i - begin) * ncomp;
                for (std::size_t d = 0; d < dim; ++d)
                    block(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(col0 + d)) = v[d];
                for (int d = 0; d < fns[f].curl_count; ++d)
                    block(static_cast<Eigen::Index>(f),
                          static_cast<Eigen::Index>(col0 + dim + d)) = c[d];
            }
        }
        partial[ci] = block * block.transpose();
    });
    for (const auto& m : partial) rep.gram += m;
    rep.gram *= grid.cell_weight();

    for (std::size_t i = 0; i < nm; ++i)
        for (std::size_t j = 0; j < nm; ++j) {
            const double g = rep.gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (i == j)
                rep.max_diag_dev = std::max(rep.max_diag_dev, std::abs(g - 1.0));
            else
                rep.max_offdiag = std::max(rep.max_offdiag, std::abs(g));
        }
    return rep;
}

std::string GramReport::summary() const {
    std::ostringstream os;
    os << "modes=" << gram.rows() << " max_offdiag=" << max_offdiag
       << " max_diag_dev=" << max_diag_dev
       << (under_resolved ? " WARNING=under-resolved-grid" : "");
    return os.str();
}

}  // namespace dfr
