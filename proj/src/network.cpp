#include "dfr/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dfr {

namespace {
constexpr double kPi = std::numbers::pi;

double g_poly(double t) { return t * (kPi - t); }
double g_poly_d(double t) { return kPi - 2.0 * t; }

// Explicit 53-bit mapping; std::uniform_real_distribution is
// implementation-defined and would break cross-library reproducibility.
double u64_to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}
}  // namespace

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < W.size(); ++j)
        n += static_cast<std::size_t>(W[j].size()) + static_cast<std::size_t>(b[j].size());
    return n;
}

ParamGrad ParamGrad::zeros_like(const MlpParams& p) {
    ParamGrad g;
    for (std::size_t j = 0; j < p.W.size(); ++j) {
        g.W.push_back(Eigen::MatrixXd::Zero(p.W[j].rows(), p.W[j].cols()));
        g.b.push_back(Eigen::VectorXd::Zero(p.b[j].size()));
    }
    return g;
}

void ParamGrad::add(const ParamGrad& o) {
    for (std::size_t j = 0; j < W.size(); ++j) {
        W[j] += o.W[j];
        b[j] += o.b[j];
    }
}

bool ParamGrad::all_finite() const {
    for (std::size_t j = 0; j < W.size(); ++j)
        if (!W[j].allFinite() || !b[j].allFinite()) return false;
    return true;
}

MlpParams init_params(std::uint64_t seed, const MlpArchitecture& arch) {
    MlpParams p;
    p.arch = arch;
    const auto widths = arch.widths();
    std::mt19937_64 rng(seed);
    for (std::size_t j = 0; j + 1 < widths.size(); ++j) {
        const int fan_in = widths[j], fan_out = widths[j + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd W(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c)
                W(r, c) = limit * (2.0 * u64_to_unit(rng()) - 1.0);
        p.W.push_back(std::move(W));
        p.b.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return p;
}

double CutoffField::value(int comp, const Point& p) const {
    if (dim == 2) return comp == 0 ? g_poly(p[1]) : g_poly(p[0]);
    double v = 1.0;
    for (int a = 0; a < 3; ++a)
        if (a != comp) v *= g_poly(p[a]);
    return v;
}

double CutoffField::derivative(int comp, int axis, const Point& p) const {
    if (dim == 2) {
        if (comp == 0) return axis == 1 ? g_poly_d(p[1]) : 0.0;
        return axis == 0 ? g_poly_d(p[0]) : 0.0;
    }
    if (axis == comp) return 0.0;
    double v = g_poly_d(p[axis]);
    for (int a = 0; a < 3; ++a)
        if (a != comp && a != axis) v *= g_poly(p[a]);
    return v;
}

namespace {

struct ForwardTrace {
    // A[j]: activations after layer j (A[0] = input), J[a][j]: d A[j] / d x_a
    std::vector<Eigen::MatrixXd> A;
    std::vector<std::vector<Eigen::MatrixXd>> J;
};

ForwardTrace run_forward(const MlpParams& p, const Eigen::MatrixXd& X, bool with_jacobian) {
    const int dim = p.arch.dim;
    const auto B = X.cols();
    const std::size_t L = p.layer_count();
    ForwardTrace t;
    t.A.resize(L + 1);
    t.A[0] = X;
    if (with_jacobian) {
        t.J.assign(dim, std::vector<Eigen::MatrixXd>(L + 1));
        for (int a = 0; a < dim; ++a) {
            t.J[a][0] = Eigen::MatrixXd::Zero(dim, B);
            t.J[a][0].row(a).setOnes();
        }
    }
    for (std::size_t j = 0; j < L; ++j) {
        Eigen::MatrixXd Z = (p.W[j] * t.A[j]).colwise() + p.b[j];
        const bool last = j + 1 == L;
        if (last) {
            t.A[j + 1] = std::move(Z);
            if (with_jacobian)
                for (int a = 0; a < dim; ++a) t.J[a][j + 1] = p.W[j] * t.J[a][j];
        } else {
            t.A[j + 1] = Z.array().tanh();
            if (with_jacobian) {
                const Eigen::ArrayXXd D = 1.0 - t.A[j + 1].array().square();
                for (int a = 0; a < dim; ++a)
                    t.J[a][j + 1] = (D * (p.W[j] * t.J[a][j]).array()).matrix();
            }
        }
    }
    return t;
}

void check_points(const Eigen::MatrixXd& X, int dim) {
    if (X.rows() != dim) throw std::invalid_argument("points: row count must equal dimension");
}

}  // namespace

Eigen::MatrixXd forward(const CandidateField& field, const Eigen::MatrixXd& points) {
    const int dim = field.dim();
    check_points(points, dim);
    ForwardTrace t = run_forward(field.params, points, false);
    Eigen::MatrixXd out = t.A.back();
    for (Eigen::Index p = 0; p < points.cols(); ++p) {
        const Point pt{points(0, p), points(1, p), dim == 3 ? points(2, p) : 0.0};
        for (int c = 0; c < dim; ++c) out(c, p) *= field.cutoff.value(c, pt);
    }
    return out;
}

FieldBatch forward_with_curl(const CandidateField& field, const Eigen::MatrixXd& points) {
    const int dim = field.dim();
    check_points(points, dim);
    ForwardTrace t = run_forward(field.params, points, true);
    const auto B = points.cols();
    FieldBatch out;
    out.values.resize(dim, B);
    out.curls.resize(dim == 2 ? 1 : 3, B);
    const auto& N = t.A.back();
    for (Eigen::Index p = 0; p < B; ++p) {
        const Point pt{points(0, p), points(1, p), dim == 3 ? points(2, p) : 0.0};
        double xi[3], dE[3][3];  // dE[c][a] = d E_c / d x_a
        for (int c = 0; c < dim; ++c) {
            xi[c] = field.cutoff.value(c, pt);
            out.values(c, p) = xi[c] * N(c, p);
            for (int a = 0; a < dim; ++a)
                dE[c][a] = field.cutoff.derivative(c, a, pt) * N(c, p) +
                           xi[c] * t.J[a].back()(c, p);
        }
        if (dim == 2) {
            out.curls(0, p) = dE[0][1] - dE[1][0];  // d_y E1 - d_x E2
        } else {
            out.curls(0, p) = dE[2][1] - dE[1][2];
            out.curls(1, p) = dE[0][2] - dE[2][0];
            out.curls(2, p) = dE[1][0] - dE[0][1];
        }
    }
    return out;
}

ParamGrad backprop_params(const CandidateField& field, const Eigen::MatrixXd& points,
                          const Eigen::MatrixXd& value_cotangents,
                          const Eigen::MatrixXd& curl_cotangents) {
    const int dim = field.dim();
    check_points(points, dim);
    const auto B = points.cols();
    const MlpParams& p = field.params;
    const std::size_t L = p.layer_count();

    ForwardTrace t = run_forward(p, points, true);

    // Cotangents of the raw network outputs N and of the Jacobian columns
    // G_a = dN/dx_a, assembled from the xi product rule. In 2D the curl pairs
    // are (comp 0, d/dy, +) and (comp 1, d/dx, -); in 3D the standard three.
    Eigen::MatrixXd ubar = Eigen::MatrixXd::Zero(dim, B);
    std::vector<Eigen::MatrixXd> Gbar(dim, Eigen::MatrixXd::Zero(dim, B));

    struct CurlPair {
        int m, c1, a1, c2, a2;  // curl_m = d_{a1} E_{c1} - d_{a2} E_{c2}
    };
    std::vector<CurlPair> pairs;
    if (dim == 2)
        pairs = {{0, 0, 1, 1, 0}};
    else
        pairs = {{0, 2, 1, 1, 2}, {1, 0, 2, 2, 0}, {2, 1, 0, 0, 1}};

    for (Eigen::Index q = 0; q < B; ++q) {
        const Point pt{points(0, q), points(1, q), dim == 3 ? points(2, q) : 0.0};
        for (int c = 0; c < dim; ++c)
            ubar(c, q) += value_cotangents(c, q) * field.cutoff.value(c, pt);
        for (const auto& cp : pairs) {
            const double cb = curl_cotangents(cp.m, q);
            if (cb == 0.0) continue;
            ubar(cp.c1, q) += cb * field.cutoff.derivative(cp.c1, cp.a1, pt);
            Gbar[cp.a1](cp.c1, q) += cb * field.cutoff.value(cp.c1, pt);
            ubar(cp.c2, q) -= cb * field.cutoff.derivative(cp.c2, cp.a2, pt);
            Gbar[cp.a2](cp.c2, q) -= cb * field.cutoff.value(cp.c2, pt);
        }
    }

    ParamGrad g = ParamGrad::zeros_like(p);
    Eigen::MatrixXd abar = ubar;
    std::vector<Eigen::MatrixXd> Jbar = Gbar;

    for (std::size_t j = L; j-- > 0;) {
        const bool last = j + 1 == L;
        if (last) {
            g.W[j] = abar * t.A[j].transpose();
            for (int a = 0; a < dim; ++a) g.W[j] += Jbar[a] * t.J[a][j].transpose();
            g.b[j] = abar.rowwise().sum();
            abar = p.W[j].transpose() * abar;
            for (int a = 0; a < dim; ++a) Jbar[a] = p.W[j].transpose() * Jbar[a];
        } else {
            const Eigen::ArrayXXd A = t.A[j + 1].array();
            const Eigen::ArrayXXd D = 1.0 - A.square();
            // J[j+1] = D .* P_a with P_a = W_j J_a[j]; D also depends on Z_j.
            Eigen::ArrayXXd dbar = Eigen::ArrayXXd::Zero(A.rows(), A.cols());
            for (int a = 0; a < dim; ++a) {
                const Eigen::ArrayXXd P = (p.W[j] * t.J[a][j]).array();
                dbar += Jbar[a].array() * P;
            }
            const Eigen::MatrixXd zbar =
                (abar.array() * D - 2.0 * A * D * dbar).matrix();
            g.W[j] = zbar * t.A[j].transpose();
            for (int a = 0; a < dim; ++a) {
                const Eigen::MatrixXd Pbar = (Jbar[a].array() * D).matrix();
                g.W[j] += Pbar * t.J[a][j].transpose();
                Jbar[a] = p.W[j].transpose() * Pbar;
            }
            g.b[j] = zbar.rowwise().sum();
            abar = p.W[j].transpose() * zbar;
        }
    }
    return g;
}

namespace {

template <typename T>
void write_le(std::ostream& os, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <typename T>
void read_le(std::istream& is, T& v) {
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw std::runtime_error("checkpoint: unexpected end of file");
    std::memcpy(&v, buf, sizeof(T));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
    const auto widths = params.arch.widths();
    os.write("DFRM", 4);
    write_le<std::uint32_t>(os, 1);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.layer_count()));
    for (int w : widths) write_le<std::uint32_t>(os, static_cast<std::uint32_t>(w));
    for (std::size_t j = 0; j < params.layer_count(); ++j) {
        const auto& W = params.W[j];
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) write_le<double>(os, W(r, c));
        for (Eigen::Index r = 0; r < params.b[j].size(); ++r)
            write_le<double>(os, params.b[j](r));
    }
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "DFRM", 4) != 0)
        throw std::runtime_error("load_checkpoint: bad magic");
    std::uint32_t version = 0, layers = 0;
    read_le(is, version);
    if (version != 1) throw std::runtime_error("load_checkpoint: unsupported version");
    read_le(is, layers);
    if (layers == 0 || layers > 64) throw std::runtime_error("load_checkpoint: bad layer count");
    std::vector<int> widths(layers + 1);
    for (auto& w : widths) {
        std::uint32_t v = 0;
        read_le(is, v);
        if (v == 0 || v > 65536) throw std::runtime_error("load_checkpoint: bad width");
        w = static_cast<int>(v);
    }
    if (widths.front() != widths.back())
        throw std::runtime_error("load_checkpoint: input/output width mismatch");

    MlpParams p;
    p.arch.dim = widths.front();
    p.arch.hidden.assign(widths.begin() + 1, widths.end() - 1);
    for (std::size_t j = 0; j < layers; ++j) {
        Eigen::MatrixXd W(widths[j + 1], widths[j]);
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) read_le(is, W(r, c));
        Eigen::VectorXd b(widths[j + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r) read_le(is, b(r));
        p.W.push_back(std::move(W));
        p.b.push_back(std::move(b));
    }
    return p;
}

}  // namespace dfr
