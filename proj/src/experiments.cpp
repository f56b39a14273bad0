#include "dfr/experiments.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dfr/pipeline.hpp"

namespace dfr {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

// Case 2 geometry: Omega_0 = { f_+ < 1 }, f_+ = (x-pi/2)^2 + (y-pi/2)^2.
// Points on the circle itself take the outside branch.
double f_plus(const Point& p) {
    const double u = p[0] - kHalfPi, v = p[1] - kHalfPi;
    return u * u + v * v;
}
double f_minus(const Point& p) {
    const double u = p[0] - kHalfPi, v = p[1] - kHalfPi;
    return u * u - v * v;
}
bool inside_omega0(const Point& p) { return f_plus(p) < 1.0; }

// Case 2 parameters as printed: mu1=3, mu2=1, eps1=1, eps2=3, k1=1, k2=35, r=6
constexpr double kMu1 = 3.0, kMu2 = 1.0, kEps1 = 1.0, kEps2 = 3.0;
constexpr double kK1 = 1.0, kK2 = 35.0, kR = 6.0;

std::array<double, 3> case2_value(const Point& p) {
    const double u = p[0] - kHalfPi, v = p[1] - kHalfPi;
    const double fm = f_minus(p);
    const double a = inside_omega0(p) ? -kMu1 * kK1 * (1.0 - fm)
                                      : -kMu2 * kK2 * (1.0 - fm) * (kR * kR - fm);
    return {a * v, a * u, 0.0};
}

std::array<double, 3> case2_curl(const Point& p) {
    const double fp = f_plus(p), fm = f_minus(p);
    const double c = inside_omega0(p) ? -2.0 * kMu1 * kK1 * fp
                                      : 2.0 * kMu2 * kK2 * fp * (2.0 * fm - (1.0 + kR * kR));
    return {c, 0.0, 0.0};
}

std::array<double, 3> case1_value(const Point& p) {
    const double x = p[0], y = p[1];
    return {x * y * (y - kPi), x * y * (x - kPi), 0.0};
}

std::array<double, 3> case1_curl(const Point& p) {
    return {kPi * (p[1] - p[0]), 0.0, 0.0};
}

std::array<double, 3> case1_source(const Point& p) {
    // curl* curl E* + E* with curl E* = pi (y - x)
    const auto e = case1_value(p);
    return {e[0] - kPi, e[1] - kPi, 0.0};
}

constexpr double kOmega3 = 1.5;

std::array<double, 3> case3_value(const Point& p) {
    const double x = p[0], y = p[1], z = p[2];
    return {std::sin(y) * std::sin(z) * std::sin(kOmega3 * x),
            std::sin(x) * std::sin(z) * std::sin(kOmega3 * y),
            std::sin(x) * std::sin(y) * std::sin(kOmega3 * z)};
}

std::array<double, 3> case3_curl(const Point& p) {
    const double x = p[0], y = p[1], z = p[2];
    const double w = kOmega3;
    return {std::sin(x) * std::cos(y) * std::sin(w * z) - std::sin(x) * std::cos(z) * std::sin(w * y),
            std::sin(y) * std::cos(z) * std::sin(w * x) - std::cos(x) * std::sin(y) * std::sin(w * z),
            std::cos(x) * std::sin(z) * std::sin(w * y) - std::cos(y) * std::sin(z) * std::sin(w * x)};
}

std::array<double, 3> case3_source(const Point& p) {
    // curl curl E* - omega^2 E*, componentwise
    // (2 - w^2) sin(x_j) sin(x_k) sin(w x_i) + w cos(x_i) [sin(x_j) cos(w x_k) + sin(x_k) cos(w x_j)]
    const double w = kOmega3;
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const double xi = p[i], xj = p[j], xk = p[k];
        out[i] = (2.0 - w * w) * std::sin(xj) * std::sin(xk) * std::sin(w * xi) +
                 w * std::cos(xi) *
                     (std::sin(xj) * std::cos(w * xk) + std::sin(xk) * std::cos(w * xj));
    }
    return out;
}

double case2_mu(const Point& p) { return inside_omega0(p) ? kMu1 : kMu2; }
double case2_eps(const Point& p) { return inside_omega0(p) ? kEps1 : kEps2; }
double unit_coeff(const Point&) { return 1.0; }

CaseSpec build_case(CaseId id) {
    CaseSpec cs;
    cs.id = id;
    switch (id) {
        case CaseId::Case1:
            cs.name = "case1";
            cs.dim = 2;
            cs.coercive = true;
            cs.omega = 0.0;
            cs.mu = unit_coeff;
            cs.eps = unit_coeff;
            cs.exact_value = case1_value;
            cs.exact_curl = case1_curl;
            cs.strong_source = case1_source;
            cs.rhs = RhsConstruction::StrongSource;
            cs.equiv_gamma = 1.0;
            cs.equiv_M = 1.0;
            cs.defaults = {100, 117, 100, 10000};
            break;
        case CaseId::Case21:
        case CaseId::Case21Under:
            cs.name = id == CaseId::Case21 ? "case2_1" : "case2_1_underintegrated";
            cs.dim = 2;
            cs.coercive = true;
            cs.omega = 0.0;
            cs.mu = case2_mu;
            cs.eps = case2_eps;
            cs.exact_value = case2_value;
            cs.exact_curl = case2_curl;
            cs.rhs = RhsConstruction::WeakRefined;
            cs.interface = CircleInterface{kHalfPi, kHalfPi, 1.0};
            cs.equiv_gamma = 1.0 / 3.0;
            cs.equiv_M = 3.0;
            cs.defaults = id == CaseId::Case21 ? CaseDefaults{200, 234, 150, 10000}
                                               : CaseDefaults{100, 120, 100, 5000};
            break;
        case CaseId::Case22:
            cs.name = "case2_2";
            cs.dim = 2;
            cs.coercive = false;
            cs.omega = 1.25;
            cs.mu = case2_mu;
            cs.eps = case2_eps;
            cs.exact_value = case2_value;
            cs.exact_curl = case2_curl;
            cs.rhs = RhsConstruction::WeakRefined;
            cs.interface = CircleInterface{kHalfPi, kHalfPi, 1.0};
            cs.equiv_gamma = 0.0;
            cs.equiv_M = 0.0;
            cs.defaults = {200, 234, 150, 10000};
            break;
        case CaseId::Case3:
            cs.name = "case3";
            cs.dim = 3;
            cs.coercive = false;
            cs.omega = kOmega3;
            cs.mu = unit_coeff;
            cs.eps = unit_coeff;
            cs.exact_value = case3_value;
            cs.exact_curl = case3_curl;
            cs.strong_source = case3_source;
            cs.rhs = RhsConstruction::StrongSource;
            cs.equiv_gamma = 0.0;
            cs.equiv_M = 0.0;
            cs.defaults = {50, 60, 50, 100000};
            break;
    }
    return cs;
}

}  // namespace

MaterialField CaseSpec::material() const {
    MaterialField m;
    m.mu = mu;
    m.eps = eps;
    m.omega = omega;
    m.coercive = coercive;
    return m;
}

const CaseSpec& get_case(CaseId id) {
    static const CaseSpec c1 = build_case(CaseId::Case1);
    static const CaseSpec c21 = build_case(CaseId::Case21);
    static const CaseSpec c22 = build_case(CaseId::Case22);
    static const CaseSpec c3 = build_case(CaseId::Case3);
    static const CaseSpec c21u = build_case(CaseId::Case21Under);
    switch (id) {
        case CaseId::Case1: return c1;
        case CaseId::Case21: return c21;
        case CaseId::Case22: return c22;
        case CaseId::Case3: return c3;
        case CaseId::Case21Under: return c21u;
    }
    throw std::logic_error("get_case: unknown id");
}

std::optional<CaseId> case_from_name(std::string_view name) {
    if (name == "case1") return CaseId::Case1;
    if (name == "case2_1") return CaseId::Case21;
    if (name == "case2_2") return CaseId::Case22;
    if (name == "case3") return CaseId::Case3;
    if (name == "case2_1_underintegrated") return CaseId::Case21Under;
    return std::nullopt;
}

const std::vector<std::string>& case_names() {
    static const std::vector<std::string> names{"case1", "case2_1", "case2_2", "case3",
                                                "case2_1_underintegrated"};
    return names;
}

double hcurl_norm(const FieldSamples& f, const MidpointGrid& grid) {
    double s = 0.0;
    const std::size_t total = grid.total_points();
    for (int c = 0; c < f.dim; ++c)
        for (std::size_t i = 0; i < total; ++i) s += f.values[c][i] * f.values[c][i];
    for (int c = 0; c < f.curl_count; ++c)
        for (std::size_t i = 0; i < total; ++i) s += f.curls[c][i] * f.curls[c][i];
    return std::sqrt(grid.cell_weight() * s);
}

double exact_hcurl_norm(const CaseSpec& cs, const MidpointGrid& grid) {
    return hcurl_norm(sample_field(cs.exact_value, cs.exact_curl, grid), grid);
}

double error_hcurl_norm(const FieldSamples& f, const CaseSpec& cs, const MidpointGrid& grid) {
    const std::size_t total = grid.total_points();
    double s = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        const Point p = grid.point(i);
        const auto ev = cs.exact_value(p);
        const auto ec = cs.exact_curl(p);
        for (int c = 0; c < f.dim; ++c) {
            const double d = f.values[c][i] - ev[c];
            s += d * d;
        }
        for (int c = 0; c < f.curl_count; ++c) {
            const double d = f.curls[c][i] - ec[c];
            s += d * d;
        }
    }
    return std::sqrt(grid.cell_weight() * s);
}

double relative_error(const CandidateField& field, const CaseSpec& cs, const MidpointGrid& grid) {
    const FieldSamples f = sample_candidate(field, grid);
    const double denom = exact_hcurl_norm(cs, grid);
    if (denom == 0.0) throw std::runtime_error("relative_error: exact solution has zero norm");
    return error_hcurl_norm(f, cs, grid) / denom;
}

BandReport equivalence_band_check(const CaseSpec& cs, const std::vector<CandidateField>& candidates,
                                  const MidpointGrid& loss_grid, const ModeSet& modes,
                                  const MidpointGrid& error_grid, double delta) {
    if (!cs.coercive || cs.equiv_gamma <= 0.0)
        throw std::invalid_argument(
            "equivalence_band_check: requires a coercive case with known constants");
    const LossEvaluator eval = make_loss_evaluator(cs, loss_grid, modes);

    BandReport rep;
    rep.lo = cs.equiv_gamma - delta;
    rep.hi = cs.equiv_M + delta;
    for (const auto& cand : candidates) {
        BandEntry e;
        const FieldSamples on_loss_grid = sample_candidate(cand, loss_grid);
        e.loss = eval.loss_of_samples(on_loss_grid).loss;
        e.err = error_hcurl_norm(sample_candidate(cand, error_grid), cs, error_grid);
        if (e.loss < 1e-8 && e.err < 1e-8) {
            e.skipped = true;  // degenerate 0/0 ratio
            rep.entries.push_back(e);
            continue;
        }
        e.ratio = e.loss / e.err;
        e.in_band = e.ratio >= rep.lo && e.ratio <= rep.hi;
        if (!e.in_band) rep.all_in_band = false;
        rep.entries.push_back(e);
    }
    return rep;
}

CorrelationReport correlation_report(const std::vector<TrainingRecord>& records) {
    if (records.size() < 100)
        throw std::invalid_argument("correlation_report: need at least 100 records");
    CorrelationReport rep;
    rep.pairs.reserve(records.size());
    for (const auto& r : records) rep.pairs.emplace_back(r.loss_train, r.rel_error);

    // log-log least squares over the final half of training
    const std::size_t begin = records.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = begin; i < records.size(); ++i) {
        const double l = records[i].loss_train, e = records[i].rel_error;
        if (l <= 0.0 || e <= 0.0) continue;
        const double x = std::log(l), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    rep.fit_count = n;
    if (n >= 2) {
        const double var = sxx - sx * sx / static_cast<double>(n);
        if (var > 1e-12) {
            rep.slope = (sxy - sx * sy / static_cast<double>(n)) / var;
            rep.slope_valid = true;
        }
    }
    return rep;
}

}  // namespace dfr
