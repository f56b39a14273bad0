#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "dfr/basis.hpp"
#include "dfr/grid.hpp"
#include "dfr/tensor.hpp"
#include "dfr/transforms.hpp"

namespace dfr {

using ScalarFn = std::function<double(const Point&)>;
using VecFn = std::function<std::array<double, 3>(const Point&)>;

// Scalar mu, eps and frequency. The coercive experiment forms use a +eps mass
// term instead of -omega^2 eps; the flag selects which bilinear form the
// residual assembles.
struct MaterialField {
    ScalarFn mu;
    ScalarFn eps;
    double omega = 0.0;
    bool coercive = false;

    double inv_mu_at(const Point& p) const;
    double mass_at(const Point& p) const;  // +eps or -omega^2 eps
    void validate() const;                 // omega != 0 required unless coercive
};

// A vector field sampled on a midpoint grid: values and curls, one
// grid-shaped tensor per component.
struct FieldSamples {
    int dim = 2;
    int curl_count = 1;
    std::array<Tensor, 3> values;
    std::array<Tensor, 3> curls;
};

FieldSamples sample_field(const VecFn& value, const VecFn& curl, const MidpointGrid& grid);

struct RhsCoefficients {
    std::vector<double> ell;  // aligned with ModeSet ordering
};

// loss = sqrt(grad_sq + x0_sq), the subspace split of the squared loss.
struct LossBreakdown {
    double loss = 0.0;
    double grad_sq = 0.0;
    double x0_sq = 0.0;
};

LossBreakdown discretized_loss(const std::vector<double>& r, std::size_t grad_count);

// Precomputed transform plan binding one grid to one mode set. The per-mode
// residual integrals become lookups into a fixed set of separable DST/DCT
// passes: per value component c the integrand mass*E_c tested against the
// component's trig pattern, per curl component inv_mu*curl(E) likewise.
class ResidualWorkspace {
public:
    ResidualWorkspace(MidpointGrid grid, ModeSet modes);

    const MidpointGrid& grid() const { return grid_; }
    const ModeSet& mode_set() const { return modes_; }
    const std::vector<BasisFunction>& basis() const { return basis_; }

    // r_k = Q[inv_mu curl(E).curl(Phi_k)] + Q[mass E.Phi_k] - ell_k
    std::vector<double> residual_coefficients(const FieldSamples& samples,
                                              const MaterialField& material,
                                              const RhsCoefficients& rhs) const;

    // ell_k = Q[f.Phi_k] for raw (unweighted) samples f
    RhsCoefficients rhs_from_samples(const FieldSamples& f) const;

    // Per-point sums V_c(x) = sum_k rbar_k Phi_{k,c}(x) and the curl
    // analogue, realized as adjoint separable passes. The reverse-mode hook
    // for the loss gradient.
    FieldSamples basis_weighted_sums(const std::vector<double>& rbar) const;

    Tensor transform_pattern(const Tensor& samples, const std::array<Trig, 3>& pattern) const;
    double lookup(const Tensor& coeffs, const std::array<Trig, 3>& pattern,
                  const std::array<int, 3>& k) const;

    const std::array<Trig, 3>& value_pattern(int comp) const { return value_patterns_[comp]; }
    const std::array<Trig, 3>& curl_pattern(int comp) const { return curl_patterns_[comp]; }

private:
    Tensor adjoint_pattern(const Tensor& spectrum, const std::array<Trig, 3>& pattern) const;

    MidpointGrid grid_;
    ModeSet modes_;
    std::vector<BasisFunction> basis_;
    std::array<std::array<Trig, 3>, 3> value_patterns_{};
    std::array<std::array<Trig, 3>, 3> curl_patterns_{};
    // per axis: partial sin/cos transform rows
    std::array<Eigen::MatrixXd, 3> sin_rows_;
    std::array<Eigen::MatrixXd, 3> cos_rows_;
};

// Nested-loop midpoint quadrature over points x modes. Oracle for the
// transform path; identical contract.
std::vector<double> naive_residual_coefficients(const FieldSamples& samples,
                                                const MaterialField& material,
                                                const RhsCoefficients& rhs, const ModeSet& modes,
                                                const MidpointGrid& grid);

// ell_k = Q[f.Phi_k]; the experiments fold the i*omega factor into a real
// effective source.
RhsCoefficients rhs_from_strong_source(const VecFn& source, const ModeSet& modes,
                                       const MidpointGrid& grid);

struct CircleInterface {
    double cx = 0.0, cy = 0.0, radius = 1.0;
};

// ell_k := b(E*, Phi_k) by high-resolution midpoint quadrature; required when
// the exact solution does not satisfy the strong form. Cells straddling the
// material interface are subdivided `subdivide` times per axis.
RhsCoefficients rhs_from_exact_weak(const VecFn& exact_value, const VecFn& exact_curl,
                                    const MaterialField& material, const ModeSet& modes,
                                    const MidpointGrid& refined_grid,
                                    const std::optional<CircleInterface>& interface = std::nullopt,
                                    int subdivide = 4);

// Cached RHS coefficient file, binary little-endian:
//   magic "DFRC", version u32, mode count u64,
//   then per mode: family u8, k u32[3], ell f64.
void save_rhs_cache(const std::filesystem::path& path, const ModeSet& modes,
                    const RhsCoefficients& rhs);
// Empty optional on missing file or any mismatch with `modes`.
std::optional<RhsCoefficients> load_rhs_cache(const std::filesystem::path& path,
                                              const ModeSet& modes);

}  // namespace dfr
