#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dfr/grid.hpp"

namespace dfr {

// The orthonormal basis of H0(curl) on [0,pi]^n splits along the Helmholtz
// decomposition: gradient families span grad H1_0, the rest span X0.
enum class BasisFamily : std::uint8_t {
    Grad2D = 0,
    Rot2D = 1,
    Grad3D = 2,
    Tm3D = 3,   // distinguished axis x
    Te3D = 4,
};

const char* family_name(BasisFamily f);
bool family_is_gradient(BasisFamily f);
int family_dim(BasisFamily f);

struct ModeIndex {
    BasisFamily family;
    std::array<int, 3> k;  // k[2] unused in 2D

    bool operator==(const ModeIndex&) const = default;
};

// Validity predicates per family:
//   Grad2D/Grad3D: all k_i >= 1 (any zero index gives the zero function)
//   Rot2D:         k != (0,0)
//   Tm3D:          k1 >= 1 and (k2,k3) != (0,0)
//   Te3D:          k2 >= 1 and k3 >= 1
bool mode_is_valid(const ModeIndex& m);

enum class Trig : std::uint8_t { Sin, Cos };

// One vector component: coeff * prod_a trig_a(k_a x_a). Normalization is
// derived from the analytic L2 integrals of these factors, never transcribed,
// then asserted to give unit H(curl) norm by quadrature in the tests.
struct SeparableComponent {
    double coeff = 0.0;
    std::array<Trig, 3> trig{Trig::Cos, Trig::Cos, Trig::Cos};
};

struct BasisFunction {
    ModeIndex mode;
    int dim;
    double lambda;  // weak eigenvalue: 1 for gradient families, 1 + |k|^2 on X0
    std::array<SeparableComponent, 3> value;  // dim components
    std::array<SeparableComponent, 3> curl;   // 1 component in 2D, 3 in 3D
    int curl_count;

    std::array<double, 3> evaluate(const Point& p) const;
    // 2D convention: curl(u) = d_y u1 - d_x u2. Result in [0]; 3D fills all.
    std::array<double, 3> evaluate_curl(const Point& p) const;
};

BasisFunction make_basis_function(const ModeIndex& m);

// All valid modes with k_i <= cutoff_i, gradient family first, then X0
// families, lexicographic in k within each family.
struct ModeSet {
    int dim = 2;
    std::array<int, 3> cutoffs{0, 0, 0};
    std::vector<ModeIndex> modes;
    std::size_t grad_count = 0;  // modes[0..grad_count) are the gradient family
};

ModeSet enumerate_modes(int dim, const std::array<int, 3>& cutoffs);

// Midpoint quadrature of int curl(a).curl(b) + a.b dx.
double hcurl_inner_product(const BasisFunction& a, const BasisFunction& b,
                           const MidpointGrid& grid);

struct GramReport {
    Eigen::MatrixXd gram;
    double max_offdiag = 0.0;
    double max_diag_dev = 0.0;
    bool under_resolved = false;  // grid < 2x max wavenumber on some axis
    std::string summary() const;
};

GramReport gram_matrix(const ModeSet& modes, const MidpointGrid& grid);

// Analytic partial derivative of a separable trig component along one axis;
// the building block for the eigen-relation and divergence checks.
SeparableComponent differentiate(const SeparableComponent& c, const std::array<int, 3>& k,
                                 std::size_t axis);

double evaluate_component(const SeparableComponent& c, const std::array<int, 3>& k, int dim,
                          const Point& p);

}  // namespace dfr
