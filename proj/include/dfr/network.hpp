#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "dfr/grid.hpp"

namespace dfr {

// Fully-connected tanh network, identity output layer. Input and output
// width equal the spatial dimension.
struct MlpArchitecture {
    int dim = 2;
    std::vector<int> hidden{20, 20, 20, 20, 20};  // five hidden layers of 20

    std::vector<int> widths() const {
        std::vector<int> w;
        w.push_back(dim);
        w.insert(w.end(), hidden.begin(), hidden.end());
        w.push_back(dim);
        return w;
    }
};

struct MlpParams {
    MlpArchitecture arch;
    std::vector<Eigen::MatrixXd> W;  // W[j]: widths[j+1] x widths[j]
    std::vector<Eigen::VectorXd> b;

    std::size_t layer_count() const { return W.size(); }
    std::size_t parameter_count() const;
};

// Same shapes as the parameters; accumulated layer by layer.
struct ParamGrad {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;

    static ParamGrad zeros_like(const MlpParams& p);
    void add(const ParamGrad& o);
    bool all_finite() const;
};

// Symmetric fan-scaled uniform weights, zero biases. The u64 -> [0,1)
// mapping is explicit bit arithmetic so identical seeds give bit-identical
// parameters on any standard library.
MlpParams init_params(std::uint64_t seed, const MlpArchitecture& arch);

// Smooth non-trainable diagonal cutoff with g(t) = t(pi - t):
//   2D: xi = diag(g(y), g(x))
//   3D: xi = diag(g(y)g(z), g(x)g(z), g(x)g(y))
// Tangential components of xi*v vanish identically on the boundary.
struct CutoffField {
    int dim = 2;
    double value(int comp, const Point& p) const;
    double derivative(int comp, int axis, const Point& p) const;
};

// Candidate solution E = xi * N(x).
struct CandidateField {
    MlpParams params;
    CutoffField cutoff;

    int dim() const { return params.arch.dim; }
};

// Batched evaluation: columns are points. curls has 1 row in 2D (convention
// curl u = d_y u1 - d_x u2) and 3 rows in 3D.
struct FieldBatch {
    Eigen::MatrixXd values;
    Eigen::MatrixXd curls;
};

Eigen::MatrixXd forward(const CandidateField& field, const Eigen::MatrixXd& points);
FieldBatch forward_with_curl(const CandidateField& field, const Eigen::MatrixXd& points);

// Exact reverse-mode gradient of sum_p [vbar(:,p).E(p) + cbar(:,p).curlE(p)]
// with respect to every weight and bias. Differentiates through the
// forward-mode input Jacobian, so curl cotangents are handled exactly.
ParamGrad backprop_params(const CandidateField& field, const Eigen::MatrixXd& points,
                          const Eigen::MatrixXd& value_cotangents,
                          const Eigen::MatrixXd& curl_cotangents);

// Checkpoint file, binary little-endian:
//   magic "DFRM", version u32, layer count u32, widths u32[layer_count+1],
//   then per layer: W row-major f64, b f64.
void save_checkpoint(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_checkpoint(const std::filesystem::path& path);

}  // namespace dfr
