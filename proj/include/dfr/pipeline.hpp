#pragma once

#include <filesystem>
#include <optional>
#include <utility>

#include "dfr/experiments.hpp"
#include "dfr/network.hpp"
#include "dfr/residual.hpp"

namespace dfr {

// Evaluates the candidate field (values and curls) at every grid node.
// Chunked with a fixed chunk size so results are identical for any worker
// count.
FieldSamples sample_candidate(const CandidateField& field, const MidpointGrid& grid);

// One grid + mode set + material + rhs, with the transform plan and the
// material weight tensors precomputed. Both the training and the validation
// side of a run own one of these.
class LossEvaluator {
public:
    LossEvaluator(MidpointGrid grid, ModeSet modes, MaterialField material, RhsCoefficients rhs);

    const MidpointGrid& grid() const { return ws_.grid(); }
    const ModeSet& mode_set() const { return ws_.mode_set(); }
    const ResidualWorkspace& workspace() const { return ws_; }
    const RhsCoefficients& rhs() const { return rhs_; }

    std::vector<double> residuals_of_samples(const FieldSamples& samples) const;
    LossBreakdown loss_of_samples(const FieldSamples& samples) const;
    LossBreakdown loss(const CandidateField& field) const;

    // Exact reverse-mode gradient of the scalar loss wrt every W_j, b_j.
    std::pair<LossBreakdown, ParamGrad> loss_and_gradient(const CandidateField& field) const;

private:
    ResidualWorkspace ws_;
    MaterialField material_;
    RhsCoefficients rhs_;
    Tensor mass_;    // mass coefficient sampled on the grid
    Tensor inv_mu_;  // 1/mu sampled on the grid
};

// Builds the evaluator for a case on a grid: strong-source cases integrate
// J~ on the grid itself; weak cases integrate b(E*, .) on a refine_factor x
// refined grid with interface-straddling cells subdivided, optionally cached
// to <cache_dir>/<case>_g..._m..._r....dfrc.
LossEvaluator make_loss_evaluator(const CaseSpec& cs, const MidpointGrid& grid,
                                  const ModeSet& modes, int rhs_refine = 4,
                                  const std::optional<std::filesystem::path>& cache_dir = {});

}  // namespace dfr
