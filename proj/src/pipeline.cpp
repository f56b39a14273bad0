#include "dfr/pipeline.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dfr/parallel.hpp"

namespace dfr {

namespace {
constexpr std::size_t kPointChunk = 2048;

Eigen::MatrixXd chunk_points(const MidpointGrid& grid, std::size_t begin, std::size_t end) {
    const int dim = static_cast<int>(grid.dim());
    Eigen::MatrixXd pts(dim, static_cast<Eigen::Index>(end - begin));
    for (std::size_t i = begin; i < end; ++i) {
        const Point p = grid.point(i);
        for (int a = 0; a < dim; ++a) pts(a, static_cast<Eigen::Index>(i - begin)) = p[a];
    }
    return pts;
}
}  // namespace

FieldSamples sample_candidate(const CandidateField& field, const MidpointGrid& grid) {
    const int dim = static_cast<int>(grid.dim());
    if (field.dim() != dim)
        throw std::invalid_argument("sample_candidate: field/grid dimension mismatch");
    FieldSamples out;
    out.dim = dim;
    out.curl_count = dim == 2 ? 1 : 3;
    for (int c = 0; c < dim; ++c) out.values[c] = Tensor(grid.counts);
    for (int c = 0; c < out.curl_count; ++c) out.curls[c] = Tensor(grid.counts);

    parallel_chunks(grid.total_points(), kPointChunk,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        const Eigen::MatrixXd pts = chunk_points(grid, begin, end);
                        const FieldBatch batch = forward_with_curl(field, pts);
                        for (std::size_t i = begin; i < end; ++i) {
                            const auto col = static_cast<Eigen::Index>(i - begin);
                            for (int c = 0; c < dim; ++c) out.values[c][i] = batch.values(c, col);
                            for (int c = 0; c < out.curl_count; ++c)
                                out.curls[c][i] = batch.curls(c, col);
                        }
                    });
    return out;
}

LossEvaluator::LossEvaluator(MidpointGrid grid, ModeSet modes, MaterialField material,
                             RhsCoefficients rhs)
    : ws_(std::move(grid), std::move(modes)),
      material_(std::move(material)),
      rhs_(std::move(rhs)),
      mass_(ws_.grid().counts),
      inv_mu_(ws_.grid().counts) {
    material_.validate();
    if (rhs_.ell.size() != ws_.mode_set().modes.size())
        throw std::invalid_argument("LossEvaluator: rhs length does not match mode set");
    const std::size_t total = ws_.grid().total_points();
    for (std::size_t i = 0; i < total; ++i) {
        const Point p = ws_.grid().point(i);
        mass_[i] = material_.mass_at(p);
        inv_mu_[i] = material_.inv_mu_at(p);
    }
}

std::vector<double> LossEvaluator::residuals_of_samples(const FieldSamples& samples) const {
    const int dim = ws_.mode_set().dim;
    if (samples.dim != dim)
        throw std::invalid_argument("residuals_of_samples: dimension mismatch");

    const std::size_t total = ws_.grid().total_points();
    std::array<Tensor, 3> tv, tc;
    Tensor weighted(ws_.grid().counts);
    for (int c = 0; c < dim; ++c) {
        for (std::size_t i = 0; i < total; ++i) weighted[i] = mass_[i] * samples.values[c][i];
        tv[c] = ws_.transform_pattern(weighted, ws_.value_pattern(c));
    }
    for (int c = 0; c < samples.curl_count; ++c) {
        for (std::size_t i = 0; i < total; ++i) weighted[i] = inv_mu_[i] * samples.curls[c][i];
        tc[c] = ws_.transform_pattern(weighted, ws_.curl_pattern(c));
    }

    const double w = ws_.grid().cell_weight();
    const auto& basis = ws_.basis();
    std::vector<double> r(basis.size());
    for (std::size_t m = 0; m < basis.size(); ++m) {
        const BasisFunction& bf = basis[m];
        double s = 0.0;
        for (int c = 0; c < dim; ++c)
            if (bf.value[c].coeff != 0.0)
                s += bf.value[c].coeff * ws_.lookup(tv[c], ws_.value_pattern(c), bf.mode.k);
        for (int c = 0; c < bf.curl_count; ++c)
            if (bf.curl[c].coeff != 0.0)
                s += bf.curl[c].coeff * ws_.lookup(tc[c], ws_.curl_pattern(c), bf.mode.k);
        r[m] = w * s - rhs_.ell[m];
    }
    return r;
}

LossBreakdown LossEvaluator::loss_of_samples(const FieldSamples& samples) const {
    return discretized_loss(residuals_of_samples(samples), ws_.mode_set().grad_count);
}

LossBreakdown LossEvaluator::loss(const CandidateField& field) const {
    return loss_of_samples(sample_candidate(field, ws_.grid()));
}

std::pair<LossBreakdown, ParamGrad> LossEvaluator::loss_and_gradient(
    const CandidateField& field) const {
    const MidpointGrid& grid = ws_.grid();
    const int dim = ws_.mode_set().dim;
    const FieldSamples samples = sample_candidate(field, grid);
    const std::vector<double> r = residuals_of_samples(samples);
    const LossBreakdown breakdown = discretized_loss(r, ws_.mode_set().grad_count);

    ParamGrad grad = ParamGrad::zeros_like(field.params);
    if (!(breakdown.loss > 0.0) || !std::isfinite(breakdown.loss))
        return {breakdown, grad};  // gradient of ||r||_2 at r=0 taken as 0

    std::vector<double> rbar(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) rbar[i] = r[i] / breakdown.loss;

    // d loss / d samples via the adjoint separable passes
    const FieldSamples sums = ws_.basis_weighted_sums(rbar);
    const double w = grid.cell_weight();
    const std::size_t total = grid.total_points();
    const int ncurl = dim == 2 ? 1 : 3;

    const std::size_t nchunks = (total + kPointChunk - 1) / kPointChunk;
    std::vector<ParamGrad> partial(nchunks);
    parallel_chunks(total, kPointChunk, [&](std::size_t ci, std::size_t begin, std::size_t end) {
        const auto B = static_cast<Eigen::Index>(end - begin);
        const Eigen::MatrixXd pts = chunk_points(grid, begin, end);
        Eigen::MatrixXd vbar(dim, B), cbar(ncurl, B);
        for (std::size_t i = begin; i < end; ++i) {
            const auto col = static_cast<Eigen::Index>(i - begin);
            for (int c = 0; c < dim; ++c) vbar(c, col) = w * mass_[i] * sums.values[c][i];
            for (int c = 0; c < ncurl; ++c) cbar(c, col) = w * inv_mu_[i] * sums.curls[c][i];
        }
        partial[ci] = backprop_params(field, pts, vbar, cbar);
    });
    for (const auto& pg : partial) grad.add(pg);
    return {breakdown, grad};
}

LossEvaluator make_loss_evaluator(const CaseSpec& cs, const MidpointGrid& grid,
                                  const ModeSet& modes, int rhs_refine,
                                  const std::optional<std::filesystem::path>& cache_dir) {
    if (cs.dim != static_cast<int>(grid.dim()))
        throw std::invalid_argument("make_loss_evaluator: case/grid dimension mismatch");
    const MaterialField material = cs.material();

    RhsCoefficients rhs;
    if (cs.rhs == RhsConstruction::StrongSource) {
        rhs = rhs_from_strong_source(cs.strong_source, modes, grid);
    } else {
        if (rhs_refine < 1) throw std::invalid_argument("make_loss_evaluator: rhs_refine >= 1");
        std::vector<std::size_t> refined = grid.counts;
        for (auto& n : refined) n *= static_cast<std::size_t>(rhs_refine);
        const MidpointGrid refined_grid(refined);

        std::optional<std::filesystem::path> cache_file;
        if (cache_dir) {
            std::ostringstream name;
            name << cs.name << "_rhs_g";
            for (std::size_t a = 0; a < grid.dim(); ++a)
                name << (a ? "x" : "") << grid.counts[a];
            name << "_m";
            for (int a = 0; a < modes.dim; ++a) name << (a ? "x" : "") << modes.cutoffs[a];
            name << "_r" << rhs_refine << ".dfrc";
            cache_file = *cache_dir / name.str();
            if (auto cached = load_rhs_cache(*cache_file, modes)) {
                return LossEvaluator(grid, modes, material, std::move(*cached));
            }
        }
        rhs = rhs_from_exact_weak(cs.exact_value, cs.exact_curl, material, modes, refined_grid,
                                  cs.interface);
        if (cache_file) {
            std::filesystem::create_directories(cache_file->parent_path());
            save_rhs_cache(*cache_file, modes, rhs);
        }
    }
    return LossEvaluator(grid, modes, material, std::move(rhs));
}

}  // namespace dfr
