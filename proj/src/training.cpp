#include "dfr/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dfr {

std::string format_record_csv(const TrainingRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.iteration,
                  r.loss_train, r.loss_val, r.grad_sq, r.x0_sq, r.rel_error, r.learning_rate,
                  r.wall_ms);
    return std::string(buf);
}

AdamState AdamState::init(const MlpParams& params, const AdamConfig& cfg) {
    AdamState s;
    for (std::size_t j = 0; j < params.W.size(); ++j) {
        s.mW.push_back(Eigen::MatrixXd::Zero(params.W[j].rows(), params.W[j].cols()));
        s.vW.push_back(Eigen::MatrixXd::Zero(params.W[j].rows(), params.W[j].cols()));
        s.mb.push_back(Eigen::VectorXd::Zero(params.b[j].size()));
        s.vb.push_back(Eigen::VectorXd::Zero(params.b[j].size()));
    }
    s.t = 0;
    s.lr = cfg.lr0;
    return s;
}

StepStatus adam_step(AdamState& state, MlpParams& params, const ParamGrad& grad,
                     const AdamConfig& cfg) {
    if (!grad.all_finite()) return StepStatus::NonFiniteGradient;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t j = 0; j < params.W.size(); ++j) {
        state.mW[j] = cfg.beta1 * state.mW[j] + (1.0 - cfg.beta1) * grad.W[j];
        state.vW[j] =
            (cfg.beta2 * state.vW[j].array() + (1.0 - cfg.beta2) * grad.W[j].array().square())
                .matrix();
        params.W[j].array() -= state.lr * (state.mW[j].array() / bc1) /
                               ((state.vW[j].array() / bc2).sqrt() + cfg.epsilon);
        state.mb[j] = cfg.beta1 * state.mb[j] + (1.0 - cfg.beta1) * grad.b[j];
        state.vb[j] =
            (cfg.beta2 * state.vb[j].array() + (1.0 - cfg.beta2) * grad.b[j].array().square())
                .matrix();
        params.b[j].array() -= state.lr * (state.mb[j].array() / bc1) /
                               ((state.vb[j].array() / bc2).sqrt() + cfg.epsilon);
    }
    return StepStatus::Ok;
}

StepDecision callback_apply(double prev_loss, double new_loss, const CallbackPolicy& policy,
                            MlpParams& params, AdamState& state, const MlpParams& saved_params,
                            const AdamState& saved_state) {
    if (!policy.reject || !(new_loss > prev_loss)) return StepDecision::Accept;
    const double decayed = std::max(state.lr * policy.decay, policy.lr_floor);
    params = saved_params;
    state = saved_state;
    state.lr = decayed;
    return StepDecision::RejectAndDecay;
}

const char* train_status_name(TrainStatus s) {
    switch (s) {
        case TrainStatus::Completed: return "completed";
        case TrainStatus::Stalled: return "stalled";
        case TrainStatus::NonFinite: return "non-finite";
    }
    return "?";
}

TrainResult train(const CaseSpec& cs, const TrainSettings& settings,
                  const std::function<void(const TrainingRecord&)>& on_record) {
    using Clock = std::chrono::steady_clock;
    constexpr int kMaxFloorRejections = 50;

    const LossEvaluator train_eval =
        make_loss_evaluator(cs, settings.train_grid, settings.modes, settings.rhs_refine,
                            settings.cache_dir);
    const LossEvaluator val_eval =
        make_loss_evaluator(cs, settings.validation_grid, settings.modes, settings.rhs_refine,
                            settings.cache_dir);
    const double exact_norm = exact_hcurl_norm(cs, settings.validation_grid);

    MlpArchitecture arch = settings.arch;
    arch.dim = cs.dim;
    TrainResult result;
    result.field = CandidateField{init_params(settings.seed, arch), CutoffField{cs.dim}};
    if (settings.iterations == 0) return result;

    AdamState state = AdamState::init(result.field.params, settings.adam);
    auto [breakdown, grad] = train_eval.loss_and_gradient(result.field);

    double val_loss = 0.0, rel_err = 0.0;
    auto eval_validation = [&] {
        const FieldSamples vs = sample_candidate(result.field, settings.validation_grid);
        val_loss = val_eval.loss_of_samples(vs).loss;
        rel_err = error_hcurl_norm(vs, cs, settings.validation_grid) / exact_norm;
    };

    const std::size_t cadence = std::max<std::size_t>(1, settings.validation_every);
    int floor_rejections = 0;
    long params_version = 0, last_eval_version = -1;
    for (std::size_t iter = 1; iter <= settings.iterations; ++iter) {
        const auto tic = Clock::now();
        TrainingRecord rec;
        rec.iteration = iter;

        if (!std::isfinite(breakdown.loss) || !grad.all_finite()) {
            result.status = TrainStatus::NonFinite;
            break;
        }

        const MlpParams saved_params = result.field.params;
        const AdamState saved_state = state;
        if (adam_step(state, result.field.params, grad, settings.adam) != StepStatus::Ok) {
            result.status = TrainStatus::NonFinite;
            break;
        }

        auto [new_breakdown, new_grad] = train_eval.loss_and_gradient(result.field);
        if (!std::isfinite(new_breakdown.loss)) {
            result.status = TrainStatus::NonFinite;
            break;
        }

        const StepDecision decision =
            callback_apply(breakdown.loss, new_breakdown.loss, settings.callback,
                           result.field.params, state, saved_params, saved_state);
        if (decision == StepDecision::Accept) {
            breakdown = new_breakdown;
            grad = std::move(new_grad);
            floor_rejections = 0;
            ++params_version;
        } else {
            // parameters were restored; the stored gradient is still exact
            if (state.lr <= settings.callback.lr_floor) ++floor_rejections;
        }

        // Rejected iterations keep the previously evaluated metrics: the
        // parameters are bit-identical, so recomputation would be a no-op.
        if ((iter == 1 || iter % cadence == 0) && last_eval_version != params_version) {
            eval_validation();
            last_eval_version = params_version;
        }

        rec.loss_train = breakdown.loss;
        rec.grad_sq = breakdown.grad_sq;
        rec.x0_sq = breakdown.x0_sq;
        rec.loss_val = val_loss;
        rec.rel_error = rel_err;
        rec.learning_rate = state.lr;
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - tic).count();
        result.records.push_back(rec);
        if (on_record) on_record(rec);

        if (floor_rejections >= kMaxFloorRejections) {
            result.status = TrainStatus::Stalled;
            break;
        }
    }
    return result;
}

}  // namespace dfr
