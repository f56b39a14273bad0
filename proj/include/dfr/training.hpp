#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dfr/pipeline.hpp"
#include "dfr/training_record.hpp"

namespace dfr {

struct AdamConfig {
    double lr0 = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    long t = 0;
    double lr = 0.0;

    static AdamState init(const MlpParams& params, const AdamConfig& cfg);
};

enum class StepStatus { Ok, NonFiniteGradient };

// Standard bias-corrected Adam update; leaves params and state untouched and
// reports the error when the gradient is non-finite.
StepStatus adam_step(AdamState& state, MlpParams& params, const ParamGrad& grad,
                     const AdamConfig& cfg);

struct CallbackPolicy {
    double decay = 0.9;     // in (0,1)
    bool reject = true;
    double lr_floor = 1e-7;
};

enum class StepDecision { Accept, RejectAndDecay };

// Loss-rejection callback: a step that increased the loss is undone
// (parameters, moments and step count restored together) and the learning
// rate decays toward the floor.
StepDecision callback_apply(double prev_loss, double new_loss, const CallbackPolicy& policy,
                            MlpParams& params, AdamState& state, const MlpParams& saved_params,
                            const AdamState& saved_state);

enum class TrainStatus { Completed, Stalled, NonFinite };

const char* train_status_name(TrainStatus s);

struct TrainSettings {
    MidpointGrid train_grid;
    MidpointGrid validation_grid;
    ModeSet modes;
    MlpArchitecture arch;
    AdamConfig adam;
    CallbackPolicy callback;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::size_t validation_every = 1;  // thinning factor; metrics carried forward between
    int rhs_refine = 4;
    std::optional<std::filesystem::path> cache_dir;
};

struct TrainResult {
    CandidateField field;
    std::vector<TrainingRecord> records;
    TrainStatus status = TrainStatus::Completed;
};

// Full-batch loop: gradient -> adam -> rejection callback, validation loss
// and H(curl) relative error on the independent validation grid each
// iteration. Deterministic given settings and seed.
TrainResult train(const CaseSpec& cs, const TrainSettings& settings,
                  const std::function<void(const TrainingRecord&)>& on_record = {});

}  // namespace dfr
