#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dfr {

// One row of the training log. wall_ms is the measured per-iteration wall
// clock; everything else is deterministic given config and seed.
struct TrainingRecord {
    std::size_t iteration = 0;
    double loss_train = 0.0;
    double loss_val = 0.0;
    double grad_sq = 0.0;
    double x0_sq = 0.0;
    double rel_error = 0.0;
    double learning_rate = 0.0;
    double wall_ms = 0.0;
};

inline constexpr const char* kCsvHeader =
    "iter,loss_train,loss_val,grad_sq,x0_sq,rel_error,lr,wall_ms";

// f64 fields at 17 significant digits.
std::string format_record_csv(const TrainingRecord& r);

}  // namespace dfr
