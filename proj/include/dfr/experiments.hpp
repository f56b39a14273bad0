#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfr/network.hpp"
#include "dfr/residual.hpp"
#include "dfr/training_record.hpp"

namespace dfr {

// The four manufactured-solution experiments, plus the under-integration
// ablation preset (same PDE as case2_1, points == modes).
enum class CaseId { Case1, Case21, Case22, Case3, Case21Under };

enum class RhsConstruction { StrongSource, WeakRefined };

struct CaseDefaults {
    std::size_t train_points;
    std::size_t validation_points;
    int modes;
    std::size_t iterations;
};

struct CaseSpec {
    CaseId id;
    std::string name;
    int dim;
    bool coercive;   // +eps mass term instead of -omega^2 eps
    double omega;    // 0 for the coercive forms
    ScalarFn mu;
    ScalarFn eps;
    VecFn exact_value;
    VecFn exact_curl;                 // [0] holds the scalar curl in 2D
    VecFn strong_source;              // null when rhs == WeakRefined
    RhsConstruction rhs;
    std::optional<CircleInterface> interface;
    double equiv_gamma;  // residual/error equivalence constants of the
    double equiv_M;      // coercive forms; 0 when not applicable
    CaseDefaults defaults;

    MaterialField material() const;
};

const CaseSpec& get_case(CaseId id);
std::optional<CaseId> case_from_name(std::string_view name);
const std::vector<std::string>& case_names();

// Quadrature H(curl) norms on a grid.
double hcurl_norm(const FieldSamples& f, const MidpointGrid& grid);
double exact_hcurl_norm(const CaseSpec& cs, const MidpointGrid& grid);
double error_hcurl_norm(const FieldSamples& f, const CaseSpec& cs, const MidpointGrid& grid);

// ||E - E*||_{H(curl)} / ||E*||_{H(curl)} by midpoint quadrature.
double relative_error(const CandidateField& field, const CaseSpec& cs, const MidpointGrid& grid);

struct BandEntry {
    double loss = 0.0;
    double err = 0.0;
    double ratio = 0.0;
    bool in_band = false;
    bool skipped = false;  // both numerator and denominator below threshold
};

struct BandReport {
    std::vector<BandEntry> entries;
    double lo = 0.0, hi = 0.0;
    bool all_in_band = true;
};

// Ratios loss(E)/||E - E*||_{H(curl)} against the coercive equivalence band
// [gamma - delta, M + delta]. Requires a coercive case.
BandReport equivalence_band_check(const CaseSpec& cs, const std::vector<CandidateField>& candidates,
                                  const MidpointGrid& loss_grid, const ModeSet& modes,
                                  const MidpointGrid& error_grid, double delta = 0.1);

struct CorrelationReport {
    std::vector<std::pair<double, double>> pairs;  // (loss_train, rel_error)
    double slope = 0.0;      // log-log least squares over the final half
    bool slope_valid = false;
    std::size_t fit_count = 0;
};

CorrelationReport correlation_report(const std::vector<TrainingRecord>& records);

}  // namespace dfr
