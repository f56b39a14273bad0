#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dfr/experiments.hpp"

namespace dfr {

// Flat key-value run configuration. Per-case paper-scale defaults apply to
// any grid/mode/iteration key the file leaves out.
struct RunConfig {
    std::string case_name = "case1";
    CaseId case_id = CaseId::Case1;
    std::size_t train_points = 0;       // per axis
    std::size_t validation_points = 0;  // per axis
    int modes = 0;                      // cutoff per axis
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double callback_decay = 0.9;
    double callback_floor = 1e-7;
    bool reject_steps = true;
    int depth = 5;
    int width = 20;
    std::size_t validation_every = 1;
    int rhs_refine = 4;
    std::size_t csv_flush_every = 100;
    std::string out_dir;  // default runs/<case>

    std::vector<std::string> warnings;  // populated during validation
};

RunConfig default_config(CaseId id);

// Parses the file, applies case defaults, validates. Unknown keys, unknown
// case names and non-positive counts are errors; equal train/validation
// point counts only warn (the under-integration study must stay reachable).
RunConfig parse_config(const std::filesystem::path& path);

// Same, from text (for tests).
RunConfig parse_config_text(const std::string& text);

struct RunManifest {
    RunConfig config;
    std::string library_version;
    std::string start_time;  // ISO 8601 UTC
    std::string end_time;
    double final_loss = 0.0;
    double final_rel_error = 0.0;
    std::string status;
};

// Serialized as JSON, written to a temp file and renamed into place.
void write_manifest_atomic(const std::filesystem::path& path, const RunManifest& manifest);

std::string manifest_to_json(const RunManifest& manifest);

std::string iso8601_utc_now();

}  // namespace dfr
