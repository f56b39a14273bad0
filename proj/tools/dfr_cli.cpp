// Command-line surface for the dual-norm spectral residual trainer:
//   train                full pipeline -> CSV log + checkpoint + manifest
//   eval                 loss and relative H(curl) error of a checkpoint
//   verify-basis         Gram-matrix orthonormality report
//   selftest-transforms  DST/DCT orthogonality and oracle equivalence
//   report               loss/error correlation CSV + fitted slope from a log

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "dfr/config.hpp"
#include "dfr/pipeline.hpp"
#include "dfr/training.hpp"
#include "dfr/version.hpp"

namespace {

using namespace dfr;

MidpointGrid square_grid(std::size_t n, int dim) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(dim), n);
    return MidpointGrid(counts);
}

ModeSet cube_modes(int cutoff, int dim) {
    return enumerate_modes(dim, {cutoff, cutoff, cutoff});
}

TrainSettings settings_from_config(const RunConfig& cfg, const CaseSpec& cs,
                                   const std::filesystem::path& out_dir) {
    TrainSettings s{square_grid(cfg.train_points, cs.dim),
                    square_grid(cfg.validation_points, cs.dim),
                    cube_modes(cfg.modes, cs.dim),
                    MlpArchitecture{cs.dim, std::vector<int>(cfg.depth, cfg.width)},
                    AdamConfig{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                               cfg.adam_epsilon},
                    CallbackPolicy{cfg.callback_decay, cfg.reject_steps, cfg.callback_floor},
                    cfg.iterations,
                    cfg.seed,
                    cfg.validation_every,
                    cfg.rhs_refine,
                    std::nullopt};
    if (cs.rhs == RhsConstruction::WeakRefined) s.cache_dir = out_dir / "cache";
    return s;
}

int cmd_train(const std::string& config_path, const std::optional<std::uint64_t>& seed_override,
              const std::optional<std::string>& out_override,
              const std::optional<std::string>& checkpoint_override) {
    RunConfig cfg = parse_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.out_dir = *out_override;
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";

    const CaseSpec& cs = get_case(cfg.case_id);
    const std::filesystem::path out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);

    RunManifest manifest;
    manifest.config = cfg;
    manifest.library_version = kVersion;
    manifest.start_time = iso8601_utc_now();

    const std::filesystem::path csv_path = out_dir / "training_log.csv";
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) {
        std::cerr << "error: cannot open " << csv_path << "\n";
        return 1;
    }
    csv << kCsvHeader << "\n";

    std::size_t since_flush = 0;
    const auto on_record = [&](const TrainingRecord& r) {
        csv << format_record_csv(r) << "\n";
        if (++since_flush >= std::max<std::size_t>(1, cfg.csv_flush_every)) {
            csv.flush();
            since_flush = 0;
        }
    };

    const TrainSettings settings = settings_from_config(cfg, cs, out_dir);
    std::cout << "training " << cs.name << ": " << cfg.train_points << " pts/axis, "
              << cfg.validation_points << " validation pts/axis, modes " << cfg.modes << ", "
              << cfg.iterations << " iterations, seed " << cfg.seed << "\n";
    const TrainResult result = train(cs, settings, on_record);
    csv.flush();

    const std::filesystem::path ckpt =
        checkpoint_override ? std::filesystem::path(*checkpoint_override)
                            : out_dir / "checkpoint.dfrm";
    save_checkpoint(ckpt, result.field.params);

    manifest.end_time = iso8601_utc_now();
    manifest.status = train_status_name(result.status);
    if (!result.records.empty()) {
        manifest.final_loss = result.records.back().loss_train;
        manifest.final_rel_error = result.records.back().rel_error;
    }
    write_manifest_atomic(out_dir / "manifest.json", manifest);

    std::cout << "status: " << manifest.status << "\n";
    if (!result.records.empty())
        std::cout << "final train loss " << manifest.final_loss << ", validation rel error "
                  << manifest.final_rel_error << "\n";
    std::cout << "log " << csv_path << "\ncheckpoint " << ckpt << "\n";
    return result.status == TrainStatus::Completed ? 0 : 1;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path) {
    RunConfig cfg = parse_config(config_path);
    const CaseSpec& cs = get_case(cfg.case_id);
    CandidateField field{load_checkpoint(checkpoint_path), CutoffField{cs.dim}};
    if (field.dim() != cs.dim) {
        std::cerr << "error: checkpoint dimension does not match case\n";
        return 1;
    }
    const MidpointGrid grid = square_grid(cfg.validation_points, cs.dim);
    const ModeSet modes = cube_modes(cfg.modes, cs.dim);
    const LossEvaluator eval = make_loss_evaluator(cs, grid, modes, cfg.rhs_refine);
    const LossBreakdown b = eval.loss(field);
    const double rel = relative_error(field, cs, grid);
    std::cout << "case " << cs.name << " on " << cfg.validation_points
              << " validation pts/axis\n";
    std::cout << "loss " << b.loss << " (grad_sq " << b.grad_sq << ", x0_sq " << b.x0_sq
              << ")\nrel_error " << rel << "\n";
    return 0;
}

int cmd_verify_basis(int dim, int cutoff, std::size_t grid_n,
                     const std::optional<std::string>& out_path) {
    const MidpointGrid grid = square_grid(grid_n, dim);
    const ModeSet modes = cube_modes(cutoff, dim);
    const GramReport rep = gram_matrix(modes, grid);

    // per-family blocks of the Gram matrix
    std::ostringstream csv;
    csv << "block_a,block_b,modes_a,modes_b,max_abs_offdiag,max_diag_dev\n";
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> blocks;
    std::size_t i = 0;
    while (i < modes.modes.size()) {
        std::size_t j = i;
        while (j < modes.modes.size() && modes.modes[j].family == modes.modes[i].family) ++j;
        blocks.push_back({family_name(modes.modes[i].family), {i, j}});
        i = j;
    }
    for (const auto& [na, ra] : blocks)
        for (const auto& [nb, rb] : blocks) {
            double off = 0.0, diag = 0.0;
            for (std::size_t a = ra.first; a < ra.second; ++a)
                for (std::size_t b = rb.first; b < rb.second; ++b) {
                    const double g = rep.gram(static_cast<Eigen::Index>(a),
                                              static_cast<Eigen::Index>(b));
                    if (a == b)
                        diag = std::max(diag, std::abs(g - 1.0));
                    else
                        off = std::max(off, std::abs(g));
                }
            csv << na << "," << nb << "," << (ra.second - ra.first) << ","
                << (rb.second - rb.first) << "," << off << "," << (na == nb ? diag : 0.0)
                << "\n";
        }

    std::cout << "gram " << rep.summary() << "\n" << csv.str();
    if (out_path) {
        std::ofstream os(*out_path, std::ios::trunc);
        os << csv.str();
        if (!os) {
            std::cerr << "error: cannot write " << *out_path << "\n";
            return 1;
        }
    }
    const double tol = dim == 2 ? 1e-6 : 1e-4;
    const bool ok = rep.max_offdiag < tol && rep.max_diag_dev < tol;
    std::cout << (ok ? "OK" : "FAILED") << " (tolerance " << tol << ")\n";
    return ok ? 0 : 1;
}

int cmd_selftest_transforms() {
    bool ok = true;
    std::cout << "orthogonality |M M^T - I|_max:\n";
    for (std::size_t n : {1u, 2u, 4u, 8u, 64u}) {
        for (auto kind : {TransformKind::Dst2, TransformKind::Cst2}) {
            const TransformMatrix tm = build_transform(n, kind);
            const Eigen::MatrixXd dev =
                tm.entries * tm.entries.transpose() -
                Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(n));
            const double err = dev.cwiseAbs().maxCoeff();
            std::cout << "  n=" << n << " " << (kind == TransformKind::Dst2 ? "DST-II" : "DCT-II")
                      << " " << err << "\n";
            ok = ok && err < 1e-12;
        }
    }
    std::mt19937_64 rng(42);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::size_t> dims(1 + trial % 3);
        std::vector<TransformKind> kinds;
        for (auto& d : dims) {
            d = 2 + rng() % 12;
            kinds.push_back(rng() % 2 ? TransformKind::Dst2 : TransformKind::Cst2);
        }
        Tensor t(dims);
        for (std::size_t idx = 0; idx < t.size(); ++idx)
            t[idx] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
        const Tensor a = apply_separable(t, kinds);
        const Tensor b = naive_apply(t, kinds);
        for (std::size_t idx = 0; idx < a.size(); ++idx)
            worst = std::max(worst, std::abs(a[idx] - b[idx]));
    }
    std::cout << "separable vs naive worst |diff| over 20 random tensors: " << worst << "\n";
    ok = ok && worst < 1e-12;
    std::cout << (ok ? "OK" : "FAILED") << "\n";
    return ok ? 0 : 1;
}

int cmd_report(const std::string& log_path, const std::optional<std::string>& out_path) {
    std::ifstream is(log_path);
    if (!is) {
        std::cerr << "error: cannot open " << log_path << "\n";
        return 1;
    }
    std::vector<TrainingRecord> records;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (header) {
            header = false;
            continue;
        }
        TrainingRecord r;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.iteration,
                        &r.loss_train, &r.loss_val, &r.grad_sq, &r.x0_sq, &r.rel_error,
                        &r.learning_rate, &r.wall_ms) != 8) {
            std::cerr << "error: malformed CSV row: " << line << "\n";
            return 1;
        }
        records.push_back(r);
    }
    CorrelationReport rep;
    try {
        rep = correlation_report(records);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::ostringstream csv;
    csv << "loss,rel_error\n";
    for (const auto& [l, e] : rep.pairs) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", l, e);
        csv << buf;
    }
    if (out_path) {
        std::ofstream os(*out_path, std::ios::trunc);
        os << csv.str();
        if (!os) {
            std::cerr << "error: cannot write " << *out_path << "\n";
            return 1;
        }
    } else {
        std::cout << csv.str();
    }
    std::cout << "{\n  \"records\": " << records.size() << ",\n  \"fit_count\": " << rep.fit_count
              << ",\n  \"slope\": " << (rep.slope_valid ? std::to_string(rep.slope) : "null")
              << ",\n  \"slope_valid\": " << (rep.slope_valid ? "true" : "false") << "\n}\n";
    if (!rep.slope_valid)
        std::cerr << "warning: degenerate series, log-log slope undefined\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-norm spectral residual trainer for time-harmonic Maxwell problems"};
    app.set_version_flag("--version", dfr::kVersion);
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, log_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir, out_file, ckpt_out;
    int dim = 2, cutoff = 6;
    std::size_t grid_n = 256;

    auto* t = app.add_subcommand("train", "train a candidate field from a config file");
    t->add_option("--config", config_path, "config file path")->required();
    t->add_option("--seed", seed, "override the config seed");
    t->add_option("--out", out_dir, "override the output directory");
    t->add_option("--checkpoint", ckpt_out, "checkpoint output path");

    auto* e = app.add_subcommand("eval", "evaluate a checkpoint on the validation grid");
    e->add_option("--config", config_path, "config file path")->required();
    e->add_option("--checkpoint", checkpoint_path, "checkpoint to load")->required();

    auto* vb = app.add_subcommand("verify-basis", "Gram-matrix orthonormality report");
    vb->add_option("--dim", dim, "2 or 3")->check(CLI::IsMember({2, 3}));
    vb->add_option("--cutoff", cutoff, "mode cutoff per axis")->check(CLI::PositiveNumber);
    vb->add_option("--grid", grid_n, "points per axis")->check(CLI::PositiveNumber);
    vb->add_option("--out", out_file, "also write the CSV report here");

    auto* st = app.add_subcommand("selftest-transforms", "DST/DCT orthogonality report");
    (void)st;

    auto* rp = app.add_subcommand("report", "correlation CSV and slope from a training log");
    rp->add_option("--log", log_path, "training_log.csv path")->required();
    rp->add_option("--out", out_file, "write correlation CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) return cmd_train(config_path, seed, out_dir, ckpt_out);
        if (e->parsed()) return cmd_eval(config_path, checkpoint_path);
        if (vb->parsed()) return cmd_verify_basis(dim, cutoff, grid_n, out_file);
        if (st->parsed()) return cmd_selftest_transforms();
        if (rp->parsed()) return cmd_report(log_path, out_file);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
