#include "rankprune/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "rankprune/classifier.hpp"
#include "rankprune/config.hpp"
#include "rankprune/crossval.hpp"
#include "rankprune/idx.hpp"
#include "rankprune/noise_estimator.hpp"
#include "rankprune/noise_grid.hpp"
#include "rankprune/pruner.hpp"
#include "rankprune/records.hpp"
#include "rankprune/synthetic_bench.hpp"

namespace rankprune::cli {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegenerateCounts:
        case ErrorCode::InvalidRates:
        case ErrorCode::OverPrune:
        case ErrorCode::RankOutOfRange:
            return kExitDegenerate;
        case ErrorCode::InfeasibleConfig:
            return kExitInfeasible;
        default:
            return kExitInput;
    }
}

namespace {

struct FitFlags {
    int max_iters = 500;
    double tolerance = 1e-6;
    double c = 1.0;

    void attach(CLI::App* app) {
        app->add_option("--max-iters", max_iters, "Gradient-descent iteration cap")->capture_default_str();
        app->add_option("--tolerance", tolerance, "Gradient inf-norm stopping tolerance")->capture_default_str();
        app->add_option("--c", c, "Inverse L2 regularization strength")->capture_default_str();
    }
    FitConfig config(std::uint64_t seed) const {
        FitConfig cfg;
        cfg.max_iters = max_iters;
        cfg.tolerance = tolerance;
        cfg.reg_inverse_c = c;
        cfg.seed = seed;
        cfg.validate();
        return cfg;
    }
};

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    f << j.dump(2) << '\n';
}

void require_both_labels(const Dataset& d) {
    const auto [pos, neg] = split_by_observed_label(d);
    if (pos.empty() || neg.empty()) {
        throw Error(ErrorCode::EmptyClass, "input needs both observed labels 0 and 1");
    }
}

std::optional<NoiseRates> override_rates(const std::optional<double>& rho1,
                                         const std::optional<double>& rho0, const Dataset& d) {
    if (!rho1 && !rho0) return std::nullopt;
    if (!rho1 || !rho0) throw Error(ErrorCode::ConfigError, "--rho1 and --rho0 must be given together");
    try {
        return complete_rates(*rho1, *rho0, positive_fraction(d.observed_labels()));
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
}

std::vector<std::pair<double, double>> grid_pairs(const std::vector<double>& levels) {
    std::vector<std::pair<double, double>> out;
    for (double pi1 : levels) {
        for (double rho1 : levels) out.emplace_back(pi1, rho1);
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rank Pruning: noisy-label binary classification"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Master random seed")->capture_default_str();

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Estimate noise rates from a dataset CSV");
    std::string est_input;
    int est_k = 3;
    bool est_json = false;
    bool est_unstratified = false;
    FitFlags est_fit;
    estimate->add_option("input", est_input, "Dataset CSV (f0..,s[,y])")->required();
    estimate->add_option("--cv-k", est_k, "Cross-validation folds")->capture_default_str();
    estimate->add_flag("--json", est_json, "Emit JSON");
    estimate->add_flag("--unstratified", est_unstratified, "Disable stratified folds");
    estimate->add_option("--seed", seed, "Random seed");
    est_fit.attach(estimate);

    // train
    auto* train = app.add_subcommand("train", "Rank Pruning fit; writes the model as JSON");
    std::string train_input;
    std::string model_out;
    std::string prune_out;
    std::optional<double> train_rho1;
    std::optional<double> train_rho0;
    int train_k = 3;
    FitFlags train_fit;
    train->add_option("input", train_input, "Dataset CSV")->required();
    train->add_option("--model-out", model_out, "Model JSON path")->required();
    train->add_option("--prune-out", prune_out, "Optional PruneResult JSON path");
    train->add_option("--rho1", train_rho1, "Given rho1 (skips estimation; needs --rho0)");
    train->add_option("--rho0", train_rho0, "Given rho0 (skips estimation; needs --rho1)");
    train->add_option("--cv-k", train_k, "Cross-validation folds")->capture_default_str();
    train->add_option("--seed", seed, "Random seed");
    train_fit.attach(train);

    // predict
    auto* predict = app.add_subcommand("predict", "Score a CSV with a saved model");
    std::string pred_model;
    std::string pred_input;
    std::string pred_out;
    predict->add_option("--model", pred_model, "Model JSON")->required();
    predict->add_option("input", pred_input, "Dataset or features-only CSV")->required();
    predict->add_option("--out", pred_out, "Output CSV (default: stdout)");

    // bench
    auto* bench = app.add_subcommand("bench", "Run a synthetic sweep");
    std::string bench_config;
    std::string bench_out;
    std::optional<int> bench_trials;
    std::optional<int> bench_threads;
    bool print_default = false;
    bench->add_option("--config", bench_config, "key=value sweep config");
    bench->add_option("--out", bench_out, "Output directory");
    bench->add_option("--trials", bench_trials, "Override trials");
    bench->add_option("--threads", bench_threads, "Worker threads (0 = all cores)");
    bench->add_option("--seed", seed, "Master seed");
    bench->add_flag("--print-default-config", print_default, "Print the default sweep config");

    // generate
    auto* generate_cmd = app.add_subcommand("generate", "Write a corrupted synthetic dataset CSV");
    SynthConfig gen;
    std::optional<double> gen_rho0;
    std::string gen_out;
    generate_cmd->add_option("--d", gen.d)->capture_default_str();
    generate_cmd->add_option("--dim", gen.dim)->capture_default_str();
    generate_cmd->add_option("--n", gen.n)->capture_default_str();
    generate_cmd->add_option("--p-y1", gen.p_y1)->capture_default_str();
    generate_cmd->add_option("--noise-frac", gen.noise_frac)->capture_default_str();
    generate_cmd->add_option("--pi1", gen.pi1, "Inverse rate (ignored with --rho0)")->capture_default_str();
    generate_cmd->add_option("--rho1", gen.rho1)->capture_default_str();
    generate_cmd->add_option("--rho0", gen_rho0, "Give rho0 directly instead of --pi1");
    generate_cmd->add_option("--out", gen_out, "Output CSV")->required();
    generate_cmd->add_option("--seed", seed, "Random seed");

    // mnist-grid
    auto* mnist = app.add_subcommand("mnist-grid", "One-vs-rest MNIST noise-estimation grid");
    std::string mnist_images;
    std::string mnist_labels;
    int mnist_digit = 1;
    std::size_t mnist_max = 10000;
    std::vector<double> mnist_levels{0.0, 0.25, 0.5};
    int mnist_trials = 1;
    int mnist_k = 3;
    std::string mnist_out;
    FitFlags mnist_fit;
    mnist->add_option("--images", mnist_images, "IDX images file")->required();
    mnist->add_option("--labels", mnist_labels, "IDX labels file")->required();
    mnist->add_option("--digit", mnist_digit, "Positive digit for one-vs-rest")->capture_default_str();
    mnist->add_option("--max-examples", mnist_max, "Use the first N examples (0 = all)")->capture_default_str();
    mnist->add_option("--levels", mnist_levels, "Grid levels for pi1 and rho1")->delimiter(',');
    mnist->add_option("--trials", mnist_trials)->capture_default_str();
    mnist->add_option("--cv-k", mnist_k)->capture_default_str();
    mnist->add_option("--out", mnist_out, "Output CSV (default: stdout)");
    mnist->add_option("--seed", seed, "Random seed");
    mnist_fit.attach(mnist);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (estimate->parsed()) {
            const auto d = read_dataset_csv(est_input);
            require_both_labels(d);
            const auto& s = d.observed_labels();
            const auto plan = make_folds(s, est_k, !est_unstratified, seed);
            const auto g = cv_predict_proba(d, s, plan, est_fit.config(seed));
            const auto t = thresholds(g.g, s);
            const auto counts = confident_counts(g.g, s, t);
            const auto conf = estimate_rates(counts);
            const auto rates = complete_rates(conf.rho1, conf.rho0, positive_fraction(s));
            if (est_json) {
                auto j = rates_to_json(rates);
                j["lb_y1"] = t.lb_y1;
                j["ub_y0"] = t.ub_y0;
                j["counts"] = {{"n_Py1", counts.n_Py1}, {"n_Ny1", counts.n_Ny1},
                               {"n_Py0", counts.n_Py0}, {"n_Ny0", counts.n_Ny0}};
                j["seed"] = seed;
                out << j.dump(2) << '\n';
            } else {
                out << "rho1_hat " << format_real(rates.rho1) << '\n'
                    << "rho0_hat " << format_real(rates.rho0) << '\n'
                    << "pi1_hat  " << format_real(rates.pi1) << '\n'
                    << "pi0_hat  " << format_real(rates.pi0) << '\n'
                    << "lb_y1    " << format_real(t.lb_y1) << '\n'
                    << "ub_y0    " << format_real(t.ub_y0) << '\n';
                if (rates.clamped) out << "note: derived rates were clamped into range\n";
            }
            return kExitOk;
        }

        if (train->parsed()) {
            const auto d = read_dataset_csv(train_input);
            require_both_labels(d);
            RankPruneOptions opts;
            opts.cv_k = train_k;
            opts.seed = seed;
            opts.rates_override = override_rates(train_rho1, train_rho0, d);
            const auto res = rank_prune_fit(d, train_fit.config(seed), opts);
            write_json_file(model_out, model_to_json(res.model));
            if (!prune_out.empty()) {
                auto j = prune_to_json(res.prune);
                j["rates"] = rates_to_json(res.rates);
                write_json_file(prune_out, j);
            }
            out << (res.rates_estimated ? "estimated" : "given") << " rates: rho1="
                << format_real(res.rates.rho1) << " rho0=" << format_real(res.rates.rho0)
                << " pi1=" << format_real(res.rates.pi1) << " pi0=" << format_real(res.rates.pi0) << '\n'
                << "kept " << res.prune.kept_indices.size() << " of " << d.size() << " (removed "
                << res.prune.removed_pos << " s=1, " << res.prune.removed_neg << " s=0)\n"
                << "model written to " << model_out << (res.model.converged ? "" : " (not converged)")
                << '\n';
            return kExitOk;
        }

        if (predict->parsed()) {
            std::ifstream mf(pred_model);
            if (!mf) throw Error(ErrorCode::IoError, "cannot open model '" + pred_model + "'");
            nlohmann::json j;
            try {
                mf >> j;
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::ParseError, std::string("model JSON: ") + e.what());
            }
            const auto model = model_from_json(j);
            const auto x = read_features_csv(pred_input);
            const auto g = predict_proba(model, x);
            std::ostringstream buf;
            buf << "g,pred\n";
            buf.precision(17);
            for (double p : g) buf << p << ',' << (p >= 0.5 ? 1 : 0) << '\n';
            if (pred_out.empty()) {
                out << buf.str();
            } else {
                std::ofstream f(pred_out);
                if (!f) throw Error(ErrorCode::IoError, "cannot write '" + pred_out + "'");
                f << buf.str();
            }
            return kExitOk;
        }

        if (bench->parsed()) {
            if (print_default) {
                out << format_sweep_config(SweepSpec{});
                return kExitOk;
            }
            if (bench_out.empty()) throw Error(ErrorCode::ConfigError, "bench needs --out");
            SweepSpec spec = bench_config.empty() ? SweepSpec{} : read_sweep_config(bench_config);
            if (bench_trials) spec.base.trials = *bench_trials;
            if (bench_threads) spec.threads = *bench_threads;
            if (app.get_option("--seed")->count() > 0 || bench->get_option("--seed")->count() > 0) {
                spec.base.seed = seed;
            }
            spec.validate();
            const auto records = run_sweep(spec);
            std::filesystem::create_directories(bench_out);
            const auto dir = std::filesystem::path(bench_out);
            {
                std::ofstream f(dir / "trials.csv");
                if (!f) throw Error(ErrorCode::IoError, "cannot write trials.csv");
                write_records_csv(f, records);
            }
            {
                std::ofstream f(dir / "aggregate.csv");
                if (!f) throw Error(ErrorCode::IoError, "cannot write aggregate.csv");
                write_aggregate_csv(f, aggregate(records));
            }
            {
                std::ofstream f(dir / "config.txt");
                f << format_sweep_config(spec);
            }
            const auto failures = std::count_if(records.begin(), records.end(),
                                                [](const auto& r) { return !r.ok(); });
            out << records.size() << " records (" << failures << " failed) written to " << bench_out << '\n';
            return kExitOk;
        }

        if (generate_cmd->parsed()) {
            if (gen_rho0) gen.pi1 = 0.0;
            gen.validate();
            const double rho0 = gen_rho0.value_or(gen.rho0());
            Rng rng(derive_seed(seed, {1}));
            const auto data = generate(gen, rng);
            Rng flip_rng(derive_seed(seed, {2}));
            const auto flips = corrupt(data.data.hidden_labels(), gen.rho1, rho0, flip_rng, data.noise_origin);
            write_dataset_csv(gen_out, data.data.with_observed(flips.s));
            out << "wrote " << data.data.size() << " rows to " << gen_out << " (realized rho1="
                << format_real(flips.realized_rho1()) << " rho0=" << format_real(flips.realized_rho0())
                << ")\n";
            return kExitOk;
        }

        if (mnist->parsed()) {
            const auto clean = load_mnist_idx(mnist_images, mnist_labels, mnist_digit, mnist_max);
            const auto rows = run_noise_grid(clean, grid_pairs(mnist_levels), mnist_trials,
                                             mnist_fit.config(seed), mnist_k, seed);
            if (mnist_out.empty()) {
                write_grid_csv(out, rows);
            } else {
                std::ofstream f(mnist_out);
                if (!f) throw Error(ErrorCode::IoError, "cannot write '" + mnist_out + "'");
                write_grid_csv(f, rows);
            }
            err << "mean |rho1_hat - rho1| = " << format_real(mean_abs_rho1_error(rows)) << '\n';
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}

}  // namespace rankprune::cli
