// drimv: incomplete multi-view classification with dual representations and a TSK ensemble.

#include "drimv/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace drimv;

std::vector<double> parse_rates(const std::string& text) {
    std::vector<double> rates;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            rates.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidArgument("bad rate '" + item + "' in --rates");
        }
    }
    return rates;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incomplete multi-view classification: masking, training, prediction, benchmarks, "
                 "statistics and rule explanations"};
    app.require_subcommand(1);

    // mask
    auto* mask = app.add_subcommand("mask", "Remove a fraction of instances from every view");
    std::string mask_manifest, mask_out;
    double mask_rate = 0.0;
    std::uint64_t mask_seed = 0;
    mask->add_option("--manifest", mask_manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
    mask->add_option("--rate", mask_rate, "Fraction of instances removed per view, in [0,1)")->required();
    mask->add_option("--seed", mask_seed, "Random seed");
    mask->add_option("--out", mask_out, "Output directory for the masked dataset")->required();

    // train
    auto* train = app.add_subcommand("train", "Fit the representation learner and the fuzzy ensemble");
    std::string train_manifest, train_out;
    std::optional<std::string> train_config;
    train->add_option("--manifest", train_manifest, "Training dataset manifest")->required()->check(CLI::ExistingFile);
    train->add_option("--config", train_config, "JSON config with 'representation' and 'classifier' sections")
        ->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "Model file to write (JSON)")->required();

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Score a dataset with a trained model");
    std::string pred_model, pred_manifest, pred_out;
    predict_cmd->add_option("--model", pred_model, "Model JSON from 'train'")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--manifest", pred_manifest, "Dataset manifest; missing views are imputed")
        ->required()
        ->check(CLI::ExistingFile);
    predict_cmd->add_option("--out", pred_out, "CSV of class scores and predicted labels")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Mask, split, train and evaluate over rates x repetitions");
    BenchOptions bo;
    std::string bench_manifest, bench_out, rates_text = "0.1,0.3,0.5,0.7", method_text = "drimv",
                                              variant_text = "full";
    std::optional<std::string> bench_config, bench_grid;
    bench->add_option("--manifest", bench_manifest, "Complete source dataset manifest")
        ->required()
        ->check(CLI::ExistingFile);
    bench->add_option("--rates", rates_text, "Comma-separated mask rates")->capture_default_str();
    bench->add_option("--reps", bo.reps, "Repetitions per rate")->capture_default_str();
    bench->add_option("--config", bench_config, "JSON run config")->check(CLI::ExistingFile);
    bench->add_option("--out", bench_out, "Output directory (results.csv, summary.json, errors.json)")->required();
    bench->add_option("--test-fraction", bo.test_fraction, "Stratified test fraction")->capture_default_str();
    bench->add_option("--seed", bo.seed, "Root seed; cells derive their own seeds")->capture_default_str();
    bench->add_option("--jobs", bo.jobs, "Worker threads")->capture_default_str();
    bench->add_option("--method", method_text, "drimv | mean | knn | svt")->capture_default_str();
    bench->add_option("--variant", variant_text, "full | no-common | no-specific | no-coop")->capture_default_str();
    bench->add_option("--knn-k", bo.knn_k, "Neighbors for the knn imputer")->capture_default_str();
    bench->add_option("--grid", bench_grid, "JSON grid; picks the best validation ACC on 20% of training")
        ->check(CLI::ExistingFile);

    // stats
    auto* stats = app.add_subcommand("stats", "Friedman test and Holm post-hoc over bench results");
    std::vector<std::string> stats_inputs;
    std::string stats_control, stats_metric = "auc";
    std::optional<std::string> stats_out;
    stats->add_option("--results", stats_inputs, "results.csv files, optionally as name=path")->required();
    stats->add_option("--control", stats_control, "Control algorithm name")->required();
    stats->add_option("--metric", stats_metric, "acc | auc | f1")->capture_default_str();
    stats->add_option("--out", stats_out, "Write the JSON report here");

    // explain
    auto* explain = app.add_subcommand("explain", "Linguistic IF-THEN rules of one ensemble view");
    std::string exp_model, exp_view;
    std::optional<std::string> exp_names, exp_out;
    std::optional<Index> exp_instance;
    explain->add_option("--model", exp_model, "Model JSON from 'train'")->required()->check(CLI::ExistingFile);
    explain->add_option("--view", exp_view, "View name (a data view, 'common' or 'specific')")->required();
    explain->add_option("--names", exp_names, "Feature names, one per line or comma-separated");
    explain->add_option("--instance", exp_instance, "Training row to trace through the rules");
    explain->add_option("--out", exp_out, "Directory for rules.txt and rules.json");

    CLI11_PARSE(app, argc, argv);

    auto as_path = [](const std::optional<std::string>& s) -> std::optional<fs::path> {
        if (!s) return std::nullopt;
        return fs::path(*s);
    };

    try {
        if (*mask) {
            const auto manifest = cmd_mask(mask_manifest, mask_rate, mask_seed, mask_out);
            std::cout << "wrote " << manifest.string() << "\n";
        } else if (*train) {
            const auto model = cmd_train(train_manifest, as_path(train_config), train_out);
            const auto& rep = model.representation;
            std::cout << "representation: " << rep.objective_trace.size() << " iterations, objective "
                      << (rep.objective_trace.empty() ? rep.initial_objective : rep.objective_trace.back())
                      << (rep.converged ? " (converged)" : "") << "\n";
            for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "ensemble: " << model.ensemble.n_views() << " views, " << model.ensemble.sweeps
                      << " sweeps; alpha";
            for (Index v = 0; v < model.ensemble.alpha.size(); ++v) std::cout << " " << model.ensemble.alpha(v);
            std::cout << "\nwrote " << train_out << "\n";
        } else if (*predict_cmd) {
            const auto pred = cmd_predict(pred_model, pred_manifest, pred_out);
            std::cout << "wrote " << pred.labels.size() << " predictions to " << pred_out << "\n";
        } else if (*bench) {
            bo.manifest = bench_manifest;
            bo.out_dir = bench_out;
            bo.rates = parse_rates(rates_text);
            bo.method = method_from_string(method_text);
            bo.variant = variant_from_string(variant_text);
            bo.config = as_path(bench_config);
            bo.grid = as_path(bench_grid);
            const auto res = cmd_bench(bo);
            for (const auto& r : res.aggregate.at("rates")) {
                std::cout << "rate " << r.at("rate").get<double>() << ": ACC "
                          << r.at("acc").at("formatted").get<std::string>() << "  AUC "
                          << r.at("auc").at("formatted").get<std::string>() << "  F1 "
                          << r.at("f1").at("formatted").get<std::string>() << "\n";
            }
            if (!res.all_ok()) {
                std::cerr << "some cells failed; see " << (fs::path(bench_out) / "errors.json").string() << "\n";
                return 1;
            }
        } else if (*stats) {
            const auto rep = cmd_stats(stats_inputs, stats_control, stats_metric);
            std::cout << rep.text;
            if (stats_out) write_text_file(*stats_out, rep.json_report.dump(2) + "\n");
        } else if (*explain) {
            const auto res = cmd_explain(exp_model, exp_view, as_path(exp_names), exp_instance, as_path(exp_out));
            std::cout << res.report.text;
            if (res.trace) {
                std::cout << "\n" << to_json(*res.trace).dump(2) << "\n";
            }
        }
    } catch (const InvalidArgument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
