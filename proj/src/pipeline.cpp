#include "drimv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace drimv {

namespace {

std::string fmt(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InvalidArgument(where + ": '" + s + "' is not a number");
    }
    return v;
}

void check_compatible(const TrainedModel& model, const MultiViewDataset& data) {
    const auto& rep = model.representation;
    if (data.n_views() != rep.n_views()) {
        throw InvalidArgument("model has " + std::to_string(rep.n_views()) + " views, data has " +
                              std::to_string(data.n_views()));
    }
    for (Index v = 0; v < rep.n_views(); ++v) {
        const auto& f = rep.views[static_cast<std::size_t>(v)];
        const Index expected = f.Bs.cols();
        const Index actual = data.views[static_cast<std::size_t>(v)].dim();
        if (expected != actual) {
            throw InvalidArgument("view '" + f.name + "' has dimension " + std::to_string(actual) + ", model expects " +
                                  std::to_string(expected));
        }
    }
    if (data.n_classes > model.n_classes) {
        throw InvalidArgument("data has " + std::to_string(data.n_classes) + " classes, model was trained on " +
                              std::to_string(model.n_classes));
    }
}

MultiViewDataset impute_with(const MultiViewDataset& ds, Method method, Index knn_k) {
    switch (method) {
        case Method::Mean: return mean_impute(ds).data;
        case Method::Knn: return knn_impute(ds, knn_k).data;
        case Method::Svt: return svt_complete(ds).data;
        case Method::Drimv: break;
    }
    throw InvalidArgument("not a baseline imputer");
}

// Trains on split.train and scores split.test of an already masked dataset.
MetricReport evaluate_split(const MultiViewDataset& masked, const TrainTestSplit& split, const RunConfig& cfg,
                            Method method, Index knn_k) {
    const MultiViewDataset train = subset(masked, split.train);
    const MultiViewDataset test = subset(masked, split.test);
    Prediction pred;
    if (method == Method::Drimv) {
        const TrainedModel model = train_model(train, cfg);
        pred = predict_model(model, test);
    } else {
        // Baselines impute train and test jointly in the space normalized by training statistics.
        const auto stats = fit_normalizer(train);
        const auto imputed = impute_with(apply_normalizer(masked, stats), method, knn_k);
        const auto tr = subset(imputed, split.train);
        const auto te = subset(imputed, split.test);
        const auto ens = fit_ensemble(assemble_views(tr), one_hot(tr.labels, tr.n_classes), cfg.classifier);
        pred = predict(ens, assemble_views(te));
    }
    return evaluate(test.labels, pred.labels, pred.scores, masked.n_classes);
}

RunConfig select_by_validation(const MultiViewDataset& masked, const TrainTestSplit& split,
                               const std::vector<RunConfig>& candidates, Method method, Index knn_k,
                               std::uint64_t seed) {
    const auto inner = subset(masked, split.train);
    const auto inner_split = split_indices(inner.labels, inner.n_classes, 0.2, seed, true);
    std::size_t best = 0;
    double best_acc = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double acc = -1.0;
        try {
            acc = evaluate_split(inner, inner_split, candidates[c], method, knn_k).acc;
        } catch (const Error&) {
            continue;  // an unstable setting simply loses the selection
        }
        if (acc > best_acc) {
            best_acc = acc;
            best = c;
        }
    }
    return candidates[best];
}

json summary_json(const std::vector<double>& values) {
    const auto s = summarize(values);
    return {{"mean", s.mean}, {"variance", s.variance}, {"formatted", format_summary(s)}};
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key != "representation" && key != "classifier") throw InvalidArgument("unknown config section '" + key + "'");
    }
    RunConfig cfg;
    if (j.contains("representation")) merge_config(cfg.drl, j.at("representation"));
    if (j.contains("classifier")) merge_config(cfg.classifier, j.at("classifier"));
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::optional<fs::path>& path) {
    if (!path) return RunConfig{};
    try {
        return run_config_from_json(read_json_file(*path));
    } catch (const json::exception& ex) {
        throw InvalidArgument(path->string() + ": " + ex.what());
    }
}

TrainedModel train_model(const MultiViewDataset& train, const RunConfig& cfg) {
    cfg.validate();
    validate(train);
    TrainedModel m;
    m.drl_config = cfg.drl;
    m.classifier_config = cfg.classifier;
    m.n_classes = train.n_classes;
    m.normalization = fit_normalizer(train);
    m.representation = fit(apply_normalizer(train, m.normalization), cfg.drl);
    m.ensemble = fit_ensemble(assemble_views(m.representation, cfg.classifier),
                              one_hot(train.labels, train.n_classes), cfg.classifier);
    return m;
}

Prediction predict_model(const TrainedModel& model, const MultiViewDataset& data) {
    check_compatible(model, data);
    const auto normalized = apply_normalizer(data, model.normalization);
    const DrlModel test = transform(model.representation, normalized, model.drl_config);
    return predict(model.ensemble, assemble_views(test, model.classifier_config));
}

fs::path cmd_mask(const fs::path& manifest, double rate, std::uint64_t seed, const fs::path& out_dir) {
    if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("--rate must lie in [0,1)");
    const auto ds = load_dataset(manifest);
    return save_dataset(apply_mask(ds, rate, seed), out_dir);
}

TrainedModel cmd_train(const fs::path& manifest, const std::optional<fs::path>& config, const fs::path& out) {
    const RunConfig cfg = load_run_config(config);
    const auto ds = load_dataset(manifest);
    TrainedModel model = train_model(ds, cfg);
    save_model(model, out);
    return model;
}

Prediction cmd_predict(const fs::path& model_path, const fs::path& manifest, const fs::path& out) {
    const auto model = load_model(model_path);
    const auto ds = load_dataset(manifest);
    const auto pred = predict_model(model, ds);
    std::ostringstream csv;
    for (Index c = 0; c < pred.scores.cols(); ++c) csv << "score_" << c << ",";
    csv << "label\n";
    for (Index i = 0; i < pred.scores.rows(); ++i) {
        for (Index c = 0; c < pred.scores.cols(); ++c) csv << fmt(pred.scores(i, c)) << ",";
        csv << pred.labels[static_cast<std::size_t>(i)] << "\n";
    }
    write_text_file(out, csv.str());
    return pred;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Drimv: return "drimv";
        case Method::Mean: return "mean";
        case Method::Knn: return "knn";
        case Method::Svt: return "svt";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "drimv") return Method::Drimv;
    if (s == "mean") return Method::Mean;
    if (s == "knn") return Method::Knn;
    if (s == "svt") return Method::Svt;
    throw InvalidArgument("unknown method '" + s + "' (drimv|mean|knn|svt)");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoCommon: return "no-common";
        case Variant::NoSpecific: return "no-specific";
        case Variant::NoCooperation: return "no-coop";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no-common") return Variant::NoCommon;
    if (s == "no-specific") return Variant::NoSpecific;
    if (s == "no-coop") return Variant::NoCooperation;
    throw InvalidArgument("unknown variant '" + s + "' (full|no-common|no-specific|no-coop)");
}

RunConfig apply_variant(RunConfig cfg, Variant v) {
    switch (v) {
        case Variant::Full: break;
        case Variant::NoCommon: cfg.classifier.use_common = false; break;
        case Variant::NoSpecific: cfg.classifier.use_specific = false; break;
        case Variant::NoCooperation: cfg.classifier.beta = 0.0; break;
    }
    return cfg;
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const json& grid) {
    if (!grid.is_object()) throw InvalidArgument("grid must be a JSON object");
    // (section, key, values) axes in sorted key order.
    std::vector<std::tuple<std::string, std::string, json>> axes;
    for (const auto& [section, body] : grid.items()) {
        if (section != "representation" && section != "classifier") {
            throw InvalidArgument("unknown grid section '" + section + "'");
        }
        for (const auto& [key, values] : body.items()) {
            if (!values.is_array() || values.empty()) {
                throw InvalidArgument("grid entry " + section + "." + key + " must be a non-empty array");
            }
            axes.emplace_back(section, key, values);
        }
    }
    std::vector<RunConfig> out{base};
    for (const auto& [section, key, values] : axes) {
        std::vector<RunConfig> next;
        for (const auto& cfg : out) {
            for (const auto& value : values) {
                RunConfig c = cfg;
                const json patch = {{key, value}};
                if (section == "representation") {
                    merge_config(c.drl, patch);
                } else {
                    merge_config(c.classifier, patch);
                }
                c.validate();
                next.push_back(std::move(c));
            }
        }
        out = std::move(next);
    }
    return out;
}

bool BenchResult::all_ok() const {
    return std::all_of(cells.begin(), cells.end(), [](const BenchCell& c) { return c.ok; });
}

BenchResult run_bench(const MultiViewDataset& source, const BenchOptions& opt) {
    validate(source);
    if (opt.rates.empty()) throw InvalidArgument("no mask rates given");
    for (double r : opt.rates) {
        if (!(r >= 0.0 && r < 1.0)) throw InvalidArgument("mask rates must lie in [0,1)");
    }
    if (opt.reps < 1) throw InvalidArgument("--reps must be >= 1");
    if (!(opt.test_fraction > 0.0 && opt.test_fraction < 1.0)) throw InvalidArgument("--test-fraction must lie in (0,1)");

    const RunConfig base = apply_variant(load_run_config(opt.config), opt.variant);
    std::vector<RunConfig> candidates{base};
    if (opt.grid) candidates = expand_grid(base, read_json_file(*opt.grid));

    BenchResult result;
    for (std::size_t a = 0; a < opt.rates.size(); ++a) {
        for (Index b = 0; b < opt.reps; ++b) {
            BenchCell cell;
            cell.rate_index = a;
            cell.rate = opt.rates[a];
            cell.rep = b;
            cell.seed = derive_seed(opt.seed, a, static_cast<std::uint64_t>(b));
            result.cells.push_back(cell);
        }
    }

    auto run_cell = [&](BenchCell& cell) {
        try {
            const auto masked = cell.rate > 0.0 ? apply_mask(source, cell.rate, derive_seed(cell.seed, 1)) : source;
            const auto split = split_indices(masked.labels, masked.n_classes, opt.test_fraction,
                                             derive_seed(cell.seed, 2), true);
            std::vector<RunConfig> seeded = candidates;
            for (auto& c : seeded) {
                c.drl.seed = derive_seed(cell.seed, 3);
                c.classifier.seed = derive_seed(cell.seed, 4);
            }
            const RunConfig chosen = seeded.size() == 1
                                         ? seeded.front()
                                         : select_by_validation(masked, split, seeded, opt.method, opt.knn_k,
                                                                derive_seed(cell.seed, 5));
            cell.metrics = evaluate_split(masked, split, chosen, opt.method, opt.knn_k);
            cell.ok = true;
        } catch (const std::exception& ex) {
            cell.ok = false;
            cell.error = ex.what();
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(result.cells.size())));
    if (jobs == 1) {
        for (auto& cell : result.cells) run_cell(cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (unsigned t = 0; t < jobs; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < result.cells.size(); i = next++) run_cell(result.cells[i]);
            });
        }
        for (auto& w : workers) w.join();
    }

    json rates = json::array();
    for (std::size_t a = 0; a < opt.rates.size(); ++a) {
        std::vector<double> acc, auc, f1;
        for (const auto& c : result.cells) {
            if (c.rate_index != a || !c.ok) continue;
            acc.push_back(c.metrics.acc);
            auc.push_back(c.metrics.auc);
            f1.push_back(c.metrics.f1);
        }
        rates.push_back({{"rate", opt.rates[a]},
                         {"completed", acc.size()},
                         {"acc", summary_json(acc)},
                         {"auc", summary_json(auc)},
                         {"f1", summary_json(f1)}});
    }
    result.aggregate = {{"method", to_string(opt.method)},
                        {"variant", to_string(opt.variant)},
                        {"reps", opt.reps},
                        {"seed", opt.seed},
                        {"test_fraction", opt.test_fraction},
                        {"rates", std::move(rates)}};
    return result;
}

BenchResult cmd_bench(const BenchOptions& opt) {
    const auto source = load_dataset(opt.manifest);
    BenchResult result = run_bench(source, opt);

    std::ostringstream csv;
    csv << "method,variant,rate,rep,seed,status,acc,auc,f1\n";
    json errors = json::array();
    for (const auto& c : result.cells) {
        csv << to_string(opt.method) << "," << to_string(opt.variant) << "," << fmt(c.rate) << "," << c.rep << ","
            << c.seed << "," << (c.ok ? "ok" : "error") << ",";
        if (c.ok) {
            csv << fmt(c.metrics.acc) << "," << fmt(c.metrics.auc) << "," << fmt(c.metrics.f1) << "\n";
        } else {
            csv << ",,\n";
            errors.push_back({{"rate", c.rate}, {"rep", c.rep}, {"seed", c.seed}, {"error", c.error}});
        }
    }
    fs::create_directories(opt.out_dir);
    write_text_file(opt.out_dir / "results.csv", csv.str());
    write_text_file(opt.out_dir / "summary.json", result.aggregate.dump(2) + "\n");
    write_text_file(opt.out_dir / "errors.json", errors.dump(2) + "\n");
    return result;
}

StatsReport stats_from_table(const std::vector<std::string>& algorithms, const std::vector<double>& settings,
                             const Matrix& table, const std::string& control) {
    if (table.cols() != static_cast<Index>(algorithms.size()) || table.rows() != static_cast<Index>(settings.size())) {
        throw InvalidArgument("result table shape differs from the algorithm and setting lists");
    }
    const auto it = std::find(algorithms.begin(), algorithms.end(), control);
    if (it == algorithms.end()) throw InvalidArgument("control '" + control + "' is not among the algorithms");
    const auto control_index = static_cast<Index>(it - algorithms.begin());

    StatsReport rep;
    rep.algorithms = algorithms;
    rep.settings = settings;
    rep.table = table;
    rep.friedman = friedman_test(table);
    rep.holm = holm_posthoc(rep.friedman.average_ranks, table.rows(), control_index);

    std::ostringstream txt;
    const Index k = table.cols();
    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return rep.friedman.average_ranks(a) < rep.friedman.average_ranks(b);
    });
    txt << "Friedman test: n = " << table.rows() << " settings, k = " << k << " algorithms\n";
    txt << "algorithm\taverage rank\n";
    json ranks = json::array();
    for (Index a : order) {
        const auto& name = algorithms[static_cast<std::size_t>(a)];
        txt << name << "\t" << fixed(rep.friedman.average_ranks(a), 4) << "\n";
        ranks.push_back({{"algorithm", name}, {"average_rank", rep.friedman.average_ranks(a)}});
    }
    txt << "chi2 = " << fixed(rep.friedman.statistic, 6) << ", dof = " << rep.friedman.dof
        << ", p = " << fixed(rep.friedman.p_value, 6) << (rep.friedman.degenerate ? " (all settings tied)" : "")
        << "\n\nHolm post-hoc against " << control << "\n";
    txt << "i\talgorithm\tz\tp\tholm\treject\n";
    json comparisons = json::array();
    for (const auto& c : rep.holm.comparisons) {
        const auto& name = algorithms[static_cast<std::size_t>(c.algorithm)];
        txt << c.position << "\t" << name << "\t" << fixed(c.z, 6) << "\t" << fixed(c.p, 6) << "\t"
            << fixed(c.threshold, 6) << "\t" << (c.reject ? "yes" : "no") << "\n";
        comparisons.push_back({{"i", c.position}, {"algorithm", name}, {"z", c.z}, {"p", c.p},
                               {"holm", c.threshold}, {"reject", c.reject}});
    }
    rep.text = txt.str();
    rep.json_report = {{"settings", settings},
                       {"algorithms", algorithms},
                       {"ranks", std::move(ranks)},
                       {"friedman", {{"statistic", rep.friedman.statistic},
                                     {"dof", rep.friedman.dof},
                                     {"p", rep.friedman.p_value},
                                     {"degenerate", rep.friedman.degenerate}}},
                       {"control", control},
                       {"holm", std::move(comparisons)}};
    return rep;
}

StatsReport cmd_stats(const std::vector<std::string>& inputs, const std::string& control, const std::string& metric) {
    if (metric != "acc" && metric != "auc" && metric != "f1") throw InvalidArgument("--metric must be acc, auc or f1");
    if (inputs.size() < 2) throw InvalidArgument("need results for at least two algorithms");
    std::vector<std::string> names;
    std::vector<std::map<double, double>> per_rate;
    for (const auto& input : inputs) {
        const auto eq = input.find('=');
        const fs::path path = eq == std::string::npos ? fs::path(input) : fs::path(input.substr(eq + 1));
        if (eq != std::string::npos) {
            names.push_back(input.substr(0, eq));
        } else if (path.stem() == "results" && path.has_parent_path()) {
            names.push_back(path.parent_path().filename().string());  // <bench out dir>/results.csv
        } else {
            names.push_back(path.stem().string());
        }

        std::ifstream in(path);
        if (!in) throw Error("cannot open " + path.string());
        std::string line;
        if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty results file");
        const auto header = split_csv_line(line);
        auto column = [&](const std::string& name) {
            const auto pos = std::find(header.begin(), header.end(), name);
            if (pos == header.end()) throw InvalidArgument(path.string() + ": missing column '" + name + "'");
            return static_cast<std::size_t>(pos - header.begin());
        };
        const auto rate_col = column("rate");
        const auto status_col = column("status");
        const auto metric_col = column(metric);
        std::map<double, std::pair<double, int>> sums;
        while (std::getline(in, line)) {
            if (line.empty() || line == "\r") continue;
            const auto cells = split_csv_line(line);
            if (cells.size() < header.size()) throw InvalidArgument(path.string() + ": short row");
            const double rate = parse_double(cells[rate_col], path.string());
            auto& slot = sums[rate];
            if (cells[status_col] != "ok") continue;
            slot.first += parse_double(cells[metric_col], path.string());
            slot.second += 1;
        }
        std::map<double, double> means;
        for (const auto& [rate, s] : sums) {
            if (s.second == 0) throw InvalidArgument(path.string() + ": no successful repetition at rate " + fmt(rate));
            means[rate] = s.first / s.second;
        }
        per_rate.push_back(std::move(means));
    }
    std::set<std::string> unique(names.begin(), names.end());
    if (unique.size() != names.size()) throw InvalidArgument("algorithm names must be distinct (use name=path)");

    std::vector<double> settings;
    for (const auto& [rate, mean] : per_rate.front()) settings.push_back(rate);
    for (std::size_t a = 1; a < per_rate.size(); ++a) {
        std::vector<double> other;
        for (const auto& [rate, mean] : per_rate[a]) other.push_back(rate);
        if (other != settings) {
            throw InvalidArgument("misaligned settings: '" + names[a] + "' covers different mask rates than '" +
                                  names.front() + "'");
        }
    }
    Matrix table(static_cast<Index>(settings.size()), static_cast<Index>(names.size()));
    for (std::size_t a = 0; a < names.size(); ++a) {
        for (std::size_t s = 0; s < settings.size(); ++s) {
            table(static_cast<Index>(s), static_cast<Index>(a)) = per_rate[a].at(settings[s]);
        }
    }
    auto report = stats_from_table(names, settings, table, control);
    report.json_report["metric"] = metric;
    return report;
}

Matrix training_design(const TrainedModel& model, Index v) {
    const auto views = assemble_views(model.representation, model.classifier_config);
    if (v < 0 || v >= static_cast<Index>(views.size())) throw InvalidArgument("view index out of range");
    return views[static_cast<std::size_t>(v)].data;
}

ExplainOutput cmd_explain(const fs::path& model_path, const std::string& view, const std::optional<fs::path>& names,
                          std::optional<Index> instance, const std::optional<fs::path>& out) {
    const auto model = load_model(model_path);
    const Index v = model.ensemble.find_view(view);
    if (v < 0) {
        std::string known;
        for (const auto& fv : model.ensemble.views) known += (known.empty() ? "" : ", ") + fv.name;
        throw InvalidArgument("unknown view '" + view + "' (model views: " + known + ")");
    }
    std::vector<std::string> feature_names;
    if (names) {
        std::ifstream in(*names);
        if (!in) throw Error("cannot open " + names->string());
        std::string line;
        while (std::getline(in, line)) {
            for (auto& cell : split_csv_line(line)) {
                if (!cell.empty()) feature_names.push_back(cell);
            }
        }
    }
    ExplainOutput res;
    res.report = rule_report(model.ensemble, v, feature_names);
    res.json_report = res.report.json;
    if (instance) {
        const Matrix design = training_design(model, v);
        if (*instance < 0 || *instance >= design.rows()) {
            throw InvalidArgument("--instance must lie in [0, " + std::to_string(design.rows()) + ")");
        }
        res.trace = decision_trace(model.ensemble, v, design.row(*instance));
        res.json_report["trace"] = to_json(*res.trace);
        res.json_report["trace"]["instance"] = *instance;
    }
    if (out) {
        fs::create_directories(*out);
        std::string text = res.report.text;
        if (res.trace) {
            const auto& t = *res.trace;
            std::ostringstream tr;
            tr << "\nDecision trace for training instance " << *instance << "\n";
            for (Index k = 0; k < t.strengths.size(); ++k) {
                tr << "Rule " << k + 1 << ": strength " << fixed(t.strengths(k), 6) << ", contribution";
                for (Index c = 0; c < t.contributions.cols(); ++c) tr << " " << fixed(t.contributions(k, c), 6);
                tr << "\n";
            }
            tr << "combined";
            for (Index c = 0; c < t.combined.size(); ++c) tr << " " << fixed(t.combined(c), 6);
            tr << "\ndecision: class " << t.label << ", dominant rule " << t.dominant_rule + 1 << "\n";
            text += tr.str();
        }
        write_text_file(*out / "rules.txt", text);
        write_text_file(*out / "rules.json", res.json_report.dump(2) + "\n");
    }
    return res;
}

}  // namespace drimv
