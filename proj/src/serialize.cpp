#include "drimv/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace drimv {

namespace {

constexpr int kModelFormat = 1;

json vector_to_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

json tol_to_json(double tol) {
    if (std::isinf(tol)) return "inf";
    return tol;
}

double tol_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw InvalidArgument("tol must be a number or \"inf\"");
    }
    return j.get<double>();
}

const json& require(const json& j, const char* key) {
    if (!j.contains(key)) throw InvalidArgument(std::string("model document lacks '") + key + "'");
    return j.at(key);
}

template <class T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json matrix_to_json(const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
        throw InvalidArgument("matrix entry count does not match its shape");
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)];
    }
    return m;
}

json to_json(const DrlConfig& c) {
    return {{"latent_dim", c.latent_dim}, {"lambda1", c.lambda1},   {"lambda2", c.lambda2},
            {"lambda3", c.lambda3},       {"neighbors", c.neighbors}, {"max_iters", c.max_iters},
            {"tol", tol_to_json(c.tol)},  {"ridge", c.ridge},       {"graph_refresh", c.graph_refresh},
            {"seed", c.seed}};
}

json to_json(const ClassifierConfig& c) {
    return {{"rules", c.rules},
            {"beta", c.beta},
            {"gamma", c.gamma},
            {"delta", c.delta},
            {"max_iters", c.max_iters},
            {"tol", tol_to_json(c.tol)},
            {"alignment", to_string(c.alignment)},
            {"width_scale", c.width_scale},
            {"width_floor", c.width_floor},
            {"use_common", c.use_common},
            {"use_specific", c.use_specific},
            {"seed", c.seed}};
}

void merge_config(DrlConfig& c, const json& j) {
    if (!j.is_object()) throw InvalidArgument("representation config must be a JSON object");
    take(j, "latent_dim", c.latent_dim);
    take(j, "lambda1", c.lambda1);
    take(j, "lambda2", c.lambda2);
    take(j, "lambda3", c.lambda3);
    take(j, "neighbors", c.neighbors);
    take(j, "max_iters", c.max_iters);
    if (j.contains("tol")) c.tol = tol_from_json(j.at("tol"));
    take(j, "ridge", c.ridge);
    if (j.contains("graph_refresh")) {
        const auto& g = j.at("graph_refresh");
        c.graph_refresh = g.is_string() && g.get<std::string>() == "inf" ? 0 : g.get<Index>();
    }
    take(j, "seed", c.seed);
}

void merge_config(ClassifierConfig& c, const json& j) {
    if (!j.is_object()) throw InvalidArgument("classifier config must be a JSON object");
    take(j, "rules", c.rules);
    take(j, "beta", c.beta);
    take(j, "gamma", c.gamma);
    take(j, "delta", c.delta);
    take(j, "max_iters", c.max_iters);
    if (j.contains("tol")) c.tol = tol_from_json(j.at("tol"));
    if (j.contains("alignment")) c.alignment = alignment_mode_from_string(j.at("alignment").get<std::string>());
    take(j, "width_scale", c.width_scale);
    take(j, "width_floor", c.width_floor);
    take(j, "use_common", c.use_common);
    take(j, "use_specific", c.use_specific);
    take(j, "seed", c.seed);
}

json to_json(const TrainedModel& m) {
    json doc;
    doc["format"] = kModelFormat;
    doc["n_classes"] = m.n_classes;
    doc["config"] = {{"representation", to_json(m.drl_config)}, {"classifier", to_json(m.classifier_config)}};

    json norm = json::array();
    for (std::size_t v = 0; v < m.normalization.min.size(); ++v) {
        norm.push_back({{"min", vector_to_json(m.normalization.min[v])},
                        {"max", vector_to_json(m.normalization.max[v])}});
    }
    doc["normalization"] = std::move(norm);

    const auto& r = m.representation;
    json views = json::array();
    for (std::size_t v = 0; v < r.views.size(); ++v) {
        const auto& f = r.views[v];
        views.push_back({{"name", f.name},
                         {"Bs", matrix_to_json(f.Bs)},
                         {"Bc", matrix_to_json(f.Bc)},
                         {"Hs", matrix_to_json(f.Hs)},
                         {"U", matrix_to_json(f.U)},
                         {"observed", matrix_to_json(f.observed)},
                         {"imputed", matrix_to_json(f.imputed)},
                         {"missing", f.missing},
                         {"feature_means", vector_to_json(r.feature_means.at(v))}});
    }
    doc["representation"] = {{"views", std::move(views)},
                             {"Hc", matrix_to_json(r.Hc)},
                             {"initial_objective", r.initial_objective},
                             {"objective_trace", r.objective_trace},
                             {"converged", r.converged},
                             {"warnings", r.warnings}};

    const auto& e = m.ensemble;
    json fviews = json::array();
    for (const auto& fv : e.views) {
        fviews.push_back({{"name", fv.name},
                          {"role", to_string(fv.role)},
                          {"centers", matrix_to_json(fv.antecedent.centers)},
                          {"widths", matrix_to_json(fv.antecedent.widths)},
                          {"consequent", matrix_to_json(fv.consequent)}});
    }
    doc["ensemble"] = {{"views", std::move(fviews)},
                       {"alpha", vector_to_json(e.alpha)},
                       {"sweeps", e.sweeps},
                       {"converged", e.converged},
                       {"objective_trace", e.objective_trace}};
    return doc;
}

TrainedModel model_from_json(const json& doc) {
    try {
        if (require(doc, "format").get<int>() != kModelFormat) throw InvalidArgument("unsupported model format");
        TrainedModel m;
        m.n_classes = require(doc, "n_classes").get<int>();
        const auto& cfg = require(doc, "config");
        merge_config(m.drl_config, require(cfg, "representation"));
        merge_config(m.classifier_config, require(cfg, "classifier"));

        for (const auto& n : require(doc, "normalization")) {
            m.normalization.min.push_back(vector_from_json(n.at("min")));
            m.normalization.max.push_back(vector_from_json(n.at("max")));
        }

        const auto& r = require(doc, "representation");
        for (const auto& jv : r.at("views")) {
            ViewFactors f;
            f.name = jv.at("name").get<std::string>();
            f.Bs = matrix_from_json(jv.at("Bs"));
            f.Bc = matrix_from_json(jv.at("Bc"));
            f.Hs = matrix_from_json(jv.at("Hs"));
            f.U = matrix_from_json(jv.at("U"));
            f.observed = matrix_from_json(jv.at("observed"));
            f.imputed = matrix_from_json(jv.at("imputed"));
            f.missing = jv.at("missing").get<std::vector<Index>>();
            m.representation.feature_means.push_back(vector_from_json(jv.at("feature_means")));
            m.representation.views.push_back(std::move(f));
        }
        m.representation.Hc = matrix_from_json(r.at("Hc"));
        m.representation.initial_objective = r.at("initial_objective").get<double>();
        m.representation.objective_trace = r.at("objective_trace").get<std::vector<double>>();
        m.representation.converged = r.at("converged").get<bool>();
        m.representation.warnings = r.at("warnings").get<std::vector<std::string>>();

        const auto& e = require(doc, "ensemble");
        for (const auto& jv : e.at("views")) {
            FuzzyView fv;
            fv.name = jv.at("name").get<std::string>();
            fv.role = view_role_from_string(jv.at("role").get<std::string>());
            fv.antecedent.centers = matrix_from_json(jv.at("centers"));
            fv.antecedent.widths = matrix_from_json(jv.at("widths"));
            fv.consequent = matrix_from_json(jv.at("consequent"));
            m.ensemble.views.push_back(std::move(fv));
        }
        m.ensemble.alpha = vector_from_json(e.at("alpha"));
        m.ensemble.n_classes = m.n_classes;
        m.ensemble.sweeps = e.at("sweeps").get<Index>();
        m.ensemble.converged = e.at("converged").get<bool>();
        m.ensemble.objective_trace = e.at("objective_trace").get<std::vector<double>>();
        if (m.ensemble.alpha.size() != m.ensemble.n_views()) {
            throw InvalidArgument("alpha length differs from the number of ensemble views");
        }
        return m;
    } catch (const json::exception& ex) {
        throw InvalidArgument(std::string("malformed model document: ") + ex.what());
    }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    write_text_file(path, to_json(model).dump(1) + "\n");
}

TrainedModel load_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw InvalidArgument(path.string() + ": " + ex.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace drimv
