#include "drimv/classifier.hpp"

#include <cmath>

namespace drimv {

std::string to_string(ViewRole role) {
    switch (role) {
        case ViewRole::Imputed: return "imputed";
        case ViewRole::Common: return "common";
        case ViewRole::Specific: return "specific";
    }
    return "imputed";
}

ViewRole view_role_from_string(const std::string& s) {
    if (s == "imputed") return ViewRole::Imputed;
    if (s == "common") return ViewRole::Common;
    if (s == "specific") return ViewRole::Specific;
    throw InvalidArgument("unknown view role '" + s + "'");
}

std::string to_string(AlignmentMode mode) { return mode == AlignmentMode::Mean ? "mean" : "sum"; }

AlignmentMode alignment_mode_from_string(const std::string& s) {
    if (s == "mean") return AlignmentMode::Mean;
    if (s == "sum") return AlignmentMode::Sum;
    throw InvalidArgument("unknown alignment mode '" + s + "'");
}

void ClassifierConfig::validate() const {
    if (rules < 1) throw InvalidArgument("rule count must be >= 1");
    if (beta < 0.0) throw InvalidArgument("beta must be >= 0");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be > 0");
    if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");
    if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    if (std::isnan(tol) || tol < 0.0) throw InvalidArgument("tol must be >= 0");
}

Index ViewEnsemble::find_view(const std::string& name) const {
    for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].name == name) return static_cast<Index>(v);
    }
    return -1;
}

std::vector<DesignView> assemble_views(const DrlModel& model, const ClassifierConfig& cfg) {
    std::vector<DesignView> out;
    for (const auto& f : model.views) out.push_back({ViewRole::Imputed, f.name, f.imputed});
    if (cfg.use_common) out.push_back({ViewRole::Common, "common", model.Hc.transpose()});
    if (cfg.use_specific) {
        const Index m = model.latent_dim();
        Matrix zs(model.n_instances(), m * model.n_views());
        for (Index v = 0; v < model.n_views(); ++v) {
            zs.middleCols(v * m, m) = model.views[static_cast<std::size_t>(v)].Hs.transpose();
        }
        out.push_back({ViewRole::Specific, "specific", std::move(zs)});
    }
    return out;
}

std::vector<DesignView> assemble_views(const MultiViewDataset& ds) {
    std::vector<DesignView> out;
    for (const auto& v : ds.views) out.push_back({ViewRole::Imputed, v.name, v.data});
    return out;
}

std::vector<Matrix> map_views(const ViewEnsemble& ens, const std::vector<DesignView>& views) {
    if (views.size() != ens.views.size()) {
        throw InvalidArgument("ensemble has " + std::to_string(ens.views.size()) + " views, got " +
                              std::to_string(views.size()));
    }
    std::vector<Matrix> mapped;
    for (std::size_t v = 0; v < views.size(); ++v) {
        const auto& ant = ens.views[v].antecedent;
        if (views[v].data.cols() != ant.features()) {
            throw InvalidArgument("view '" + views[v].name + "' has " + std::to_string(views[v].data.cols()) +
                                  " features, ensemble expects " + std::to_string(ant.features()));
        }
        mapped.push_back(fuzzy_map(views[v].data, ant));
    }
    return mapped;
}

Matrix alignment_target(const std::vector<Matrix>& predictions, Index v, AlignmentMode mode) {
    const auto& self = predictions[static_cast<std::size_t>(v)];
    Matrix lambda = Matrix::Zero(self.rows(), self.cols());
    for (std::size_t l = 0; l < predictions.size(); ++l) {
        if (static_cast<Index>(l) != v) lambda += predictions[l];
    }
    if (mode == AlignmentMode::Mean && predictions.size() > 1) {
        lambda /= static_cast<double>(predictions.size() - 1);
    }
    return lambda;
}

namespace {

std::vector<Matrix> current_predictions(const ViewEnsemble& ens, const std::vector<Matrix>& mapped) {
    std::vector<Matrix> preds;
    for (std::size_t v = 0; v < mapped.size(); ++v) preds.push_back(mapped[v] * ens.views[v].consequent);
    return preds;
}

}  // namespace

void update_consequents(ViewEnsemble& ens, const std::vector<Matrix>& mapped, const Matrix& Y,
                        const ClassifierConfig& cfg) {
    auto preds = current_predictions(ens, mapped);
    for (std::size_t v = 0; v < mapped.size(); ++v) {
        const Matrix& g = mapped[v];
        const double a = ens.alpha(static_cast<Index>(v));
        const Matrix lambda = alignment_target(preds, static_cast<Index>(v), cfg.alignment);
        Matrix lhs = (a + cfg.beta) * (g.transpose() * g);
        lhs.diagonal().array() += cfg.delta;
        const Matrix rhs = g.transpose() * (a * Y + cfg.beta * lambda);
        Eigen::LLT<Matrix> llt(lhs);
        if (llt.info() != Eigen::Success) throw NumericalError("consequent system is not positive definite");
        ens.views[v].consequent = llt.solve(rhs);
        preds[v] = g * ens.views[v].consequent;
    }
}

Vector view_losses(const ViewEnsemble& ens, const std::vector<Matrix>& mapped, const Matrix& Y) {
    Vector loss(static_cast<Index>(mapped.size()));
    for (std::size_t v = 0; v < mapped.size(); ++v) {
        loss(static_cast<Index>(v)) = (mapped[v] * ens.views[v].consequent - Y).squaredNorm();
    }
    return loss;
}

void update_weights(ViewEnsemble& ens, const std::vector<Matrix>& mapped, const Matrix& Y,
                    const ClassifierConfig& cfg) {
    const Vector loss = view_losses(ens, mapped, Y);
    const double lowest = loss.minCoeff();
    Vector w = (-(loss.array() - lowest) / cfg.gamma).unaryExpr([](double l) { return std::exp(l); }).matrix();
    ens.alpha = w / w.sum();
}

double ensemble_objective(const ViewEnsemble& ens, const std::vector<Matrix>& mapped, const Matrix& Y,
                          const ClassifierConfig& cfg) {
    const auto preds = current_predictions(ens, mapped);
    double j = 0.0;
    for (std::size_t v = 0; v < preds.size(); ++v) {
        const double a = ens.alpha(static_cast<Index>(v));
        j += a * (preds[v] - Y).squaredNorm();
        j += cfg.beta * (preds[v] - alignment_target(preds, static_cast<Index>(v), cfg.alignment)).squaredNorm();
        if (a > 0.0) j += cfg.gamma * a * std::log(a);
        j += cfg.delta * ens.views[v].consequent.squaredNorm();
    }
    if (!std::isfinite(j)) throw NumericalError("classifier objective is not finite");
    return j;
}

ViewEnsemble fit_ensemble(const std::vector<DesignView>& views, const Matrix& Y, const ClassifierConfig& cfg) {
    cfg.validate();
    if (views.empty()) throw InvalidArgument("no views to train on");
    ViewEnsemble ens;
    ens.n_classes = static_cast<int>(Y.cols());
    for (const auto& dv : views) {
        if (dv.data.rows() != Y.rows()) throw InvalidArgument("view '" + dv.name + "' row count differs from labels");
        FuzzyView fv;
        fv.role = dv.role;
        fv.name = dv.name;
        fv.antecedent = estimate_antecedent(dv.data, cfg.rules, cfg.width_scale, cfg.width_floor);
        fv.consequent = Matrix::Zero(cfg.rules * (1 + dv.data.cols()), Y.cols());
        ens.views.push_back(std::move(fv));
    }
    const auto nv = static_cast<Index>(views.size());
    ens.alpha = Vector::Constant(nv, 1.0 / static_cast<double>(nv));
    const auto mapped = map_views(ens, views);

    for (Index t = 0; t < cfg.max_iters; ++t) {
        std::vector<Matrix> previous;
        for (const auto& fv : ens.views) previous.push_back(fv.consequent);
        update_consequents(ens, mapped, Y, cfg);
        update_weights(ens, mapped, Y, cfg);
        ens.objective_trace.push_back(ensemble_objective(ens, mapped, Y, cfg));
        ens.sweeps = t + 1;

        double change = 0.0;
        for (std::size_t v = 0; v < ens.views.size(); ++v) {
            const auto& p = ens.views[v].consequent;
            if (!p.allFinite()) throw NumericalError("non-finite consequent parameters (divergence)");
            change = std::max(change, (p - previous[v]).norm() / (1.0 + p.norm()));
        }
        if (change < cfg.tol) {
            ens.converged = true;
            break;
        }
    }
    return ens;
}

std::vector<int> argmax_rows(const Matrix& scores) {
    std::vector<int> labels(static_cast<std::size_t>(scores.rows()));
    for (Index i = 0; i < scores.rows(); ++i) {
        Index best = 0;
        for (Index c = 1; c < scores.cols(); ++c) {
            if (scores(i, c) > scores(i, best)) best = c;
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

Prediction predict(const ViewEnsemble& ens, const std::vector<DesignView>& views) {
    const auto mapped = map_views(ens, views);
    Prediction out;
    out.scores = Matrix::Zero(views.front().data.rows(), ens.n_classes);
    for (std::size_t v = 0; v < mapped.size(); ++v) {
        out.scores += ens.alpha(static_cast<Index>(v)) * tsk_output(mapped[v], ens.views[v].consequent);
    }
    out.labels = argmax_rows(out.scores);
    return out;
}

Matrix view_scores(const ViewEnsemble& ens, Index v, const Matrix& data) {
    const auto& fv = ens.views.at(static_cast<std::size_t>(v));
    return tsk_output(fuzzy_map(data, fv.antecedent), fv.consequent);
}

}  // namespace drimv
