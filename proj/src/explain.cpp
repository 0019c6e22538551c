#include "drimv/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace drimv {

using nlohmann::json;

std::vector<std::string> default_vocabulary(Index K) {
    switch (K) {
        case 2: return {"Small", "Large"};
        case 4: return {"Small", "Medium", "Little Large", "Large"};
        case 5: return {"Small", "Medium", "Little Large", "Large", "Very Large"};
        default: break;
    }
    std::vector<std::string> out;
    for (Index i = 1; i <= K; ++i) out.push_back("Level " + std::to_string(i) + " of " + std::to_string(K));
    return out;
}

LinguisticLabels linguistic_labels(const Antecedent& ant, const std::optional<std::vector<std::string>>& vocabulary) {
    const Index K = ant.rules();
    const auto vocab = vocabulary.value_or(default_vocabulary(K));
    if (static_cast<Index>(vocab.size()) != K) {
        throw InvalidArgument("vocabulary has " + std::to_string(vocab.size()) + " terms for " + std::to_string(K) +
                              " rules");
    }
    LinguisticLabels out;
    out.labels.assign(static_cast<std::size_t>(K), std::vector<std::string>(static_cast<std::size_t>(ant.features())));
    std::vector<Index> order(static_cast<std::size_t>(K));
    for (Index j = 0; j < ant.features(); ++j) {
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return ant.centers(a, j) < ant.centers(b, j); });
        for (std::size_t r = 0; r < order.size(); ++r) {
            out.labels[static_cast<std::size_t>(order[r])][static_cast<std::size_t>(j)] = vocab[r];
            if (r > 0 && ant.centers(order[r], j) == ant.centers(order[r - 1], j)) out.degenerate = true;
        }
    }
    return out;
}

namespace {

std::string fixed4(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    return buf;
}

std::string ordinal_rule(Index k) {
    return "Rule " + std::to_string(k + 1);
}

}  // namespace

RuleReport rule_report(const ViewEnsemble& ens, Index view, std::vector<std::string> feature_names) {
    if (view < 0 || view >= ens.n_views()) throw InvalidArgument("view index out of range");
    const auto& fv = ens.views[static_cast<std::size_t>(view)];
    const Index K = fv.antecedent.rules();
    const Index d = fv.antecedent.features();
    if (feature_names.empty()) {
        for (Index j = 0; j < d; ++j) feature_names.push_back("f" + std::to_string(j));
    }
    if (static_cast<Index>(feature_names.size()) != d) {
        throw InvalidArgument("view '" + fv.name + "' has " + std::to_string(d) + " features but " +
                              std::to_string(feature_names.size()) + " names were given");
    }
    const auto labels = linguistic_labels(fv.antecedent);
    const Index C = fv.consequent.cols();

    std::ostringstream text;
    json doc;
    doc["view"] = fv.name;
    doc["role"] = to_string(fv.role);
    doc["features"] = feature_names;
    doc["degenerate_labels"] = labels.degenerate;
    doc["rules"] = json::array();
    for (Index k = 0; k < K; ++k) {
        text << ordinal_rule(k) << ": IF ";
        json rule;
        rule["index"] = k + 1;
        rule["antecedent"] = json::array();
        for (Index j = 0; j < d; ++j) {
            const auto& label = labels.labels[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            text << (j ? " and " : "") << "the " << feature_names[static_cast<std::size_t>(j)] << " is " << label;
            rule["antecedent"].push_back({{"feature", feature_names[static_cast<std::size_t>(j)]},
                                          {"label", label},
                                          {"center", fv.antecedent.centers(k, j)},
                                          {"width", fv.antecedent.widths(k, j)}});
        }
        text << "\n  THEN ";
        rule["consequent"] = json::array();
        for (Index c = 0; c < C; ++c) {
            const Index base = k * (1 + d);
            std::vector<double> coeffs;
            text << (c ? "\n   and " : "") << "output " << c + 1 << " is " << fixed4(fv.consequent(base, c));
            coeffs.push_back(fv.consequent(base, c));
            for (Index j = 0; j < d; ++j) {
                const double w = fv.consequent(base + 1 + j, c);
                coeffs.push_back(w);
                text << (w < 0.0 ? " - " : " + ") << fixed4(std::abs(w)) << " x_"
                     << feature_names[static_cast<std::size_t>(j)];
            }
            rule["consequent"].push_back({{"class", c}, {"intercept", coeffs.front()},
                                          {"coefficients", std::vector<double>(coeffs.begin() + 1, coeffs.end())}});
        }
        text << "\n";
        doc["rules"].push_back(std::move(rule));
    }
    return {text.str(), std::move(doc)};
}

DecisionTrace decision_trace(const ViewEnsemble& ens, Index view, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    if (view < 0 || view >= ens.n_views()) throw InvalidArgument("view index out of range");
    const auto& fv = ens.views[static_cast<std::size_t>(view)];
    const Index K = fv.antecedent.rules();
    const Index d = fv.antecedent.features();
    if (x.size() != d) {
        throw InvalidArgument("instance has " + std::to_string(x.size()) + " features, view '" + fv.name +
                              "' expects " + std::to_string(d));
    }
    const Index C = fv.consequent.cols();
    DecisionTrace tr;
    tr.strengths = firing_strengths(x, fv.antecedent).normalized;
    tr.rule_outputs.resize(K, C);
    tr.contributions.resize(K, C);
    Eigen::RowVectorXd xe(1 + d);
    xe << 1.0, x;
    double best = -1.0;
    for (Index k = 0; k < K; ++k) {
        tr.rule_outputs.row(k) = xe * fv.consequent.middleRows(k * (1 + d), 1 + d);
        tr.contributions.row(k) = tr.strengths(k) * tr.rule_outputs.row(k);
        const double score = tr.strengths(k) * tr.rule_outputs.row(k).norm();
        if (score > best) {
            best = score;
            tr.dominant_rule = k;
        }
    }
    tr.combined = tr.contributions.colwise().sum();
    Index arg = 0;
    for (Index c = 1; c < C; ++c) {
        if (tr.combined(c) > tr.combined(arg)) arg = c;
    }
    tr.label = static_cast<int>(arg);
    tr.decision = Eigen::RowVectorXd::Zero(C);
    tr.decision(arg) = 1.0;
    return tr;
}

json to_json(const DecisionTrace& tr) {
    auto rows = [](const Matrix& m) {
        json out = json::array();
        for (Index i = 0; i < m.rows(); ++i) {
            std::vector<double> r;
            for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
            out.push_back(r);
        }
        return out;
    };
    auto vec = [](const auto& v) {
        std::vector<double> out;
        for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
        return out;
    };
    json doc;
    doc["strengths"] = vec(tr.strengths);
    doc["rule_outputs"] = rows(tr.rule_outputs);
    doc["contributions"] = rows(tr.contributions);
    doc["combined"] = vec(tr.combined);
    doc["decision"] = vec(tr.decision);
    doc["label"] = tr.label;
    doc["dominant_rule"] = tr.dominant_rule + 1;
    return doc;
}

}  // namespace drimv
