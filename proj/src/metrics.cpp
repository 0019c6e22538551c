#include "drimv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace drimv {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a == 0) throw InvalidArgument("empty input");
    if (a != b) throw InvalidArgument("label and prediction lengths differ");
}

double binary_f1(const std::vector<int>& labels, const std::vector<int>& predictions, int positive) {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool truth = labels[i] == positive;
        const bool guess = predictions[i] == positive;
        tp += truth && guess;
        fp += !truth && guess;
        fn += truth && !guess;
    }
    const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

// Average ranks in ascending order (rank 1 = smallest).
std::vector<double> ascending_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double accuracy(const std::vector<int>& labels, const std::vector<int>& predictions) {
    check_lengths(labels.size(), predictions.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == predictions[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double f1_score(const std::vector<int>& labels, const std::vector<int>& predictions, int n_classes,
                int positive_class) {
    check_lengths(labels.size(), predictions.size());
    if (n_classes <= 2) return binary_f1(labels, predictions, positive_class);
    double total = 0.0;
    for (int c = 0; c < n_classes; ++c) total += binary_f1(labels, predictions, c);
    return total / static_cast<double>(n_classes);
}

double auc_binary(const std::vector<bool>& positive, const std::vector<double>& scores) {
    check_lengths(positive.size(), scores.size());
    const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
    const double n_neg = static_cast<double>(positive.size()) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) throw InvalidArgument("AUC needs both positive and negative instances");
    const auto ranks = ascending_ranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (positive[i]) rank_sum += ranks[i];
    }
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double auc_score(const std::vector<int>& labels, const Matrix& scores, int positive_class) {
    if (static_cast<Index>(labels.size()) != scores.rows()) throw InvalidArgument("label and score lengths differ");
    auto column_auc = [&](int c) {
        std::vector<bool> pos(labels.size());
        std::vector<double> s(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            pos[i] = labels[i] == c;
            s[i] = scores(static_cast<Index>(i), c);
        }
        return auc_binary(pos, s);
    };
    if (scores.cols() <= 2) return column_auc(positive_class);
    double total = 0.0;
    for (int c = 0; c < scores.cols(); ++c) total += column_auc(c);
    return total / static_cast<double>(scores.cols());
}

MetricReport evaluate(const std::vector<int>& labels, const std::vector<int>& predictions, const Matrix& scores,
                      int n_classes, int positive_class) {
    MetricReport r;
    r.acc = accuracy(labels, predictions);
    r.f1 = f1_score(labels, predictions, n_classes, positive_class);
    r.auc = auc_score(labels, scores, positive_class);
    return r;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.variance = ss / static_cast<double>(values.size() - 1);
    }
    return s;
}

std::string format_summary(const Summary& s, int digits) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.*f±%.*f", digits, s.mean, digits, s.variance);
    return buf;
}

Vector descending_ranks(const Eigen::Ref<const Vector>& values) {
    std::vector<double> neg(static_cast<std::size_t>(values.size()));
    for (Index i = 0; i < values.size(); ++i) neg[static_cast<std::size_t>(i)] = -values(i);
    const auto r = ascending_ranks(neg);
    return Eigen::Map<const Vector>(r.data(), static_cast<Index>(r.size()));
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw InvalidArgument("gamma_q needs a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    constexpr double eps = 1e-16;
    if (x < a + 1.0) {
        // Series for P(a, x).
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int n = 0; n < 10000; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return 1.0 - sum * std::exp(log_prefix);
    }
    // Modified Lentz continued fraction for Q(a, x).
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return std::exp(log_prefix) * h;
}

double chi_square_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * df, 0.5 * x);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

FriedmanResult friedman_test(const Matrix& results) {
    const Index n = results.rows();
    const Index k = results.cols();
    if (n < 2 || k < 2) throw InvalidArgument("Friedman test needs at least 2 settings and 2 algorithms");
    FriedmanResult res;
    res.n_settings = n;
    res.dof = k - 1;
    res.average_ranks = Vector::Zero(k);
    bool all_tied = true;
    for (Index i = 0; i < n; ++i) {
        const Vector row = results.row(i).transpose();
        res.average_ranks += descending_ranks(row);
        all_tied = all_tied && (row.array() == row(0)).all();
    }
    res.average_ranks /= static_cast<double>(n);
    if (all_tied) {
        res.degenerate = true;
        res.statistic = 0.0;
        res.p_value = 1.0;
        return res;
    }
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    res.statistic = 12.0 * nd / (kd * (kd + 1.0)) *
                    (res.average_ranks.squaredNorm() - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
    res.statistic = std::max(res.statistic, 0.0);
    res.p_value = chi_square_sf(res.statistic, static_cast<double>(res.dof));
    return res;
}

HolmResult holm_posthoc(const Eigen::Ref<const Vector>& average_ranks, Index n_settings, Index control,
                        double alpha) {
    const Index k = average_ranks.size();
    if (control < 0 || control >= k) throw InvalidArgument("control index out of range");
    if (n_settings < 1) throw InvalidArgument("need at least one setting");
    const double se = std::sqrt(static_cast<double>(k) * static_cast<double>(k + 1) / (6.0 * static_cast<double>(n_settings)));
    HolmResult res;
    res.control = control;
    for (Index j = 0; j < k; ++j) {
        if (j == control) continue;
        HolmComparison c;
        c.algorithm = j;
        c.z = (average_ranks(j) - average_ranks(control)) / se;
        c.p = std::min(1.0, 2.0 * normal_sf(std::abs(c.z)));
        res.comparisons.push_back(c);
    }
    std::stable_sort(res.comparisons.begin(), res.comparisons.end(),
                     [](const HolmComparison& a, const HolmComparison& b) { return a.p < b.p; });
    bool still_rejecting = true;
    const auto m = static_cast<Index>(res.comparisons.size());
    for (Index i = 0; i < m; ++i) {
        auto& c = res.comparisons[static_cast<std::size_t>(i)];
        c.position = m - i;
        c.threshold = alpha / static_cast<double>(c.position);
        still_rejecting = still_rejecting && c.p < c.threshold;
        c.reject = still_rejecting;
    }
    return res;
}

}  // namespace drimv
