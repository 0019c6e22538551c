#include "drimv/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace drimv {

namespace fs = std::filesystem;
using nlohmann::json;

Index ViewBlock::n_present() const {
    return static_cast<Index>(std::count(present.begin(), present.end(), true));
}

Vector ViewBlock::indicator() const {
    Vector e(static_cast<Index>(present.size()));
    for (std::size_t i = 0; i < present.size(); ++i) {
        e(static_cast<Index>(i)) = present[i] ? 0.0 : 1.0;
    }
    return e;
}

std::vector<Index> ViewBlock::missing_rows() const {
    std::vector<Index> rows;
    for (std::size_t i = 0; i < present.size(); ++i) {
        if (!present[i]) rows.push_back(static_cast<Index>(i));
    }
    return rows;
}

std::vector<Index> ViewBlock::present_rows() const {
    std::vector<Index> rows;
    for (std::size_t i = 0; i < present.size(); ++i) {
        if (present[i]) rows.push_back(static_cast<Index>(i));
    }
    return rows;
}

std::vector<Index> MultiViewDataset::dims() const {
    std::vector<Index> out;
    for (const auto& v : views) out.push_back(v.dim());
    return out;
}

bool MultiViewDataset::complete() const {
    return std::all_of(views.begin(), views.end(), [](const ViewBlock& v) {
        return std::all_of(v.present.begin(), v.present.end(), [](bool p) { return p; });
    });
}

void validate(const MultiViewDataset& ds) {
    if (ds.views.empty()) throw InvalidArgument("dataset has no views");
    const Index n = ds.n_instances();
    for (const auto& v : ds.views) {
        if (v.data.rows() != n || static_cast<Index>(v.present.size()) != n) {
            throw InvalidArgument("dimension mismatch: view '" + v.name + "' has " +
                                  std::to_string(v.data.rows()) + " rows, expected " +
                                  std::to_string(n));
        }
        if (v.data.cols() < 1) throw InvalidArgument("view '" + v.name + "' has no features");
    }
    for (Index i = 0; i < n; ++i) {
        const int y = ds.labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= ds.n_classes) {
            throw InvalidArgument("label " + std::to_string(y) + " of instance " + std::to_string(i) +
                                  " outside 0.." + std::to_string(ds.n_classes - 1));
        }
        bool any = false;
        for (const auto& v : ds.views) any = any || v.present[static_cast<std::size_t>(i)];
        if (!any) throw InvalidArgument("instance " + std::to_string(i) + " has no observed view");
    }
}

void canonicalize(MultiViewDataset& ds) {
    for (auto& v : ds.views) {
        for (Index i = 0; i < v.data.rows(); ++i) {
            if (!v.present[static_cast<std::size_t>(i)]) v.data.row(i).setZero();
        }
    }
}

// ---------------------------------------------------------------------------
// CSV I/O

namespace {

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t end = line.find(',', start);
            std::string_view cell(line.data() + start,
                                  (end == std::string::npos ? line.size() : end) - start);
            while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
            while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
            double value = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
                throw InvalidArgument("non-numeric cell '" + std::string(cell) + "' at " +
                                      path.string() + ":" + std::to_string(line_no));
            }
            row.push_back(value);
            if (end == std::string::npos) break;
            start = end + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InvalidArgument("ragged row at " + path.string() + ":" + std::to_string(line_no));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
}

}  // namespace

MultiViewDataset load_dataset(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error("cannot open manifest " + manifest_path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidArgument("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    const fs::path base = manifest_path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    MultiViewDataset ds;
    const auto label_rows = read_numeric_csv(resolve(doc.at("labels").get<std::string>()));
    for (const auto& row : label_rows) {
        if (row.size() != 1 || row[0] != std::floor(row[0])) {
            throw InvalidArgument("labels file must hold one integer per row");
        }
        ds.labels.push_back(static_cast<int>(row[0]));
    }
    const Index n = static_cast<Index>(ds.labels.size());
    if (doc.contains("classes") && !doc["classes"].is_null()) {
        ds.n_classes = doc["classes"].get<int>();
    } else {
        ds.n_classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    }

    for (const auto& vdoc : doc.at("views")) {
        ViewBlock v;
        v.name = vdoc.at("name").get<std::string>();
        const auto rows = read_numeric_csv(resolve(vdoc.at("file").get<std::string>()));
        if (static_cast<Index>(rows.size()) != n) {
            throw InvalidArgument("dimension mismatch: view '" + v.name + "' has " +
                                  std::to_string(rows.size()) + " rows but labels have " +
                                  std::to_string(n));
        }
        const Index d = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
        if (vdoc.contains("dim") && vdoc["dim"].get<Index>() != d) {
            throw InvalidArgument("dimension mismatch: view '" + v.name + "' declares dim " +
                                  std::to_string(vdoc["dim"].get<Index>()) + " but file has " +
                                  std::to_string(d) + " columns");
        }
        v.data.resize(n, d);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < d; ++j) v.data(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        v.present.assign(static_cast<std::size_t>(n), true);
        ds.views.push_back(std::move(v));
    }

    if (doc.contains("mask") && !doc["mask"].is_null()) {
        const auto mask = read_numeric_csv(resolve(doc["mask"].get<std::string>()));
        if (static_cast<Index>(mask.size()) != n) {
            throw InvalidArgument("dimension mismatch: mask has " + std::to_string(mask.size()) +
                                  " rows, expected " + std::to_string(n));
        }
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i].size() != ds.views.size()) {
                throw InvalidArgument("dimension mismatch: mask row " + std::to_string(i) + " has " +
                                      std::to_string(mask[i].size()) + " columns, expected " +
                                      std::to_string(ds.views.size()));
            }
            for (std::size_t v = 0; v < ds.views.size(); ++v) {
                if (mask[i][v] != 0.0 && mask[i][v] != 1.0) {
                    throw InvalidArgument("mask entries must be 0 or 1");
                }
                ds.views[v].present[i] = mask[i][v] == 1.0;
            }
        }
    }
    canonicalize(ds);
    validate(ds);
    return ds;
}

fs::path save_dataset(const MultiViewDataset& ds, const fs::path& dir) {
    fs::create_directories(dir);
    json doc;
    doc["views"] = json::array();
    for (const auto& v : ds.views) {
        const std::string file = v.name + ".csv";
        std::vector<std::string> header;
        for (Index j = 0; j < v.dim(); ++j) header.push_back("f" + std::to_string(j));
        write_csv(dir / file, header, v.data);
        doc["views"].push_back({{"name", v.name}, {"file", file}, {"dim", v.dim()}});
    }
    Matrix labels(ds.n_instances(), 1);
    Matrix mask(ds.n_instances(), ds.n_views());
    for (Index i = 0; i < ds.n_instances(); ++i) {
        labels(i, 0) = ds.labels[static_cast<std::size_t>(i)];
        for (Index v = 0; v < ds.n_views(); ++v) {
            mask(i, v) = ds.views[static_cast<std::size_t>(v)].present[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
        }
    }
    write_csv(dir / "labels.csv", {"label"}, labels);
    std::vector<std::string> mask_header;
    for (const auto& v : ds.views) mask_header.push_back(v.name);
    write_csv(dir / "mask.csv", mask_header, mask);
    doc["labels"] = "labels.csv";
    doc["mask"] = "mask.csv";
    doc["classes"] = ds.n_classes;
    const fs::path manifest = dir / "manifest.json";
    std::ofstream out(manifest);
    out << doc.dump(2) << '\n';
    return manifest;
}

// ---------------------------------------------------------------------------
// Normalization

NormalizationStats fit_normalizer(const MultiViewDataset& ds) {
    NormalizationStats stats;
    for (const auto& v : ds.views) {
        const auto rows = v.present_rows();
        if (rows.empty()) throw InvalidArgument("view '" + v.name + "' has no present rows");
        Vector lo = Vector::Constant(v.dim(), std::numeric_limits<double>::infinity());
        Vector hi = Vector::Constant(v.dim(), -std::numeric_limits<double>::infinity());
        for (Index i : rows) {
            lo = lo.cwiseMin(v.data.row(i).transpose());
            hi = hi.cwiseMax(v.data.row(i).transpose());
        }
        stats.min.push_back(lo);
        stats.max.push_back(hi);
    }
    return stats;
}

MultiViewDataset apply_normalizer(const MultiViewDataset& ds, const NormalizationStats& stats) {
    if (stats.min.size() != ds.views.size()) throw InvalidArgument("normalizer/view count mismatch");
    MultiViewDataset out = ds;
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        auto& view = out.views[v];
        if (stats.min[v].size() != view.dim()) {
            throw InvalidArgument("normalizer dimension mismatch for view '" + view.name + "'");
        }
        for (Index i = 0; i < view.data.rows(); ++i) {
            if (!view.present[static_cast<std::size_t>(i)]) continue;
            for (Index j = 0; j < view.dim(); ++j) {
                const double range = stats.max[v](j) - stats.min[v](j);
                double x = range > 0.0 ? (view.data(i, j) - stats.min[v](j)) / range : 0.5;
                view.data(i, j) = std::clamp(x, 0.0, 1.0);
            }
        }
    }
    return out;
}

MultiViewDataset invert_normalizer(const MultiViewDataset& ds, const NormalizationStats& stats) {
    MultiViewDataset out = ds;
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        auto& view = out.views[v];
        for (Index i = 0; i < view.data.rows(); ++i) {
            if (!view.present[static_cast<std::size_t>(i)]) continue;
            for (Index j = 0; j < view.dim(); ++j) {
                const double range = stats.max[v](j) - stats.min[v](j);
                view.data(i, j) = range > 0.0 ? view.data(i, j) * range + stats.min[v](j) : stats.min[v](j);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Masking and splitting

MultiViewDataset apply_mask(const MultiViewDataset& ds, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("mask rate must lie in [0,1)");
    const Index n = ds.n_instances();
    const auto n_drop = static_cast<Index>(std::floor(rate * static_cast<double>(n)));
    Rng rng(seed);

    std::vector<std::vector<bool>> present;
    for (const auto& v : ds.views) {
        std::vector<bool> p = v.present;
        auto rows = v.present_rows();
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto k = std::min<Index>(n_drop, static_cast<Index>(rows.size()));
        for (Index r = 0; r < k; ++r) p[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])] = false;
        present.push_back(std::move(p));
    }

    // Repair: every instance keeps at least one view it had before masking.
    for (Index i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        bool any = false;
        for (const auto& p : present) any = any || p[ii];
        if (any) continue;
        std::vector<std::size_t> candidates;
        for (std::size_t v = 0; v < ds.views.size(); ++v) {
            if (ds.views[v].present[ii]) candidates.push_back(v);
        }
        if (candidates.empty()) throw InvalidArgument("instance " + std::to_string(i) + " has no observed view");
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        present[candidates[pick(rng)]][ii] = true;
    }

    MultiViewDataset out = ds;
    for (std::size_t v = 0; v < out.views.size(); ++v) out.views[v].present = present[v];
    canonicalize(out);
    return out;
}

MultiViewDataset subset(const MultiViewDataset& ds, const std::vector<Index>& rows) {
    MultiViewDataset out;
    out.n_classes = ds.n_classes;
    for (Index r : rows) out.labels.push_back(ds.labels[static_cast<std::size_t>(r)]);
    for (const auto& v : ds.views) {
        ViewBlock b;
        b.name = v.name;
        b.data.resize(static_cast<Index>(rows.size()), v.dim());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            b.data.row(static_cast<Index>(i)) = v.data.row(rows[i]);
            b.present.push_back(v.present[static_cast<std::size_t>(rows[i])]);
        }
        out.views.push_back(std::move(b));
    }
    return out;
}

TrainTestSplit split_indices(const std::vector<int>& labels, int n_classes, double test_fraction,
                             std::uint64_t seed, bool stratified) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw InvalidArgument("test fraction must lie in (0,1)");
    }
    const auto n = static_cast<Index>(labels.size());
    if (n < 2) throw InvalidArgument("need at least 2 instances to split");
    Rng rng(seed);
    TrainTestSplit split;
    auto take = [&](std::vector<Index> idx) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto m = static_cast<Index>(idx.size());
        auto n_test = static_cast<Index>(std::llround(test_fraction * static_cast<double>(m)));
        n_test = std::clamp<Index>(n_test, 1, m - 1);
        split.test.insert(split.test.end(), idx.begin(), idx.begin() + n_test);
        split.train.insert(split.train.end(), idx.begin() + n_test, idx.end());
    };
    if (stratified) {
        for (int c = 0; c < n_classes; ++c) {
            std::vector<Index> idx;
            for (Index i = 0; i < n; ++i) {
                if (labels[static_cast<std::size_t>(i)] == c) idx.push_back(i);
            }
            if (idx.empty()) continue;
            if (idx.size() < 2) {
                throw InvalidArgument("class " + std::to_string(c) + " has fewer than 2 instances");
            }
            take(std::move(idx));
        }
    } else {
        std::vector<Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Index{0});
        take(std::move(idx));
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::pair<MultiViewDataset, MultiViewDataset> split_train_test(const MultiViewDataset& ds,
                                                               double test_fraction,
                                                               std::uint64_t seed,
                                                               bool stratified) {
    const auto s = split_indices(ds.labels, ds.n_classes, test_fraction, seed, stratified);
    return {subset(ds, s.train), subset(ds, s.test)};
}

Matrix one_hot(const std::vector<int>& labels, int n_classes) {
    Matrix y = Matrix::Zero(static_cast<Index>(labels.size()), n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes) {
            throw InvalidArgument("label " + std::to_string(labels[i]) + " not below class count " +
                                  std::to_string(n_classes));
        }
        y(static_cast<Index>(i), labels[i]) = 1.0;
    }
    return y;
}

// ---------------------------------------------------------------------------
// Synthetic data

MultiViewDataset gen_synthetic(const SyntheticSpec& spec) {
    if (spec.latent_dim < 1) throw InvalidArgument("latent dimension must be >= 1");
    if (spec.n_views < 1 || static_cast<Index>(spec.dims.size()) != spec.n_views) {
        throw InvalidArgument("need one dimension per view");
    }
    if (spec.n_classes < 1 || spec.n < spec.n_classes) throw InvalidArgument("bad class count");
    for (Index d : spec.dims) {
        if (d < spec.latent_dim) throw InvalidArgument("view dimension below latent dimension");
    }
    const Index n = spec.n;
    const Index m = spec.latent_dim;
    Rng rng(spec.seed);

    MultiViewDataset ds;
    ds.n_classes = spec.n_classes;
    ds.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(i % spec.n_classes);
    std::shuffle(ds.labels.begin(), ds.labels.end(), rng);

    std::vector<Vector> means;
    for (int c = 0; c < spec.n_classes; ++c) {
        Vector u = normal_matrix(m, 1, rng).col(0);
        u /= std::max(u.norm(), 1e-12);
        if (spec.n_classes == 2 && c == 1) u = -means[0] / std::max(means[0].norm(), 1e-12);
        means.push_back(0.5 * spec.class_sep * u);
    }

    Matrix hc = normal_matrix(m, n, rng);
    for (Index i = 0; i < n; ++i) hc.col(i) += means[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])];

    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (Index v = 0; v < spec.n_views; ++v) {
        const Index d = spec.dims[static_cast<std::size_t>(v)];
        const Matrix hs = normal_matrix(m, n, rng);
        const Matrix bs = normal_matrix(m, d, rng, scale);
        const Matrix bc = normal_matrix(m, d, rng, scale);
        ViewBlock block;
        block.name = "view" + std::to_string(v + 1);
        block.data = hs.transpose() * bs + hc.transpose() * bc;
        if (spec.noise_sd > 0.0) block.data += normal_matrix(n, d, rng, spec.noise_sd);
        block.present.assign(static_cast<std::size_t>(n), true);
        ds.views.push_back(std::move(block));
    }
    return ds;
}

}  // namespace drimv
