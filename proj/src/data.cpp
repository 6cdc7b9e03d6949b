#include "motgnn/data.hpp"

#include "motgnn/error.hpp"
#include "motgnn/io.hpp"
#include "motgnn/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace motgnn {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    cells.push_back(cur);
    return cells;
}

double parse_finite(const std::string& cell, std::size_t row, std::size_t col,
                    const std::string& path) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
        throw Error(path + ": row " + std::to_string(row) + ", column " + std::to_string(col) +
                    ": cannot parse '" + cell + "' as a finite number");
    return v;
}

void check_unique(const std::vector<std::string>& names, const std::string& path,
                  const std::string& kind) {
    std::unordered_set<std::string> seen;
    for (const auto& s : names) {
        if (s.empty()) throw Error(path + ": empty " + kind);
        if (!seen.insert(s).second) throw Error(path + ": duplicate " + kind + " '" + s + "'");
    }
}

} // namespace

OmicsMatrix load_omics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 2)
        throw Error(path + ": header needs a sample-ID column and at least one feature");

    OmicsMatrix m;
    m.feature_names.assign(header.begin() + 1, header.end());
    check_unique(m.feature_names, path, "feature name");
    const std::size_t p = m.feature_names.size();

    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != p + 1)
            throw Error(path + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected " + std::to_string(p + 1));
        m.sample_ids.push_back(cells[0]);
        for (std::size_t j = 0; j < p; ++j)
            values.push_back(parse_finite(cells[j + 1], row, j + 2, path));
    }
    check_unique(m.sample_ids, path, "sample ID");
    if (m.sample_ids.size() < 2)
        throw Error(path + ": needs at least 2 samples");

    m.values.rows = m.sample_ids.size();
    m.values.cols = p;
    m.values.data = std::move(values);
    return m;
}

std::map<std::string, int> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty file");
    if (split_csv_line(line).size() != 2)
        throw Error(path + ": labels header must have exactly two columns");

    std::map<std::string, int> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != 2)
            throw Error(path + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected 2");
        if (cells[1] != "0" && cells[1] != "1")
            throw Error(path + ": row " + std::to_string(row) + ": label must be 0 or 1, got '" +
                        cells[1] + "'");
        if (!labels.emplace(cells[0], cells[1] == "1" ? 1 : 0).second)
            throw Error(path + ": duplicate sample ID '" + cells[0] + "'");
    }
    if (labels.empty()) throw Error(path + ": no label rows");
    return labels;
}

void write_omics_csv(const OmicsMatrix& m, const std::string& path) {
    std::string out = "sample_id";
    for (const auto& f : m.feature_names) {
        out += ',';
        out += f;
    }
    out += '\n';
    for (std::size_t i = 0; i < m.values.rows; ++i) {
        out += m.sample_ids[i];
        for (std::size_t j = 0; j < m.values.cols; ++j) {
            out += ',';
            out += format_double(m.values(i, j));
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

void write_labels_csv(const std::vector<std::string>& sample_ids, const std::vector<int>& labels,
                      const std::string& path) {
    if (sample_ids.size() != labels.size())
        throw Error("write_labels_csv: ID and label counts disagree");
    std::string out = "sample_id,label\n";
    for (std::size_t i = 0; i < sample_ids.size(); ++i) {
        out += sample_ids[i];
        out += ',';
        out += labels[i] ? '1' : '0';
        out += '\n';
    }
    atomic_write_text(path, out);
}

AlignResult align_samples(const OmicsMatrix& m1, const OmicsMatrix& m2, const OmicsMatrix& m3,
                          const std::map<std::string, int>& labels) {
    const OmicsMatrix* mods[3] = {&m1, &m2, &m3};
    std::array<std::unordered_map<std::string, std::size_t>, 3> row_of;
    for (int i = 0; i < 3; ++i) {
        if (mods[i]->sample_ids.empty())
            throw Error("align_samples: modality " + std::to_string(i + 1) + " is empty");
        for (std::size_t r = 0; r < mods[i]->sample_ids.size(); ++r)
            if (!row_of[i].emplace(mods[i]->sample_ids[r], r).second)
                throw Error("align_samples: duplicate sample ID '" + mods[i]->sample_ids[r] + "'");
    }

    // canonical order: sorted intersection of the four ID sets
    std::vector<std::string> common;
    for (const auto& [id, lab] : labels) {
        (void)lab;
        if (row_of[0].count(id) && row_of[1].count(id) && row_of[2].count(id))
            common.push_back(id);
    }
    std::sort(common.begin(), common.end());
    if (common.empty()) throw Error("align_samples: no sample ID appears in all four inputs");

    AlignResult res;
    res.dropped_labels = labels.size() - common.size();
    for (int i = 0; i < 3; ++i) {
        res.dropped_per_modality[i] = mods[i]->sample_ids.size() - common.size();
        OmicsMatrix& out = res.dataset.modalities[i];
        out.feature_names = mods[i]->feature_names;
        out.sample_ids = common;
        out.values.resize(common.size(), mods[i]->values.cols);
        for (std::size_t r = 0; r < common.size(); ++r) {
            const std::size_t src = row_of[i].at(common[r]);
            for (std::size_t j = 0; j < mods[i]->values.cols; ++j)
                out.values(r, j) = mods[i]->values(src, j);
        }
    }
    res.dataset.labels.reserve(common.size());
    for (const auto& id : common) res.dataset.labels.push_back(labels.at(id));

    validate_dataset(res.dataset);
    return res;
}

std::pair<OmicsMatrix, NormalizationStats> minmax_normalize(const OmicsMatrix& m) {
    OmicsMatrix out = m;
    NormalizationStats stats;
    stats.col_min.resize(m.values.cols);
    stats.col_max.resize(m.values.cols);
    for (std::size_t j = 0; j < m.values.cols; ++j) {
        double lo = m.values(0, j), hi = lo;
        for (std::size_t i = 1; i < m.values.rows; ++i) {
            const double v = m.values(i, j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        stats.col_min[j] = lo;
        stats.col_max[j] = hi;
        const double range = hi - lo;
        for (std::size_t i = 0; i < m.values.rows; ++i)
            out.values(i, j) = range > 0.0 ? (m.values(i, j) - lo) / range : 0.0;
    }
    return {std::move(out), std::move(stats)};
}

SplitIndices stratified_split(const std::vector<int>& labels, const std::array<double, 3>& ratios,
                              std::uint64_t seed) {
    double rsum = 0.0;
    for (double r : ratios) {
        if (r <= 0.0) throw Error("stratified_split: ratios must be positive");
        rsum += r;
    }
    if (std::abs(rsum - 1.0) > 1e-9) throw Error("stratified_split: ratios must sum to 1");

    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw Error("stratified_split: labels must be 0 or 1");
        by_class[labels[i]].push_back(i);
    }
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < 3)
            throw Error("stratified_split: class " + std::to_string(c) + " has " +
                        std::to_string(by_class[c].size()) + " samples, need at least 3");

    SplitIndices split;
    std::vector<std::size_t>* parts[3] = {&split.train, &split.validation, &split.test};
    Rng rng(seed);
    for (int c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        shuffle_indices(idx, rng);

        // largest-remainder allocation; ties favor the earlier part
        const std::size_t nc = idx.size();
        std::array<std::size_t, 3> take{};
        std::array<double, 3> frac{};
        std::size_t assigned = 0;
        for (int k = 0; k < 3; ++k) {
            const double exact = ratios[k] * static_cast<double>(nc);
            take[k] = static_cast<std::size_t>(exact);
            frac[k] = exact - static_cast<double>(take[k]);
            assigned += take[k];
        }
        std::array<int, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return frac[a] > frac[b]; });
        for (std::size_t r = 0; r < nc - assigned; ++r) ++take[order[r % 3]];

        std::size_t off = 0;
        for (int k = 0; k < 3; ++k) {
            for (std::size_t r = 0; r < take[k]; ++r) parts[k]->push_back(idx[off + r]);
            off += take[k];
        }
    }
    for (auto* part : parts) std::sort(part->begin(), part->end());
    return split;
}

SynthResult generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
    if (config.n < 10) throw Error("generate_synthetic: need at least 10 samples");
    if (config.imbalance <= 0.0) throw Error("generate_synthetic: imbalance ratio must be positive");
    for (int i = 0; i < 3; ++i)
        if (config.k[i] > config.p[i])
            throw Error("generate_synthetic: modality " + std::to_string(i + 1) + " has k=" +
                        std::to_string(config.k[i]) + " > p=" + std::to_string(config.p[i]));

    const std::size_t n = config.n;
    std::size_t n_pos =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) / (config.imbalance + 1.0)));
    n_pos = std::clamp<std::size_t>(n_pos, 1, n - 1);

    SynthResult res;
    res.dataset.labels.assign(n, 0);
    for (std::size_t i = 0; i < n_pos; ++i) res.dataset.labels[i] = 1;
    Rng label_rng(mix_seed(seed, 0));
    shuffle_indices(res.dataset.labels, label_rng);

    std::size_t width = 4;
    while (n >= static_cast<std::size_t>(std::pow(10.0, static_cast<double>(width)))) ++width;
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string num = std::to_string(i + 1);
        ids[i] = "S" + std::string(width - num.size(), '0') + num;
    }

    const char* prefix[3] = {"meth", "mrna", "mirna"};
    for (int mod = 0; mod < 3; ++mod) {
        const std::size_t p = config.p[mod];
        Rng rng(mix_seed(seed, 1 + static_cast<std::uint64_t>(mod)));

        std::vector<std::size_t> cols(p);
        std::iota(cols.begin(), cols.end(), std::size_t{0});
        shuffle_indices(cols, rng);
        cols.resize(config.k[mod]);
        std::sort(cols.begin(), cols.end());
        std::vector<char> informative(p, 0);
        for (std::size_t c : cols) informative[c] = 1;

        OmicsMatrix m;
        m.sample_ids = ids;
        m.feature_names.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
            std::string num = std::to_string(j + 1);
            std::size_t fw = std::max<std::size_t>(4, std::to_string(p).size());
            m.feature_names[j] = std::string(prefix[mod]) + "_" +
                                 std::string(fw - num.size(), '0') + num;
        }
        m.values.resize(n, p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                double v = rng.normal();
                if (informative[j] && res.dataset.labels[i] == 1) v += config.effect;
                m.values(i, j) = v;
            }

        res.dataset.modalities[mod] = minmax_normalize(m).first;
        res.planted[mod] = std::move(cols);
    }

    validate_dataset(res.dataset);
    return res;
}

void validate_dataset(const MultiOmicsDataset& ds) {
    const std::size_t n = ds.labels.size();
    if (n == 0) throw Error("dataset: empty");
    bool has[2] = {false, false};
    for (int v : ds.labels) {
        if (v != 0 && v != 1) throw Error("dataset: labels must be 0 or 1");
        has[v] = true;
    }
    if (!has[0] || !has[1]) throw Error("dataset: both classes must be present");
    for (int i = 0; i < 3; ++i) {
        const OmicsMatrix& m = ds.modalities[i];
        if (m.sample_ids.size() != n || m.values.rows != n)
            throw Error("dataset: modality " + std::to_string(i + 1) + " row count disagrees");
        if (m.values.cols != m.feature_names.size())
            throw Error("dataset: modality " + std::to_string(i + 1) + " feature-name count disagrees");
        if (m.sample_ids != ds.modalities[0].sample_ids)
            throw Error("dataset: modality sample orders disagree");
    }
}

} // namespace motgnn
