#include "motgnn/boosting.hpp"

#include "motgnn/error.hpp"
#include "motgnn/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace motgnn {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double split_gain(double gl, double hl, double g, double h, double lambda, double gamma) {
    const double gr = g - gl, hr = h - hl;
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) -
           gamma;
}

// Midpoint of two consecutive distinct values, nudged so the cut always
// lands strictly above a (rounding can collapse it onto a for adjacent
// doubles; x < b partitions identically in that case).
inline double midpoint_threshold(double a, double b) {
    double thr = a + (b - a) * 0.5;
    if (!(thr > a) || thr > b) thr = b;
    return thr;
}

struct Cand {
    double gain = 0.0; // only gains > 0 are ever stored
    double thr = 0.0;
};

struct FrontierNode {
    std::int32_t node_id = 0;
    double g_sum = 0.0;
    double h_sum = 0.0;
    std::size_t count = 0;
};

using SortedCols = std::vector<std::vector<std::uint32_t>>;

SortedCols presort_columns(const Tensor2& X) {
    SortedCols cols(X.cols);
    const std::size_t n = X.rows;
    for (std::size_t f = 0; f < X.cols; ++f) {
        auto& idx = cols[f];
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0u);
        std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double va = X(a, f), vb = X(b, f);
            if (va != vb) return va < vb;
            return a < b;
        });
    }
    return cols;
}

Tree fit_tree_presorted(const Tensor2& X, const SortedCols& sorted_cols,
                        const std::vector<double>& g, const std::vector<double>& h,
                        const GBTConfig& config) {
    const std::size_t n = X.rows, p = X.cols;
    Tree tree;
    tree.nodes.emplace_back();

    std::vector<std::int32_t> leaf_of(n, 0);
    std::vector<FrontierNode> frontier(1);
    for (std::size_t s = 0; s < n; ++s) {
        frontier[0].g_sum += g[s];
        frontier[0].h_sum += h[s];
    }
    frontier[0].count = n;

    std::vector<Cand> cand;
    for (std::size_t depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
        const std::size_t width = frontier.size();
        cand.assign(p * width, Cand{});

        // per-feature scan; each feature owns its own candidate slots, so
        // the loop parallelizes without any cross-thread writes
        const std::int64_t pn = static_cast<std::int64_t>(p);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
        for (std::int64_t fi = 0; fi < pn; ++fi) {
            const std::size_t f = static_cast<std::size_t>(fi);
            std::vector<double> gl(width, 0.0), hl(width, 0.0), prev(width, 0.0);
            std::vector<char> seen(width, 0);
            Cand* best = cand.data() + f * width;
            for (const std::uint32_t s : sorted_cols[f]) {
                const std::int32_t k = leaf_of[s];
                if (k < 0) continue;
                const double v = X(s, f);
                if (seen[k] && v != prev[k]) {
                    const double hr = frontier[k].h_sum - hl[k];
                    if (hl[k] >= config.min_child_hessian && hr >= config.min_child_hessian) {
                        const double gain = split_gain(gl[k], hl[k], frontier[k].g_sum,
                                                      frontier[k].h_sum, config.lambda,
                                                      config.gamma);
                        if (gain > best[k].gain) {
                            best[k].gain = gain;
                            best[k].thr = midpoint_threshold(prev[k], v);
                        }
                    }
                }
                gl[k] += g[s];
                hl[k] += h[s];
                prev[k] = v;
                seen[k] = 1;
            }
        }

        // serial reduce in ascending feature order: strict > keeps the
        // lowest feature index, and within a feature the scan already kept
        // the lowest threshold
        struct Chosen {
            bool split = false;
            std::size_t feature = 0;
            double thr = 0.0;
        };
        std::vector<Chosen> chosen(width);
        bool any = false;
        for (std::size_t k = 0; k < width; ++k) {
            double best_gain = 0.0;
            for (std::size_t f = 0; f < p; ++f) {
                const Cand& c = cand[f * width + k];
                if (c.gain > best_gain) {
                    best_gain = c.gain;
                    chosen[k].split = true;
                    chosen[k].feature = f;
                    chosen[k].thr = c.thr;
                }
            }
            any = any || chosen[k].split;
        }
        if (!any) break;

        std::vector<FrontierNode> next;
        std::vector<std::int32_t> left_slot(width, -1);
        for (std::size_t k = 0; k < width; ++k) {
            if (chosen[k].split) {
                const std::int32_t left_id = static_cast<std::int32_t>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                TreeNode& node = tree.nodes[frontier[k].node_id];
                node.split_feature = static_cast<std::uint32_t>(chosen[k].feature);
                node.threshold = chosen[k].thr;
                node.left = left_id;
                node.right = left_id + 1;
                left_slot[k] = static_cast<std::int32_t>(next.size());
                next.push_back(FrontierNode{left_id, 0.0, 0.0, 0});
                next.push_back(FrontierNode{left_id + 1, 0.0, 0.0, 0});
            } else {
                TreeNode& node = tree.nodes[frontier[k].node_id];
                node.weight = -frontier[k].g_sum / (frontier[k].h_sum + config.lambda);
            }
        }

        for (std::size_t s = 0; s < n; ++s) {
            const std::int32_t k = leaf_of[s];
            if (k < 0) continue;
            if (!chosen[k].split) {
                leaf_of[s] = -1;
                continue;
            }
            const bool go_left = X(s, chosen[k].feature) < chosen[k].thr;
            const std::int32_t slot = left_slot[k] + (go_left ? 0 : 1);
            leaf_of[s] = slot;
            next[slot].g_sum += g[s];
            next[slot].h_sum += h[s];
            ++next[slot].count;
        }
        frontier = std::move(next);
    }

    for (const FrontierNode& fn : frontier)
        tree.nodes[fn.node_id].weight = -fn.g_sum / (fn.h_sum + config.lambda);
    return tree;
}

nlohmann::ordered_json node_to_json(const Tree& tree, std::int32_t id) {
    const TreeNode& node = tree.nodes[id];
    nlohmann::ordered_json j;
    if (node.is_leaf()) {
        j["weight"] = format_double(node.weight);
    } else {
        j["feature"] = node.split_feature;
        j["threshold"] = format_double(node.threshold);
        j["left"] = node_to_json(tree, node.left);
        j["right"] = node_to_json(tree, node.right);
    }
    return j;
}

double parse_stored_double(const nlohmann::json& j, const char* what) {
    if (!j.is_string()) throw Error(std::string("ensemble json: ") + what + " must be a string");
    const std::string s = j.get<std::string>();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw Error(std::string("ensemble json: cannot parse ") + what + " '" + s + "'");
    return v;
}

std::int32_t node_from_json(const nlohmann::json& j, Tree& tree, std::size_t num_features) {
    const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("weight")) {
        tree.nodes[id].weight = parse_stored_double(j.at("weight"), "leaf weight");
    } else {
        const std::uint64_t f = j.at("feature").get<std::uint64_t>();
        if (f >= num_features) throw Error("ensemble json: split feature out of range");
        const double thr = parse_stored_double(j.at("threshold"), "threshold");
        const std::int32_t left = node_from_json(j.at("left"), tree, num_features);
        const std::int32_t right = node_from_json(j.at("right"), tree, num_features);
        tree.nodes[id].split_feature = static_cast<std::uint32_t>(f);
        tree.nodes[id].threshold = thr;
        tree.nodes[id].left = left;
        tree.nodes[id].right = right;
    }
    return id;
}

} // namespace

double Tree::eval(const double* x) const {
    const TreeNode* node = &nodes[0];
    while (!node->is_leaf())
        node = &nodes[x[node->split_feature] < node->threshold ? node->left : node->right];
    return node->weight;
}

void logistic_grad_hess(const std::vector<int>& y, const std::vector<double>& logit,
                        std::vector<double>& g, std::vector<double>& h) {
    if (y.size() != logit.size()) throw Error("logistic_grad_hess: length mismatch");
    g.resize(y.size());
    h.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double p = sigmoid(logit[i]);
        g[i] = p - static_cast<double>(y[i]);
        h[i] = p * (1.0 - p);
    }
}

std::optional<SplitCandidate> best_split(const Tensor2& X, const std::vector<std::size_t>& rows,
                                         const std::vector<double>& g, const std::vector<double>& h,
                                         double lambda, double gamma, double min_child_hessian) {
    if (rows.size() < 2) return std::nullopt;

    double g_sum = 0.0, h_sum = 0.0;
    for (std::size_t s : rows) {
        g_sum += g[s];
        h_sum += h[s];
    }

    std::optional<SplitCandidate> best;
    std::vector<std::pair<double, std::size_t>> vals;
    for (std::size_t f = 0; f < X.cols; ++f) {
        vals.clear();
        for (std::size_t s : rows) vals.emplace_back(X(s, f), s);
        std::sort(vals.begin(), vals.end());

        double gl = 0.0, hl = 0.0;
        double feature_gain = 0.0, feature_thr = 0.0;
        bool found = false;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i > 0 && vals[i].first != vals[i - 1].first) {
                const double hr = h_sum - hl;
                if (hl >= min_child_hessian && hr >= min_child_hessian) {
                    const double gain = split_gain(gl, hl, g_sum, h_sum, lambda, gamma);
                    if (gain > feature_gain) {
                        feature_gain = gain;
                        feature_thr = midpoint_threshold(vals[i - 1].first, vals[i].first);
                        found = true;
                    }
                }
            }
            gl += g[vals[i].second];
            hl += h[vals[i].second];
        }
        if (found && (!best || feature_gain > best->gain))
            best = SplitCandidate{f, feature_thr, feature_gain};
    }
    return best;
}

Tree fit_tree(const Tensor2& X, const std::vector<double>& g, const std::vector<double>& h,
              const GBTConfig& config) {
    if (X.rows == 0 || X.rows != g.size() || X.rows != h.size())
        throw Error("fit_tree: empty input or length mismatch");
    if (config.max_depth < 1) throw Error("fit_tree: max_depth must be at least 1");
    return fit_tree_presorted(X, presort_columns(X), g, h, config);
}

GBTFitResult fit_ensemble(const Tensor2& X, const std::vector<int>& y, const GBTConfig& config) {
    if (X.rows != y.size()) throw Error("fit_ensemble: row and label counts disagree");
    if (X.rows < 4) throw Error("fit_ensemble: need at least 4 samples");
    if (config.num_trees < 1 || config.max_depth < 1)
        throw Error("fit_ensemble: num_trees and max_depth must be at least 1");
    bool has[2] = {false, false};
    for (int v : y) {
        if (v != 0 && v != 1) throw Error("fit_ensemble: labels must be 0 or 1");
        has[v] = true;
    }
    if (!has[0] || !has[1]) throw Error("fit_ensemble: both classes required");

    const SortedCols sorted_cols = presort_columns(X);

    GBTFitResult res;
    res.ensemble.learning_rate = config.learning_rate;
    res.ensemble.base_logit = 0.0;
    res.ensemble.num_features = X.cols;

    std::vector<double> logits(X.rows, res.ensemble.base_logit);
    std::vector<double> g, h;
    res.train_loss.push_back(logistic_loss(y, logits));
    for (std::size_t t = 0; t < config.num_trees; ++t) {
        logistic_grad_hess(y, logits, g, h);
        Tree tree = fit_tree_presorted(X, sorted_cols, g, h, config);
        for (std::size_t s = 0; s < X.rows; ++s)
            logits[s] += config.learning_rate * tree.eval(X.row(s));
        res.train_loss.push_back(logistic_loss(y, logits));
        res.ensemble.trees.push_back(std::move(tree));
    }
    return res;
}

std::vector<double> predict_logit(const GBTEnsemble& ens, const Tensor2& X) {
    if (X.cols != ens.num_features)
        throw Error("predict: expected " + std::to_string(ens.num_features) + " columns, got " +
                    std::to_string(X.cols));
    std::vector<double> logits(X.rows, ens.base_logit);
    for (const Tree& tree : ens.trees)
        for (std::size_t s = 0; s < X.rows; ++s)
            logits[s] += ens.learning_rate * tree.eval(X.row(s));
    return logits;
}

std::vector<double> predict_proba(const GBTEnsemble& ens, const Tensor2& X) {
    std::vector<double> out = predict_logit(ens, X);
    for (double& v : out) v = sigmoid(v);
    return out;
}

std::vector<std::size_t> used_features(const GBTEnsemble& ens) {
    std::set<std::size_t> seen;
    for (const Tree& tree : ens.trees)
        for (const TreeNode& node : tree.nodes)
            if (!node.is_leaf()) seen.insert(node.split_feature);
    if (seen.empty())
        throw Error("used_features: no tree performed any split (degenerate training)");
    return {seen.begin(), seen.end()};
}

double logistic_loss(const std::vector<int>& y, const std::vector<double>& logit) {
    if (y.size() != logit.size() || y.empty()) throw Error("logistic_loss: bad lengths");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double z = logit[i];
        sum += std::max(z, 0.0) - z * static_cast<double>(y[i]) + std::log1p(std::exp(-std::abs(z)));
    }
    return sum / static_cast<double>(y.size());
}

std::string ensemble_to_json(const GBTEnsemble& ens) {
    nlohmann::ordered_json j;
    j["format"] = "gbt-ensemble";
    j["version"] = 1;
    j["learning_rate"] = format_double(ens.learning_rate);
    j["base_logit"] = format_double(ens.base_logit);
    j["num_features"] = ens.num_features;
    j["trees"] = nlohmann::ordered_json::array();
    for (const Tree& tree : ens.trees) j["trees"].push_back(node_to_json(tree, 0));
    return j.dump();
}

GBTEnsemble ensemble_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw Error(std::string("ensemble json: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "gbt-ensemble")
            throw Error("ensemble json: unrecognized format tag");
        if (j.at("version").get<int>() != 1)
            throw Error("ensemble json: unsupported version");
        GBTEnsemble ens;
        ens.learning_rate = parse_stored_double(j.at("learning_rate"), "learning_rate");
        ens.base_logit = parse_stored_double(j.at("base_logit"), "base_logit");
        ens.num_features = j.at("num_features").get<std::size_t>();
        if (!j.at("trees").is_array() || j.at("trees").empty())
            throw Error("ensemble json: trees must be a nonempty array");
        for (const auto& tj : j.at("trees")) {
            Tree tree;
            node_from_json(tj, tree, ens.num_features);
            ens.trees.push_back(std::move(tree));
        }
        return ens;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("ensemble json: ") + e.what());
    }
}

} // namespace motgnn
