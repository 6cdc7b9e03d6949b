#include "motgnn/config.hpp"

#include "motgnn/error.hpp"
#include "motgnn/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string_view>

namespace motgnn {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_u64(std::string_view v, std::uint64_t& out) {
    const char* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    return r.ec == std::errc() && r.ptr == end && !v.empty();
}

bool parse_f64(std::string_view v, double& out) {
    const char* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    return r.ec == std::errc() && r.ptr == end && std::isfinite(out);
}

std::string shortest_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

struct Parser {
    RunConfig cfg;
    std::vector<std::string> problems;
    bool data_seen = false;
    bool synth_seen = false;

    void note(const std::string& msg) { problems.push_back(msg); }

    void set_size(std::string_view key, std::string_view value, std::size_t& field,
                  std::size_t lo) {
        std::uint64_t v = 0;
        if (!parse_u64(value, v))
            note(std::string(key) + " wants a non-negative integer, got '" + std::string(value) + "'");
        else if (v < lo)
            note(std::string(key) + " must be at least " + std::to_string(lo));
        else
            field = static_cast<std::size_t>(v);
    }

    void set_double(std::string_view key, std::string_view value, double& field, double lo,
                    bool open_lo) {
        double v = 0.0;
        if (!parse_f64(value, v))
            note(std::string(key) + " wants a finite number, got '" + std::string(value) + "'");
        else if (open_lo ? !(v > lo) : !(v >= lo))
            note(std::string(key) + " must be " + (open_lo ? "greater than " : "at least ") +
                 shortest_double(lo));
        else
            field = v;
    }

    void apply(std::string_view key, std::string_view value) {
        const std::string k(key);
        if (k.rfind("data.", 0) == 0) data_seen = true;
        if (k.rfind("synth.", 0) == 0) synth_seen = true;

        if (k == "data.omics1") cfg.omics_paths[0] = value;
        else if (k == "data.omics2") cfg.omics_paths[1] = value;
        else if (k == "data.omics3") cfg.omics_paths[2] = value;
        else if (k == "data.labels") cfg.labels_path = value;
        else if (k == "synth.n") set_size(k, value, cfg.synth.n, 4);
        else if (k == "synth.p1") set_size(k, value, cfg.synth.p[0], 1);
        else if (k == "synth.p2") set_size(k, value, cfg.synth.p[1], 1);
        else if (k == "synth.p3") set_size(k, value, cfg.synth.p[2], 1);
        else if (k == "synth.k1") set_size(k, value, cfg.synth.k[0], 1);
        else if (k == "synth.k2") set_size(k, value, cfg.synth.k[1], 1);
        else if (k == "synth.k3") set_size(k, value, cfg.synth.k[2], 1);
        else if (k == "synth.effect") set_double(k, value, cfg.synth.effect, 0.0, false);
        else if (k == "synth.imbalance") set_double(k, value, cfg.synth.imbalance, 0.0, true);
        else if (k == "gbt.trees") set_size(k, value, cfg.gbt.num_trees, 1);
        else if (k == "gbt.max_depth") set_size(k, value, cfg.gbt.max_depth, 1);
        else if (k == "gbt.learning_rate") set_double(k, value, cfg.gbt.learning_rate, 0.0, true);
        else if (k == "gbt.lambda") set_double(k, value, cfg.gbt.lambda, 0.0, false);
        else if (k == "gbt.gamma") set_double(k, value, cfg.gbt.gamma, 0.0, false);
        else if (k == "gbt.min_child_hessian")
            set_double(k, value, cfg.gbt.min_child_hessian, 0.0, false);
        else if (k == "train.learning_rate") set_double(k, value, cfg.train.learning_rate, 0.0, true);
        else if (k == "train.batch_size") set_size(k, value, cfg.train.batch_size, 2);
        else if (k == "train.max_epochs") set_size(k, value, cfg.train.max_epochs, 1);
        else if (k == "train.dropout") set_double(k, value, cfg.train.dropout, 0.0, false);
        else if (k == "train.l2_lambda") set_double(k, value, cfg.train.l2_lambda, 0.0, false);
        else if (k == "train.patience") set_size(k, value, cfg.train.patience, 1);
        else if (k == "train.min_delta") set_double(k, value, cfg.train.min_delta, 0.0, false);
        else if (k == "experiment.repeats") set_size(k, value, cfg.n_repeats, 2);
        else if (k == "experiment.top_k") set_size(k, value, cfg.top_k, 1);
        else if (k == "split.train") set_double(k, value, cfg.split_ratios[0], 0.0, true);
        else if (k == "split.validation") set_double(k, value, cfg.split_ratios[1], 0.0, true);
        else if (k == "split.test") set_double(k, value, cfg.split_ratios[2], 0.0, true);
        else note("unknown key '" + k + "'");
    }
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    Parser p;
    std::map<std::string, std::size_t> seen_at;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            p.note("line " + std::to_string(line_no) + " is not key=value: '" + std::string(line) + "'");
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) {
            p.note("line " + std::to_string(line_no) + " has an empty key");
            continue;
        }
        const auto [it, fresh] = seen_at.emplace(key, line_no);
        if (!fresh) {
            p.note("duplicate key '" + key + "' (lines " + std::to_string(it->second) + " and " +
                   std::to_string(line_no) + ")");
            continue;
        }
        p.apply(key, value);
    }

    if (p.data_seen && p.synth_seen)
        p.note("data.* and synth.* cannot be mixed; pick one source");
    if (p.data_seen) {
        p.cfg.use_synth = false;
        const char* names[4] = {"data.omics1", "data.omics2", "data.omics3", "data.labels"};
        const std::string* paths[4] = {&p.cfg.omics_paths[0], &p.cfg.omics_paths[1],
                                       &p.cfg.omics_paths[2], &p.cfg.labels_path};
        for (int i = 0; i < 4; ++i)
            if (paths[i]->empty()) p.note(std::string("missing ") + names[i]);
    }
    for (std::size_t i = 0; i < 3; ++i)
        if (p.cfg.synth.k[i] > p.cfg.synth.p[i])
            p.note("synth.k" + std::to_string(i + 1) + " exceeds synth.p" + std::to_string(i + 1));
    const double ratio_sum = p.cfg.split_ratios[0] + p.cfg.split_ratios[1] + p.cfg.split_ratios[2];
    if (std::fabs(ratio_sum - 1.0) > 1e-9)
        p.note("split ratios sum to " + shortest_double(ratio_sum) + ", expected 1");
    try {
        validate_train_config(p.cfg.train);
    } catch (const Error& e) {
        p.note(e.what());
    }

    if (!p.problems.empty()) {
        std::string msg = "config:";
        for (const std::string& s : p.problems) msg += " " + s + ";";
        msg.pop_back();
        throw Error(msg);
    }
    return p.cfg;
}

RunConfig load_config(const std::string& path) {
    return parse_config_text(read_text_file(path));
}

std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    const auto add = [&](const char* k, std::string v) { out.emplace_back(k, std::move(v)); };
    if (c.use_synth) {
        add("synth.n", std::to_string(c.synth.n));
        for (std::size_t i = 0; i < 3; ++i)
            add(("synth.p" + std::to_string(i + 1)).c_str(), std::to_string(c.synth.p[i]));
        for (std::size_t i = 0; i < 3; ++i)
            add(("synth.k" + std::to_string(i + 1)).c_str(), std::to_string(c.synth.k[i]));
        add("synth.effect", shortest_double(c.synth.effect));
        add("synth.imbalance", shortest_double(c.synth.imbalance));
    } else {
        add("data.omics1", c.omics_paths[0]);
        add("data.omics2", c.omics_paths[1]);
        add("data.omics3", c.omics_paths[2]);
        add("data.labels", c.labels_path);
    }
    add("gbt.trees", std::to_string(c.gbt.num_trees));
    add("gbt.max_depth", std::to_string(c.gbt.max_depth));
    add("gbt.learning_rate", shortest_double(c.gbt.learning_rate));
    add("gbt.lambda", shortest_double(c.gbt.lambda));
    add("gbt.gamma", shortest_double(c.gbt.gamma));
    add("gbt.min_child_hessian", shortest_double(c.gbt.min_child_hessian));
    add("train.learning_rate", shortest_double(c.train.learning_rate));
    add("train.batch_size", std::to_string(c.train.batch_size));
    add("train.max_epochs", std::to_string(c.train.max_epochs));
    add("train.dropout", shortest_double(c.train.dropout));
    add("train.l2_lambda", shortest_double(c.train.l2_lambda));
    add("train.patience", std::to_string(c.train.patience));
    add("train.min_delta", shortest_double(c.train.min_delta));
    add("experiment.repeats", std::to_string(c.n_repeats));
    add("experiment.top_k", std::to_string(c.top_k));
    add("split.train", shortest_double(c.split_ratios[0]));
    add("split.validation", shortest_double(c.split_ratios[1]));
    add("split.test", shortest_double(c.split_ratios[2]));
    return out;
}

}  // namespace motgnn
