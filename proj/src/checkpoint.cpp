#include "motgnn/checkpoint.hpp"

#include "motgnn/error.hpp"
#include "motgnn/io.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>

namespace motgnn {

namespace {

constexpr const char* kFormatTag = "motgnn-checkpoint";
constexpr int kVersion = 1;
constexpr const char* kB64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string doubles_to_b64(const double* values, std::size_t n) {
    std::vector<unsigned char> bytes;
    bytes.reserve(n * 8);
    for (std::size_t i = 0; i < n; ++i) {
        // little-endian on the wire regardless of host order
        std::uint64_t u = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) {
            bytes.push_back(static_cast<unsigned char>(u & 0xff));
            u >>= 8;
        }
    }
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                                (static_cast<std::uint32_t>(bytes[i + 1]) << 8) | bytes[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
    }
    const std::size_t rem = bytes.size() - i;
    if (rem == 1) {
        const std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rem == 2) {
        const std::uint32_t v = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                                (static_cast<std::uint32_t>(bytes[i + 1]) << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<double> b64_to_doubles(const std::string& text, std::size_t expect, const char* what) {
    if (text.size() % 4 != 0) throw Error(std::string("checkpoint: truncated base64 in ") + what);
    std::array<int, 256> rev;
    rev.fill(-1);
    for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(kB64Alphabet[i])] = i;
    std::vector<unsigned char> bytes;
    bytes.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2)
                    throw Error(std::string("checkpoint: misplaced padding in ") + what);
                vals[k] = 0;
                ++pad;
            } else {
                vals[k] = rev[static_cast<unsigned char>(c)];
                if (vals[k] < 0 || pad > 0)
                    throw Error(std::string("checkpoint: invalid base64 in ") + what);
            }
        }
        const std::uint32_t v = (static_cast<std::uint32_t>(vals[0]) << 18) |
                                (static_cast<std::uint32_t>(vals[1]) << 12) |
                                (static_cast<std::uint32_t>(vals[2]) << 6) |
                                static_cast<std::uint32_t>(vals[3]);
        bytes.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
        if (pad < 2) bytes.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        if (pad < 1) bytes.push_back(static_cast<unsigned char>(v & 0xff));
    }
    if (bytes.size() != expect * 8)
        throw Error(std::string("checkpoint: ") + what + " holds " + std::to_string(bytes.size() / 8) +
                    " doubles, expected " + std::to_string(expect));
    std::vector<double> out(expect);
    for (std::size_t i = 0; i < expect; ++i) {
        std::uint64_t u = 0;
        for (int b = 7; b >= 0; --b) u = (u << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
        out[i] = std::bit_cast<double>(u);
    }
    return out;
}

nlohmann::ordered_json dense_to_json(const nn::DenseParams& p) {
    nlohmann::ordered_json j;
    j["rows"] = p.weight.rows;
    j["cols"] = p.weight.cols;
    j["weight"] = doubles_to_b64(p.weight.data.data(), p.weight.data.size());
    j["bias"] = doubles_to_b64(p.bias.data(), p.bias.size());
    return j;
}

nn::DenseParams dense_from_json(const nlohmann::json& j, const char* what) {
    nn::DenseParams p;
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    if (rows == 0 || cols == 0) throw Error(std::string("checkpoint: empty layer ") + what);
    p.weight.resize(rows, cols);
    p.weight.data = b64_to_doubles(j.at("weight").get<std::string>(), rows * cols, what);
    p.bias = b64_to_doubles(j.at("bias").get<std::string>(), cols, what);
    return p;
}

nlohmann::ordered_json batchnorm_to_json(const nn::BatchNormParams& p) {
    nlohmann::ordered_json j;
    j["gamma"] = doubles_to_b64(p.gamma.data(), p.gamma.size());
    j["beta"] = doubles_to_b64(p.beta.data(), p.beta.size());
    j["running_mean"] = doubles_to_b64(p.running_mean.data(), p.running_mean.size());
    j["running_var"] = doubles_to_b64(p.running_var.data(), p.running_var.size());
    j["momentum"] = format_double(p.momentum);
    j["eps"] = format_double(p.eps);
    return j;
}

double parse_real(const nlohmann::json& j, const char* what) {
    if (!j.is_string()) throw Error(std::string("checkpoint: ") + what + " must be a string");
    const std::string s = j.get<std::string>();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error(std::string("checkpoint: cannot parse ") + what + " '" + s + "'");
    return v;
}

nn::BatchNormParams batchnorm_from_json(const nlohmann::json& j, std::size_t units,
                                        const char* what) {
    nn::BatchNormParams p;
    p.gamma = b64_to_doubles(j.at("gamma").get<std::string>(), units, what);
    p.beta = b64_to_doubles(j.at("beta").get<std::string>(), units, what);
    p.running_mean = b64_to_doubles(j.at("running_mean").get<std::string>(), units, what);
    p.running_var = b64_to_doubles(j.at("running_var").get<std::string>(), units, what);
    p.momentum = parse_real(j.at("momentum"), "momentum");
    p.eps = parse_real(j.at("eps"), "eps");
    return p;
}

} // namespace

void save_checkpoint(const MOTGNNModel& model,
                     const std::array<std::vector<std::string>, 3>& node_names,
                     const std::array<std::size_t, 3>& n_features, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = kFormatTag;
    j["version"] = kVersion;
    j["embed_width"] = kEmbedWidth;
    j["modalities"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < 3; ++i) {
        const BranchModel& branch = model.branches[i];
        const FeatureGraph& graph = model.graphs[i];
        const std::size_t p = graph.node_columns.size();
        if (node_names[i].size() != p)
            throw Error("checkpoint: node name count disagrees with graph");
        if (branch.masked.mask.rows != p) throw Error("checkpoint: branch width disagrees with graph");
        nlohmann::ordered_json m;
        m["n_features"] = n_features[i];
        m["node_columns"] = graph.node_columns;
        m["node_names"] = node_names[i];
        auto edges = nlohmann::ordered_json::array();
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a + 1; b < p; ++b)
                if (branch.masked.mask(a, b) == 1.0) edges.push_back({a, b});
        m["edges"] = std::move(edges);
        std::vector<double> wvals;
        for (const std::uint32_t flat : nn::masked_active_flat(branch.masked))
            wvals.push_back(branch.masked.weight.data[flat]);
        m["masked_weight"] = doubles_to_b64(wvals.data(), wvals.size());
        m["masked_bias"] = doubles_to_b64(branch.masked.bias.data(), branch.masked.bias.size());
        m["hidden"] = dense_to_json(branch.hidden);
        m["ensemble"] = nlohmann::ordered_json::parse(ensemble_to_json(model.ensembles[i]));
        j["modalities"].push_back(std::move(m));
    }
    nlohmann::ordered_json f;
    f["layer1"] = dense_to_json(model.fusion.layer1);
    f["batchnorm1"] = batchnorm_to_json(model.fusion.batchnorm1);
    f["layer2"] = dense_to_json(model.fusion.layer2);
    f["batchnorm2"] = batchnorm_to_json(model.fusion.batchnorm2);
    f["head"] = dense_to_json(model.fusion.head);
    j["fusion"] = std::move(f);
    atomic_write_text(path, j.dump(1) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("checkpoint: ") + e.what());
    } catch (const Error& e) {
        throw Error(std::string("checkpoint: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormatTag)
            throw Error("checkpoint: unrecognized format tag");
        if (j.at("version").get<int>() != kVersion)
            throw Error("checkpoint: unsupported version");
        if (j.at("embed_width").get<std::size_t>() != kEmbedWidth)
            throw Error("checkpoint: embedding width disagrees with this build");
        const auto& mods = j.at("modalities");
        if (!mods.is_array() || mods.size() != 3)
            throw Error("checkpoint: expected 3 modalities");
        LoadedCheckpoint out;
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& m = mods[i];
            out.n_features[i] = m.at("n_features").get<std::size_t>();
            FeatureGraph graph;
            graph.node_columns = m.at("node_columns").get<std::vector<std::size_t>>();
            const std::size_t p = graph.node_columns.size();
            if (p == 0) throw Error("checkpoint: empty graph");
            for (const std::size_t col : graph.node_columns)
                if (col >= out.n_features[i])
                    throw Error("checkpoint: node column outside the feature range");
            out.node_names[i] = m.at("node_names").get<std::vector<std::string>>();
            if (out.node_names[i].size() != p)
                throw Error("checkpoint: node name count disagrees with graph");
            graph.adjacency.resize(p, p);
            for (std::size_t d = 0; d < p; ++d) graph.adjacency(d, d) = 1.0;
            const auto& edges = m.at("edges");
            for (const auto& e : edges) {
                const std::size_t a = e.at(0).get<std::size_t>();
                const std::size_t b = e.at(1).get<std::size_t>();
                if (a >= b || b >= p) throw Error("checkpoint: malformed edge");
                graph.adjacency(a, b) = 1.0;
                graph.adjacency(b, a) = 1.0;
            }
            graph.edge_count = p + edges.size();
            graph.edge_node_ratio =
                static_cast<double>(graph.edge_count) / static_cast<double>(p);

            BranchModel& branch = out.model.branches[i];
            branch.masked.set_mask(graph.adjacency);
            const std::vector<std::uint32_t> flat = nn::masked_active_flat(branch.masked);
            const std::vector<double> wvals =
                b64_to_doubles(m.at("masked_weight").get<std::string>(), flat.size(), "masked_weight");
            for (std::size_t k = 0; k < flat.size(); ++k) branch.masked.weight.data[flat[k]] = wvals[k];
            branch.masked.bias = b64_to_doubles(m.at("masked_bias").get<std::string>(), p, "masked_bias");
            branch.hidden = dense_from_json(m.at("hidden"), "hidden");
            if (branch.hidden.weight.rows != p || branch.hidden.weight.cols != kEmbedWidth)
                throw Error("checkpoint: hidden layer shape disagrees with graph");
            out.model.ensembles[i] = ensemble_from_json(m.at("ensemble").dump());
            if (out.model.ensembles[i].num_features != out.n_features[i])
                throw Error("checkpoint: ensemble width disagrees with n_features");
            out.model.graphs[i] = std::move(graph);
        }
        const auto& f = j.at("fusion");
        out.model.fusion.layer1 = dense_from_json(f.at("layer1"), "layer1");
        if (out.model.fusion.layer1.weight.rows != 3 * kEmbedWidth)
            throw Error("checkpoint: fusion input width disagrees with this build");
        out.model.fusion.batchnorm1 = batchnorm_from_json(f.at("batchnorm1"), kEmbedWidth, "batchnorm1");
        out.model.fusion.layer2 = dense_from_json(f.at("layer2"), "layer2");
        out.model.fusion.batchnorm2 = batchnorm_from_json(f.at("batchnorm2"), kEmbedWidth, "batchnorm2");
        out.model.fusion.head = dense_from_json(f.at("head"), "head");
        if (out.model.fusion.head.weight.cols != 2)
            throw Error("checkpoint: head must have 2 outputs");
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace motgnn
