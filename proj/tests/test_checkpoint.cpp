#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

#include "motgnn/checkpoint.hpp"
#include "motgnn/data.hpp"
#include "motgnn/error.hpp"
#include "motgnn/graph.hpp"
#include "motgnn/io.hpp"
#include "motgnn/model.hpp"

using namespace motgnn;
using nlohmann::json;

namespace {

struct TrainedFixture {
    MultiOmicsDataset dataset;
    PipelineResult pipeline;
    std::array<std::vector<std::string>, 3> node_names;
    std::array<std::size_t, 3> n_features{};
};

const TrainedFixture& fixture() {
    static const TrainedFixture fx = [] {
        SynthConfig sc;
        sc.n = 60;
        sc.p = {25, 20, 12};
        sc.k = {5, 4, 3};
        sc.effect = 2.5;
        sc.imbalance = 2.0;
        const SynthResult synth = generate_synthetic(sc, 17);
        const SplitIndices split = stratified_split(synth.dataset.labels, {0.6, 0.2, 0.2}, 17);
        GBTConfig gc;
        gc.num_trees = 15;
        gc.max_depth = 3;
        TrainConfig tc;
        tc.learning_rate = 1e-3;
        tc.batch_size = 8;
        tc.max_epochs = 12;
        tc.dropout = 0.2;
        tc.patience = 5;
        tc.seed = 17;
        TrainedFixture out;
        out.dataset = synth.dataset;
        out.pipeline = run_pipeline(synth.dataset, split, gc, tc);
        for (std::size_t i = 0; i < 3; ++i) {
            out.n_features[i] = synth.dataset.modalities[i].feature_names.size();
            for (const std::size_t col : out.pipeline.model.graphs[i].node_columns)
                out.node_names[i].push_back(synth.dataset.modalities[i].feature_names[col]);
        }
        return out;
    }();
    return fx;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// writes a mutated copy of the checkpoint and returns its path
std::string corrupt(const json& base, const std::string& name,
                    const std::function<void(json&)>& mutate) {
    json j = base;
    mutate(j);
    const std::string path = temp_path(name);
    atomic_write_text(path, j.dump(1) + "\n");
    return path;
}

}  // namespace

TEST_CASE("checkpoints round-trip every parameter exactly") {
    const TrainedFixture& fx = fixture();
    const std::string path = temp_path("ckpt_roundtrip.json");
    save_checkpoint(fx.pipeline.model, fx.node_names, fx.n_features, path);

    const LoadedCheckpoint loaded = load_checkpoint(path);
    CHECK(loaded.n_features == fx.n_features);
    CHECK(loaded.node_names == fx.node_names);

    const MOTGNNModel& a = fx.pipeline.model;
    const MOTGNNModel& b = loaded.model;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.graphs[i].node_columns == b.graphs[i].node_columns);
        CHECK(a.graphs[i].adjacency.data == b.graphs[i].adjacency.data);
        CHECK(a.graphs[i].edge_count == b.graphs[i].edge_count);
        CHECK(a.branches[i].masked.weight.data == b.branches[i].masked.weight.data);
        CHECK(a.branches[i].masked.bias == b.branches[i].masked.bias);
        CHECK(a.branches[i].masked.mask.data == b.branches[i].masked.mask.data);
        CHECK(a.branches[i].hidden.weight.data == b.branches[i].hidden.weight.data);
        CHECK(a.branches[i].hidden.bias == b.branches[i].hidden.bias);
        CHECK(ensemble_to_json(a.ensembles[i]) == ensemble_to_json(b.ensembles[i]));
    }
    CHECK(a.fusion.layer1.weight.data == b.fusion.layer1.weight.data);
    CHECK(a.fusion.layer1.bias == b.fusion.layer1.bias);
    CHECK(a.fusion.batchnorm1.gamma == b.fusion.batchnorm1.gamma);
    CHECK(a.fusion.batchnorm1.beta == b.fusion.batchnorm1.beta);
    CHECK(a.fusion.batchnorm1.running_mean == b.fusion.batchnorm1.running_mean);
    CHECK(a.fusion.batchnorm1.running_var == b.fusion.batchnorm1.running_var);
    CHECK(a.fusion.batchnorm1.momentum == b.fusion.batchnorm1.momentum);
    CHECK(a.fusion.batchnorm1.eps == b.fusion.batchnorm1.eps);
    CHECK(a.fusion.layer2.weight.data == b.fusion.layer2.weight.data);
    CHECK(a.fusion.layer2.bias == b.fusion.layer2.bias);
    CHECK(a.fusion.batchnorm2.running_mean == b.fusion.batchnorm2.running_mean);
    CHECK(a.fusion.batchnorm2.running_var == b.fusion.batchnorm2.running_var);
    CHECK(a.fusion.head.weight.data == b.fusion.head.weight.data);
    CHECK(a.fusion.head.bias == b.fusion.head.bias);
    std::remove(path.c_str());
}

TEST_CASE("a reloaded model predicts bit for bit like the original") {
    const TrainedFixture& fx = fixture();
    const std::string path = temp_path("ckpt_predict.json");
    save_checkpoint(fx.pipeline.model, fx.node_names, fx.n_features, path);
    LoadedCheckpoint loaded = load_checkpoint(path);

    std::array<Tensor2, 3> reduced;
    std::array<const Tensor2*, 3> xp{};
    for (std::size_t i = 0; i < 3; ++i) {
        reduced[i] =
            reduce_values(fx.dataset.modalities[i].values, fx.pipeline.model.graphs[i]);
        xp[i] = &reduced[i];
    }
    const Prediction pa = predict(fx.pipeline.model, xp);
    const Prediction pb = predict(loaded.model, xp);
    CHECK(pa.prob1 == pb.prob1);
    CHECK(pa.labels == pb.labels);
    std::remove(path.c_str());
}

TEST_CASE("save, load, save produces an identical file") {
    const TrainedFixture& fx = fixture();
    const std::string p1 = temp_path("ckpt_stable_1.json");
    const std::string p2 = temp_path("ckpt_stable_2.json");
    save_checkpoint(fx.pipeline.model, fx.node_names, fx.n_features, p1);
    const LoadedCheckpoint loaded = load_checkpoint(p1);
    save_checkpoint(loaded.model, loaded.node_names, loaded.n_features, p2);
    CHECK(read_text_file(p1) == read_text_file(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("malformed checkpoints are rejected with a clear error") {
    const TrainedFixture& fx = fixture();
    const std::string path = temp_path("ckpt_base.json");
    save_checkpoint(fx.pipeline.model, fx.node_names, fx.n_features, path);
    const json base = json::parse(read_text_file(path));
    std::remove(path.c_str());

    std::vector<std::string> bad;
    bad.push_back(corrupt(base, "ckpt_bad_tag.json",
                          [](json& j) { j["format"] = "something-else"; }));
    bad.push_back(corrupt(base, "ckpt_bad_version.json", [](json& j) { j["version"] = 99; }));
    bad.push_back(corrupt(base, "ckpt_bad_width.json", [](json& j) { j["embed_width"] = 32; }));
    bad.push_back(corrupt(base, "ckpt_bad_b64.json", [](json& j) {
        j["modalities"][0]["masked_weight"] = "!!!not base64!!!";
    }));
    bad.push_back(corrupt(base, "ckpt_short_weights.json", [](json& j) {
        std::string s = j["modalities"][0]["masked_weight"].get<std::string>();
        s.resize(s.size() - 8);
        j["modalities"][0]["masked_weight"] = s;
    }));
    bad.push_back(corrupt(base, "ckpt_two_modalities.json", [](json& j) {
        j["modalities"].erase(2);
    }));
    bad.push_back(corrupt(base, "ckpt_bad_edge.json", [](json& j) {
        // self edge violates the a < b form
        j["modalities"][0]["edges"].push_back(json::array({0, 0}));
    }));
    bad.push_back(corrupt(base, "ckpt_edge_range.json", [](json& j) {
        const std::size_t p = j["modalities"][0]["node_columns"].size();
        j["modalities"][0]["edges"].push_back(json::array({0, p}));
    }));
    bad.push_back(corrupt(base, "ckpt_name_count.json", [](json& j) {
        j["modalities"][1]["node_names"].erase(0);
    }));
    bad.push_back(corrupt(base, "ckpt_missing_fusion.json", [](json& j) { j.erase("fusion"); }));

    for (const std::string& p : bad) {
        CAPTURE(p);
        CHECK_THROWS_AS(load_checkpoint(p), Error);
        std::remove(p.c_str());
    }

    const std::string garbled = temp_path("ckpt_not_json.json");
    atomic_write_text(garbled, "this is not json\n");
    CHECK_THROWS_AS(load_checkpoint(garbled), Error);
    std::remove(garbled.c_str());
    CHECK_THROWS_AS(load_checkpoint(temp_path("ckpt_does_not_exist.json")), Error);
}
