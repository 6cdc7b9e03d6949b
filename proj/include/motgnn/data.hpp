#pragma once

#include "motgnn/tensor.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace motgnn {

struct OmicsMatrix {
    Tensor2 values;                         // n samples x p features
    std::vector<std::string> feature_names; // length p, unique
    std::vector<std::string> sample_ids;    // length n, unique
};

// Three modalities over one shared sample order plus binary labels.
struct MultiOmicsDataset {
    std::array<OmicsMatrix, 3> modalities;
    std::vector<int> labels;

    std::size_t n_samples() const { return labels.size(); }
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

struct NormalizationStats {
    std::vector<double> col_min;
    std::vector<double> col_max;
};

struct AlignResult {
    MultiOmicsDataset dataset;
    std::array<std::size_t, 3> dropped_per_modality{};
    std::size_t dropped_labels = 0;
};

struct SynthConfig {
    std::size_t n = 300;
    std::array<std::size_t, 3> p{2000, 2000, 400};
    std::array<std::size_t, 3> k{30, 30, 10};
    double effect = 1.5;
    double imbalance = 3.0; // class-0 : class-1 ratio
};

struct SynthResult {
    MultiOmicsDataset dataset;
    std::array<std::vector<std::size_t>, 3> planted; // informative column indices, ascending
};

OmicsMatrix load_omics_csv(const std::string& path);

// Header `sample_id,label`; labels restricted to 0/1, IDs unique.
std::map<std::string, int> load_labels_csv(const std::string& path);

void write_omics_csv(const OmicsMatrix& m, const std::string& path);
void write_labels_csv(const std::vector<std::string>& sample_ids, const std::vector<int>& labels,
                      const std::string& path);

// Intersects the four sample-ID sets and reorders every modality to the
// sorted common IDs; drop counts are reported, not fatal.
AlignResult align_samples(const OmicsMatrix& m1, const OmicsMatrix& m2, const OmicsMatrix& m3,
                          const std::map<std::string, int>& labels);

// Column-wise map to [0,1]; constant columns become all zeros.
std::pair<OmicsMatrix, NormalizationStats> minmax_normalize(const OmicsMatrix& m);

// Per-class shuffle then largest-remainder allocation; remainder ties go
// to the earlier part (train, then validation, then test). Index lists
// come back sorted.
SplitIndices stratified_split(const std::vector<int>& labels, const std::array<double, 3>& ratios,
                              std::uint64_t seed);

// Class-conditional Gaussian shift on the planted columns, unit noise
// elsewhere, then min-max normalization.
SynthResult generate_synthetic(const SynthConfig& config, std::uint64_t seed);

// Enforces the dataset invariants: shared sample order, 0/1 labels, both
// classes present.
void validate_dataset(const MultiOmicsDataset& ds);

} // namespace motgnn
