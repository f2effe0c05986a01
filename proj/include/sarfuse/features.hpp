#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sarfuse/raster.hpp"

namespace sarfuse {

/// Rotation-invariant uniform (riu2) LBP sampling geometry.
struct LbpParams {
    int samples = 8;  // P
    int radius = 1;   // R, in pixels
    void validate() const;
};

struct PatchParams {
    int patch_side = 3;       // p, odd
    bool include_lbp = false; // append LBP bands to the feature stack
    void validate() const;
};

/// Flattened patch vectors paired with class labels (> 0).
struct Dataset {
    std::vector<std::vector<float>> vectors;
    std::vector<uint16_t> labels;
    size_t feature_len = 0;

    size_t size() const { return vectors.size(); }
    void validate() const;
};

/// riu2 code in {0..P+1}: popcount of the thresholded neighbors when the
/// circular pattern has at most two 0/1 transitions, else P+1.
/// Tie rule: a neighbor equal to the center counts as 1.
int lbp_code(float center, std::span<const float> neighbors);

/// P samples on the radius-R circle around (x, y), angle 2*pi*k/P, bilinearly
/// interpolated; coordinates outside the image clamp to the nearest edge pixel.
std::vector<float> sample_neighbors(const Raster& img, int band, int x, int y, const LbpParams& p);

/// Per-pixel riu2 codes of one band, as floats.
std::vector<float> lbp_map(const Raster& img, int band, const LbpParams& p);

/// Spectral bands standardized to zero mean / unit variance (constant band
/// maps to zeros); with include_lbp, appends one LBP band per spectral band
/// scaled by 1/(P+1) into [0,1]. Output has B or 2B bands.
Raster build_feature_stack(const Raster& fused, const LbpParams& lbp, bool include_lbp);

/// One sample per labeled pixel whose full p x p window lies inside the
/// image, flattened band-major then row-major, emitted in row-major scan
/// order of the center pixel.
Dataset extract_patches(const Raster& stack, const LabelMap& gt, const PatchParams& p);

/// Center coordinates (x, y) of the samples extract_patches emits, in the
/// same order.
std::vector<std::pair<int, int>> patch_centers(const LabelMap& gt, const PatchParams& p);

/// Stratified split: each class contributes ceil(train_fraction * n_c)
/// training samples after a seeded per-class shuffle. Deterministic for a
/// fixed seed. Throws if any class has fewer than 2 samples.
std::pair<Dataset, Dataset> split_dataset(const Dataset& d, double train_fraction, uint64_t seed);

// CSV serialization: label first, features after, 9 significant digits.
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace sarfuse
