#pragma once

#include <span>
#include <vector>

#include "sarfuse/diffusion.hpp"
#include "sarfuse/raster.hpp"

namespace sarfuse {

struct FusionParams {
    DiffusionParams diffusion;
    double base_weight_sar = 0.5;  // optical base weight is 1 - base_weight_sar
    void validate() const;
};

/// Normalized detail-fusion weights, w1 + w2 = 1, both >= 0.
struct PcaWeights {
    double w1 = 0.5;
    double w2 = 0.5;
};

/// Weights from the principal eigenvector of the 2x2 sample covariance
/// (unbiased, n-1) of the flattened detail pair, components taken in
/// absolute value and normalized by their sum. A zero covariance matrix
/// yields (0.5, 0.5). Swapping the inputs swaps the weights exactly.
PcaWeights pca_weights(std::span<const float> d1, std::span<const float> d2);

/// w1*d1 + w2*d2 with weights from pca_weights.
std::vector<float> fuse_details(std::span<const float> d1, std::span<const float> d2);

/// w*b1 + (1-w)*b2.
std::vector<float> fuse_bases(std::span<const float> b1, std::span<const float> b2, double base_weight_sar);

/// Decomposes both single-band images and recombines:
/// fused = fuse_bases(base_sar, base_opt) + fuse_details(detail_sar, detail_opt).
std::vector<float> fuse_pair(std::span<const float> sar_band, std::span<const float> opt_band,
                             int width, int height, const FusionParams& p);

/// Band k of the result fuses the single SAR band with optical band k.
/// Band names are copied from the optical raster.
Raster fuse_bandwise(const Raster& sar, const Raster& opt, const FusionParams& p);

}  // namespace sarfuse
