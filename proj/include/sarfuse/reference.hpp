#pragma once

// Serial reference implementations, written straight from the defining
// formulas with plain loops. They share no code with the main kernels and
// exist so tests can cross-check the optimized (OpenMP / integral-image /
// SMO) paths, and so the benchmark can compare against them.

#include <span>
#include <vector>

#include "sarfuse/diffusion.hpp"
#include "sarfuse/fusion.hpp"
#include "sarfuse/metrics.hpp"
#include "sarfuse/raster.hpp"

namespace sarfuse::ref {

/// One explicit diffusion iteration, nested loops, no threading.
Raster diffuse_step(const Raster& img, const DiffusionParams& p);
Raster diffuse(const Raster& img, const DiffusionParams& p);

/// Principal-component weights via two-pass covariance + power iteration.
PcaWeights pca_weights(std::span<const float> d1, std::span<const float> d2);

// Metric formulas evaluated directly, two-pass per window.
double ergas(const Raster& f, const Raster& r, const MetricParams& p);
double sam(const Raster& f, const Raster& r);
double rase(const Raster& f, const Raster& r);
double uiqi(const Raster& f, const Raster& r, const MetricParams& p);
double ssim(const Raster& f, const Raster& r, const MetricParams& p);
double psnr(const Raster& f, const Raster& r, const MetricParams& p);
double cc(const Raster& f, const Raster& r);

/// riu2 LBP code from a sign pattern, via the single-circular-run
/// characterization of uniformity.
int lbp_code_from_pattern(unsigned pattern, int samples);

/// 2-98 percentile stretch of one band to [0,255], direct formula.
std::vector<unsigned char> percentile_stretch(std::span<const float> band);

/// Maximizes the SVM dual by projected gradient ascent (box + equality
/// constraint handled by bisection on the hyperplane multiplier).
/// Returns the achieved dual objective; alphas_out receives the maximizer.
double svm_dual_maximum(const std::vector<std::vector<float>>& X, const std::vector<int>& y,
                        double C, double gamma, int iterations,
                        std::vector<double>* alphas_out = nullptr);

}  // namespace sarfuse::ref
