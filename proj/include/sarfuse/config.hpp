#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sarfuse/diffusion.hpp"
#include "sarfuse/features.hpp"
#include "sarfuse/metrics.hpp"
#include "sarfuse/svm.hpp"

namespace sarfuse {

/// Grid-search request; when disabled the fixed SvmParams are used.
struct GridSpec {
    bool enabled = false;
    std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
    std::vector<double> gamma_grid{0.01, 0.1, 1.0, 10.0};
    int folds = 5;
    void validate() const;
};

/// Every tunable of the pipeline, loadable from a flat key=value file.
/// All randomness (splits, CV folds) derives from the single seed.
struct PipelineConfig {
    DiffusionParams diffusion;
    double base_weight_sar = 0.5;
    MetricParams metrics;
    LbpParams lbp;
    int patch_side = 3;
    SvmParams svm;             // svm.gamma == 0 selects 1/feature_len at training time
    GridSpec grid;
    double train_fraction = 0.7;
    uint64_t seed = 42;

    void validate() const;
};

/// Applies one `key=value` entry (e.g. "diffusion.kappa", "30").
/// Unknown keys raise ValidationError.
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Parses a key=value file ('#' starts a comment) on top of defaults.
PipelineConfig load_config(const std::string& path);
/// Same, on top of an existing config (later files/flags override).
void load_config_into(PipelineConfig& cfg, const std::string& path);

/// Serializes the full config as key=value lines; parses back identically.
std::string config_to_text(const PipelineConfig& cfg);

}  // namespace sarfuse
