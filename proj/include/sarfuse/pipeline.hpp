#pragma once

#include <array>
#include <string>
#include <vector>

#include "sarfuse/config.hpp"
#include "sarfuse/raster.hpp"
#include "sarfuse/svm.hpp"

namespace sarfuse {

enum class ClassifierMode { svm, psvm, lbp_psvm };

std::string to_string(ClassifierMode m);
ClassifierMode classifier_mode_from_string(const std::string& s);

/// Everything cmd_classify reports for one mode.
struct ClassificationResult {
    double overall_accuracy = 0.0;            // percent, on the test split
    std::vector<uint16_t> classes;
    std::vector<std::vector<long>> confusion; // test split, truth x predicted
    LabelMap classified;                      // predictions for every usable labeled pixel
    double svm_c = 0.0;
    double svm_gamma = 0.0;
    double cv_accuracy = -1.0;                // percent; -1 when no grid search ran
    size_t train_samples = 0;
    size_t test_samples = 0;
    MulticlassModel model;
};

/// Feature stack + patch extraction + split + (optional grid search) +
/// one-vs-one training + prediction, per classifier mode:
///   svm       patch side 1, no LBP
///   psvm      configured patch side, no LBP
///   lbp_psvm  configured patch side, LBP bands appended
ClassificationResult run_classification(const Raster& fused, const LabelMap& gt,
                                        const PipelineConfig& cfg, ClassifierMode mode);

std::string classification_report(const ClassificationResult& r, ClassifierMode mode);

namespace cli {

// Command bodies behind the CLI, returning process exit codes:
// 0 success, 2 validation failure, 1 anything else.

int cmd_fuse(const std::string& sar_path, const std::string& opt_path,
             const std::string& out_path, const PipelineConfig& cfg);

int cmd_evaluate(const std::string& fused_path, const std::string& reference_path,
                 const PipelineConfig& cfg, const std::string& out_path = "");

int cmd_classify(const std::string& fused_path, const std::string& labels_path,
                 const PipelineConfig& cfg, ClassifierMode mode,
                 const std::string& out_prefix, const std::string& model_out = "");

int cmd_quicklook(const std::string& raster_path, const std::string& out_path,
                  const std::array<int, 3>& band_triplet);

/// fuse -> evaluate -> classify in all three modes; writes the fused raster,
/// quality report, per-mode reports and classified rasters, a summary table
/// and a run manifest into outdir. A missing label file downgrades to a
/// warning and skips classification.
int cmd_pipeline(const std::string& sar_path, const std::string& opt_path,
                 const std::string& labels_path, const std::string& outdir,
                 const PipelineConfig& cfg);

}  // namespace cli
}  // namespace sarfuse
