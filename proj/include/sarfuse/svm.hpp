#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sarfuse/features.hpp"

namespace sarfuse {

struct SvmParams {
    double C = 10.0;      // regularization
    double gamma = 0.5;   // RBF width
    double tol = 1e-3;    // KKT tolerance
    int max_passes = 1000;// cap on optimizer sweeps
    void validate() const;
};

/// exp(-gamma * ||x - y||^2), in (0, 1].
double rbf_kernel(std::span<const float> x, std::span<const float> y, double gamma);

/// Soft-margin RBF SVM in dual form. coeffs[i] = alpha_i * y_i for the
/// retained support vectors (alpha > 1e-8).
struct BinaryModel {
    std::vector<std::vector<float>> support_vectors;
    std::vector<double> coeffs;
    double bias = 0.0;
    double gamma = 0.0;
};

/// Optimizer diagnostics, filled on request by train_binary.
struct TrainStats {
    std::vector<double> alphas;  // over the full training set
    double dual_objective = 0.0;
    int sweeps = 0;
    bool converged = false;
};

/// Trains by sequential minimal optimization: repeatedly picks a KKT
/// violator and the partner maximizing |E_i - E_j|, solving each
/// two-variable subproblem analytically. Stops when a full sweep finds no
/// violator within tol, or after max_passes sweeps.
BinaryModel train_binary(const std::vector<std::vector<float>>& X, const std::vector<int>& y,
                         const SvmParams& p, TrainStats* stats = nullptr);

/// sum_i coeffs_i * K(sv_i, x) + bias.
double decision(const BinaryModel& m, std::span<const float> x);

/// One-vs-one ensemble: pairs are ordered (c_i, c_j) for i < j over the
/// ascending class list, the first class of a pair mapping to +1.
struct MulticlassModel {
    std::vector<uint16_t> classes;
    std::vector<BinaryModel> pairs;  // classes.size() * (classes.size()-1) / 2

    std::pair<uint16_t, uint16_t> pair_classes(size_t pair_index) const;
};

MulticlassModel train_multiclass(const Dataset& d, const SvmParams& p);

/// Majority vote over pair decisions (a non-negative decision votes for the
/// pair's first class); ties break to the smallest class id.
uint16_t predict(const MulticlassModel& m, std::span<const float> x);

struct GridSearchResult {
    double C = 0.0;
    double gamma = 0.0;
    double cv_accuracy = 0.0;  // percent
};

/// Stratified k-fold cross validation over the (C, gamma) grid. Ties prefer
/// the smaller C, then the smaller gamma. Deterministic for a fixed seed.
GridSearchResult grid_search(const Dataset& d, std::span<const double> c_grid,
                             std::span<const double> gamma_grid, int folds, uint64_t seed);

/// 100 * correct / total.
double overall_accuracy(std::span<const uint16_t> predicted, std::span<const uint16_t> truth);

/// counts[i][j] = samples of truth class classes[i] predicted as classes[j].
std::vector<std::vector<long>> confusion_matrix(std::span<const uint16_t> predicted,
                                                std::span<const uint16_t> truth,
                                                std::span<const uint16_t> classes);

// Text model format; round-trips bit-exactly. Field order is documented in
// the README.
void save_model(const MulticlassModel& m, const std::string& path);
MulticlassModel load_model(const std::string& path);

}  // namespace sarfuse
