#include "sarfuse/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace sarfuse {

void SvmParams::validate() const {
    if (!(C > 0.0)) throw ValidationError("svm C must be positive");
    if (!(gamma > 0.0)) throw ValidationError("svm gamma must be positive");
    if (!(tol > 0.0)) throw ValidationError("svm tol must be positive");
    if (max_passes < 1) throw ValidationError("svm max_passes must be at least 1");
}

double rbf_kernel(std::span<const float> x, std::span<const float> y, double gamma) {
    if (x.size() != y.size())
        throw ValidationError("rbf_kernel: dimension mismatch, " + std::to_string(x.size()) +
                              " vs " + std::to_string(y.size()));
    double d2 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = double(x[i]) - double(y[i]);
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

namespace {

constexpr double kStepEps = 1e-10;   // minimum useful alpha move
constexpr double kSvEps = 1e-8;      // support vector retention threshold
constexpr size_t kGramLimit = 4096;  // full kernel matrix below this n

// Deterministic SMO working state. All reductions are either serial or
// elementwise, so results do not depend on the OpenMP thread count.
struct Smo {
    const std::vector<std::vector<float>>& X;
    const std::vector<int>& y;
    const SvmParams& p;
    size_t n;
    std::vector<double> alpha, err;
    double b = 0.0;
    std::vector<double> gram;  // full matrix when n <= kGramLimit
    std::vector<double> row1, row2;

    Smo(const std::vector<std::vector<float>>& X_, const std::vector<int>& y_,
        const SvmParams& p_)
        : X(X_), y(y_), p(p_), n(X_.size()), alpha(n, 0.0), err(n) {
        for (size_t i = 0; i < n; ++i) err[i] = -double(y[i]);  // f == 0 initially
        if (n <= kGramLimit) {
            gram.resize(n * n);
#pragma omp parallel for schedule(static)
            for (long i = 0; i < long(n); ++i)
                for (size_t j = 0; j < n; ++j)
                    gram[size_t(i) * n + j] = rbf_kernel(X[size_t(i)], X[j], p.gamma);
        } else {
            row1.resize(n);
            row2.resize(n);
        }
    }

    double k(size_t i, size_t j) const {
        if (!gram.empty()) return gram[i * n + j];
        return rbf_kernel(X[i], X[j], p.gamma);
    }

    // Kernel row against every sample, either a view into the Gram matrix or
    // freshly computed into buf.
    const double* kernel_row(size_t i, std::vector<double>& buf) {
        if (!gram.empty()) return &gram[i * n];
#pragma omp parallel for schedule(static)
        for (long j = 0; j < long(n); ++j) buf[size_t(j)] = rbf_kernel(X[i], X[size_t(j)], p.gamma);
        return buf.data();
    }

    std::vector<size_t> non_bound() const {
        std::vector<size_t> nb;
        for (size_t i = 0; i < n; ++i)
            if (alpha[i] > 0.0 && alpha[i] < p.C) nb.push_back(i);
        return nb;
    }

    bool take_step(size_t i1, size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alpha[i1], a2 = alpha[i2];
        const int y1 = y[i1], y2 = y[i2];
        const double e1 = err[i1], e2 = err[i2];
        const double s = double(y1) * double(y2);
        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(p.C, p.C + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - p.C);
            hi = std::min(p.C, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = k(i1, i1), k12 = k(i1, i2), k22 = k(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;
        double a2n;
        if (eta > 0.0) {
            a2n = std::clamp(a2 + double(y2) * (e1 - e2) / eta, lo, hi);
        } else {
            // flat direction: evaluate the objective at both clip ends
            const double f1 = double(y1) * (e1 + b) - a1 * k11 - s * a2 * k12;
            const double f2 = double(y2) * (e2 + b) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo), h1 = a1 + s * (a2 - hi);
            const double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                                  0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                                  0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (lo_obj < hi_obj - kStepEps) a2n = lo;
            else if (lo_obj > hi_obj + kStepEps) a2n = hi;
            else return false;
        }
        if (std::fabs(a2n - a2) < kStepEps * (a2n + a2 + kStepEps)) return false;

        // a1 follows from the clipped a2 so sum(alpha_i y_i) is preserved
        const double a1n = std::clamp(a1 + s * (a2 - a2n), 0.0, p.C);
        const double d1 = (a1n - a1) * double(y1);
        const double d2 = (a2n - a2) * double(y2);
        const double b1 = b - e1 - d1 * k11 - d2 * k12;
        const double b2 = b - e2 - d1 * k12 - d2 * k22;
        double bn;
        if (a1n > 0.0 && a1n < p.C) bn = b1;
        else if (a2n > 0.0 && a2n < p.C) bn = b2;
        else bn = 0.5 * (b1 + b2);

        const double* kr1 = kernel_row(i1, row1);
        const double* kr2 = kernel_row(i2, row2);
        const double db = bn - b;
        alpha[i1] = a1n;
        alpha[i2] = a2n;
        b = bn;
#pragma omp parallel for schedule(static)
        for (long j = 0; j < long(n); ++j)
            err[size_t(j)] += d1 * kr1[size_t(j)] + d2 * kr2[size_t(j)] + db;
        return true;
    }

    int examine(size_t i2) {
        const double a2 = alpha[i2], e2 = err[i2];
        const double r2 = e2 * double(y[i2]);
        if (!((r2 < -p.tol && a2 < p.C) || (r2 > p.tol && a2 > 0.0))) return 0;

        const auto nb = non_bound();
        if (nb.size() > 1) {
            size_t best = nb[0];
            double gap = -1.0;
            for (size_t i : nb) {
                const double g = std::fabs(err[i] - e2);
                if (g > gap) {  // strict: ties keep the smallest index
                    gap = g;
                    best = i;
                }
            }
            if (take_step(best, i2)) return 1;
        }
        for (size_t i : nb)
            if (take_step(i, i2)) return 1;
        for (size_t i = 0; i < n; ++i)
            if (take_step(i, i2)) return 1;
        return 0;
    }

    double dual_objective() const {
        std::vector<double> part(n, 0.0);
#pragma omp parallel for schedule(static)
        for (long i = 0; i < long(n); ++i) {
            if (alpha[size_t(i)] == 0.0) continue;
            double s = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (alpha[j] == 0.0) continue;
                s += alpha[size_t(i)] * alpha[j] * double(y[size_t(i)]) * double(y[j]) *
                     k(size_t(i), j);
            }
            part[size_t(i)] = s;
        }
        double quad = 0.0, lin = 0.0;
        for (size_t i = 0; i < n; ++i) { quad += part[i]; lin += alpha[i]; }
        return lin - 0.5 * quad;
    }
};

}  // namespace

BinaryModel train_binary(const std::vector<std::vector<float>>& X, const std::vector<int>& y,
                         const SvmParams& p, TrainStats* stats) {
    p.validate();
    if (X.empty()) throw ValidationError("train_binary: empty training set");
    if (X.size() != y.size()) throw ValidationError("train_binary: X/y size mismatch");
    const size_t dim = X[0].size();
    bool pos = false, neg = false;
    for (size_t i = 0; i < X.size(); ++i) {
        if (X[i].size() != dim) throw ValidationError("train_binary: ragged feature vectors");
        if (y[i] == 1) pos = true;
        else if (y[i] == -1) neg = true;
        else throw ValidationError("train_binary: labels must be +1/-1");
    }
    if (!pos || !neg) throw ValidationError("train_binary: need both classes");

    Smo smo(X, y, p);
    bool examine_all = true;
    bool converged = false;
    int sweeps = 0;
    while (sweeps < p.max_passes) {
        ++sweeps;
        int changed = 0;
        if (examine_all) {
            for (size_t i = 0; i < smo.n; ++i) changed += smo.examine(i);
            if (changed == 0) {
                converged = true;
                break;
            }
            examine_all = false;
        } else {
            for (size_t i : smo.non_bound()) changed += smo.examine(i);
            if (changed == 0) examine_all = true;
        }
    }

    BinaryModel m;
    m.bias = smo.b;
    m.gamma = p.gamma;
    for (size_t i = 0; i < smo.n; ++i) {
        if (smo.alpha[i] > kSvEps) {
            m.support_vectors.push_back(X[i]);
            m.coeffs.push_back(smo.alpha[i] * double(y[i]));
        }
    }
    if (stats) {
        stats->alphas = smo.alpha;
        stats->dual_objective = smo.dual_objective();
        stats->sweeps = sweeps;
        stats->converged = converged;
    }
    return m;
}

double decision(const BinaryModel& m, std::span<const float> x) {
    double s = 0.0;
    for (size_t i = 0; i < m.support_vectors.size(); ++i)
        s += m.coeffs[i] * rbf_kernel(m.support_vectors[i], x, m.gamma);
    return s + m.bias;
}

std::pair<uint16_t, uint16_t> MulticlassModel::pair_classes(size_t pair_index) const {
    size_t p = 0;
    for (size_t i = 0; i < classes.size(); ++i)
        for (size_t j = i + 1; j < classes.size(); ++j, ++p)
            if (p == pair_index) return {classes[i], classes[j]};
    throw ValidationError("pair index out of range");
}

MulticlassModel train_multiclass(const Dataset& d, const SvmParams& p) {
    d.validate();
    p.validate();
    MulticlassModel m;
    for (uint16_t l : d.labels)
        if (std::find(m.classes.begin(), m.classes.end(), l) == m.classes.end())
            m.classes.push_back(l);
    std::sort(m.classes.begin(), m.classes.end());
    if (m.classes.size() < 2) throw ValidationError("multiclass training needs at least 2 classes");

    struct PairSpec {
        uint16_t a, b;
    };
    std::vector<PairSpec> specs;
    for (size_t i = 0; i < m.classes.size(); ++i)
        for (size_t j = i + 1; j < m.classes.size(); ++j)
            specs.push_back({m.classes[i], m.classes[j]});
    m.pairs.resize(specs.size());

#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < long(specs.size()); ++s) {
        const auto [ca, cb] = specs[size_t(s)];
        std::vector<std::vector<float>> X;
        std::vector<int> y;
        for (size_t i = 0; i < d.size(); ++i) {
            if (d.labels[i] == ca) {
                X.push_back(d.vectors[i]);
                y.push_back(1);
            } else if (d.labels[i] == cb) {
                X.push_back(d.vectors[i]);
                y.push_back(-1);
            }
        }
        m.pairs[size_t(s)] = train_binary(X, y, p);
    }
    return m;
}

uint16_t predict(const MulticlassModel& m, std::span<const float> x) {
    if (m.classes.size() < 2 || m.pairs.size() != m.classes.size() * (m.classes.size() - 1) / 2)
        throw ValidationError("malformed multiclass model");
    std::vector<int> votes(m.classes.size(), 0);
    size_t p = 0;
    for (size_t i = 0; i < m.classes.size(); ++i) {
        for (size_t j = i + 1; j < m.classes.size(); ++j, ++p) {
            if (decision(m.pairs[p], x) >= 0.0) ++votes[i];
            else ++votes[j];
        }
    }
    size_t best = 0;
    for (size_t i = 1; i < votes.size(); ++i)
        if (votes[i] > votes[best]) best = i;  // ties keep the smallest class id
    return m.classes[best];
}

GridSearchResult grid_search(const Dataset& d, std::span<const double> c_grid,
                             std::span<const double> gamma_grid, int folds, uint64_t seed) {
    d.validate();
    if (c_grid.empty() || gamma_grid.empty()) throw ValidationError("empty parameter grid");
    for (double c : c_grid)
        if (!(c > 0.0)) throw ValidationError("grid C values must be positive");
    for (double g : gamma_grid)
        if (!(g > 0.0)) throw ValidationError("grid gamma values must be positive");
    if (folds < 2) throw ValidationError("cross validation needs at least 2 folds");
    if (size_t(folds) > d.size()) throw ValidationError("more folds than samples");

    // stratified fold assignment: per-class shuffle, then round-robin deal
    std::vector<uint16_t> classes;
    for (uint16_t l : d.labels)
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    std::sort(classes.begin(), classes.end());

    std::vector<int> fold_of(d.size(), 0);
    std::mt19937 rng{uint32_t(seed)};
    for (uint16_t cls : classes) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < d.size(); ++i)
            if (d.labels[i] == cls) idx.push_back(i);
        for (size_t i = idx.size() - 1; i > 0; --i) {
            const size_t j = size_t(rng() % uint32_t(i + 1));
            std::swap(idx[i], idx[j]);
        }
        for (size_t t = 0; t < idx.size(); ++t) fold_of[idx[t]] = int(t % size_t(folds));
    }

    const size_t cells = c_grid.size() * gamma_grid.size();
    std::vector<long> correct(cells * size_t(folds), 0), total(cells * size_t(folds), 0);

#pragma omp parallel for collapse(2) schedule(dynamic)
    for (long cell = 0; cell < long(cells); ++cell) {
        for (int f = 0; f < folds; ++f) {
            SvmParams p;
            p.C = c_grid[size_t(cell) / gamma_grid.size()];
            p.gamma = gamma_grid[size_t(cell) % gamma_grid.size()];
            Dataset train, test;
            train.feature_len = test.feature_len = d.feature_len;
            for (size_t i = 0; i < d.size(); ++i) {
                Dataset& dst = fold_of[i] == f ? test : train;
                dst.vectors.push_back(d.vectors[i]);
                dst.labels.push_back(d.labels[i]);
            }
            std::vector<uint16_t> train_classes;
            for (uint16_t l : train.labels)
                if (std::find(train_classes.begin(), train_classes.end(), l) ==
                    train_classes.end())
                    train_classes.push_back(l);
            if (test.size() == 0 || train_classes.size() < 2) continue;  // fold unusable
            const MulticlassModel m = train_multiclass(train, p);
            long ok = 0;
            for (size_t i = 0; i < test.size(); ++i)
                if (predict(m, test.vectors[i]) == test.labels[i]) ++ok;
            correct[size_t(cell) * folds + f] = ok;
            total[size_t(cell) * folds + f] = long(test.size());
        }
    }

    GridSearchResult best;
    bool have = false;
    for (size_t ci = 0; ci < c_grid.size(); ++ci) {
        for (size_t gi = 0; gi < gamma_grid.size(); ++gi) {
            const size_t cell = ci * gamma_grid.size() + gi;
            long ok = 0, tot = 0;
            for (int f = 0; f < folds; ++f) {
                ok += correct[cell * folds + f];
                tot += total[cell * folds + f];
            }
            if (tot == 0) continue;
            const double acc = 100.0 * double(ok) / double(tot);
            const bool better =
                !have || acc > best.cv_accuracy ||
                (acc == best.cv_accuracy &&
                 (c_grid[ci] < best.C || (c_grid[ci] == best.C && gamma_grid[gi] < best.gamma)));
            if (better) {
                best = {c_grid[ci], gamma_grid[gi], acc};
                have = true;
            }
        }
    }
    if (!have) throw ValidationError("cross validation produced no evaluable fold");
    return best;
}

double overall_accuracy(std::span<const uint16_t> predicted, std::span<const uint16_t> truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw ValidationError("accuracy needs equal-size non-empty label spans");
    long ok = 0;
    for (size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++ok;
    return 100.0 * double(ok) / double(predicted.size());
}

std::vector<std::vector<long>> confusion_matrix(std::span<const uint16_t> predicted,
                                                std::span<const uint16_t> truth,
                                                std::span<const uint16_t> classes) {
    if (predicted.size() != truth.size())
        throw ValidationError("confusion matrix needs equal-size label spans");
    auto index_of = [&](uint16_t l) {
        for (size_t i = 0; i < classes.size(); ++i)
            if (classes[i] == l) return i;
        throw ValidationError("label " + std::to_string(l) + " not in class list");
    };
    std::vector<std::vector<long>> m(classes.size(), std::vector<long>(classes.size(), 0));
    for (size_t i = 0; i < truth.size(); ++i) ++m[index_of(truth[i])][index_of(predicted[i])];
    return m;
}

void save_model(const MulticlassModel& m, const std::string& path) {
    if (m.classes.size() < 2 || m.pairs.size() != m.classes.size() * (m.classes.size() - 1) / 2)
        throw ValidationError("malformed multiclass model");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "svm_model v1\n";
    out << "classes " << m.classes.size();
    for (uint16_t c : m.classes) out << ' ' << c;
    out << '\n';
    size_t dim = 0;
    for (const auto& p : m.pairs)
        if (!p.support_vectors.empty()) dim = p.support_vectors[0].size();
    out << "dim " << dim << '\n';
    out << "pairs " << m.pairs.size() << '\n';
    size_t pi = 0;
    for (size_t i = 0; i < m.classes.size(); ++i) {
        for (size_t j = i + 1; j < m.classes.size(); ++j, ++pi) {
            const BinaryModel& p = m.pairs[pi];
            out << "pair " << m.classes[i] << ' ' << m.classes[j] << " nsv "
                << p.support_vectors.size() << " bias " << fmt_double(p.bias) << " gamma "
                << fmt_double(p.gamma) << '\n';
            for (size_t s = 0; s < p.support_vectors.size(); ++s) {
                out << fmt_double(p.coeffs[s]);
                for (float v : p.support_vectors[s]) out << ' ' << fmt_float(v);
                out << '\n';
            }
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

MulticlassModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    auto next = [&](const char* what) {
        if (!std::getline(in, line)) throw IoError(path + ": truncated model, expected " + what);
        return split(trim(line), ' ');
    };
    if (!std::getline(in, line) || trim(line) != "svm_model v1")
        throw IoError(path + ": not a v1 svm model file");

    MulticlassModel m;
    auto t = next("classes");
    if (t.size() < 3 || t[0] != "classes") throw IoError(path + ": bad classes line");
    const size_t k = size_t(parse_int(t[1]));
    if (t.size() != k + 2) throw IoError(path + ": class count mismatch");
    for (size_t i = 0; i < k; ++i) {
        const long c = parse_int(t[i + 2]);
        if (c < 1 || c > 65535) throw IoError(path + ": class id out of range");
        m.classes.push_back(uint16_t(c));
    }
    if (!std::is_sorted(m.classes.begin(), m.classes.end()))
        throw IoError(path + ": classes must be ascending");

    t = next("dim");
    if (t.size() != 2 || t[0] != "dim") throw IoError(path + ": bad dim line");
    const size_t dim = size_t(parse_int(t[1]));

    t = next("pairs");
    if (t.size() != 2 || t[0] != "pairs") throw IoError(path + ": bad pairs line");
    const size_t np = size_t(parse_int(t[1]));
    if (np != k * (k - 1) / 2) throw IoError(path + ": pair count mismatch");

    size_t pi = 0;
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i + 1; j < k; ++j, ++pi) {
            t = next("pair header");
            if (t.size() != 9 || t[0] != "pair" || t[3] != "nsv" || t[5] != "bias" ||
                t[7] != "gamma")
                throw IoError(path + ": bad pair header");
            if (uint16_t(parse_int(t[1])) != m.classes[i] ||
                uint16_t(parse_int(t[2])) != m.classes[j])
                throw IoError(path + ": pair order mismatch");
            BinaryModel bm;
            const size_t nsv = size_t(parse_int(t[4]));
            bm.bias = parse_double(t[6]);
            bm.gamma = parse_double(t[8]);
            for (size_t s = 0; s < nsv; ++s) {
                t = next("support vector");
                if (t.size() != dim + 1) throw IoError(path + ": bad support vector line");
                bm.coeffs.push_back(parse_double(t[0]));
                std::vector<float> v(dim);
                for (size_t f = 0; f < dim; ++f) v[f] = float(parse_double(t[f + 1]));
                bm.support_vectors.push_back(std::move(v));
            }
            m.pairs.push_back(std::move(bm));
        }
    }
    return m;
}

}  // namespace sarfuse
