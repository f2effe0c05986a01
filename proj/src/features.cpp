#include "sarfuse/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace sarfuse {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Offset {
    double dx, dy;
};

// Sample k sits at angle 2*pi*k/P, x to the right, y up in image terms
// (negative row direction). Offsets within 1e-6 of an integer snap to it so
// the axis-aligned samples of integer radii hit pixels exactly.
std::vector<Offset> circle_offsets(const LbpParams& p) {
    std::vector<Offset> off(size_t(p.samples));
    for (int k = 0; k < p.samples; ++k) {
        const double a = 2.0 * kPi * double(k) / double(p.samples);
        double dx = double(p.radius) * std::cos(a);
        double dy = -double(p.radius) * std::sin(a);
        if (std::fabs(dx - std::round(dx)) < 1e-6) dx = std::round(dx);
        if (std::fabs(dy - std::round(dy)) < 1e-6) dy = std::round(dy);
        off[size_t(k)] = {dx, dy};
    }
    return off;
}

float sample_at(const Raster& img, int band, double sx, double sy) {
    sx = std::clamp(sx, 0.0, double(img.width - 1));
    sy = std::clamp(sy, 0.0, double(img.height - 1));
    const int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
    const int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
    const double fx = sx - double(x0), fy = sy - double(y0);
    const double v00 = img.at(x0, y0, band), v10 = img.at(x1, y0, band);
    const double v01 = img.at(x0, y1, band), v11 = img.at(x1, y1, band);
    const double top = (1.0 - fx) * v00 + fx * v10;
    const double bot = (1.0 - fx) * v01 + fx * v11;
    return float((1.0 - fy) * top + fy * bot);
}

int code_of(float center, const float* nb, int samples) {
    int ones = 0, transitions = 0;
    for (int k = 0; k < samples; ++k) {
        const int s = nb[k] >= center ? 1 : 0;
        const int t = nb[(k + 1) % samples] >= center ? 1 : 0;
        ones += s;
        transitions += s != t;
    }
    return transitions <= 2 ? ones : samples + 1;
}

}  // namespace

void LbpParams::validate() const {
    if (samples < 2) throw ValidationError("lbp samples must be at least 2");
    if (radius < 1) throw ValidationError("lbp radius must be at least 1");
}

void PatchParams::validate() const {
    if (patch_side < 1 || patch_side % 2 == 0)
        throw ValidationError("patch side must be odd and positive, got " +
                              std::to_string(patch_side));
}

void Dataset::validate() const {
    if (vectors.size() != labels.size())
        throw ValidationError("dataset has " + std::to_string(vectors.size()) + " vectors but " +
                              std::to_string(labels.size()) + " labels");
    for (size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != feature_len)
            throw ValidationError("dataset vector " + std::to_string(i) + " has length " +
                                  std::to_string(vectors[i].size()) + ", expected " +
                                  std::to_string(feature_len));
        if (labels[i] == 0) throw ValidationError("dataset label 0 at sample " + std::to_string(i));
        for (float v : vectors[i])
            if (!std::isfinite(v))
                throw ValidationError("non-finite feature in sample " + std::to_string(i));
    }
}

int lbp_code(float center, std::span<const float> neighbors) {
    if (neighbors.size() < 2) throw ValidationError("lbp_code needs at least 2 neighbors");
    return code_of(center, neighbors.data(), int(neighbors.size()));
}

std::vector<float> sample_neighbors(const Raster& img, int band, int x, int y,
                                    const LbpParams& p) {
    p.validate();
    img.validate();
    if (band < 0 || band >= img.bands) throw ValidationError("band out of range");
    if (x < 0 || x >= img.width || y < 0 || y >= img.height)
        throw ValidationError("pixel out of range");
    const auto off = circle_offsets(p);
    std::vector<float> nb(size_t(p.samples));
    for (int k = 0; k < p.samples; ++k)
        nb[size_t(k)] = sample_at(img, band, double(x) + off[size_t(k)].dx,
                                  double(y) + off[size_t(k)].dy);
    return nb;
}

std::vector<float> lbp_map(const Raster& img, int band, const LbpParams& p) {
    p.validate();
    img.validate();
    if (band < 0 || band >= img.bands) throw ValidationError("band out of range");
    const auto off = circle_offsets(p);
    std::vector<float> out(img.plane());
    std::vector<float> nb(size_t(p.samples));
#pragma omp parallel for schedule(static) firstprivate(nb)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int k = 0; k < p.samples; ++k)
                nb[size_t(k)] = sample_at(img, band, double(x) + off[size_t(k)].dx,
                                          double(y) + off[size_t(k)].dy);
            out[size_t(y) * img.width + x] =
                float(code_of(img.at(x, y, band), nb.data(), p.samples));
        }
    }
    return out;
}

Raster build_feature_stack(const Raster& fused, const LbpParams& lbp, bool include_lbp) {
    fused.validate();
    lbp.validate();
    const int b_out = include_lbp ? 2 * fused.bands : fused.bands;
    Raster out(fused.width, fused.height, b_out);
    for (int b = 0; b < fused.bands; ++b) out.band_names[size_t(b)] = fused.band_names[size_t(b)];

    const size_t n = fused.plane();
    for (int b = 0; b < fused.bands; ++b) {
        auto src = fused.band(b);
        auto dst = out.band(b);
        // population moments, per-row partials for thread-count invariance
        std::vector<double> pm(size_t(fused.height)), pv(size_t(fused.height));
#pragma omp parallel for schedule(static)
        for (int y = 0; y < fused.height; ++y) {
            double s = 0;
            for (int x = 0; x < fused.width; ++x) s += double(src[size_t(y) * fused.width + x]);
            pm[size_t(y)] = s;
        }
        double mean = 0;
        for (double v : pm) mean += v;
        mean /= double(n);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < fused.height; ++y) {
            double s = 0;
            for (int x = 0; x < fused.width; ++x) {
                const double e = double(src[size_t(y) * fused.width + x]) - mean;
                s += e * e;
            }
            pv[size_t(y)] = s;
        }
        double var = 0;
        for (double v : pv) var += v;
        var /= double(n);
        const double sd = std::sqrt(var);
        if (sd == 0.0) {
            std::fill(dst.begin(), dst.end(), 0.0f);
        } else {
#pragma omp parallel for schedule(static)
            for (long i = 0; i < long(n); ++i)
                dst[size_t(i)] = float((double(src[size_t(i)]) - mean) / sd);
        }
    }
    if (include_lbp) {
        const double scale = 1.0 / double(lbp.samples + 1);
        for (int b = 0; b < fused.bands; ++b) {
            std::vector<float> codes = lbp_map(fused, b, lbp);
            auto dst = out.band(fused.bands + b);
#pragma omp parallel for schedule(static)
            for (long i = 0; i < long(n); ++i) dst[size_t(i)] = float(codes[size_t(i)] * scale);
            out.band_names[size_t(fused.bands + b)] = fused.band_names[size_t(b)] + "_lbp";
        }
    }
    return out;
}

std::vector<std::pair<int, int>> patch_centers(const LabelMap& gt, const PatchParams& p) {
    p.validate();
    gt.validate();
    const int r = p.patch_side / 2;
    std::vector<std::pair<int, int>> centers;
    for (int y = r; y < gt.height - r; ++y)
        for (int x = r; x < gt.width - r; ++x)
            if (gt.at(x, y) != 0) centers.emplace_back(x, y);
    return centers;
}

Dataset extract_patches(const Raster& stack, const LabelMap& gt, const PatchParams& p) {
    p.validate();
    stack.validate();
    gt.validate();
    if (stack.width != gt.width || stack.height != gt.height)
        throw ValidationError("feature stack is " + std::to_string(stack.width) + "x" +
                              std::to_string(stack.height) + " but labels are " +
                              std::to_string(gt.width) + "x" + std::to_string(gt.height));
    if (p.patch_side > std::min(stack.width, stack.height))
        throw ValidationError("patch side exceeds image extent");

    const auto centers = patch_centers(gt, p);
    const int r = p.patch_side / 2, side = p.patch_side;
    Dataset d;
    d.feature_len = size_t(stack.bands) * size_t(side) * size_t(side);
    d.vectors.resize(centers.size());
    d.labels.resize(centers.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < long(centers.size()); ++i) {
        const auto [cx, cy] = centers[size_t(i)];
        std::vector<float>& v = d.vectors[size_t(i)];
        v.resize(d.feature_len);
        size_t j = 0;
        for (int b = 0; b < stack.bands; ++b)
            for (int wy = -r; wy <= r; ++wy)
                for (int wx = -r; wx <= r; ++wx) v[j++] = stack.at(cx + wx, cy + wy, b);
        d.labels[size_t(i)] = gt.at(cx, cy);
    }
    return d;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& d, double train_fraction, uint64_t seed) {
    d.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train fraction must lie in (0,1), got " +
                              fmt_double(train_fraction));

    std::vector<uint16_t> classes;
    for (uint16_t l : d.labels)
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    std::sort(classes.begin(), classes.end());

    std::mt19937 rng{uint32_t(seed)};
    Dataset train, test;
    train.feature_len = test.feature_len = d.feature_len;
    for (uint16_t cls : classes) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < d.labels.size(); ++i)
            if (d.labels[i] == cls) idx.push_back(i);
        if (idx.size() < 2)
            throw ValidationError("class " + std::to_string(cls) + " has only " +
                                  std::to_string(idx.size()) + " sample(s); need at least 2");
        // Fisher-Yates with explicit modulo draws; std::shuffle is not
        // reproducible across standard libraries.
        for (size_t i = idx.size() - 1; i > 0; --i) {
            const size_t j = size_t(rng() % uint32_t(i + 1));
            std::swap(idx[i], idx[j]);
        }
        const size_t n_train = size_t(std::ceil(train_fraction * double(idx.size())));
        for (size_t i = 0; i < idx.size(); ++i) {
            Dataset& dst = i < n_train ? train : test;
            dst.vectors.push_back(d.vectors[idx[i]]);
            dst.labels.push_back(d.labels[idx[i]]);
        }
    }
    return {std::move(train), std::move(test)};
}

void save_dataset(const Dataset& d, const std::string& path) {
    d.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (size_t i = 0; i < d.size(); ++i) {
        out << d.labels[i];
        for (float v : d.vectors[i]) out << ',' << fmt_sig(v, 9);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    Dataset d;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() < 2)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected label,features");
        const long label = parse_int(trim(cells[0]));
        if (label < 1 || label > 65535)
            throw IoError(path + ":" + std::to_string(lineno) + ": label out of range");
        std::vector<float> v(cells.size() - 1);
        for (size_t i = 1; i < cells.size(); ++i) v[i - 1] = float(parse_double(trim(cells[i])));
        if (d.vectors.empty()) {
            d.feature_len = v.size();
        } else if (v.size() != d.feature_len) {
            throw IoError(path + ":" + std::to_string(lineno) + ": inconsistent feature count");
        }
        d.vectors.push_back(std::move(v));
        d.labels.push_back(uint16_t(label));
    }
    if (d.vectors.empty()) throw IoError(path + ": empty dataset");
    d.validate();
    return d;
}

}  // namespace sarfuse
