#include "sarfuse/fusion.hpp"

#include <cmath>

namespace sarfuse {

void FusionParams::validate() const {
    diffusion.validate();
    if (!(base_weight_sar >= 0.0 && base_weight_sar <= 1.0))
        throw ValidationError("base_weight_sar must lie in [0,1], got " + fmt_double(base_weight_sar));
}

namespace {

void require_same_size(size_t n1, size_t n2, const char* what) {
    if (n1 != n2)
        throw ValidationError(std::string(what) + ": size mismatch, " + std::to_string(n1) +
                              " vs " + std::to_string(n2));
}

// Deterministic chunked sum: fixed chunk partials combined in index order,
// so the result is identical for any thread count.
constexpr size_t kChunk = 4096;

template <class PerChunk>
double chunked_sum(size_t n, PerChunk&& f) {
    const size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> part(chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (long c = 0; c < long(chunks); ++c) {
        size_t lo = size_t(c) * kChunk, hi = std::min(lo + kChunk, n);
        double s = 0.0;
        f(lo, hi, s);
        part[size_t(c)] = s;
    }
    double total = 0.0;
    for (double v : part) total += v;
    return total;
}

double mean_of(std::span<const float> v) {
    return chunked_sum(v.size(), [&](size_t lo, size_t hi, double& s) {
               for (size_t i = lo; i < hi; ++i) s += v[i];
           }) / double(v.size());
}

// Weights of the dominant eigenvector of [[hi, b], [b, lo]] with hi >= lo,
// returned as (weight for the hi variable, weight for the lo variable).
// lambda1 - hi is evaluated as 2b^2/(disc + (hi-lo)) to avoid cancellation.
std::pair<double, double> principal_weights_ordered(double hi, double b, double lo) {
    const double d = hi - lo;  // >= 0
    if (b == 0.0 && d == 0.0) return {0.5, 0.5};  // zero or isotropic covariance
    if (b == 0.0) return {1.0, 0.0};
    if (d == 0.0) return {0.5, 0.5};  // eigenvector (1, +-1), equal magnitudes
    const double disc = std::sqrt(d * d + 4.0 * b * b);
    const double v_hi = std::fabs(b);
    const double v_lo = 2.0 * b * b / (disc + d);
    const double s = v_hi + v_lo;
    return {v_hi / s, v_lo / s};
}

}  // namespace

PcaWeights pca_weights(std::span<const float> d1, std::span<const float> d2) {
    require_same_size(d1.size(), d2.size(), "pca_weights");
    if (d1.size() < 2) throw ValidationError("pca_weights needs at least 2 pixels");

    const size_t n = d1.size();
    const double m1 = mean_of(d1);
    const double m2 = mean_of(d2);
    double var1 = 0, var2 = 0, cov = 0;
    {
        // one chunked pass for the three central second moments
        const size_t chunks = (n + kChunk - 1) / kChunk;
        std::vector<double> pa(chunks), pc(chunks), pb(chunks);
#pragma omp parallel for schedule(static)
        for (long c = 0; c < long(chunks); ++c) {
            size_t lo = size_t(c) * kChunk, hi = std::min(lo + kChunk, n);
            double sa = 0, sc = 0, sb = 0;
            for (size_t i = lo; i < hi; ++i) {
                double e1 = double(d1[i]) - m1;
                double e2 = double(d2[i]) - m2;
                sa += e1 * e1;
                sc += e2 * e2;
                sb += e1 * e2;
            }
            pa[size_t(c)] = sa;
            pc[size_t(c)] = sc;
            pb[size_t(c)] = sb;
        }
        for (size_t c = 0; c < chunks; ++c) { var1 += pa[c]; var2 += pc[c]; cov += pb[c]; }
    }
    const double denom = double(n - 1);
    var1 /= denom;
    var2 /= denom;
    cov /= denom;

    // Branch on the larger variance so that swapping (d1, d2) swaps the
    // weights bit-exactly.
    if (var1 >= var2) {
        auto [wh, wl] = principal_weights_ordered(var1, cov, var2);
        return {wh, wl};
    }
    auto [wh, wl] = principal_weights_ordered(var2, cov, var1);
    return {wl, wh};
}

std::vector<float> fuse_details(std::span<const float> d1, std::span<const float> d2) {
    require_same_size(d1.size(), d2.size(), "fuse_details");
    const PcaWeights w = pca_weights(d1, d2);
    std::vector<float> out(d1.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < long(out.size()); ++i)
        out[size_t(i)] = float(w.w1 * double(d1[size_t(i)]) + w.w2 * double(d2[size_t(i)]));
    return out;
}

std::vector<float> fuse_bases(std::span<const float> b1, std::span<const float> b2,
                              double base_weight_sar) {
    require_same_size(b1.size(), b2.size(), "fuse_bases");
    if (!(base_weight_sar >= 0.0 && base_weight_sar <= 1.0))
        throw ValidationError("base weight must lie in [0,1]");
    const double w1 = base_weight_sar, w2 = 1.0 - base_weight_sar;
    std::vector<float> out(b1.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < long(out.size()); ++i)
        out[size_t(i)] = float(w1 * double(b1[size_t(i)]) + w2 * double(b2[size_t(i)]));
    return out;
}

std::vector<float> fuse_pair(std::span<const float> sar_band, std::span<const float> opt_band,
                             int width, int height, const FusionParams& p) {
    p.validate();
    require_same_size(sar_band.size(), opt_band.size(), "fuse_pair");
    require_same_size(sar_band.size(), size_t(width) * size_t(height), "fuse_pair dims");

    auto as_raster = [&](std::span<const float> v) {
        Raster r(width, height, 1);
        r.values.assign(v.begin(), v.end());
        return r;
    };
    auto [base_s, detail_s] = decompose(as_raster(sar_band), p.diffusion);
    auto [base_o, detail_o] = decompose(as_raster(opt_band), p.diffusion);

    std::vector<float> base = fuse_bases(base_s.values, base_o.values, p.base_weight_sar);
    std::vector<float> detail = fuse_details(detail_s.values, detail_o.values);

    std::vector<float> out(base.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < long(out.size()); ++i)
        out[size_t(i)] = base[size_t(i)] + detail[size_t(i)];
    return out;
}

Raster fuse_bandwise(const Raster& sar, const Raster& opt, const FusionParams& p) {
    p.validate();
    sar.validate();
    opt.validate();
    if (sar.bands != 1)
        throw ValidationError("fuse_bandwise expects a single-band SAR raster, got " +
                              std::to_string(sar.bands) + " bands");
    if (sar.width != opt.width || sar.height != opt.height)
        throw ValidationError("fuse_bandwise: dimension mismatch, SAR is " +
                              std::to_string(sar.width) + "x" + std::to_string(sar.height) +
                              ", optical is " + std::to_string(opt.width) + "x" +
                              std::to_string(opt.height));

    Raster out(opt.width, opt.height, opt.bands);
    out.band_names = opt.band_names;
    for (int b = 0; b < opt.bands; ++b) {
        std::vector<float> fused = fuse_pair(sar.band(0), opt.band(b), opt.width, opt.height, p);
        std::copy(fused.begin(), fused.end(), out.band(b).begin());
    }
    return out;
}

}  // namespace sarfuse
