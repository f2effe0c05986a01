#include "sarfuse/diffusion.hpp"

#include <cmath>

namespace sarfuse {

void DiffusionParams::validate() const {
    if (iterations < 0) throw ValidationError("diffusion iterations must be >= 0");
    if (kappa <= 0) throw ValidationError("diffusion kappa must be > 0");
    if (!(lambda > 0) || lambda > max_lambda())
        throw ValidationError("diffusion lambda must lie in (0, " + fmt_double(max_lambda()) +
                              "] for this neighborhood, got " + fmt_double(lambda));
}

double conductance(double grad, double kappa, ConductanceVariant variant) {
    if (kappa <= 0) throw ValidationError("conductance kappa must be > 0");
    double t = grad / kappa;
    return variant == ConductanceVariant::exponential ? std::exp(-t * t) : 1.0 / (1.0 + t * t);
}

Raster diffuse(const Raster& img, const DiffusionParams& p) {
    p.validate();
    img.validate();
    if (p.iterations == 0) return img;

    const int w = img.width, h = img.height, nb = img.bands;
    const size_t plane = img.plane();
    const bool across_bands = p.neighborhood == Neighborhood::six_3d;
    const double lambda = p.lambda, kappa = p.kappa;
    const ConductanceVariant variant = p.variant;

    Raster out = img;
    std::vector<float> prev(img.values);

    for (int iter = 0; iter < p.iterations; ++iter) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < nb; ++b) {
            for (int y = 0; y < h; ++y) {
                const float* src = prev.data() + size_t(b) * plane + size_t(y) * w;
                float* dst = out.values.data() + size_t(b) * plane + size_t(y) * w;
                for (int x = 0; x < w; ++x) {
                    const double v = src[x];
                    double flux = 0.0;
                    auto add = [&](double neighbor) {
                        double d = neighbor - v;
                        flux += conductance(std::fabs(d), kappa, variant) * d;
                    };
                    if (x > 0) add(src[x - 1]);
                    if (x + 1 < w) add(src[x + 1]);
                    if (y > 0) add(src[x - w]);
                    if (y + 1 < h) add(src[x + w]);
                    if (across_bands) {
                        if (b > 0) add(prev[size_t(b - 1) * plane + size_t(y) * w + x]);
                        if (b + 1 < nb) add(prev[size_t(b + 1) * plane + size_t(y) * w + x]);
                    }
                    dst[x] = float(v + lambda * flux);
                }
            }
        }
        std::swap(prev, out.values);
    }
    std::swap(prev, out.values);  // undo the last swap: `prev` holds the final state
    return out;
}

std::pair<Raster, Raster> decompose(const Raster& img, const DiffusionParams& p) {
    Raster base = diffuse(img, p);
    Raster detail = base;
    const size_t n = img.values.size();
#pragma omp parallel for schedule(static)
    for (long i = 0; i < long(n); ++i)
        detail.values[size_t(i)] = img.values[size_t(i)] - base.values[size_t(i)];
    return {std::move(base), std::move(detail)};
}

}  // namespace sarfuse
