#include "sarfuse/reference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace sarfuse::ref {

namespace {

constexpr double kPi = 3.14159265358979323846;

double g_of(double d, double kappa, ConductanceVariant v) {
    const double r = d / kappa;
    if (v == ConductanceVariant::exponential) return std::exp(-(r * r));
    return 1.0 / (1.0 + r * r);
}

double window_mean(const Raster& r, int b, int x0, int y0, int win) {
    double s = 0;
    for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) s += double(r.at(x, y, b));
    return s / (double(win) * double(win));
}

bool windows_equal(const Raster& f, const Raster& r, int b, int x0, int y0, int win) {
    for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x)
            if (f.at(x, y, b) != r.at(x, y, b)) return false;
    return true;
}

double derive_range(const Raster& reference, const MetricParams& p) {
    if (p.dynamic_range > 0.0) return p.dynamic_range;
    const auto [lo, hi] = std::minmax_element(reference.values.begin(), reference.values.end());
    const double range = double(*hi) - double(*lo);
    return range > 0.0 ? range : 1.0;
}

}  // namespace

Raster diffuse_step(const Raster& img, const DiffusionParams& p) {
    p.validate();
    img.validate();
    Raster out = img;
    const int w = img.width, h = img.height, nb = img.bands;
    for (int b = 0; b < nb; ++b) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double v = img.at(x, y, b);
                double acc = 0.0;
                const int steps[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
                for (const auto& s : steps) {
                    const int xn = x + s[0], yn = y + s[1];
                    if (xn < 0 || xn >= w || yn < 0 || yn >= h) continue;  // zero flux
                    const double d = double(img.at(xn, yn, b)) - v;
                    acc += g_of(std::fabs(d), p.kappa, p.variant) * d;
                }
                if (p.neighborhood == Neighborhood::six_3d) {
                    for (int bn : {b - 1, b + 1}) {
                        if (bn < 0 || bn >= nb) continue;
                        const double d = double(img.at(x, y, bn)) - v;
                        acc += g_of(std::fabs(d), p.kappa, p.variant) * d;
                    }
                }
                out.at(x, y, b) = float(v + p.lambda * acc);
            }
        }
    }
    return out;
}

Raster diffuse(const Raster& img, const DiffusionParams& p) {
    Raster cur = img;
    for (int it = 0; it < p.iterations; ++it) cur = diffuse_step(cur, p);
    return cur;
}

PcaWeights pca_weights(std::span<const float> d1, std::span<const float> d2) {
    if (d1.size() != d2.size() || d1.size() < 2)
        throw ValidationError("pca_weights oracle: bad input sizes");
    const size_t n = d1.size();
    double m1 = 0, m2 = 0;
    for (size_t i = 0; i < n; ++i) { m1 += d1[i]; m2 += d2[i]; }
    m1 /= double(n);
    m2 /= double(n);
    double a = 0, b = 0, c = 0;
    for (size_t i = 0; i < n; ++i) {
        const double e1 = double(d1[i]) - m1, e2 = double(d2[i]) - m2;
        a += e1 * e1;
        b += e1 * e2;
        c += e2 * e2;
    }
    a /= double(n - 1);
    b /= double(n - 1);
    c /= double(n - 1);

    if (b == 0.0 && a == c) return {0.5, 0.5};  // zero or isotropic
    double v1 = 1.0, v2 = 1.0;
    for (int it = 0; it < 200000; ++it) {
        const double n1 = a * v1 + b * v2;
        const double n2 = b * v1 + c * v2;
        const double norm = std::sqrt(n1 * n1 + n2 * n2);
        const double u1 = n1 / norm, u2 = n2 / norm;
        const double delta = std::fabs(u1 - v1) + std::fabs(u2 - v2);
        v1 = u1;
        v2 = u2;
        if (delta < 1e-16 && it > 0) break;
    }
    const double s = std::fabs(v1) + std::fabs(v2);
    return {std::fabs(v1) / s, std::fabs(v2) / s};
}

double ergas(const Raster& f, const Raster& r, const MetricParams& p) {
    double acc = 0;
    for (int b = 0; b < f.bands; ++b) {
        double ss = 0, mu = 0;
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                const double d = double(f.at(x, y, b)) - double(r.at(x, y, b));
                ss += d * d;
                mu += double(r.at(x, y, b));
            }
        }
        const double rmse = std::sqrt(ss / double(f.plane()));
        if (rmse == 0.0) continue;
        mu /= double(f.plane());
        acc += (rmse / mu) * (rmse / mu);
    }
    return 100.0 * p.ratio * std::sqrt(acc / double(f.bands));
}

double sam(const Raster& f, const Raster& r) {
    double acc = 0;
    long n = 0;
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            double dot = 0, nf = 0, nr = 0;
            for (int b = 0; b < f.bands; ++b) {
                const double fv = f.at(x, y, b), rv = r.at(x, y, b);
                dot += fv * rv;
                nf += fv * fv;
                nr += rv * rv;
            }
            if (nf == 0.0 || nr == 0.0) continue;
            const double cosv = std::clamp(dot / (std::sqrt(nf) * std::sqrt(nr)), -1.0, 1.0);
            acc += std::acos(cosv);
            ++n;
        }
    }
    return n == 0 ? 0.0 : acc / double(n) * 180.0 / kPi;
}

double rase(const Raster& f, const Raster& r) {
    double acc = 0, mu = 0;
    for (int b = 0; b < f.bands; ++b) {
        double ss = 0;
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                const double d = double(f.at(x, y, b)) - double(r.at(x, y, b));
                ss += d * d;
                mu += double(r.at(x, y, b));
            }
        }
        acc += ss / double(f.plane());
    }
    const double s = std::sqrt(acc / double(f.bands));
    if (s == 0.0) return 0.0;
    mu /= double(f.size());
    return 100.0 / mu * s;
}

double uiqi(const Raster& f, const Raster& r, const MetricParams& p) {
    const int win = p.uiqi_window;
    const double n = double(win) * double(win);
    double band_acc = 0;
    int band_cnt = 0;
    for (int b = 0; b < f.bands; ++b) {
        double sum = 0;
        long kept = 0;
        for (int y0 = 0; y0 + win <= f.height; ++y0) {
            for (int x0 = 0; x0 + win <= f.width; ++x0) {
                const double mx = window_mean(f, b, x0, y0, win);
                const double my = window_mean(r, b, x0, y0, win);
                double vx = 0, vy = 0, vxy = 0;
                for (int y = y0; y < y0 + win; ++y) {
                    for (int x = x0; x < x0 + win; ++x) {
                        const double ex = double(f.at(x, y, b)) - mx;
                        const double ey = double(r.at(x, y, b)) - my;
                        vx += ex * ex;
                        vy += ey * ey;
                        vxy += ex * ey;
                    }
                }
                vx /= n - 1.0;
                vy /= n - 1.0;
                vxy /= n - 1.0;
                const double den = (vx + vy) * (mx * mx + my * my);
                if (den != 0.0) {
                    sum += 4.0 * vxy * mx * my / den;
                    ++kept;
                } else if (windows_equal(f, r, b, x0, y0, win)) {
                    sum += 1.0;
                    ++kept;
                }
            }
        }
        if (kept == 0) continue;
        band_acc += sum / double(kept);
        ++band_cnt;
    }
    return band_cnt == 0 ? 0.0 : band_acc / double(band_cnt);
}

double ssim(const Raster& f, const Raster& r, const MetricParams& p) {
    const int win = p.ssim_window;
    const double n = double(win) * double(win);
    const double range = derive_range(r, p);
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    double band_acc = 0;
    for (int b = 0; b < f.bands; ++b) {
        double sum = 0;
        long cnt = 0;
        for (int y0 = 0; y0 + win <= f.height; ++y0) {
            for (int x0 = 0; x0 + win <= f.width; ++x0) {
                const double mx = window_mean(f, b, x0, y0, win);
                const double my = window_mean(r, b, x0, y0, win);
                double vx = 0, vy = 0, vxy = 0;
                for (int y = y0; y < y0 + win; ++y) {
                    for (int x = x0; x < x0 + win; ++x) {
                        const double ex = double(f.at(x, y, b)) - mx;
                        const double ey = double(r.at(x, y, b)) - my;
                        vx += ex * ex;
                        vy += ey * ey;
                        vxy += ex * ey;
                    }
                }
                vx /= n;  // biased
                vy /= n;
                vxy /= n;
                sum += (2.0 * mx * my + c1) * (2.0 * vxy + c2) /
                       ((mx * mx + my * my + c1) * (vx + vy + c2));
                ++cnt;
            }
        }
        band_acc += sum / double(cnt);
    }
    return band_acc / double(f.bands);
}

double psnr(const Raster& f, const Raster& r, const MetricParams& p) {
    double ss = 0;
    for (int b = 0; b < f.bands; ++b)
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                const double d = double(f.at(x, y, b)) - double(r.at(x, y, b));
                ss += d * d;
            }
    const double mse = ss / double(f.size());
    if (mse == 0.0) return p.psnr_cap;
    const double range = derive_range(r, p);
    return std::min(10.0 * std::log10(range * range / mse), p.psnr_cap);
}

double cc(const Raster& f, const Raster& r) {
    double acc = 0;
    for (int b = 0; b < f.bands; ++b) {
        auto fb = f.band(b);
        auto rb = r.band(b);
        const auto [flo, fhi] = std::minmax_element(fb.begin(), fb.end());
        const auto [rlo, rhi] = std::minmax_element(rb.begin(), rb.end());
        if (*flo == *fhi || *rlo == *rhi) continue;
        double mf = 0, mr = 0;
        for (size_t i = 0; i < fb.size(); ++i) { mf += fb[i]; mr += rb[i]; }
        mf /= double(fb.size());
        mr /= double(rb.size());
        double sff = 0, srr = 0, sfr = 0;
        for (size_t i = 0; i < fb.size(); ++i) {
            const double ef = double(fb[i]) - mf, er = double(rb[i]) - mr;
            sff += ef * ef;
            srr += er * er;
            sfr += ef * er;
        }
        acc += sfr / (std::sqrt(sff) * std::sqrt(srr));
    }
    return acc / double(f.bands);
}

int lbp_code_from_pattern(unsigned pattern, int samples) {
    // uniform iff the set bits form at most one circular run
    int runs = 0;
    for (int k = 0; k < samples; ++k) {
        const int cur = (pattern >> k) & 1u;
        const int prev = (pattern >> ((k + samples - 1) % samples)) & 1u;
        if (cur == 1 && prev == 0) ++runs;
    }
    const unsigned mask = samples >= 32 ? ~0u : (1u << samples) - 1u;
    const int ones = std::popcount(pattern & mask);
    return runs <= 1 ? ones : samples + 1;
}

std::vector<unsigned char> percentile_stretch(std::span<const float> band) {
    std::vector<float> sorted(band.begin(), band.end());
    std::sort(sorted.begin(), sorted.end());
    auto pct = [&](double q) {
        const double pos = q / 100.0 * double(sorted.size() - 1);
        const size_t i = size_t(pos);
        const double fr = pos - double(i);
        if (i + 1 >= sorted.size()) return double(sorted.back());
        return (1.0 - fr) * double(sorted[i]) + fr * double(sorted[i + 1]);
    };
    const double lo = pct(2.0), hi = pct(98.0);
    std::vector<unsigned char> out(band.size(), 0);
    if (hi <= lo) return out;
    for (size_t i = 0; i < band.size(); ++i) {
        const double v = std::lround(255.0 * (double(band[i]) - lo) / (hi - lo));
        out[i] = (unsigned char)(std::clamp(v, 0.0, 255.0));
    }
    return out;
}

double svm_dual_maximum(const std::vector<std::vector<float>>& X, const std::vector<int>& y,
                        double C, double gamma, int iterations,
                        std::vector<double>* alphas_out) {
    const size_t n = X.size();
    if (n == 0 || y.size() != n) throw ValidationError("svm_dual_maximum: bad inputs");
    std::vector<double> q(n * n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double d2 = 0;
            for (size_t k = 0; k < X[i].size(); ++k) {
                const double d = double(X[i][k]) - double(X[j][k]);
                d2 += d * d;
            }
            q[i * n + j] = double(y[i]) * double(y[j]) * std::exp(-gamma * d2);
        }
    }
    // Gershgorin bound on the largest eigenvalue sets a safe step size
    double bound = 0;
    for (size_t i = 0; i < n; ++i) {
        double row = 0;
        for (size_t j = 0; j < n; ++j) row += std::fabs(q[i * n + j]);
        bound = std::max(bound, row);
    }
    const double step = 1.0 / bound;

    auto project = [&](std::vector<double>& z) {
        // bisection on nu so that sum_i y_i clip(z_i - nu y_i, 0, C) == 0
        double span = C + 1.0;
        for (double v : z) span = std::max(span, std::fabs(v) + C + 1.0);
        double lo = -span, hi = span;
        for (int it = 0; it < 200; ++it) {
            const double nu = 0.5 * (lo + hi);
            double h = 0;
            for (size_t i = 0; i < n; ++i)
                h += double(y[i]) * std::clamp(z[i] - nu * double(y[i]), 0.0, C);
            if (h > 0) lo = nu;
            else hi = nu;
        }
        const double nu = 0.5 * (lo + hi);
        for (size_t i = 0; i < n; ++i) z[i] = std::clamp(z[i] - nu * double(y[i]), 0.0, C);
    };

    std::vector<double> a(n, 0.0);
    project(a);
    std::vector<double> grad(n);
    for (int it = 0; it < iterations; ++it) {
        for (size_t i = 0; i < n; ++i) {
            double qa = 0;
            for (size_t j = 0; j < n; ++j) qa += q[i * n + j] * a[j];
            grad[i] = 1.0 - qa;
        }
        for (size_t i = 0; i < n; ++i) a[i] += step * grad[i];
        project(a);
    }

    double lin = 0, quad = 0;
    for (size_t i = 0; i < n; ++i) {
        lin += a[i];
        for (size_t j = 0; j < n; ++j) quad += a[i] * a[j] * q[i * n + j];
    }
    if (alphas_out) *alphas_out = a;
    return lin - 0.5 * quad;
}

}  // namespace sarfuse::ref
