#include "sarfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sarfuse {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_pair(const Raster& fused, const Raster& reference) {
    fused.validate();
    reference.validate();
    if (fused.width != reference.width || fused.height != reference.height ||
        fused.bands != reference.bands) {
        auto shape = [](const Raster& r) {
            return std::to_string(r.width) + "x" + std::to_string(r.height) + "x" +
                   std::to_string(r.bands);
        };
        throw ValidationError("metric inputs disagree: fused is " + shape(fused) +
                              ", reference is " + shape(reference));
    }
}

void check_window(int win, const char* name, const Raster& r) {
    if (win > r.width || win > r.height)
        throw ValidationError(std::string(name) + " window " + std::to_string(win) +
                              " exceeds image extent " + std::to_string(r.width) + "x" +
                              std::to_string(r.height));
}

// Per-row partial sums combined serially in row order; bit-identical for any
// OpenMP thread count.
template <class PerRow>
double row_sum(int bands, int rows, PerRow&& f) {
    std::vector<double> part(size_t(bands) * size_t(rows), 0.0);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < bands; ++b)
        for (int y = 0; y < rows; ++y) part[size_t(b) * rows + y] = f(b, y);
    double total = 0.0;
    for (double v : part) total += v;
    return total;
}

double band_rmse(const Raster& f, const Raster& r, int b) {
    const double ss = row_sum(1, f.height, [&](int, int y) {
        double s = 0;
        for (int x = 0; x < f.width; ++x) {
            const double d = double(f.at(x, y, b)) - double(r.at(x, y, b));
            s += d * d;
        }
        return s;
    });
    return std::sqrt(ss / double(f.plane()));
}

double band_mean(const Raster& r, int b) {
    const double s = row_sum(1, r.height, [&](int, int y) {
        double acc = 0;
        for (int x = 0; x < r.width; ++x) acc += double(r.at(x, y, b));
        return acc;
    });
    return s / double(r.plane());
}

double derive_range(const Raster& reference, const MetricParams& p) {
    if (p.dynamic_range > 0.0) return p.dynamic_range;
    float lo = reference.values[0], hi = reference.values[0];
#pragma omp parallel for schedule(static) reduction(min : lo) reduction(max : hi)
    for (long i = 0; i < long(reference.values.size()); ++i) {
        lo = std::min(lo, reference.values[size_t(i)]);
        hi = std::max(hi, reference.values[size_t(i)]);
    }
    const double range = double(hi) - double(lo);
    return range > 0.0 ? range : 1.0;
}

// Summed-area table with a zero top row / left column; (w+1) x (h+1).
template <class Value>
std::vector<double> sat_of(int w, int h, Value&& val) {
    std::vector<double> s(size_t(w + 1) * size_t(h + 1), 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 1; y <= h; ++y) {
        double run = 0.0;
        double* row = &s[size_t(y) * (w + 1)];
        for (int x = 1; x <= w; ++x) {
            run += val(x - 1, y - 1);
            row[x] = run;
        }
    }
    for (int y = 2; y <= h; ++y) {
        double* row = &s[size_t(y) * (w + 1)];
        const double* prev = &s[size_t(y - 1) * (w + 1)];
#pragma omp parallel for schedule(static)
        for (int x = 1; x <= w; ++x) row[x] += prev[x];
    }
    return s;
}

double sat_window(const std::vector<double>& s, int w1, int x0, int y0, int win) {
    return s[size_t(y0 + win) * w1 + (x0 + win)] - s[size_t(y0) * w1 + (x0 + win)] -
           s[size_t(y0 + win) * w1 + x0] + s[size_t(y0) * w1 + x0];
}

struct BandSats {
    std::vector<double> sx, sy, sxx, syy, sxy;
    int w1;
};

BandSats make_sats(const Raster& f, const Raster& r, int b) {
    const int w = f.width, h = f.height;
    auto fv = [&](int x, int y) { return double(f.at(x, y, b)); };
    auto rv = [&](int x, int y) { return double(r.at(x, y, b)); };
    BandSats s;
    s.w1 = w + 1;
    s.sx = sat_of(w, h, fv);
    s.sy = sat_of(w, h, rv);
    s.sxx = sat_of(w, h, [&](int x, int y) { return fv(x, y) * fv(x, y); });
    s.syy = sat_of(w, h, [&](int x, int y) { return rv(x, y) * rv(x, y); });
    s.sxy = sat_of(w, h, [&](int x, int y) { return fv(x, y) * rv(x, y); });
    return s;
}

bool windows_identical(const Raster& f, const Raster& r, int b, int x0, int y0, int win) {
    for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x)
            if (f.at(x, y, b) != r.at(x, y, b)) return false;
    return true;
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

void MetricParams::validate() const {
    if (!(ratio > 0.0)) throw ValidationError("metrics ratio must be positive");
    if (uiqi_window < 2) throw ValidationError("uiqi window must be at least 2");
    if (ssim_window < 3 || ssim_window % 2 == 0)
        throw ValidationError("ssim window must be odd and at least 3, got " +
                              std::to_string(ssim_window));
    if (dynamic_range < 0.0) throw ValidationError("dynamic_range must be non-negative");
    if (!(psnr_cap > 0.0)) throw ValidationError("psnr_cap must be positive");
}

double ergas(const Raster& fused, const Raster& reference, const MetricParams& p) {
    check_pair(fused, reference);
    p.validate();
    double acc = 0.0;
    for (int b = 0; b < fused.bands; ++b) {
        const double rmse = band_rmse(fused, reference, b);
        if (rmse == 0.0) continue;  // exact zero regardless of the band mean
        const double mu = band_mean(reference, b);
        const double t = rmse / mu;
        acc += t * t;
    }
    return 100.0 * p.ratio * std::sqrt(acc / double(fused.bands));
}

double sam(const Raster& fused, const Raster& reference) {
    check_pair(fused, reference);
    const int w = fused.width, h = fused.height, bands = fused.bands;

    std::vector<double> part(size_t(h), 0.0);
    std::vector<long> cnt(size_t(h), 0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double sum = 0.0;
        long n = 0;
        for (int x = 0; x < w; ++x) {
            double nf2 = 0, nr2 = 0;
            for (int b = 0; b < bands; ++b) {
                const double fv = fused.at(x, y, b), rv = reference.at(x, y, b);
                nf2 += fv * fv;
                nr2 += rv * rv;
            }
            if (nf2 == 0.0 || nr2 == 0.0) continue;  // undefined angle, excluded
            // 2*atan2(|u-v|, |u+v|) on the normalized vectors equals
            // arccos(<f,r>/(|f||r|)) but stays accurate near 0 and pi.
            const double nf = std::sqrt(nf2), nr = std::sqrt(nr2);
            double d2 = 0, s2 = 0;
            for (int b = 0; b < bands; ++b) {
                const double af = double(fused.at(x, y, b)) / nf;
                const double ar = double(reference.at(x, y, b)) / nr;
                const double d = af - ar, s = af + ar;
                d2 += d * d;
                s2 += s * s;
            }
            sum += 2.0 * std::atan2(std::sqrt(d2), std::sqrt(s2));
            ++n;
        }
        part[size_t(y)] = sum;
        cnt[size_t(y)] = n;
    }
    double total = 0.0;
    long n = 0;
    for (int y = 0; y < h; ++y) { total += part[size_t(y)]; n += cnt[size_t(y)]; }
    if (n == 0) return 0.0;
    return (total / double(n)) * (180.0 / kPi);
}

double rase(const Raster& fused, const Raster& reference) {
    check_pair(fused, reference);
    double acc = 0.0;
    for (int b = 0; b < fused.bands; ++b) {
        const double rmse = band_rmse(fused, reference, b);
        acc += rmse * rmse;
    }
    const double s = std::sqrt(acc / double(fused.bands));
    if (s == 0.0) return 0.0;
    const double mu = row_sum(reference.bands, reference.height, [&](int b, int y) {
                          double a = 0;
                          for (int x = 0; x < reference.width; ++x)
                              a += double(reference.at(x, y, b));
                          return a;
                      }) / double(reference.size());
    return 100.0 / mu * s;
}

double uiqi(const Raster& fused, const Raster& reference, const MetricParams& p) {
    check_pair(fused, reference);
    p.validate();
    check_window(p.uiqi_window, "uiqi", fused);
    const int win = p.uiqi_window;
    const double n = double(win) * double(win);
    const int ny = fused.height - win + 1, nx = fused.width - win + 1;

    double band_acc = 0.0;
    int band_cnt = 0;
    for (int b = 0; b < fused.bands; ++b) {
        const BandSats s = make_sats(fused, reference, b);
        std::vector<double> part(size_t(ny), 0.0);
        std::vector<long> cnt(size_t(ny), 0);
#pragma omp parallel for schedule(static)
        for (int y0 = 0; y0 < ny; ++y0) {
            double sum = 0.0;
            long kept = 0;
            for (int x0 = 0; x0 < nx; ++x0) {
                const double sx = sat_window(s.sx, s.w1, x0, y0, win);
                const double sy = sat_window(s.sy, s.w1, x0, y0, win);
                const double sxx = sat_window(s.sxx, s.w1, x0, y0, win);
                const double syy = sat_window(s.syy, s.w1, x0, y0, win);
                const double sxy = sat_window(s.sxy, s.w1, x0, y0, win);
                const double mx = sx / n, my = sy / n;
                const double qx = (sxx - sx * sx / n) / (n - 1.0);
                const double qy = (syy - sy * sy / n) / (n - 1.0);
                const double qxy = (sxy - sx * sy / n) / (n - 1.0);
                const double num = 4.0 * qxy * mx * my;
                const double den = (qx + qy) * (mx * mx + my * my);
                if (den != 0.0) {
                    sum += num / den;
                    ++kept;
                } else if (windows_identical(fused, reference, b, x0, y0, win)) {
                    sum += 1.0;
                    ++kept;
                }
            }
            part[size_t(y0)] = sum;
            cnt[size_t(y0)] = kept;
        }
        double sum = 0.0;
        long kept = 0;
        for (int y0 = 0; y0 < ny; ++y0) { sum += part[size_t(y0)]; kept += cnt[size_t(y0)]; }
        if (kept == 0) continue;  // no window produced a defined value
        band_acc += sum / double(kept);
        ++band_cnt;
    }
    if (band_cnt == 0) return 0.0;
    return clamp_unit(band_acc / double(band_cnt));
}

double ssim(const Raster& fused, const Raster& reference, const MetricParams& p) {
    check_pair(fused, reference);
    p.validate();
    check_window(p.ssim_window, "ssim", fused);
    const int win = p.ssim_window;
    const double n = double(win) * double(win);
    const int ny = fused.height - win + 1, nx = fused.width - win + 1;
    const double range = derive_range(reference, p);
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);

    double band_acc = 0.0;
    for (int b = 0; b < fused.bands; ++b) {
        const BandSats s = make_sats(fused, reference, b);
        std::vector<double> part(size_t(ny), 0.0);
#pragma omp parallel for schedule(static)
        for (int y0 = 0; y0 < ny; ++y0) {
            double sum = 0.0;
            for (int x0 = 0; x0 < nx; ++x0) {
                const double sx = sat_window(s.sx, s.w1, x0, y0, win);
                const double sy = sat_window(s.sy, s.w1, x0, y0, win);
                const double sxx = sat_window(s.sxx, s.w1, x0, y0, win);
                const double syy = sat_window(s.syy, s.w1, x0, y0, win);
                const double sxy = sat_window(s.sxy, s.w1, x0, y0, win);
                const double mx = sx / n, my = sy / n;
                const double vx = sxx / n - mx * mx;  // biased window moments
                const double vy = syy / n - my * my;
                const double vxy = sxy / n - mx * my;
                const double num = (2.0 * mx * my + c1) * (2.0 * vxy + c2);
                const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
                sum += num / den;
            }
            part[size_t(y0)] = sum;
        }
        double sum = 0.0;
        for (int y0 = 0; y0 < ny; ++y0) sum += part[size_t(y0)];
        band_acc += sum / (double(ny) * double(nx));
    }
    return clamp_unit(band_acc / double(fused.bands));
}

double psnr(const Raster& fused, const Raster& reference, const MetricParams& p) {
    check_pair(fused, reference);
    p.validate();
    const double ss = row_sum(fused.bands, fused.height, [&](int b, int y) {
        double s = 0;
        for (int x = 0; x < fused.width; ++x) {
            const double d = double(fused.at(x, y, b)) - double(reference.at(x, y, b));
            s += d * d;
        }
        return s;
    });
    const double mse = ss / double(fused.size());
    if (mse == 0.0) return p.psnr_cap;
    const double range = derive_range(reference, p);
    return std::min(10.0 * std::log10(range * range / mse), p.psnr_cap);
}

double cc(const Raster& fused, const Raster& reference) {
    check_pair(fused, reference);
    double acc = 0.0;
    for (int b = 0; b < fused.bands; ++b) {
        auto constant_band = [](const Raster& r, int band) {
            auto v = r.band(band);
            float lo = v[0], hi = v[0];
#pragma omp parallel for schedule(static) reduction(min : lo) reduction(max : hi)
            for (long i = 0; i < long(v.size()); ++i) {
                lo = std::min(lo, v[size_t(i)]);
                hi = std::max(hi, v[size_t(i)]);
            }
            return lo == hi;
        };
        if (constant_band(fused, b) || constant_band(reference, b)) continue;  // term is 0

        const double mf = band_mean(fused, b);
        const double mr = band_mean(reference, b);
        const int h = fused.height, w = fused.width;
        std::vector<double> pf(size_t(h), 0.0), pr(size_t(h), 0.0), pfr(size_t(h), 0.0);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) {
            double sff = 0, srr = 0, sfr = 0;
            for (int x = 0; x < w; ++x) {
                const double ef = double(fused.at(x, y, b)) - mf;
                const double er = double(reference.at(x, y, b)) - mr;
                sff += ef * ef;
                srr += er * er;
                sfr += ef * er;
            }
            pf[size_t(y)] = sff;
            pr[size_t(y)] = srr;
            pfr[size_t(y)] = sfr;
        }
        double sff = 0, srr = 0, sfr = 0;
        for (int y = 0; y < h; ++y) { sff += pf[size_t(y)]; srr += pr[size_t(y)]; sfr += pfr[size_t(y)]; }
        acc += clamp_unit(sfr / (std::sqrt(sff) * std::sqrt(srr)));
    }
    return clamp_unit(acc / double(fused.bands));
}

QualityReport evaluate(const Raster& fused, const Raster& reference, const MetricParams& p) {
    QualityReport q;
    q.ergas = ergas(fused, reference, p);
    q.sam_deg = sam(fused, reference);
    q.rase = rase(fused, reference);
    q.uiqi = uiqi(fused, reference, p);
    q.ssim = ssim(fused, reference, p);
    q.psnr_db = psnr(fused, reference, p);
    q.cc = cc(fused, reference);
    return q;
}

std::string report_keyvalue(const QualityReport& q) {
    std::string s;
    s += "ergas=" + fmt_sig(q.ergas, 6) + "\n";
    s += "sam_deg=" + fmt_sig(q.sam_deg, 6) + "\n";
    s += "rase=" + fmt_sig(q.rase, 6) + "\n";
    s += "uiqi=" + fmt_sig(q.uiqi, 6) + "\n";
    s += "ssim=" + fmt_sig(q.ssim, 6) + "\n";
    s += "psnr_db=" + fmt_sig(q.psnr_db, 6) + "\n";
    s += "cc=" + fmt_sig(q.cc, 6) + "\n";
    return s;
}

std::string report_csv(const QualityReport& q) {
    std::string s = "ergas,sam_deg,rase,uiqi,ssim,psnr_db,cc\n";
    s += fmt_sig(q.ergas, 6) + "," + fmt_sig(q.sam_deg, 6) + "," + fmt_sig(q.rase, 6) + "," +
         fmt_sig(q.uiqi, 6) + "," + fmt_sig(q.ssim, 6) + "," + fmt_sig(q.psnr_db, 6) + "," +
         fmt_sig(q.cc, 6) + "\n";
    return s;
}

}  // namespace sarfuse
