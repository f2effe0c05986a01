#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <omp.h>

#include <cmath>
#include <random>

#include "sarfuse/metrics.hpp"
#include "sarfuse/reference.hpp"
#include "test_util.hpp"

using namespace sarfuse;
using testutil::random_raster;

namespace {

Raster constant_raster(int w, int h, int b, float v) {
    Raster r(w, h, b);
    std::fill(r.values.begin(), r.values.end(), v);
    return r;
}

// r = c + pattern, f = c - pattern: equal window means, exactly opposite
// deviations. The pattern sums to zero over every half of the image.
std::pair<Raster, Raster> mirrored_pair(int w, int h, float c, float delta) {
    Raster r(w, h, 1), f(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float p = (x % 2 == 0) ? delta : -delta;
            r.at(x, y, 0) = c + p;
            f.at(x, y, 0) = c - p;
        }
    return {std::move(f), std::move(r)};
}

}  // namespace

TEST_CASE("comparing an image against itself is exact") {
    std::mt19937 g{404};
    MetricParams p;
    for (int trial = 0; trial < 5; ++trial) {
        const Raster x = random_raster(16, 16, 3, g());
        const QualityReport q = evaluate(x, x, p);
        CHECK(std::fabs(q.ergas) <= 1e-9);
        CHECK(std::fabs(q.sam_deg) <= 1e-9);
        CHECK(std::fabs(q.rase) <= 1e-9);
        CHECK(std::fabs(q.uiqi - 1.0) <= 1e-9);
        CHECK(std::fabs(q.ssim - 1.0) <= 1e-9);
        CHECK(std::fabs(q.cc - 1.0) <= 1e-9);
        CHECK(q.psnr_db == p.psnr_cap);
    }
}

TEST_CASE("all seven metrics agree with the direct reference") {
    std::mt19937 g{500};
    MetricParams p;
    p.uiqi_window = 8;
    p.ssim_window = 11;
    for (int trial = 0; trial < 8; ++trial) {
        const Raster r = random_raster(16, 16, 3, g(), 0.0f, 1.0f);
        Raster f = r;
        for (auto& v : f.values) v += float(testutil::urand(g, -0.1, 0.1));
        CHECK(ergas(f, r, p) == doctest::Approx(ref::ergas(f, r, p)).epsilon(1e-6));
        CHECK(sam(f, r) == doctest::Approx(ref::sam(f, r)).epsilon(1e-6));
        CHECK(rase(f, r) == doctest::Approx(ref::rase(f, r)).epsilon(1e-6));
        CHECK(uiqi(f, r, p) == doctest::Approx(ref::uiqi(f, r, p)).epsilon(1e-6));
        CHECK(ssim(f, r, p) == doctest::Approx(ref::ssim(f, r, p)).epsilon(1e-6));
        CHECK(psnr(f, r, p) == doctest::Approx(ref::psnr(f, r, p)).epsilon(1e-6));
        CHECK(cc(f, r) == doctest::Approx(ref::cc(f, r)).epsilon(1e-6));
    }
}

TEST_CASE("ergas of a unit offset at mean ten is ten") {
    const Raster r = constant_raster(8, 8, 1, 10.0f);
    const Raster f = constant_raster(8, 8, 1, 11.0f);
    MetricParams p;
    p.ratio = 1.0;
    CHECK(std::fabs(ergas(f, r, p) - 10.0) <= 1e-9);
    p.ratio = 0.25;  // scales linearly with the resolution ratio
    CHECK(ergas(f, r, p) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("ergas skips zero-error bands even at zero mean") {
    Raster r(4, 4, 2), f(4, 4, 2);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            r.at(x, y, 0) = ((x + y) % 2 == 0) ? 1.0f : -1.0f;  // mean exactly 0
            f.at(x, y, 0) = r.at(x, y, 0);                      // rmse exactly 0
            r.at(x, y, 1) = 10.0f;
            f.at(x, y, 1) = 11.0f;
        }
    MetricParams p;
    CHECK(ergas(f, r, p) == doctest::Approx(100.0 * std::sqrt(0.01 / 2.0)).epsilon(1e-12));
}

TEST_CASE("rase of a unit offset at mean five is twenty") {
    const Raster r = constant_raster(4, 4, 1, 5.0f);
    const Raster f = constant_raster(4, 4, 1, 6.0f);
    CHECK(std::fabs(rase(f, r) - 20.0) <= 1e-9);
}

TEST_CASE("rase short-circuits identical rasters before dividing by the mean") {
    // zero-mean reference: the identity guard must fire before 100/mu
    Raster r(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) r.at(x, y, 0) = ((x + y) % 2 == 0) ? 2.0f : -2.0f;
    const Raster f = r;
    const double v = rase(f, r);
    CHECK(v == 0.0);
    CHECK(std::isfinite(v));
}

TEST_CASE("sam measures the spectral angle") {
    Raster r(2, 2, 2), f(2, 2, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            f.at(x, y, 0) = 1.0f;  // f = (1, 0)
            f.at(x, y, 1) = 0.0f;
            r.at(x, y, 0) = 0.0f;  // r = (0, 1)
            r.at(x, y, 1) = 1.0f;
        }
    CHECK(sam(f, r) == doctest::Approx(90.0).epsilon(1e-12));

    // scaling a pixel does not change its angle
    for (auto& v : f.values) v *= 7.5f;
    CHECK(sam(f, r) == doctest::Approx(90.0).epsilon(1e-12));
}

TEST_CASE("sam excludes zero-norm pixels") {
    Raster r(2, 1, 2), f(2, 1, 2);
    f.at(0, 0, 0) = 1.0f; f.at(0, 0, 1) = 1.0f;
    r.at(0, 0, 0) = 2.0f; r.at(0, 0, 1) = 2.0f;  // aligned, angle 0
    f.at(1, 0, 0) = 0.0f; f.at(1, 0, 1) = 0.0f;  // zero fused vector: skipped
    r.at(1, 0, 0) = 1.0f; r.at(1, 0, 1) = 3.0f;
    CHECK(sam(f, r) == 0.0);

    // and the mirror case, a zero reference vector
    std::swap(f.values, r.values);
    CHECK(sam(f, r) == 0.0);
}

TEST_CASE("psnr spot value and cap") {
    // integer-valued samples so that the +1 offset (and hence the MSE) is exact
    std::mt19937 g{88};
    Raster r(16, 16, 1);
    for (auto& v : r.values) v = float(g() % 200u);
    Raster f = r;
    for (auto& v : f.values) v += 1.0f;  // MSE exactly 1
    MetricParams p;
    p.dynamic_range = 255.0;
    CHECK(psnr(f, r, p) == doctest::Approx(48.1308).epsilon(1e-4));
    CHECK(psnr(f, r, p) == doctest::Approx(10.0 * std::log10(255.0 * 255.0)).epsilon(1e-12));

    CHECK(psnr(r, r, p) == p.psnr_cap);
    p.psnr_cap = 80.0;
    CHECK(psnr(r, r, p) == 80.0);

    // near-identical pairs cap too
    Raster tiny = r;
    tiny.values[0] += 1e-6f;
    p.psnr_cap = 20.0;
    CHECK(psnr(tiny, r, p) == 20.0);
}

TEST_CASE("uiqi reaches -1 on exactly anticorrelated windows") {
    auto [f, r] = mirrored_pair(8, 8, 2.0f, 0.25f);
    MetricParams p;
    p.uiqi_window = 8;  // a single window
    CHECK(uiqi(f, r, p) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("uiqi degenerate windows") {
    MetricParams p;
    p.uiqi_window = 8;
    // identical constants: denominator zero but windows identical
    const Raster a = constant_raster(8, 8, 1, 2.0f);
    CHECK(uiqi(a, a, p) == 1.0);
    // different constants: every window degenerate and different -> no signal
    const Raster b = constant_raster(8, 8, 1, 3.0f);
    CHECK(uiqi(a, b, p) == 0.0);
}

TEST_CASE("ssim constant-plane value") {
    MetricParams p;
    const Raster f = constant_raster(12, 12, 1, 2.0f);
    const Raster r = constant_raster(12, 12, 1, 3.0f);
    // derived range of a constant reference falls back to L=1
    const double c1 = 1e-4;
    CHECK(ssim(f, r, p) == doctest::Approx((12.0 + c1) / (13.0 + c1)).epsilon(1e-12));
    CHECK(ssim(r, r, p) == 1.0);
}

TEST_CASE("explicit dynamic range matches the derived one") {
    std::mt19937 g{77};
    const Raster r = random_raster(16, 16, 2, g(), 3.0f, 9.0f);
    Raster f = r;
    for (auto& v : f.values) v += float(testutil::urand(g, -0.2, 0.2));
    MetricParams automatic;
    float lo = r.values[0], hi = r.values[0];
    for (float v : r.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    MetricParams fixed;
    fixed.dynamic_range = double(hi) - double(lo);
    CHECK(ssim(f, r, automatic) == ssim(f, r, fixed));
    CHECK(psnr(f, r, automatic) == psnr(f, r, fixed));
}

TEST_CASE("cc handles anticorrelation and constant bands") {
    auto [f, r] = mirrored_pair(8, 8, 2.0f, 0.5f);
    CHECK(cc(f, r) == doctest::Approx(-1.0).epsilon(1e-12));

    // band 0 constant in both: contributes 0; band 1 identical: contributes 1
    Raster f2(8, 8, 2), r2(8, 8, 2);
    std::mt19937 g{91};
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            f2.at(x, y, 0) = 4.0f;
            r2.at(x, y, 0) = 4.0f;
            const float v = float(testutil::urand(g));
            f2.at(x, y, 1) = v;
            r2.at(x, y, 1) = v;
        }
    CHECK(cc(f2, r2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("shape and window validation") {
    const Raster a = constant_raster(8, 8, 1, 1.0f);
    const Raster b = constant_raster(8, 9, 1, 1.0f);
    MetricParams p;
    CHECK_THROWS_WITH_AS(evaluate(a, b, p), doctest::Contains("8x9x1"), ValidationError);

    const Raster c = constant_raster(6, 6, 1, 1.0f);
    p.uiqi_window = 7;  // larger than the image
    CHECK_THROWS_AS(uiqi(c, c, p), ValidationError);

    p = MetricParams{};
    p.ssim_window = 4;  // must be odd
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.ssim_window = 1;  // and at least 3
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = MetricParams{};
    p.uiqi_window = 1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = MetricParams{};
    p.ratio = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = MetricParams{};
    p.psnr_cap = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);

    Raster nan_raster = a;
    nan_raster.values[3] = std::nanf("");
    CHECK_THROWS_AS(evaluate(nan_raster, a, p), ValidationError);
}

TEST_CASE("evaluate mirrors the individual metrics") {
    std::mt19937 g{18};
    const Raster r = random_raster(16, 16, 2, g());
    Raster f = r;
    for (auto& v : f.values) v += float(testutil::urand(g, -0.05, 0.05));
    MetricParams p;
    const QualityReport q = evaluate(f, r, p);
    CHECK(q.ergas == ergas(f, r, p));
    CHECK(q.sam_deg == sam(f, r));
    CHECK(q.rase == rase(f, r));
    CHECK(q.uiqi == uiqi(f, r, p));
    CHECK(q.ssim == ssim(f, r, p));
    CHECK(q.psnr_db == psnr(f, r, p));
    CHECK(q.cc == cc(f, r));
}

TEST_CASE("report formats") {
    QualityReport q;
    q.ergas = 1.0 / 3.0;
    q.sam_deg = 2.5;
    q.rase = 0.0;
    q.uiqi = 1.0;
    q.ssim = 0.987654321;
    q.psnr_db = 48.13080361;
    q.cc = -1.0;
    CHECK(report_csv(q) ==
          "ergas,sam_deg,rase,uiqi,ssim,psnr_db,cc\n"
          "0.333333,2.5,0,1,0.987654,48.1308,-1\n");
    const std::string kv = report_keyvalue(q);
    CHECK(kv ==
          "ergas=0.333333\nsam_deg=2.5\nrase=0\nuiqi=1\nssim=0.987654\n"
          "psnr_db=48.1308\ncc=-1\n");
}

TEST_CASE("metrics are identical across thread counts") {
    std::mt19937 g{3030};
    const Raster r = random_raster(32, 24, 3, g());
    Raster f = r;
    for (auto& v : f.values) v += float(testutil::urand(g, -0.1, 0.1));
    MetricParams p;
    omp_set_num_threads(1);
    const QualityReport q1 = evaluate(f, r, p);
    omp_set_num_threads(3);
    const QualityReport q3 = evaluate(f, r, p);
    omp_set_num_threads(omp_get_num_procs());
    CHECK(q1.ergas == q3.ergas);
    CHECK(q1.sam_deg == q3.sam_deg);
    CHECK(q1.rase == q3.rase);
    CHECK(q1.uiqi == q3.uiqi);
    CHECK(q1.ssim == q3.ssim);
    CHECK(q1.psnr_db == q3.psnr_db);
    CHECK(q1.cc == q3.cc);
}
