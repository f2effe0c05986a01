#pragma once

#include <string>

#include "sarfuse/raster.hpp"

namespace sarfuse {

struct MetricParams {
    double ratio = 1.0;         // resolution ratio h/l
    int uiqi_window = 8;        // sliding window side for UIQI
    int ssim_window = 11;       // sliding window side for SSIM, odd
    double dynamic_range = 0.0; // L for SSIM/PSNR; 0 derives max-min of the reference
    double psnr_cap = 99.0;     // dB ceiling reported for a zero-MSE pair
    void validate() const;
};

/// The seven fusion indicators for one fused/reference pair.
struct QualityReport {
    double ergas = 0;
    double sam_deg = 0;
    double rase = 0;
    double uiqi = 0;
    double ssim = 0;
    double psnr_db = 0;
    double cc = 0;
};

double ergas(const Raster& fused, const Raster& reference, const MetricParams& p);
double sam(const Raster& fused, const Raster& reference);
double rase(const Raster& fused, const Raster& reference);
double uiqi(const Raster& fused, const Raster& reference, const MetricParams& p);
double ssim(const Raster& fused, const Raster& reference, const MetricParams& p);
double psnr(const Raster& fused, const Raster& reference, const MetricParams& p);
double cc(const Raster& fused, const Raster& reference);

QualityReport evaluate(const Raster& fused, const Raster& reference, const MetricParams& p);

/// key=value lines, 6 significant digits.
std::string report_keyvalue(const QualityReport& q);
/// Header line `ergas,sam_deg,rase,uiqi,ssim,psnr_db,cc` plus one row, 6 significant digits.
std::string report_csv(const QualityReport& q);

}  // namespace sarfuse
