#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sarfuse/common.hpp"

namespace sarfuse {

/// Band-sequential float image. Values are stored band by band, row-major
/// within a band: values[b*width*height + y*width + x].
struct Raster {
    int width = 0;
    int height = 0;
    int bands = 0;
    std::vector<std::string> band_names;  // one entry per band
    std::vector<float> values;

    Raster() = default;
    Raster(int w, int h, int b);

    size_t plane() const { return size_t(width) * size_t(height); }
    size_t size() const { return plane() * size_t(bands); }

    float& at(int x, int y, int b) { return values[size_t(b) * plane() + size_t(y) * width + x]; }
    float at(int x, int y, int b) const { return values[size_t(b) * plane() + size_t(y) * width + x]; }

    std::span<float> band(int b) { return {values.data() + size_t(b) * plane(), plane()}; }
    std::span<const float> band(int b) const { return {values.data() + size_t(b) * plane(), plane()}; }

    /// Throws ValidationError if any type invariant is broken
    /// (size mismatch, non-finite value, band name count).
    void validate() const;
};

/// Ground-reference layer. Label 0 means "unlabeled".
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<uint16_t> labels;

    LabelMap() = default;
    LabelMap(int w, int h) : width(w), height(h), labels(size_t(w) * h, 0) {}

    uint16_t& at(int x, int y) { return labels[size_t(y) * width + x]; }
    uint16_t at(int x, int y) const { return labels[size_t(y) * width + x]; }

    /// Distinct non-zero labels, ascending.
    std::vector<uint16_t> class_ids() const;

    void validate() const;
};

// Container I/O. `path` may name the header (<stem>.hdr), the payload
// (<stem>.raw) or the bare stem; the two sidecar files are derived from it.

// strips a trailing .hdr/.raw, leaving the sidecar stem
std::string stem_of(const std::string& path);

Raster load_raster(const std::string& path);
void save_raster(const Raster& r, const std::string& path);

LabelMap load_labels(const std::string& path);
void save_labels(const LabelMap& m, const std::string& path);

/// Writes a binary PPM (P6) of three bands, each stretched linearly between
/// its 2nd and 98th percentile. A constant band maps to 0.
void export_quicklook(const Raster& r, std::array<int, 3> band_triplet, const std::string& path);

/// Linear-interpolation percentile of a band (q in [0,100]).
double percentile(std::span<const float> data, double q);

}  // namespace sarfuse
