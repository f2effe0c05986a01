#include "sarfuse/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "raster I/O assumes a little-endian host");

namespace sarfuse {

std::string stem_of(const std::string& path) {
    std::filesystem::path p(path);
    if (p.extension() == ".hdr" || p.extension() == ".raw") p.replace_extension();
    return p.string();
}

namespace {

namespace fs = std::filesystem;

struct Header {
    int width = 0, height = 0, bands = 0;
    std::string dtype, interleave, byteorder;
    std::vector<std::string> band_names;
};

Header read_header(const std::string& hdr_path) {
    std::ifstream in(hdr_path);
    if (!in) throw IoError("cannot open header " + hdr_path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw IoError(hdr_path + ": malformed header line '" + std::string(t) + "'");
        std::string key(trim(t.substr(0, eq)));
        std::string val(trim(t.substr(eq + 1)));
        if (!kv.emplace(key, val).second)
            throw IoError(hdr_path + ": duplicate header key '" + key + "'");
    }
    const std::set<std::string> expected = {"width", "height", "bands",     "dtype",
                                            "interleave", "byteorder", "bandnames"};
    for (const auto& k : expected)
        if (!kv.count(k)) throw IoError(hdr_path + ": missing header key '" + k + "'");
    for (const auto& [k, v] : kv)
        if (!expected.count(k)) throw IoError(hdr_path + ": unknown header key '" + k + "'");

    Header h;
    h.width = int(parse_int(kv["width"], "width"));
    h.height = int(parse_int(kv["height"], "height"));
    h.bands = int(parse_int(kv["bands"], "bands"));
    if (h.width <= 0 || h.height <= 0 || h.bands <= 0)
        throw IoError(hdr_path + ": non-positive dimensions");
    h.dtype = kv["dtype"];
    if (h.dtype != "f32" && h.dtype != "u16")
        throw IoError(hdr_path + ": dtype must be f32 or u16, got '" + h.dtype + "'");
    h.interleave = kv["interleave"];
    if (h.interleave != "bsq") throw IoError(hdr_path + ": interleave must be bsq");
    h.byteorder = kv["byteorder"];
    if (h.byteorder != "lsb") throw IoError(hdr_path + ": byteorder must be lsb");
    h.band_names = split(kv["bandnames"], ',');
    if (h.band_names.size() != size_t(h.bands))
        throw IoError(hdr_path + ": bandnames lists " + std::to_string(h.band_names.size()) +
                      " names for " + std::to_string(h.bands) + " bands");
    return h;
}

std::vector<char> read_payload(const std::string& raw_path, size_t expected_bytes) {
    std::ifstream in(raw_path, std::ios::binary);
    if (!in) throw IoError("cannot open payload " + raw_path);
    in.seekg(0, std::ios::end);
    size_t actual = size_t(in.tellg());
    if (actual != expected_bytes)
        throw IoError(raw_path + ": payload size mismatch, expected " +
                      std::to_string(expected_bytes) + " bytes, got " + std::to_string(actual));
    in.seekg(0);
    std::vector<char> buf(actual);
    in.read(buf.data(), std::streamsize(actual));
    if (!in) throw IoError("short read on " + raw_path);
    return buf;
}

void write_header(const std::string& hdr_path, int w, int h, int b, const std::string& dtype,
                  const std::vector<std::string>& names) {
    std::ostringstream os;
    os << "width=" << w << "\n";
    os << "height=" << h << "\n";
    os << "bands=" << b << "\n";
    os << "dtype=" << dtype << "\n";
    os << "interleave=bsq\n";
    os << "byteorder=lsb\n";
    os << "bandnames=";
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i].find(',') != std::string::npos)
            throw ValidationError("band name '" + names[i] + "' contains a comma");
        os << (i ? "," : "") << names[i];
    }
    os << "\n";
    std::ofstream out(hdr_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write header " + hdr_path);
    out << os.str();
    if (!out) throw IoError("write failed on " + hdr_path);
}

void write_payload(const std::string& raw_path, const void* data, size_t bytes) {
    std::ofstream out(raw_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write payload " + raw_path);
    out.write(static_cast<const char*>(data), std::streamsize(bytes));
    if (!out) throw IoError("write failed on " + raw_path);
}

}  // namespace

Raster::Raster(int w, int h, int b) : width(w), height(h), bands(b) {
    if (w <= 0 || h <= 0 || b <= 0) throw ValidationError("raster dimensions must be positive");
    band_names.reserve(b);
    for (int i = 0; i < b; ++i) band_names.push_back("b" + std::to_string(i + 1));
    values.assign(size(), 0.0f);
}

void Raster::validate() const {
    if (width <= 0 || height <= 0 || bands <= 0)
        throw ValidationError("raster dimensions must be positive");
    if (values.size() != size())
        throw ValidationError("raster holds " + std::to_string(values.size()) + " values, expected " +
                              std::to_string(size()));
    if (band_names.size() != size_t(bands))
        throw ValidationError("raster has " + std::to_string(band_names.size()) + " band names for " +
                              std::to_string(bands) + " bands");
    for (size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i])) {
            size_t b = i / plane(), rem = i % plane();
            throw ValidationError("non-finite value at index " + std::to_string(i) + " (band " +
                                  std::to_string(b) + ", row " + std::to_string(rem / width) +
                                  ", col " + std::to_string(rem % width) + ")");
        }
}

std::vector<uint16_t> LabelMap::class_ids() const {
    std::set<uint16_t> s(labels.begin(), labels.end());
    s.erase(0);
    return {s.begin(), s.end()};
}

void LabelMap::validate() const {
    if (width <= 0 || height <= 0) throw ValidationError("label map dimensions must be positive");
    if (labels.size() != size_t(width) * height)
        throw ValidationError("label map holds " + std::to_string(labels.size()) +
                              " labels, expected " + std::to_string(size_t(width) * height));
}

Raster load_raster(const std::string& path) {
    const std::string stem = stem_of(path);
    Header h = read_header(stem + ".hdr");
    if (h.dtype != "f32")
        throw IoError(stem + ".hdr: dtype mismatch, expected f32, got " + h.dtype);
    Raster r;
    r.width = h.width;
    r.height = h.height;
    r.bands = h.bands;
    r.band_names = h.band_names;
    auto buf = read_payload(stem + ".raw", r.size() * 4);
    r.values.resize(r.size());
    std::memcpy(r.values.data(), buf.data(), buf.size());
    r.validate();  // rejects non-finite payload values with their position
    return r;
}

void save_raster(const Raster& r, const std::string& path) {
    r.validate();
    const std::string stem = stem_of(path);
    write_header(stem + ".hdr", r.width, r.height, r.bands, "f32", r.band_names);
    write_payload(stem + ".raw", r.values.data(), r.values.size() * 4);
}

LabelMap load_labels(const std::string& path) {
    const std::string stem = stem_of(path);
    Header h = read_header(stem + ".hdr");
    if (h.bands != 1)
        throw IoError(stem + ".hdr: label maps are single-band, got " + std::to_string(h.bands));
    if (h.dtype != "u16")
        throw IoError(stem + ".hdr: dtype mismatch, expected u16, got " + h.dtype);
    LabelMap m;
    m.width = h.width;
    m.height = h.height;
    auto buf = read_payload(stem + ".raw", size_t(h.width) * h.height * 2);
    m.labels.resize(size_t(h.width) * h.height);
    std::memcpy(m.labels.data(), buf.data(), buf.size());
    return m;
}

void save_labels(const LabelMap& m, const std::string& path) {
    m.validate();
    const std::string stem = stem_of(path);
    write_header(stem + ".hdr", m.width, m.height, 1, "u16", {"labels"});
    write_payload(stem + ".raw", m.labels.data(), m.labels.size() * 2);
}

double percentile(std::span<const float> data, double q) {
    if (data.empty()) throw ValidationError("percentile of an empty range");
    std::vector<float> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    double pos = q / 100.0 * double(sorted.size() - 1);
    size_t lo = size_t(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - double(lo);
    return double(sorted[lo]) * (1.0 - frac) + double(sorted[lo + 1]) * frac;
}

void export_quicklook(const Raster& r, std::array<int, 3> band_triplet, const std::string& path) {
    r.validate();
    for (int b : band_triplet)
        if (b < 0 || b >= r.bands)
            throw ValidationError("quicklook band index " + std::to_string(b) + " out of range [0," +
                                  std::to_string(r.bands - 1) + "]");

    const size_t n = r.plane();
    std::vector<unsigned char> rgb(n * 3, 0);
    for (int c = 0; c < 3; ++c) {
        auto band = r.band(band_triplet[c]);
        double lo = percentile(band, 2.0), hi = percentile(band, 98.0);
        if (hi > lo) {
            double scale = 255.0 / (hi - lo);
#pragma omp parallel for schedule(static)
            for (long i = 0; i < long(n); ++i) {
                double v = (double(band[size_t(i)]) - lo) * scale;
                rgb[size_t(i) * 3 + c] = (unsigned char)std::clamp(std::llround(v), 0ll, 255ll);
            }
        }
        // constant band: leave the channel at 0
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write quicklook " + path);
    out << "P6\n" << r.width << " " << r.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), std::streamsize(rgb.size()));
    if (!out) throw IoError("write failed on " + path);
}

}  // namespace sarfuse
