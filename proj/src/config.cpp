#include "sarfuse/config.hpp"

#include <fstream>

namespace sarfuse {

namespace {

std::string variant_name(ConductanceVariant v) {
    return v == ConductanceVariant::exponential ? "exponential" : "rational";
}

ConductanceVariant variant_from(const std::string& s) {
    if (s == "exponential") return ConductanceVariant::exponential;
    if (s == "rational") return ConductanceVariant::rational;
    throw ValidationError("unknown conductance variant '" + s +
                          "' (expected exponential or rational)");
}

std::string neighborhood_name(Neighborhood n) {
    return n == Neighborhood::four_2d ? "four_2d" : "six_3d";
}

Neighborhood neighborhood_from(const std::string& s) {
    if (s == "four_2d") return Neighborhood::four_2d;
    if (s == "six_3d") return Neighborhood::six_3d;
    throw ValidationError("unknown neighborhood '" + s + "' (expected four_2d or six_3d)");
}

bool bool_from(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ValidationError("cannot parse boolean from '" + s + "'");
}

std::vector<double> grid_from(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& cell : split(s, ','))
        out.push_back(parse_double(cell, what));
    if (out.empty()) throw ValidationError(what + " must not be empty");
    return out;
}

std::string grid_text(const std::vector<double>& g) {
    std::string s;
    for (size_t i = 0; i < g.size(); ++i) {
        if (i) s += ',';
        s += fmt_double(g[i]);
    }
    return s;
}

}  // namespace

void GridSpec::validate() const {
    if (c_grid.empty() || gamma_grid.empty())
        throw ValidationError("grid search needs non-empty C and gamma grids");
    for (double c : c_grid)
        if (!(c > 0.0)) throw ValidationError("grid C values must be positive");
    for (double g : gamma_grid)
        if (!(g > 0.0)) throw ValidationError("grid gamma values must be positive");
    if (folds < 2) throw ValidationError("grid.folds must be at least 2");
}

void PipelineConfig::validate() const {
    diffusion.validate();
    if (!(base_weight_sar >= 0.0 && base_weight_sar <= 1.0))
        throw ValidationError("fusion.base_weight_sar must lie in [0,1]");
    metrics.validate();
    lbp.validate();
    if (patch_side < 1 || patch_side % 2 == 0)
        throw ValidationError("patch.side must be odd and positive");
    // svm.gamma == 0 means "derive 1/feature_len when training starts"
    if (!(svm.C > 0.0)) throw ValidationError("svm.c must be positive");
    if (svm.gamma < 0.0) throw ValidationError("svm.gamma must be non-negative");
    if (!(svm.tol > 0.0)) throw ValidationError("svm.tol must be positive");
    if (svm.max_passes < 1) throw ValidationError("svm.max_passes must be at least 1");
    grid.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("split.train_fraction must lie in (0,1)");
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "diffusion.iterations") cfg.diffusion.iterations = int(parse_int(value, key));
    else if (key == "diffusion.lambda") cfg.diffusion.lambda = parse_double(value, key);
    else if (key == "diffusion.kappa") cfg.diffusion.kappa = parse_double(value, key);
    else if (key == "diffusion.variant") cfg.diffusion.variant = variant_from(value);
    else if (key == "diffusion.neighborhood") cfg.diffusion.neighborhood = neighborhood_from(value);
    else if (key == "fusion.base_weight_sar") cfg.base_weight_sar = parse_double(value, key);
    else if (key == "metrics.ratio") cfg.metrics.ratio = parse_double(value, key);
    else if (key == "metrics.uiqi_window") cfg.metrics.uiqi_window = int(parse_int(value, key));
    else if (key == "metrics.ssim_window") cfg.metrics.ssim_window = int(parse_int(value, key));
    else if (key == "metrics.dynamic_range") cfg.metrics.dynamic_range = parse_double(value, key);
    else if (key == "metrics.psnr_cap") cfg.metrics.psnr_cap = parse_double(value, key);
    else if (key == "lbp.samples") cfg.lbp.samples = int(parse_int(value, key));
    else if (key == "lbp.radius") cfg.lbp.radius = int(parse_int(value, key));
    else if (key == "patch.side") cfg.patch_side = int(parse_int(value, key));
    else if (key == "svm.c") cfg.svm.C = parse_double(value, key);
    else if (key == "svm.gamma") cfg.svm.gamma = parse_double(value, key);
    else if (key == "svm.tol") cfg.svm.tol = parse_double(value, key);
    else if (key == "svm.max_passes") cfg.svm.max_passes = int(parse_int(value, key));
    else if (key == "grid.enabled") cfg.grid.enabled = bool_from(value);
    else if (key == "grid.c_grid") cfg.grid.c_grid = grid_from(value, key);
    else if (key == "grid.gamma_grid") cfg.grid.gamma_grid = grid_from(value, key);
    else if (key == "grid.folds") cfg.grid.folds = int(parse_int(value, key));
    else if (key == "split.train_fraction") cfg.train_fraction = parse_double(value, key);
    else if (key == "seed") cfg.seed = uint64_t(parse_int(value, key));
    else throw ValidationError("unknown config key '" + key + "'");
}

void load_config_into(PipelineConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + std::string(t) + "'");
        const std::string key(trim(t.substr(0, eq)));
        const std::string value(trim(t.substr(eq + 1)));
        try {
            apply_config_entry(cfg, key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

PipelineConfig load_config(const std::string& path) {
    PipelineConfig cfg;
    load_config_into(cfg, path);
    return cfg;
}

std::string config_to_text(const PipelineConfig& cfg) {
    std::string s;
    s += "diffusion.iterations=" + std::to_string(cfg.diffusion.iterations) + "\n";
    s += "diffusion.lambda=" + fmt_double(cfg.diffusion.lambda) + "\n";
    s += "diffusion.kappa=" + fmt_double(cfg.diffusion.kappa) + "\n";
    s += "diffusion.variant=" + variant_name(cfg.diffusion.variant) + "\n";
    s += "diffusion.neighborhood=" + neighborhood_name(cfg.diffusion.neighborhood) + "\n";
    s += "fusion.base_weight_sar=" + fmt_double(cfg.base_weight_sar) + "\n";
    s += "metrics.ratio=" + fmt_double(cfg.metrics.ratio) + "\n";
    s += "metrics.uiqi_window=" + std::to_string(cfg.metrics.uiqi_window) + "\n";
    s += "metrics.ssim_window=" + std::to_string(cfg.metrics.ssim_window) + "\n";
    s += "metrics.dynamic_range=" + fmt_double(cfg.metrics.dynamic_range) + "\n";
    s += "metrics.psnr_cap=" + fmt_double(cfg.metrics.psnr_cap) + "\n";
    s += "lbp.samples=" + std::to_string(cfg.lbp.samples) + "\n";
    s += "lbp.radius=" + std::to_string(cfg.lbp.radius) + "\n";
    s += "patch.side=" + std::to_string(cfg.patch_side) + "\n";
    s += "svm.c=" + fmt_double(cfg.svm.C) + "\n";
    s += "svm.gamma=" + fmt_double(cfg.svm.gamma) + "\n";
    s += "svm.tol=" + fmt_double(cfg.svm.tol) + "\n";
    s += "svm.max_passes=" + std::to_string(cfg.svm.max_passes) + "\n";
    s += "grid.enabled=" + std::string(cfg.grid.enabled ? "true" : "false") + "\n";
    s += "grid.c_grid=" + grid_text(cfg.grid.c_grid) + "\n";
    s += "grid.gamma_grid=" + grid_text(cfg.grid.gamma_grid) + "\n";
    s += "grid.folds=" + std::to_string(cfg.grid.folds) + "\n";
    s += "split.train_fraction=" + fmt_double(cfg.train_fraction) + "\n";
    s += "seed=" + std::to_string(cfg.seed) + "\n";
    return s;
}

}  // namespace sarfuse
