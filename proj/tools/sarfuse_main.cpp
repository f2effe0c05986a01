#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sarfuse/pipeline.hpp"

namespace {

struct CommonOpts {
    std::vector<std::string> config_files;
    std::vector<std::string> sets;
    uint64_t seed = 0;
    bool seed_given = false;
};

void attach_common(CLI::App* sub, CommonOpts& c) {
    sub->add_option("--config", c.config_files, "key=value config file, applied in order")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", c.sets, "single key=value override, applied after --config");
    auto* seed = sub->add_option("--seed", c.seed, "override the run seed");
    seed->each([&c](const std::string&) { c.seed_given = true; });
}

sarfuse::PipelineConfig build_config(const CommonOpts& c) {
    sarfuse::PipelineConfig cfg;
    for (const auto& f : c.config_files) sarfuse::load_config_into(cfg, f);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw sarfuse::ValidationError("--set expects key=value, got '" + kv + "'");
        sarfuse::apply_config_entry(cfg, std::string(sarfuse::trim(kv.substr(0, eq))),
                                    std::string(sarfuse::trim(kv.substr(eq + 1))));
    }
    if (c.seed_given) cfg.seed = c.seed;
    cfg.validate();
    return cfg;
}

std::array<int, 3> parse_triplet(const std::string& s) {
    if (s.empty()) return {-1, -1, -1};  // derived from the raster
    const auto cells = sarfuse::split(s, ',');
    if (cells.size() != 3)
        throw sarfuse::ValidationError("--bands expects three comma-separated indices");
    return {int(sarfuse::parse_int(cells[0], "band index")),
            int(sarfuse::parse_int(cells[1], "band index")),
            int(sarfuse::parse_int(cells[2], "band index"))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic-diffusion SAR/optical fusion, quality metrics and patch-based "
                 "SVM classification"};
    app.set_version_flag("--version", "sarfuse 1.0.0");
    app.require_subcommand(1);
    CommonOpts common;
    int rc = 0;

    auto* fuse = app.add_subcommand("fuse", "fuse a SAR band into each optical band");
    std::string sar_path, opt_path, out_path;
    fuse->add_option("--sar", sar_path, "single-band SAR raster (.hdr/.raw)")->required();
    fuse->add_option("--opt", opt_path, "optical raster (.hdr/.raw)")->required();
    fuse->add_option("--out", out_path, "output raster stem or .hdr path")->required();
    attach_common(fuse, common);
    fuse->callback(
        [&] { rc = sarfuse::cli::cmd_fuse(sar_path, opt_path, out_path, build_config(common)); });

    auto* evaluate = app.add_subcommand("evaluate", "fusion quality metrics against a reference");
    std::string fused_path, reference_path, eval_out;
    evaluate->add_option("--fused", fused_path, "fused raster")->required();
    evaluate->add_option("--reference", reference_path, "reference raster")->required();
    evaluate->add_option("--out", eval_out, "also write the report as CSV");
    attach_common(evaluate, common);
    evaluate->callback([&] {
        rc = sarfuse::cli::cmd_evaluate(fused_path, reference_path, build_config(common),
                                        eval_out);
    });

    auto* classify = app.add_subcommand("classify", "train and apply the patch-based classifier");
    std::string cls_raster, labels_path, mode_str = "lbp-psvm", out_prefix, model_out;
    classify->add_option("--fused", cls_raster, "raster to classify")->required();
    classify->add_option("--labels", labels_path, "ground-reference labels (.hdr/.raw, u16)")
        ->required();
    classify->add_option("--mode", mode_str, "svm, psvm or lbp-psvm (default lbp-psvm)");
    classify->add_option("--out", out_prefix, "output prefix for _classified and _report.txt");
    classify->add_option("--model-out", model_out, "also save the trained model");
    attach_common(classify, common);
    classify->callback([&] {
        rc = sarfuse::cli::cmd_classify(cls_raster, labels_path, build_config(common),
                                        sarfuse::classifier_mode_from_string(mode_str),
                                        out_prefix, model_out);
    });

    auto* quicklook = app.add_subcommand("quicklook", "8-bit PPM preview of a raster");
    std::string ql_in, ql_out, ql_bands;
    quicklook->add_option("--in", ql_in, "input raster")->required();
    quicklook->add_option("--out", ql_out, "output .ppm path")->required();
    quicklook->add_option("--bands", ql_bands, "three band indices, e.g. 2,1,0");
    quicklook->callback(
        [&] { rc = sarfuse::cli::cmd_quicklook(ql_in, ql_out, parse_triplet(ql_bands)); });

    auto* pipeline = app.add_subcommand("pipeline", "fuse, evaluate and classify in one run");
    std::string pl_sar, pl_opt, pl_labels, pl_outdir;
    pipeline->add_option("--sar", pl_sar, "single-band SAR raster")->required();
    pipeline->add_option("--opt", pl_opt, "optical raster")->required();
    pipeline->add_option("--labels", pl_labels, "ground-reference labels; omit to skip classification");
    pipeline->add_option("--out", pl_outdir, "output directory")->required();
    attach_common(pipeline, common);
    pipeline->callback([&] {
        rc = sarfuse::cli::cmd_pipeline(pl_sar, pl_opt, pl_labels, pl_outdir,
                                        build_config(common));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const sarfuse::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
