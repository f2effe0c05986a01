#include "sarfuse/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "sarfuse/fusion.hpp"
#include "sarfuse/metrics.hpp"

namespace sarfuse {

std::string to_string(ClassifierMode m) {
    switch (m) {
        case ClassifierMode::svm: return "svm";
        case ClassifierMode::psvm: return "psvm";
        case ClassifierMode::lbp_psvm: return "lbp-psvm";
    }
    throw ValidationError("bad classifier mode");
}

ClassifierMode classifier_mode_from_string(const std::string& s) {
    if (s == "svm") return ClassifierMode::svm;
    if (s == "psvm") return ClassifierMode::psvm;
    if (s == "lbp-psvm") return ClassifierMode::lbp_psvm;
    throw ValidationError("unknown classifier mode '" + s + "' (expected svm, psvm or lbp-psvm)");
}

ClassificationResult run_classification(const Raster& fused, const LabelMap& gt,
                                        const PipelineConfig& cfg, ClassifierMode mode) {
    cfg.validate();
    fused.validate();
    gt.validate();
    if (fused.width != gt.width || fused.height != gt.height)
        throw ValidationError("raster is " + std::to_string(fused.width) + "x" +
                              std::to_string(fused.height) + " but labels are " +
                              std::to_string(gt.width) + "x" + std::to_string(gt.height));

    PatchParams pp;
    pp.patch_side = mode == ClassifierMode::svm ? 1 : cfg.patch_side;
    pp.include_lbp = mode == ClassifierMode::lbp_psvm;

    const Raster stack = build_feature_stack(fused, cfg.lbp, pp.include_lbp);
    const Dataset data = extract_patches(stack, gt, pp);
    if (data.size() == 0)
        throw ValidationError("no labeled pixel has a full " + std::to_string(pp.patch_side) +
                              "x" + std::to_string(pp.patch_side) + " patch");
    auto [train, test] = split_dataset(data, cfg.train_fraction, cfg.seed);

    SvmParams sp = cfg.svm;
    if (sp.gamma == 0.0) sp.gamma = 1.0 / double(data.feature_len);

    ClassificationResult res;
    if (cfg.grid.enabled) {
        const GridSearchResult gs =
            grid_search(train, cfg.grid.c_grid, cfg.grid.gamma_grid, cfg.grid.folds, cfg.seed);
        sp.C = gs.C;
        sp.gamma = gs.gamma;
        res.cv_accuracy = gs.cv_accuracy;
    }
    res.svm_c = sp.C;
    res.svm_gamma = sp.gamma;
    res.train_samples = train.size();
    res.test_samples = test.size();

    res.model = train_multiclass(train, sp);
    res.classes = res.model.classes;

    std::vector<uint16_t> predicted(test.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < long(test.size()); ++i)
        predicted[size_t(i)] = predict(res.model, test.vectors[size_t(i)]);
    res.overall_accuracy = overall_accuracy(predicted, test.labels);
    res.confusion = confusion_matrix(predicted, test.labels, res.classes);

    // classified map over every usable labeled pixel, train and test alike
    const auto centers = patch_centers(gt, pp);
    res.classified = LabelMap(gt.width, gt.height);
    std::vector<uint16_t> all(centers.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < long(centers.size()); ++i)
        all[size_t(i)] = predict(res.model, data.vectors[size_t(i)]);
    for (size_t i = 0; i < centers.size(); ++i)
        res.classified.at(centers[i].first, centers[i].second) = all[i];
    return res;
}

std::string classification_report(const ClassificationResult& r, ClassifierMode mode) {
    std::string s;
    s += "mode=" + to_string(mode) + "\n";
    s += "overall_accuracy=" + fmt_sig(r.overall_accuracy, 6) + "\n";
    s += "svm_c=" + fmt_sig(r.svm_c, 6) + "\n";
    s += "svm_gamma=" + fmt_sig(r.svm_gamma, 6) + "\n";
    if (r.cv_accuracy >= 0.0) s += "cv_accuracy=" + fmt_sig(r.cv_accuracy, 6) + "\n";
    s += "train_samples=" + std::to_string(r.train_samples) + "\n";
    s += "test_samples=" + std::to_string(r.test_samples) + "\n";
    std::string cls;
    for (size_t i = 0; i < r.classes.size(); ++i) {
        if (i) cls += ',';
        cls += std::to_string(r.classes[i]);
    }
    s += "classes=" + cls + "\n";
    for (size_t i = 0; i < r.confusion.size(); ++i) {
        s += "confusion_" + std::to_string(r.classes[i]) + "=";
        for (size_t j = 0; j < r.confusion[i].size(); ++j) {
            if (j) s += ',';
            s += std::to_string(r.confusion[i][j]);
        }
        s += "\n";
    }
    return s;
}

namespace cli {

namespace {

template <class Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::array<int, 3> default_triplet(const Raster& r) {
    return {0, std::min(1, r.bands - 1), std::min(2, r.bands - 1)};
}

}  // namespace

int cmd_fuse(const std::string& sar_path, const std::string& opt_path,
             const std::string& out_path, const PipelineConfig& cfg) {
    return guarded([&] {
        cfg.validate();
        const Raster sar = load_raster(sar_path);
        const Raster opt = load_raster(opt_path);
        FusionParams fp;
        fp.diffusion = cfg.diffusion;
        fp.base_weight_sar = cfg.base_weight_sar;
        const Raster fused = fuse_bandwise(sar, opt, fp);
        save_raster(fused, out_path);
        std::cout << "fused " << fused.width << "x" << fused.height << "x" << fused.bands
                  << " -> " << out_path << "\n";
    });
}

int cmd_evaluate(const std::string& fused_path, const std::string& reference_path,
                 const PipelineConfig& cfg, const std::string& out_path) {
    return guarded([&] {
        cfg.validate();
        const Raster fused = load_raster(fused_path);
        const Raster reference = load_raster(reference_path);
        const QualityReport q = evaluate(fused, reference, cfg.metrics);
        std::cout << report_keyvalue(q);
        if (!out_path.empty()) write_text(out_path, report_csv(q));
    });
}

int cmd_classify(const std::string& fused_path, const std::string& labels_path,
                 const PipelineConfig& cfg, ClassifierMode mode,
                 const std::string& out_prefix, const std::string& model_out) {
    return guarded([&] {
        const Raster fused = load_raster(fused_path);
        const LabelMap gt = load_labels(labels_path);
        const ClassificationResult r = run_classification(fused, gt, cfg, mode);
        std::cout << classification_report(r, mode);
        if (!out_prefix.empty()) {
            save_labels(r.classified, out_prefix + "_classified");
            write_text(out_prefix + "_report.txt", classification_report(r, mode));
        }
        if (!model_out.empty()) save_model(r.model, model_out);
    });
}

int cmd_quicklook(const std::string& raster_path, const std::string& out_path,
                  const std::array<int, 3>& band_triplet) {
    return guarded([&] {
        const Raster r = load_raster(raster_path);
        const auto t = band_triplet[0] < 0 ? default_triplet(r) : band_triplet;
        export_quicklook(r, t, out_path);
        std::cout << "quicklook " << r.width << "x" << r.height << " -> " << out_path << "\n";
    });
}

int cmd_pipeline(const std::string& sar_path, const std::string& opt_path,
                 const std::string& labels_path, const std::string& outdir,
                 const PipelineConfig& cfg) {
    return guarded([&] {
        cfg.validate();
        std::filesystem::create_directories(outdir);
        const auto at = [&](const std::string& name) { return outdir + "/" + name; };

        const Raster sar = load_raster(sar_path);
        const Raster opt = load_raster(opt_path);
        FusionParams fp;
        fp.diffusion = cfg.diffusion;
        fp.base_weight_sar = cfg.base_weight_sar;
        const Raster fused = fuse_bandwise(sar, opt, fp);
        save_raster(fused, at("fused"));
        export_quicklook(fused, default_triplet(fused), at("fused_quicklook.ppm"));
        std::cout << "fuse: " << fused.width << "x" << fused.height << "x" << fused.bands
                  << "\n";

        const QualityReport q = evaluate(fused, opt, cfg.metrics);
        write_text(at("quality.csv"), report_csv(q));
        std::cout << report_keyvalue(q);

        std::string summary = "mode,overall_accuracy,svm_c,svm_gamma,cv_accuracy,train_samples,"
                              "test_samples\n";
        bool classified = false;
        if (!labels_path.empty() &&
            std::filesystem::exists(stem_of(labels_path) + ".hdr")) {
            const LabelMap gt = load_labels(labels_path);
            for (ClassifierMode mode :
                 {ClassifierMode::svm, ClassifierMode::psvm, ClassifierMode::lbp_psvm}) {
                const ClassificationResult r = run_classification(fused, gt, cfg, mode);
                const std::string name = to_string(mode);
                write_text(at(name + "_report.txt"), classification_report(r, mode));
                save_labels(r.classified, at(name + "_classified"));
                summary += name + "," + fmt_sig(r.overall_accuracy, 6) + "," +
                           fmt_sig(r.svm_c, 6) + "," + fmt_sig(r.svm_gamma, 6) + "," +
                           (r.cv_accuracy >= 0.0 ? fmt_sig(r.cv_accuracy, 6) : "-") + "," +
                           std::to_string(r.train_samples) + "," +
                           std::to_string(r.test_samples) + "\n";
                std::cout << "classify[" << name << "]: oa=" << fmt_sig(r.overall_accuracy, 6)
                          << "\n";
                classified = true;
            }
        } else {
            std::cerr << "warning: labels not found, skipping classification\n";
        }
        if (classified) write_text(at("summary.csv"), summary);

        std::string manifest = "sarfuse pipeline v1\n";
        manifest += "sar=" + sar_path + "\n";
        manifest += "opt=" + opt_path + "\n";
        manifest += "labels=" + (classified ? labels_path : std::string("-")) + "\n";
        manifest += config_to_text(cfg);
        write_text(at("manifest.txt"), manifest);
    });
}

}  // namespace cli
}  // namespace sarfuse
