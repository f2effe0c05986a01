#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sarfuse/config.hpp"
#include "sarfuse/fusion.hpp"
#include "sarfuse/pipeline.hpp"
#include "sarfuse/raster.hpp"
#include "scene.hpp"
#include "test_util.hpp"

using namespace sarfuse;
namespace fs = std::filesystem;

namespace {

// keeps command prints out of the test log
class CaptureStdout {
  public:
    CaptureStdout() : old_(std::cout.rdbuf(buf_.rdbuf())) {}
    ~CaptureStdout() { std::cout.rdbuf(old_); }
    std::string text() const { return buf_.str(); }

  private:
    std::ostringstream buf_;
    std::streambuf* old_;
};

PipelineConfig fast_config() {
    PipelineConfig cfg;
    cfg.diffusion.iterations = 3;
    cfg.svm.gamma = 0.0;  // derive 1/feature_len
    cfg.metrics.uiqi_window = 8;
    cfg.metrics.ssim_window = 7;
    return cfg;
}

}  // namespace

TEST_CASE("config text round trips through the parser") {
    testutil::TempDir dir;
    PipelineConfig cfg;
    cfg.diffusion.kappa = 2.5;
    cfg.diffusion.variant = ConductanceVariant::rational;
    cfg.diffusion.neighborhood = Neighborhood::four_2d;
    cfg.grid.enabled = true;
    cfg.grid.c_grid = {0.5, 5.0};
    cfg.svm.gamma = 0.125;
    cfg.seed = 99;
    const std::string text = config_to_text(cfg);

    const std::string path = dir.path() + "/cfg.conf";
    { std::ofstream(path) << text; }
    const PipelineConfig back = load_config(path);
    CHECK(config_to_text(back) == text);
}

TEST_CASE("config files accept comments and report line numbers") {
    testutil::TempDir dir;
    const std::string path = dir.path() + "/a.conf";
    {
        std::ofstream out(path);
        out << "# comment only\n";
        out << "diffusion.kappa = 7.5   # trailing comment\n";
        out << "\n";
        out << "svm.c=2\n";
    }
    const PipelineConfig cfg = load_config(path);
    CHECK(cfg.diffusion.kappa == 7.5);
    CHECK(cfg.svm.C == 2.0);

    {
        std::ofstream out(path);
        out << "svm.c=1\n\nnot a pair\n";
    }
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains(":3:"), ValidationError);

    {
        std::ofstream out(path);
        out << "svm.sea=1\n";
    }
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("unknown config key"),
                         ValidationError);
    CHECK_THROWS_AS(load_config(dir.path() + "/none.conf"), IoError);
}

TEST_CASE("apply_config_entry covers every exposed key") {
    PipelineConfig cfg;
    apply_config_entry(cfg, "diffusion.iterations", "4");
    apply_config_entry(cfg, "diffusion.lambda", "0.1");
    apply_config_entry(cfg, "diffusion.variant", "rational");
    apply_config_entry(cfg, "diffusion.neighborhood", "four_2d");
    apply_config_entry(cfg, "fusion.base_weight_sar", "0.25");
    apply_config_entry(cfg, "metrics.psnr_cap", "60");
    apply_config_entry(cfg, "lbp.samples", "12");
    apply_config_entry(cfg, "patch.side", "5");
    apply_config_entry(cfg, "svm.max_passes", "50");
    apply_config_entry(cfg, "grid.enabled", "true");
    apply_config_entry(cfg, "grid.gamma_grid", "0.25,2.5");
    apply_config_entry(cfg, "split.train_fraction", "0.8");
    apply_config_entry(cfg, "seed", "7");
    CHECK(cfg.diffusion.iterations == 4);
    CHECK(cfg.diffusion.variant == ConductanceVariant::rational);
    CHECK(cfg.base_weight_sar == 0.25);
    CHECK(cfg.lbp.samples == 12);
    CHECK(cfg.patch_side == 5);
    CHECK(cfg.grid.enabled);
    CHECK(cfg.grid.gamma_grid == std::vector<double>{0.25, 2.5});
    CHECK(cfg.train_fraction == 0.8);
    CHECK(cfg.seed == 7);
    CHECK_NOTHROW(cfg.validate());

    CHECK_THROWS_AS(apply_config_entry(cfg, "nope", "1"), ValidationError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "diffusion.kappa", "abc"), ValidationError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "grid.enabled", "maybe"), ValidationError);
}

TEST_CASE("config validation flags out-of-range values") {
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.svm.gamma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = PipelineConfig{};
    cfg.patch_side = 4;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = PipelineConfig{};
    cfg.train_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = PipelineConfig{};
    cfg.grid.folds = 1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("classifier mode names") {
    CHECK(to_string(ClassifierMode::svm) == "svm");
    CHECK(to_string(ClassifierMode::psvm) == "psvm");
    CHECK(to_string(ClassifierMode::lbp_psvm) == "lbp-psvm");
    CHECK(classifier_mode_from_string("svm") == ClassifierMode::svm);
    CHECK(classifier_mode_from_string("psvm") == ClassifierMode::psvm);
    CHECK(classifier_mode_from_string("lbp-psvm") == ClassifierMode::lbp_psvm);
    CHECK_THROWS_AS(classifier_mode_from_string("ann"), ValidationError);
}

TEST_CASE("run_classification wires mode-specific features") {
    const auto scene = testutil::make_scene(24, 24, 11u, 2);
    PipelineConfig cfg = fast_config();
    FusionParams fp;
    fp.diffusion = cfg.diffusion;
    const Raster fused = fuse_bandwise(scene.sar, scene.opt, fp);

    const auto dim_of = [](const ClassificationResult& r) {
        REQUIRE(!r.model.pairs.empty());
        REQUIRE(!r.model.pairs[0].support_vectors.empty());
        return r.model.pairs[0].support_vectors[0].size();
    };

    const auto rs = run_classification(fused, scene.labels, cfg, ClassifierMode::svm);
    CHECK(dim_of(rs) == 4);  // one pixel, four bands
    CHECK(rs.svm_gamma == 0.25);
    const auto rp = run_classification(fused, scene.labels, cfg, ClassifierMode::psvm);
    CHECK(dim_of(rp) == 36);  // 3x3 patch
    const auto rl = run_classification(fused, scene.labels, cfg, ClassifierMode::lbp_psvm);
    CHECK(dim_of(rl) == 72);  // lbp bands double the stack
    CHECK(rl.svm_gamma == 1.0 / 72.0);

    CHECK(rl.classes == std::vector<uint16_t>{1, 2});
    CHECK(rl.train_samples + rl.test_samples == 121);  // 11x11 usable centers
    CHECK(rs.train_samples + rs.test_samples == 144);  // patch side 1 keeps all
    CHECK(rl.overall_accuracy >= 0.0);
    CHECK(rl.overall_accuracy <= 100.0);

    // classified map marks exactly the usable centers
    PatchParams pp;
    pp.patch_side = cfg.patch_side;
    const auto centers = patch_centers(scene.labels, pp);
    size_t marked = 0;
    for (uint16_t v : rl.classified.labels) marked += v != 0;
    CHECK(marked == centers.size());
    for (const auto& [x, y] : centers) CHECK(rl.classified.at(x, y) != 0);

    CHECK_THROWS_AS(run_classification(fused, LabelMap(10, 10), cfg, ClassifierMode::svm),
                    ValidationError);
}

TEST_CASE("run_classification honours the grid search flag") {
    const auto scene = testutil::make_scene(20, 20, 5u, 2);
    PipelineConfig cfg = fast_config();
    cfg.grid.enabled = true;
    cfg.grid.c_grid = {1.0, 10.0};
    cfg.grid.gamma_grid = {0.05};
    cfg.grid.folds = 2;
    FusionParams fp;
    fp.diffusion = cfg.diffusion;
    const Raster fused = fuse_bandwise(scene.sar, scene.opt, fp);
    const auto r = run_classification(fused, scene.labels, cfg, ClassifierMode::svm);
    CHECK(r.cv_accuracy >= 0.0);
    CHECK((r.svm_c == 1.0 || r.svm_c == 10.0));
    CHECK(r.svm_gamma == 0.05);
    const std::string report = classification_report(r, ClassifierMode::svm);
    CHECK(report.find("cv_accuracy=") != std::string::npos);
}

TEST_CASE("classification_report layout") {
    ClassificationResult r;
    r.overall_accuracy = 87.5;
    r.svm_c = 10.0;
    r.svm_gamma = 0.125;
    r.train_samples = 70;
    r.test_samples = 30;
    r.classes = {1, 2};
    r.confusion = {{20, 5}, {0, 5}};
    const std::string s = classification_report(r, ClassifierMode::psvm);
    CHECK(s ==
          "mode=psvm\noverall_accuracy=87.5\nsvm_c=10\nsvm_gamma=0.125\n"
          "train_samples=70\ntest_samples=30\nclasses=1,2\n"
          "confusion_1=20,5\nconfusion_2=0,5\n");
}

TEST_CASE("cmd_fuse, cmd_evaluate, cmd_quicklook round trip on disk") {
    testutil::TempDir dir;
    const auto scene = testutil::make_scene(24, 24, 3u, 2);
    save_raster(scene.sar, dir.path() + "/sar");
    save_raster(scene.opt, dir.path() + "/opt");
    PipelineConfig cfg = fast_config();

    CaptureStdout mute;
    CHECK(cli::cmd_fuse(dir.path() + "/sar", dir.path() + "/opt", dir.path() + "/fused", cfg) == 0);
    CHECK(fs::exists(dir.path() + "/fused.hdr"));
    CHECK(fs::exists(dir.path() + "/fused.raw"));
    const Raster fused = load_raster(dir.path() + "/fused");
    CHECK(fused.bands == 4);

    CHECK(cli::cmd_evaluate(dir.path() + "/fused", dir.path() + "/opt", cfg,
                            dir.path() + "/q.csv") == 0);
    const std::string csv = testutil::read_file(dir.path() + "/q.csv");
    CHECK(csv.rfind("ergas,sam_deg,rase,uiqi,ssim,psnr_db,cc\n", 0) == 0);
    CHECK(mute.text().find("ergas=") != std::string::npos);

    CHECK(cli::cmd_quicklook(dir.path() + "/fused", dir.path() + "/ql.ppm", {-1, -1, -1}) == 0);
    CHECK(testutil::read_file(dir.path() + "/ql.ppm").rfind("P6\n24 24\n255\n", 0) == 0);
    // explicit out-of-range band
    CHECK(cli::cmd_quicklook(dir.path() + "/fused", dir.path() + "/ql2.ppm", {0, 1, 9}) == 2);
}

TEST_CASE("cli failure modes map to exit codes") {
    testutil::TempDir dir;
    PipelineConfig cfg = fast_config();
    // missing input: io error -> 1
    CaptureStdout mute;
    CHECK(cli::cmd_fuse(dir.path() + "/absent", dir.path() + "/absent", dir.path() + "/o", cfg) == 1);

    // multi-band sar: validation error -> 2
    const auto scene = testutil::make_scene(16, 16, 4u, 2);
    save_raster(scene.opt, dir.path() + "/opt");
    CHECK(cli::cmd_fuse(dir.path() + "/opt", dir.path() + "/opt", dir.path() + "/o", cfg) == 2);

    // shape mismatch in evaluate -> 2
    save_raster(scene.sar, dir.path() + "/sar");
    CHECK(cli::cmd_evaluate(dir.path() + "/sar", dir.path() + "/opt", cfg, "") == 2);
}

TEST_CASE("cmd_classify writes report, map and model") {
    testutil::TempDir dir;
    const auto scene = testutil::make_scene(20, 20, 21u, 2);
    PipelineConfig cfg = fast_config();
    FusionParams fp;
    fp.diffusion = cfg.diffusion;
    save_raster(fuse_bandwise(scene.sar, scene.opt, fp), dir.path() + "/fused");
    save_labels(scene.labels, dir.path() + "/gt");

    CaptureStdout mute;
    CHECK(cli::cmd_classify(dir.path() + "/fused", dir.path() + "/gt", cfg, ClassifierMode::psvm,
                            dir.path() + "/out", dir.path() + "/model.svm") == 0);
    CHECK(fs::exists(dir.path() + "/out_report.txt"));
    CHECK(fs::exists(dir.path() + "/out_classified.hdr"));
    CHECK(fs::exists(dir.path() + "/out_classified.raw"));
    CHECK(fs::exists(dir.path() + "/model.svm"));
    CHECK(mute.text().find("mode=psvm") != std::string::npos);

    const MulticlassModel m = load_model(dir.path() + "/model.svm");
    CHECK(m.classes == std::vector<uint16_t>{1, 2});
    const LabelMap cl = load_labels(dir.path() + "/out_classified");
    CHECK(cl.width == 20);
}

TEST_CASE("cmd_pipeline writes the full artifact set and is reproducible") {
    testutil::TempDir dir;
    const auto scene = testutil::make_scene(24, 24, 33u, 2);
    save_raster(scene.sar, dir.path() + "/sar");
    save_raster(scene.opt, dir.path() + "/opt");
    save_labels(scene.labels, dir.path() + "/gt");
    PipelineConfig cfg = fast_config();

    CaptureStdout mute;
    const std::string run1 = dir.path() + "/run1", run2 = dir.path() + "/run2";
    REQUIRE(cli::cmd_pipeline(dir.path() + "/sar", dir.path() + "/opt", dir.path() + "/gt", run1,
                              cfg) == 0);
    for (const char* name :
         {"fused.hdr", "fused.raw", "fused_quicklook.ppm", "quality.csv", "summary.csv",
          "manifest.txt", "svm_report.txt", "psvm_report.txt", "lbp-psvm_report.txt",
          "svm_classified.raw", "psvm_classified.raw", "lbp-psvm_classified.raw"})
        CHECK(fs::exists(run1 + "/" + name));

    const std::string summary = testutil::read_file(run1 + "/summary.csv");
    CHECK(summary.rfind("mode,overall_accuracy,svm_c,svm_gamma,cv_accuracy,train_samples,"
                        "test_samples\n", 0) == 0);
    CHECK(summary.find("\nsvm,") != std::string::npos);
    CHECK(summary.find("\nlbp-psvm,") != std::string::npos);

    REQUIRE(cli::cmd_pipeline(dir.path() + "/sar", dir.path() + "/opt", dir.path() + "/gt", run2,
                              cfg) == 0);
    for (const char* name : {"fused.raw", "fused.hdr", "quality.csv", "summary.csv",
                             "manifest.txt", "svm_classified.raw", "psvm_classified.raw",
                             "lbp-psvm_classified.raw", "fused_quicklook.ppm"})
        CHECK(testutil::read_file(run1 + "/" + name) == testutil::read_file(run2 + "/" + name));
}

TEST_CASE("cmd_pipeline without labels warns and skips classification") {
    testutil::TempDir dir;
    const auto scene = testutil::make_scene(16, 16, 2u, 2);
    save_raster(scene.sar, dir.path() + "/sar");
    save_raster(scene.opt, dir.path() + "/opt");
    PipelineConfig cfg = fast_config();

    CaptureStdout mute;
    const std::string out = dir.path() + "/run";
    CHECK(cli::cmd_pipeline(dir.path() + "/sar", dir.path() + "/opt", "", out, cfg) == 0);
    CHECK(fs::exists(out + "/fused.raw"));
    CHECK(fs::exists(out + "/quality.csv"));
    CHECK(fs::exists(out + "/manifest.txt"));
    CHECK(!fs::exists(out + "/summary.csv"));
    CHECK(testutil::read_file(out + "/manifest.txt").find("labels=-") != std::string::npos);
}
