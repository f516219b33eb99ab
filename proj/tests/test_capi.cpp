#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "encoders/stub.hpp"
#include "helpers.hpp"
#include "imaging/manifest.hpp"
#include "network/model.hpp"
#include "secor/secor.h"
#include "training/checkpoint.hpp"

namespace fs = std::filesystem;
using testutil::TempDir;

namespace {

struct Ctx {
    secor_ctx* p = nullptr;
    Ctx() { REQUIRE(secor_ctx_create(nullptr, &p) == SECOR_OK); }
    explicit Ctx(const char* json) { REQUIRE(secor_ctx_create(json, &p) == SECOR_OK); }
    ~Ctx() { secor_ctx_destroy(p); }
};

// config matching the calibrated smoke fixture
void apply_smoke_config(secor_ctx* c) {
    CHECK(secor_ctx_set(c, "network.scales", "2") == SECOR_OK);
    CHECK(secor_ctx_set(c, "network.base_channels", "8") == SECOR_OK);
    CHECK(secor_ctx_set(c, "network.smb_per_rsmg", "1") == SECOR_OK);
    CHECK(secor_ctx_set(c, "network.state_dim", "4") == SECOR_OK);
    CHECK(secor_ctx_set(c, "segmenter.bands", "2") == SECOR_OK);
    CHECK(secor_ctx_set(c, "encoder.embed_dim", "64") == SECOR_OK);
    CHECK(secor_ctx_set(c, "train.lr", "0.0015") == SECOR_OK);
    CHECK(secor_ctx_set(c, "train.batch_size", "2") == SECOR_OK);
    CHECK(secor_ctx_set(c, "train.input_size", "16") == SECOR_OK);
    CHECK(secor_ctx_set(c, "train.steps", "5") == SECOR_OK);
    CHECK(secor_ctx_set(c, "train.checkpoint_every", "0") == SECOR_OK);
    CHECK(secor_ctx_set(c, "loss.lambda3", "0.05") == SECOR_OK);
    CHECK(secor_ctx_set(c, "prompt_tuning.steps", "40") == SECOR_OK);
}

void make_exposure_dirs(const TempDir& tmp) {
    for (const char* d : {"well", "under", "over", "inputs"})
        fs::create_directories(tmp.sub(d));
    secor::core::Rng rng(12);
    for (int i = 0; i < 3; ++i) {
        const std::string n = "s" + std::to_string(i) + ".png";
        auto save = [&](const char* dir, double level) {
            secor::img::save_image_png(
                testutil::two_tone_image(16, 16, level + rng.uniform(-0.02, 0.02), 0.1),
                tmp.sub(std::string(dir) + "/" + n));
        };
        save("well", 0.5);
        save("under", 0.15);
        save("over", 0.85);
    }
    const double levels[4] = {0.33, 0.36, 0.39, 0.42};
    for (int i = 0; i < 4; ++i)
        secor::img::save_image_png(testutil::two_tone_image(20, 20, levels[i], 0.07),
                                   tmp.sub("inputs/im" + std::to_string(i) + ".png"));
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::strlen(secor_version()) > 0);
    CHECK(std::string(secor_status_name(SECOR_OK)) == "ok");
    CHECK(std::string(secor_status_name(SECOR_ERR_INTEGRITY)) == "integrity");
}

TEST_CASE("context creation and config overrides") {
    secor_ctx* raw = nullptr;
    CHECK(secor_ctx_create("{not json", &raw) == SECOR_ERR_CONFIG);
    CHECK(raw == nullptr);

    Ctx ctx("{\"seed\": 7, \"network\": {\"scales\": 2}}");
    CHECK(secor_ctx_set(ctx.p, "train.batch_size", "3") == SECOR_OK);
    // invalid values are rejected atomically
    CHECK(secor_ctx_set(ctx.p, "network.scales", "0") == SECOR_ERR_CONFIG);
    CHECK(std::strlen(secor_ctx_last_error(ctx.p)) > 0);
    CHECK(secor_ctx_set(ctx.p, "network.asf_attention", "softmax") == SECOR_ERR_CONFIG);
    // the earlier good value survived the rejected ones
    CHECK(secor_ctx_set(ctx.p, "loss.lambda1", "2.0") == SECOR_OK);

    TempDir tmp("cfgfile");
    {
        std::ofstream f(tmp.sub("c.json"));
        f << "{\"segmenter\": {\"bands\": 3}}";
    }
    secor_ctx* from_file = nullptr;
    CHECK(secor_ctx_create_from_file(tmp.sub("c.json").c_str(), &from_file) == SECOR_OK);
    secor_ctx_destroy(from_file);
    CHECK(secor_ctx_create_from_file(tmp.sub("missing.json").c_str(), &from_file) == SECOR_ERR_IO);
}

TEST_CASE("pretrained backends surface backend errors") {
    Ctx ctx;
    apply_smoke_config(ctx.p);
    CHECK(secor_ctx_set(ctx.p, "encoder.backend", "pretrained") == SECOR_OK);
    TempDir tmp("backend");
    make_exposure_dirs(tmp);
    const auto st = secor_tune_prompts(ctx.p, tmp.sub("well").c_str(), tmp.sub("under").c_str(),
                                       tmp.sub("over").c_str(), 1, 0.0,
                                       tmp.sub("p.secor").c_str(), nullptr);
    CHECK(st == SECOR_ERR_BACKEND);
    CHECK(std::string(secor_ctx_last_error(ctx.p)).find("pretrained") != std::string::npos);
}

TEST_CASE("manifest building through the C surface") {
    Ctx ctx;
    TempDir tmp("capi_manifest");
    make_exposure_dirs(tmp);
    const std::string out = tmp.sub("m.json");
    CHECK(secor_build_manifest(ctx.p, tmp.sub("inputs").c_str(), "flat", "train", out.c_str()) ==
          SECOR_OK);
    std::ifstream f(out);
    const auto j = nlohmann::json::parse(f);
    CHECK(j["entries"].size() == 4);
    CHECK(j["split"] == "train");

    CHECK(secor_build_manifest(ctx.p, tmp.sub("nope").c_str(), "flat", "train", out.c_str()) ==
          SECOR_ERR_IO);
    CHECK(secor_build_manifest(ctx.p, tmp.sub("inputs").c_str(), "bogus", "train", out.c_str()) ==
          SECOR_ERR_CONFIG);
}

TEST_CASE("end-to-end pipeline over the C API") {
    Ctx ctx;
    apply_smoke_config(ctx.p);
    TempDir tmp("capi_flow");
    make_exposure_dirs(tmp);

    // prompts
    const std::string prompts = tmp.sub("prompts.secor");
    const std::string curve = tmp.sub("curve.csv");
    REQUIRE(secor_tune_prompts(ctx.p, tmp.sub("well").c_str(), tmp.sub("under").c_str(),
                               tmp.sub("over").c_str(), -1, 0.0, prompts.c_str(),
                               curve.c_str()) == SECOR_OK);
    CHECK(fs::exists(prompts));
    {
        std::ifstream f(curve);
        std::string header;
        std::getline(f, header);
        CHECK(header == "step,loss");
        int rows = 0;
        std::string line;
        while (std::getline(f, line)) ++rows;
        CHECK(rows == 40);
    }

    // pseudo-GT cache, idempotent
    int written = 0, cached = 0;
    REQUIRE(secor_generate_pgt(ctx.p, tmp.sub("inputs").c_str(), prompts.c_str(),
                               tmp.sub("cache").c_str(), &written, &cached) == SECOR_OK);
    CHECK(written == 4);
    CHECK(cached == 0);
    REQUIRE(secor_generate_pgt(ctx.p, tmp.sub("inputs").c_str(), prompts.c_str(),
                               tmp.sub("cache").c_str(), &written, &cached) == SECOR_OK);
    CHECK(written == 0);
    CHECK(cached == 4);

    // manifest + train
    const std::string manifest = tmp.sub("manifest.json");
    REQUIRE(secor_build_manifest(ctx.p, tmp.sub("inputs").c_str(), "flat", "train",
                                 manifest.c_str()) == SECOR_OK);
    REQUIRE(secor_train(ctx.p, manifest.c_str(), prompts.c_str(), tmp.sub("cache").c_str(),
                        tmp.sub("run").c_str(), nullptr, nullptr) == SECOR_OK);
    const std::string ckpt = tmp.sub("run") + "/checkpoint.secor";
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(tmp.sub("run") + "/train_log.jsonl"));

    // infer
    int count = 0;
    REQUIRE(secor_infer(ctx.p, ckpt.c_str(), tmp.sub("inputs").c_str(), tmp.sub("out").c_str(),
                        &count) == SECOR_OK);
    CHECK(count == 4);
    CHECK(fs::exists(tmp.sub("out") + "/im0.png"));

    // eval: craft a manifest whose references are the inputs themselves
    {
        auto m = secor::img::load_manifest(manifest);
        for (auto& e : m.entries) {
            e.reference = e.input;
            e.tag = secor::img::ExposureTag::Under;
        }
        secor::img::save_manifest(m, tmp.sub("self.json"));
    }
    REQUIRE(secor_evaluate(ctx.p, ckpt.c_str(), tmp.sub("self.json").c_str(),
                           tmp.sub("report.json").c_str()) == SECOR_OK);
    CHECK(fs::exists(tmp.sub("report.json")));
    CHECK(std::string(secor_ctx_last_output(ctx.p)).find("PSNR") != std::string::npos);

    // inspect with the loss breakdown
    REQUIRE(secor_inspect(ctx.p, ckpt.c_str(), tmp.sub("inputs/im0.png").c_str(), prompts.c_str(),
                          tmp.sub("probe").c_str()) == SECOR_OK);
    CHECK(fs::exists(tmp.sub("probe") + "/activations.json"));
    CHECK(fs::exists(tmp.sub("probe") + "/corrected.png"));
    CHECK(fs::exists(tmp.sub("probe") + "/loss_breakdown.json"));
    {
        std::ifstream f(tmp.sub("probe") + "/loss_breakdown.json");
        const auto j = nlohmann::json::parse(f);
        for (const char* k : {"mse", "cos", "sfc", "ipa", "total", "pgt_gamma"}) CHECK(j.contains(k));
    }
}

TEST_CASE("checkpoint config hash protection across the C API") {
    Ctx ctx;
    apply_smoke_config(ctx.p);
    TempDir tmp("capi_hash");

    // write a checkpoint with a different architecture than the context's
    secor::net::NetworkConfig other;
    other.scales = 2;
    other.base_channels = 4;
    other.smb_per_rsmg = 1;
    other.state_dim = 2;
    other.semantic_channels = 2;
    secor::net::CorrectionNet model(other, 3);
    secor::train::save_checkpoint(tmp.sub("other.secor"), model, nullptr, {});

    fs::create_directories(tmp.sub("in"));
    secor::img::save_image_png(testutil::constant_image(8, 8, 0.5), tmp.sub("in/a.png"));

    int count = 0;
    CHECK(secor_infer(ctx.p, tmp.sub("other.secor").c_str(), tmp.sub("in").c_str(),
                      tmp.sub("out").c_str(), &count) == SECOR_ERR_INTEGRITY);
    // force_load accepts the checkpoint's own config
    CHECK(secor_ctx_set(ctx.p, "checkpoint.force_load", "true") == SECOR_OK);
    CHECK(secor_infer(ctx.p, tmp.sub("other.secor").c_str(), tmp.sub("in").c_str(),
                      tmp.sub("out").c_str(), &count) == SECOR_OK);
    CHECK(count == 1);
}

TEST_CASE("file primitives") {
    Ctx ctx;
    TempDir tmp("capi_prims");
    const auto img = testutil::two_tone_image(16, 16, 0.4, 0.1);
    secor::img::save_image_png(img, tmp.sub("a.png"));

    CHECK(secor_gamma_transform_file(ctx.p, tmp.sub("a.png").c_str(), 2.0,
                                     tmp.sub("b.png").c_str()) == SECOR_OK);
    const auto b = secor::img::load_image(tmp.sub("b.png"));
    CHECK(b.mean_luma() > img.mean_luma());

    double v = 0.0;
    CHECK(secor_psnr_file(ctx.p, tmp.sub("a.png").c_str(), tmp.sub("a.png").c_str(), &v) == SECOR_OK);
    CHECK(std::isinf(v));
    CHECK(secor_ssim_file(ctx.p, tmp.sub("a.png").c_str(), tmp.sub("b.png").c_str(), &v) == SECOR_OK);
    CHECK(v < 1.0);
    CHECK(secor_psnr_file(ctx.p, tmp.sub("a.png").c_str(), tmp.sub("missing.png").c_str(), &v) ==
          SECOR_ERR_IO);
    CHECK(secor_gamma_transform_file(ctx.p, tmp.sub("a.png").c_str(), -1.0,
                                     tmp.sub("c.png").c_str()) == SECOR_ERR_CONTRACT);
    CHECK(secor_psnr_file(ctx.p, nullptr, nullptr, &v) == SECOR_ERR_CONTRACT);
}
