#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "encoders/stub.hpp"
#include "helpers.hpp"
#include "pseudogt/generator.hpp"
#include "training/checkpoint.hpp"
#include "training/evaluate.hpp"
#include "training/trainer.hpp"

using namespace secor;
using namespace secor::core;
using namespace secor::train;
using testutil::TempDir;

namespace {

net::NetworkConfig smoke_net_config() {
    net::NetworkConfig cfg;
    cfg.scales = 2;
    cfg.base_channels = 8;
    cfg.smb_per_rsmg = 1;
    cfg.state_dim = 4;
    cfg.semantic_channels = 2;
    return cfg;
}

// calibrated once against the frozen 50%-drop criterion
TrainSettings smoke_train_settings() {
    TrainSettings ts;
    ts.lr = 1.5e-3;
    ts.batch_size = 2;
    ts.input_size = 16;
    ts.steps = 30;
    ts.checkpoint_every = 0;
    ts.seed = 2024;
    return ts;
}

loss::LossWeights smoke_loss_weights() {
    loss::LossWeights lw;
    lw.lambda3 = 0.05;
    return lw;
}

struct SmokeWorld {
    TempDir tmp{"train"};
    enc::StubVlEncoder encoder{64, 64, 0.2, 0x53454331ull};
    enc::StubSegmenter segmenter{2};
    enc::PromptSet prompts;
    img::DatasetManifest manifest;

    SmokeWorld() {
        prompts.well = encoder.anchor_prompt(enc::ExposureClass::Well);
        prompts.under = encoder.anchor_prompt(enc::ExposureClass::Under);
        prompts.over = encoder.anchor_prompt(enc::ExposureClass::Over);

        std::filesystem::create_directories(tmp.sub("data"));
        const double levels[4] = {0.33, 0.36, 0.39, 0.42};
        for (int i = 0; i < 4; ++i)
            img::save_image_png(testutil::two_tone_image(20, 20, levels[i], 0.07),
                                tmp.sub("data/im" + std::to_string(i) + ".png"));
        manifest = img::build_manifest(tmp.sub("data"), "flat", "train");
    }

    TrainResult run(const TrainSettings& ts, const std::string& out_sub,
                    const std::string& resume = "") {
        net::CorrectionNet model(smoke_net_config(), ts.seed);
        return secor::train::train(model, ts, smoke_loss_weights(), segmenter, encoder, prompts,
                     pgt::GammaTunerOptions{}, manifest, tmp.sub("cache"), tmp.sub(out_sub),
                     resume);
    }
};

} // namespace

TEST_CASE("checkpoint round trip, config hash, optimizer state") {
    TempDir tmp("ckpt");
    net::CorrectionNet model(smoke_net_config(), 11);
    Adam adam(model.params(), 1e-3);
    adam.t = 7;
    for (auto& m : adam.m)
        for (auto& v : m.data) v = 0.25;

    const std::string path = tmp.sub("model.secor");
    save_checkpoint(path, model, &adam, {42, 3});

    net::CorrectionNet other(smoke_net_config(), 987); // different init
    Adam other_adam(other.params(), 1e-3);
    CheckpointExtra extra;
    load_checkpoint(path, other, &other_adam, &extra);
    CHECK(extra.step == 42);
    CHECK(extra.epoch == 3);
    CHECK(other_adam.t == 7);
    for (std::size_t i = 0; i < model.params().items().size(); ++i) {
        const auto& a = model.params().items()[i].second.value();
        const auto& b = other.params().items()[i].second.value();
        CHECK(a.data == b.data);
    }
    CHECK(other_adam.m[0].data == adam.m[0].data);

    // mismatched network config refuses to load unless forced
    net::NetworkConfig bigger = smoke_net_config();
    bigger.base_channels = 16;
    net::CorrectionNet wrong(bigger, 5);
    CHECK_THROWS_AS(load_checkpoint(path, wrong, nullptr, nullptr), IntegrityError);
    // even forced, shape mismatches stay hard errors
    CHECK_THROWS_AS(load_checkpoint(path, wrong, nullptr, nullptr, true), IntegrityError);

    CHECK(checkpoint_config(path).hash() == smoke_net_config().hash());
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
    SmokeWorld world;
    TrainSettings ts = smoke_train_settings();
    ts.lr = 0.0;
    ts.steps = 10;

    net::CorrectionNet model(smoke_net_config(), ts.seed);
    std::vector<Tensor> before;
    for (const auto& [name, p] : model.params().items()) before.push_back(p.value());

    secor::train::train(model, ts, smoke_loss_weights(), world.segmenter, world.encoder,
                        world.prompts, pgt::GammaTunerOptions{}, world.manifest,
                        world.tmp.sub("cache"), world.tmp.sub("zero_lr"));

    std::size_t i = 0;
    for (const auto& [name, p] : model.params().items()) {
        CHECK(p.value().data == before[i].data);
        ++i;
    }
}

TEST_CASE("training smoke: loss halves, reruns reproduce, resume matches") {
    SmokeWorld world;
    const TrainSettings ts = smoke_train_settings();

    const auto run1 = world.run(ts, "run1");
    REQUIRE(run1.loss_curve.size() == 30);
    CHECK(run1.loss_curve.back() <= 0.5 * run1.loss_curve.front());

    // bit-level reproducibility for the same seed
    const auto run2 = world.run(ts, "run2");
    REQUIRE(run2.loss_curve.size() == 30);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK(std::fabs(run1.loss_curve[i] - run2.loss_curve[i]) <= 1e-6);

    // interrupted + resumed run reproduces the uninterrupted tail
    TrainSettings half = ts;
    half.steps = 15;
    const auto first_half = world.run(half, "half");
    const auto resumed = world.run(ts, "resumed", first_half.final_checkpoint);
    REQUIRE(resumed.loss_curve.size() == 15);
    for (std::size_t i = 0; i < 15; ++i)
        CHECK(std::fabs(resumed.loss_curve[i] - run1.loss_curve[15 + i]) <= 1e-6);

    // prompts and towers stayed frozen
    CHECK(world.encoder.checksum() ==
          enc::StubVlEncoder(64, 64, 0.2, 0x53454331ull).checksum());

    // step log is JSON lines with the documented keys
    std::ifstream log(world.tmp.sub("run1") + "/train_log.jsonl");
    REQUIRE(log.good());
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) {
        const auto j = nlohmann::json::parse(line);
        for (const char* key : {"step", "mse", "cos", "sfc", "ipa", "total"}) CHECK(j.contains(key));
        ++lines;
    }
    CHECK(lines == 30);
}

TEST_CASE("training config contract errors") {
    SmokeWorld world;
    TrainSettings ts = smoke_train_settings();
    ts.steps = 0; // neither steps nor epochs
    CHECK_THROWS_AS(world.run(ts, "bad"), ConfigError);
    ts.steps = 10;
    ts.epochs = 2; // both set
    CHECK_THROWS_AS(world.run(ts, "bad2"), ConfigError);
}

TEST_CASE("validation manifest drives a best checkpoint") {
    SmokeWorld world;
    // references = inputs so evaluation always works
    img::DatasetManifest val = world.manifest;
    for (auto& e : val.entries) {
        e.reference = e.input;
        e.tag = img::ExposureTag::Under;
    }
    TrainSettings ts = smoke_train_settings();
    ts.steps = 6;
    ts.checkpoint_every = 3;
    net::CorrectionNet model(smoke_net_config(), ts.seed);
    const auto r = secor::train::train(model, ts, smoke_loss_weights(), world.segmenter,
                                       world.encoder, world.prompts, pgt::GammaTunerOptions{},
                                       world.manifest, world.tmp.sub("cache_v"),
                                       world.tmp.sub("out_v"), "", &val);
    CHECK(!r.best_checkpoint.empty());
    CHECK(std::filesystem::exists(r.best_checkpoint));
    CHECK(std::filesystem::exists(world.tmp.sub("out_v") + "/checkpoint_step3.secor"));
}

TEST_CASE("non-finite forward aborts with a numeric error naming the checkpoint") {
    SmokeWorld world;
    TrainSettings ts = smoke_train_settings();
    ts.steps = 5;

    net::CorrectionNet model(smoke_net_config(), ts.seed);
    Var shallow = model.params().get("shallow.w");
    shallow.value()[0] = std::numeric_limits<double>::quiet_NaN();

    try {
        secor::train::train(model, ts, smoke_loss_weights(), world.segmenter, world.encoder,
                            world.prompts, pgt::GammaTunerOptions{}, world.manifest,
                            world.tmp.sub("cache_nan"), world.tmp.sub("out_nan"));
        FAIL("expected a numeric abort");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("checkpoint") != std::string::npos);
    }
}

TEST_CASE("well-tagged entries never become training inputs") {
    SmokeWorld world;
    img::DatasetManifest m = world.manifest;
    for (auto& e : m.entries) e.tag = img::ExposureTag::Well;

    TrainSettings ts = smoke_train_settings();
    ts.steps = 1;
    net::CorrectionNet model(smoke_net_config(), 1);
    CHECK_THROWS_AS(secor::train::train(model, ts, smoke_loss_weights(), world.segmenter,
                                        world.encoder, world.prompts, pgt::GammaTunerOptions{}, m,
                                        world.tmp.sub("cache_w"), world.tmp.sub("out_w")),
                    ContractError);
}

TEST_CASE("evaluation: identity network, grouping, skips") {
    TempDir tmp("eval");
    std::filesystem::create_directories(tmp.sub("under"));
    std::filesystem::create_directories(tmp.sub("over"));
    std::filesystem::create_directories(tmp.sub("gt"));

    const img::Image u1 = testutil::noise_image(16, 16, 0.0, 0.4, 1);
    const img::Image u2 = testutil::noise_image(16, 16, 0.1, 0.5, 2);
    const img::Image o1 = testutil::noise_image(16, 16, 0.6, 1.0, 3);
    const img::Image g1 = testutil::noise_image(16, 16, 0.3, 0.7, 4);
    const img::Image g2 = testutil::noise_image(16, 16, 0.3, 0.7, 5);
    img::save_image_png(u1, tmp.sub("under/a.png"));
    img::save_image_png(u2, tmp.sub("under/b.png"));
    img::save_image_png(o1, tmp.sub("over/a.png"));
    img::save_image_png(g1, tmp.sub("gt/a.png"));
    img::save_image_png(g2, tmp.sub("gt/b.png"));

    const auto manifest = img::build_manifest(tmp.str(), "msec", "test");
    net::CorrectionNet model(smoke_net_config(), 9); // zero head: identity network
    enc::StubSegmenter seg(2);

    const auto report = evaluate(model, seg, manifest);
    REQUIRE(report.per_image.size() == 3);

    // identity network: the report equals raw input-vs-reference metrics
    for (const auto& e : report.per_image) {
        const img::Image in = img::load_image(e.input);
        const img::Image ref = img::load_image(e.tag == "under"
                                                   ? tmp.sub("gt/" + std::filesystem::path(e.input).filename().string())
                                                   : tmp.sub("gt/a.png"));
        CHECK(e.psnr == doctest::Approx(img::psnr(in, ref)).epsilon(1e-12));
        CHECK(e.ssim == doctest::Approx(img::ssim(in, ref)).epsilon(1e-12));
    }

    // average group is the mean of the under/over aggregates
    double under_psnr = 0, over_psnr = 0;
    int under_n = 0;
    for (const auto& [tag, g] : report.groups) {
        if (tag == "under") {
            under_psnr = g.psnr;
            under_n = g.count;
        }
        if (tag == "over") over_psnr = g.psnr;
    }
    CHECK(under_n == 2);
    CHECK(report.average_psnr == doctest::Approx(0.5 * (under_psnr + over_psnr)).epsilon(1e-12));

    // self-references: perfect scores with the identity network
    img::DatasetManifest self;
    self.split = "test";
    self.layout = "flat";
    self.entries.push_back({tmp.sub("gt/a.png"), img::ExposureTag::Under, tmp.sub("gt/a.png")});
    const auto perfect = evaluate(model, seg, self);
    CHECK(std::isinf(perfect.per_image[0].psnr));
    CHECK(perfect.per_image[0].ssim == doctest::Approx(1.0).epsilon(1e-9));

    // entries without references are skipped and counted
    img::DatasetManifest missing = manifest;
    missing.entries.push_back({tmp.sub("under/a.png"), img::ExposureTag::Under, ""});
    const auto skipped = evaluate(model, seg, missing);
    CHECK(skipped.skipped == 1);
    CHECK(skipped.per_image.size() == 3);

    // report JSON serializes the infinite sentinel
    const std::string rpath = tmp.sub("report.json");
    save_eval_report(perfect, rpath);
    std::ifstream rf(rpath);
    const auto j = nlohmann::json::parse(rf);
    CHECK(j["average"]["psnr"] == "infinite");
}

TEST_CASE("group averaging rule on hand-built values") {
    // under = {20, 22}, over = {18}  ->  average = mean(21, 18) = 19.5
    EvalReport r;
    r.groups.emplace_back("under", EvalGroupStats{2, (20.0 + 22.0) / 2.0, 0.9});
    r.groups.emplace_back("over", EvalGroupStats{1, 18.0, 0.8});
    r.average_psnr = 0.5 * (r.groups[0].second.psnr + r.groups[1].second.psnr);
    CHECK(r.average_psnr == doctest::Approx(19.5));
}

TEST_CASE("infer_dir writes corrected PNGs") {
    TempDir tmp("infer");
    std::filesystem::create_directories(tmp.sub("in"));
    const img::Image a = testutil::noise_image(16, 12, 0.0, 1.0, 21);
    img::save_image_png(a, tmp.sub("in/x.png"));

    net::CorrectionNet model(smoke_net_config(), 3);
    enc::StubSegmenter seg(2);
    CHECK(infer_dir(model, seg, tmp.sub("in"), tmp.sub("out")) == 1);

    // identity network: byte-for-byte equal to re-encoding the decoded input
    const img::Image out = img::load_image(tmp.sub("out/x.png"));
    const img::Image round = img::load_image(tmp.sub("in/x.png"));
    CHECK(out.data == round.data);
}
