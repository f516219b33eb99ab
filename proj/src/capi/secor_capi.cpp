#include "secor/secor.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "common/config.hpp"
#include "imaging/metrics.hpp"
#include "imaging/resize.hpp"
#include "training/checkpoint.hpp"
#include "training/evaluate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace secor;

struct secor_ctx {
    json config = AppConfig::default_json();
    std::string last_error;
    std::string last_output;
};

namespace {

secor_status status_of(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return SECOR_ERR_IO;
    if (dynamic_cast<const FormatError*>(&e)) return SECOR_ERR_FORMAT;
    if (dynamic_cast<const ContractError*>(&e)) return SECOR_ERR_CONTRACT;
    if (dynamic_cast<const NumericError*>(&e)) return SECOR_ERR_NUMERIC;
    if (dynamic_cast<const BackendError*>(&e)) return SECOR_ERR_BACKEND;
    if (dynamic_cast<const IntegrityError*>(&e)) return SECOR_ERR_INTEGRITY;
    if (dynamic_cast<const ConfigError*>(&e)) return SECOR_ERR_CONFIG;
    return SECOR_ERR_INTERNAL;
}

template <typename Fn>
secor_status wrap(secor_ctx* ctx, Fn&& fn) {
    if (!ctx) return SECOR_ERR_USAGE;
    try {
        ctx->last_error.clear();
        fn();
        return SECOR_OK;
    } catch (const Error& e) {
        ctx->last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        ctx->last_error = e.what();
        return SECOR_ERR_INTERNAL;
    }
}

const char* require(const char* p, const char* what) {
    if (!p) throw ContractError(std::string(what) + " must not be null");
    return p;
}

AppConfig parsed(const secor_ctx* ctx) { return AppConfig::from_json(ctx->config); }

// Builds the model for an existing checkpoint. The context's network config
// must match the checkpoint unless force_load is set, in which case the
// checkpoint's own config wins.
net::CorrectionNet model_for_checkpoint(const AppConfig& cfg, const std::string& path) {
    const net::NetworkConfig stored = train::checkpoint_config(path);
    if (stored.hash() != cfg.network.hash() && !cfg.force_load)
        throw IntegrityError(
            "checkpoint network config differs from the configured one; set "
            "checkpoint.force_load (or --force) to use the checkpoint's config");
    net::CorrectionNet model(stored, cfg.seed);
    train::load_checkpoint(path, model, nullptr, nullptr, /*force=*/true);
    return model;
}

std::vector<img::Image> load_dir_images(const std::string& dir, const char* what) {
    if (!fs::is_directory(dir)) throw IoError(std::string(what) + " directory missing: " + dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && img::is_image_file(e.path().string()))
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    std::vector<img::Image> out;
    for (const auto& f : files) out.push_back(img::load_image(f));
    if (out.empty()) throw IoError(std::string(what) + " directory has no images: " + dir);
    return out;
}

} // namespace

extern "C" {

const char* secor_version(void) { return "0.1.0"; }

const char* secor_status_name(secor_status s) {
    switch (s) {
    case SECOR_OK: return "ok";
    case SECOR_ERR_IO: return "io";
    case SECOR_ERR_FORMAT: return "format";
    case SECOR_ERR_CONTRACT: return "contract";
    case SECOR_ERR_NUMERIC: return "numeric";
    case SECOR_ERR_BACKEND: return "backend";
    case SECOR_ERR_INTEGRITY: return "integrity";
    case SECOR_ERR_CONFIG: return "config";
    case SECOR_ERR_USAGE: return "usage";
    default: return "internal";
    }
}

secor_status secor_ctx_create(const char* config_json, secor_ctx** out) {
    if (!out) return SECOR_ERR_USAGE;
    *out = nullptr;
    auto ctx = new secor_ctx();
    const secor_status st = wrap(ctx, [&] {
        if (config_json) {
            json overlay;
            try {
                overlay = json::parse(config_json);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("bad config JSON: ") + e.what());
            }
            ctx->config = merge_config(ctx->config, overlay);
        }
        (void)parsed(ctx); // validate eagerly
    });
    if (st != SECOR_OK) {
        delete ctx;
        return st;
    }
    *out = ctx;
    return SECOR_OK;
}

secor_status secor_ctx_create_from_file(const char* config_path, secor_ctx** out) {
    if (!out || !config_path) return SECOR_ERR_USAGE;
    std::ifstream f(config_path);
    if (!f) return SECOR_ERR_IO;
    std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return secor_ctx_create(body.c_str(), out);
}

void secor_ctx_destroy(secor_ctx* ctx) { delete ctx; }

const char* secor_ctx_last_error(const secor_ctx* ctx) {
    return ctx ? ctx->last_error.c_str() : "null context";
}

const char* secor_ctx_last_output(const secor_ctx* ctx) {
    return ctx ? ctx->last_output.c_str() : "";
}

secor_status secor_ctx_set(secor_ctx* ctx, const char* dotted_key, const char* value) {
    return wrap(ctx, [&] {
        require(dotted_key, "key");
        require(value, "value");
        json v;
        try {
            v = json::parse(value);
        } catch (const json::exception&) {
            v = std::string(value); // bare word: treat as string
        }
        json next = ctx->config;
        set_by_path(next, dotted_key, v);
        (void)AppConfig::from_json(next); // reject bad values atomically
        ctx->config = std::move(next);
    });
}

secor_status secor_build_manifest(secor_ctx* ctx, const char* root, const char* layout,
                                  const char* split, const char* out_json_path) {
    return wrap(ctx, [&] {
        const AppConfig cfg = parsed(ctx);
        const auto m = img::build_manifest(require(root, "root"), require(layout, "layout"),
                                           require(split, "split"), cfg.folder_tags);
        img::save_manifest(m, require(out_json_path, "output path"));
    });
}

secor_status secor_tune_prompts(secor_ctx* ctx, const char* well_dir, const char* under_dir,
                                const char* over_dir, int steps, double lr,
                                const char* prompts_out, const char* curve_csv) {
    return wrap(ctx, [&] {
        const AppConfig cfg = parsed(ctx);
        auto encoder = enc::make_vl_encoder(cfg.encoder);

        pgt::PromptTuneOptions opt = cfg.prompt_tuning;
        if (steps >= 0) opt.steps = steps;
        if (lr > 0.0) opt.lr = lr;

        const auto well = load_dir_images(require(well_dir, "well"), "well");
        const auto under = load_dir_images(require(under_dir, "under"), "under");
        const auto over = load_dir_images(require(over_dir, "over"), "over");

        const auto init = enc::PromptSet::random_init(*encoder, core::mix_seed(cfg.seed, 0x9017ull));
        if (opt.steps == 0)
            std::cerr << "tune-prompts: steps == 0, writing initial prompts unchanged\n";
        const auto result = pgt::tune_prompts(well, under, over, *encoder, init, opt);
        enc::save_prompts(result.prompts, require(prompts_out, "prompts output"));

        if (curve_csv) {
            std::ofstream f(curve_csv, std::ios::trunc);
            if (!f) throw IoError(std::string("cannot write curve CSV: ") + curve_csv);
            f << "step,loss\n";
            for (std::size_t i = 0; i < result.loss_curve.size(); ++i)
                f << (i + 1) << "," << result.loss_curve[i] << "\n";
        }
    });
}

secor_status secor_generate_pgt(secor_ctx* ctx, const char* input_dir, const char* prompts_path,
                                const char* cache_dir, int* out_written, int* out_cached) {
    return wrap(ctx, [&] {
        const AppConfig cfg = parsed(ctx);
        auto encoder = enc::make_vl_encoder(cfg.encoder);
        const auto prompts = enc::load_prompts(require(prompts_path, "prompts"), *encoder);
        const auto stats = pgt::generate_pgt_dir(require(input_dir, "input"), prompts, *encoder,
                                                 cfg.gamma, require(cache_dir, "cache"));
        if (out_written) *out_written = stats.written;
        if (out_cached) *out_cached = stats.cached;
    });
}

secor_status secor_train(secor_ctx* ctx, const char* manifest_path, const char* prompts_path,
                         const char* cache_dir, const char* out_dir,
                         const char* resume_checkpoint, const char* val_manifest) {
    return wrap(ctx, [&] {
        const AppConfig cfg = parsed(ctx);
        auto encoder = enc::make_vl_encoder(cfg.encoder);
        auto segmenter = enc::make_segmenter(cfg.segmenter);
        const auto prompts = enc::load_prompts(require(prompts_path, "prompts"), *encoder);
        const auto manifest = img::load_manifest(require(manifest_path, "manifest"));

        img::DatasetManifest val;
        if (val_manifest) val = img::load_manifest(val_manifest);

        net::CorrectionNet model(cfg.network, cfg.seed);
        train::train(model, cfg.train, cfg.loss, *segmenter, *encoder, prompts, cfg.gamma,
                     manifest, require(cache_dir, "cache"), require(out_dir, "out"),
                     resume_checkpoint ? resume_checkpoint : "", val_manifest ? &val : nullptr);
    });
}

secor_status secor_infer(secor_ctx* ctx, const char* checkpoint_path, const char* input_dir,
                         const char* out_dir, int* out_count) {
    return wrap(ctx, [&] {
        const AppConfig cfg = parsed(ctx);
        auto segmenter = enc::make_segmenter(cfg.segmenter);
        const auto model = model_for_checkpoint(cfg, require(checkpoint_path, "checkpoint"));
        const int n = train::infer_dir(model, *segmenter, require(input_dir, "input"),
                                       require(out_dir, "out"));
        if (out_count) *out_count = n;
    });
}

secor_status secor_evaluate(secor_ctx* ctx, const char* checkpoint_path,
                            const char* manifest_path, const char* report_json) {
    return wrap(ctx, [&] {
        const AppConfig cfg = parsed(ctx);
        auto segmenter = enc::make_segmenter(cfg.segmenter);
        const auto model = model_for_checkpoint(cfg, require(checkpoint_path, "checkpoint"));
        const auto manifest = img::load_manifest(require(manifest_path, "manifest"));
        const auto report = train::evaluate(model, *segmenter, manifest);
        if (report_json) train::save_eval_report(report, report_json);
        ctx->last_output = train::eval_report_table(report);
    });
}

secor_status secor_inspect(secor_ctx* ctx, const char* checkpoint_path, const char* image_path,
                           const char* prompts_path, const char* out_dir) {
    return wrap(ctx, [&] {
        const AppConfig cfg = parsed(ctx);
        auto segmenter = enc::make_segmenter(cfg.segmenter);
        const auto model = model_for_checkpoint(cfg, require(checkpoint_path, "checkpoint"));
        const img::Image input = img::load_image(require(image_path, "image"));
        fs::create_directories(require(out_dir, "out"));

        net::InspectSink sink;
        const core::Tensor seg = segmenter->segment(input);
        img::Image corrected;
        {
            core::NoGradGuard ng;
            core::Var out = model.forward(input.to_tensor(), seg, &sink);
            corrected = img::Image::from_tensor(out.value());
        }
        img::save_image_png(corrected, (fs::path(out_dir) / "corrected.png").string());

        json acts = json::array();
        for (const auto& e : sink.entries)
            acts.push_back({{"block", e.name},
                            {"shape", e.shape},
                            {"mean", e.mean},
                            {"stddev", e.stddev},
                            {"min", e.min},
                            {"max", e.max}});
        std::ofstream af((fs::path(out_dir) / "activations.json").string(), std::ios::trunc);
        af << acts.dump(2) << "\n";

        std::string summary = "inspected " + std::string(image_path) + ": " +
                              std::to_string(sink.entries.size()) + " blocks";

        if (prompts_path) {
            auto encoder = enc::make_vl_encoder(cfg.encoder);
            const auto prompts = enc::load_prompts(prompts_path, *encoder);
            const auto pgt_out = pgt::generate_pseudo_gt(input, prompts, *encoder, cfg.gamma);

            loss::SemanticFeatureTriple triple;
            triple.out_feat = core::Var(train::frozen_semantic_features(model, segmenter->segment(corrected)));
            triple.pgt_feat = core::Var(train::frozen_semantic_features(model, segmenter->segment(pgt_out.image)));
            triple.in_feat = core::Var(train::frozen_semantic_features(model, seg));

            core::Var e_out = encoder->encode_image(core::Var(corrected.to_tensor()));
            loss::PromptSims sims;
            sims.well = core::cosine_sim(e_out, core::Var(encoder->encode_prompt_tensor(prompts.well)));
            sims.under = core::cosine_sim(e_out, core::Var(encoder->encode_prompt_tensor(prompts.under)));
            sims.over = core::cosine_sim(e_out, core::Var(encoder->encode_prompt_tensor(prompts.over)));

            const auto res = loss::total_loss(core::Var(corrected.to_tensor()),
                                              core::Var(pgt_out.image.to_tensor()), &triple, &sims,
                                              cfg.loss);
            json breakdown = {{"mse", res.mse},
                              {"cos", res.cos},
                              {"sfc", res.sfc},
                              {"ipa", res.ipa},
                              {"total", res.total.value()[0]},
                              {"pgt_gamma", pgt_out.gamma.gamma},
                              {"pgt_class", enc::class_name(pgt_out.cls.cls)}};
            std::ofstream bf((fs::path(out_dir) / "loss_breakdown.json").string(), std::ios::trunc);
            bf << breakdown.dump(2) << "\n";
            summary += ", total loss " + std::to_string(res.total.value()[0]);
        }
        ctx->last_output = summary;
    });
}

secor_status secor_gamma_transform_file(secor_ctx* ctx, const char* input, double gamma,
                                        const char* output) {
    return wrap(ctx, [&] {
        const img::Image im = img::load_image(require(input, "input"));
        img::save_image_png(img::gamma_transform(im, gamma), require(output, "output"));
    });
}

secor_status secor_psnr_file(secor_ctx* ctx, const char* a, const char* b, double* out) {
    return wrap(ctx, [&] {
        require(a, "a");
        require(b, "b");
        if (!out) throw ContractError("output pointer must not be null");
        *out = img::psnr(img::load_image(a), img::load_image(b));
    });
}

secor_status secor_ssim_file(secor_ctx* ctx, const char* a, const char* b, double* out) {
    return wrap(ctx, [&] {
        require(a, "a");
        require(b, "b");
        if (!out) throw ContractError("output pointer must not be null");
        *out = img::ssim(img::load_image(a), img::load_image(b));
    });
}

} // extern "C"
