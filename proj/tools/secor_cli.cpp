// Command-line front end for the exposure-correction toolkit. This binary
// talks to the library exclusively through the public C API.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "secor/secor.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CtxDeleter {
    void operator()(secor_ctx* c) const { secor_ctx_destroy(c); }
};
using CtxPtr = std::unique_ptr<secor_ctx, CtxDeleter>;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", c.sets, "config override key=value (repeatable)");
    cmd->add_option("--seed", c.seed, "override the experiment seed");
}

// exit-code holder: usage problems found after parsing map to 2
struct UsageError {
    std::string message;
};

CtxPtr make_ctx(const CommonOpts& c) {
    secor_ctx* raw = nullptr;
    secor_status st;
    if (!c.config_path.empty())
        st = secor_ctx_create_from_file(c.config_path.c_str(), &raw);
    else
        st = secor_ctx_create(nullptr, &raw);
    if (st != SECOR_OK)
        throw UsageError{"failed to load config (" + std::string(secor_status_name(st)) + ")"};
    CtxPtr ctx(raw);

    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw UsageError{"--set expects key=value, got: " + kv};
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (secor_ctx_set(ctx.get(), key.c_str(), val.c_str()) != SECOR_OK)
            throw UsageError{"bad --set " + kv + ": " + secor_ctx_last_error(ctx.get())};
    }
    if (c.seed >= 0) {
        const std::string s = std::to_string(c.seed);
        if (secor_ctx_set(ctx.get(), "seed", s.c_str()) != SECOR_OK)
            throw UsageError{std::string("bad --seed: ") + secor_ctx_last_error(ctx.get())};
    }
    return ctx;
}

void require_dir(const std::string& path, const char* flag) {
    if (!fs::is_directory(path))
        throw UsageError{std::string(flag) + ": directory does not exist: " + path};
}

void require_file(const std::string& path, const char* flag) {
    if (!fs::is_regular_file(path))
        throw UsageError{std::string(flag) + ": file does not exist: " + path};
}

int run_api(secor_ctx* ctx, secor_status st) {
    if (st == SECOR_OK) return kExitOk;
    std::fprintf(stderr, "error (%s): %s\n", secor_status_name(st), secor_ctx_last_error(ctx));
    return kExitRuntime;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"secor - unsupervised semantic-aware exposure correction"};
    app.require_subcommand(1);

    // tune-prompts
    auto* tp = app.add_subcommand("tune-prompts", "fine-tune the three exposure prompts");
    CommonOpts tp_common;
    std::string tp_well, tp_under, tp_over, tp_out, tp_curve;
    int tp_steps = -1;
    double tp_lr = 0.0;
    add_common(tp, tp_common);
    tp->add_option("--well", tp_well, "folder of well-exposed images")->required();
    tp->add_option("--under", tp_under, "folder of underexposed images")->required();
    tp->add_option("--over", tp_over, "folder of overexposed images")->required();
    tp->add_option("--out", tp_out, "output prompt file")->required();
    tp->add_option("--steps", tp_steps, "tuning steps (default from config)");
    tp->add_option("--lr", tp_lr, "tuning learning rate (default from config)");
    tp->add_option("--curve", tp_curve, "write the loss curve CSV here");

    // gen-pgt
    auto* gp = app.add_subcommand("gen-pgt", "generate pseudo ground truth into a cache");
    CommonOpts gp_common;
    std::string gp_input, gp_prompts, gp_cache;
    add_common(gp, gp_common);
    gp->add_option("--input", gp_input, "folder of input images")->required();
    gp->add_option("--prompts", gp_prompts, "tuned prompt file")->required();
    gp->add_option("--cache", gp_cache, "cache directory")->required();

    // train
    auto* tr = app.add_subcommand("train", "train the correction network");
    CommonOpts tr_common;
    std::string tr_manifest, tr_data, tr_layout = "msec", tr_prompts, tr_cache, tr_out,
                tr_resume, tr_val;
    long long tr_steps = -1, tr_epochs = -1;
    add_common(tr, tr_common);
    tr->add_option("--manifest", tr_manifest, "dataset manifest JSON");
    tr->add_option("--data", tr_data, "dataset root (alternative to --manifest)");
    tr->add_option("--layout", tr_layout, "dataset layout: msec | sice | flat");
    tr->add_option("--prompts", tr_prompts, "tuned prompt file")->required();
    tr->add_option("--cache", tr_cache, "pseudo-GT cache directory")->required();
    tr->add_option("--out", tr_out, "output directory")->required();
    tr->add_option("--resume", tr_resume, "checkpoint to resume from");
    tr->add_option("--val-manifest", tr_val, "validation manifest for best-checkpoint tracking");
    tr->add_option("--steps", tr_steps, "total optimizer steps");
    tr->add_option("--epochs", tr_epochs, "total epochs");

    // infer
    auto* in = app.add_subcommand("infer", "correct a folder of images");
    CommonOpts in_common;
    std::string in_ckpt, in_input, in_out;
    bool in_force = false;
    add_common(in, in_common);
    in->add_option("--checkpoint", in_ckpt, "trained checkpoint")->required();
    in->add_option("--input", in_input, "folder of input images")->required();
    in->add_option("--out", in_out, "output folder")->required();
    in->add_flag("--force", in_force, "accept a checkpoint with a different network config");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate PSNR/SSIM against references");
    CommonOpts ev_common;
    std::string ev_ckpt, ev_manifest, ev_data, ev_layout = "msec", ev_report;
    bool ev_force = false;
    add_common(ev, ev_common);
    ev->add_option("--checkpoint", ev_ckpt, "trained checkpoint")->required();
    ev->add_option("--manifest", ev_manifest, "dataset manifest JSON");
    ev->add_option("--data", ev_data, "dataset root (alternative to --manifest)");
    ev->add_option("--layout", ev_layout, "dataset layout: msec | sice | flat");
    ev->add_option("--report", ev_report, "write the JSON report here");
    ev->add_flag("--force", ev_force, "accept a checkpoint with a different network config");

    // inspect
    auto* is = app.add_subcommand("inspect", "dump activation statistics and loss breakdown");
    CommonOpts is_common;
    std::string is_ckpt, is_image, is_out, is_prompts;
    bool is_force = false;
    add_common(is, is_common);
    is->add_option("--checkpoint", is_ckpt, "trained checkpoint")->required();
    is->add_option("--image", is_image, "input image")->required();
    is->add_option("--out", is_out, "output directory")->required();
    is->add_option("--prompts", is_prompts, "prompt file (enables the loss breakdown)");
    is->add_flag("--force", is_force, "accept a checkpoint with a different network config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (tp->parsed()) {
            require_dir(tp_well, "--well");
            require_dir(tp_under, "--under");
            require_dir(tp_over, "--over");
            auto ctx = make_ctx(tp_common);
            const auto st = secor_tune_prompts(ctx.get(), tp_well.c_str(), tp_under.c_str(),
                                               tp_over.c_str(), tp_steps, tp_lr, tp_out.c_str(),
                                               tp_curve.empty() ? nullptr : tp_curve.c_str());
            if (st == SECOR_OK) std::printf("prompts written to %s\n", tp_out.c_str());
            return run_api(ctx.get(), st);
        }

        if (gp->parsed()) {
            require_dir(gp_input, "--input");
            require_file(gp_prompts, "--prompts");
            auto ctx = make_ctx(gp_common);
            int written = 0, cached = 0;
            const auto st = secor_generate_pgt(ctx.get(), gp_input.c_str(), gp_prompts.c_str(),
                                               gp_cache.c_str(), &written, &cached);
            if (st == SECOR_OK)
                std::printf("pseudo-GT cache: %d written, %d already cached\n", written, cached);
            return run_api(ctx.get(), st);
        }

        if (tr->parsed()) {
            require_file(tr_prompts, "--prompts");
            auto ctx = make_ctx(tr_common);
            if (tr_steps >= 0)
                secor_ctx_set(ctx.get(), "train.steps", std::to_string(tr_steps).c_str());
            if (tr_epochs >= 0)
                secor_ctx_set(ctx.get(), "train.epochs", std::to_string(tr_epochs).c_str());

            std::string manifest = tr_manifest;
            if (manifest.empty()) {
                if (tr_data.empty())
                    throw UsageError{"train: pass --manifest or --data with --layout"};
                require_dir(tr_data, "--data");
                fs::create_directories(tr_out);
                manifest = (fs::path(tr_out) / "manifest.json").string();
                const auto st = secor_build_manifest(ctx.get(), tr_data.c_str(), tr_layout.c_str(),
                                                     "train", manifest.c_str());
                if (st != SECOR_OK) return run_api(ctx.get(), st);
            } else {
                require_file(manifest, "--manifest");
            }
            const auto st = secor_train(ctx.get(), manifest.c_str(), tr_prompts.c_str(),
                                        tr_cache.c_str(), tr_out.c_str(),
                                        tr_resume.empty() ? nullptr : tr_resume.c_str(),
                                        tr_val.empty() ? nullptr : tr_val.c_str());
            if (st == SECOR_OK)
                std::printf("training done; checkpoint at %s/checkpoint.secor\n", tr_out.c_str());
            return run_api(ctx.get(), st);
        }

        if (in->parsed()) {
            require_file(in_ckpt, "--checkpoint");
            require_dir(in_input, "--input");
            auto ctx = make_ctx(in_common);
            if (in_force) secor_ctx_set(ctx.get(), "checkpoint.force_load", "true");
            int count = 0;
            const auto st =
                secor_infer(ctx.get(), in_ckpt.c_str(), in_input.c_str(), in_out.c_str(), &count);
            if (st == SECOR_OK) std::printf("corrected %d images into %s\n", count, in_out.c_str());
            return run_api(ctx.get(), st);
        }

        if (ev->parsed()) {
            require_file(ev_ckpt, "--checkpoint");
            auto ctx = make_ctx(ev_common);
            if (ev_force) secor_ctx_set(ctx.get(), "checkpoint.force_load", "true");

            std::string manifest = ev_manifest;
            if (manifest.empty()) {
                if (ev_data.empty())
                    throw UsageError{"eval: pass --manifest or --data with --layout"};
                require_dir(ev_data, "--data");
                manifest = (fs::temp_directory_path() /
                            ("secor_eval_manifest_" + std::to_string(::getpid()) + ".json"))
                               .string();
                const auto st = secor_build_manifest(ctx.get(), ev_data.c_str(), ev_layout.c_str(),
                                                     "test", manifest.c_str());
                if (st != SECOR_OK) return run_api(ctx.get(), st);
            } else {
                require_file(manifest, "--manifest");
            }
            const auto st = secor_evaluate(ctx.get(), ev_ckpt.c_str(), manifest.c_str(),
                                           ev_report.empty() ? nullptr : ev_report.c_str());
            if (st == SECOR_OK) std::printf("%s", secor_ctx_last_output(ctx.get()));
            return run_api(ctx.get(), st);
        }

        if (is->parsed()) {
            require_file(is_ckpt, "--checkpoint");
            require_file(is_image, "--image");
            if (!is_prompts.empty()) require_file(is_prompts, "--prompts");
            auto ctx = make_ctx(is_common);
            if (is_force) secor_ctx_set(ctx.get(), "checkpoint.force_load", "true");
            const auto st = secor_inspect(ctx.get(), is_ckpt.c_str(), is_image.c_str(),
                                          is_prompts.empty() ? nullptr : is_prompts.c_str(),
                                          is_out.c_str());
            if (st == SECOR_OK) std::printf("%s\n", secor_ctx_last_output(ctx.get()));
            return run_api(ctx.get(), st);
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.message.c_str());
        return kExitUsage;
    }

    return kExitUsage;
}
