#include "training/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "imaging/resize.hpp"
#include "training/checkpoint.hpp"
#include "training/evaluate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace secor::train {

using namespace secor::core;

Tensor frozen_semantic_features(const net::CorrectionNet& model, const Tensor& seg) {
    NoGradGuard ng;
    const auto& conv = model.semantic_trunk().embed;
    return core::conv2d(Var(seg), Var(conv.w.value()), Var(conv.b.value()), 1, 1).value();
}

namespace {

std::uint64_t aug_seed(std::uint64_t seed, long long epoch, std::size_t entry_idx) {
    return mix_seed(mix_seed(seed, 0xA46ull), static_cast<std::uint64_t>(epoch) * 1000003ull +
                                                  static_cast<std::uint64_t>(entry_idx));
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, long long epoch, std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(mix_seed(seed, 0xE70Cull), static_cast<std::uint64_t>(epoch)));
    fisher_yates(order, rng);
    return order;
}

} // namespace

TrainResult train(net::CorrectionNet& model, const TrainSettings& ts,
                  const loss::LossWeights& lw, const enc::Segmenter& segmenter,
                  const enc::VlEncoder& encoder, const enc::PromptSet& prompts,
                  const pgt::GammaTunerOptions& gopt, const img::DatasetManifest& manifest,
                  const std::string& pgt_cache_dir, const std::string& out_dir,
                  const std::string& resume_path, const img::DatasetManifest* val_manifest) {
    if (ts.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (!(ts.lr >= 0.0)) throw ConfigError("train.lr must be non-negative");
    if ((ts.steps <= 0) == (ts.epochs <= 0))
        throw ConfigError("train: exactly one of train.steps or train.epochs must be set (no default)");

    // well-exposed entries are reference material, never correction inputs
    std::vector<img::ManifestEntry> entries;
    int dropped_well = 0;
    for (const auto& e : manifest.entries) {
        if (e.tag == img::ExposureTag::Well) {
            ++dropped_well;
            continue;
        }
        entries.push_back(e);
    }
    if (dropped_well)
        std::cerr << "train: dropped " << dropped_well << " well-exposed entries from inputs\n";
    if (entries.empty()) throw ContractError("train: manifest has no usable entries");

    fs::create_directories(out_dir);
    pgt::PgtCache cache(pgt_cache_dir, prompts);
    for (const auto& e : entries) {
        if (cache.load(e.input)) continue;
        const auto out = pgt::generate_pseudo_gt(img::load_image(e.input), prompts, encoder, gopt);
        cache.store(e.input, out);
    }

    const std::size_t n = entries.size();
    const long long batches_per_epoch =
        static_cast<long long>((n + static_cast<std::size_t>(ts.batch_size) - 1) /
                               static_cast<std::size_t>(ts.batch_size));
    const long long total_steps =
        ts.steps > 0 ? ts.steps : ts.epochs * batches_per_epoch;

    Adam adam(model.params(), ts.lr, ts.adam_beta1, ts.adam_beta2);
    long long start_step = 0;
    if (!resume_path.empty()) {
        CheckpointExtra extra;
        load_checkpoint(resume_path, model, &adam, &extra);
        start_step = extra.step;
    }

    const Tensor text_w = encoder.encode_prompt_tensor(prompts.well);
    const Tensor text_u = encoder.encode_prompt_tensor(prompts.under);
    const Tensor text_o = encoder.encode_prompt_tensor(prompts.over);

    const std::string log_path = (fs::path(out_dir) / "train_log.jsonl").string();
    std::ofstream log(log_path, start_step > 0 ? std::ios::app : std::ios::trunc);
    if (!log) throw IoError("cannot write training log: " + log_path);

    const std::string final_path = (fs::path(out_dir) / "checkpoint.secor").string();
    std::string last_saved = resume_path;
    std::string best_path;
    double best_psnr = -1.0;

    const bool need_sfc = lw.use_spc && lw.use_sfc;
    const bool need_ipa = lw.use_spc && lw.use_ipa;

    TrainResult result;
    long long cur_epoch = -1;
    std::vector<std::size_t> order;
    for (long long step = start_step; step < total_steps; ++step) {
        const long long epoch = step / batches_per_epoch;
        const long long batch_idx = step % batches_per_epoch;
        if (epoch != cur_epoch) {
            cur_epoch = epoch;
            order = epoch_order(ts.seed, epoch, n);
        }

        const std::size_t begin = static_cast<std::size_t>(batch_idx) * ts.batch_size;
        const std::size_t end = std::min(n, begin + static_cast<std::size_t>(ts.batch_size));

        Var batch_total;
        double sum_mse = 0, sum_cos = 0, sum_sfc = 0, sum_ipa = 0;
        try {
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t idx = order[k];
                const auto& entry = entries[idx];

                img::Image input = img::load_image(entry.input);
                auto cached = cache.load(entry.input);
                if (!cached)
                    throw IntegrityError("pseudo-GT cache entry vanished for " + entry.input);

                const std::uint64_t aseed = aug_seed(ts.seed, epoch, idx);
                img::Image in_aug =
                    img::resize_and_augment(input, ts.input_size, ts.augment, ts.augment, aseed);
                img::Image pgt_aug = img::resize_and_augment(cached->image, ts.input_size,
                                                             ts.augment, ts.augment, aseed);

                const Tensor seg_in = segmenter.segment(in_aug);
                Var out = model.forward(Var(in_aug.to_tensor()), Var(seg_in));
                if (!out.value().all_finite())
                    throw NumericError("non-finite network output");

                loss::SemanticFeatureTriple triple;
                if (need_sfc) {
                    const Tensor seg_out = segmenter.segment(img::Image::from_tensor(out.value()));
                    const Tensor seg_pgt = segmenter.segment(pgt_aug);
                    triple.out_feat = Var(frozen_semantic_features(model, seg_out));
                    triple.pgt_feat = Var(frozen_semantic_features(model, seg_pgt));
                    triple.in_feat = Var(frozen_semantic_features(model, seg_in));
                }
                loss::PromptSims sims;
                if (need_ipa) {
                    Var e_out = encoder.encode_image(out);
                    sims.well = cosine_sim(e_out, Var(text_w));
                    sims.under = cosine_sim(e_out, Var(text_u));
                    sims.over = cosine_sim(e_out, Var(text_o));
                }

                const auto res = loss::total_loss(out, Var(pgt_aug.to_tensor()),
                                                  need_sfc ? &triple : nullptr,
                                                  need_ipa ? &sims : nullptr, lw);
                sum_mse += res.mse;
                sum_cos += res.cos;
                sum_sfc += res.sfc;
                sum_ipa += res.ipa;
                batch_total = batch_total.defined() ? add(batch_total, res.total) : res.total;
            }
            if (!std::isfinite(batch_total.value()[0])) throw NumericError("non-finite loss");
        } catch (const NumericError& e) {
            // abort, keeping and naming the last good checkpoint
            throw NumericError("train aborted at step " + std::to_string(step + 1) + ": " +
                               e.what() + "; last good checkpoint: " +
                               (last_saved.empty() ? "<none>" : last_saved));
        }

        const double inv = 1.0 / static_cast<double>(end - begin);
        Var loss = mul_c(batch_total, inv);
        const double lv = loss.value()[0];

        adam.zero_grad();
        loss.backward();
        adam.step();

        log << json({{"step", step + 1},
                     {"mse", sum_mse * inv},
                     {"cos", sum_cos * inv},
                     {"sfc", sum_sfc * inv},
                     {"ipa", sum_ipa * inv},
                     {"total", lv}})
                   .dump()
            << "\n";
        log.flush();
        result.loss_curve.push_back(lv);

        if (ts.checkpoint_every > 0 && (step + 1) % ts.checkpoint_every == 0 &&
            step + 1 < total_steps) {
            const std::string p =
                (fs::path(out_dir) / ("checkpoint_step" + std::to_string(step + 1) + ".secor")).string();
            save_checkpoint(p, model, &adam, {step + 1, epoch});
            last_saved = p;
            if (val_manifest) {
                const auto report = evaluate(model, segmenter, *val_manifest);
                if (report.average_psnr > best_psnr) {
                    best_psnr = report.average_psnr;
                    best_path = (fs::path(out_dir) / "best.secor").string();
                    save_checkpoint(best_path, model, &adam, {step + 1, epoch});
                }
            }
        }
    }

    save_checkpoint(final_path, model, &adam,
                    {total_steps, total_steps > 0 ? (total_steps - 1) / batches_per_epoch : 0});
    result.final_checkpoint = final_path;
    result.best_checkpoint = best_path;
    result.steps_run = total_steps - start_step;
    return result;
}

} // namespace secor::train
