#include "pseudogt/generator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "core/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace secor::pgt {

using namespace secor::core;
using enc::ExposureClass;

Classification classify_exposure(const img::Image& im, const enc::PromptSet& prompts,
                                 const enc::VlEncoder& encoder) {
    const Tensor e = encoder.encode_image(im);
    Classification c;
    c.sim_u = cosine_sim(e, encoder.encode_prompt_tensor(prompts.under));
    c.sim_o = cosine_sim(e, encoder.encode_prompt_tensor(prompts.over));
    c.cls = c.sim_o > c.sim_u ? ExposureClass::Over : ExposureClass::Under;
    return c;
}

Var gamma_image(const Tensor& image_chw, const Var& gamma) {
    if (gamma.numel() != 1) throw ContractError("gamma_image: gamma must be a scalar");
    const double g = gamma.value()[0];
    if (!(g > 0.0)) throw ContractError("gamma_image: gamma must be positive");
    Tensor out = image_chw;
    for (auto& v : out.data) v = 1.0 - std::pow(1.0 - v, g);
    return make_op(std::move(out), {gamma}, [gamma, image_chw, g](Node& n) {
        if (!gamma.requires_grad()) return;
        double acc = 0.0;
        for (std::size_t i = 0; i < image_chw.numel(); ++i) {
            const double t = 1.0 - image_chw[i];
            if (t <= 0.0) continue; // t^g * ln t -> 0
            acc -= n.grad[i] * std::pow(t, g) * std::log(t);
        }
        gamma.node()->ensure_grad()[0] += acc;
    });
}

namespace {

// f and df/dgamma in one pass.
std::pair<double, double> objective_with_grad(const img::Image& im, const Tensor& well_embed,
                                              const enc::VlEncoder& encoder, double gamma) {
    Var g(Tensor::scalar(gamma), true);
    Var transformed = gamma_image(im.to_tensor(), g);
    Var sim = cosine_sim(encoder.encode_image(transformed), Var(well_embed));
    const double f = sim.value()[0];
    sim.backward();
    return {f, g.grad()[0]};
}

} // namespace

double gamma_objective(const img::Image& im, const Tensor& well_embed,
                       const enc::VlEncoder& encoder, double gamma) {
    NoGradGuard ng;
    Var g(Tensor::scalar(gamma));
    Var transformed = gamma_image(im.to_tensor(), g);
    return cosine_sim(encoder.encode_image(transformed), Var(well_embed)).value()[0];
}

GammaResult tune_gamma(const img::Image& im, const Tensor& well_embed,
                       const enc::VlEncoder& encoder, double gamma0,
                       const GammaTunerOptions& opt) {
    auto clamp = [&](double g) { return std::min(opt.gamma_max, std::max(opt.gamma_min, g)); };
    auto f_at = [&](double g) { return gamma_objective(im, well_embed, encoder, g); };

    GammaResult r;
    double gamma = clamp(gamma0);
    auto [f, grad] = objective_with_grad(im, well_embed, encoder, gamma);
    if (!std::isfinite(f) || !std::isfinite(grad))
        throw NumericError("tune_gamma: non-finite objective or gradient");

    for (int it = 1; it <= opt.max_iters; ++it) {
        r.iterations = it;
        double d = opt.lr * grad;
        if (d == 0.0) {
            r.converged = true;
            break;
        }
        // expand while a doubled step keeps improving
        for (int e = 0; e < 30; ++e) {
            if (clamp(gamma + 2.0 * d) == clamp(gamma + d)) break;
            if (f_at(clamp(gamma + 2.0 * d)) <= f_at(clamp(gamma + d))) break;
            d *= 2.0;
        }
        // backtrack until the step is an ascent
        int halvings = 0;
        while (halvings < 40 && f_at(clamp(gamma + d)) < f) {
            d *= 0.5;
            ++halvings;
        }
        const double next = clamp(gamma + d);
        const double f_next = f_at(next);
        if (f_next < f) { // no ascent step exists at this scale
            r.converged = true;
            break;
        }
        const double delta = std::fabs(next - gamma);
        gamma = next;
        std::tie(f, grad) = objective_with_grad(im, well_embed, encoder, gamma);
        if (!std::isfinite(f) || !std::isfinite(grad))
            throw NumericError("tune_gamma: non-finite objective or gradient");
        if (delta < opt.tol) {
            r.converged = true;
            break;
        }
    }

    r.gamma = gamma;
    r.final_similarity = f;
    return r;
}

PgtOutput generate_pseudo_gt(const img::Image& im, const enc::PromptSet& prompts,
                             const enc::VlEncoder& encoder, const GammaTunerOptions& opt) {
    PgtOutput out;
    out.cls = classify_exposure(im, prompts, encoder);
    const double gamma0 =
        out.cls.cls == ExposureClass::Under ? opt.gamma_init_under : opt.gamma_init_over;
    const Tensor well_embed = encoder.encode_prompt_tensor(prompts.well);
    out.gamma = tune_gamma(im, well_embed, encoder, gamma0, opt);
    out.image = img::gamma_transform(im, out.gamma.gamma);
    return out;
}

PgtCache::PgtCache(std::string root, const enc::PromptSet& prompts)
    : root_(std::move(root)), prompt_hash_(prompts.short_hash()) {
    fs::create_directories(root_);
}

std::string PgtCache::key_for(const std::string& image_path) const {
    return sha256_file_hex(image_path) + "." + prompt_hash_;
}

std::string PgtCache::png_path(const std::string& key) const {
    return (fs::path(root_) / (key + ".png")).string();
}

std::string PgtCache::json_path(const std::string& key) const {
    return (fs::path(root_) / (key + ".json")).string();
}

std::optional<PgtOutput> PgtCache::load(const std::string& image_path) const {
    const std::string key = key_for(image_path);
    const std::string png = png_path(key);
    const std::string meta = json_path(key);
    if (!fs::exists(png) || !fs::exists(meta)) return std::nullopt;

    PgtOutput out;
    out.image = img::load_image(png);
    std::ifstream f(meta);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw IntegrityError("corrupt cache sidecar " + meta + ": " + e.what());
    }
    out.gamma.gamma = j.at("gamma").get<double>();
    out.gamma.final_similarity = j.value("final_similarity", 0.0);
    out.gamma.iterations = j.value("iterations", 0);
    out.gamma.converged = j.value("converged", true);
    out.cls.sim_u = j.at("sims").at("under").get<double>();
    out.cls.sim_o = j.at("sims").at("over").get<double>();
    out.cls.cls = std::string(j.at("class")) == "over" ? ExposureClass::Over : ExposureClass::Under;
    return out;
}

void PgtCache::store(const std::string& image_path, const PgtOutput& out) const {
    const std::string key = key_for(image_path);
    img::save_image_png(out.image, png_path(key));
    json j = {{"gamma", out.gamma.gamma},
              {"final_similarity", out.gamma.final_similarity},
              {"iterations", out.gamma.iterations},
              {"converged", out.gamma.converged},
              {"class", enc::class_name(out.cls.cls)},
              {"sims", {{"under", out.cls.sim_u}, {"over", out.cls.sim_o}}}};
    std::ofstream f(json_path(key), std::ios::trunc);
    if (!f) throw IoError("cannot write cache sidecar: " + json_path(key));
    f << j.dump(2) << "\n";
}

GenerateStats generate_pgt_dir(const std::string& input_dir, const enc::PromptSet& prompts,
                               const enc::VlEncoder& encoder, const GammaTunerOptions& opt,
                               const std::string& cache_dir) {
    if (!fs::is_directory(input_dir)) throw IoError("input directory missing: " + input_dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(input_dir))
        if (e.is_regular_file() && img::is_image_file(e.path().string()))
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());

    PgtCache cache(cache_dir, prompts);
    GenerateStats stats;
    for (const auto& path : files) {
        if (cache.load(path)) {
            ++stats.cached;
            continue;
        }
        const PgtOutput out = generate_pseudo_gt(img::load_image(path), prompts, encoder, opt);
        cache.store(path, out);
        ++stats.written;
    }
    return stats;
}

} // namespace secor::pgt
