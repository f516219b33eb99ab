#include "common/config.hpp"

namespace secor {

using nlohmann::json;

json AppConfig::default_json() {
    AppConfig d;
    return {
        {"seed", d.seed},
        {"encoder",
         {{"backend", d.encoder.backend},
          {"weights", d.encoder.weights},
          {"embed_dim", d.encoder.embed_dim},
          {"anchor_contrast", d.encoder.anchor_contrast},
          {"stub_seed", d.encoder.seed}}},
        {"segmenter",
         {{"backend", d.segmenter.backend}, {"weights", d.segmenter.weights}, {"bands", d.segmenter.bands}}},
        {"network", net::NetworkConfig{}.to_json()},
        {"loss",
         {{"lambda1", d.loss.lambda1},
          {"lambda2", d.loss.lambda2},
          {"lambda3", d.loss.lambda3},
          {"beta1", d.loss.beta1},
          {"beta2", d.loss.beta2},
          {"eps", d.loss.eps},
          {"use_spc", d.loss.use_spc},
          {"use_ipa", d.loss.use_ipa},
          {"use_sfc", d.loss.use_sfc},
          {"use_cos", d.loss.use_cos},
          {"gram_metric", d.loss.gram_metric}}},
        {"train",
         {{"lr", d.train.lr},
          {"adam_beta1", d.train.adam_beta1},
          {"adam_beta2", d.train.adam_beta2},
          {"batch_size", d.train.batch_size},
          {"input_size", d.train.input_size},
          {"steps", d.train.steps},
          {"epochs", d.train.epochs},
          {"checkpoint_every", d.train.checkpoint_every},
          {"augment", d.train.augment}}},
        {"pgt",
         {{"gamma_init_under", d.gamma.gamma_init_under},
          {"gamma_init_over", d.gamma.gamma_init_over},
          {"gamma_min", d.gamma.gamma_min},
          {"gamma_max", d.gamma.gamma_max},
          {"lr", d.gamma.lr},
          {"tol", d.gamma.tol},
          {"max_iters", d.gamma.max_iters}}},
        {"prompt_tuning",
         {{"steps", d.prompt_tuning.steps},
          {"lr", d.prompt_tuning.lr},
          {"temperature", d.prompt_tuning.temperature}}},
        {"manifest", {{"folder_tags", json::object()}}},
        {"checkpoint", {{"force_load", d.force_load}}},
    };
}

AppConfig AppConfig::from_json(const json& j) {
    AppConfig c;
    try {
        c.seed = j.value("seed", c.seed);

        const json& e = j.value("encoder", json::object());
        c.encoder.backend = e.value("backend", c.encoder.backend);
        c.encoder.weights = e.value("weights", c.encoder.weights);
        c.encoder.embed_dim = e.value("embed_dim", c.encoder.embed_dim);
        c.encoder.anchor_contrast = e.value("anchor_contrast", c.encoder.anchor_contrast);
        c.encoder.seed = e.value("stub_seed", c.encoder.seed);
        c.encoder.prompt_dim = c.encoder.embed_dim;

        const json& s = j.value("segmenter", json::object());
        c.segmenter.backend = s.value("backend", c.segmenter.backend);
        c.segmenter.weights = s.value("weights", c.segmenter.weights);
        c.segmenter.bands = s.value("bands", c.segmenter.bands);

        c.network = net::NetworkConfig::from_json(j.value("network", json::object()));
        // semantic channels always follow the segmenter
        c.network.semantic_channels = c.segmenter.bands;

        const json& l = j.value("loss", json::object());
        c.loss.lambda1 = l.value("lambda1", c.loss.lambda1);
        c.loss.lambda2 = l.value("lambda2", c.loss.lambda2);
        c.loss.lambda3 = l.value("lambda3", c.loss.lambda3);
        c.loss.beta1 = l.value("beta1", c.loss.beta1);
        c.loss.beta2 = l.value("beta2", c.loss.beta2);
        c.loss.eps = l.value("eps", c.loss.eps);
        c.loss.use_spc = l.value("use_spc", c.loss.use_spc);
        c.loss.use_ipa = l.value("use_ipa", c.loss.use_ipa);
        c.loss.use_sfc = l.value("use_sfc", c.loss.use_sfc);
        c.loss.use_cos = l.value("use_cos", c.loss.use_cos);
        c.loss.gram_metric = l.value("gram_metric", c.loss.gram_metric);
        if (c.loss.lambda1 < 0 || c.loss.lambda2 < 0 || c.loss.lambda3 < 0 || c.loss.beta1 < 0 ||
            c.loss.beta2 < 0 || c.loss.eps <= 0)
            throw ConfigError("loss weights must be non-negative with eps > 0");

        const json& t = j.value("train", json::object());
        c.train.lr = t.value("lr", c.train.lr);
        c.train.adam_beta1 = t.value("adam_beta1", c.train.adam_beta1);
        c.train.adam_beta2 = t.value("adam_beta2", c.train.adam_beta2);
        c.train.batch_size = t.value("batch_size", c.train.batch_size);
        c.train.input_size = t.value("input_size", c.train.input_size);
        c.train.steps = t.value("steps", c.train.steps);
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.checkpoint_every = t.value("checkpoint_every", c.train.checkpoint_every);
        c.train.augment = t.value("augment", c.train.augment);
        c.train.seed = c.seed;

        const json& g = j.value("pgt", json::object());
        c.gamma.gamma_init_under = g.value("gamma_init_under", c.gamma.gamma_init_under);
        c.gamma.gamma_init_over = g.value("gamma_init_over", c.gamma.gamma_init_over);
        c.gamma.gamma_min = g.value("gamma_min", c.gamma.gamma_min);
        c.gamma.gamma_max = g.value("gamma_max", c.gamma.gamma_max);
        c.gamma.lr = g.value("lr", c.gamma.lr);
        c.gamma.tol = g.value("tol", c.gamma.tol);
        c.gamma.max_iters = g.value("max_iters", c.gamma.max_iters);
        if (!(c.gamma.gamma_min > 0) || c.gamma.gamma_max <= c.gamma.gamma_min)
            throw ConfigError("pgt gamma bounds must satisfy 0 < gamma_min < gamma_max");

        const json& p = j.value("prompt_tuning", json::object());
        c.prompt_tuning.steps = p.value("steps", c.prompt_tuning.steps);
        c.prompt_tuning.lr = p.value("lr", c.prompt_tuning.lr);
        c.prompt_tuning.temperature = p.value("temperature", c.prompt_tuning.temperature);

        const json& m = j.value("manifest", json::object());
        if (m.contains("folder_tags"))
            for (auto& [k, v] : m["folder_tags"].items()) c.folder_tags[k] = v.get<std::string>();

        c.force_load = j.value("checkpoint", json::object()).value("force_load", false);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad config value: ") + ex.what());
    }
    return c;
}

json merge_config(json base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) return overlay;
    for (auto& [k, v] : overlay.items()) {
        if (base.contains(k) && base[k].is_object() && v.is_object())
            base[k] = merge_config(base[k], v);
        else
            base[k] = v;
    }
    return base;
}

void set_by_path(json& root, const std::string& dotted, const json& value) {
    json* cur = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw ConfigError("empty key segment in: " + dotted);
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

const json* get_by_path(const json& root, const std::string& dotted) {
    const json* cur = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) return cur;
        start = dot + 1;
    }
}

} // namespace secor
