#include "training/checkpoint.hpp"

namespace secor::train {

using namespace secor::core;

void save_checkpoint(const std::string& path, const net::CorrectionNet& model, const Adam* opt,
                     const CheckpointExtra& extra) {
    Container c;
    c.kind = "checkpoint";
    c.meta["config_hash"] = model.config().hash();
    c.meta["network_config"] = model.config().to_json().dump();
    c.meta["step"] = std::to_string(extra.step);
    c.meta["epoch"] = std::to_string(extra.epoch);
    for (const auto& [name, p] : model.params().items())
        c.tensors.emplace_back(name, p.value());
    if (opt) {
        c.meta["adam_t"] = std::to_string(opt->t);
        const auto& items = model.params().items();
        for (std::size_t i = 0; i < items.size(); ++i) {
            c.tensors.emplace_back("adam.m." + items[i].first, opt->m[i]);
            c.tensors.emplace_back("adam.v." + items[i].first, opt->v[i]);
        }
    }
    save_container(c, path);
}

net::NetworkConfig checkpoint_config(const std::string& path) {
    Container c = load_container(path);
    if (c.kind != "checkpoint") throw IntegrityError("not a checkpoint file: " + path);
    auto it = c.meta.find("network_config");
    if (it == c.meta.end()) throw IntegrityError("checkpoint missing network config: " + path);
    return net::NetworkConfig::from_json(nlohmann::json::parse(it->second));
}

void load_checkpoint(const std::string& path, net::CorrectionNet& model, Adam* opt,
                     CheckpointExtra* extra, bool force) {
    Container c = load_container(path);
    if (c.kind != "checkpoint") throw IntegrityError("not a checkpoint file: " + path);

    const std::string want = model.config().hash();
    const auto hash_it = c.meta.find("config_hash");
    const std::string got = hash_it == c.meta.end() ? "" : hash_it->second;
    if (got != want && !force)
        throw IntegrityError("checkpoint config hash mismatch (" + got.substr(0, 12) + " vs " +
                             want.substr(0, 12) + "); pass force to override");

    for (auto& [name, p] : model.params().items()) {
        const Tensor* t = c.find(name);
        if (!t) throw IntegrityError("checkpoint missing tensor: " + name);
        if (t->shape != p.shape())
            throw IntegrityError("checkpoint tensor shape mismatch: " + name);
        p.value() = *t;
    }
    if (opt) {
        const auto& items = model.params().items();
        for (std::size_t i = 0; i < items.size(); ++i) {
            const Tensor* tm = c.find("adam.m." + items[i].first);
            const Tensor* tv = c.find("adam.v." + items[i].first);
            if (!tm || !tv) throw IntegrityError("checkpoint missing optimizer state");
            opt->m[i] = *tm;
            opt->v[i] = *tv;
        }
        auto it = c.meta.find("adam_t");
        opt->t = it == c.meta.end() ? 0 : std::stoll(it->second);
    }
    if (extra) {
        auto step_it = c.meta.find("step");
        auto epoch_it = c.meta.find("epoch");
        extra->step = step_it == c.meta.end() ? 0 : std::stoll(step_it->second);
        extra->epoch = epoch_it == c.meta.end() ? 0 : std::stoll(epoch_it->second);
    }
}

} // namespace secor::train
