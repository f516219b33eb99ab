#include "encoders/prompts.hpp"

#include <cmath>

#include "core/serialize.hpp"

namespace secor::enc {

using namespace secor::core;

PromptSet PromptSet::random_init(const VlEncoder& enc, std::uint64_t seed) {
    Rng rng(seed);
    auto unit = [&](void) {
        Tensor t({enc.prompt_dim()});
        double nrm = 0.0;
        for (auto& v : t.data) {
            v = rng.normal();
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        for (auto& v : t.data) v /= nrm;
        return t;
    };
    PromptSet p;
    p.well = unit();
    p.under = unit();
    p.over = unit();
    return p;
}

std::string PromptSet::hash() const {
    std::string bytes;
    for (const Tensor* t : {&well, &under, &over})
        bytes.append(reinterpret_cast<const char*>(t->data.data()), t->numel() * sizeof(double));
    return sha256_hex(bytes.data(), bytes.size());
}

std::string PromptSet::short_hash() const { return hash().substr(0, 16); }

void save_prompts(const PromptSet& p, const std::string& path) {
    Container c;
    c.kind = "prompts";
    c.meta["prompt_hash"] = p.hash();
    c.meta["classes"] = "well,under,over";
    c.tensors.emplace_back("prompt.well", p.well);
    c.tensors.emplace_back("prompt.under", p.under);
    c.tensors.emplace_back("prompt.over", p.over);
    save_container(c, path);
}

PromptSet load_prompts(const std::string& path, const VlEncoder& enc) {
    Container c = load_container(path);
    if (c.kind != "prompts") throw IntegrityError("not a prompt file: " + path);
    PromptSet p;
    const std::pair<const char*, Tensor*> slots[] = {
        {"prompt.well", &p.well}, {"prompt.under", &p.under}, {"prompt.over", &p.over}};
    for (const auto& [name, dst] : slots) {
        const Tensor* t = c.find(name);
        if (!t) throw IntegrityError(std::string("prompt file missing tensor ") + name);
        if (t->numel() != static_cast<std::size_t>(enc.prompt_dim()))
            throw IntegrityError("prompt dimension mismatch in " + path);
        *dst = *t;
    }
    return p;
}

} // namespace secor::enc
