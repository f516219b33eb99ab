#include "core/serialize.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace secor::core {

Var ParamStore::add(const std::string& name, Tensor init) {
    if (index_.count(name)) throw ContractError("parameter registered twice: " + name);
    Var v(std::move(init), true);
    index_[name] = items_.size();
    items_.emplace_back(name, v);
    return v;
}

const Var& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("unknown parameter: " + name);
    return items_[it->second].second;
}

std::size_t ParamStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& [name, v] : items_) n += v.numel();
    return n;
}

void ParamStore::zero_grad() {
    for (auto& [name, v] : items_) v.zero_grad();
}

std::string sha256_hex(const void* data, std::size_t len) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int mdlen = 0;
    if (!EVP_Digest(data, len, md, &mdlen, EVP_sha256(), nullptr))
        throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out(mdlen * 2, '0');
    for (unsigned int i = 0; i < mdlen; ++i) {
        out[2 * i] = hex[md[i] >> 4];
        out[2 * i + 1] = hex[md[i] & 0xF];
    }
    return out;
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string sha256_file_hex(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file for hashing: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

const Tensor* Container::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

namespace {
constexpr char kMagic[8] = {'S', 'E', 'C', 'O', 'R', 'T', 'N', 'S'};
}

void save_container(const Container& c, const std::string& path) {
    json dir = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : c.tensors) {
        const std::uint64_t nbytes = t.numel() * sizeof(double);
        dir.push_back({{"name", name},
                       {"shape", t.shape},
                       {"dtype", "f64"},
                       {"offset", offset},
                       {"nbytes", nbytes},
                       {"sha256", sha256_hex(t.data.data(), nbytes)}});
        offset += nbytes;
    }
    json header = {{"format_version", 1}, {"kind", c.kind}, {"meta", c.meta}, {"tensors", dir}};
    const std::string hs = header.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write container: " + path);
    f.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = hs.size();
    f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : c.tensors)
        f.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!f) throw IoError("short write: " + path);
}

Container load_container(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open container: " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IntegrityError("bad container magic: " + path);
    std::uint64_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!f || hlen > (1ull << 30)) throw IntegrityError("bad container header length: " + path);
    std::string hs(hlen, '\0');
    f.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!f) throw IntegrityError("truncated container header: " + path);

    json header;
    try {
        header = json::parse(hs);
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("corrupt container manifest: ") + e.what());
    }

    Container c;
    c.kind = header.value("kind", "");
    if (header.contains("meta"))
        for (auto& [k, v] : header["meta"].items()) c.meta[k] = v.get<std::string>();

    for (const auto& entry : header["tensors"]) {
        Tensor t(entry["shape"].get<std::vector<int>>());
        const std::uint64_t nbytes = entry["nbytes"].get<std::uint64_t>();
        if (nbytes != t.numel() * sizeof(double))
            throw IntegrityError("tensor size mismatch in manifest: " + entry["name"].get<std::string>());
        f.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(nbytes));
        if (!f) throw IntegrityError("truncated tensor payload: " + entry["name"].get<std::string>());
        const std::string got = sha256_hex(t.data.data(), nbytes);
        if (got != entry["sha256"].get<std::string>())
            throw IntegrityError("tensor checksum mismatch: " + entry["name"].get<std::string>());
        c.tensors.emplace_back(entry["name"].get<std::string>(), std::move(t));
    }
    return c;
}

} // namespace secor::core
