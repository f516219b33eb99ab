#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/autograd.hpp"

namespace secor::core {

// Ordered named-parameter registry; iteration order is registration order so
// optimizer walks and checkpoints are deterministic.
class ParamStore {
public:
    Var add(const std::string& name, Tensor init);
    const Var& get(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::vector<std::pair<std::string, Var>>& items() { return items_; }
    const std::vector<std::pair<std::string, Var>>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    std::size_t total_elements() const;

    void zero_grad();

private:
    std::vector<std::pair<std::string, Var>> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);

// Tensor container file: magic, length-prefixed JSON header (meta + tensor
// directory with per-tensor sha256), then raw little-endian f64 blobs.
struct Container {
    std::string kind;                          // "checkpoint" | "prompts"
    std::map<std::string, std::string> meta;   // flat string map
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor* find(const std::string& name) const;
};

void save_container(const Container& c, const std::string& path);
Container load_container(const std::string& path);

} // namespace secor::core
