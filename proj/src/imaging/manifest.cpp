#include "imaging/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "common/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace secor::img {

const char* tag_name(ExposureTag t) {
    switch (t) {
    case ExposureTag::Under: return "under";
    case ExposureTag::Over: return "over";
    case ExposureTag::Well: return "well";
    default: return "unknown";
    }
}

ExposureTag tag_from_name(const std::string& s) {
    if (s == "under") return ExposureTag::Under;
    if (s == "over") return ExposureTag::Over;
    if (s == "well") return ExposureTag::Well;
    if (s == "unknown") return ExposureTag::Unknown;
    throw FormatError("unknown exposure tag: " + s);
}

namespace {

std::vector<std::string> list_images(const fs::path& dir) {
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_image_file(e.path().string()))
            out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

bool numeric_stem(const std::string& stem) {
    if (stem.empty()) return false;
    for (char c : stem)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

DatasetManifest build_flat(const fs::path& root) {
    DatasetManifest m;
    for (auto& p : list_images(root))
        m.entries.push_back({p, ExposureTag::Unknown, ""});
    return m;
}

DatasetManifest build_msec(const fs::path& root, const std::map<std::string, std::string>& folder_tags) {
    std::map<std::string, ExposureTag> dirs = {
        {"under", ExposureTag::Under}, {"over", ExposureTag::Over}};
    for (const auto& [folder, tag] : folder_tags) dirs[folder] = tag_from_name(tag);

    // references indexed by stem
    std::map<std::string, std::string> refs;
    for (auto& p : list_images(root / "gt"))
        refs[fs::path(p).stem().string()] = p;

    DatasetManifest m;
    for (const auto& [folder, tag] : dirs) {
        if (tag == ExposureTag::Well) continue; // well-exposed folders are reference-only
        for (auto& p : list_images(root / folder)) {
            auto it = refs.find(fs::path(p).stem().string());
            m.entries.push_back({p, tag, it == refs.end() ? "" : it->second});
        }
    }
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.input < b.input; });
    return m;
}

DatasetManifest build_sice(const fs::path& root) {
    DatasetManifest m;
    std::vector<fs::path> scenes;
    if (fs::is_directory(root))
        for (const auto& e : fs::directory_iterator(root))
            if (e.is_directory()) scenes.push_back(e.path());
    std::sort(scenes.begin(), scenes.end());

    for (const auto& scene : scenes) {
        auto levels = list_images(scene);
        if (levels.size() < 3) continue;
        // numeric level names sort by value, otherwise keep lexicographic
        const bool all_numeric = std::all_of(levels.begin(), levels.end(), [](const std::string& p) {
            return numeric_stem(fs::path(p).stem().string());
        });
        if (all_numeric)
            std::sort(levels.begin(), levels.end(), [](const std::string& a, const std::string& b) {
                return std::stol(fs::path(a).stem().string()) < std::stol(fs::path(b).stem().string());
            });
        const std::string& ref = levels[levels.size() / 2];
        m.entries.push_back({levels[1], ExposureTag::Under, ref});
        m.entries.push_back({levels.back(), ExposureTag::Over, ref});
    }
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.input < b.input; });
    return m;
}

} // namespace

DatasetManifest build_manifest(const std::string& root, const std::string& layout,
                               const std::string& split,
                               const std::map<std::string, std::string>& folder_tags) {
    if (!fs::exists(root)) throw IoError("dataset root does not exist: " + root);
    if (split != "train" && split != "test") throw ContractError("split must be train or test");

    DatasetManifest m;
    if (layout == "flat")
        m = build_flat(root);
    else if (layout == "msec")
        m = build_msec(root, folder_tags);
    else if (layout == "sice")
        m = build_sice(root);
    else
        throw ConfigError("unknown dataset layout: " + layout);

    m.split = split;
    m.layout = layout;
    if (m.entries.empty()) throw IoError("no entries found under " + root + " for layout " + layout);
    for (const auto& e : m.entries) {
        if (!fs::exists(e.input)) throw IoError("manifest input missing: " + e.input);
        if (!e.reference.empty() && !fs::exists(e.reference))
            throw IoError("manifest reference missing: " + e.reference);
    }
    return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
    json entries = json::array();
    for (const auto& e : m.entries)
        entries.push_back({{"input", e.input},
                           {"tag", tag_name(e.tag)},
                           {"reference", e.reference.empty() ? json(nullptr) : json(e.reference)}});
    json j = {{"split", m.split}, {"layout", m.layout}, {"entries", entries}};
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write manifest: " + path);
    f << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad manifest JSON: ") + e.what());
    }
    DatasetManifest m;
    m.split = j.value("split", "train");
    m.layout = j.value("layout", "flat");
    for (const auto& e : j["entries"]) {
        ManifestEntry ent;
        ent.input = e["input"].get<std::string>();
        ent.tag = tag_from_name(e["tag"].get<std::string>());
        if (e.contains("reference") && !e["reference"].is_null())
            ent.reference = e["reference"].get<std::string>();
        m.entries.push_back(std::move(ent));
    }
    return m;
}

} // namespace secor::img
