#pragma once

#include <map>
#include <string>
#include <vector>

#include "imaging/image.hpp"

namespace secor::img {

enum class ExposureTag { Under, Over, Well, Unknown };

const char* tag_name(ExposureTag t);
ExposureTag tag_from_name(const std::string& s);

struct ManifestEntry {
    std::string input;
    ExposureTag tag = ExposureTag::Unknown;
    std::string reference; // empty when none
};

struct DatasetManifest {
    std::string split;  // "train" | "test"
    std::string layout; // "msec" | "sice" | "flat"
    std::vector<ManifestEntry> entries;
};

// Folder conventions:
//   msec: <root>/{under,over,gt}/<stem>.<ext>, inputs paired to gt by stem
//   sice: <root>/<scene>/<level>.<ext>, >=3 levels; 2nd/last level are the
//         under/over inputs, the middle level is the reference
//   flat: images directly under root, tag unknown
// Entries are sorted lexicographically by input path. `folder_tags` can remap
// additional msec-style folders to tags.
DatasetManifest build_manifest(const std::string& root, const std::string& layout,
                               const std::string& split,
                               const std::map<std::string, std::string>& folder_tags = {});

void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

} // namespace secor::img
