#include "training/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace secor::train {

using namespace secor::core;

img::Image run_inference(const net::CorrectionNet& model, const enc::Segmenter& segmenter,
                         const img::Image& input) {
    NoGradGuard ng;
    const Tensor seg = segmenter.segment(input);
    Var out = model.forward(input.to_tensor(), seg);
    return img::Image::from_tensor(out.value());
}

EvalReport evaluate(const net::CorrectionNet& model, const enc::Segmenter& segmenter,
                    const img::DatasetManifest& manifest) {
    EvalReport report;
    struct Acc {
        int count = 0;
        double psnr = 0.0, ssim = 0.0;
    };
    std::map<std::string, Acc> acc;

    for (const auto& e : manifest.entries) {
        if (e.reference.empty()) {
            std::cerr << "evaluate: skipping " << e.input << " (no reference)\n";
            ++report.skipped;
            continue;
        }
        const img::Image input = img::load_image(e.input);
        const img::Image ref = img::load_image(e.reference);
        const img::Image out = run_inference(model, segmenter, input);
        const double p = img::psnr(out, ref);
        const double s = img::ssim(out, ref);
        const std::string tag = img::tag_name(e.tag);
        auto& a = acc[tag];
        ++a.count;
        a.psnr += p;
        a.ssim += s;
        report.per_image.push_back({e.input, tag, p, s});
    }

    for (const auto& [tag, a] : acc)
        report.groups.emplace_back(
            tag, EvalGroupStats{a.count, a.psnr / a.count, a.ssim / a.count});

    auto find_group = [&](const std::string& t) -> const EvalGroupStats* {
        for (const auto& [tag, g] : report.groups)
            if (tag == t) return &g;
        return nullptr;
    };
    const EvalGroupStats* u = find_group("under");
    const EvalGroupStats* o = find_group("over");
    if (u && o) {
        report.average_psnr = 0.5 * (u->psnr + o->psnr);
        report.average_ssim = 0.5 * (u->ssim + o->ssim);
    } else if (u || o) {
        const EvalGroupStats* g = u ? u : o;
        report.average_psnr = g->psnr;
        report.average_ssim = g->ssim;
    } else if (!report.per_image.empty()) {
        double p = 0.0, s = 0.0;
        for (const auto& e : report.per_image) {
            p += e.psnr;
            s += e.ssim;
        }
        report.average_psnr = p / static_cast<double>(report.per_image.size());
        report.average_ssim = s / static_cast<double>(report.per_image.size());
    }
    return report;
}

namespace {
json psnr_json(double v) {
    // JSON has no infinity literal; identical images serialize as a sentinel
    return std::isinf(v) ? json("infinite") : json(v);
}
} // namespace

void save_eval_report(const EvalReport& r, const std::string& path) {
    json groups = json::object();
    for (const auto& [tag, g] : r.groups)
        groups[tag] = {{"count", g.count}, {"psnr", psnr_json(g.psnr)}, {"ssim", g.ssim}};
    json per = json::array();
    for (const auto& e : r.per_image)
        per.push_back(
            {{"input", e.input}, {"tag", e.tag}, {"psnr", psnr_json(e.psnr)}, {"ssim", e.ssim}});
    json j = {{"groups", groups},
              {"average", {{"psnr", psnr_json(r.average_psnr)}, {"ssim", r.average_ssim}}},
              {"skipped", r.skipped},
              {"per_image", per}};
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write eval report: " + path);
    f << j.dump(2) << "\n";
}

std::string eval_report_table(const EvalReport& r) {
    std::ostringstream os;
    auto row = [&](const std::string& name, double psnr, double ssim, int count) {
        os << "  " << name;
        for (std::size_t i = name.size(); i < 10; ++i) os << ' ';
        char buf[80];
        if (std::isinf(psnr))
            std::snprintf(buf, sizeof(buf), "      inf  %7.4f", ssim);
        else
            std::snprintf(buf, sizeof(buf), "%9.4f  %7.4f", psnr, ssim);
        os << buf;
        if (count >= 0) os << "  (" << count << " images)";
        os << "\n";
    };
    os << "  group         PSNR     SSIM\n";
    for (const auto& [tag, g] : r.groups) row(tag, g.psnr, g.ssim, g.count);
    row("average", r.average_psnr, r.average_ssim, -1);
    if (r.skipped) os << "  skipped " << r.skipped << " entries without references\n";
    return os.str();
}

int infer_dir(const net::CorrectionNet& model, const enc::Segmenter& segmenter,
              const std::string& input_dir, const std::string& out_dir) {
    if (!fs::is_directory(input_dir)) throw IoError("input directory missing: " + input_dir);
    fs::create_directories(out_dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(input_dir))
        if (e.is_regular_file() && img::is_image_file(e.path().string()))
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    int count = 0;
    for (const auto& path : files) {
        const img::Image out = run_inference(model, segmenter, img::load_image(path));
        const std::string dst = (fs::path(out_dir) / (fs::path(path).stem().string() + ".png")).string();
        img::save_image_png(out, dst);
        ++count;
    }
    return count;
}

} // namespace secor::train
