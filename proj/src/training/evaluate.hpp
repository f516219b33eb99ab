#pragma once

#include <string>
#include <vector>

#include "encoders/backend.hpp"
#include "imaging/manifest.hpp"
#include "imaging/metrics.hpp"
#include "network/model.hpp"

namespace secor::train {

struct EvalGroupStats {
    int count = 0;
    double psnr = 0.0; // may be +inf
    double ssim = 0.0;
};

struct EvalPerImage {
    std::string input;
    std::string tag;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct EvalReport {
    std::vector<std::pair<std::string, EvalGroupStats>> groups;
    double average_psnr = 0.0; // mean of the under/over aggregates when both exist
    double average_ssim = 0.0;
    int skipped = 0;
    std::vector<EvalPerImage> per_image;
};

img::Image run_inference(const net::CorrectionNet& model, const enc::Segmenter& segmenter,
                         const img::Image& input);

EvalReport evaluate(const net::CorrectionNet& model, const enc::Segmenter& segmenter,
                    const img::DatasetManifest& manifest);

void save_eval_report(const EvalReport& r, const std::string& path);
std::string eval_report_table(const EvalReport& r);

// Corrects every image under input_dir into out_dir/<stem>.png; returns count.
int infer_dir(const net::CorrectionNet& model, const enc::Segmenter& segmenter,
              const std::string& input_dir, const std::string& out_dir);

} // namespace secor::train
