#include "imaging/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

#include "common/error.hpp"

namespace secor::img {

core::Tensor Image::to_tensor() const {
    core::Tensor t({3, height, width});
    t.data = data;
    return t;
}

Image Image::from_tensor(const core::Tensor& t) {
    if (t.ndim() != 3 || t.dim(0) != 3) throw ContractError("image tensor must be {3,H,W}");
    Image im(t.dim(1), t.dim(2));
    im.data = t.data;
    return im;
}

double Image::mean_luma() const {
    double acc = 0.0;
    for (double v : data) acc += v;
    return data.empty() ? 0.0 : acc / static_cast<double>(data.size());
}

void Image::validate(const char* what) const {
    if (height <= 0 || width <= 0 || data.size() != 3ull * height * width)
        throw ContractError(std::string(what) + ": empty or inconsistent image");
    for (double v : data)
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ContractError(std::string(what) + ": values must be finite and in [0,1]");
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const char* suf) {
    const std::size_t n = std::strlen(suf);
    if (s.size() < n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        char a = s[s.size() - n + i];
        if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
        if (a != suf[i]) return false;
    }
    return true;
}

Image load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png init failed");
    }
    std::vector<png_bytep> rows;
    std::vector<png_byte> buf;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("failed to decode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (bit_depth < 8) png_set_expand(png);
    png_read_update_info(png, info);
    bit_depth = png_get_bit_depth(png, info);
    color_type = png_get_color_type(png, info);

    if (color_type != PNG_COLOR_TYPE_RGB) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("expected a 3-channel RGB image: " + path);
    }
    if (bit_depth != 8 && bit_depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("expected 8- or 16-bit PNG: " + path);
    }

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buf.resize(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image im(static_cast<int>(h), static_cast<int>(w));
    const double maxv = bit_depth == 8 ? 255.0 : 65535.0;
    for (png_uint_32 y = 0; y < h; ++y) {
        const png_byte* row = buf.data() + y * rowbytes;
        for (png_uint_32 x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double v;
                if (bit_depth == 8) {
                    v = row[3 * x + c];
                } else {
                    // PNG stores 16-bit samples big-endian
                    const png_byte hi = row[6 * x + 2 * c];
                    const png_byte lo = row[6 * x + 2 * c + 1];
                    v = static_cast<double>((hi << 8) | lo);
                }
                im.at(c, static_cast<int>(y), static_cast<int>(x)) = v / maxv;
            }
    }
    return im;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jmp;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jmp, 1);
}

Image load_jpeg(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open image: " + path);

    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jmp)) {
        jpeg_destroy_decompress(&cinfo);
        throw FormatError("failed to decode JPEG: " + path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    if (cinfo.output_components != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw FormatError("expected a 3-channel image: " + path);
    }

    Image im(static_cast<int>(cinfo.output_height), static_cast<int>(cinfo.output_width));
    std::vector<JSAMPLE> row(3ull * cinfo.output_width);
    JSAMPROW rp = row.data();
    int y = 0;
    while (cinfo.output_scanline < cinfo.output_height) {
        jpeg_read_scanlines(&cinfo, &rp, 1);
        for (unsigned x = 0; x < cinfo.output_width; ++x)
            for (int c = 0; c < 3; ++c)
                im.at(c, y, static_cast<int>(x)) = row[3 * x + c] / 255.0;
        ++y;
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return im;
}

} // namespace

bool is_image_file(const std::string& path) {
    return has_suffix(path, ".png") || has_suffix(path, ".jpg") || has_suffix(path, ".jpeg");
}

Image load_image(const std::string& path) {
    Image im;
    if (has_suffix(path, ".png"))
        im = load_png(path);
    else if (has_suffix(path, ".jpg") || has_suffix(path, ".jpeg"))
        im = load_jpeg(path);
    else
        throw FormatError("unsupported image extension: " + path);
    im.validate("load_image");
    return im;
}

void save_image_png(const Image& im, const std::string& path) {
    im.validate("save_image_png");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write image: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(im.width), static_cast<png_uint_32>(im.height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(3ull * im.width);
    for (int y = 0; y < im.height; ++y) {
        for (int x = 0; x < im.width; ++x)
            for (int c = 0; c < 3; ++c)
                row[3 * x + c] = static_cast<png_byte>(std::lround(im.at(c, y, x) * 255.0));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image gamma_transform(const Image& im, double gamma) {
    if (!(gamma > 0.0)) throw ContractError("gamma_transform: gamma must be positive");
    Image out(im.height, im.width);
    for (std::size_t i = 0; i < im.data.size(); ++i) {
        const double v = 1.0 - std::pow(1.0 - im.data[i], gamma);
        out.data[i] = std::min(1.0, std::max(0.0, v));
    }
    return out;
}

} // namespace secor::img
