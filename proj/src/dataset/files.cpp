#include <fmt/format.h>
#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "peye/dataset.hpp"
#include "peye/error.hpp"
#include "peye/simd/kernels.hpp"

namespace peye {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) fail(Errc::IoFailure, fmt::format("cannot open {}: {}", path.string(), std::strerror(errno)));
    return f;
}

struct PngError {
    std::jmp_buf jump;
    char message[256] = {0};
};

void on_png_error(png_structp png, png_const_charp msg) {
    auto* err = static_cast<PngError*>(png_get_error_ptr(png));
    std::snprintf(err->message, sizeof err->message, "%s", msg);
    std::longjmp(err->jump, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct PngSpec {
    int width, height, bit_depth, color_type;
    const std::uint8_t* data;  // raw rows, 16-bit samples in host order
    std::size_t row_bytes;
    const png_color* palette;
    int palette_size;
};

/// Returns false and fills `err.message` on libpng failure. Kept free of
/// objects with destructors because of the longjmp.
bool encode_png(std::FILE* fp, const PngSpec& spec, PngError& err) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
    if (png == nullptr) return false;
    png_infop info = png_create_info_struct(png);
    if (info == nullptr || setjmp(err.jump)) {
        png_destroy_write_struct(&png, info ? &info : nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(spec.width), static_cast<png_uint_32>(spec.height), spec.bit_depth,
                 spec.color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (spec.palette != nullptr) png_set_PLTE(png, info, spec.palette, spec.palette_size);
    png_set_compression_level(png, 1);
    png_write_info(png, info);
    if (spec.bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
    for (int y = 0; y < spec.height; ++y) {
        png_write_row(png, spec.data + static_cast<std::size_t>(y) * spec.row_bytes);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

void write_png(const fs::path& path, const PngSpec& spec) {
    FilePtr fp = open_file(path, "wb");
    PngError err;
    if (!encode_png(fp.get(), spec, err)) {
        fail(Errc::IoFailure, fmt::format("cannot encode {}: {}", path.string(), err.message));
    }
    if (std::fflush(fp.get()) != 0) fail(Errc::IoFailure, fmt::format("cannot write {}", path.string()));
}

struct DecodedHeader {
    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
};

bool decode_png(std::FILE* fp, DecodedHeader& hdr, std::vector<std::uint8_t>& bytes, std::vector<png_color>& palette,
                PngError& err) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
    if (png == nullptr) return false;
    png_infop info = png_create_info_struct(png);
    if (info == nullptr || setjmp(err.jump)) {
        png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    hdr.width = png_get_image_width(png, info);
    hdr.height = png_get_image_height(png, info);
    hdr.bit_depth = png_get_bit_depth(png, info);
    hdr.color_type = png_get_color_type(png, info);
    if (hdr.bit_depth < 8) png_set_packing(png);
    if (hdr.bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
    if (hdr.color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (hdr.color_type == PNG_COLOR_TYPE_PALETTE) {
        png_colorp plte = nullptr;
        int n = 0;
        if (png_get_PLTE(png, info, &plte, &n) != 0) palette.assign(plte, plte + n);
    }
    png_read_update_info(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    bytes.resize(row_bytes * hdr.height);
    for (png_uint_32 y = 0; y < hdr.height; ++y) png_read_row(png, bytes.data() + y * row_bytes, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoFailure, fmt::format("cannot open {} for writing", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::IoFailure, fmt::format("cannot write {}", path.string()));
}

}  // namespace

void write_png_rgb(const fs::path& path, int width, int height, const std::uint8_t* rgb) {
    write_png(path, {width, height, 8, PNG_COLOR_TYPE_RGB, rgb, static_cast<std::size_t>(width) * 3, nullptr, 0});
}

void write_png_gray16(const fs::path& path, int width, int height, const std::uint16_t* values) {
    write_png(path, {width, height, 16, PNG_COLOR_TYPE_GRAY, reinterpret_cast<const std::uint8_t*>(values),
                     static_cast<std::size_t>(width) * 2, nullptr, 0});
}

void write_png_indexed(const fs::path& path, int width, int height, const std::uint8_t* indices,
                       const std::vector<Rgb>& palette) {
    if (palette.empty() || palette.size() > 256) fail(Errc::InvalidArgument, "palette must hold 1..256 colours");
    std::vector<png_color> plte;
    for (const auto& c : palette) plte.push_back({c.r, c.g, c.b});
    write_png(path, {width, height, 8, PNG_COLOR_TYPE_PALETTE, indices, static_cast<std::size_t>(width), plte.data(),
                     static_cast<int>(plte.size())});
}

PngImage read_png(const fs::path& path) {
    FilePtr fp = open_file(path, "rb");
    DecodedHeader hdr;
    std::vector<std::uint8_t> bytes;
    std::vector<png_color> plte;
    PngError err;
    if (!decode_png(fp.get(), hdr, bytes, plte, err)) {
        fail(Errc::IoFailure, fmt::format("cannot decode {}: {}", path.string(), err.message));
    }
    PngImage img;
    img.width = static_cast<int>(hdr.width);
    img.height = static_cast<int>(hdr.height);
    img.bit_depth = hdr.bit_depth == 16 ? 16 : 8;
    img.indexed = hdr.color_type == PNG_COLOR_TYPE_PALETTE;
    img.channels = (hdr.color_type & PNG_COLOR_MASK_COLOR) && !img.indexed ? 3 : 1;
    for (const auto& c : plte) img.palette.push_back({c.red, c.green, c.blue});
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
    img.samples.resize(n);
    if (img.bit_depth == 16) {
        std::memcpy(img.samples.data(), bytes.data(), n * 2);
    } else {
        for (std::size_t i = 0; i < n; ++i) img.samples[i] = bytes[i];
    }
    return img;
}

std::vector<std::uint16_t> quantize_depth_cm(const std::vector<float>& depth) {
    std::vector<std::uint16_t> out(depth.size());
    simd::active_kernels().quantize_depth_cm(depth.data(), out.data(), depth.size());
    return out;
}

void write_flow(const fs::path& path, const FlowField& flow) {
    const std::size_t n = static_cast<std::size_t>(flow.width) * static_cast<std::size_t>(flow.height);
    if (flow.u.size() != n || flow.v.size() != n || flow.valid.size() != n) {
        fail(Errc::InvalidArgument, "flow planes do not match the declared size");
    }
    std::string out;
    out.reserve(12 + n * 9);
    out += "PEFL";
    put_u32(out, static_cast<std::uint32_t>(flow.width));
    put_u32(out, static_cast<std::uint32_t>(flow.height));
    for (float f : flow.u) put_u32(out, std::bit_cast<std::uint32_t>(f));
    for (float f : flow.v) put_u32(out, std::bit_cast<std::uint32_t>(f));
    out.append(reinterpret_cast<const char*>(flow.valid.data()), n);
    write_bytes(path, out);
}

FlowField read_flow(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoFailure, fmt::format("cannot open {}", path.string()));
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || bytes.compare(0, 4, "PEFL") != 0) {
        fail(Errc::IoFailure, fmt::format("{} is not a flow file", path.string()));
    }
    const std::uint32_t w = get_u32(bytes, 4), h = get_u32(bytes, 8);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (bytes.size() != 12 + n * 9) fail(Errc::IoFailure, fmt::format("{} has the wrong length", path.string()));
    FlowField flow(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < n; ++i) {
        flow.u[i] = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
        flow.v[i] = std::bit_cast<float>(get_u32(bytes, 12 + 4 * (n + i)));
    }
    std::memcpy(flow.valid.data(), bytes.data() + 12 + 8 * n, n);
    return flow;
}

FramePaths frame_paths(const fs::path& root, std::string_view id) {
    const std::string s(id);
    return {root / "JPEGImages" / (s + ".png"), root / "Annotations" / (s + ".xml"), root / "Depth" / (s + ".png"),
            root / "Instance" / (s + ".png"),   root / "Class" / (s + ".png"),         root / "Flow" / (s + ".pefl")};
}

void create_layout(const fs::path& root) {
    std::error_code ec;
    for (const char* sub : {"JPEGImages", "Annotations", "Depth", "Instance", "Class", "Flow", "ImageSets/Main"}) {
        fs::create_directories(root / sub, ec);
        if (ec) fail(Errc::IoFailure, fmt::format("cannot create {}: {}", (root / sub).string(), ec.message()));
    }
}

void write_frame_outputs(const FrameBuffers& fb, const FlowField& flow, const ImageRecord& record,
                         const FramePaths& paths) {
    if (flow.width != fb.width || flow.height != fb.height) {
        fail(Errc::InvalidArgument, "flow and frame buffers differ in size");
    }
    const std::size_t n = fb.pixel_count();
    write_png_rgb(paths.image, fb.width, fb.height, fb.rgb.data());

    write_png_gray16(paths.depth, fb.width, fb.height, quantize_depth_cm(fb.depth).data());

    std::vector<std::uint16_t> inst(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (fb.instance[i] > 0xffffu) fail(Errc::InvalidArgument, "instance id does not fit in 16 bits");
        inst[i] = static_cast<std::uint16_t>(fb.instance[i]);
    }
    write_png_gray16(paths.instance, fb.width, fb.height, inst.data());

    std::vector<std::uint8_t> cls(n);
    for (std::size_t i = 0; i < n; ++i) cls[i] = static_cast<std::uint8_t>(fb.cls[i]);
    std::vector<Rgb> palette;
    for (std::size_t c = 0; c < kClassCount; ++c) palette.push_back(class_palette_color(static_cast<ObjectClass>(c)));
    write_png_indexed(paths.cls, fb.width, fb.height, cls.data(), palette);

    write_flow(paths.flow, flow);
    write_bytes(paths.annotation, write_voc_xml(record));
}

}  // namespace peye
