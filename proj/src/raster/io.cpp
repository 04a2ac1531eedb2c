#include "lunareg/raster/io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>

#include <json.hpp>

namespace lunareg {

namespace {

using json = nlohmann::json;

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size())
        return false;
    std::string tail = s.substr(s.size() - suffix.size());
    for (char& c : tail)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return tail == suffix;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---------------------------------------------------------------- PNG

GeoRaster read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp)
        throw InputUnreadable(path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw InputUnreadable(path + " (not a PNG)");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputUnreadable(path + " (PNG decode error)");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    // Collapse everything to single-channel grayscale.
    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
        color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (bit_depth == 16)
        png_set_swap(png);
    png_read_update_info(png, info);
    bit_depth = png_get_bit_depth(png, info);

    const SampleDepth depth = bit_depth == 16 ? SampleDepth::U16 : SampleDepth::U8;
    GeoRaster raster(static_cast<int>(w), static_cast<int>(h), depth);

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<png_byte> rowbuf(row_bytes);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, rowbuf.data(), nullptr);
        float* dst = raster.bands[0].row(static_cast<int>(y));
        if (bit_depth == 16) {
            const auto* p = reinterpret_cast<const std::uint16_t*>(rowbuf.data());
            for (png_uint_32 x = 0; x < w; ++x)
                dst[x] = static_cast<float>(p[x]);
        } else {
            for (png_uint_32 x = 0; x < w; ++x)
                dst[x] = static_cast<float>(rowbuf[x]);
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return raster;
}

void write_png(const std::string& path, const GeoRaster& raster) {
    if (raster.depth == SampleDepth::F32)
        throw ConfigInvalid("format", "PNG output supports 8/16-bit rasters only");

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp)
        throw InputUnreadable(path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw InputUnreadable(path + " (PNG encode error)");
    }
    png_init_io(png, fp.get());

    const int bit_depth = raster.depth == SampleDepth::U16 ? 16 : 8;
    const int w = raster.width(), h = raster.height();
    png_set_IHDR(png, info, w, h, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16)
        png_set_swap(png);

    const ImageF& band = raster.band(0);
    if (bit_depth == 16) {
        std::vector<std::uint16_t> rowbuf(w);
        for (int y = 0; y < h; ++y) {
            const float* src = band.row(y);
            for (int x = 0; x < w; ++x)
                rowbuf[x] = static_cast<std::uint16_t>(
                    std::clamp(round_half_up(src[x]), 0.0, 65535.0));
            png_write_row(png, reinterpret_cast<png_bytep>(rowbuf.data()));
        }
    } else {
        std::vector<std::uint8_t> rowbuf(w);
        for (int y = 0; y < h; ++y) {
            const float* src = band.row(y);
            for (int x = 0; x < w; ++x)
                rowbuf[x] = quantize_u8(src[x]);
            png_write_row(png, rowbuf.data());
        }
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---------------------------------------------------------------- TIFF
// Minimal codec: uncompressed grayscale, little-endian output, single strip.
// The reader also accepts big-endian files and row-contiguous multi-strip
// layouts.

constexpr std::uint16_t kTagWidth = 256;
constexpr std::uint16_t kTagHeight = 257;
constexpr std::uint16_t kTagBitsPerSample = 258;
constexpr std::uint16_t kTagCompression = 259;
constexpr std::uint16_t kTagPhotometric = 262;
constexpr std::uint16_t kTagStripOffsets = 273;
constexpr std::uint16_t kTagSamplesPerPixel = 277;
constexpr std::uint16_t kTagRowsPerStrip = 278;
constexpr std::uint16_t kTagStripByteCounts = 279;
constexpr std::uint16_t kTagSampleFormat = 339;

struct TiffReader {
    std::vector<std::uint8_t> bytes;
    bool big_endian = false;

    std::uint16_t u16(std::size_t off) const {
        if (off + 2 > bytes.size())
            throw Error("TIFF truncated");
        return big_endian ? static_cast<std::uint16_t>((bytes[off] << 8) | bytes[off + 1])
                          : static_cast<std::uint16_t>(bytes[off] | (bytes[off + 1] << 8));
    }
    std::uint32_t u32(std::size_t off) const {
        if (off + 4 > bytes.size())
            throw Error("TIFF truncated");
        if (big_endian)
            return (std::uint32_t(bytes[off]) << 24) | (std::uint32_t(bytes[off + 1]) << 16) |
                   (std::uint32_t(bytes[off + 2]) << 8) | bytes[off + 3];
        return std::uint32_t(bytes[off]) | (std::uint32_t(bytes[off + 1]) << 8) |
               (std::uint32_t(bytes[off + 2]) << 16) | (std::uint32_t(bytes[off + 3]) << 24);
    }
};

GeoRaster read_tiff(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputUnreadable(path);
    TiffReader t;
    t.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

    try {
        if (t.bytes.size() < 8)
            throw Error("TIFF too short");
        if (t.bytes[0] == 'I' && t.bytes[1] == 'I')
            t.big_endian = false;
        else if (t.bytes[0] == 'M' && t.bytes[1] == 'M')
            t.big_endian = true;
        else
            throw Error("not a TIFF");
        if (t.u16(2) != 42)
            throw Error("bad TIFF magic");

        const std::uint32_t ifd = t.u32(4);
        const std::uint16_t n_entries = t.u16(ifd);

        std::uint32_t width = 0, height = 0, bits = 8, compression = 1, samples = 1,
                      sample_format = 1;
        std::vector<std::uint32_t> strip_offsets, strip_counts;

        auto entry_values = [&](std::size_t entry_off) {
            const std::uint16_t type = t.u16(entry_off + 2);
            const std::uint32_t count = t.u32(entry_off + 4);
            const std::size_t elem = (type == 3) ? 2 : 4;  // SHORT or LONG
            std::vector<std::uint32_t> vals;
            const std::size_t total = elem * count;
            std::size_t off = (total <= 4) ? entry_off + 8 : t.u32(entry_off + 8);
            for (std::uint32_t i = 0; i < count; ++i)
                vals.push_back(elem == 2 ? t.u16(off + 2 * i) : t.u32(off + 4 * i));
            return vals;
        };

        for (std::uint16_t i = 0; i < n_entries; ++i) {
            const std::size_t eo = ifd + 2 + 12 * std::size_t(i);
            const std::uint16_t tag = t.u16(eo);
            switch (tag) {
                case kTagWidth: width = entry_values(eo)[0]; break;
                case kTagHeight: height = entry_values(eo)[0]; break;
                case kTagBitsPerSample: bits = entry_values(eo)[0]; break;
                case kTagCompression: compression = entry_values(eo)[0]; break;
                case kTagStripOffsets: strip_offsets = entry_values(eo); break;
                case kTagSamplesPerPixel: samples = entry_values(eo)[0]; break;
                case kTagStripByteCounts: strip_counts = entry_values(eo); break;
                case kTagSampleFormat: sample_format = entry_values(eo)[0]; break;
                default: break;
            }
        }

        if (width == 0 || height == 0 || strip_offsets.empty())
            throw Error("TIFF missing required tags");
        if (compression != 1)
            throw Error("TIFF compression not supported");
        if (samples != 1)
            throw Error("TIFF must be single-sample grayscale");

        SampleDepth depth;
        if (bits == 8 && sample_format == 1)
            depth = SampleDepth::U8;
        else if (bits == 16 && sample_format == 1)
            depth = SampleDepth::U16;
        else if (bits == 32 && sample_format == 3)
            depth = SampleDepth::F32;
        else
            throw Error("TIFF sample type not supported");

        // Concatenate strips into one pixel stream.
        std::vector<std::uint8_t> pix;
        pix.reserve(std::size_t(width) * height * (bits / 8));
        for (std::size_t s = 0; s < strip_offsets.size(); ++s) {
            const std::uint32_t off = strip_offsets[s];
            const std::uint32_t cnt =
                s < strip_counts.size() ? strip_counts[s]
                                        : width * height * (bits / 8);
            if (off + cnt > t.bytes.size())
                throw Error("TIFF strip out of range");
            pix.insert(pix.end(), t.bytes.begin() + off, t.bytes.begin() + off + cnt);
        }
        if (pix.size() < std::size_t(width) * height * (bits / 8))
            throw Error("TIFF pixel data truncated");

        GeoRaster raster(static_cast<int>(width), static_cast<int>(height), depth);
        float* dst = raster.bands[0].data();
        const std::size_t n = std::size_t(width) * height;
        for (std::size_t i = 0; i < n; ++i) {
            if (bits == 8) {
                dst[i] = static_cast<float>(pix[i]);
            } else if (bits == 16) {
                const std::size_t o = 2 * i;
                const std::uint16_t v =
                    t.big_endian ? static_cast<std::uint16_t>((pix[o] << 8) | pix[o + 1])
                                 : static_cast<std::uint16_t>(pix[o] | (pix[o + 1] << 8));
                dst[i] = static_cast<float>(v);
            } else {
                const std::size_t o = 4 * i;
                std::uint32_t v;
                if (t.big_endian)
                    v = (std::uint32_t(pix[o]) << 24) | (std::uint32_t(pix[o + 1]) << 16) |
                        (std::uint32_t(pix[o + 2]) << 8) | pix[o + 3];
                else
                    v = std::uint32_t(pix[o]) | (std::uint32_t(pix[o + 1]) << 8) |
                        (std::uint32_t(pix[o + 2]) << 16) | (std::uint32_t(pix[o + 3]) << 24);
                float f;
                std::memcpy(&f, &v, 4);
                dst[i] = f;
            }
        }
        return raster;
    } catch (const Error& e) {
        throw InputUnreadable(path + " (" + e.what() + ")");
    }
}

void write_tiff(const std::string& path, const GeoRaster& raster) {
    const int w = raster.width(), h = raster.height();
    const int bits = depth_bits(raster.depth);
    const std::uint16_t sample_format = raster.depth == SampleDepth::F32 ? 3 : 1;
    const std::size_t pixel_bytes = std::size_t(w) * h * (bits / 8);

    std::vector<std::uint8_t> out;
    auto put16 = [&](std::uint16_t v) {
        out.push_back(v & 0xff);
        out.push_back((v >> 8) & 0xff);
    };
    auto put32 = [&](std::uint32_t v) {
        out.push_back(v & 0xff);
        out.push_back((v >> 8) & 0xff);
        out.push_back((v >> 16) & 0xff);
        out.push_back((v >> 24) & 0xff);
    };

    out.push_back('I');
    out.push_back('I');
    put16(42);
    const std::uint32_t data_offset = 8;
    put32(static_cast<std::uint32_t>(data_offset + pixel_bytes));  // IFD offset

    // Pixel data, single strip.
    const ImageF& band = raster.band(0);
    for (int y = 0; y < h; ++y) {
        const float* src = band.row(y);
        for (int x = 0; x < w; ++x) {
            if (bits == 8) {
                out.push_back(quantize_u8(src[x]));
            } else if (bits == 16) {
                const std::uint16_t v = static_cast<std::uint16_t>(
                    std::clamp(round_half_up(src[x]), 0.0, 65535.0));
                put16(v);
            } else {
                std::uint32_t v;
                const float f = src[x];
                std::memcpy(&v, &f, 4);
                put32(v);
            }
        }
    }

    struct Entry {
        std::uint16_t tag, type;
        std::uint32_t count, value;
    };
    const std::vector<Entry> entries = {
        {kTagWidth, 4, 1, static_cast<std::uint32_t>(w)},
        {kTagHeight, 4, 1, static_cast<std::uint32_t>(h)},
        {kTagBitsPerSample, 3, 1, static_cast<std::uint32_t>(bits)},
        {kTagCompression, 3, 1, 1},
        {kTagPhotometric, 3, 1, 1},
        {kTagStripOffsets, 4, 1, data_offset},
        {kTagSamplesPerPixel, 3, 1, 1},
        {kTagRowsPerStrip, 4, 1, static_cast<std::uint32_t>(h)},
        {kTagStripByteCounts, 4, 1, static_cast<std::uint32_t>(pixel_bytes)},
        {kTagSampleFormat, 3, 1, sample_format},
    };
    put16(static_cast<std::uint16_t>(entries.size()));
    for (const Entry& e : entries) {
        put16(e.tag);
        put16(e.type);
        put32(e.count);
        if (e.type == 3) {
            put16(static_cast<std::uint16_t>(e.value));
            put16(0);
        } else {
            put32(e.value);
        }
    }
    put32(0);  // no next IFD

    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw InputUnreadable(path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace

std::string sidecar_path_for(const std::string& image_path) {
    return image_path + ".geo.json";
}

GeoMeta read_geo_sidecar(const std::string& sidecar_path) {
    std::ifstream in(sidecar_path);
    if (!in)
        throw InputUnreadable(sidecar_path);
    json j;
    try {
        in >> j;
        GeoMeta meta;
        meta.projection = projection_from_name(j.at("projection").get<std::string>());
        meta.sphere_radius_m = j.at("sphere_radius_m").get<double>();
        const auto gt = j.at("geotransform");
        if (!gt.is_array() || gt.size() != 6)
            throw Error("geotransform must have 6 numbers");
        for (int i = 0; i < 6; ++i)
            meta.geotransform[i] = gt[i].get<double>();
        meta.gsd_m = j.at("gsd_m").get<double>();
        if (j.contains("std_parallel_deg"))
            meta.std_parallel_deg = j["std_parallel_deg"].get<double>();
        meta.validate();
        return meta;
    } catch (const json::exception& e) {
        throw InputUnreadable(sidecar_path + " (" + e.what() + ")");
    }
}

void write_geo_sidecar(const std::string& sidecar_path, const GeoMeta& meta) {
    json j;
    j["projection"] = projection_name(meta.projection);
    j["sphere_radius_m"] = meta.sphere_radius_m;
    j["geotransform"] = meta.geotransform;
    j["gsd_m"] = meta.gsd_m;
    std::ofstream out(sidecar_path);
    if (!out)
        throw InputUnreadable(sidecar_path);
    out << j.dump(2) << "\n";
}

GeoRaster read_raster(const std::string& path) {
    GeoRaster raster;
    if (has_suffix(path, ".png"))
        raster = read_png(path);
    else if (has_suffix(path, ".tif") || has_suffix(path, ".tiff"))
        raster = read_tiff(path);
    else
        throw InputUnreadable(path + " (unsupported extension)");

    const std::string sidecar = sidecar_path_for(path);
    if (std::filesystem::exists(sidecar))
        raster.meta = read_geo_sidecar(sidecar);
    return raster;
}

void write_raster(const std::string& path, const GeoRaster& raster) {
    if (has_suffix(path, ".png"))
        write_png(path, raster);
    else if (has_suffix(path, ".tif") || has_suffix(path, ".tiff"))
        write_tiff(path, raster);
    else
        throw InputUnreadable(path + " (unsupported extension)");
    if (raster.meta)
        write_geo_sidecar(sidecar_path_for(path), *raster.meta);
}

}  // namespace lunareg
