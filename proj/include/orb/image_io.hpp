#pragma once

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "orb/image.hpp"

namespace orb {

struct ImageIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 8-bit encoded raster, the file-boundary representation.
struct Image8 {
    int width = 0, height = 0, channels = 0;
    std::vector<uint8_t> data;  // row-major, interleaved
};

inline Image8 encode_image(const Image& img, double gamma = 2.2) {
    Image8 out;
    out.width = img.width();
    out.height = img.height();
    out.channels = 3;
    out.data.resize(static_cast<size_t>(out.width) * out.height * 3);
    size_t i = 0;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const RGB& p = img.at(x, y);
            out.data[i++] = encode_byte(p.r, gamma);
            out.data[i++] = encode_byte(p.g, gamma);
            out.data[i++] = encode_byte(p.b, gamma);
        }
    return out;
}

// 8-bit files are treated as gamma-encoded and linearized on load.
inline Image decode_image(const Image8& img8, double gamma = 2.2) {
    Image img(img8.width, img8.height);
    size_t i = 0;
    for (int y = 0; y < img8.height; ++y)
        for (int x = 0; x < img8.width; ++x) {
            double c[3];
            for (int k = 0; k < 3; ++k) {
                int src = (img8.channels >= 3) ? k : 0;
                c[k] = gamma_decode(img8.data[i + src] / 255.0, gamma);
            }
            img.at(x, y) = RGB{c[0], c[1], c[2]};
            i += img8.channels;
        }
    return img;
}

// --- PPM (binary P6), the byte-exact golden format -------------------------

inline void write_ppm(const Image8& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError("cannot open for writing: " + path);
    if (img.channels != 3) throw ImageIoError("PPM requires 3 channels");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw ImageIoError("write failed: " + path);
}

inline Image8 read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw ImageIoError("not a binary PPM (P6): " + path);
    auto next_token = [&]() -> long {
        // skip whitespace and '#' comments
        while (true) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v;
        if (!(in >> v)) throw ImageIoError("bad PPM header: " + path);
        return v;
    };
    Image8 img;
    img.width = static_cast<int>(next_token());
    img.height = static_cast<int>(next_token());
    long maxval = next_token();
    if (maxval != 255) throw ImageIoError("only 8-bit PPM supported: " + path);
    in.get();  // single whitespace after maxval
    img.channels = 3;
    img.data.resize(static_cast<size_t>(img.width) * img.height * 3);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw ImageIoError("truncated PPM: " + path);
    return img;
}

// --- PNG (8-bit gray / RGB / RGBA, non-interlaced) -------------------------

namespace detail_png {

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline uint32_t get_u32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

inline void write_chunk(std::vector<uint8_t>& out, const char type[4],
                        const std::vector<uint8_t>& payload) {
    put_u32(out, static_cast<uint32_t>(payload.size()));
    size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uint32_t crc =
        crc32(0, out.data() + start, static_cast<uInt>(out.size() - start));
    put_u32(out, crc);
}

inline int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    return pb <= pc ? b : c;
}

}  // namespace detail_png

inline void write_png(const Image8& img, const std::string& path) {
    using namespace detail_png;
    int bpp = img.channels;
    uint8_t color_type;
    switch (img.channels) {
        case 1: color_type = 0; break;
        case 3: color_type = 2; break;
        case 4: color_type = 6; break;
        default: throw ImageIoError("PNG: unsupported channel count");
    }
    // filter 0 on every row
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(img.height) * (1 + static_cast<size_t>(img.width) * bpp));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const uint8_t* row = img.data.data() + static_cast<size_t>(y) * img.width * bpp;
        raw.insert(raw.end(), row, row + static_cast<size_t>(img.width) * bpp);
    }
    uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> comp(comp_size);
    if (compress2(comp.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw ImageIoError("PNG: deflate failed");
    comp.resize(comp_size);

    std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<uint8_t> ihdr;
    put_u32(ihdr, static_cast<uint32_t>(img.width));
    put_u32(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);           // bit depth
    ihdr.push_back(color_type);
    ihdr.push_back(0);           // compression
    ihdr.push_back(0);           // filter
    ihdr.push_back(0);           // interlace
    write_chunk(out, "IHDR", ihdr);
    write_chunk(out, "IDAT", comp);
    write_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) throw ImageIoError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw ImageIoError("write failed: " + path);
}

inline Image8 read_png(const std::string& path) {
    using namespace detail_png;
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ImageIoError("cannot open: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
        throw ImageIoError("not a PNG: " + path);

    Image8 img;
    int bit_depth = 0, color_type = -1;
    std::vector<uint8_t> idat;
    size_t pos = 8;
    while (pos + 8 <= bytes.size()) {
        uint32_t len = get_u32(&bytes[pos]);
        std::string type(reinterpret_cast<const char*>(&bytes[pos + 4]), 4);
        if (pos + 12 + len > bytes.size()) throw ImageIoError("truncated PNG: " + path);
        const uint8_t* payload = &bytes[pos + 8];
        if (type == "IHDR") {
            img.width = static_cast<int>(get_u32(payload));
            img.height = static_cast<int>(get_u32(payload + 4));
            bit_depth = payload[8];
            color_type = payload[9];
            if (payload[12] != 0) throw ImageIoError("PNG: interlacing unsupported");
        } else if (type == "IDAT") {
            idat.insert(idat.end(), payload, payload + len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (bit_depth != 8) throw ImageIoError("PNG: only 8-bit depth supported");
    switch (color_type) {
        case 0: img.channels = 1; break;
        case 2: img.channels = 3; break;
        case 6: img.channels = 4; break;
        default: throw ImageIoError("PNG: unsupported color type");
    }
    int bpp = img.channels;
    size_t stride = static_cast<size_t>(img.width) * bpp;
    uLongf raw_size = static_cast<uLongf>((stride + 1) * img.height);
    std::vector<uint8_t> raw(raw_size);
    if (uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_size != (stride + 1) * static_cast<size_t>(img.height))
        throw ImageIoError("PNG: inflate failed: " + path);

    img.data.resize(stride * img.height);
    std::vector<uint8_t> prev(stride, 0);
    for (int y = 0; y < img.height; ++y) {
        uint8_t filter = raw[static_cast<size_t>(y) * (stride + 1)];
        const uint8_t* src = &raw[static_cast<size_t>(y) * (stride + 1) + 1];
        uint8_t* dst = &img.data[static_cast<size_t>(y) * stride];
        for (size_t i = 0; i < stride; ++i) {
            int a = i >= static_cast<size_t>(bpp) ? dst[i - bpp] : 0;  // left
            int b = prev[i];                                           // up
            int c = i >= static_cast<size_t>(bpp) ? prev[i - bpp] : 0;  // up-left
            int x = src[i];
            switch (filter) {
                case 0: dst[i] = static_cast<uint8_t>(x); break;
                case 1: dst[i] = static_cast<uint8_t>(x + a); break;
                case 2: dst[i] = static_cast<uint8_t>(x + b); break;
                case 3: dst[i] = static_cast<uint8_t>(x + (a + b) / 2); break;
                case 4: dst[i] = static_cast<uint8_t>(x + paeth(a, b, c)); break;
                default: throw ImageIoError("PNG: bad filter byte");
            }
        }
        std::memcpy(prev.data(), dst, stride);
    }
    return img;
}

// Dispatch on extension. ".ppm" is byte-deterministic; ".png" for convenience.
inline void write_image_file(const Image& img, const std::string& path, double gamma = 2.2) {
    Image8 enc = encode_image(img, gamma);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".png")
        write_png(enc, path);
    else
        write_ppm(enc, path);
}

inline Image read_image_file(const std::string& path, double gamma = 2.2) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".png")
        return decode_image(read_png(path), gamma);
    return decode_image(read_ppm(path), gamma);
}

}  // namespace orb
