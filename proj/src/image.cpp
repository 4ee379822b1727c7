#include "forge/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace forge::image {

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels),
      data_(static_cast<std::size_t>(width) * height * channels, fill) {
    if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
        throw ConfigInvalid("bad image shape " + std::to_string(width) + "x" +
                            std::to_string(height) + "x" + std::to_string(channels));
    }
}

float& Image::at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
}

float Image::at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
}

Image Image::to_gray() const {
    if (channels_ == 1) {
        return *this;
    }
    Image gray(width_, height_, 1);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            // Rec. 601 luma.
            gray.at(x, y, 0) = 0.299f * at(x, y, 0) + 0.587f * at(x, y, 1) +
                               0.114f * at(x, y, 2);
        }
    }
    return gray;
}

Image resize_bilinear(const Image& src, int out_width, int out_height) {
    if (src.empty()) {
        throw ConfigInvalid("resize of empty image");
    }
    if (out_width == src.width() && out_height == src.height()) {
        return src;
    }
    Image dst(out_width, out_height, src.channels());
    const float sx = static_cast<float>(src.width()) / static_cast<float>(out_width);
    const float sy = static_cast<float>(src.height()) / static_cast<float>(out_height);
    for (int y = 0; y < out_height; ++y) {
        // Pixel-center alignment.
        const float fy = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
        const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, src.height() - 1);
        const int y1 = std::min(y0 + 1, src.height() - 1);
        const float wy = std::clamp(fy - static_cast<float>(y0), 0.0f, 1.0f);
        for (int x = 0; x < out_width; ++x) {
            const float fx = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
            const int x0 =
                std::clamp(static_cast<int>(std::floor(fx)), 0, src.width() - 1);
            const int x1 = std::min(x0 + 1, src.width() - 1);
            const float wx = std::clamp(fx - static_cast<float>(x0), 0.0f, 1.0f);
            for (int c = 0; c < src.channels(); ++c) {
                const float top =
                    src.at(x0, y0, c) * (1.0f - wx) + src.at(x1, y0, c) * wx;
                const float bottom =
                    src.at(x0, y1, c) * (1.0f - wx) + src.at(x1, y1, c) * wx;
                dst.at(x, y, c) = top * (1.0f - wy) + bottom * wy;
            }
        }
    }
    return dst;
}

namespace {

int read_pnm_int(std::istream& in) {
    // Skips whitespace and '#' comment lines.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) {
        throw IoFailure("malformed PNM header");
    }
    return value;
}

}  // namespace

PnmHeader probe_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open image: " + path.string());
    }
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
        throw IoFailure("unsupported image format (want binary PGM/PPM): " +
                        path.string());
    }
    PnmHeader header;
    header.channels = magic[1] == '5' ? 1 : 3;
    header.width = read_pnm_int(in);
    header.height = read_pnm_int(in);
    return header;
}

Image read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open image: " + path.string());
    }
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
        throw IoFailure("unsupported image format (want binary PGM/PPM): " +
                        path.string());
    }
    const int channels = magic[1] == '5' ? 1 : 3;
    const int width = read_pnm_int(in);
    const int height = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (maxval != 255) {
        throw IoFailure("only 8-bit PNM supported: " + path.string());
    }
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw IoFailure("truncated image payload: " + path.string());
    }
    Image img(width, height, channels);
    for (std::size_t i = 0; i < n; ++i) {
        img.data()[i] = static_cast<float>(raw[i]);
    }
    return img;
}

void write_pnm(const std::filesystem::path& path, const Image& img) {
    if (img.empty()) {
        throw ConfigInvalid("write of empty image");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot write image: " + path.string());
    }
    out << (img.channels() == 1 ? "P5" : "P6") << '\n'
        << img.width() << ' ' << img.height() << '\n'
        << 255 << '\n';
    std::vector<unsigned char> raw(img.data().size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const float v = std::round(img.data()[i]);
        raw[i] = static_cast<unsigned char>(std::clamp(v, 0.0f, 255.0f));
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    if (!out) {
        throw IoFailure("short write on image: " + path.string());
    }
}

}  // namespace forge::image
