#include "scalesteg/pixel_grid.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

#include "scalesteg/error.hpp"

namespace scalesteg {

namespace {

void check_dims(int height, int width) {
    if (height <= 0 || width <= 0) {
        throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

bool is_png(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

PixelGrid decode_png(std::span<const std::uint8_t> bytes, const std::string& name) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw Error(ErrorCode::unsupported_format, name + ": " + image.message);
    }
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw Error(ErrorCode::unsupported_format, name + ": 16-bit PNG is not supported");
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    if (color) {
        std::cerr << "warning: " << name << " is a color image; using its first channel\n";
    }
    image.format = color ? PNG_FORMAT_RGBA : PNG_FORMAT_GA;
    const int channels = color ? 4 : 2;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::unsupported_format, name + ": " + msg);
    }
    const int h = static_cast<int>(image.height);
    const int w = static_cast<int>(image.width);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(h) * w);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = buffer[i * channels];
    return PixelGrid(h, w, std::move(data));
}

std::vector<std::uint8_t> encode_png(const PixelGrid& grid) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(grid.width());
    image.height = static_cast<png_uint_32>(grid.height());
    image.format = PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(image, size, 0, grid.pixels().data(), 0, nullptr)) {
        throw Error(ErrorCode::io, std::string("png encode: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, grid.pixels().data(), 0, nullptr)) {
        throw Error(ErrorCode::io, std::string("png encode: ") + image.message);
    }
    out.resize(size);
    return out;
}

// Reads one decimal header token, skipping whitespace and '#' comments.
long read_pgm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(bytes[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
        throw Error(ErrorCode::unsupported_format, "malformed PGM header");
    }
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
        value = value * 10 + (bytes[pos] - '0');
        if (value > 1'000'000'000L) throw Error(ErrorCode::unsupported_format, "PGM header value too large");
        ++pos;
    }
    return value;
}

enum class FileFormat { pgm, png };

FileFormat format_for_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") return FileFormat::png;
    if (ext == ".pgm") return FileFormat::pgm;
    throw Error(ErrorCode::unsupported_format, "unknown image extension: " + path.string());
}

}  // namespace

PixelGrid::PixelGrid(int height, int width, std::uint8_t fill) : height_(height), width_(width) {
    check_dims(height, width);
    data_.assign(static_cast<std::size_t>(height) * width, fill);
}

PixelGrid::PixelGrid(int height, int width, std::vector<std::uint8_t> data)
    : height_(height), width_(width), data_(std::move(data)) {
    check_dims(height, width);
    if (data_.size() != static_cast<std::size_t>(height) * width) {
        throw Error(ErrorCode::dimension_mismatch, "pixel buffer does not match height x width");
    }
}

PixelGrid PixelGrid::from_rows(std::initializer_list<std::initializer_list<int>> rows) {
    const int h = static_cast<int>(rows.size());
    const int w = h > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    std::vector<std::uint8_t> data;
    data.reserve(static_cast<std::size_t>(h) * w);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != w) throw Error(ErrorCode::dimension_mismatch, "ragged rows");
        for (int v : row) {
            if (v < 0 || v > 255) throw Error(ErrorCode::overflow, "pixel value outside [0,255]");
            data.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return PixelGrid(h, w, std::move(data));
}

std::uint8_t PixelGrid::at(int row, int col) const {
    if (!contains(row, col)) throw Error(ErrorCode::invalid_argument, "pixel coordinate out of range");
    return (*this)(row, col);
}

void DeltaMap::set(Coord c, int delta) {
    if (c.row < 0 || c.row >= height_ || c.col < 0 || c.col >= width_) {
        throw Error(ErrorCode::invalid_argument, "delta coordinate out of range");
    }
    if (delta == 0) {
        entries_.erase(c);
    } else {
        entries_[c] = delta;
    }
}

int DeltaMap::get(Coord c) const noexcept {
    auto it = entries_.find(c);
    return it == entries_.end() ? 0 : it->second;
}

void DeltaMap::merge(const DeltaMap& other) {
    if (other.height_ != height_ || other.width_ != width_) {
        throw Error(ErrorCode::dimension_mismatch, "delta maps differ in size");
    }
    for (const auto& [c, d] : other.entries_) {
        if (!entries_.emplace(c, d).second) {
            throw Error(ErrorCode::solver_failure, "overlapping delta supports");
        }
    }
}

long long DeltaMap::l1_norm() const noexcept {
    long long sum = 0;
    for (const auto& [c, d] : entries_) sum += std::abs(d);
    return sum;
}

int DeltaMap::max_abs() const noexcept {
    int m = 0;
    for (const auto& [c, d] : entries_) m = std::max(m, std::abs(d));
    return m;
}

PixelGrid decode_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw Error(ErrorCode::unsupported_format, "not a binary PGM (P5)");
    }
    std::size_t pos = 2;
    const long w = read_pgm_token(bytes, pos);
    const long h = read_pgm_token(bytes, pos);
    const long maxval = read_pgm_token(bytes, pos);
    if (maxval != 255) {
        throw Error(ErrorCode::unsupported_format, "unsupported-depth: PGM maxval " + std::to_string(maxval));
    }
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw Error(ErrorCode::unsupported_format, "malformed PGM header");
    }
    ++pos;
    if (w <= 0 || h <= 0) throw Error(ErrorCode::unsupported_format, "PGM dimensions must be positive");
    const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - pos < count) throw Error(ErrorCode::unsupported_format, "truncated PGM payload");
    std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
    return PixelGrid(static_cast<int>(h), static_cast<int>(w), std::move(data));
}

std::vector<std::uint8_t> encode_pgm(const PixelGrid& grid) {
    const std::string header =
        "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), grid.pixels().begin(), grid.pixels().end());
    return out;
}

PixelGrid load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (is_png(bytes)) return decode_png(bytes, path.string());
    return decode_pgm(bytes);
}

void save_image(const PixelGrid& grid, const std::filesystem::path& path) {
    if (grid.empty()) throw Error(ErrorCode::invalid_argument, "cannot save an empty grid");
    if (format_for_path(path) == FileFormat::png) {
        write_file(path, encode_png(grid));
    } else {
        write_file(path, encode_pgm(grid));
    }
}

PixelGrid apply_delta(const PixelGrid& cover, const DeltaMap& delta) {
    if (delta.height() != cover.height() || delta.width() != cover.width()) {
        throw Error(ErrorCode::dimension_mismatch, "delta map does not match cover dimensions");
    }
    std::vector<std::uint8_t> data(cover.pixels().begin(), cover.pixels().end());
    for (const auto& [c, d] : delta.entries()) {
        const int v = cover(c.row, c.col) + d;
        if (v < 0 || v > 255) {
            throw Error(ErrorCode::overflow, "delta pushes pixel (" + std::to_string(c.row) + "," +
                                                 std::to_string(c.col) + ") outside [0,255]");
        }
        data[static_cast<std::size_t>(c.row) * cover.width() + c.col] = static_cast<std::uint8_t>(v);
    }
    return PixelGrid(cover.height(), cover.width(), std::move(data));
}

}  // namespace scalesteg
