#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <span>
#include <vector>

namespace scalesteg {

// 8-bit grayscale raster, row-major. Immutable once built.
class PixelGrid {
public:
    PixelGrid() = default;
    PixelGrid(int height, int width, std::uint8_t fill = 0);
    PixelGrid(int height, int width, std::vector<std::uint8_t> data);

    static PixelGrid from_rows(std::initializer_list<std::initializer_list<int>> rows);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::uint8_t operator()(int row, int col) const noexcept {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }
    std::uint8_t at(int row, int col) const;
    std::span<const std::uint8_t> pixels() const noexcept { return data_; }

    bool contains(int row, int col) const noexcept {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    bool operator==(const PixelGrid&) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> data_;
};

struct Coord {
    int row = 0;
    int col = 0;
    auto operator<=>(const Coord&) const = default;
};

// Sparse signed perturbation over a cover; absent entries are zero.
class DeltaMap {
public:
    DeltaMap() = default;
    DeltaMap(int height, int width) : height_(height), width_(width) {}

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    // Zero values erase the entry. Throws on out-of-range coordinates.
    void set(Coord c, int delta);
    int get(Coord c) const noexcept;
    // Adds entries from a map with disjoint support; throws on overlap.
    void merge(const DeltaMap& other);

    const std::map<Coord, int>& entries() const noexcept { return entries_; }
    std::size_t nonzero_count() const noexcept { return entries_.size(); }
    long long l1_norm() const noexcept;
    int max_abs() const noexcept;

    bool operator==(const DeltaMap&) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::map<Coord, int> entries_;
};

PixelGrid load_image(const std::filesystem::path& path);
void save_image(const PixelGrid& grid, const std::filesystem::path& path);

PixelGrid decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const PixelGrid& grid);

PixelGrid apply_delta(const PixelGrid& cover, const DeltaMap& delta);

}  // namespace scalesteg
