#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scalesteg/pixel_grid.hpp"

namespace scalesteg {

enum class Family { nearest, bilinear, bicubic };

const char* to_string(Family family) noexcept;
Family parse_family(const std::string& name);

struct ChannelSpec {
    Family family = Family::bilinear;
    bool antialiasing = false;
    double sf = 1.0;
    double bicubic_a = -0.5;

    // Throws invalid_argument for sf outside (0,1] or antialiased nearest.
    void validate() const;
    // The wide kernel only applies when actually shrinking.
    bool effective_antialiasing() const noexcept { return antialiasing && sf < 1.0; }
    std::string name() const;

    bool operator==(const ChannelSpec&) const = default;
};

// Source extent after scaling: ceil(sf * n).
int scaled_extent(double sf, int n);

double kernel_value(Family family, bool antialiasing, double sf, double t, double bicubic_a = -0.5);

// Source index may fall outside the image; it is clamped to the nearest edge when read.
struct Tap {
    int index = 0;
    double weight = 0.0;
};

struct OutputTaps {
    double center = 0.0;  // backward-mapped position, 0-based source coordinates
    std::vector<Tap> taps;
};

// One axis of the channel: for each output coordinate, the weighted source taps.
class TapPlan {
public:
    TapPlan() = default;
    TapPlan(int src_extent, std::vector<OutputTaps> outputs);

    int src_extent() const noexcept { return src_extent_; }
    int dst_extent() const noexcept { return static_cast<int>(outputs_.size()); }
    const OutputTaps& operator[](int u) const { return outputs_[static_cast<std::size_t>(u)]; }

    // Interpolation support p: taps per output.
    int support() const noexcept;
    // True when no tap of output u needs edge clamping.
    bool interior(int u) const;
    int clamp(int index) const noexcept { return index < 0 ? 0 : (index >= src_extent_ ? src_extent_ - 1 : index); }
    // Taps of output u with clamped indices and duplicate weights folded together.
    std::vector<Tap> folded(int u) const;

private:
    int src_extent_ = 0;
    std::vector<OutputTaps> outputs_;
};

TapPlan build_tap_plan(const ChannelSpec& spec, int src_extent, int dst_extent);

// Both axes of a channel applied to a source of fixed size.
struct ResizePlan {
    ChannelSpec spec;
    TapPlan vertical;
    TapPlan horizontal;

    int src_height() const noexcept { return vertical.src_extent(); }
    int src_width() const noexcept { return horizontal.src_extent(); }
    int dst_height() const noexcept { return vertical.dst_extent(); }
    int dst_width() const noexcept { return horizontal.dst_extent(); }
};

ResizePlan make_resize_plan(const ChannelSpec& spec, int src_height, int src_width);

// Pre-rounding value of output (u,v). Columns are reduced vertically first, then
// combined horizontally, so every caller gets the same floating-point result.
template <class PixelFn>
double resample_real(const ResizePlan& plan, int u, int v, PixelFn&& pixel) {
    const auto& vt = plan.vertical[u].taps;
    const auto& ht = plan.horizontal[v].taps;
    double acc = 0.0;
    for (const Tap& h : ht) {
        const int col = plan.horizontal.clamp(h.index);
        double column = 0.0;
        for (const Tap& t : vt) column += t.weight * static_cast<double>(pixel(plan.vertical.clamp(t.index), col));
        acc += h.weight * column;
    }
    return acc;
}

// Half-away-from-zero rounding followed by clamping to [0,255].
inline std::uint8_t quantize(double value) {
    const double r = std::round(value);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

std::uint8_t resample_pixel(const PixelGrid& src, const ResizePlan& plan, int u, int v);
PixelGrid resize(const PixelGrid& src, const ResizePlan& plan);
PixelGrid resize(const PixelGrid& src, const ChannelSpec& spec);

struct InterpolationBlock {
    std::vector<int> rows;        // source rows with taps, unclamped
    std::vector<int> cols;        // source columns with taps, unclamped
    std::vector<double> weights;  // rows.size() x cols.size(), outer product of the axis weights

    double weight(std::size_t r, std::size_t c) const { return weights[r * cols.size() + c]; }
};

InterpolationBlock interpolation_block(const ChannelSpec& spec, int src_height, int src_width, int u, int v);
InterpolationBlock interpolation_block(const ResizePlan& plan, int u, int v);

}  // namespace scalesteg
