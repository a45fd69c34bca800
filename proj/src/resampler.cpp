#include "scalesteg/resampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scalesteg/error.hpp"

namespace scalesteg {

namespace {

double triangle(double x) {
    const double ax = std::fabs(x);
    return ax <= 1.0 ? 1.0 - ax : 0.0;
}

double cubic(double x, double a) {
    const double ax = std::fabs(x);
    const double ax2 = ax * ax;
    const double ax3 = ax2 * ax;
    if (ax <= 1.0) return (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0;
    if (ax <= 2.0) return a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a;
    return 0.0;
}

double base_kernel(Family family, double x, double a) {
    switch (family) {
        case Family::nearest: return (x > -0.5 && x <= 0.5) ? 1.0 : 0.0;
        case Family::bilinear: return triangle(x);
        case Family::bicubic: return cubic(x, a);
    }
    return 0.0;
}

double base_width(Family family) {
    switch (family) {
        case Family::nearest: return 1.0;
        case Family::bilinear: return 2.0;
        case Family::bicubic: return 4.0;
    }
    return 1.0;
}

// 1-based backward-mapped coordinate of 1-based output x.
double mapped_center(double sf, int x) { return static_cast<double>(x) / sf + 0.5 * (1.0 - 1.0 / sf); }

TapPlan build_nearest(const ChannelSpec& spec, int src_extent, int dst_extent) {
    std::vector<OutputTaps> outputs(static_cast<std::size_t>(dst_extent));
    for (int x = 1; x <= dst_extent; ++x) {
        const double u = mapped_center(spec.sf, x);
        const int idx = static_cast<int>(std::ceil(u - 0.5)) - 1;
        outputs[x - 1] = OutputTaps{u - 1.0, {Tap{idx, 1.0}}};
    }
    return TapPlan(src_extent, std::move(outputs));
}

}  // namespace

const char* to_string(Family family) noexcept {
    switch (family) {
        case Family::nearest: return "nearest";
        case Family::bilinear: return "bilinear";
        case Family::bicubic: return "bicubic";
    }
    return "unknown";
}

Family parse_family(const std::string& name) {
    if (name == "nearest") return Family::nearest;
    if (name == "bilinear") return Family::bilinear;
    if (name == "bicubic") return Family::bicubic;
    throw Error(ErrorCode::invalid_argument, "unknown kernel family: " + name);
}

void ChannelSpec::validate() const {
    if (!(sf > 0.0 && sf <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "scaling factor must lie in (0, 1]");
    }
    if (family == Family::nearest && antialiasing) {
        throw Error(ErrorCode::invalid_argument, "anti-aliasing is undefined for nearest-neighbour");
    }
}

std::string ChannelSpec::name() const {
    std::ostringstream os;
    os << (antialiasing ? "aa-" : "") << to_string(family) << "@" << sf;
    return os.str();
}

int scaled_extent(double sf, int n) { return static_cast<int>(std::ceil(sf * static_cast<double>(n))); }

double kernel_value(Family family, bool antialiasing, double sf, double t, double bicubic_a) {
    if (antialiasing && sf < 1.0 && family != Family::nearest) return sf * base_kernel(family, sf * t, bicubic_a);
    return base_kernel(family, t, bicubic_a);
}

TapPlan::TapPlan(int src_extent, std::vector<OutputTaps> outputs)
    : src_extent_(src_extent), outputs_(std::move(outputs)) {}

int TapPlan::support() const noexcept {
    std::size_t p = 0;
    for (const auto& o : outputs_) p = std::max(p, o.taps.size());
    return static_cast<int>(p);
}

bool TapPlan::interior(int u) const {
    for (const Tap& t : (*this)[u].taps) {
        if (t.index < 0 || t.index >= src_extent_) return false;
    }
    return true;
}

std::vector<Tap> TapPlan::folded(int u) const {
    std::vector<Tap> out;
    for (const Tap& t : (*this)[u].taps) {
        const int idx = clamp(t.index);
        auto it = std::find_if(out.begin(), out.end(), [idx](const Tap& o) { return o.index == idx; });
        if (it == out.end()) {
            out.push_back(Tap{idx, t.weight});
        } else {
            it->weight += t.weight;
        }
    }
    std::sort(out.begin(), out.end(), [](const Tap& a, const Tap& b) { return a.index < b.index; });
    return out;
}

TapPlan build_tap_plan(const ChannelSpec& spec, int src_extent, int dst_extent) {
    spec.validate();
    if (src_extent < 1 || dst_extent < 1) throw Error(ErrorCode::invalid_argument, "extents must be positive");
    if (dst_extent != scaled_extent(spec.sf, src_extent)) {
        throw Error(ErrorCode::dimension_mismatch, "destination extent does not match ceil(sf * source)");
    }
    if (spec.family == Family::nearest) return build_nearest(spec, src_extent, dst_extent);

    const bool aa = spec.effective_antialiasing();
    const double kw = aa ? base_width(spec.family) / spec.sf : base_width(spec.family);
    const int window = static_cast<int>(std::ceil(kw)) + 2;

    // Full candidate window per output, normalized over all of its positions.
    std::vector<double> centers(static_cast<std::size_t>(dst_extent));
    std::vector<int> lefts(static_cast<std::size_t>(dst_extent));
    std::vector<double> weights(static_cast<std::size_t>(dst_extent) * window);
    for (int x = 1; x <= dst_extent; ++x) {
        const double u = mapped_center(spec.sf, x);
        const double left = std::floor(u - kw / 2.0);
        double* w = &weights[static_cast<std::size_t>(x - 1) * window];
        double sum = 0.0;
        for (int j = 0; j < window; ++j) {
            w[j] = kernel_value(spec.family, aa, spec.sf, u - (left + j), spec.bicubic_a);
            sum += w[j];
        }
        for (int j = 0; j < window; ++j) w[j] /= sum;
        centers[x - 1] = u;
        lefts[x - 1] = static_cast<int>(left);
    }

    std::vector<OutputTaps> outputs(static_cast<std::size_t>(dst_extent));
    if (aa) {
        // Positions that carry weight for at least one output form the block.
        std::vector<bool> kept(static_cast<std::size_t>(window), false);
        for (int x = 0; x < dst_extent; ++x) {
            for (int j = 0; j < window; ++j) {
                if (weights[static_cast<std::size_t>(x) * window + j] != 0.0) kept[j] = true;
            }
        }
        for (int x = 0; x < dst_extent; ++x) {
            OutputTaps& o = outputs[x];
            o.center = centers[x] - 1.0;
            for (int j = 0; j < window; ++j) {
                if (kept[j]) o.taps.push_back(Tap{lefts[x] + j - 1, weights[static_cast<std::size_t>(x) * window + j]});
            }
        }
    } else {
        // Fixed nominal window around floor(center), zero-weight positions included.
        const int p = static_cast<int>(base_width(spec.family));
        for (int x = 0; x < dst_extent; ++x) {
            OutputTaps& o = outputs[x];
            o.center = centers[x] - 1.0;
            const int first = static_cast<int>(std::floor(o.center)) - (p / 2 - 1);
            for (int k = 0; k < p; ++k) {
                const int j = first + k + 1 - lefts[x];
                o.taps.push_back(Tap{first + k, weights[static_cast<std::size_t>(x) * window + j]});
            }
        }
    }
    return TapPlan(src_extent, std::move(outputs));
}

ResizePlan make_resize_plan(const ChannelSpec& spec, int src_height, int src_width) {
    spec.validate();
    return ResizePlan{spec,
                      build_tap_plan(spec, src_height, scaled_extent(spec.sf, src_height)),
                      build_tap_plan(spec, src_width, scaled_extent(spec.sf, src_width))};
}

std::uint8_t resample_pixel(const PixelGrid& src, const ResizePlan& plan, int u, int v) {
    return quantize(resample_real(plan, u, v, [&src](int r, int c) { return src(r, c); }));
}

PixelGrid resize(const PixelGrid& src, const ResizePlan& plan) {
    if (src.height() != plan.src_height() || src.width() != plan.src_width()) {
        throw Error(ErrorCode::dimension_mismatch, "source does not match resize plan");
    }
    const int h = plan.dst_height();
    const int w = plan.dst_width();
    std::vector<std::uint8_t> out(static_cast<std::size_t>(h) * w);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) out[static_cast<std::size_t>(u) * w + v] = resample_pixel(src, plan, u, v);
    }
    return PixelGrid(h, w, std::move(out));
}

PixelGrid resize(const PixelGrid& src, const ChannelSpec& spec) {
    return resize(src, make_resize_plan(spec, src.height(), src.width()));
}

InterpolationBlock interpolation_block(const ResizePlan& plan, int u, int v) {
    if (u < 0 || u >= plan.dst_height() || v < 0 || v >= plan.dst_width()) {
        throw Error(ErrorCode::invalid_argument, "output coordinate out of range");
    }
    InterpolationBlock block;
    const auto& vt = plan.vertical[u].taps;
    const auto& ht = plan.horizontal[v].taps;
    for (const Tap& t : vt) block.rows.push_back(t.index);
    for (const Tap& t : ht) block.cols.push_back(t.index);
    block.weights.reserve(vt.size() * ht.size());
    for (const Tap& r : vt) {
        for (const Tap& c : ht) block.weights.push_back(r.weight * c.weight);
    }
    return block;
}

InterpolationBlock interpolation_block(const ChannelSpec& spec, int src_height, int src_width, int u, int v) {
    return interpolation_block(make_resize_plan(spec, src_height, src_width), u, v);
}

}  // namespace scalesteg
