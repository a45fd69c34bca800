#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scalesteg/pixel_grid.hpp"
#include "scalesteg/resampler.hpp"

namespace scalesteg {

// Axis length used when reporting channel-level design parameters.
inline constexpr int kReferenceExtent = 512;
// Per-pixel modification cap.
inline constexpr int kMaxBound = 2;

struct DesignParams {
    int p = 1;               // interpolation support per axis
    int s = 1;               // sampling interval in the scaled image
    int n_target = 1;        // modal count of dPI=1 pixels in a supporting block
    double rate_bound = 1;   // codec bits per scaled pixel, 1/s^2
    double table_rate = 1;   // ternary reference figure sqrt(3)/s^2, informational
};

DesignParams design_params(const ChannelSpec& spec);

// Arithmetic progression of embeddable coordinates along both axes of Y.
struct Lattice {
    int s = 1;
    int row_start = 0;
    int col_start = 0;
    int rows = 0;
    int cols = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * cols; }
    int row(int k) const noexcept { return row_start + k * s; }
    int col(int k) const noexcept { return col_start + k * s; }
    bool operator==(const Lattice&) const = default;
};

struct EmbedSite {
    Coord y;                          // position in the scaled image
    int y_value = 0;                  // resize(cover) at y
    double y_real = 0.0;              // the same output before rounding and clamping
    std::vector<Coord> support;       // supporting block in the cover, at most 2x2
    std::vector<double> weights;      // interpolation weight of each support pixel
    std::vector<int> cover_values;    // cover intensity of each support pixel
    std::vector<bool> mask_plus;
    std::vector<bool> mask_minus;
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    int bound_plus = 0;
    int bound_minus = 0;
    bool wet_plus = true;
    bool wet_minus = true;

    bool wet(int direction) const noexcept { return direction > 0 ? wet_plus : wet_minus; }
    bool wet_both() const noexcept { return wet_plus && wet_minus; }
    const std::vector<bool>& mask(int direction) const noexcept { return direction > 0 ? mask_plus : mask_minus; }
    double omega(int direction) const noexcept { return direction > 0 ? omega_plus : omega_minus; }
    int bound(int direction) const noexcept { return direction > 0 ? bound_plus : bound_minus; }
    // Clears the direction's mask and marks it wet.
    void make_wet(int direction);
};

struct EmbedPlan {
    ChannelSpec channel;
    ResizePlan resize;
    Lattice lattice;
    std::vector<EmbedSite> sites;  // row-major over the lattice
    double capacity_bits = 0.0;

    int cover_height() const noexcept { return resize.src_height(); }
    int cover_width() const noexcept { return resize.src_width(); }
    int scaled_height() const noexcept { return resize.dst_height(); }
    int scaled_width() const noexcept { return resize.dst_width(); }
    std::vector<Coord> site_coords() const;
};

struct PlanOptions {
    std::optional<int> override_s;
    // Lattice phase per axis (coordinate mod s); default starts at the first interior output.
    std::optional<int> row_phase;
    std::optional<int> col_phase;
};

// Integer grid over cover coordinates.
struct DpiGrid {
    int height = 0;
    int width = 0;
    std::vector<int> counts;

    int operator()(int r, int c) const { return counts[static_cast<std::size_t>(r) * width + c]; }
};

// Number of embeddable outputs whose interpolation block contains each cover pixel.
DpiGrid compute_dpi(const ResizePlan& plan, const std::vector<Coord>& embeddable);
DpiGrid compute_dpi(const ChannelSpec& spec, int cover_height, int cover_width, const std::vector<Coord>& embeddable);

EmbedPlan build_embed_plan(const PixelGrid& cover, const ChannelSpec& spec, const PlanOptions& options = {});

// Recomputes masks, bounds and wet flags for one site from its support values
// and pre-rounding output. A direction is wet when its masked pixels cannot
// shift the output across the next rounding boundary within the bound.
void derive_site_masks(EmbedSite& site);

// Lattice sites, row-major, whose full supporting block could reach a unit
// change within the bound. Depends on geometry only, so the receiver derives
// the same list from the key; the codec skips every other site.
std::vector<std::size_t> carrier_sites(const ResizePlan& plan, const Lattice& lattice);

// Capacity of the binary codec: one bit per site with a usable direction.
double plan_capacity(const std::vector<EmbedSite>& sites);

struct PlanReport {
    bool ok = true;
    std::vector<std::string> failures;
    std::size_t sites = 0;
    std::size_t wet_plus = 0;
    std::size_t wet_minus = 0;
    std::size_t wet_both = 0;
    double capacity_bits = 0.0;
};

PlanReport verify_plan(const EmbedPlan& plan);

}  // namespace scalesteg
