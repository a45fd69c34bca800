#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "scalesteg/channel_analysis.hpp"
#include "scalesteg/pixel_grid.hpp"

namespace scalesteg {

// Finite cost given to perfectly flat pixels; +inf stays reserved for wet sites.
inline constexpr double kWetCeiling = 1e10;
inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct RealGrid {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    RealGrid() = default;
    RealGrid(int h, int w, double fill = 0.0) : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}
    double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
    double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
};

enum class BaseCost { hill, suniward };
enum class Assembly { plain, pro };

const char* to_string(BaseCost base) noexcept;
const char* to_string(Assembly assembly) noexcept;
BaseCost parse_base_cost(const std::string& name);
Assembly parse_assembly(const std::string& name);

// Symmetric per-pixel cost psi of a +-1 change.
using CostFunction = std::function<RealGrid(const PixelGrid&)>;

RealGrid base_cost_hill(const PixelGrid& img);
RealGrid base_cost_suniward(const PixelGrid& img);
CostFunction base_cost(BaseCost base);

struct SiteCost {
    double rho_plus = kInfiniteCost;
    double rho_minus = kInfiniteCost;

    double rho(int direction) const noexcept { return direction > 0 ? rho_plus : rho_minus; }
};

// Costs aligned index-for-index with EmbedPlan::sites.
struct CostMap {
    std::vector<SiteCost> sites;
};

CostMap assemble_plain(const EmbedPlan& plan, const PixelGrid& scaled, const CostFunction& base);
CostMap assemble_pro(const EmbedPlan& plan, const PixelGrid& cover, const CostFunction& base);

// Sets the direction's cost to +inf, e.g. after the solver demotes a site.
void mark_wet(CostMap& costs, std::size_t site, int direction);

}  // namespace scalesteg
