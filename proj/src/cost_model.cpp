#include "scalesteg/cost_model.hpp"

#include <array>
#include <cmath>

#include "scalesteg/error.hpp"

namespace scalesteg {

namespace {

// Half-sample symmetric reflection, valid for any offset.
int mirror(int i, int n) {
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

// Grid addressed with a signed origin: rows [r0, r0+h), cols [c0, c0+w).
struct OffsetGrid {
    int r0, c0, h, w;
    std::vector<double> v;

    OffsetGrid(int r0_, int c0_, int h_, int w_)
        : r0(r0_), c0(c0_), h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0.0) {}
    double& at(int r, int c) { return v[static_cast<std::size_t>(r - r0) * w + (c - c0)]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r - r0) * w + (c - c0)]; }
};

RealGrid mean_filter(const RealGrid& in, int k) {
    const int half = k / 2;
    RealGrid rows(in.height, in.width);
    for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
            double s = 0.0;
            for (int d = -half; d <= half; ++d) s += in(r, mirror(c + d, in.width));
            rows(r, c) = s;
        }
    }
    RealGrid out(in.height, in.width);
    for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
            double s = 0.0;
            for (int d = -half; d <= half; ++d) s += rows(mirror(r + d, in.height), c);
            out(r, c) = s / static_cast<double>(k * k);
        }
    }
    return out;
}

// Daubechies-8 high-pass decomposition filter.
constexpr std::array<double, 16> kDb8High = {
    -0.054415842243081609, 0.31287159091446592,  -0.67563073629801285,   0.58535468365486909,
    0.015829105256023893,  -0.28401554296242809, -0.00047248457399797254, 0.12874742662018601,
    0.017369301002022108,  -0.044088253931064719, -0.013981027917015516, 0.0087460940470156547,
    0.0048703529930106603, -0.00039174037299597711, -0.00067544940599855677, -0.00011747678400228192};

std::array<double, 16> db8_low() {
    std::array<double, 16> low{};
    for (int i = 0; i < 16; ++i) low[i] = ((i % 2) ? -1.0 : 1.0) * kDb8High[15 - i];
    return low;
}

// Sensitivity of one directional residual: sum_q |F(q-p)| / (|R(q)| + sigma),
// with F = col * row^T applied as a 2-D convolution centred at index 8.
RealGrid wavelet_sensitivity(const PixelGrid& img, const std::array<double, 16>& col,
                             const std::array<double, 16>& row, double sigma) {
    constexpr int K = 16;
    constexpr int off = 8;
    const int H = img.height();
    const int W = img.width();

    // Horizontal pass on mirrored input rows [-15, H+15], residual columns [-8, W+8).
    OffsetGrid t(-off - (K - 1 - off), -off, H + 2 * off + (K - 1), W + 2 * off);
    for (int r = t.r0; r < t.r0 + t.h; ++r) {
        const int rr = mirror(r, H);
        for (int c = t.c0; c < t.c0 + t.w; ++c) {
            double s = 0.0;
            for (int j = 0; j < K; ++j) s += row[j] * img(rr, mirror(c + off - j, W));
            t.at(r, c) = s;
        }
    }
    // Vertical pass, then the reciprocal residual magnitude.
    OffsetGrid d(-off, -off, H + 2 * off, W + 2 * off);
    for (int r = d.r0; r < d.r0 + d.h; ++r) {
        for (int c = d.c0; c < d.c0 + d.w; ++c) {
            double s = 0.0;
            for (int i = 0; i < K; ++i) s += col[i] * t.at(r + off - i, c);
            d.at(r, c) = 1.0 / (std::fabs(s) + sigma);
        }
    }
    // Correlate with |F|, again separably.
    OffsetGrid u(-off, 0, H + 2 * off, W);
    for (int r = u.r0; r < u.r0 + u.h; ++r) {
        for (int c = 0; c < W; ++c) {
            double s = 0.0;
            for (int j = 0; j < K; ++j) s += std::fabs(row[j]) * d.at(r, c + j - off);
            u.at(r, c) = s;
        }
    }
    RealGrid out(H, W);
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            double s = 0.0;
            for (int i = 0; i < K; ++i) s += std::fabs(col[i]) * u.at(r + i - off, c);
            out(r, c) = s;
        }
    }
    return out;
}

void check_shape(const PixelGrid& img, int h, int w, const char* what) {
    if (img.height() != h || img.width() != w) {
        throw Error(ErrorCode::dimension_mismatch, std::string(what) + " does not match the plan dimensions");
    }
}

}  // namespace

const char* to_string(BaseCost base) noexcept { return base == BaseCost::hill ? "hill" : "suniward"; }
const char* to_string(Assembly assembly) noexcept { return assembly == Assembly::plain ? "plain" : "pro"; }

BaseCost parse_base_cost(const std::string& name) {
    if (name == "hill") return BaseCost::hill;
    if (name == "suniward") return BaseCost::suniward;
    throw Error(ErrorCode::invalid_argument, "unknown base cost: " + name);
}

Assembly parse_assembly(const std::string& name) {
    if (name == "plain") return Assembly::plain;
    if (name == "pro") return Assembly::pro;
    throw Error(ErrorCode::invalid_argument, "unknown cost assembly: " + name);
}

RealGrid base_cost_hill(const PixelGrid& img) {
    static constexpr int kb[3][3] = {{-1, 2, -1}, {2, -4, 2}, {-1, 2, -1}};
    const int H = img.height();
    const int W = img.width();
    RealGrid residual(H, W);
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            int s = 0;
            for (int a = -1; a <= 1; ++a) {
                for (int b = -1; b <= 1; ++b) s += kb[a + 1][b + 1] * img(mirror(r + a, H), mirror(c + b, W));
            }
            residual(r, c) = std::abs(s);
        }
    }
    RealGrid inv = mean_filter(residual, 3);
    for (double& v : inv.values) v = v > 0.0 ? 1.0 / v : kWetCeiling;
    RealGrid cost = mean_filter(inv, 15);
    for (double& v : cost.values) v = std::min(v, kWetCeiling);
    return cost;
}

RealGrid base_cost_suniward(const PixelGrid& img) {
    constexpr double sigma = 1.0;
    const auto low = db8_low();
    const auto& high = kDb8High;
    RealGrid cost = wavelet_sensitivity(img, low, high, sigma);
    const RealGrid lh = wavelet_sensitivity(img, high, low, sigma);
    const RealGrid hh = wavelet_sensitivity(img, high, high, sigma);
    for (std::size_t i = 0; i < cost.values.size(); ++i) {
        cost.values[i] = std::min(cost.values[i] + lh.values[i] + hh.values[i], kWetCeiling);
    }
    return cost;
}

CostFunction base_cost(BaseCost base) {
    if (base == BaseCost::hill) return base_cost_hill;
    return base_cost_suniward;
}

CostMap assemble_plain(const EmbedPlan& plan, const PixelGrid& scaled, const CostFunction& base) {
    check_shape(scaled, plan.scaled_height(), plan.scaled_width(), "scaled image");
    const RealGrid psi = base(scaled);
    CostMap costs;
    costs.sites.reserve(plan.sites.size());
    for (const auto& site : plan.sites) {
        const double v = psi(site.y.row, site.y.col);
        costs.sites.push_back(SiteCost{site.wet_plus ? kInfiniteCost : v, site.wet_minus ? kInfiniteCost : v});
    }
    return costs;
}

CostMap assemble_pro(const EmbedPlan& plan, const PixelGrid& cover, const CostFunction& base) {
    check_shape(cover, plan.cover_height(), plan.cover_width(), "cover");
    const RealGrid psi = base(cover);
    CostMap costs;
    costs.sites.reserve(plan.sites.size());
    for (const auto& site : plan.sites) {
        SiteCost sc;
        for (int dir : {+1, -1}) {
            if (site.wet(dir)) continue;
            double sum = 0.0;
            int count = 0;
            const auto& mask = site.mask(dir);
            for (std::size_t k = 0; k < site.support.size(); ++k) {
                if (!mask[k]) continue;
                sum += psi(site.support[k].row, site.support[k].col);
                ++count;
            }
            if (count == 0) throw Error(ErrorCode::invalid_argument, "usable direction with an empty mask");
            (dir > 0 ? sc.rho_plus : sc.rho_minus) = sum / count;
        }
        costs.sites.push_back(sc);
    }
    return costs;
}

void mark_wet(CostMap& costs, std::size_t site, int direction) {
    if (site >= costs.sites.size()) throw Error(ErrorCode::invalid_argument, "site index out of range");
    (direction > 0 ? costs.sites[site].rho_plus : costs.sites[site].rho_minus) = kInfiniteCost;
}

}  // namespace scalesteg
