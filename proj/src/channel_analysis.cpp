#include "scalesteg/channel_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "scalesteg/error.hpp"

namespace scalesteg {

namespace {

struct AxisRange {
    int first = 0;
    int last = -1;  // inclusive; empty when last < first
};

AxisRange interior_range(const TapPlan& tp) {
    AxisRange r;
    int u = 0;
    while (u < tp.dst_extent() && !tp.interior(u)) ++u;
    r.first = u;
    while (u < tp.dst_extent() && tp.interior(u)) ++u;
    r.last = u - 1;
    return r;
}

// Lattice positions along one axis: congruent to the phase, inside the interior range.
std::vector<int> axis_positions(const TapPlan& tp, int s, std::optional<int> phase) {
    const AxisRange r = interior_range(tp);
    std::vector<int> out;
    if (r.last < r.first) return out;
    int start = r.first;
    if (phase) {
        const int ph = ((*phase % s) + s) % s;
        while (start % s != ph) ++start;
    }
    for (int u = start; u <= r.last; u += s) out.push_back(u);
    return out;
}

// Membership count of every source index in the blocks of the given outputs.
std::vector<int> axis_counts(const TapPlan& tp, const std::vector<int>& positions) {
    std::vector<int> counts(static_cast<std::size_t>(tp.src_extent()), 0);
    for (int u : positions) {
        std::set<int> seen;
        for (const Tap& t : tp[u].taps) seen.insert(tp.clamp(t.index));
        for (int i : seen) ++counts[static_cast<std::size_t>(i)];
    }
    return counts;
}

// The one or two block positions at the middle of the block span (upper-left on ties).
std::vector<int> centred_pair(const OutputTaps& o) {
    const int a = o.taps.front().index;
    const int span = o.taps.back().index - a + 1;
    if (o.taps.size() == 1) return {a};
    return {a + span / 2 - 1, a + span / 2};
}

double axis_weight(const OutputTaps& o, int index) {
    for (const Tap& t : o.taps) {
        if (t.index == index) return t.weight;
    }
    return 0.0;
}

std::vector<std::vector<int>> axis_support(const TapPlan& tp, const std::vector<int>& positions,
                                           const std::vector<int>& counts) {
    std::vector<std::vector<int>> out;
    out.reserve(positions.size());
    for (int u : positions) {
        std::vector<int> keep;
        for (int i : centred_pair(tp[u])) {
            if (i >= 0 && i < tp.src_extent() && counts[static_cast<std::size_t>(i)] == 1) keep.push_back(i);
        }
        out.push_back(std::move(keep));
    }
    return out;
}

bool blocks_disjoint(const std::vector<int>& counts) {
    return std::all_of(counts.begin(), counts.end(), [](int c) { return c <= 1; });
}

// Most frequent support size over all row/column pairings, smaller size on ties.
int modal_support(const TapPlan& tp, int s) {
    const auto positions = axis_positions(tp, s, std::nullopt);
    const auto counts = axis_counts(tp, positions);
    const auto support = axis_support(tp, positions, counts);
    std::map<int, long long> per_axis;
    for (const auto& sp : support) ++per_axis[static_cast<int>(sp.size())];
    std::map<int, long long> hist;
    for (const auto& [a, na] : per_axis) {
        for (const auto& [b, nb] : per_axis) hist[a * b] += na * nb;
    }
    int best = 0;
    long long best_count = -1;
    for (const auto& [n, count] : hist) {
        if (count > best_count) {
            best = n;
            best_count = count;
        }
    }
    return best;
}

int ceil_inverse(double omega) { return static_cast<int>(std::ceil(1.0 / omega)); }

}  // namespace

void EmbedSite::make_wet(int direction) {
    if (direction > 0) {
        wet_plus = true;
        std::fill(mask_plus.begin(), mask_plus.end(), false);
        omega_plus = 0.0;
        bound_plus = 0;
    } else {
        wet_minus = true;
        std::fill(mask_minus.begin(), mask_minus.end(), false);
        omega_minus = 0.0;
        bound_minus = 0;
    }
}

std::vector<Coord> EmbedPlan::site_coords() const {
    std::vector<Coord> out;
    out.reserve(sites.size());
    for (const auto& s : sites) out.push_back(s.y);
    return out;
}

DesignParams design_params(const ChannelSpec& spec) {
    spec.validate();
    DesignParams d;
    if (spec.family == Family::nearest) {
        d.p = 1;
        d.s = 1;
        d.n_target = 1;
    } else {
        const TapPlan tp = build_tap_plan(spec, kReferenceExtent, scaled_extent(spec.sf, kReferenceExtent));
        d.p = tp.support();
        if (spec.effective_antialiasing()) {
            d.s = (d.p + 1) / 2;
        } else if (blocks_disjoint(axis_counts(tp, axis_positions(tp, 1, std::nullopt)))) {
            d.s = 1;
        } else {
            d.s = 2;
            while (d.s <= d.p && modal_support(tp, d.s) != 4) ++d.s;
        }
        d.n_target = modal_support(tp, d.s);
    }
    d.rate_bound = 1.0 / (d.s * d.s);
    d.table_rate = std::sqrt(3.0) / (d.s * d.s);
    return d;
}

DpiGrid compute_dpi(const ResizePlan& plan, const std::vector<Coord>& embeddable) {
    DpiGrid g{plan.src_height(), plan.src_width(), {}};
    g.counts.assign(static_cast<std::size_t>(g.height) * g.width, 0);
    for (const Coord& y : embeddable) {
        if (y.row < 0 || y.row >= plan.dst_height() || y.col < 0 || y.col >= plan.dst_width()) {
            throw Error(ErrorCode::invalid_argument, "embeddable coordinate outside the scaled image");
        }
        std::set<int> rows;
        std::set<int> cols;
        for (const Tap& t : plan.vertical[y.row].taps) rows.insert(plan.vertical.clamp(t.index));
        for (const Tap& t : plan.horizontal[y.col].taps) cols.insert(plan.horizontal.clamp(t.index));
        for (int r : rows) {
            for (int c : cols) ++g.counts[static_cast<std::size_t>(r) * g.width + c];
        }
    }
    return g;
}

DpiGrid compute_dpi(const ChannelSpec& spec, int cover_height, int cover_width, const std::vector<Coord>& embeddable) {
    return compute_dpi(make_resize_plan(spec, cover_height, cover_width), embeddable);
}

void derive_site_masks(EmbedSite& site) {
    const std::size_t n = site.support.size();
    for (int dir : {+1, -1}) {
        std::vector<bool> mask(n, false);
        double omega = 0.0;
        int bound = 0;
        bool wet = dir > 0 ? site.y_value >= 255 : site.y_value <= 0;
        if (!wet) {
            wet = true;
            for (int delta = 1; delta <= kMaxBound && wet; ++delta) {
                std::vector<bool> cand(n, false);
                double sum = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const int moved = site.cover_values[k] + dir * delta;
                    if (site.weights[k] > 0.0 && moved >= 0 && moved <= 255) {
                        cand[k] = true;
                        sum += site.weights[k];
                    }
                }
                if (sum > 0.0 && ceil_inverse(sum) <= delta) {
                    mask = std::move(cand);
                    omega = sum;
                    bound = ceil_inverse(sum);
                    wet = false;
                }
            }
            // Shift needed to cross the rounding boundary; above 1 only when the output is clamped.
            const double need = dir > 0 ? site.y_value + 0.5 - site.y_real : site.y_real - (site.y_value - 0.5);
            if (!wet && omega * bound < need) {
                std::fill(mask.begin(), mask.end(), false);
                omega = 0.0;
                bound = 0;
                wet = true;
            }
        }
        if (dir > 0) {
            site.mask_plus = std::move(mask);
            site.omega_plus = omega;
            site.bound_plus = bound;
            site.wet_plus = wet;
        } else {
            site.mask_minus = std::move(mask);
            site.omega_minus = omega;
            site.bound_minus = bound;
            site.wet_minus = wet;
        }
    }
}

double plan_capacity(const std::vector<EmbedSite>& sites) {
    double bits = 0.0;
    for (const auto& s : sites) {
        if (!s.wet_both()) bits += 1.0;
    }
    return bits;
}

std::vector<std::size_t> carrier_sites(const ResizePlan& plan, const Lattice& lattice) {
    const TapPlan& vt = plan.vertical;
    const TapPlan& ht = plan.horizontal;
    std::vector<int> rows;
    std::vector<int> cols;
    for (int a = 0; a < lattice.rows; ++a) rows.push_back(lattice.row(a));
    for (int b = 0; b < lattice.cols; ++b) cols.push_back(lattice.col(b));
    for (int u : rows) {
        if (u < 0 || u >= vt.dst_extent()) throw Error(ErrorCode::invalid_key, "lattice row outside the scaled image");
    }
    for (int v : cols) {
        if (v < 0 || v >= ht.dst_extent()) throw Error(ErrorCode::invalid_key, "lattice column outside the scaled image");
    }
    const auto row_support = axis_support(vt, rows, axis_counts(vt, rows));
    const auto col_support = axis_support(ht, cols, axis_counts(ht, cols));
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            double omega = 0.0;
            for (int i : row_support[a]) {
                for (int j : col_support[b]) {
                    const double w = axis_weight(vt[rows[a]], i) * axis_weight(ht[cols[b]], j);
                    if (w > 0.0) omega += w;
                }
            }
            if (omega > 0.0 && ceil_inverse(omega) <= kMaxBound) out.push_back(a * cols.size() + b);
        }
    }
    return out;
}

EmbedPlan build_embed_plan(const PixelGrid& cover, const ChannelSpec& spec, const PlanOptions& options) {
    if (cover.empty()) throw Error(ErrorCode::invalid_argument, "empty cover");
    const DesignParams design = design_params(spec);
    int s = design.s;
    if (options.override_s) {
        if (*options.override_s < design.s) {
            throw Error(ErrorCode::invalid_argument,
                        "sampling interval override below the channel minimum of " + std::to_string(design.s));
        }
        s = *options.override_s;
    }

    EmbedPlan plan;
    plan.channel = spec;
    plan.resize = make_resize_plan(spec, cover.height(), cover.width());
    const TapPlan& vt = plan.resize.vertical;
    const TapPlan& ht = plan.resize.horizontal;

    const auto rows = axis_positions(vt, s, options.row_phase);
    const auto cols = axis_positions(ht, s, options.col_phase);
    if (rows.empty() || cols.empty()) {
        throw Error(ErrorCode::invalid_argument, "cover too small to host any embedding site");
    }
    plan.lattice = Lattice{s, rows.front(), cols.front(), static_cast<int>(rows.size()), static_cast<int>(cols.size())};

    const auto row_support = axis_support(vt, rows, axis_counts(vt, rows));
    const auto col_support = axis_support(ht, cols, axis_counts(ht, cols));

    plan.sites.reserve(plan.lattice.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            EmbedSite site;
            site.y = Coord{rows[a], cols[b]};
            site.y_real = resample_real(plan.resize, rows[a], cols[b], [&cover](int r, int c) { return cover(r, c); });
            site.y_value = quantize(site.y_real);
            for (int i : row_support[a]) {
                for (int j : col_support[b]) {
                    site.support.push_back(Coord{i, j});
                    site.weights.push_back(axis_weight(vt[rows[a]], i) * axis_weight(ht[cols[b]], j));
                    site.cover_values.push_back(cover(i, j));
                }
            }
            derive_site_masks(site);
            plan.sites.push_back(std::move(site));
        }
    }
    plan.capacity_bits = plan_capacity(plan.sites);
    return plan;
}

PlanReport verify_plan(const EmbedPlan& plan) {
    PlanReport rep;
    rep.sites = plan.sites.size();
    auto fail = [&rep](std::string msg) {
        rep.ok = false;
        if (rep.failures.size() < 64) rep.failures.push_back(std::move(msg));
    };
    auto where = [](const EmbedSite& s) {
        return "site (" + std::to_string(s.y.row) + "," + std::to_string(s.y.col) + ")";
    };

    std::set<Coord> used;
    const DpiGrid dpi = compute_dpi(plan.resize, plan.site_coords());
    for (const auto& site : plan.sites) {
        const std::size_t n = site.support.size();
        if (site.weights.size() != n || site.cover_values.size() != n || site.mask_plus.size() != n ||
            site.mask_minus.size() != n) {
            fail(where(site) + ": inconsistent per-pixel arrays");
            continue;
        }
        if (n > 4) fail(where(site) + ": supporting block larger than 2x2");
        for (const Coord& c : site.support) {
            if (!used.insert(c).second) fail(where(site) + ": support overlaps another site");
            if (c.row < 0 || c.row >= dpi.height || c.col < 0 || c.col >= dpi.width) {
                fail(where(site) + ": support outside the cover");
            } else if (dpi(c.row, c.col) != 1) {
                fail(where(site) + ": support pixel with dPI " + std::to_string(dpi(c.row, c.col)));
            }
        }
        for (int dir : {+1, -1}) {
            const auto& mask = site.mask(dir);
            const bool any = std::find(mask.begin(), mask.end(), true) != mask.end();
            if (site.wet(dir)) {
                if (any) fail(where(site) + ": wet direction with a nonempty mask");
                continue;
            }
            if (!any) fail(where(site) + ": usable direction with an empty mask");
            double omega = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (!mask[k]) continue;
                omega += site.weights[k];
                const int moved = site.cover_values[k] + dir * site.bound(dir);
                if (moved < 0 || moved > 255) fail(where(site) + ": masked pixel can leave [0,255]");
            }
            if (!(omega > 0.0) || std::fabs(omega - site.omega(dir)) > 1e-12) {
                fail(where(site) + ": weight sum does not match the mask");
            }
            if (site.bound(dir) > kMaxBound) fail(where(site) + ": bound above the cap");
            if (omega > 0.0 && site.bound(dir) != ceil_inverse(site.omega(dir))) {
                fail(where(site) + ": bound differs from ceil(1/omega)");
            }
        }
        if (site.wet_plus) ++rep.wet_plus;
        if (site.wet_minus) ++rep.wet_minus;
        if (site.wet_both()) ++rep.wet_both;
    }
    rep.capacity_bits = plan_capacity(plan.sites);
    if (rep.capacity_bits != plan.capacity_bits) fail("capacity does not match the site list");
    return rep;
}

}  // namespace scalesteg
