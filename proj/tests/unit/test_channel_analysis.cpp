#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "scalesteg/channel_analysis.hpp"
#include "scalesteg/error.hpp"
#include "test_support.hpp"

using namespace scalesteg;

namespace {

ChannelSpec channel(Family f, bool aa, double sf) {
    ChannelSpec s;
    s.family = f;
    s.antialiasing = aa;
    s.sf = sf;
    return s;
}

std::vector<ChannelSpec> sample_channels() {
    std::vector<ChannelSpec> out;
    for (double sf : {0.3, 0.5, 0.7, 0.9}) {
        out.push_back(channel(Family::nearest, false, sf));
        out.push_back(channel(Family::bilinear, false, sf));
        out.push_back(channel(Family::bicubic, false, sf));
        out.push_back(channel(Family::bilinear, true, sf));
        out.push_back(channel(Family::bicubic, true, sf));
    }
    return out;
}

}  // namespace

TEST_CASE("design parameters for representative channels") {
    struct Row {
        Family f;
        bool aa;
        double sf;
        int p, s, n;
    };
    const Row rows[] = {
        {Family::bilinear, true, 0.5, 4, 2, 4},   {Family::bicubic, false, 0.3, 4, 2, 4},
        {Family::bicubic, true, 0.25, 16, 8, 4},  {Family::bilinear, false, 0.5, 2, 1, 4},
        {Family::bilinear, false, 0.9, 2, 2, 4},  {Family::bicubic, true, 0.5, 8, 4, 4},
        {Family::nearest, false, 0.5, 1, 1, 1},   {Family::nearest, false, 0.7, 1, 1, 1},
    };
    for (const auto& r : rows) {
        const DesignParams d = design_params(channel(r.f, r.aa, r.sf));
        INFO(channel(r.f, r.aa, r.sf).name());
        CHECK(d.p == r.p);
        CHECK(d.s == r.s);
        CHECK(d.n_target == r.n);
        CHECK(d.rate_bound == doctest::Approx(1.0 / (r.s * r.s)));
    }
}

TEST_CASE("dPI with every output embeddable") {
    auto all_outputs = [](const ChannelSpec& spec, int n) {
        std::vector<Coord> ys;
        const int m = scaled_extent(spec.sf, n);
        for (int u = 0; u < m; ++u)
            for (int v = 0; v < m; ++v) ys.push_back({u, v});
        return ys;
    };
    SUBCASE("disjoint 2x2 bilinear blocks cover each pixel once") {
        const auto spec = channel(Family::bilinear, false, 0.5);
        const DpiGrid g = compute_dpi(spec, 32, 32, all_outputs(spec, 32));
        for (int c : g.counts) REQUIRE(c == 1);
    }
    SUBCASE("antialiased bilinear overlaps four blocks in the interior") {
        const auto spec = channel(Family::bilinear, true, 0.5);
        const DpiGrid g = compute_dpi(spec, 32, 32, all_outputs(spec, 32));
        for (int r = 2; r < 30; ++r)
            for (int c = 2; c < 30; ++c) REQUIRE(g(r, c) == 4);
    }
    SUBCASE("no embeddable outputs gives zeros") {
        const DpiGrid g = compute_dpi(channel(Family::bicubic, true, 0.5), 16, 16, {});
        for (int c : g.counts) REQUIRE(c == 0);
    }
    SUBCASE("out-of-range coordinate is rejected") {
        CHECK_THROWS_AS(compute_dpi(channel(Family::bilinear, false, 0.5), 8, 8, {{4, 0}}), Error);
    }
}

TEST_CASE("flat cover through antialiased bilinear 0.5") {
    const PixelGrid cover = testing::constant_grid(512, 512, 128);
    const EmbedPlan plan = build_embed_plan(cover, channel(Family::bilinear, true, 0.5));
    // Interior outputs u have block rows [2u-1, 2u+2] inside [0, 511], i.e. 1 <= u <= 254;
    // stepping by 2 from 1 gives 127 positions per axis.
    int per_axis = 0;
    for (int u = 0; u < 256; ++u) {
        if (2 * u - 1 >= 0 && 2 * u + 2 <= 511 && (u - 1) % 2 == 0) ++per_axis;
    }
    CHECK(per_axis == 127);
    CHECK(plan.sites.size() == static_cast<std::size_t>(per_axis * per_axis));
    CHECK(plan.lattice.s == 2);
    for (const auto& site : plan.sites) {
        REQUIRE(site.support.size() == 4);
        REQUIRE(site.y_value == 128);
        REQUIRE(site.omega_plus == doctest::Approx(0.5625));
        REQUIRE(site.omega_minus == doctest::Approx(0.5625));
        REQUIRE(site.bound_plus == 2);
        REQUIRE(site.bound_minus == 2);
        REQUIRE_FALSE(site.wet_plus);
        REQUIRE_FALSE(site.wet_minus);
    }
    CHECK(plan.capacity_bits == doctest::Approx(16129.0));
    CHECK(verify_plan(plan).ok);
}

TEST_CASE("saturated covers are wet in the blocked direction") {
    const auto spec = channel(Family::bilinear, true, 0.5);
    const EmbedPlan white = build_embed_plan(testing::constant_grid(64, 64, 255), spec);
    for (const auto& site : white.sites) {
        REQUIRE(site.wet_plus);
        REQUIRE_FALSE(site.wet_minus);
    }
    const EmbedPlan black = build_embed_plan(testing::constant_grid(64, 64, 0), spec);
    for (const auto& site : black.sites) {
        REQUIRE(site.wet_minus);
        REQUIRE_FALSE(site.wet_plus);
    }
}

TEST_CASE("mask derivation drops pixels that cannot move") {
    EmbedSite site;
    site.y = {0, 0};
    site.y_value = 200;
    site.y_real = 200.2;
    site.support = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    site.weights = {0.1875, 0.1875, 0.1875, 0.1875};
    site.cover_values = {255, 200, 100, 100};
    derive_site_masks(site);
    // +1: three movable pixels, omega 0.5625, needs two steps.
    CHECK(site.mask_plus == std::vector<bool>{false, true, true, true});
    CHECK(site.bound_plus == 2);
    // One step: omega 0.375 needs 3. Two steps: only one pixel stays in range, needing 6.
    site.cover_values = {255, 254, 100, 255};
    derive_site_masks(site);
    CHECK(site.wet_plus);
    CHECK_FALSE(site.wet_minus);
    CHECK(site.bound_minus == 2);
}

TEST_CASE("clamped outputs mark unreachable directions wet") {
    EmbedSite site;
    site.y = {0, 0};
    site.support = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    site.weights = {0.25, 0.25, 0.25, 0.25};
    site.cover_values = {250, 250, 250, 250};
    // Overshoot far past white: leaving 255 needs a shift of 20.8, beyond 1 * 1.
    site.y_value = 255;
    site.y_real = 275.3;
    derive_site_masks(site);
    CHECK(site.wet_plus);
    CHECK(site.wet_minus);
    CHECK(site.wet_both());
    // Barely clamped: a shift of 1.2 exceeds omega 1 at bound 1, while 0.8 fits.
    site.y_real = 255.7;
    derive_site_masks(site);
    CHECK(site.wet_minus);
    site.y_real = 255.3;
    derive_site_masks(site);
    CHECK_FALSE(site.wet_minus);
    CHECK(site.bound_minus == 1);
    // Undershoot below black mirrors the case.
    site.cover_values = {3, 3, 3, 3};
    site.y_value = 0;
    site.y_real = -4.0;
    derive_site_masks(site);
    CHECK(site.wet_plus);
    CHECK(site.wet_minus);
}

TEST_CASE("real bicubic covers keep every usable site reachable") {
    const EmbedPlan plan = build_embed_plan(testing::random_grid(120, 120, 21), channel(Family::bicubic, false, 0.7));
    std::size_t clamped = 0;
    for (const auto& site : plan.sites) {
        if (site.y_real > 255.5 || site.y_real < -0.5) ++clamped;
        for (int dir : {+1, -1}) {
            if (site.wet(dir)) continue;
            const double need = dir > 0 ? site.y_value + 0.5 - site.y_real : site.y_real - (site.y_value - 0.5);
            REQUIRE(site.omega(dir) * site.bound(dir) >= need);
        }
    }
    CHECK(clamped > 0);
}

TEST_CASE("carrier sites depend on geometry alone") {
    for (const auto& spec : {channel(Family::bilinear, true, 0.7), channel(Family::bicubic, false, 0.7),
                             channel(Family::nearest, false, 0.5), channel(Family::bilinear, true, 0.3)}) {
        const EmbedPlan a = build_embed_plan(testing::random_grid(96, 96, 1), spec);
        const EmbedPlan b = build_embed_plan(testing::constant_grid(96, 96, 128), spec);
        REQUIRE(a.lattice == b.lattice);
        const auto carriers = carrier_sites(a.resize, a.lattice);
        CHECK(carriers == carrier_sites(b.resize, b.lattice));
        std::vector<bool> is_carrier(a.sites.size(), false);
        for (std::size_t k : carriers) is_carrier[k] = true;
        for (std::size_t k = 0; k < a.sites.size(); ++k) {
            // Non-carriers can never carry; a flat mid-grey cover uses every carrier.
            if (!is_carrier[k]) REQUIRE(a.sites[k].wet_both());
            REQUIRE(is_carrier[k] == !b.sites[k].wet_both());
        }
    }
}

TEST_CASE("nearest sites move a single pixel by one") {
    const EmbedPlan plan = build_embed_plan(testing::random_grid(40, 40, 9), channel(Family::nearest, false, 0.5));
    for (const auto& site : plan.sites) {
        REQUIRE(site.support.size() == 1);
        if (!site.wet_plus) REQUIRE(site.bound_plus == 1);
        if (!site.wet_minus) REQUIRE(site.bound_minus == 1);
    }
}

TEST_CASE("verify_plan catches structural corruption") {
    const EmbedPlan good = build_embed_plan(testing::random_grid(96, 96, 4), channel(Family::bicubic, false, 0.5));
    REQUIRE(verify_plan(good).ok);
    SUBCASE("overlapping support") {
        EmbedPlan bad = good;
        bad.sites[1].support = bad.sites[0].support;
        CHECK_FALSE(verify_plan(bad).ok);
    }
    SUBCASE("usable direction with an empty mask") {
        EmbedPlan bad = good;
        auto& s = bad.sites[0];
        REQUIRE_FALSE(s.wet_plus);
        s.mask_plus.assign(s.mask_plus.size(), false);
        CHECK_FALSE(verify_plan(bad).ok);
    }
}

TEST_CASE("support pixels are private to their site") {
    for (const auto& spec : sample_channels()) {
        INFO(spec.name());
        const PixelGrid cover = testing::textured_grid(90, 77, 13);
        const EmbedPlan plan = build_embed_plan(cover, spec);
        const DpiGrid dpi = compute_dpi(plan.resize, plan.site_coords());
        std::set<Coord> seen;
        for (const auto& site : plan.sites) {
            REQUIRE(site.support.size() <= 4);
            for (const Coord& c : site.support) {
                REQUIRE(dpi(c.row, c.col) == 1);
                REQUIRE(seen.insert(c).second);
            }
        }
    }
}

TEST_CASE("changing one site's support leaves every other site's real value intact") {
    for (const auto& spec : sample_channels()) {
        INFO(spec.name());
        const PixelGrid cover = testing::random_grid(70, 64, 21);
        const EmbedPlan plan = build_embed_plan(cover, spec);
        std::vector<double> base;
        auto px = [&](int r, int c) { return static_cast<int>(cover(r, c)); };
        for (const auto& s : plan.sites) base.push_back(resample_real(plan.resize, s.y.row, s.y.col, px));
        for (std::size_t k = 0; k < plan.sites.size(); k += 3) {
            std::map<Coord, int> delta;
            for (const Coord& c : plan.sites[k].support) delta[c] = 37;
            auto moved = [&](int r, int c) {
                auto it = delta.find({r, c});
                return px(r, c) + (it == delta.end() ? 0 : it->second);
            };
            for (std::size_t j = 0; j < plan.sites.size(); ++j) {
                if (j == k) continue;
                const auto& s = plan.sites[j];
                REQUIRE(resample_real(plan.resize, s.y.row, s.y.col, moved) == base[j]);
            }
        }
    }
}

TEST_CASE("larger sampling intervals never shrink a shared site's usable weight") {
    for (const auto& spec : sample_channels()) {
        INFO(spec.name());
        const PixelGrid cover = testing::textured_grid(128, 128, 2);
        const int s0 = design_params(spec).s;
        std::size_t prev_sites = SIZE_MAX;
        for (int s = s0; s <= s0 + 3; ++s) {
            PlanOptions opt;
            opt.override_s = s;
            const EmbedPlan plan = build_embed_plan(cover, spec, opt);
            CHECK(plan.sites.size() <= prev_sites);
            prev_sites = plan.sites.size();
            PlanOptions wide;
            wide.override_s = s * 2;
            const EmbedPlan sparse = build_embed_plan(cover, spec, wide);
            std::map<Coord, const EmbedSite*> dense;
            for (const auto& site : plan.sites) dense[site.y] = &site;
            for (const auto& site : sparse.sites) {
                const auto it = dense.find(site.y);
                if (it == dense.end()) continue;
                REQUIRE(site.support.size() >= it->second->support.size());
                REQUIRE(site.omega_plus >= it->second->omega_plus - 1e-12);
            }
        }
    }
}

TEST_CASE("override below the channel minimum is rejected") {
    PlanOptions opt;
    opt.override_s = 1;
    CHECK_THROWS_AS(build_embed_plan(testing::random_grid(64, 64, 1), channel(Family::bilinear, true, 0.5), opt), Error);
}

TEST_CASE("capacity counts sites with a usable direction") {
    std::vector<EmbedSite> sites(3);
    sites[0].wet_plus = false;
    sites[1].wet_minus = false;
    CHECK(plan_capacity(sites) == 2.0);
}
