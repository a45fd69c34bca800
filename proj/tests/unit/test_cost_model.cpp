#include <doctest.h>

#include <cmath>

#include "scalesteg/cost_model.hpp"
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

// Same formula as the numpy reference in tests/oracle/make_cost_golden.py.
PixelGrid oracle_image() {
    std::vector<std::uint8_t> data;
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 20; ++c) data.push_back(static_cast<std::uint8_t>((r * r * 7 + c * 13 + ((r * c) % 11) * 9) % 256));
    return PixelGrid(24, 20, std::move(data));
}

struct Frozen {
    int r, c;
    double value;
};

PixelGrid shifted(const PixelGrid& g, int dr, int dc) {
    std::vector<std::uint8_t> data(g.size());
    for (int r = 0; r < g.height(); ++r)
        for (int c = 0; c < g.width(); ++c)
            data[static_cast<std::size_t>(r) * g.width() + c] =
                g((r - dr + g.height()) % g.height(), (c - dc + g.width()) % g.width());
    return PixelGrid(g.height(), g.width(), std::move(data));
}

}  // namespace

TEST_CASE("HiLL matches the numpy reference") {
    const Frozen expected[] = {
        {0, 0, 533333333.38553715},      {3, 5, 444444444.49510419},    {11, 9, 0.0056457785194284522},
        {12, 0, 0.0054555233934613992}, {23, 19, 0.029582974832048008}, {17, 13, 88888888.910845309},
    };
    const RealGrid cost = base_cost_hill(oracle_image());
    for (const auto& e : expected) {
        INFO(e.r << "," << e.c);
        CHECK(cost(e.r, e.c) == doctest::Approx(e.value).epsilon(1e-10));
    }
}

TEST_CASE("S-UNIWARD matches the numpy reference") {
    // Filter taps differ from PyWavelets' in the eleventh digit.
    const Frozen expected[] = {
        {0, 0, 3.0696853268506565},    {3, 5, 0.72163531665565472},  {11, 9, 1.1112625728280439},
        {12, 0, 0.81551685949022845}, {23, 19, 1.4080945616139913}, {17, 13, 0.84902134329611023},
    };
    const RealGrid cost = base_cost_suniward(oracle_image());
    for (const auto& e : expected) {
        INFO(e.r << "," << e.c);
        CHECK(cost(e.r, e.c) == doctest::Approx(e.value).epsilon(1e-8));
    }
}

TEST_CASE("flat images hit the finite ceiling under HiLL") {
    const RealGrid cost = base_cost_hill(testing::constant_grid(20, 20, 77));
    for (double v : cost.values) REQUIRE(v == kWetCeiling);
}

TEST_CASE("S-UNIWARD on a flat image is positive and uniform") {
    const RealGrid cost = base_cost_suniward(testing::constant_grid(20, 24, 90));
    for (double v : cost.values) {
        REQUIRE(v > 0.0);
        REQUIRE(v == doctest::Approx(cost.values.front()).epsilon(1e-12));
    }
}

TEST_CASE("texture is cheaper than flat content") {
    std::vector<std::uint8_t> data(64 * 64);
    const PixelGrid noise = testing::random_grid(64, 64, 8);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) data[static_cast<std::size_t>(r) * 64 + c] = c < 32 ? noise(r, c) : 128;
    const PixelGrid half(64, 64, std::move(data));
    for (auto fn : {base_cost_hill, base_cost_suniward}) {
        const RealGrid cost = fn(half);
        double tex = 0.0, flat = 0.0;
        for (int r = 20; r < 44; ++r) {
            tex += cost(r, 8);
            flat += cost(r, 56);
        }
        CHECK(tex < flat);
    }
}

TEST_CASE("costs follow the content when it is shifted") {
    const PixelGrid a = testing::textured_grid(96, 96, 31);
    const PixelGrid b = shifted(a, 3, 5);
    struct Case {
        RealGrid (*fn)(const PixelGrid&);
        int margin;
    };
    for (const Case& k : {Case{base_cost_hill, 10}, Case{base_cost_suniward, 17}}) {
        const RealGrid ca = k.fn(a);
        const RealGrid cb = k.fn(b);
        for (int r = k.margin + 3; r < 96 - k.margin; ++r)
            for (int c = k.margin + 5; c < 96 - k.margin; ++c)
                REQUIRE(cb(r, c) == doctest::Approx(ca(r - 3, c - 5)).epsilon(1e-9));
    }
}

TEST_CASE("name parsing") {
    CHECK(parse_base_cost("hill") == BaseCost::hill);
    CHECK(parse_assembly("pro") == Assembly::pro);
    CHECK_THROWS_AS(parse_base_cost("wow"), Error);
    CHECK_THROWS_AS(parse_assembly("mixed"), Error);
}

TEST_CASE("plain and pro assembly arithmetic") {
    const PixelGrid cover = testing::textured_grid(64, 64, 5);
    const EmbedPlan plan = build_embed_plan(cover, channel(Family::bilinear, true, 0.5));
    // A base cost that reads back the pixel index lets the test recompute each mean.
    const CostFunction index_cost = [](const PixelGrid& g) {
        RealGrid out(g.height(), g.width());
        for (int r = 0; r < g.height(); ++r)
            for (int c = 0; c < g.width(); ++c) out(r, c) = 1.0 + r * 1000.0 + c;
        return out;
    };
    const PixelGrid scaled = resize(cover, plan.resize);
    const CostMap plain = assemble_plain(plan, scaled, index_cost);
    const CostMap pro = assemble_pro(plan, cover, index_cost);
    REQUIRE(plain.sites.size() == plan.sites.size());
    for (std::size_t i = 0; i < plan.sites.size(); ++i) {
        const auto& site = plan.sites[i];
        const double at_y = 1.0 + site.y.row * 1000.0 + site.y.col;
        for (int dir : {+1, -1}) {
            if (site.wet(dir)) {
                REQUIRE(std::isinf(plain.sites[i].rho(dir)));
                REQUIRE(std::isinf(pro.sites[i].rho(dir)));
                continue;
            }
            REQUIRE(plain.sites[i].rho(dir) == at_y);
            double sum = 0.0;
            int n = 0;
            for (std::size_t k = 0; k < site.support.size(); ++k) {
                if (!site.mask(dir)[k]) continue;
                sum += 1.0 + site.support[k].row * 1000.0 + site.support[k].col;
                ++n;
            }
            REQUIRE(pro.sites[i].rho(dir) == doctest::Approx(sum / n));
        }
    }
}

TEST_CASE("pro cost averages four masked values") {
    const PixelGrid cover = testing::constant_grid(32, 32, 128);
    const EmbedPlan plan = build_embed_plan(cover, channel(Family::bilinear, true, 0.5));
    const auto& site = plan.sites.front();
    REQUIRE(site.support.size() == 4);
    const CostFunction fixed = [&](const PixelGrid& g) {
        RealGrid out(g.height(), g.width(), 100.0);
        for (std::size_t k = 0; k < 4; ++k) out(site.support[k].row, site.support[k].col) = 1.0 + k;
        return out;
    };
    CHECK(assemble_pro(plan, cover, fixed).sites.front().rho_plus == doctest::Approx(2.5));
}

TEST_CASE("pro cost ignores base cost outside the masks") {
    const PixelGrid cover = testing::random_grid(64, 64, 12);
    const EmbedPlan plan = build_embed_plan(cover, channel(Family::bicubic, false, 0.5));
    const CostFunction identity = [](const PixelGrid& g) {
        RealGrid out(g.height(), g.width());
        for (int r = 0; r < g.height(); ++r)
            for (int c = 0; c < g.width(); ++c) out(r, c) = g(r, c);
        return out;
    };
    std::vector<bool> masked(64 * 64, false);
    for (const auto& s : plan.sites)
        for (std::size_t k = 0; k < s.support.size(); ++k)
            if (s.mask_plus[k] || s.mask_minus[k]) masked[static_cast<std::size_t>(s.support[k].row) * 64 + s.support[k].col] = true;
    std::vector<std::uint8_t> data(cover.pixels().begin(), cover.pixels().end());
    for (std::size_t i = 0; i < data.size(); ++i)
        if (!masked[i]) data[i] = static_cast<std::uint8_t>(255 - data[i]);
    const CostMap a = assemble_pro(plan, cover, identity);
    const CostMap b = assemble_pro(plan, PixelGrid(64, 64, std::move(data)), identity);
    for (std::size_t i = 0; i < a.sites.size(); ++i) {
        REQUIRE(a.sites[i].rho_plus == b.sites[i].rho_plus);
        REQUIRE(a.sites[i].rho_minus == b.sites[i].rho_minus);
    }
}

TEST_CASE("plain cost depends only on a neighbourhood of the site") {
    const PixelGrid scaled = testing::textured_grid(48, 48, 3);
    const RealGrid base = base_cost_hill(scaled);
    std::vector<std::uint8_t> data(scaled.pixels().begin(), scaled.pixels().end());
    data[static_cast<std::size_t>(40) * 48 + 40] ^= 0x55;
    const RealGrid moved = base_cost_hill(PixelGrid(48, 48, std::move(data)));
    CHECK(moved(20, 20) == base(20, 20));
    CHECK(moved(40, 40) != base(40, 40));
}

TEST_CASE("mark_wet and shape checks") {
    const PixelGrid cover = testing::random_grid(32, 32, 6);
    const EmbedPlan plan = build_embed_plan(cover, channel(Family::bilinear, false, 0.5));
    CostMap costs = assemble_plain(plan, resize(cover, plan.resize), base_cost_hill);
    mark_wet(costs, 0, +1);
    CHECK(std::isinf(costs.sites[0].rho_plus));
    CHECK_THROWS_AS(assemble_plain(plan, cover, base_cost_hill), Error);
    CHECK_THROWS_AS(assemble_pro(plan, resize(cover, plan.resize), base_cost_hill), Error);
}
