#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "scalesteg/error.hpp"
#include "scalesteg/pipeline.hpp"
#include "test_support.hpp"

using namespace scalesteg;

namespace {

RunConfig config_for(Family f, bool aa, double sf, std::uint64_t seed = 11) {
    RunConfig c;
    c.channel.family = f;
    c.channel.antialiasing = aa;
    c.channel.sf = sf;
    c.seed = seed;
    return c;
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "scalesteg_pipeline_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("name parsing") {
    BaseCost b;
    Assembly a;
    parse_cost_variant("suniward-pro", b, a);
    CHECK(b == BaseCost::suniward);
    CHECK(a == Assembly::pro);
    parse_cost_variant("hill:plain", b, a);
    CHECK(b == BaseCost::hill);
    CHECK(a == Assembly::plain);
    CHECK_THROWS_AS(parse_cost_variant("hill-medium", b, a), Error);
    Family f;
    bool aa;
    parse_channel_name("aa-bicubic", f, aa);
    CHECK(f == Family::bicubic);
    CHECK(aa);
    parse_channel_name("nearest", f, aa);
    CHECK(f == Family::nearest);
    CHECK_FALSE(aa);
    CHECK_THROWS_AS(parse_channel_name("lanczos", f, aa), Error);
}

TEST_CASE("message survives the real channel for every family") {
    const PixelGrid cover = testing::textured_grid(160, 160, 8);
    for (auto [f, aa, sf] : {std::tuple{Family::nearest, false, 0.5}, {Family::bilinear, false, 0.7},
                             {Family::bicubic, false, 0.5}, {Family::bilinear, true, 0.5}, {Family::bicubic, true, 0.7}}) {
        RunConfig cfg = config_for(f, aa, sf);
        for (auto [base, assembly] : {std::pair{BaseCost::hill, Assembly::plain}, {BaseCost::suniward, Assembly::pro}}) {
            cfg.base = base;
            cfg.assembly = assembly;
            const std::vector<std::uint8_t> msg = random_bytes(12, 4);
            const VerifyReport r = verify_message(cover, msg, cfg);
            INFO(cfg.channel.name() << " " << cfg.cost_name() << " " << r.error);
            CHECK(r.recovered);
            CHECK(r.clean());
        }
    }
}

TEST_CASE("embedding is deterministic and local") {
    const PixelGrid cover = testing::textured_grid(128, 128, 21);
    const RunConfig cfg = config_for(Family::bicubic, false, 0.5);
    const auto bits = random_bits(400, 2);
    const EmbedOutcome a = embed_bits_into(cover, bits, cfg);
    const EmbedOutcome b = embed_bits_into(cover, bits, cfg);
    CHECK(a.proxy == b.proxy);
    CHECK(a.delta == b.delta);
    CHECK(a.key == b.key);
    const PixelGrid seen = resize(a.proxy, a.plan.resize);
    for (const auto& s : a.plan.sites) REQUIRE(seen(s.y.row, s.y.col) == a.scaled_stego(s.y.row, s.y.col));
    std::set<Coord> allowed;
    long long l1_cap = 0;
    for (std::size_t k = 0; k < a.plan.sites.size(); ++k) {
        if (a.changes.deltas[k] == 0) continue;
        const auto& s = a.plan.sites[k];
        const int dy = a.changes.deltas[k];
        for (std::size_t i = 0; i < s.support.size(); ++i) {
            if (s.mask(dy)[i]) {
                allowed.insert(s.support[i]);
                l1_cap += s.bound(dy);
            }
        }
    }
    for (const auto& [c, d] : a.delta.entries()) REQUIRE(allowed.count(c) == 1);
    CHECK(a.delta.l1_norm() <= l1_cap);
    CHECK(a.delta.max_abs() <= kMaxBound);
}

TEST_CASE("empty message leaves the cover untouched") {
    const PixelGrid cover = testing::random_grid(96, 96, 5);
    const EmbedOutcome out = embed_bits_into(cover, {}, config_for(Family::bilinear, true, 0.5));
    CHECK(out.proxy == cover);
    CHECK(out.delta.nonzero_count() == 0);
}

TEST_CASE("oversized payload is infeasible") {
    const PixelGrid cover = testing::random_grid(64, 64, 5);
    const RunConfig cfg = config_for(Family::bilinear, true, 0.5);
    try {
        embed_bits_into(cover, random_bits(100000, 1), cfg);
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::infeasible);
        CHECK(exit_code_for(e.code()) == 2);
    }
}

TEST_CASE("key serialisation round-trips") {
    const PixelGrid cover = testing::random_grid(64, 64, 5);
    const EmbedOutcome out = embed_bits_into(cover, random_bits(20, 1), config_for(Family::bicubic, true, 0.5, 1234567));
    const Json j = to_json(out.key);
    CHECK(key_from_json(Json::parse(j.dump())) == out.key);
    Json broken = j;
    broken.erase("lattice");
    CHECK_THROWS_AS(key_from_json(broken), Error);
}

TEST_CASE("covers without a message are rejected at extraction") {
    // The stored length must fit the key's capacity; random headers rarely do.
    int accepted = 0;
    const RunConfig cfg = config_for(Family::nearest, false, 0.5);
    for (int i = 0; i < 1000; ++i) {
        const PixelGrid cover = testing::random_grid(64, 64, 5000 + i);
        const EmbedPlan plan = build_embed_plan(cover, cfg.channel);
        const StegoKey key = make_key(plan, cfg.code, 77 + i);
        try {
            extract_message(resize(cover, plan.resize), key);
            ++accepted;
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::invalid_key);
        }
    }
    CHECK(accepted <= 10);
}

TEST_CASE("analysis reports design and reference values") {
    const PixelGrid cover = testing::textured_grid(128, 128, 2);
    SUBCASE("antialiased bicubic 0.7") {
        const Json j = analyze(cover, config_for(Family::bicubic, true, 0.7));
        CHECK(j["design"]["p"] == 6);
        CHECK(j["design"]["s"] == 3);
        CHECK(j["reference"]["p"] == 6);
        CHECK(j["reference"]["s"] == 3);
        CHECK(j["reference"]["N"] == 2);
        CHECK(j["plan_ok"] == true);
    }
    SUBCASE("bilinear 0.9") {
        const Json j = analyze(cover, config_for(Family::bilinear, false, 0.9));
        CHECK(j["design"]["s"] == 2);
        CHECK(j["design"]["N"] == 4);
        CHECK(j["reference"]["matches"]["N"] == true);
    }
    SUBCASE("nearest has no reference row") {
        CHECK(analyze(cover, config_for(Family::nearest, false, 0.5))["reference"].is_null());
    }
}

TEST_CASE("sweep output") {
    const auto dir = fresh_dir("covers");
    save_image(testing::textured_grid(128, 128, 1), dir / "a.pgm");
    save_image(testing::random_grid(128, 128, 2), dir / "b.png");
    SweepGrid grid;
    grid.channels = {config_for(Family::bilinear, true, 0.5).channel, config_for(Family::nearest, false, 0.7).channel};
    grid.costs = {{BaseCost::hill, Assembly::plain}, {BaseCost::suniward, Assembly::pro}};
    grid.payload = 0.02;
    const std::string csv = sweep(dir, grid, 2, false);
    CHECK(csv == sweep(dir, grid, 1, false));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("schema_version,row_type,image,", 0) == 0);
    int images = 0, aggregates = 0;
    while (std::getline(in, line)) {
        REQUIRE(line.rfind("1,", 0) == 0);
        if (line.rfind("1,image,", 0) == 0) ++images;
        if (line.find("1,aggregate,") == 0) {
            ++aggregates;
            CHECK(line.find(",,1,") != std::string::npos);
        }
    }
    CHECK(images == 8);
    CHECK(aggregates == 4);

    try {
        sweep(fresh_dir("empty"), grid, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
    }
}

TEST_CASE("verify report json carries the audit counters") {
    const PixelGrid cover = testing::textured_grid(96, 96, 4);
    const VerifyReport r = verify_bits(cover, random_bits(50, 3), config_for(Family::bilinear, false, 0.5));
    const Json j = to_json(r);
    CHECK(j["violations"]["bound"] == 0);
    CHECK(j["recovered"] == true);
}
