#include "scalesteg/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "scalesteg/error.hpp"

namespace scalesteg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

using CodecFn = std::function<CodecResult(const EmbedPlan&, const PixelGrid&, const CostMap&, const StegoKey&)>;

EmbedOutcome run_embed(const PixelGrid& cover, const RunConfig& config, std::size_t message_bits, const CodecFn& codec) {
    config.validate();
    PlanOptions options;
    options.override_s = config.override_s;
    EmbedOutcome out;
    out.plan = build_embed_plan(cover, config.channel, options);
    out.scaled = resize(cover, out.plan.resize);
    out.key = make_key(out.plan, config.code, config.seed);
    out.message_bits = message_bits;
    CostMap costs = assemble_costs(out.plan, cover, out.scaled, config);

    // A site with no verified inverse is made wet in that direction and the
    // message is re-embedded once; the key does not depend on wet flags.
    for (int attempt = 0;; ++attempt) {
        CodecResult coded = codec(out.plan, out.scaled, costs, out.key);
        SolveOutcome solved = solve_sites(cover, out.plan, coded.changes);
        if (solved.failed.empty()) {
            out.changes = std::move(coded.changes);
            out.scaled_stego = std::move(coded.scaled_stego);
            out.delta = std::move(solved.delta);
            break;
        }
        if (attempt >= 1) {
            throw Error(ErrorCode::solver_failure, std::to_string(solved.failed.size()) +
                                                       " site(s) still unsolved after re-embedding");
        }
        for (std::size_t k : solved.failed) {
            const int dir = coded.changes.deltas[k];
            out.plan.sites[k].make_wet(dir);
            mark_wet(costs, k, dir);
        }
        out.plan.capacity_bits = plan_capacity(out.plan.sites);
        out.demoted_sites += solved.failed.size();
        ++out.wet_retries;
    }
    out.proxy = apply_delta(cover, out.delta);
    return out;
}

struct ReferenceTable {
    std::vector<double> sfs;
    // per sf: std bilinear, std bicubic, aa bilinear, aa bicubic
    std::vector<std::array<ReferenceRow, 4>> rows;
};

const ReferenceTable& reference_table() {
    static const ReferenceTable table{
        {0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.9},
        {
            {{{2, 1, 4}, {4, 1, 4}, {20, 10, 4}, {40, 20, 4}}},
            {{{2, 1, 4}, {4, 1, 4}, {9, 5, 4}, {17, 9, 4}}},
            {{{2, 1, 4}, {4, 1, 4}, {8, 4, 4}, {16, 8, 4}}},
            {{{2, 1, 4}, {4, 2, 4}, {7, 4, 4}, {14, 7, 4}}},
            {{{2, 1, 4}, {4, 2, 4}, {5, 3, 4}, {10, 5, 4}}},
            {{{2, 1, 4}, {4, 2, 4}, {4, 2, 4}, {8, 4, 4}}},
            {{{2, 2, 4}, {4, 2, 4}, {5, 3, 4}, {7, 4, 4}}},
            {{{2, 2, 4}, {4, 2, 4}, {3, 2, 4}, {6, 3, 2}}},
            {{{2, 2, 4}, {4, 3, 4}, {3, 2, 2}, {6, 3, 2}}},
            {{{2, 2, 4}, {4, 3, 4}, {3, 2, 1}, {5, 3, 2}}},
            {{{2, 2, 4}, {4, 3, 4}, {3, 2, 1}, {5, 3, 1}}},
        }};
    return table;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

void RunConfig::validate() const {
    channel.validate();
    code.validate();
    if (!(payload >= 0.0) || !std::isfinite(payload)) throw Error(ErrorCode::invalid_argument, "payload must be >= 0");
    if (override_s && *override_s < 1) throw Error(ErrorCode::invalid_argument, "sampling interval must be >= 1");
}

std::string RunConfig::cost_name() const { return std::string(to_string(base)) + "-" + to_string(assembly); }

void parse_cost_variant(const std::string& text, BaseCost& base, Assembly& assembly) {
    const auto sep = text.find_first_of("-:_");
    if (sep == std::string::npos) {
        base = parse_base_cost(text);
        assembly = Assembly::plain;
        return;
    }
    base = parse_base_cost(text.substr(0, sep));
    assembly = parse_assembly(text.substr(sep + 1));
}

void parse_channel_name(const std::string& text, Family& family, bool& antialiasing) {
    antialiasing = text.rfind("aa-", 0) == 0;
    family = parse_family(antialiasing ? text.substr(3) : text);
}

CostMap assemble_costs(const EmbedPlan& plan, const PixelGrid& cover, const PixelGrid& scaled, const RunConfig& config) {
    const CostFunction psi = base_cost(config.base);
    return config.assembly == Assembly::plain ? assemble_plain(plan, scaled, psi) : assemble_pro(plan, cover, psi);
}

EmbedOutcome embed_bits_into(const PixelGrid& cover, std::span<const std::uint8_t> bits, const RunConfig& config) {
    return run_embed(cover, config, bits.size(),
                     [bits](const EmbedPlan& plan, const PixelGrid& scaled, const CostMap& costs, const StegoKey& key) {
                         return embed_bits(plan, scaled, costs, bits, key);
                     });
}

EmbedOutcome embed_message_into(const PixelGrid& cover, std::span<const std::uint8_t> message, const RunConfig& config) {
    return run_embed(cover, config, message.size() * 8,
                     [message](const EmbedPlan& plan, const PixelGrid& scaled, const CostMap& costs,
                               const StegoKey& key) { return embed_message(plan, scaled, costs, message, key); });
}

std::size_t payload_bits_for(const RunConfig& config, int cover_height, int cover_width) {
    const double pixels = static_cast<double>(scaled_extent(config.channel.sf, cover_height)) *
                          static_cast<double>(scaled_extent(config.channel.sf, cover_width));
    return static_cast<std::size_t>(std::floor(config.payload * pixels));
}

std::vector<std::uint8_t> random_bytes(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> out(count);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 56);
    return out;
}

std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> out(count);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 63);
    return out;
}

bool VerifyReport::clean() const noexcept {
    return error.empty() && recovered && bound_violations == 0 && interference_violations == 0 &&
           exactness_violations == 0 && locality_violations == 0 && plan_violations == 0;
}

void audit_outcome(const PixelGrid& cover, const EmbedOutcome& out, VerifyReport& rep) {
    const EmbedPlan& plan = out.plan;
    const PlanReport pr = verify_plan(plan);
    rep.plan_violations = pr.ok ? 0 : std::max<std::size_t>(1, pr.failures.size());
    rep.sites = plan.sites.size();
    rep.wet_sites = pr.wet_both;
    rep.capacity_bits = plan.capacity_bits;
    rep.changed_sites = out.changes.changed_count();
    rep.changed_pixels = out.delta.nonzero_count();
    rep.l1_distortion = out.delta.l1_norm();
    rep.message_bits = out.message_bits;
    rep.wet_retries = out.wet_retries;

    std::map<Coord, std::pair<std::size_t, std::size_t>> owner;
    for (std::size_t s = 0; s < plan.sites.size(); ++s) {
        for (std::size_t k = 0; k < plan.sites[s].support.size(); ++k) owner[plan.sites[s].support[k]] = {s, k};
    }
    for (const auto& [c, d] : out.delta.entries()) {
        auto it = owner.find(c);
        if (it == owner.end()) {
            ++rep.locality_violations;
            continue;
        }
        const auto [s, k] = it->second;
        const EmbedSite& site = plan.sites[s];
        const int dir = out.changes.deltas[s];
        if (dir == 0 || !site.mask(dir)[k]) {
            ++rep.locality_violations;
            continue;
        }
        if (d * dir < 0 || std::abs(d) > site.bound(dir) || site.bound(dir) > kMaxBound) ++rep.bound_violations;
        const int v = cover(c.row, c.col) + d;
        if (v < 0 || v > 255) ++rep.bound_violations;
    }

    // The real channel, rebuilt from the channel description rather than reusing the plan's taps.
    const PixelGrid received = resize(out.proxy, plan.channel);
    for (std::size_t s = 0; s < plan.sites.size(); ++s) {
        const Coord y = plan.sites[s].y;
        const int dy = out.changes.deltas[s];
        const int before = out.scaled(y.row, y.col);
        const int after = received(y.row, y.col);
        if (dy == 0 && after != before) ++rep.interference_violations;
        if (dy != 0 && after != before + dy) ++rep.exactness_violations;
    }
}

namespace {

template <class Extract>
VerifyReport verify_with(const PixelGrid& cover, const RunConfig& config,
                         const std::function<EmbedOutcome()>& embed, Extract&& check) {
    VerifyReport rep;
    rep.channel = config.channel.name();
    rep.cost = config.cost_name();
    const auto t0 = Clock::now();
    try {
        const EmbedOutcome out = embed();
        rep.embed_seconds = seconds_since(t0);
        const PixelGrid received = resize(out.proxy, config.channel);
        rep.recovered = check(received, out.key);
        audit_outcome(cover, out, rep);
    } catch (const Error& e) {
        rep.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    rep.total_seconds = seconds_since(t0);
    return rep;
}

}  // namespace

VerifyReport verify_bits(const PixelGrid& cover, std::span<const std::uint8_t> bits, const RunConfig& config) {
    return verify_with(
        cover, config, [&] { return embed_bits_into(cover, bits, config); },
        [&](const PixelGrid& received, const StegoKey& key) {
            const auto got = extract(received, key, bits.size());
            return std::equal(got.begin(), got.end(), bits.begin(), bits.end());
        });
}

VerifyReport verify_message(const PixelGrid& cover, std::span<const std::uint8_t> message, const RunConfig& config) {
    return verify_with(
        cover, config, [&] { return embed_message_into(cover, message, config); },
        [&](const PixelGrid& received, const StegoKey& key) {
            try {
                const auto got = extract_message(received, key);
                return std::equal(got.begin(), got.end(), message.begin(), message.end());
            } catch (const Error&) {
                return false;
            }
        });
}

Json to_json(const VerifyReport& r) {
    return Json{{"image", r.image},
                {"channel", r.channel},
                {"cost", r.cost},
                {"recovered", r.recovered},
                {"l1_distortion", r.l1_distortion},
                {"changed_pixels", r.changed_pixels},
                {"changed_sites", r.changed_sites},
                {"sites", r.sites},
                {"wet_sites", r.wet_sites},
                {"capacity_bits", r.capacity_bits},
                {"message_bits", r.message_bits},
                {"wet_retries", r.wet_retries},
                {"violations",
                 {{"bound", r.bound_violations},
                  {"interference", r.interference_violations},
                  {"exactness", r.exactness_violations},
                  {"locality", r.locality_violations},
                  {"plan", r.plan_violations}}},
                {"timings", {{"embed_s", r.embed_seconds}, {"total_s", r.total_seconds}}},
                {"error", r.error}};
}

std::optional<ReferenceRow> reference_design_row(const ChannelSpec& spec) {
    if (spec.family == Family::nearest) return std::nullopt;
    const auto& t = reference_table();
    for (std::size_t i = 0; i < t.sfs.size(); ++i) {
        if (std::fabs(t.sfs[i] - spec.sf) < 1e-12) {
            const int col = (spec.antialiasing ? 2 : 0) + (spec.family == Family::bicubic ? 1 : 0);
            return t.rows[i][static_cast<std::size_t>(col)];
        }
    }
    return std::nullopt;
}

const std::vector<double>& reference_scaling_factors() { return reference_table().sfs; }

Json analyze(const PixelGrid& cover, const RunConfig& config) {
    config.validate();
    const DesignParams design = design_params(config.channel);
    PlanOptions options;
    options.override_s = config.override_s;
    const EmbedPlan plan = build_embed_plan(cover, config.channel, options);
    const PlanReport report = verify_plan(plan);

    std::map<int, long long> support_hist;
    for (const auto& s : plan.sites) ++support_hist[static_cast<int>(s.support.size())];
    std::map<int, long long> dpi_hist;
    const DpiGrid dpi = compute_dpi(plan.resize, plan.site_coords());
    for (int c : dpi.counts) ++dpi_hist[c];
    const auto to_obj = [](const std::map<int, long long>& m) {
        Json j = Json::object();
        for (const auto& [k, v] : m) j[std::to_string(k)] = v;
        return j;
    };

    Json reference = nullptr;
    if (const auto row = reference_design_row(config.channel)) {
        reference = Json{{"p", row->p},
                         {"s", row->s},
                         {"N", row->n},
                         {"matches", {{"p", row->p == design.p}, {"s", row->s == design.s}, {"N", row->n == design.n_target}}}};
    }
    const double scaled_pixels = static_cast<double>(plan.scaled_height()) * plan.scaled_width();
    return Json{{"channel", to_json(config.channel)},
                {"design", to_json(design)},
                {"reference", reference},
                {"cover_dims", {plan.cover_height(), plan.cover_width()}},
                {"scaled_dims", {plan.scaled_height(), plan.scaled_width()}},
                {"lattice", to_json(plan.lattice)},
                {"sites", plan.sites.size()},
                {"support_histogram", to_obj(support_hist)},
                {"dpi_histogram", to_obj(dpi_hist)},
                {"wet", {{"plus", report.wet_plus}, {"minus", report.wet_minus}, {"both", report.wet_both}}},
                {"capacity_bits", plan.capacity_bits},
                {"capacity_bits_per_scaled_pixel", plan.capacity_bits / scaled_pixels},
                {"capacity_bits_per_cover_pixel", plan.capacity_bits / static_cast<double>(cover.size())},
                {"plan_ok", report.ok},
                {"plan_failures", report.failures}};
}

unsigned worker_count() {
    if (const char* env = std::getenv("SCALESTEG_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::string sweep(const std::filesystem::path& cover_dir, const SweepGrid& grid, unsigned threads, bool timings) {
    std::vector<std::filesystem::path> images;
    std::error_code ec;
    for (std::filesystem::directory_iterator it(cover_dir, ec), end; !ec && it != end; it.increment(ec)) {
        std::string ext = it->path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (it->is_regular_file() && (ext == ".pgm" || ext == ".png")) images.push_back(it->path());
    }
    if (ec) throw Error(ErrorCode::io, "cannot list " + cover_dir.string() + ": " + ec.message());
    if (images.empty()) throw Error(ErrorCode::io, "no-input: no PGM or PNG images in " + cover_dir.string());
    if (grid.channels.empty() || grid.costs.empty()) throw Error(ErrorCode::invalid_argument, "empty sweep grid");
    std::sort(images.begin(), images.end());

    struct Job {
        std::size_t image, channel, cost;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < grid.channels.size(); ++c) {
        for (std::size_t k = 0; k < grid.costs.size(); ++k) {
            for (std::size_t i = 0; i < images.size(); ++i) jobs.push_back({i, c, k});
        }
    }
    std::vector<VerifyReport> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const Job& job = jobs[j];
            RunConfig config;
            config.channel = grid.channels[job.channel];
            config.base = grid.costs[job.cost].first;
            config.assembly = grid.costs[job.cost].second;
            config.payload = grid.payload;
            config.seed = grid.seed;
            config.override_s = grid.override_s;
            VerifyReport rep;
            try {
                const PixelGrid cover = load_image(images[job.image]);
                const std::size_t bytes = payload_bits_for(config, cover.height(), cover.width()) / 8;
                const auto message = random_bytes(bytes, mix_seed(grid.seed, job.image));
                rep = verify_message(cover, message, config);
            } catch (const Error& e) {
                rep.channel = config.channel.name();
                rep.cost = config.cost_name();
                rep.error = std::string(to_string(e.code())) + ": " + e.what();
            }
            rep.image = images[job.image].filename().string();
            results[j] = std::move(rep);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream os;
    os.precision(10);
    os << "schema_version,row_type,image,channel,antialias,sf,cost,payload_bpp,recovered,recovery_rate,l1,"
          "changed_pixels,changed_sites,capacity_bits,message_bits,wet_retries,runtime_s,error\n";
    std::size_t j = 0;
    for (std::size_t c = 0; c < grid.channels.size(); ++c) {
        const ChannelSpec& spec = grid.channels[c];
        for (std::size_t k = 0; k < grid.costs.size(); ++k) {
            const std::string cost = std::string(to_string(grid.costs[k].first)) + "-" + to_string(grid.costs[k].second);
            const auto prefix = [&](const char* type, const std::string& image) {
                os << kSweepSchemaVersion << ',' << type << ',' << csv_escape(image) << ',' << to_string(spec.family) << ','
                   << (spec.antialiasing ? 1 : 0) << ',' << spec.sf << ',' << cost << ',' << grid.payload << ',';
            };
            double ok = 0, l1 = 0, px = 0, sites = 0, cap = 0, bits = 0, retries = 0, secs = 0;
            for (std::size_t i = 0; i < images.size(); ++i, ++j) {
                const VerifyReport& r = results[j];
                const bool good = r.clean();
                prefix("image", r.image);
                os << (good ? 1 : 0) << ',' << (good ? 1 : 0) << ',' << r.l1_distortion << ',' << r.changed_pixels << ','
                   << r.changed_sites << ',' << r.capacity_bits << ',' << r.message_bits << ',' << r.wet_retries << ','
                   << (timings ? r.total_seconds : 0.0) << ',' << csv_escape(r.error) << '\n';
                ok += good;
                l1 += static_cast<double>(r.l1_distortion);
                px += static_cast<double>(r.changed_pixels);
                sites += static_cast<double>(r.changed_sites);
                cap += r.capacity_bits;
                bits += static_cast<double>(r.message_bits);
                retries += r.wet_retries;
                secs += r.total_seconds;
            }
            const double m = static_cast<double>(images.size());
            prefix("aggregate", "*");
            os << ',' << ok / m << ',' << l1 / m << ',' << px / m << ',' << sites / m << ',' << cap / m << ','
               << bits / m << ',' << retries / m << ',' << (timings ? secs / m : 0.0) << ",\n";
        }
    }
    return os.str();
}

}  // namespace scalesteg
