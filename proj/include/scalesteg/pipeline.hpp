#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scalesteg/channel_analysis.hpp"
#include "scalesteg/cost_model.hpp"
#include "scalesteg/inverse_solver.hpp"
#include "scalesteg/serialization.hpp"
#include "scalesteg/stego_codec.hpp"

namespace scalesteg {

struct RunConfig {
    ChannelSpec channel;
    double payload = 0.05;  // bits per scaled-image pixel
    BaseCost base = BaseCost::hill;
    Assembly assembly = Assembly::plain;
    std::optional<int> override_s;
    std::uint64_t seed = 1;
    StcCode code;

    void validate() const;
    std::string cost_name() const;
};

// "hill-plain", "suniward:pro", ... into the two cost axes.
void parse_cost_variant(const std::string& text, BaseCost& base, Assembly& assembly);
// "bilinear", "aa-bicubic", ... into family and anti-aliasing flag.
void parse_channel_name(const std::string& text, Family& family, bool& antialiasing);

CostMap assemble_costs(const EmbedPlan& plan, const PixelGrid& cover, const PixelGrid& scaled, const RunConfig& config);

struct EmbedOutcome {
    EmbedPlan plan;  // final plan, including sites demoted by escalation
    PixelGrid scaled;
    PixelGrid scaled_stego;  // what the receiver should see
    PixelGrid proxy;         // X' = X + delta
    DeltaMap delta;
    ChangeVector changes;
    StegoKey key;
    std::size_t message_bits = 0;
    int wet_retries = 0;
    std::size_t demoted_sites = 0;
};

// Raw bits over the whole lattice.
EmbedOutcome embed_bits_into(const PixelGrid& cover, std::span<const std::uint8_t> bits, const RunConfig& config);
// Length-framed bytes.
EmbedOutcome embed_message_into(const PixelGrid& cover, std::span<const std::uint8_t> message, const RunConfig& config);

// Bytes that fit the requested payload rate, and the raw bit budget at that rate.
std::size_t payload_bits_for(const RunConfig& config, int cover_height, int cover_width);
std::vector<std::uint8_t> random_bytes(std::size_t count, std::uint64_t seed);
std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed);

struct VerifyReport {
    std::string image;
    std::string channel;
    std::string cost;
    bool recovered = false;
    long long l1_distortion = 0;
    std::size_t changed_pixels = 0;
    std::size_t changed_sites = 0;
    std::size_t sites = 0;
    std::size_t wet_sites = 0;
    double capacity_bits = 0.0;
    std::size_t message_bits = 0;
    int wet_retries = 0;
    // Structural checks on the run; all zero on a correct pipeline.
    std::size_t bound_violations = 0;
    std::size_t interference_violations = 0;
    std::size_t exactness_violations = 0;
    std::size_t locality_violations = 0;
    std::size_t plan_violations = 0;
    double embed_seconds = 0.0;
    double total_seconds = 0.0;
    std::string error;  // set when a stage failed

    bool clean() const noexcept;
};

// Embeds, pushes the proxy through the real channel, extracts and audits.
VerifyReport verify_bits(const PixelGrid& cover, std::span<const std::uint8_t> bits, const RunConfig& config);
VerifyReport verify_message(const PixelGrid& cover, std::span<const std::uint8_t> message, const RunConfig& config);

Json to_json(const VerifyReport& report);

// Structural audit of an embed outcome against the real channel.
void audit_outcome(const PixelGrid& cover, const EmbedOutcome& outcome, VerifyReport& report);

// Reference design parameters for standard scaling factors, when listed.
struct ReferenceRow {
    int p = 0;
    int s = 0;
    int n = 0;
};
std::optional<ReferenceRow> reference_design_row(const ChannelSpec& spec);
const std::vector<double>& reference_scaling_factors();

Json analyze(const PixelGrid& cover, const RunConfig& config);

struct SweepGrid {
    std::vector<ChannelSpec> channels;
    std::vector<std::pair<BaseCost, Assembly>> costs;
    double payload = 0.05;
    std::uint64_t seed = 1;
    std::optional<int> override_s;
};

inline constexpr int kSweepSchemaVersion = 1;

// One row per (image, config) plus one aggregate row per config, in CSV.
// With timings off the output is byte-identical across runs.
std::string sweep(const std::filesystem::path& cover_dir, const SweepGrid& grid, unsigned threads, bool timings = true);

// Worker count from SCALESTEG_THREADS, else the hardware concurrency.
unsigned worker_count();

}  // namespace scalesteg
