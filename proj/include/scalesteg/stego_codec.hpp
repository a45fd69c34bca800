#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scalesteg/channel_analysis.hpp"
#include "scalesteg/cost_model.hpp"
#include "scalesteg/pixel_grid.hpp"

namespace scalesteg {

// Syndrome-trellis code parameters. Column j of each block is derived from the
// base column by rotating its interior bits and complementing them on every
// other rotation cycle; the first and last bits always stay 1.
struct StcCode {
    int height = 10;
    std::vector<std::uint8_t> column = {1, 1, 0, 1, 0, 0, 0, 1, 1, 1};

    void validate() const;
    std::uint32_t column_mask(int j) const;  // bit r = row r of the block
    bool operator==(const StcCode&) const = default;
};

struct StcResult {
    std::vector<std::uint8_t> flips;  // 1 where the stego LSB differs from the cover LSB
    double cost = 0.0;
};

// Minimum-cost stego LSBs with syndrome equal to the message. Throws infeasible.
StcResult stc_embed(std::span<const std::uint8_t> lsb_cover, std::span<const double> flip_costs,
                    std::span<const std::uint8_t> message, const StcCode& code);
StcResult stc_embed(std::span<const std::uint8_t> lsb_cover, std::span<const SiteCost> costs,
                    std::span<const std::uint8_t> message, const StcCode& code);

// Syndrome of the given LSBs for a message of message_bits bits.
std::vector<std::uint8_t> stc_syndrome(std::span<const std::uint8_t> lsb, std::size_t message_bits,
                                       const StcCode& code);

// Cheapest usable direction of one site; ties go to +1, 0 when both are wet.
int flip_direction(const SiteCost& cost) noexcept;
double flip_cost(const SiteCost& cost) noexcept;

struct ChangeVector {
    std::vector<int> deltas;  // per plan site, in {-1, 0, +1}

    std::size_t changed_count() const noexcept;
};

struct AppliedChanges {
    ChangeVector changes;
    PixelGrid scaled_stego;
};

AppliedChanges apply_changes(const EmbedPlan& plan, const PixelGrid& scaled, std::span<const std::uint8_t> flips,
                             const CostMap& costs);

// Everything the receiver needs besides the scaled stego image.
struct StegoKey {
    ChannelSpec channel;
    int cover_height = 0;
    int cover_width = 0;
    Lattice lattice;
    StcCode code;
    std::uint64_t seed = 0;

    bool operator==(const StegoKey&) const = default;
};

StegoKey make_key(const EmbedPlan& plan, const StcCode& code, std::uint64_t seed);

// Key-seeded Fisher-Yates permutation of 0..n-1 driven by raw mt19937_64 draws.
std::vector<std::size_t> site_order(std::size_t n, std::uint64_t seed);

// Carrier sites of the key, as row-major lattice indices, in codec order.
std::vector<std::size_t> key_site_order(const StegoKey& key);

// LSBs of the lattice sites of a scaled image, row-major.
std::vector<std::uint8_t> lattice_lsbs(const PixelGrid& scaled, const StegoKey& key);

struct CodecResult {
    std::vector<std::uint8_t> flips;  // per plan site
    ChangeVector changes;
    PixelGrid scaled_stego;
    double cost = 0.0;
};

// Raw bit embedding over all lattice sites in key order.
CodecResult embed_bits(const EmbedPlan& plan, const PixelGrid& scaled, const CostMap& costs,
                       std::span<const std::uint8_t> bits, const StegoKey& key);
std::vector<std::uint8_t> extract(const PixelGrid& scaled_stego, const StegoKey& key, std::size_t expected_bits);

// Byte messages: a 32-bit big-endian length header lives in the first
// kHeaderSites permuted sites, the payload in the rest.
inline constexpr std::size_t kHeaderSites = 256;
inline constexpr std::size_t kHeaderBits = 32;

std::size_t message_capacity_bytes(const StegoKey& key);
CodecResult embed_message(const EmbedPlan& plan, const PixelGrid& scaled, const CostMap& costs,
                          std::span<const std::uint8_t> message, const StegoKey& key);
std::vector<std::uint8_t> extract_message(const PixelGrid& scaled_stego, const StegoKey& key);

std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

struct SimulationResult {
    ChangeVector changes;
    double lambda = 0.0;
    double entropy_bits = 0.0;  // of the change distribution at lambda
};

// Ternary entropy in bits of the change distribution at lambda.
double change_entropy(const CostMap& costs, double lambda);
double solve_lambda(const CostMap& costs, double payload_bits);
SimulationResult simulate_optimal(const CostMap& costs, double payload_bits, std::uint64_t seed);

}  // namespace scalesteg
