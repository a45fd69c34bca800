#include "scalesteg/stego_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "scalesteg/error.hpp"

namespace scalesteg {

namespace {

std::size_t block_start(std::size_t i, std::size_t n, std::size_t m) { return i * n / m; }

double site_entropy(const SiteCost& c, double lambda) {
    const double ep = std::isinf(c.rho_plus) ? 0.0 : std::exp(-lambda * c.rho_plus);
    const double em = std::isinf(c.rho_minus) ? 0.0 : std::exp(-lambda * c.rho_minus);
    const double z = 1.0 + ep + em;
    double h = 0.0;
    for (double e : {1.0, ep, em}) {
        const double p = e / z;
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

double max_entropy(const CostMap& costs) {
    double h = 0.0;
    for (const auto& c : costs.sites) {
        const int options = 1 + (std::isinf(c.rho_plus) ? 0 : 1) + (std::isinf(c.rho_minus) ? 0 : 1);
        h += std::log2(static_cast<double>(options));
    }
    return h;
}

void check_key_matches(const EmbedPlan& plan, const StegoKey& key) {
    if (!(key.lattice == plan.lattice) || !(key.channel == plan.channel) || key.cover_height != plan.cover_height() ||
        key.cover_width != plan.cover_width()) {
        throw Error(ErrorCode::invalid_key, "stego key does not describe this embedding plan");
    }
}

// Runs the trellis on a subset of plan sites and writes flips back in plan order.
double embed_segment(std::span<const std::size_t> positions, std::span<const std::uint8_t> lsb,
                     std::span<const double> flip_costs, std::span<const std::uint8_t> bits, const StcCode& code,
                     std::vector<std::uint8_t>& flips) {
    std::vector<std::uint8_t> seg_lsb;
    std::vector<double> seg_cost;
    seg_lsb.reserve(positions.size());
    seg_cost.reserve(positions.size());
    for (std::size_t p : positions) {
        seg_lsb.push_back(lsb[p]);
        seg_cost.push_back(flip_costs[p]);
    }
    const StcResult r = stc_embed(seg_lsb, seg_cost, bits, code);
    for (std::size_t k = 0; k < positions.size(); ++k) flips[positions[k]] = r.flips[k];
    return r.cost;
}

std::vector<std::uint8_t> segment_syndrome(std::span<const std::size_t> positions,
                                           std::span<const std::uint8_t> lsb, std::size_t bits,
                                           const StcCode& code) {
    std::vector<std::uint8_t> seg;
    seg.reserve(positions.size());
    for (std::size_t p : positions) seg.push_back(lsb[p]);
    return stc_syndrome(seg, bits, code);
}

CodecResult finish(const EmbedPlan& plan, const PixelGrid& scaled, const CostMap& costs,
                   std::vector<std::uint8_t> flips, double cost) {
    AppliedChanges applied = apply_changes(plan, scaled, flips, costs);
    return CodecResult{std::move(flips), std::move(applied.changes), std::move(applied.scaled_stego), cost};
}

struct Prepared {
    std::vector<std::uint8_t> lsb;
    std::vector<double> flip_costs;
    std::vector<std::size_t> order;
};

Prepared prepare(const EmbedPlan& plan, const PixelGrid& scaled, const CostMap& costs, const StegoKey& key) {
    check_key_matches(plan, key);
    if (costs.sites.size() != plan.sites.size()) {
        throw Error(ErrorCode::dimension_mismatch, "cost map does not match the plan");
    }
    Prepared p;
    p.lsb = lattice_lsbs(scaled, key);
    p.flip_costs.reserve(costs.sites.size());
    for (const auto& c : costs.sites) p.flip_costs.push_back(flip_cost(c));
    p.order = key_site_order(key);
    return p;
}

}  // namespace

void StcCode::validate() const {
    if (height < 1 || height > 20) throw Error(ErrorCode::invalid_argument, "STC height must lie in [1, 20]");
    if (static_cast<int>(column.size()) != height) {
        throw Error(ErrorCode::invalid_argument, "STC column length differs from its height");
    }
    for (auto b : column) {
        if (b > 1) throw Error(ErrorCode::invalid_argument, "STC column must be binary");
    }
    if (column.front() != 1 || column.back() != 1) {
        throw Error(ErrorCode::invalid_argument, "STC column must start and end with 1");
    }
}

std::uint32_t StcCode::column_mask(int j) const {
    std::uint32_t mask = 0;
    if (height <= 2) {
        for (int r = 0; r < height; ++r) {
            if (column[r]) mask |= 1u << r;
        }
        return mask;
    }
    const int interior = height - 2;
    const int rot = j % interior;
    const std::uint8_t comp = (j / interior) % 2;
    mask |= 1u | (1u << (height - 1));
    for (int r = 0; r < interior; ++r) {
        if (column[1 + (r + rot) % interior] ^ comp) mask |= 1u << (r + 1);
    }
    return mask;
}

StcResult stc_embed(std::span<const std::uint8_t> lsb_cover, std::span<const double> flip_costs,
                    std::span<const std::uint8_t> message, const StcCode& code) {
    code.validate();
    const std::size_t n = lsb_cover.size();
    const std::size_t m = message.size();
    if (flip_costs.size() != n) throw Error(ErrorCode::dimension_mismatch, "one flip cost per cover bit expected");
    StcResult result;
    result.flips.assign(n, 0);
    if (m == 0) return result;
    if (m > n) {
        throw Error(ErrorCode::infeasible, "message of " + std::to_string(m) + " bits exceeds " +
                                               std::to_string(n) + " available sites");
    }

    const int h = code.height;
    const std::size_t states = std::size_t{1} << h;
    const std::size_t words = (states + 63) / 64;
    const double inf = kInfiniteCost;
    std::vector<std::uint64_t> path(n * words, 0);
    std::vector<double> cost(states, inf), next(states, inf);
    cost[0] = 0.0;

    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t width = block_start(i + 1, n, m) - block_start(i, n, m);
        const std::size_t rows_left = m - i;
        const std::uint32_t keep =
            rows_left < static_cast<std::size_t>(h) ? (1u << rows_left) - 1u : static_cast<std::uint32_t>(states - 1);
        for (std::size_t j = 0; j < width; ++j, ++k) {
            const std::uint32_t col = code.column_mask(static_cast<int>(j)) & keep;
            const double c0 = lsb_cover[k] ? flip_costs[k] : 0.0;  // stego bit 0
            const double c1 = lsb_cover[k] ? 0.0 : flip_costs[k];  // stego bit 1
            std::uint64_t* decisions = &path[k * words];
            for (std::size_t s = 0; s < states; ++s) {
                const double a = cost[s] + c0;
                const double b = cost[s ^ col] + c1;
                if (b < a) {
                    next[s] = b;
                    decisions[s >> 6] |= std::uint64_t{1} << (s & 63);
                } else {
                    next[s] = a;
                }
            }
            std::swap(cost, next);
        }
        // The lowest row is complete: keep states that match the message bit, then shift.
        const std::size_t bit = message[i] & 1u;
        for (std::size_t t = 0; t < states / 2; ++t) next[t] = cost[2 * t + bit];
        for (std::size_t t = states / 2; t < states; ++t) next[t] = inf;
        std::swap(cost, next);
    }
    if (std::isinf(cost[0])) throw Error(ErrorCode::infeasible, "no stego sequence avoids every wet site");
    result.cost = cost[0];

    std::size_t state = 0;
    k = n;
    for (std::size_t i = m; i-- > 0;) {
        state = 2 * state + (message[i] & 1u);
        const std::size_t width = block_start(i + 1, n, m) - block_start(i, n, m);
        const std::size_t rows_left = m - i;
        const std::uint32_t keep =
            rows_left < static_cast<std::size_t>(h) ? (1u << rows_left) - 1u : static_cast<std::uint32_t>(states - 1);
        for (std::size_t j = width; j-- > 0;) {
            --k;
            const std::uint8_t y = (path[k * words + (state >> 6)] >> (state & 63)) & 1u;
            if (y) state ^= code.column_mask(static_cast<int>(j)) & keep;
            result.flips[k] = y != (lsb_cover[k] & 1u);
        }
    }
    return result;
}

StcResult stc_embed(std::span<const std::uint8_t> lsb_cover, std::span<const SiteCost> costs,
                    std::span<const std::uint8_t> message, const StcCode& code) {
    std::vector<double> flip_costs;
    flip_costs.reserve(costs.size());
    for (const auto& c : costs) flip_costs.push_back(flip_cost(c));
    return stc_embed(lsb_cover, flip_costs, message, code);
}

std::vector<std::uint8_t> stc_syndrome(std::span<const std::uint8_t> lsb, std::size_t message_bits,
                                       const StcCode& code) {
    code.validate();
    const std::size_t n = lsb.size();
    const std::size_t m = message_bits;
    std::vector<std::uint8_t> syndrome(m, 0);
    if (m == 0) return syndrome;
    if (m > n) throw Error(ErrorCode::invalid_argument, "more message bits than sites");
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t width = block_start(i + 1, n, m) - block_start(i, n, m);
        for (std::size_t j = 0; j < width; ++j, ++k) {
            if (!(lsb[k] & 1u)) continue;
            const std::uint32_t col = code.column_mask(static_cast<int>(j));
            for (int r = 0; r < code.height && i + r < m; ++r) {
                if (col >> r & 1u) syndrome[i + r] ^= 1u;
            }
        }
    }
    return syndrome;
}

int flip_direction(const SiteCost& cost) noexcept {
    const bool plus = !std::isinf(cost.rho_plus);
    const bool minus = !std::isinf(cost.rho_minus);
    if (plus && (!minus || cost.rho_plus <= cost.rho_minus)) return +1;
    if (minus) return -1;
    return 0;
}

double flip_cost(const SiteCost& cost) noexcept { return std::min(cost.rho_plus, cost.rho_minus); }

std::size_t ChangeVector::changed_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(deltas.begin(), deltas.end(), [](int d) { return d != 0; }));
}

AppliedChanges apply_changes(const EmbedPlan& plan, const PixelGrid& scaled, std::span<const std::uint8_t> flips,
                             const CostMap& costs) {
    if (flips.size() != plan.sites.size() || costs.sites.size() != plan.sites.size()) {
        throw Error(ErrorCode::dimension_mismatch, "flips and costs must cover every plan site");
    }
    if (scaled.height() != plan.scaled_height() || scaled.width() != plan.scaled_width()) {
        throw Error(ErrorCode::dimension_mismatch, "scaled image does not match the plan");
    }
    AppliedChanges out;
    out.changes.deltas.assign(plan.sites.size(), 0);
    std::vector<std::uint8_t> data(scaled.pixels().begin(), scaled.pixels().end());
    for (std::size_t k = 0; k < plan.sites.size(); ++k) {
        if (!flips[k]) continue;
        const int dir = flip_direction(costs.sites[k]);
        const EmbedSite& site = plan.sites[k];
        if (dir == 0) {
            throw Error(ErrorCode::infeasible, "flip requested at a site that is wet in both directions");
        }
        const std::size_t idx = static_cast<std::size_t>(site.y.row) * scaled.width() + site.y.col;
        const int moved = data[idx] + dir;
        if (moved < 0 || moved > 255) throw Error(ErrorCode::overflow, "scaled pixel change leaves [0,255]");
        data[idx] = static_cast<std::uint8_t>(moved);
        out.changes.deltas[k] = dir;
    }
    out.scaled_stego = PixelGrid(scaled.height(), scaled.width(), std::move(data));
    return out;
}

StegoKey make_key(const EmbedPlan& plan, const StcCode& code, std::uint64_t seed) {
    code.validate();
    return StegoKey{plan.channel, plan.cover_height(), plan.cover_width(), plan.lattice, code, seed};
}

std::vector<std::size_t> site_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

std::vector<std::size_t> key_site_order(const StegoKey& key) {
    const auto carriers = carrier_sites(make_resize_plan(key.channel, key.cover_height, key.cover_width), key.lattice);
    const auto perm = site_order(carriers.size(), key.seed);
    std::vector<std::size_t> order;
    order.reserve(perm.size());
    for (std::size_t k : perm) order.push_back(carriers[k]);
    return order;
}

std::vector<std::uint8_t> lattice_lsbs(const PixelGrid& scaled, const StegoKey& key) {
    if (scaled.height() != scaled_extent(key.channel.sf, key.cover_height) ||
        scaled.width() != scaled_extent(key.channel.sf, key.cover_width)) {
        throw Error(ErrorCode::dimension_mismatch, "scaled image dimensions do not match the stego key");
    }
    const Lattice& l = key.lattice;
    if (l.rows > 0 && l.cols > 0 && (l.row(l.rows - 1) >= scaled.height() || l.col(l.cols - 1) >= scaled.width())) {
        throw Error(ErrorCode::invalid_key, "lattice extends past the scaled image");
    }
    std::vector<std::uint8_t> out;
    out.reserve(l.size());
    for (int a = 0; a < l.rows; ++a) {
        for (int b = 0; b < l.cols; ++b) out.push_back(scaled(l.row(a), l.col(b)) & 1u);
    }
    return out;
}

CodecResult embed_bits(const EmbedPlan& plan, const PixelGrid& scaled, const CostMap& costs,
                       std::span<const std::uint8_t> bits, const StegoKey& key) {
    const Prepared p = prepare(plan, scaled, costs, key);
    std::vector<std::uint8_t> flips(plan.sites.size(), 0);
    const double cost = embed_segment(p.order, p.lsb, p.flip_costs, bits, key.code, flips);
    return finish(plan, scaled, costs, std::move(flips), cost);
}

std::vector<std::uint8_t> extract(const PixelGrid& scaled_stego, const StegoKey& key, std::size_t expected_bits) {
    const auto lsb = lattice_lsbs(scaled_stego, key);
    const auto order = key_site_order(key);
    return segment_syndrome(order, lsb, expected_bits, key.code);
}

std::size_t message_capacity_bytes(const StegoKey& key) {
    const std::size_t n = key_site_order(key).size();
    const std::size_t head = std::min(n, kHeaderSites);
    return (n - head) / 8;
}

CodecResult embed_message(const EmbedPlan& plan, const PixelGrid& scaled, const CostMap& costs,
                          std::span<const std::uint8_t> message, const StegoKey& key) {
    const Prepared p = prepare(plan, scaled, costs, key);
    const std::size_t n = p.order.size();
    const std::size_t head = std::min(n, kHeaderSites);
    if (head < kHeaderBits) throw Error(ErrorCode::infeasible, "too few sites for the length header");
    if (message.size() > message_capacity_bytes(key) || message.size() > 0xffffffffu) {
        throw Error(ErrorCode::infeasible, "message of " + std::to_string(message.size()) + " bytes exceeds capacity of " +
                                               std::to_string(message_capacity_bytes(key)) + " bytes");
    }
    const std::uint32_t len = static_cast<std::uint32_t>(message.size());
    const std::uint8_t header_bytes[4] = {static_cast<std::uint8_t>(len >> 24), static_cast<std::uint8_t>(len >> 16),
                                          static_cast<std::uint8_t>(len >> 8), static_cast<std::uint8_t>(len)};
    const auto header = bytes_to_bits(header_bytes);
    const auto payload = bytes_to_bits(message);

    std::vector<std::uint8_t> flips(plan.sites.size(), 0);
    const std::span<const std::size_t> order(p.order);
    double cost = embed_segment(order.first(head), p.lsb, p.flip_costs, header, key.code, flips);
    cost += embed_segment(order.subspan(head), p.lsb, p.flip_costs, payload, key.code, flips);
    return finish(plan, scaled, costs, std::move(flips), cost);
}

std::vector<std::uint8_t> extract_message(const PixelGrid& scaled_stego, const StegoKey& key) {
    const auto lsb = lattice_lsbs(scaled_stego, key);
    const auto order = key_site_order(key);
    const std::size_t head = std::min(order.size(), kHeaderSites);
    if (head < kHeaderBits) throw Error(ErrorCode::invalid_key, "key lattice too small for a length header");
    const std::span<const std::size_t> ord(order);
    const auto header = bits_to_bytes(segment_syndrome(ord.first(head), lsb, kHeaderBits, key.code));
    const std::uint32_t len = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                              (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
    if (len > message_capacity_bytes(key)) {
        throw Error(ErrorCode::invalid_key, "invalid length prefix " + std::to_string(len) +
                                                " (wrong key, channel, or no embedded message)");
    }
    return bits_to_bytes(segment_syndrome(ord.subspan(head), lsb, std::size_t{len} * 8, key.code));
}

std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (std::uint8_t b : bytes) {
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1u);
    }
    return bits;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
    if (bits.size() % 8 != 0) throw Error(ErrorCode::invalid_argument, "bit count is not a multiple of 8");
    std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) bytes[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1u) << (7 - i % 8));
    return bytes;
}

double change_entropy(const CostMap& costs, double lambda) {
    double h = 0.0;
    for (const auto& c : costs.sites) h += site_entropy(c, lambda);
    return h;
}

double solve_lambda(const CostMap& costs, double payload_bits) {
    if (payload_bits <= 0.0) return kInfiniteCost;
    const double cap = max_entropy(costs);
    if (payload_bits > cap * (1.0 + 1e-12)) {
        throw Error(ErrorCode::infeasible, "payload exceeds the entropy capacity of the cost map");
    }
    if (payload_bits >= cap * (1.0 - 1e-15)) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (change_entropy(costs, hi) > payload_bits) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw Error(ErrorCode::infeasible, "payload bisection failed to bracket");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (change_entropy(costs, mid) > payload_bits) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

SimulationResult simulate_optimal(const CostMap& costs, double payload_bits, std::uint64_t seed) {
    SimulationResult out;
    out.changes.deltas.assign(costs.sites.size(), 0);
    out.lambda = solve_lambda(costs, payload_bits);
    if (std::isinf(out.lambda)) return out;
    out.entropy_bits = change_entropy(costs, out.lambda);
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < costs.sites.size(); ++k) {
        const SiteCost& c = costs.sites[k];
        const double ep = std::isinf(c.rho_plus) ? 0.0 : std::exp(-out.lambda * c.rho_plus);
        const double em = std::isinf(c.rho_minus) ? 0.0 : std::exp(-out.lambda * c.rho_minus);
        const double z = 1.0 + ep + em;
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < ep / z) {
            out.changes.deltas[k] = +1;
        } else if (u < (ep + em) / z) {
            out.changes.deltas[k] = -1;
        }
    }
    return out;
}

}  // namespace scalesteg
