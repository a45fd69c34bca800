#include "scalesteg/inverse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scalesteg/error.hpp"

namespace scalesteg {

namespace {

// Slack on the linear pre-filter; the forward check has the final word.
constexpr double kSlack = 1e-9;

struct Search {
    Search(const PixelGrid& c, const ResizePlan& p, const EmbedSite& s) : cover(c), plan(p), site(s) {}

    const PixelGrid& cover;
    const ResizePlan& plan;
    const EmbedSite& site;
    int dir = 1;
    int target = 0;
    int bound = 0;
    double need_lo = 0.0;  // required range of sum(w * |delta|)
    double need_hi = 0.0;
    std::vector<std::size_t> order;  // masked pixels, heaviest first
    std::vector<double> rest_weight;  // weight sum of order[d..]
    std::vector<int> current;        // magnitudes, per support pixel
    std::vector<int> best;
    long long best_l1 = std::numeric_limits<long long>::max();
    int best_max = std::numeric_limits<int>::max();

    bool accepts(long long l1, int max_step) const {
        return l1 < best_l1 || (l1 == best_l1 && max_step < best_max);
    }

    void leaf(long long l1, int max_step, double sum) {
        if (sum < need_lo - kSlack || sum > need_hi + kSlack) return;
        if (!accepts(l1, max_step)) return;
        std::vector<int> deltas(current.size());
        for (std::size_t k = 0; k < current.size(); ++k) deltas[k] = dir * current[k];
        if (forward_check(cover, plan, site, deltas, target)) {
            best = current;
            best_l1 = l1;
            best_max = max_step;
        }
    }

    void descend(std::size_t depth, long long l1, int max_step, double sum) {
        if (l1 > best_l1) return;
        if (depth == order.size()) {
            leaf(l1, max_step, sum);
            return;
        }
        const double shortfall = need_lo - kSlack - sum;
        if (shortfall > 0.0) {
            if (sum + bound * rest_weight[depth] < need_lo - kSlack) return;
            const double heaviest = site.weights[order[depth]];
            const long long more = static_cast<long long>(std::ceil(shortfall / heaviest - kSlack));
            if (l1 + more > best_l1) return;
        }
        const std::size_t k = order[depth];
        for (int m = bound; m >= 0; --m) {
            current[k] = m;
            descend(depth + 1, l1 + m, std::max(max_step, m), sum + site.weights[k] * m);
        }
        current[k] = 0;
    }
};

}  // namespace

long long SiteSolution::l1() const noexcept {
    long long s = 0;
    for (int d : deltas) s += std::abs(d);
    return s;
}

bool forward_check(const PixelGrid& cover, const ResizePlan& plan, const EmbedSite& site, std::span<const int> deltas,
                   int expected_y_prime) {
    if (deltas.size() != site.support.size()) return false;
    if (expected_y_prime < 0 || expected_y_prime > 255) return false;
    const auto pixel = [&](int r, int c) {
        int v = cover(r, c);
        for (std::size_t k = 0; k < site.support.size(); ++k) {
            if (site.support[k].row == r && site.support[k].col == c) v += deltas[k];
        }
        return v;
    };
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const int v = cover(site.support[k].row, site.support[k].col) + deltas[k];
        if (v < 0 || v > 255) return false;
    }
    return quantize(resample_real(plan, site.y.row, site.y.col, pixel)) == expected_y_prime;
}

SiteSolution solve_site(const PixelGrid& cover, const ResizePlan& plan, const EmbedSite& site, int delta_y) {
    SiteSolution sol;
    sol.delta_y = delta_y;
    sol.deltas.assign(site.support.size(), 0);
    if (delta_y == 0) {
        sol.verified = forward_check(cover, plan, site, sol.deltas, site.y_value);
        return sol;
    }
    if (delta_y != 1 && delta_y != -1) throw Error(ErrorCode::invalid_argument, "delta_y must be -1, 0 or +1");
    if (site.wet(delta_y)) throw Error(ErrorCode::invalid_argument, "change requested in a wet direction");

    Search s(cover, plan, site);
    s.dir = delta_y;
    s.target = site.y_value + delta_y;
    s.bound = site.bound(delta_y);
    const double v0 = resample_real(plan, site.y.row, site.y.col, [&cover](int r, int c) { return cover(r, c); });
    const double inf = std::numeric_limits<double>::infinity();
    // Signed shift range for round(v0 + shift) == target, clamping included.
    const double lo = s.target == 0 ? -inf : s.target - 0.5 - v0;
    const double hi = s.target == 255 ? inf : s.target + 0.5 - v0;
    s.need_lo = delta_y > 0 ? lo : -hi;
    s.need_hi = delta_y > 0 ? hi : -lo;

    const auto& mask = site.mask(delta_y);
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) s.order.push_back(k);
    }
    std::stable_sort(s.order.begin(), s.order.end(),
                     [&site](std::size_t a, std::size_t b) { return site.weights[a] > site.weights[b]; });
    s.rest_weight.assign(s.order.size() + 1, 0.0);
    for (std::size_t d = s.order.size(); d-- > 0;) s.rest_weight[d] = s.rest_weight[d + 1] + site.weights[s.order[d]];
    s.current.assign(site.support.size(), 0);

    s.descend(0, 0, 0, 0.0);
    if (!s.best.empty()) {
        for (std::size_t k = 0; k < s.best.size(); ++k) sol.deltas[k] = delta_y * s.best[k];
        sol.verified = true;
    }
    return sol;
}

SolveOutcome solve_sites(const PixelGrid& cover, const EmbedPlan& plan, const ChangeVector& changes) {
    if (changes.deltas.size() != plan.sites.size()) {
        throw Error(ErrorCode::dimension_mismatch, "change vector does not match the plan");
    }
    if (cover.height() != plan.cover_height() || cover.width() != plan.cover_width()) {
        throw Error(ErrorCode::dimension_mismatch, "cover does not match the plan");
    }
    SolveOutcome out;
    out.delta = DeltaMap(cover.height(), cover.width());
    out.solutions.resize(plan.sites.size());
    for (std::size_t k = 0; k < plan.sites.size(); ++k) {
        const int dy = changes.deltas[k];
        if (dy == 0) {
            out.solutions[k] = SiteSolution{0, std::vector<int>(plan.sites[k].support.size(), 0), true};
            continue;
        }
        SiteSolution sol = solve_site(cover, plan.resize, plan.sites[k], dy);
        if (!sol.verified) {
            out.failed.push_back(k);
        } else {
            for (std::size_t i = 0; i < sol.deltas.size(); ++i) {
                if (sol.deltas[i] != 0) out.delta.set(plan.sites[k].support[i], sol.deltas[i]);
            }
        }
        out.solutions[k] = std::move(sol);
    }
    return out;
}

DeltaMap solve_all(const PixelGrid& cover, const EmbedPlan& plan, const ChangeVector& changes) {
    SolveOutcome out = solve_sites(cover, plan, changes);
    if (!out.failed.empty()) {
        std::string where;
        for (std::size_t i = 0; i < out.failed.size() && i < 8; ++i) {
            const Coord& y = plan.sites[out.failed[i]].y;
            where += " (" + std::to_string(y.row) + "," + std::to_string(y.col) + ")";
        }
        throw Error(ErrorCode::solver_failure,
                    std::to_string(out.failed.size()) + " site(s) have no verified inverse:" + where);
    }
    return std::move(out.delta);
}

}  // namespace scalesteg
