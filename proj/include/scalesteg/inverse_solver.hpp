#pragma once

#include <span>
#include <vector>

#include "scalesteg/channel_analysis.hpp"
#include "scalesteg/pixel_grid.hpp"
#include "scalesteg/resampler.hpp"
#include "scalesteg/stego_codec.hpp"

namespace scalesteg {

struct SiteSolution {
    int delta_y = 0;
    std::vector<int> deltas;  // per support pixel of the site
    bool verified = false;

    long long l1() const noexcept;
};

// Recomputes output site.y from the cover with deltas added on the support and
// compares the rounded value with expected_y_prime.
bool forward_check(const PixelGrid& cover, const ResizePlan& plan, const EmbedSite& site, std::span<const int> deltas,
                   int expected_y_prime);

// Minimum-L1 perturbation of the direction's masked pixels, each moved by at
// most the direction's bound and all in the direction of delta_y, such that
// the exact forward resample lands on y + delta_y. Ties prefer the smaller
// largest step. Unverified when no such perturbation exists.
SiteSolution solve_site(const PixelGrid& cover, const ResizePlan& plan, const EmbedSite& site, int delta_y);

struct SolveOutcome {
    DeltaMap delta;
    std::vector<std::size_t> failed;  // plan site indices without a verified solution
    std::vector<SiteSolution> solutions;
};

// Solves every changed site in row-major lattice order.
SolveOutcome solve_sites(const PixelGrid& cover, const EmbedPlan& plan, const ChangeVector& changes);
// As solve_sites, but any unverified site is a solver_failure.
DeltaMap solve_all(const PixelGrid& cover, const EmbedPlan& plan, const ChangeVector& changes);

}  // namespace scalesteg
