#pragma once

#include <cstdint>
#include <vector>

#include "mfg/time_grid.hpp"

namespace mfg {

// Philox-4x32-10 counter-based generator (Salmon et al., SC'11). Each
// (path, channel, step) maps to an independent counter block, so any subset
// of a bundle is reproducible in isolation and independent of worker count.
namespace philox {

struct Block {
    uint32_t v[4];
};

Block generate(uint64_t key, uint64_t counter_hi, uint64_t counter_lo);

// Standard normal via Box-Muller from one Philox block.
double standard_normal(uint64_t key, uint64_t counter_hi, uint64_t counter_lo);

}  // namespace philox

// Recipe for a reproducible two-channel Brownian bundle.
struct NoisePlan {
    uint64_t master_seed = 0;
    int n_paths = 1;
    TimeGrid grid;
};

// n_paths x N Gaussian increments per channel, variance dt, row-major.
struct PathBundle {
    int n_paths = 0;
    TimeGrid grid;
    std::vector<double> dw1, dw2;

    double w1(int path, int step) const { return dw1[static_cast<size_t>(path) * grid.n_steps + step]; }
    double w2(int path, int step) const { return dw2[static_cast<size_t>(path) * grid.n_steps + step]; }
};

PathBundle generate_noise(const NoisePlan& plan, int n_threads = 1);

// Sums adjacent increment pairs: a bundle on the grid with N/2 steps driven
// by the same Brownian paths. N must be even.
PathBundle coarsen(const PathBundle& bundle);

}  // namespace mfg
