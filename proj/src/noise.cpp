#include "mfg/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace mfg {

namespace philox {

namespace {

constexpr uint32_t kW32A = 0x9E3779B9u;
constexpr uint32_t kW32B = 0xBB67AE85u;
constexpr uint32_t kM4x32A = 0xD2511F53u;
constexpr uint32_t kM4x32B = 0xCD9E8D57u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& lo, uint32_t& hi) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    lo = static_cast<uint32_t>(p);
    hi = static_cast<uint32_t>(p >> 32);
}

}  // namespace

Block generate(uint64_t key, uint64_t counter_hi, uint64_t counter_lo) {
    uint32_t c[4] = {static_cast<uint32_t>(counter_lo), static_cast<uint32_t>(counter_lo >> 32),
                     static_cast<uint32_t>(counter_hi), static_cast<uint32_t>(counter_hi >> 32)};
    uint32_t k0 = static_cast<uint32_t>(key);
    uint32_t k1 = static_cast<uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kM4x32A, c[0], lo0, hi0);
        mulhilo(kM4x32B, c[2], lo1, hi1);
        uint32_t n0 = hi1 ^ c[1] ^ k0;
        uint32_t n1 = lo1;
        uint32_t n2 = hi0 ^ c[3] ^ k1;
        uint32_t n3 = lo0;
        c[0] = n0;
        c[1] = n1;
        c[2] = n2;
        c[3] = n3;
        k0 += kW32A;
        k1 += kW32B;
    }
    return Block{{c[0], c[1], c[2], c[3]}};
}

double standard_normal(uint64_t key, uint64_t counter_hi, uint64_t counter_lo) {
    Block b = generate(key, counter_hi, counter_lo);
    // (v+1) * 2^-32 keeps u1 in (0, 1], so the log is finite.
    double u1 = (static_cast<double>(b.v[0]) + 1.0) * 0x1p-32;
    double u2 = static_cast<double>(b.v[1]) * 0x1p-32;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace philox

PathBundle generate_noise(const NoisePlan& plan, int n_threads) {
    if (plan.n_paths < 1) throw std::invalid_argument("NoisePlan: n_paths must be >= 1");
    const int n = plan.grid.n_steps;
    const double sdt = std::sqrt(plan.grid.dt());
    PathBundle b;
    b.n_paths = plan.n_paths;
    b.grid = plan.grid;
    b.dw1.resize(static_cast<size_t>(plan.n_paths) * n);
    b.dw2.resize(static_cast<size_t>(plan.n_paths) * n);

    auto fill = [&](int p_begin, int p_end) {
        for (int p = p_begin; p < p_end; ++p) {
            size_t row = static_cast<size_t>(p) * n;
            for (int k = 0; k < n; ++k) {
                // counter_hi = path, counter_lo = (channel, step)
                b.dw1[row + k] = sdt * philox::standard_normal(
                                           plan.master_seed, static_cast<uint64_t>(p),
                                           (0ull << 32) | static_cast<uint32_t>(k));
                b.dw2[row + k] = sdt * philox::standard_normal(
                                           plan.master_seed, static_cast<uint64_t>(p),
                                           (1ull << 32) | static_cast<uint32_t>(k));
            }
        }
    };

    if (n_threads <= 1 || plan.n_paths < 2 * n_threads) {
        fill(0, plan.n_paths);
    } else {
        std::vector<std::thread> workers;
        int chunk = (plan.n_paths + n_threads - 1) / n_threads;
        for (int w = 0; w < n_threads; ++w) {
            int lo = w * chunk, hi = std::min(plan.n_paths, lo + chunk);
            if (lo >= hi) break;
            workers.emplace_back(fill, lo, hi);
        }
        for (auto& t : workers) t.join();
    }
    return b;
}

PathBundle coarsen(const PathBundle& fine) {
    const int n = fine.grid.n_steps;
    if (n % 2 != 0) throw std::invalid_argument("coarsen: step count must be even");
    PathBundle c;
    c.n_paths = fine.n_paths;
    c.grid = TimeGrid(fine.grid.horizon, n / 2);
    c.dw1.resize(static_cast<size_t>(c.n_paths) * (n / 2));
    c.dw2.resize(static_cast<size_t>(c.n_paths) * (n / 2));
    for (int p = 0; p < c.n_paths; ++p) {
        size_t fr = static_cast<size_t>(p) * n;
        size_t cr = static_cast<size_t>(p) * (n / 2);
        for (int k = 0; k < n / 2; ++k) {
            c.dw1[cr + k] = fine.dw1[fr + 2 * k] + fine.dw1[fr + 2 * k + 1];
            c.dw2[cr + k] = fine.dw2[fr + 2 * k] + fine.dw2[fr + 2 * k + 1];
        }
    }
    return c;
}

}  // namespace mfg
