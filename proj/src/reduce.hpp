#pragma once

#include <cstddef>
#include <span>

namespace mfg::detail {

// Pairwise summation: order-fixed and accurate, independent of how the
// summands were produced.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    size_t mid = v.size() / 2;
    return pairwise_sum(v.subspan(0, mid)) + pairwise_sum(v.subspan(mid));
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> v) {
    MeanSe r;
    const size_t n = v.size();
    if (n == 0) return r;
    r.mean = pairwise_sum(v) / static_cast<double>(n);
    if (n < 2) return r;
    double ss = 0.0;
    for (double x : v) {
        double d = x - r.mean;
        ss += d * d;
    }
    r.se = std::sqrt(ss / (static_cast<double>(n) * (n - 1)));
    return r;
}

}  // namespace mfg::detail
