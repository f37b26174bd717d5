#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "mfg/riccati.hpp"
#include "mfg/time_grid.hpp"

namespace mfg::detail {

// Classical RK4 over the grid, storing node states and node derivatives.
// Direction +1 integrates forward from y[0], -1 backward from y[N].
// blow_up > 0 throws BlowUpError when any stage state exceeds it.
template <size_t D, typename Rhs>
std::vector<std::array<double, D>> rk4_integrate(const TimeGrid& grid,
                                                 const std::array<double, D>& boundary,
                                                 int direction, Rhs rhs, double blow_up,
                                                 std::vector<std::array<double, D>>* node_derivs) {
    const int n = grid.n_steps;
    const double h = direction * grid.dt();
    std::vector<std::array<double, D>> y(n + 1);
    if (node_derivs) node_derivs->resize(n + 1);

    auto check = [&](const std::array<double, D>& s, double t) {
        if (blow_up > 0)
            for (double v : s)
                if (!(std::fabs(v) < blow_up)) throw BlowUpError(t, std::fabs(v));
    };

    int k0 = direction > 0 ? 0 : n;
    y[k0] = boundary;
    for (int i = 0; i < n; ++i) {
        int k = direction > 0 ? i : n - i;
        int knext = k + direction;
        double t = grid.node(k);
        const auto& s = y[k];

        std::array<double, D> k1 = rhs(t, s);
        if (node_derivs) (*node_derivs)[k] = k1;

        std::array<double, D> s2, s3, s4;
        for (size_t j = 0; j < D; ++j) s2[j] = s[j] + 0.5 * h * k1[j];
        check(s2, t + 0.5 * h);
        std::array<double, D> k2 = rhs(t + 0.5 * h, s2);
        for (size_t j = 0; j < D; ++j) s3[j] = s[j] + 0.5 * h * k2[j];
        check(s3, t + 0.5 * h);
        std::array<double, D> k3 = rhs(t + 0.5 * h, s3);
        for (size_t j = 0; j < D; ++j) s4[j] = s[j] + h * k3[j];
        check(s4, t + h);
        std::array<double, D> k4 = rhs(t + h, s4);

        auto& out = y[knext];
        for (size_t j = 0; j < D; ++j)
            out[j] = s[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        check(out, t + h);
    }
    if (node_derivs) {
        int kend = direction > 0 ? n : 0;
        (*node_derivs)[kend] = rhs(grid.node(kend), y[kend]);
    }
    return y;
}

}  // namespace mfg::detail
