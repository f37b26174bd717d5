#pragma once

// Shared fixtures for the test suite.

#include <random>

#include "mfg/game_spec.hpp"

namespace testsup {

// Reference scenario used throughout: constant coefficients, asymmetric cost
// weights, both players with the same control effectiveness b^2/m.
inline mfg::LqGameSpec s1() {
    mfg::LqGameSpec s;
    s.horizon = 1.0;
    s.x0 = 1.0;
    s.a = 0.1;
    s.abar = 0.05;
    s.b1 = 1.0;
    s.b2 = 1.0;
    s.c1 = 0.2;
    s.c2 = 0.2;
    s.g1 = 1.0;
    s.g2 = 0.5;
    s.gbar1 = 0.1;
    s.gbar2 = 0.2;
    s.m1 = 1.0;
    s.m2 = 1.0;
    s.h1 = 1.0;
    s.h2 = 0.5;
    s.hbar1 = 0.0;
    s.hbar2 = 0.0;
    return s;
}

// Random valid spec with the symmetry condition holding by construction
// (m1 = m2, b1 = b2).
inline mfg::LqGameSpec random_a3_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    mfg::LqGameSpec s;
    s.horizon = 0.5 + u(rng);
    s.x0 = -1.0 + 2.0 * u(rng);
    s.a = -0.5 + u(rng);
    s.abar = -0.3 + 0.6 * u(rng);
    const double b = 0.5 + u(rng);
    s.b1 = b;
    s.b2 = b;
    s.c1 = 0.1 + 0.4 * u(rng);
    s.c2 = 0.1 + 0.4 * u(rng);
    s.g1 = 2.0 * u(rng);
    s.g2 = 2.0 * u(rng);
    s.gbar1 = 0.5 * u(rng);
    s.gbar2 = 0.5 * u(rng);
    const double m = 0.5 + u(rng);
    s.m1 = m;
    s.m2 = m;
    s.h1 = u(rng);
    s.h2 = u(rng);
    s.hbar1 = 0.3 * u(rng);
    s.hbar2 = 0.3 * u(rng);
    return s;
}

}  // namespace testsup
