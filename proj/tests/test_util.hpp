#pragma once

#include <cmath>
#include <random>

#include "spinsurf/clifford.hpp"

namespace testutil {

inline spinsurf::Multivector random_mv(const spinsurf::Signature& sig, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    spinsurf::Multivector m(sig);
    for (int b = 0; b < sig.size(); ++b) m[static_cast<spinsurf::Blade>(b)] = d(rng);
    return m;
}

inline spinsurf::Multivector random_even(const spinsurf::Signature& sig, std::mt19937_64& rng) {
    return random_mv(sig, rng).even();
}

inline spinsurf::Multivector random_vector(const spinsurf::Signature& sig, std::mt19937_64& rng) {
    return random_mv(sig, rng).grade(1);
}

// Product of one-parameter rotations and boosts in every coordinate plane.
inline spinsurf::Multivector random_spin(const spinsurf::Signature& sig, std::mt19937_64& rng, double amp = 1.0) {
    using spinsurf::Multivector;
    std::uniform_real_distribution<double> d(-amp, amp);
    Multivector g = Multivector::scalar(sig, 1.0);
    for (int i = 0; i < sig.dim(); ++i)
        for (int j = i + 1; j < sig.dim(); ++j) {
            const double t = d(rng);
            const Multivector B = Multivector::blade(sig, (1u << i) | (1u << j));
            const bool compact = sig.metric(i) == sig.metric(j);
            const double c = compact ? std::cos(t) : std::cosh(t);
            const double s = compact ? std::sin(t) : std::sinh(t);
            g = g * (Multivector::scalar(sig, c) + s * B);
        }
    return g;
}

}  // namespace testutil
