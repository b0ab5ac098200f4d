#pragma once

#include <cmath>
#include <random>

namespace stapulse {

// Draws in [0,1) built directly from the engine's 64-bit output, so seeded
// streams are identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

// One standard normal draw (Marsaglia polar, spare discarded): two or more
// engine outputs per call, deterministic for a given engine state.
inline double normal01(std::mt19937_64& rng) {
    for (;;) {
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

}  // namespace stapulse
