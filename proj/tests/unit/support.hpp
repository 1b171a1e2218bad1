#pragma once

#include <cmath>
#include <cstring>
#include <vector>

#include "flagwave/grid.hpp"
#include "flagwave/rng.hpp"

namespace fwtest {

using namespace flagwave;

// Reference direct sum: every node y of f in flat order, w = y^{-1} x through the
// public group API, g evaluated by the public interpolant.
inline SampledFunction brute_force_convolve(const SampledFunction& f, const SampledFunction& g) {
    const GridSpec& G = f.grid();
    SampledFunction out(G);
    const int A = G.axes();
    std::vector<int> xi(A), yi(A);
    for (std::size_t x = 0; x < out.size(); ++x) {
        G.unflatten(x, xi);
        const GroupPoint gx = G.point(xi);
        double acc = 0.0;
        for (std::size_t y = 0; y < f.size(); ++y) {
            G.unflatten(y, yi);
            const GroupPoint gy = G.point(yi);
            acc += f[y] * g.interpolate(multiply(inverse(gy), gx));
        }
        out[x] = acc * G.cell_volume();
    }
    return out;
}

// Smooth compactly supported bump of smooth-gauge radius r centred at c.
inline double bump(const GroupPoint& g, double r) {
    const double z = g.z_norm();
    const double q = (z * z * z * z + g.t * g.t) / (r * r * r * r);
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
}

// Generic non-central smooth function supported in the bump of radius r.
inline SampledFunction smooth_field(const GridSpec& grid, double r, double a, double b) {
    return SampledFunction::sample(grid, [=](const GroupPoint& g) {
        return bump(g, r) * (1.0 + a * g.x[0] + b * g.y[0] * g.t + 0.1 * g.t);
    });
}

inline SampledFunction random_field(const GridSpec& grid, Rng& rng, double density) {
    SampledFunction f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double u = rng.uniform();
        f[i] = u < density ? rng.uniform(-1.0, 1.0) : 0.0;
    }
    return f;
}

inline bool bit_equal(const SampledFunction& a, const SampledFunction& b) {
    if (!(a.grid() == b.grid())) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::memcmp(&a.values()[i], &b.values()[i], sizeof(double)) != 0) return false;
    return true;
}

}  // namespace fwtest
