#include "flagwave/fields.hpp"

#include <cmath>

namespace flagwave {

SampledFunction random_smooth_field(const GridSpec& grid, Rng& rng, double s, double extent_z, double extent_t) {
    if (!(s > 0.0)) throw Error("random_smooth_field: scale must be positive");
    const int A = grid.axes();
    const int mz = static_cast<int>(std::floor(extent_z / s + 1e-9));
    const int mt = static_cast<int>(std::floor(extent_t / (s * s) + 1e-9));
    std::vector<std::vector<double>> centres;
    std::vector<double> amp;
    std::vector<int> m(A, 0);
    for (int a = 0; a < A; ++a) m[a] = a < A - 1 ? -mz : -mt;
    while (true) {
        std::vector<double> c(A);
        for (int a = 0; a < A; ++a) c[a] = a < A - 1 ? m[a] * s : m[a] * s * s;
        centres.push_back(c);
        amp.push_back(rng.uniform(-1.0, 1.0));
        int a = A - 1;
        while (a >= 0 && ++m[a] > (a < A - 1 ? mz : mt)) {
            m[a] = a < A - 1 ? -mz : -mt;
            --a;
        }
        if (a < 0) break;
    }
    const double R = 1.5 * s, R4 = R * R * R * R;
    SampledFunction f(grid);
    std::vector<double> x(A);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.node_coords(i, x);
        double acc = 0.0;
        for (std::size_t q = 0; q < centres.size(); ++q) {
            const std::vector<double>& c = centres[q];
            const double dt = x[A - 1] - c[A - 1];
            if (dt * dt >= R4) continue;
            double z2 = 0.0;
            for (int a = 0; a < A - 1; ++a) z2 += (x[a] - c[a]) * (x[a] - c[a]);
            const double qv = (z2 * z2 + dt * dt) / R4;
            if (qv < 1.0) acc += amp[q] * std::exp(-1.0 / (1.0 - qv));
        }
        f[i] = acc;
    }
    return f;
}

}  // namespace flagwave
