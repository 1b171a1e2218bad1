#include "flagwave/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flagwave/rng.hpp"

namespace flagwave {

GroupPoint::GroupPoint(std::vector<double> x_, std::vector<double> y_, double t_)
    : x(std::move(x_)), y(std::move(y_)), t(t_) {
    if (x.size() != y.size()) throw Error("GroupPoint: x and y must have equal length");
}

GroupPoint GroupPoint::identity(int n) {
    return GroupPoint(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0);
}

GroupPoint GroupPoint::from_coords(std::span<const double> c) {
    if (c.size() < 3 || c.size() % 2 == 0) throw Error("GroupPoint: need 2n+1 coordinates");
    const std::size_t n = (c.size() - 1) / 2;
    return GroupPoint(std::vector<double>(c.begin(), c.begin() + n),
                      std::vector<double>(c.begin() + n, c.begin() + 2 * n), c[2 * n]);
}

std::vector<double> GroupPoint::coords() const {
    std::vector<double> c;
    c.reserve(2 * x.size() + 1);
    c.insert(c.end(), x.begin(), x.end());
    c.insert(c.end(), y.begin(), y.end());
    c.push_back(t);
    return c;
}

double GroupPoint::z_norm() const {
    double s = 0.0;
    for (double v : x) s += v * v;
    for (double v : y) s += v * v;
    return std::sqrt(s);
}

GroupPoint multiply(const GroupPoint& g, const GroupPoint& h) {
    if (g.n() != h.n()) throw Error("multiply: dimension mismatch");
    const int n = g.n();
    GroupPoint r = GroupPoint::identity(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        r.x[i] = g.x[i] + h.x[i];
        r.y[i] = g.y[i] + h.y[i];
        s += g.y[i] * h.x[i] - g.x[i] * h.y[i];
    }
    r.t = g.t + h.t + 2.0 * s;
    return r;
}

GroupPoint inverse(const GroupPoint& g) {
    GroupPoint r = g;
    for (double& v : r.x) v = -v;
    for (double& v : r.y) v = -v;
    r.t = -r.t;
    return r;
}

GroupPoint dilate(double r, const GroupPoint& g) {
    if (!(r > 0.0)) throw Error("dilate: r must be positive");
    GroupPoint d = g;
    for (double& v : d.x) v *= r;
    for (double& v : d.y) v *= r;
    d.t *= r * r;
    return d;
}

double norm(const GroupPoint& g) { return std::max(g.z_norm(), std::sqrt(std::abs(g.t))); }

double smooth_norm(const GroupPoint& g) {
    const double z = g.z_norm();
    return std::pow(z * z * z * z + g.t * g.t, 0.25);
}

double quasi_triangle_constant(int n, std::int64_t sample_count, std::uint64_t seed) {
    if (sample_count < 1) throw Error("quasi_triangle_constant: sample_count must be >= 1");
    Rng rng(seed);
    // Rejection sampling in the unit rho-ball: |z| <= 1, |t| <= 1.
    auto draw = [&] {
        GroupPoint g = GroupPoint::identity(n);
        for (;;) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                g.x[i] = rng.uniform(-1.0, 1.0);
                g.y[i] = rng.uniform(-1.0, 1.0);
                s += g.x[i] * g.x[i] + g.y[i] * g.y[i];
            }
            if (s <= 1.0) break;
        }
        g.t = rng.uniform(-1.0, 1.0);
        return g;
    };
    double best = 1.0;  // h = identity realizes ratio 1
    for (std::int64_t i = 0; i < sample_count; ++i) {
        const GroupPoint g = draw();
        const GroupPoint h = draw();
        const double den = norm(g) + norm(h);
        if (den > 0.0) best = std::max(best, norm(multiply(g, h)) / den);
    }
    return best;
}

MultiIndex::MultiIndex(std::vector<int> i) : i_(std::move(i)) {
    if (i_.size() < 3 || i_.size() % 2 == 0) throw Error("MultiIndex: need 2n+1 entries");
    for (int v : i_)
        if (v < 0) throw Error("MultiIndex: entries must be nonnegative");
}

int MultiIndex::order() const { return std::accumulate(i_.begin(), i_.end(), 0); }

int MultiIndex::degree() const { return order() + i_.back(); }

}  // namespace flagwave
