#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flagwave {

// Base class for all recoverable library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension of H^n; Q = 2n + 2 is the homogeneous dimension.
struct Dimension {
    int n = 1;
    explicit constexpr Dimension(int n_) : n(n_) {
        if (n_ < 1) throw std::invalid_argument("dimension n must be >= 1");
    }
    [[nodiscard]] constexpr int Q() const { return 2 * n + 2; }
    [[nodiscard]] constexpr int coords() const { return 2 * n + 1; }
    friend constexpr bool operator==(Dimension, Dimension) = default;
};

// Point [x, y, t] of H^n.
struct GroupPoint {
    std::vector<double> x;
    std::vector<double> y;
    double t = 0.0;

    GroupPoint() = default;
    GroupPoint(std::vector<double> x_, std::vector<double> y_, double t_);

    static GroupPoint identity(int n);
    // Coordinates in storage order x1..xn, y1..yn, t.
    static GroupPoint from_coords(std::span<const double> c);
    [[nodiscard]] std::vector<double> coords() const;

    [[nodiscard]] int n() const { return static_cast<int>(x.size()); }
    [[nodiscard]] double z_norm() const;

    friend bool operator==(const GroupPoint&, const GroupPoint&) = default;
};

GroupPoint multiply(const GroupPoint& g, const GroupPoint& h);
GroupPoint inverse(const GroupPoint& g);
GroupPoint dilate(double r, const GroupPoint& g);
// rho(g) = max(|z|, sqrt|t|).
double norm(const GroupPoint& g);
// Smooth gauge (|z|^4 + t^2)^(1/4).
double smooth_norm(const GroupPoint& g);

// Empirical max of rho(g h) / (rho(g) + rho(h)) over pseudorandom pairs in the unit ball.
double quasi_triangle_constant(int n, std::int64_t sample_count, std::uint64_t seed);

// Raw-coordinate forms used by the hot loops. Arrays have length 2n+1.
inline double twist(int n, const double* a, const double* b) {
    // 2<y_a, x_b> - 2<x_a, y_b>
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[n + i] * b[i] - a[i] * b[n + i];
    return 2.0 * s;
}

// Multi-index I = (i_1, ..., i_{2n+1}).
class MultiIndex {
public:
    explicit MultiIndex(std::vector<int> i);
    [[nodiscard]] int order() const;
    [[nodiscard]] int degree() const;
    [[nodiscard]] const std::vector<int>& entries() const { return i_; }
    [[nodiscard]] int n() const { return static_cast<int>(i_.size() - 1) / 2; }

private:
    std::vector<int> i_;
};

}  // namespace flagwave
