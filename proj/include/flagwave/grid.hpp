#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flagwave/heisenberg.hpp"

namespace flagwave {

// Uniform cell-centred grid on [-Lz, Lz]^{2n} x [-Lt, Lt].
// Node i on an axis of half-width L and P points sits at -L + (i + 1/2) h, h = 2L/P,
// so every grid is symmetric under g -> -g.
struct GridSpec {
    int n = 1;
    double half_width_z = 4.0;
    double half_width_t = 16.0;
    int points_z = 32;
    int points_t = 64;

    void validate() const;

    [[nodiscard]] double h_z() const { return 2.0 * half_width_z / points_z; }
    [[nodiscard]] double h_t() const { return 2.0 * half_width_t / points_t; }
    [[nodiscard]] double cell_volume() const;
    [[nodiscard]] int axes() const { return 2 * n + 1; }
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::size_t columns() const { return size() / static_cast<std::size_t>(points_t); }
    [[nodiscard]] int points(int axis) const { return axis < 2 * n ? points_z : points_t; }
    [[nodiscard]] double half_width(int axis) const { return axis < 2 * n ? half_width_z : half_width_t; }
    [[nodiscard]] double spacing(int axis) const { return axis < 2 * n ? h_z() : h_t(); }
    [[nodiscard]] double coord(int axis, int i) const {
        return -half_width(axis) + (i + 0.5) * spacing(axis);
    }
    [[nodiscard]] double coord_z(int i) const { return -half_width_z + (i + 0.5) * h_z(); }
    [[nodiscard]] double coord_t(int i) const { return -half_width_t + (i + 0.5) * h_t(); }
    // Nearest node index on an axis, clamped to the grid.
    [[nodiscard]] int nearest(int axis, double c) const;

    // Same point counts, box scaled by delta_{2^{-c}}: Lz * 2^-c, Lt * 4^-c.
    [[nodiscard]] GridSpec dilated(int c) const;
    // Twice the points per axis on the same box.
    [[nodiscard]] GridSpec refined() const;

    // Row-major with axes x1..xn, y1..yn, t (t fastest).
    [[nodiscard]] std::size_t flat(std::span<const int> idx) const;
    void unflatten(std::size_t flat_index, std::span<int> idx) const;
    [[nodiscard]] GroupPoint point(std::span<const int> idx) const;
    void node_coords(std::size_t flat_index, std::span<double> out) const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Inclusive index box per axis; empty when any lo > hi.
struct IndexBox {
    std::vector<int> lo;
    std::vector<int> hi;
    [[nodiscard]] bool empty() const;
};

class SampledFunction {
public:
    SampledFunction() = default;
    explicit SampledFunction(GridSpec grid);
    SampledFunction(GridSpec grid, std::vector<double> values);

    // Samples fn(point) at every node.
    static SampledFunction sample(const GridSpec& grid,
                                  const std::function<double(const GroupPoint&)>& fn);

    [[nodiscard]] const GridSpec& grid() const { return grid_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }

    // Bounding box of nonzero values.
    [[nodiscard]] IndexBox support() const;
    [[nodiscard]] bool all_finite() const;

    // Multilinear interpolation with zero extension. Interpolates the z-axes first
    // (corner order lexicographic, weights multiplied in axis order), then t.
    [[nodiscard]] double interpolate(std::span<const double> coords) const;
    [[nodiscard]] double interpolate(const GroupPoint& g) const;

    SampledFunction& operator+=(const SampledFunction& o);
    SampledFunction& operator-=(const SampledFunction& o);
    SampledFunction& operator*=(double s);
    friend SampledFunction operator+(SampledFunction a, const SampledFunction& b) { return a += b; }
    friend SampledFunction operator-(SampledFunction a, const SampledFunction& b) { return a -= b; }
    friend SampledFunction operator*(double s, SampledFunction a) { return a *= s; }

private:
    GridSpec grid_;
    std::vector<double> values_;
};

// Samples at offsets m*h, m = -half..half.
struct Sampled1DFunction {
    double h = 1.0;
    int half = 0;
    std::vector<double> values;  // size 2*half+1

    Sampled1DFunction() = default;
    Sampled1DFunction(double h_, int half_);
    [[nodiscard]] double at(long m) const {
        return (m < -half || m > half) ? 0.0 : values[static_cast<std::size_t>(m + half)];
    }
    [[nodiscard]] double offset(int m) const { return m * h; }
    [[nodiscard]] double integral() const;
};

// Quadrature: sum of values times cell volume (midpoint rule).
double integrate(const SampledFunction& f);
double l2_norm(const SampledFunction& f);
double lp_norm(const SampledFunction& f, double p);
double sup_norm(const SampledFunction& f);
double inner(const SampledFunction& f, const SampledFunction& g);
// ||a - b||_2 / ||b||_2.
double relative_l2(const SampledFunction& a, const SampledFunction& b);

// (f * g)(x) = int f(y) g(y^{-1} x) dy. Sum over the nodes of f in lexicographic
// order, g interpolated. Requires identical grids.
SampledFunction convolve(const SampledFunction& f, const SampledFunction& g);
// Same sum with f, g and the output on independent grids.
SampledFunction convolve_mixed(const SampledFunction& f, const SampledFunction& g, const GridSpec& out);
// f * g evaluated by summing over the nodes of g and interpolating f:
// (f * g)(x) = int g(v) f(x v^{-1}) dv.
SampledFunction convolve_over_second(const SampledFunction& f, const SampledFunction& g,
                                     const GridSpec& out);
// out(x) = sum_a W(a) g(x a^{-1}) over the nodes a of W; no quadrature weight.
SampledFunction translate_sum(const SampledFunction& W, const SampledFunction& g, const GridSpec& out);

// 1-D convolution in t for every z-column: out(z,u) = int f(z,u-v) w(v) dv.
SampledFunction partial_convolve_t(const SampledFunction& f, const Sampled1DFunction& w);
// Same, only for the listed z-columns; other columns are zero.
SampledFunction partial_convolve_t(const SampledFunction& f, const Sampled1DFunction& w,
                                   std::span<const std::size_t> columns);
// 1-D convolution of two offset-sampled kernels (same spacing).
Sampled1DFunction convolve_1d(const Sampled1DFunction& a, const Sampled1DFunction& b);

// f~(g) = f(g^{-1}); exact index flip on the symmetric grid. Values are real, so
// conjugation is the identity and the flag only documents intent.
SampledFunction reflect(const SampledFunction& f, bool conjugate = false);
// D_r f(g) = r^Q f(delta_r g), resampled by interpolation.
SampledFunction dilate_function(double r, const SampledFunction& f);
// f(h o .) resampled by interpolation.
SampledFunction left_translate(const GroupPoint& h, const SampledFunction& f);
// Restriction / zero-extension onto another grid by interpolation.
SampledFunction resample(const SampledFunction& f, const GridSpec& target);

enum class FieldVariant { left, right };
// Index j in 1..2n+1: X_1..X_n, Y_1..Y_n, T.
// left:  X_j = d/dx_j + 2 y_j d/dt,  Y_j = d/dy_j - 2 x_j d/dt  (left-invariant)
// right: X_j = d/dx_j - 2 y_j d/dt,  Y_j = d/dy_j + 2 x_j d/dt  (right-invariant)
SampledFunction vector_field(int j, const SampledFunction& f, FieldVariant variant);
// X^I f = X_1^{i_1}( ... T^{i_{2n+1}} f): rightmost factor acts first.
SampledFunction apply_multi_index(const MultiIndex& I, const SampledFunction& f, FieldVariant variant);
// Plain partial derivative along an axis (second-order differences).
SampledFunction partial_derivative(int axis, const SampledFunction& f);

// Binary container plus JSON sidecar. Round trip is bit-exact.
void save(const SampledFunction& f, const std::string& path_without_extension,
          const std::string& extra_json = "{}");
SampledFunction load(const std::string& path_without_extension);

}  // namespace flagwave
