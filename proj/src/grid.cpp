#include "flagwave/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace flagwave {

namespace {

constexpr int kMaxAxes = 9;  // n <= 4

}  // namespace

// ---------------------------------------------------------------- GridSpec

void GridSpec::validate() const {
    if (n < 1 || 2 * n + 1 > kMaxAxes) throw Error("GridSpec: n must be in 1..4");
    if (!(half_width_z > 0.0) || !(half_width_t > 0.0)) throw Error("GridSpec: half widths must be positive");
    if (points_z < 2 || points_z % 2 != 0 || points_t < 2 || points_t % 2 != 0)
        throw Error("GridSpec: points per axis must be even and positive");
}

double GridSpec::cell_volume() const { return std::pow(h_z(), 2 * n) * h_t(); }

std::size_t GridSpec::size() const {
    std::size_t s = static_cast<std::size_t>(points_t);
    for (int i = 0; i < 2 * n; ++i) s *= static_cast<std::size_t>(points_z);
    return s;
}

int GridSpec::nearest(int axis, double c) const {
    const int p = points(axis);
    const int i = static_cast<int>(std::lround((c + half_width(axis)) / spacing(axis) - 0.5));
    return std::clamp(i, 0, p - 1);
}

GridSpec GridSpec::dilated(int c) const {
    GridSpec g = *this;
    g.half_width_z = std::ldexp(half_width_z, -c);
    g.half_width_t = std::ldexp(half_width_t, -2 * c);
    return g;
}

GridSpec GridSpec::refined() const {
    GridSpec g = *this;
    g.points_z *= 2;
    g.points_t *= 2;
    return g;
}

std::size_t GridSpec::flat(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int a = 0; a < axes(); ++a) f = f * static_cast<std::size_t>(points(a)) + static_cast<std::size_t>(idx[a]);
    return f;
}

void GridSpec::unflatten(std::size_t flat_index, std::span<int> idx) const {
    for (int a = axes() - 1; a >= 0; --a) {
        const auto p = static_cast<std::size_t>(points(a));
        idx[a] = static_cast<int>(flat_index % p);
        flat_index /= p;
    }
}

GroupPoint GridSpec::point(std::span<const int> idx) const {
    std::array<double, kMaxAxes> c{};
    for (int a = 0; a < axes(); ++a) c[a] = coord(a, idx[a]);
    return GroupPoint::from_coords(std::span<const double>(c.data(), static_cast<std::size_t>(axes())));
}

void GridSpec::node_coords(std::size_t flat_index, std::span<double> out) const {
    std::array<int, kMaxAxes> idx{};
    unflatten(flat_index, std::span<int>(idx.data(), static_cast<std::size_t>(axes())));
    for (int a = 0; a < axes(); ++a) out[a] = coord(a, idx[a]);
}

bool IndexBox::empty() const {
    if (lo.empty()) return true;
    for (std::size_t a = 0; a < lo.size(); ++a)
        if (lo[a] > hi[a]) return true;
    return false;
}

// ---------------------------------------------------------------- SampledFunction

SampledFunction::SampledFunction(GridSpec grid) : grid_(grid) {
    grid_.validate();
    values_.assign(grid_.size(), 0.0);
}

SampledFunction::SampledFunction(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.size()) throw Error("SampledFunction: value count does not match grid");
}

SampledFunction SampledFunction::sample(const GridSpec& grid,
                                        const std::function<double(const GroupPoint&)>& fn) {
    SampledFunction f(grid);
    const int A = grid.axes();
    std::array<double, kMaxAxes> c{};
    for (std::size_t i = 0; i < f.size(); ++i) {
        grid.node_coords(i, std::span<double>(c.data(), static_cast<std::size_t>(A)));
        f.values_[i] = fn(GroupPoint::from_coords(std::span<const double>(c.data(), static_cast<std::size_t>(A))));
    }
    return f;
}

IndexBox SampledFunction::support() const {
    const int A = grid_.axes();
    IndexBox box;
    box.lo.assign(A, std::numeric_limits<int>::max());
    box.hi.assign(A, -1);
    std::array<int, kMaxAxes> idx{};
    const auto pt = static_cast<std::size_t>(grid_.points_t);
    for (std::size_t col = 0; col < grid_.columns(); ++col) {
        const double* v = values_.data() + col * pt;
        int tlo = -1, thi = -1;
        for (std::size_t t = 0; t < pt; ++t)
            if (v[t] != 0.0) {
                if (tlo < 0) tlo = static_cast<int>(t);
                thi = static_cast<int>(t);
            }
        if (tlo < 0) continue;
        grid_.unflatten(col * pt, std::span<int>(idx.data(), static_cast<std::size_t>(A)));
        for (int a = 0; a < A - 1; ++a) {
            box.lo[a] = std::min(box.lo[a], idx[a]);
            box.hi[a] = std::max(box.hi[a], idx[a]);
        }
        box.lo[A - 1] = std::min(box.lo[A - 1], tlo);
        box.hi[A - 1] = std::max(box.hi[A - 1], thi);
    }
    return box;
}

bool SampledFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double SampledFunction::interpolate(std::span<const double> c) const {
    const int D = 2 * grid_.n;
    const double Lz = grid_.half_width_z, hz = grid_.h_z();
    const double Lt = grid_.half_width_t, ht = grid_.h_t();
    const int Pz = grid_.points_z, Pt = grid_.points_t;
    std::array<int, kMaxAxes> i0{};
    std::array<double, kMaxAxes> fr{};
    for (int d = 0; d < D; ++d) {
        const double s = (c[d] + Lz) / hz - 0.5;
        const double fl = std::floor(s);
        if (fl < -1.0 || fl > Pz - 1) return 0.0;
        i0[d] = static_cast<int>(fl);
        fr[d] = s - fl;
    }
    const double st = (c[D] + Lt) / ht - 0.5;
    const double flt = std::floor(st);
    if (flt < -1.0 || flt > Pt - 1) return 0.0;
    const int it0 = static_cast<int>(flt);
    const double ft = st - flt;

    double g0 = 0.0, g1 = 0.0;
    const bool has0 = it0 >= 0, has1 = it0 + 1 <= Pt - 1;
    const int corners = 1 << D;
    for (int cn = 0; cn < corners; ++cn) {
        double w = 1.0;
        std::size_t col = 0;
        bool inside = true;
        for (int d = 0; d < D; ++d) {
            const int bit = (cn >> (D - 1 - d)) & 1;
            const int id = i0[d] + bit;
            if (id < 0 || id >= Pz) {
                inside = false;
                break;
            }
            w *= bit ? fr[d] : (1.0 - fr[d]);
            col = col * static_cast<std::size_t>(Pz) + static_cast<std::size_t>(id);
        }
        if (!inside) continue;
        const double* v = values_.data() + col * static_cast<std::size_t>(Pt);
        if (has0) g0 += w * v[it0];
        if (has1) g1 += w * v[it0 + 1];
    }
    double val = 0.0;
    if (has0) val += (1.0 - ft) * g0;
    if (has1) val += ft * g1;
    return val;
}

double SampledFunction::interpolate(const GroupPoint& g) const {
    const auto c = g.coords();
    return interpolate(std::span<const double>(c));
}

SampledFunction& SampledFunction::operator+=(const SampledFunction& o) {
    if (!(grid_ == o.grid_)) throw Error("SampledFunction: grid mismatch in +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

SampledFunction& SampledFunction::operator-=(const SampledFunction& o) {
    if (!(grid_ == o.grid_)) throw Error("SampledFunction: grid mismatch in -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

SampledFunction& SampledFunction::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

Sampled1DFunction::Sampled1DFunction(double h_, int half_) : h(h_), half(half_), values(2 * half_ + 1, 0.0) {
    if (!(h_ > 0.0) || half_ < 0) throw Error("Sampled1DFunction: invalid spacing or length");
}

double Sampled1DFunction::integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * h;
}

// ---------------------------------------------------------------- norms

double integrate(const SampledFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell_volume();
}

double l2_norm(const SampledFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.grid().cell_volume());
}

double lp_norm(const SampledFunction& f, double p) {
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double sup_norm(const SampledFunction& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double inner(const SampledFunction& f, const SampledFunction& g) {
    if (!(f.grid() == g.grid())) throw Error("inner: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s * f.grid().cell_volume();
}

double relative_l2(const SampledFunction& a, const SampledFunction& b) {
    const double nb = l2_norm(b);
    return l2_norm(a - b) / nb;
}

// ---------------------------------------------------------------- group sums

namespace {

// out(x) = weight * sum_{y in nodes(F)} F(y) * G(w(x, y)), lexicographic in y.
// sigma = +1: w = y^{-1} x.   sigma = -1: w = x y^{-1}.
// Every term skipped by the pruning has an interpolated G value of exactly zero,
// so the result is bit-identical to the unpruned sum.
SampledFunction group_sum(const SampledFunction& F, const SampledFunction& G, const GridSpec& O, int sigma,
                          double weight) {
    const GridSpec& gf = F.grid();
    const GridSpec& gg = G.grid();
    O.validate();
    if (gf.n != gg.n || gf.n != O.n) throw Error("convolve: dimension mismatch");
    const int n = gf.n, D = 2 * n;
    SampledFunction out(O);
    const IndexBox fs = F.support();
    const IndexBox gs = G.support();
    if (fs.empty() || gs.empty()) return out;

    const int PzF = gf.points_z, PtF = gf.points_t, PzG = gg.points_z, PtG = gg.points_t;
    const int PzO = O.points_z, PtO = O.points_t;
    const double hzF = gf.h_z(), htF = gf.h_t(), hzG = gg.h_z(), htG = gg.h_t(), htO = O.h_t();
    const double LzG = gg.half_width_z, LtG = gg.half_width_t;

    std::vector<double> cF_z(PzF), cF_t(PtF), cO_z(PzO), cO_t(PtO);
    for (int i = 0; i < PzF; ++i) cF_z[i] = gf.coord_z(i);
    for (int i = 0; i < PtF; ++i) cF_t[i] = gf.coord_t(i);
    for (int i = 0; i < PzO; ++i) cO_z[i] = O.coord_z(i);
    for (int i = 0; i < PtO; ++i) cO_t[i] = O.coord_t(i);

    // Open intervals where G's interpolant can be nonzero.
    std::array<double, kMaxAxes> gz_lo{}, gz_hi{};
    for (int d = 0; d < D; ++d) {
        gz_lo[d] = gg.coord_z(gs.lo[d]) - hzG;
        gz_hi[d] = gg.coord_z(gs.hi[d]) + hzG;
    }
    const double gt_lo = gg.coord_t(gs.lo[D]) - htG;
    const double gt_hi = gg.coord_t(gs.hi[D]) + htG;
    const int gtlo = gs.lo[D], gthi = gs.hi[D];

    auto f_index_range = [](double lo_c, double hi_c, double L, double h, int lo_clamp, int hi_clamp) {
        int lo = static_cast<int>(std::floor((lo_c + L) / h - 0.5)) - 1;
        int hi = static_cast<int>(std::ceil((hi_c + L) / h - 0.5)) + 1;
        return std::pair<int, int>{std::max(lo, lo_clamp), std::min(hi, hi_clamp)};
    };

    const auto ncolO = static_cast<std::ptrdiff_t>(O.columns());
    const double* Fv = F.values().data();
    const double* Gv = G.values().data();
    double* Ov = out.values().data();
    const int corners = 1 << D;

#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t colO = 0; colO < ncolO; ++colO) {
        std::array<int, kMaxAxes> xi{};
        {
            std::size_t rem = static_cast<std::size_t>(colO);
            for (int d = D - 1; d >= 0; --d) {
                xi[d] = static_cast<int>(rem % static_cast<std::size_t>(PzO));
                rem /= static_cast<std::size_t>(PzO);
            }
        }
        std::array<double, kMaxAxes> xz{};
        for (int d = 0; d < D; ++d) xz[d] = cO_z[xi[d]];

        // y_z index box for this column.
        std::array<int, kMaxAxes> ylo{}, yhi{};
        bool empty = false;
        for (int d = 0; d < D; ++d) {
            auto [lo, hi] = f_index_range(xz[d] - gz_hi[d], xz[d] - gz_lo[d], gf.half_width_z, hzF, fs.lo[d], fs.hi[d]);
            ylo[d] = lo;
            yhi[d] = hi;
            if (lo > hi) empty = true;
        }
        if (empty) continue;

        std::vector<double> acc(static_cast<std::size_t>(PtO), 0.0);
        std::vector<double> gcol(static_cast<std::size_t>(PtG), 0.0);
        bool touched = false;

        std::array<int, kMaxAxes> yi = ylo;
        for (;;) {
            // w_z = x_z - y_z and the shear s.
            std::array<double, kMaxAxes> yz{};
            for (int d = 0; d < D; ++d) yz[d] = cF_z[yi[d]];
            std::array<int, kMaxAxes> i0{};
            std::array<double, kMaxAxes> fr{};
            bool zero = false;
            for (int d = 0; d < D; ++d) {
                const double wz = sigma > 0 ? (-yz[d] + xz[d]) : (xz[d] + (-yz[d]));
                const double s = (wz + LzG) / hzG - 0.5;
                const double fl = std::floor(s);
                if (fl < -1.0 || fl > PzG - 1) {
                    zero = true;
                    break;
                }
                i0[d] = static_cast<int>(fl);
                fr[d] = s - fl;
            }
            double shear = 0.0;
            for (int i = 0; i < n; ++i) {
                if (sigma > 0)
                    shear += (-yz[n + i]) * xz[i] - (-yz[i]) * xz[n + i];
                else
                    shear += xz[n + i] * (-yz[i]) - xz[i] * (-yz[n + i]);
            }
            const double two_s = 2.0 * shear;
            std::size_t fcol = 0;
            for (int d = 0; d < D; ++d) fcol = fcol * static_cast<std::size_t>(PzF) + static_cast<std::size_t>(yi[d]);
            const double* fcolv = Fv + fcol * static_cast<std::size_t>(PtF);

            if (!zero) {
                // z-interpolated column of G over its t-support.
                bool any = false;
                for (int t = gtlo; t <= gthi; ++t) gcol[t] = 0.0;
                for (int cn = 0; cn < corners; ++cn) {
                    double w = 1.0;
                    std::size_t col = 0;
                    bool inside = true;
                    for (int d = 0; d < D; ++d) {
                        const int bit = (cn >> (D - 1 - d)) & 1;
                        const int id = i0[d] + bit;
                        if (id < 0 || id >= PzG) {
                            inside = false;
                            break;
                        }
                        w *= bit ? fr[d] : (1.0 - fr[d]);
                        col = col * static_cast<std::size_t>(PzG) + static_cast<std::size_t>(id);
                    }
                    if (!inside) continue;
                    any = true;
                    const double* v = Gv + col * static_cast<std::size_t>(PtG);
                    for (int t = gtlo; t <= gthi; ++t) gcol[t] += w * v[t];
                }
                if (any) {
                    // x_t range for which some y_t in F's t-support lands in G's t-window:
                    // w_t = (x_t - y_t) + 2s in (gt_lo, gt_hi).
                    const double xt_min = cF_t[fs.lo[D]] - two_s + gt_lo;
                    const double xt_max = cF_t[fs.hi[D]] - two_s + gt_hi;
                    auto [xlo, xhi] = f_index_range(xt_min, xt_max, O.half_width_t, htO, 0, PtO - 1);
                    for (int xt = xlo; xt <= xhi; ++xt) {
                        const double xtc = cO_t[xt];
                        auto [tlo, thi] = f_index_range(xtc + two_s - gt_hi, xtc + two_s - gt_lo, gf.half_width_t,
                                                        htF, fs.lo[D], fs.hi[D]);
                        double a = acc[xt];
                        for (int yt = tlo; yt <= thi; ++yt) {
                            const double wt = sigma > 0 ? (-cF_t[yt] + xtc) + two_s : (xtc + (-cF_t[yt])) + two_s;
                            const double st = (wt + LtG) / htG - 0.5;
                            const double flt = std::floor(st);
                            if (flt < -1.0 || flt > PtG - 1) continue;
                            const int it0 = static_cast<int>(flt);
                            const double ft = st - flt;
                            double val = 0.0;
                            if (it0 >= gtlo && it0 <= gthi) val += (1.0 - ft) * gcol[it0];
                            if (it0 + 1 >= gtlo && it0 + 1 <= gthi) val += ft * gcol[it0 + 1];
                            a += fcolv[yt] * val;
                        }
                        acc[xt] = a;
                        touched = true;
                    }
                }
            }
            // Next y_z, lexicographic.
            int d = D - 1;
            while (d >= 0 && yi[d] == yhi[d]) {
                yi[d] = ylo[d];
                --d;
            }
            if (d < 0) break;
            ++yi[d];
        }
        if (!touched) continue;
        double* o = Ov + static_cast<std::size_t>(colO) * static_cast<std::size_t>(PtO);
        for (int t = 0; t < PtO; ++t) o[t] = acc[t] * weight;
    }
    return out;
}

}  // namespace

SampledFunction convolve(const SampledFunction& f, const SampledFunction& g) {
    if (!(f.grid() == g.grid())) throw Error("convolve: operands live on different grids");
    return group_sum(f, g, f.grid(), +1, f.grid().cell_volume());
}

SampledFunction convolve_mixed(const SampledFunction& f, const SampledFunction& g, const GridSpec& out) {
    return group_sum(f, g, out, +1, f.grid().cell_volume());
}

SampledFunction convolve_over_second(const SampledFunction& f, const SampledFunction& g, const GridSpec& out) {
    return group_sum(g, f, out, -1, g.grid().cell_volume());
}

SampledFunction translate_sum(const SampledFunction& W, const SampledFunction& g, const GridSpec& out) {
    return group_sum(W, g, out, -1, 1.0);
}

// ---------------------------------------------------------------- t-convolution

namespace {

void check_t_spacing(const GridSpec& g, const Sampled1DFunction& w) {
    if (std::abs(w.h - g.h_t()) > 1e-12 * g.h_t())
        throw Error("partial_convolve_t: kernel spacing " + std::to_string(w.h) + " does not match grid h_t " +
                    std::to_string(g.h_t()));
}

void convolve_column(const double* f, double* out, int Pt, const Sampled1DFunction& w) {
    int flo = -1, fhi = -1;
    for (int t = 0; t < Pt; ++t)
        if (f[t] != 0.0) {
            if (flo < 0) flo = t;
            fhi = t;
        }
    if (flo < 0) return;
    for (int i = 0; i < Pt; ++i) {
        const int lo = std::max(flo, i - w.half), hi = std::min(fhi, i + w.half);
        double acc = 0.0;
        for (int l = lo; l <= hi; ++l) acc += f[l] * w.values[static_cast<std::size_t>(i - l + w.half)];
        out[i] = acc * w.h;
    }
}

}  // namespace

SampledFunction partial_convolve_t(const SampledFunction& f, const Sampled1DFunction& w) {
    check_t_spacing(f.grid(), w);
    SampledFunction out(f.grid());
    const int Pt = f.grid().points_t;
    const auto ncol = static_cast<std::ptrdiff_t>(f.grid().columns());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < ncol; ++c) {
        const auto off = static_cast<std::size_t>(c) * static_cast<std::size_t>(Pt);
        convolve_column(f.values().data() + off, out.values().data() + off, Pt, w);
    }
    return out;
}

SampledFunction partial_convolve_t(const SampledFunction& f, const Sampled1DFunction& w,
                                   std::span<const std::size_t> columns) {
    check_t_spacing(f.grid(), w);
    SampledFunction out(f.grid());
    const int Pt = f.grid().points_t;
    const auto nc = static_cast<std::ptrdiff_t>(columns.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < nc; ++i) {
        const auto off = columns[static_cast<std::size_t>(i)] * static_cast<std::size_t>(Pt);
        convolve_column(f.values().data() + off, out.values().data() + off, Pt, w);
    }
    return out;
}

Sampled1DFunction convolve_1d(const Sampled1DFunction& a, const Sampled1DFunction& b) {
    if (std::abs(a.h - b.h) > 1e-12 * a.h) throw Error("convolve_1d: spacing mismatch");
    Sampled1DFunction r(a.h, a.half + b.half);
    for (int m = -r.half; m <= r.half; ++m) {
        double acc = 0.0;
        for (int l = std::max(-a.half, m - b.half); l <= std::min(a.half, m + b.half); ++l) acc += a.at(l) * b.at(m - l);
        r.values[static_cast<std::size_t>(m + r.half)] = acc * a.h;
    }
    return r;
}

// ---------------------------------------------------------------- resampling

SampledFunction reflect(const SampledFunction& f, bool /*conjugate*/) {
    // Negation of every coordinate reverses the row-major order exactly.
    std::vector<double> v(f.values().rbegin(), f.values().rend());
    return SampledFunction(f.grid(), std::move(v));
}

namespace {

template <class Map>
SampledFunction resample_with(const SampledFunction& f, const GridSpec& target, double scale, Map&& map) {
    SampledFunction out(target);
    const int A = target.axes();
    const auto N = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < N; ++i) {
        std::array<double, kMaxAxes> c{};
        target.node_coords(static_cast<std::size_t>(i), std::span<double>(c.data(), static_cast<std::size_t>(A)));
        map(c);
        out[static_cast<std::size_t>(i)] = scale * f.interpolate(std::span<const double>(c.data(), static_cast<std::size_t>(A)));
    }
    return out;
}

}  // namespace

SampledFunction dilate_function(double r, const SampledFunction& f) {
    if (!(r > 0.0)) throw Error("dilate_function: r must be positive");
    if (r == 1.0) return f;
    const int n = f.grid().n;
    const double scale = std::pow(r, 2 * n + 2);
    return resample_with(f, f.grid(), scale, [r, n](std::array<double, kMaxAxes>& c) {
        for (int d = 0; d < 2 * n; ++d) c[d] *= r;
        c[2 * n] *= r * r;
    });
}

SampledFunction left_translate(const GroupPoint& h, const SampledFunction& f) {
    const int n = f.grid().n;
    if (h.n() != n) throw Error("left_translate: dimension mismatch");
    const auto hc = h.coords();
    return resample_with(f, f.grid(), 1.0, [&hc, n](std::array<double, kMaxAxes>& c) {
        const double tw = twist(n, hc.data(), c.data());
        for (int d = 0; d < 2 * n; ++d) c[d] += hc[d];
        c[2 * n] += hc[2 * n] + tw;
    });
}

SampledFunction resample(const SampledFunction& f, const GridSpec& target) {
    if (f.grid() == target) return f;
    return resample_with(f, target, 1.0, [](std::array<double, kMaxAxes>&) {});
}

// ---------------------------------------------------------------- vector fields

SampledFunction partial_derivative(int axis, const SampledFunction& f) {
    const GridSpec& g = f.grid();
    const int A = g.axes();
    if (axis < 0 || axis >= A) throw Error("partial_derivative: axis out of range");
    for (int a = 0; a < A; ++a)
        if (g.points(a) < 3) throw Error("vector_field: grid needs at least 3 points per axis");
    std::size_t stride = 1;
    for (int a = A - 1; a > axis; --a) stride *= static_cast<std::size_t>(g.points(a));
    const int P = g.points(axis);
    const double h = g.spacing(axis);
    SampledFunction out(g);
    std::array<int, kMaxAxes> idx{};
    for (std::size_t i = 0; i < f.size(); ++i) {
        g.unflatten(i, std::span<int>(idx.data(), static_cast<std::size_t>(A)));
        const int k = idx[axis];
        double d;
        if (k == 0)
            d = (-3.0 * f[i] + 4.0 * f[i + stride] - f[i + 2 * stride]) / (2.0 * h);
        else if (k == P - 1)
            d = (3.0 * f[i] - 4.0 * f[i - stride] + f[i - 2 * stride]) / (2.0 * h);
        else
            d = (f[i + stride] - f[i - stride]) / (2.0 * h);
        out[i] = d;
    }
    return out;
}

SampledFunction vector_field(int j, const SampledFunction& f, FieldVariant variant) {
    const GridSpec& g = f.grid();
    const int n = g.n;
    if (j < 1 || j > 2 * n + 1) throw Error("vector_field: index must be in 1..2n+1");
    const int axis = j - 1;
    SampledFunction d = partial_derivative(axis, f);
    if (axis == 2 * n) return d;
    const SampledFunction dt = partial_derivative(2 * n, f);
    // left: X_j = dx + 2y dt, Y_j = dy - 2x dt; right flips the drift.
    const double sign = variant == FieldVariant::left ? 1.0 : -1.0;
    const int partner = axis < n ? axis + n : axis - n;
    const double coef_sign = axis < n ? 2.0 * sign : -2.0 * sign;
    std::array<double, kMaxAxes> c{};
    const auto A = static_cast<std::size_t>(g.axes());
    for (std::size_t i = 0; i < f.size(); ++i) {
        g.node_coords(i, std::span<double>(c.data(), A));
        d[i] += coef_sign * c[partner] * dt[i];
    }
    return d;
}

SampledFunction apply_multi_index(const MultiIndex& I, const SampledFunction& f, FieldVariant variant) {
    if (I.n() != f.grid().n) throw Error("apply_multi_index: dimension mismatch");
    SampledFunction r = f;
    const auto& e = I.entries();
    for (int j = static_cast<int>(e.size()); j >= 1; --j)
        for (int rep = 0; rep < e[static_cast<std::size_t>(j - 1)]; ++rep) r = vector_field(j, r, variant);
    return r;
}

// ---------------------------------------------------------------- serialization

namespace {

constexpr char kMagic[8] = {'F', 'L', 'A', 'G', 'W', 'A', 'V', '1'};

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    os.write(reinterpret_cast<const char*>(&u), 8);
}

template <class T>
T get_le(std::istream& is) {
    std::uint64_t u = 0;
    is.read(reinterpret_cast<char*>(&u), 8);
    if (!is) throw Error("load: truncated file");
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    T v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

void save(const SampledFunction& f, const std::string& base, const std::string& extra_json) {
    const GridSpec& g = f.grid();
    {
        std::ofstream os(base + ".bin", std::ios::binary);
        if (!os) throw Error("save: cannot open " + base + ".bin");
        os.write(kMagic, 8);
        put_le<std::int64_t>(os, g.n);
        put_le<std::int64_t>(os, g.points_z);
        put_le<std::int64_t>(os, g.points_t);
        put_le<double>(os, g.half_width_z);
        put_le<double>(os, g.half_width_t);
        for (double v : f.values()) put_le<double>(os, v);
    }
    nlohmann::ordered_json j;
    j["format"] = "flagwave-sampled-function";
    j["version"] = 1;
    j["n"] = g.n;
    j["points_z"] = g.points_z;
    j["points_t"] = g.points_t;
    j["half_width_z"] = g.half_width_z;
    j["half_width_t"] = g.half_width_t;
    j["cell_volume"] = g.cell_volume();
    j["count"] = f.size();
    j["byte_order"] = "little";
    j["meta"] = nlohmann::json::parse(extra_json);
    std::ofstream js(base + ".json");
    js << j.dump(2) << '\n';
}

SampledFunction load(const std::string& base) {
    std::ifstream is(base + ".bin", std::ios::binary);
    if (!is) throw Error("load: cannot open " + base + ".bin");
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) throw Error("load: bad magic in " + base + ".bin");
    GridSpec g;
    g.n = static_cast<int>(get_le<std::int64_t>(is));
    g.points_z = static_cast<int>(get_le<std::int64_t>(is));
    g.points_t = static_cast<int>(get_le<std::int64_t>(is));
    g.half_width_z = get_le<double>(is);
    g.half_width_t = get_le<double>(is);
    g.validate();
    std::vector<double> v(g.size());
    for (double& x : v) x = get_le<double>(is);
    return SampledFunction(g, std::move(v));
}

}  // namespace flagwave
