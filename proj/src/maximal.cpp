#include "flagwave/maximal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>

#include "flagwave/flag_transform.hpp"

namespace flagwave {

MaximalScales MaximalScales::dyadic(const GridSpec& g, MaximalGeometry geometry) {
    g.validate();
    MaximalScales s;
    s.geometry = geometry;
    for (int m = -1; std::ldexp(g.h_z(), m) <= g.half_width_z; ++m) s.z_radii.push_back(std::ldexp(g.h_z(), m));
    const double smallest = 0.25 * g.h_z() * g.h_z();
    int b = static_cast<int>(std::floor(std::log2(smallest / g.h_t())));
    while (std::ldexp(g.h_t(), b) < smallest) ++b;
    // Up to L_t, and far enough that the largest ball is one of the rectangles.
    const double top = std::max(g.half_width_t, s.z_radii.back() * s.z_radii.back());
    for (; std::ldexp(g.h_t(), b) <= top; ++b) s.t_halves.push_back(std::ldexp(g.h_t(), b));
    return s;
}

void MaximalScales::validate() const {
    if (z_radii.empty() || t_halves.empty()) throw Error("maximal: empty scale set");
    for (double r : z_radii)
        if (!(r > 0.0) || !std::isfinite(r)) throw Error("maximal: radii must be positive");
    for (double t : t_halves)
        if (!(t > 0.0) || !std::isfinite(t)) throw Error("maximal: t half-lengths must be positive");
}

namespace {

constexpr double kTol = 1e-9;
constexpr int kMaxZ = 8;  // 2n for n <= 4

// |f| with running sums along t: P[c (Pt + 1) + i] = sum_{l < i} |f|(c, l).
struct ColumnSums {
    const GridSpec* g;
    std::vector<double> abs_f;
    std::vector<double> P;

    explicit ColumnSums(const SampledFunction& f) : g(&f.grid()) {
        const int Pt = g->points_t;
        const std::size_t cols = g->columns();
        abs_f.resize(f.size());
        P.assign(cols * static_cast<std::size_t>(Pt + 1), 0.0);
        for (std::size_t c = 0; c < cols; ++c) {
            double acc = 0.0;
            double* row = P.data() + c * static_cast<std::size_t>(Pt + 1);
            for (int i = 0; i < Pt; ++i) {
                const std::size_t k = c * static_cast<std::size_t>(Pt) + static_cast<std::size_t>(i);
                abs_f[k] = std::abs(f[k]);
                acc += abs_f[k];
                row[i + 1] = acc;
            }
        }
    }

    // Sum and count over t-nodes of column c inside [lo_t, hi_t].
    void interval(std::size_t c, double lo_t, double hi_t, double& sum, long& count) const {
        const double t0 = g->coord_t(0), h = g->h_t();
        const int lo = std::max(0, static_cast<int>(std::ceil((lo_t - t0) / h - kTol)));
        const int hi = std::min(g->points_t - 1, static_cast<int>(std::floor((hi_t - t0) / h + kTol)));
        if (lo > hi) return;
        count += hi - lo + 1;
        const std::size_t Pt = static_cast<std::size_t>(g->points_t);
        if (lo == hi) {
            sum += abs_f[c * Pt + static_cast<std::size_t>(lo)];
            return;
        }
        const double* row = P.data() + c * (Pt + 1);
        sum += row[hi + 1] - row[lo];
    }
};

struct Offset {
    std::array<int, kMaxZ> di{};
    double norm = 0.0;  // |w| in z
};

// Integer z-offsets with |w| <= r, sorted by |w|.
std::vector<Offset> offsets_within(const GridSpec& g, double r) {
    const int D = 2 * g.n;
    const int R = static_cast<int>(std::floor(r / g.h_z() + kTol));
    std::vector<Offset> out;
    std::array<int, kMaxZ> d{};
    for (int a = 0; a < D; ++a) d[a] = -R;
    for (;;) {
        double n2 = 0.0;
        for (int a = 0; a < D; ++a) n2 += static_cast<double>(d[a]) * d[a];
        const double w = std::sqrt(n2) * g.h_z();
        if (w <= r * (1.0 + kTol)) out.push_back({d, w});
        int a = D - 1;
        while (a >= 0 && d[a] == R) d[a--] = -R;
        if (a < 0) break;
        ++d[a];
    }
    std::stable_sort(out.begin(), out.end(), [](const Offset& x, const Offset& y) { return x.norm < y.norm; });
    return out;
}

// For every node x and every (radius, tau) pair, the average over the set; the callback receives
// (node, radius index, tau index, average).
template <class Sink>
void sweep(const SampledFunction& f, const std::vector<double>& radii, const std::vector<double>& taus,
           MaximalGeometry geometry, bool diagonal_only, Sink&& sink) {
    const GridSpec& g = f.grid();
    const int n = g.n, D = 2 * n, Pz = g.points_z, Pt = g.points_t;
    const ColumnSums cs(f);
    std::vector<std::vector<Offset>> offs;
    for (double r : radii) offs.push_back(offsets_within(g, r));
    const auto ncol = static_cast<std::ptrdiff_t>(g.columns());

#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t col = 0; col < ncol; ++col) {
        std::array<int, kMaxZ> xi{};
        std::size_t rem = static_cast<std::size_t>(col);
        for (int a = D - 1; a >= 0; --a) {
            xi[a] = static_cast<int>(rem % static_cast<std::size_t>(Pz));
            rem /= static_cast<std::size_t>(Pz);
        }
        double xz[kMaxZ + 1];
        for (int a = 0; a < D; ++a) xz[a] = g.coord_z(xi[a]);
        std::vector<double> sum(taus.size());
        std::vector<long> cnt(taus.size());
        for (int it = 0; it < Pt; ++it) {
            const double tx = g.coord_t(it);
            const std::size_t node = static_cast<std::size_t>(col) * static_cast<std::size_t>(Pt) + static_cast<std::size_t>(it);
            for (std::size_t ir = 0; ir < radii.size(); ++ir) {
                std::fill(sum.begin(), sum.end(), 0.0);
                std::fill(cnt.begin(), cnt.end(), 0L);
                for (const Offset& o : offs[ir]) {
                    std::size_t c = 0;
                    bool inside = true;
                    double w[kMaxZ + 1];
                    for (int a = 0; a < D; ++a) {
                        const int j = xi[a] + o.di[a];
                        if (j < 0 || j >= Pz) {
                            inside = false;
                            break;
                        }
                        c = c * static_cast<std::size_t>(Pz) + static_cast<std::size_t>(j);
                        w[a] = o.di[a] * g.h_z();
                    }
                    if (!inside) continue;
                    // t(x^{-1} y) = t_y - t_x - twist(x, y) and twist(x, y) = twist(x, w).
                    const double shift = geometry == MaximalGeometry::group ? twist(n, xz, w) : 0.0;
                    for (std::size_t ib = 0; ib < taus.size(); ++ib) {
                        if (diagonal_only && ib != ir) continue;
                        cs.interval(c, tx + shift - taus[ib], tx + shift + taus[ib], sum[ib], cnt[ib]);
                    }
                }
                for (std::size_t ib = 0; ib < taus.size(); ++ib) {
                    if (diagonal_only && ib != ir) continue;
                    sink(node, ir, ib, cnt[ib] > 0 ? sum[ib] / static_cast<double>(cnt[ib]) : 0.0);
                }
            }
        }
    }
}

}  // namespace

double set_average(const SampledFunction& f, std::size_t node, double r, double tau, MaximalGeometry geometry) {
    const GridSpec& g = f.grid();
    if (node >= f.size()) throw Error("set_average: node out of range");
    if (!(r > 0.0) || !(tau > 0.0)) throw Error("set_average: set sizes must be positive");
    const int n = g.n, D = 2 * n;
    std::vector<int> idx(static_cast<std::size_t>(g.axes()));
    g.unflatten(node, idx);
    std::vector<double> x(static_cast<std::size_t>(g.axes()));
    g.node_coords(node, x);
    // Direct loop over every node: the oracle the swept version is checked against.
    double sum = 0.0;
    long cnt = 0;
    std::vector<double> y(static_cast<std::size_t>(g.axes()));
    for (std::size_t i = 0; i < f.size(); ++i) {
        g.node_coords(i, y);
        double w[kMaxZ + 1];
        double n2 = 0.0;
        for (int a = 0; a < D; ++a) {
            w[a] = y[a] - x[a];
            n2 += w[a] * w[a];
        }
        if (std::sqrt(n2) > r * (1.0 + kTol)) continue;
        const double shift = geometry == MaximalGeometry::group ? twist(n, x.data(), w) : 0.0;
        if (std::abs(y[D] - x[D] - shift) > tau + kTol * g.h_t()) continue;
        sum += std::abs(f[i]);
        ++cnt;
    }
    return cnt > 0 ? sum / static_cast<double>(cnt) : 0.0;
}

SampledFunction hl_maximal(const SampledFunction& f, const MaximalScales& scales) {
    scales.validate();
    std::vector<double> taus;
    for (double r : scales.z_radii) taus.push_back(r * r);
    SampledFunction out(f.grid());
    sweep(f, scales.z_radii, taus, scales.geometry, true,
          [&](std::size_t node, std::size_t, std::size_t, double avg) { out[node] = std::max(out[node], avg); });
    return out;
}

SampledFunction hl_maximal(const SampledFunction& f) { return hl_maximal(f, MaximalScales::dyadic(f.grid())); }

SampledFunction strong_maximal(const SampledFunction& f, const MaximalScales& scales) {
    scales.validate();
    SampledFunction out(f.grid());
    sweep(f, scales.z_radii, scales.t_halves, scales.geometry, false,
          [&](std::size_t node, std::size_t, std::size_t, double avg) { out[node] = std::max(out[node], avg); });
    return out;
}

SampledFunction strong_maximal(const SampledFunction& f) {
    return strong_maximal(f, MaximalScales::dyadic(f.grid()));
}

std::string MaximalReport::json() const {
    return nlohmann::json{{"p", p},
                          {"r", r},
                          {"family_size", family_size},
                          {"numerator", numerator},
                          {"denominator", denominator},
                          {"ratio", ratio}}
        .dump();
}

void check_fs_exponent(int n, double r, double p) {
    const double lo = 4.0 * n / (4.0 * n + 1.0);
    if (!(r > lo && r < p)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "r=%g violates 4n/(4n+1)<r<p, i.e. %g < r < %g for n=%d", r, lo, p, n);
        throw Error(buf);
    }
}

MaximalReport fs_vector_check(const std::vector<SampledFunction>& family, double p, double r,
                              const MaximalScales& scales) {
    if (family.empty()) throw Error("fs_vector_check: empty family");
    const GridSpec& g = family.front().grid();
    check_hp_exponent(g.n, p);
    check_fs_exponent(g.n, r, p);
    SampledFunction num2(g), den2(g);
    for (const SampledFunction& f : family) {
        if (!(f.grid() == g)) throw Error("fs_vector_check: family members live on different grids");
        SampledFunction fr(g);
        for (std::size_t i = 0; i < f.size(); ++i) {
            fr[i] = std::pow(std::abs(f[i]), r);
            den2[i] += f[i] * f[i];
        }
        const SampledFunction M = strong_maximal(fr, scales);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double v = std::pow(M[i], 1.0 / r);
            num2[i] += v * v;
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        num2[i] = std::sqrt(num2[i]);
        den2[i] = std::sqrt(den2[i]);
    }
    MaximalReport rep;
    rep.p = p;
    rep.r = r;
    rep.family_size = family.size();
    rep.numerator = lp_norm(num2, p);
    rep.denominator = lp_norm(den2, p);
    if (!(rep.denominator > 0.0)) throw Error("fs_vector_check: family vanishes");
    rep.ratio = rep.numerator / rep.denominator;
    return rep;
}

MaximalReport fs_vector_check(const std::vector<SampledFunction>& family, double p, double r) {
    if (family.empty()) throw Error("fs_vector_check: empty family");
    return fs_vector_check(family, p, r, MaximalScales::dyadic(family.front().grid()));
}

}  // namespace flagwave
