#include "flagwave/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>

namespace flagwave {

namespace {

struct AxisCells {
    std::vector<long> index;
    std::vector<double> lo, hi;
};

// Lattice cells of width `side` meeting [-L, L), clipped when `clip`, else all cells with
// centre in [-L, L) at full width.
AxisCells axis_cells(double side, double L, bool clip) {
    AxisCells a;
    long m0, m1;
    if (clip) {
        m0 = static_cast<long>(std::floor(-L / side));
        m1 = static_cast<long>(std::ceil(L / side)) - 1;
    } else {
        m0 = static_cast<long>(std::ceil(-L / side - 0.5));
        m1 = static_cast<long>(std::ceil(L / side - 0.5)) - 1;
    }
    for (long m = m0; m <= m1; ++m) {
        double lo = m * side, hi = (m + 1) * side;
        if (clip) {
            lo = std::max(lo, -L);
            hi = std::min(hi, L);
            if (!(hi > lo)) continue;
        }
        a.index.push_back(m);
        a.lo.push_back(lo);
        a.hi.push_back(hi);
    }
    return a;
}

void check_scale(int j, const GridSpec& grid) {
    const auto [jlo, jhi] = resolvable_range(grid);
    if (j < jlo || j > jhi)
        throw Error("scale j=" + std::to_string(j) + " not resolvable on this grid; valid j-range is [" +
                    std::to_string(jlo) + ", " + std::to_string(jhi) + "]");
}

// Cartesian product over 2n+1 axes, t fastest.
void product(const std::vector<AxisCells>& axes, Region proto, const std::function<void(const Region&)>& fn) {
    const int A = static_cast<int>(axes.size());
    for (const AxisCells& a : axes)
        if (a.index.empty()) return;
    std::vector<std::size_t> pos(A, 0);
    proto.index.assign(A, 0);
    proto.lo.assign(A, 0.0);
    proto.hi.assign(A, 0.0);
    while (true) {
        for (int ax = 0; ax < A; ++ax) {
            proto.index[ax] = axes[ax].index[pos[ax]];
            proto.lo[ax] = axes[ax].lo[pos[ax]];
            proto.hi[ax] = axes[ax].hi[pos[ax]];
        }
        fn(proto);
        int ax = A - 1;
        while (ax >= 0 && ++pos[ax] == axes[ax].index.size()) pos[ax--] = 0;
        if (ax < 0) return;
    }
}

std::vector<Region> tiling(RegionKind kind, int j, int k, double sz, double st, const GridSpec& grid) {
    std::vector<AxisCells> axes;
    for (int ax = 0; ax < grid.axes(); ++ax)
        axes.push_back(axis_cells(ax < 2 * grid.n ? sz : st, grid.half_width(ax), true));
    std::vector<Region> out;
    Region proto;
    proto.kind = kind;
    proto.j = j;
    proto.k = k;
    product(axes, proto, [&](const Region& r) { out.push_back(r); });
    return out;
}

int anchor_axis_index(double lo, double hi, int axis, const GridSpec& grid, AnchorPolicy policy) {
    const double c = policy == AnchorPolicy::center ? 0.5 * (lo + hi)
                                                    : lo + std::min(0.5 * grid.spacing(axis), 0.5 * (hi - lo));
    return grid.nearest(axis, c);
}

}  // namespace

double Region::measure() const {
    double m = 1.0;
    for (std::size_t a = 0; a < lo.size(); ++a) m *= hi[a] - lo[a];
    return m;
}

std::vector<double> Region::center() const {
    std::vector<double> c(lo.size());
    for (std::size_t a = 0; a < lo.size(); ++a) c[a] = 0.5 * (lo[a] + hi[a]);
    return c;
}

bool Region::contains(std::span<const double> coords) const {
    for (std::size_t a = 0; a < lo.size(); ++a)
        if (coords[a] < lo[a] || coords[a] >= hi[a]) return false;
    return true;
}

std::pair<int, int> resolvable_range(const GridSpec& grid) {
    // 2^-j >= 2 h_z and 2^-j <= 2 L_z.
    const int jhi = static_cast<int>(std::floor(-std::log2(2.0 * grid.h_z()) + 1e-12));
    const int jlo = static_cast<int>(std::ceil(-std::log2(2.0 * grid.half_width_z) - 1e-12));
    return {jlo, jhi};
}

std::vector<Region> cubes_at_scale(int j, const GridSpec& grid) {
    check_scale(j, grid);
    return tiling(RegionKind::cube, j, j, std::ldexp(1.0, -j), std::ldexp(1.0, -2 * j), grid);
}

std::vector<Region> vertical_rectangles(int j, int k, const GridSpec& grid) {
    if (k >= j)
        throw Error("vertical rectangle needs k < j (strict verticality); got j=" + std::to_string(j) +
                    ", k=" + std::to_string(k));
    check_scale(j, grid);
    check_scale(k, grid);
    return tiling(RegionKind::vertical, j, k, std::ldexp(1.0, -j), std::ldexp(1.0, -2 * k), grid);
}

double sampling_side_z(int j, int N) { return std::ldexp(1.0, -j - N); }
double sampling_side_t(int j, int k, int N) { return std::ldexp(1.0, -j - N) + std::ldexp(1.0, -k - N); }

void for_each_sampling_rectangle(int j, int k, int N, const GridSpec& grid,
                                 const std::function<void(const Region&)>& fn) {
    if (N < 0) throw Error("sampling rectangles need N >= 0");
    const double sz = sampling_side_z(j, N), st = sampling_side_t(j, k, N);
    std::vector<AxisCells> axes;
    for (int ax = 0; ax < grid.axes(); ++ax)
        axes.push_back(axis_cells(ax < 2 * grid.n ? sz : st, grid.half_width(ax), false));
    Region proto;
    proto.kind = RegionKind::sampling;
    proto.j = j;
    proto.k = k;
    proto.N = N;
    product(axes, proto, fn);
}

std::vector<Region> sampling_rectangles(int j, int k, int N, const GridSpec& grid) {
    std::vector<Region> out;
    for_each_sampling_rectangle(j, k, N, grid, [&](const Region& r) { out.push_back(r); });
    return out;
}

std::size_t anchor_index(const Region& r, const GridSpec& grid, AnchorPolicy policy) {
    std::vector<int> idx(grid.axes());
    for (int ax = 0; ax < grid.axes(); ++ax) idx[ax] = anchor_axis_index(r.lo[ax], r.hi[ax], ax, grid, policy);
    return grid.flat(idx);
}

GroupPoint anchor(const Region& r, const GridSpec& grid, AnchorPolicy policy) {
    std::vector<int> idx(grid.axes());
    grid.unflatten(anchor_index(r, grid, policy), idx);
    return grid.point(idx);
}

SamplingPattern sampling_pattern(int j, int k, int N, const GridSpec& grid, AnchorPolicy policy) {
    // Rectangles are a product over axes, so the node-weight map is a product of per-axis maps.
    const double sz = sampling_side_z(j, N), st = sampling_side_t(j, k, N);
    const int A = grid.axes();
    std::vector<std::map<int, double>> per_axis(A);
    std::size_t count = 1;
    for (int ax = 0; ax < A; ++ax) {
        const double side = ax < 2 * grid.n ? sz : st;
        const AxisCells c = axis_cells(side, grid.half_width(ax), false);
        count *= c.index.size();
        for (std::size_t q = 0; q < c.index.size(); ++q)
            per_axis[ax][anchor_axis_index(c.lo[q], c.hi[q], ax, grid, policy)] += side;
    }
    SamplingPattern p{j, k, N, count, {}, {}};
    if (count == 0) return p;
    std::vector<std::vector<std::pair<int, double>>> lists(A);
    for (int ax = 0; ax < A; ++ax) lists[ax].assign(per_axis[ax].begin(), per_axis[ax].end());
    std::vector<std::size_t> pos(A, 0);
    std::vector<int> idx(A);
    while (true) {
        double w = 1.0;
        for (int ax = 0; ax < A; ++ax) {
            idx[ax] = lists[ax][pos[ax]].first;
            w *= lists[ax][pos[ax]].second;
        }
        p.nodes.push_back(grid.flat(idx));
        p.weights.push_back(w);
        int ax = A - 1;
        while (ax >= 0 && ++pos[ax] == lists[ax].size()) pos[ax--] = 0;
        if (ax < 0) break;
    }
    return p;
}

std::vector<std::size_t> cell_anchor_map(double side_z, double side_t, const GridSpec& grid, AnchorPolicy policy) {
    const int A = grid.axes();
    // Per axis: node index -> anchor node index of the clipped cell containing it.
    std::vector<std::vector<int>> axis_map(A);
    for (int ax = 0; ax < A; ++ax) {
        const double side = ax < 2 * grid.n ? side_z : side_t;
        const double L = grid.half_width(ax);
        axis_map[ax].resize(grid.points(ax));
        for (int i = 0; i < grid.points(ax); ++i) {
            const double c = grid.coord(ax, i);
            const double m = std::floor(c / side);
            const double lo = std::max(m * side, -L), hi = std::min((m + 1) * side, L);
            axis_map[ax][i] = anchor_axis_index(lo, hi, ax, grid, policy);
        }
    }
    std::vector<std::size_t> out(grid.size());
    std::vector<int> idx(A), a(A);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.unflatten(i, idx);
        for (int ax = 0; ax < A; ++ax) a[ax] = axis_map[ax][idx[ax]];
        out[i] = grid.flat(a);
    }
    return out;
}

std::string regions_to_json(const std::vector<Region>& regions) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Region& r : regions) {
        const char* kind = r.kind == RegionKind::cube ? "cube" : r.kind == RegionKind::vertical ? "vertical" : "sampling";
        std::vector<double> sides(r.lo.size());
        for (std::size_t a = 0; a < sides.size(); ++a) sides[a] = r.hi[a] - r.lo[a];
        arr.push_back({{"kind", kind}, {"j", r.j}, {"k", r.k}, {"N", r.N}, {"index", r.index}, {"corner", r.lo},
                       {"sides", sides}});
    }
    return arr.dump();
}

}  // namespace flagwave
