#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "flagwave/grid.hpp"

namespace flagwave {

enum class RegionKind { cube, vertical, sampling };
enum class AnchorPolicy { center, corner };

// Axis-aligned region of the origin-aligned lattice: axis a covers [lo[a], hi[a]).
// Cubes and vertical rectangles are clipped to the box; sampling rectangles are not.
struct Region {
    RegionKind kind = RegionKind::cube;
    int j = 0;
    int k = 0;
    int N = 0;
    std::vector<long> index;  // lattice index per axis
    std::vector<double> lo;
    std::vector<double> hi;

    [[nodiscard]] double measure() const;
    [[nodiscard]] std::vector<double> center() const;
    [[nodiscard]] bool contains(std::span<const double> coords) const;
};

// Q(j): z-side 2^-j, t-side 4^-j.
std::vector<Region> cubes_at_scale(int j, const GridSpec& grid);
// R(j,k), k < j: z-side 2^-j, t-side 4^-k.
std::vector<Region> vertical_rectangles(int j, int k, const GridSpec& grid);

// Side lengths of the sampling rectangles I x J at (j, k, N).
double sampling_side_z(int j, int N);
double sampling_side_t(int j, int k, int N);
// Streams every sampling rectangle whose centre lies in the box, in lexicographic index order.
void for_each_sampling_rectangle(int j, int k, int N, const GridSpec& grid,
                                 const std::function<void(const Region&)>& fn);
std::vector<Region> sampling_rectangles(int j, int k, int N, const GridSpec& grid);

// Valid j-range for cube scales on a grid: 2 h_z <= 2^-j <= 2 L_z.
std::pair<int, int> resolvable_range(const GridSpec& grid);

// Flat index of the grid node used as the region's anchor. `center` snaps the centre to the
// nearest node; `corner` snaps the point half a cell (or half a side) inside the lower corner.
std::size_t anchor_index(const Region& r, const GridSpec& grid, AnchorPolicy policy = AnchorPolicy::center);
GroupPoint anchor(const Region& r, const GridSpec& grid, AnchorPolicy policy = AnchorPolicy::center);

// Sampling rectangles aggregated by anchor node: weight = sum of |R| over rectangles sharing it.
struct SamplingPattern {
    int j = 0;
    int k = 0;
    int N = 0;
    std::size_t rectangles = 0;
    std::vector<std::size_t> nodes;  // ascending
    std::vector<double> weights;
};
SamplingPattern sampling_pattern(int j, int k, int N, const GridSpec& grid,
                                 AnchorPolicy policy = AnchorPolicy::center);

// Per-node anchor of the enclosing lattice cell with sides (sz, st); used to paint indicators.
std::vector<std::size_t> cell_anchor_map(double side_z, double side_t, const GridSpec& grid,
                                         AnchorPolicy policy = AnchorPolicy::center);

// JSON array of {kind, j, k, N, index, corner, sides}.
std::string regions_to_json(const std::vector<Region>& regions);

}  // namespace flagwave
