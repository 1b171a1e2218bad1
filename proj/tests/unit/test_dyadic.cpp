#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <map>
#include <random>

#include "flagwave/dyadic.hpp"

using namespace flagwave;

namespace {
const GridSpec kDefault{1, 4.0, 16.0, 32, 64};
const double kBoxVolume = 8.0 * 8.0 * 32.0;
}  // namespace

TEST_CASE("cube counts and tiling") {
    const std::vector<Region> q0 = cubes_at_scale(0, kDefault);
    CHECK(q0.size() == 2048u);
    for (int j : {-3, -1, 0, 1}) {
        const std::vector<Region> q = cubes_at_scale(j, kDefault);
        double vol = 0.0;
        for (const Region& r : q) vol += r.measure();
        CHECK(vol == doctest::Approx(kBoxVolume).epsilon(1e-12));
        // Every node lies in exactly one cube.
        std::vector<int> hits(kDefault.size(), 0);
        std::vector<double> c(3);
        for (std::size_t i = 0; i < kDefault.size(); i += 7) {
            kDefault.node_coords(i, c);
            for (const Region& r : q) hits[i] += r.contains(c) ? 1 : 0;
            CHECK(hits[i] == 1);
        }
    }
}

TEST_CASE("scale range errors list the valid range") {
    CHECK(resolvable_range(kDefault) == std::pair{-3, 1});
    try {
        (void)cubes_at_scale(2, kDefault);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("[-3, 1]") != std::string::npos);
    }
}

TEST_CASE("vertical rectangles") {
    const std::vector<Region> r = vertical_rectangles(1, 0, kDefault);
    CHECK(r.size() == 16u * 16u * 32u);
    for (const Region& x : r) {
        CHECK(x.hi[2] - x.lo[2] > std::ldexp(1.0, -2 * x.j));
        CHECK(x.hi[0] - x.lo[0] == 0.5);
    }
    double vol = 0.0;
    for (const Region& x : r) vol += x.measure();
    CHECK(vol == doctest::Approx(kBoxVolume).epsilon(1e-12));
    CHECK_THROWS_AS(vertical_rectangles(1, 1, kDefault), Error);
    CHECK_THROWS_AS(vertical_rectangles(0, 1, kDefault), Error);
}

TEST_CASE("anchors are inside, deterministic and order independent") {
    std::vector<Region> q = cubes_at_scale(0, kDefault);
    std::vector<std::size_t> a;
    std::vector<double> c(3);
    for (const Region& r : q) {
        const std::size_t i = anchor_index(r, kDefault);
        CHECK(i == anchor_index(r, kDefault));
        kDefault.node_coords(i, c);
        CHECK(r.contains(c));
        const std::size_t ic = anchor_index(r, kDefault, AnchorPolicy::corner);
        kDefault.node_coords(ic, c);
        CHECK(r.contains(c));
        a.push_back(i);
    }
    std::vector<std::size_t> perm(q.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::mt19937_64 gen(11);
    std::shuffle(perm.begin(), perm.end(), gen);
    for (std::size_t i : perm) CHECK(anchor_index(q[i], kDefault) == a[i]);
    // Unit cube [0,1)^2 x [0,1): centre (0.5, 0.5, 0.5) snaps to a node of the cell.
    const GroupPoint g = anchor(q[4 * 8 * 32 + 4 * 32 + 16], kDefault);
    CHECK(std::abs(g.x[0] - 0.5) <= 0.125 + 1e-12);
    CHECK(std::abs(g.t - 0.5) <= 0.25 + 1e-12);
}

TEST_CASE("sampling rectangles: measure and aggregated pattern") {
    const GridSpec g{1, 2.0, 4.0, 16, 32};
    for (auto [j, k, N] : {std::tuple{0, 0, 0}, std::tuple{1, -1, 1}, std::tuple{0, 1, 3}}) {
        const double lI = std::ldexp(1.0, -j - N), lJ = std::ldexp(1.0, -j - N) + std::ldexp(1.0, -k - N);
        std::map<std::size_t, double> brute;
        std::size_t count = 0;
        for_each_sampling_rectangle(j, k, N, g, [&](const Region& r) {
            CHECK(r.measure() == lI * lI * lJ);
            const std::vector<double> c = r.center();
            for (int ax = 0; ax < 3; ++ax) {
                CHECK(c[ax] >= -g.half_width(ax));
                CHECK(c[ax] < g.half_width(ax));
            }
            brute[anchor_index(r, g)] += r.measure();
            ++count;
        });
        const SamplingPattern p = sampling_pattern(j, k, N, g);
        CHECK(p.rectangles == count);
        REQUIRE(p.nodes.size() == brute.size());
        std::size_t q = 0;
        for (const auto& [node, w] : brute) {
            CHECK(p.nodes[q] == node);
            CHECK(p.weights[q] == doctest::Approx(w).epsilon(1e-12));
            ++q;
        }
    }
}

TEST_CASE("cell anchor map agrees with region anchors") {
    const std::vector<Region> q = cubes_at_scale(0, kDefault);
    const std::vector<std::size_t> m = cell_anchor_map(1.0, 1.0, kDefault);
    std::vector<double> c(3);
    for (const Region& r : q) {
        const std::size_t a = anchor_index(r, kDefault);
        kDefault.node_coords(a, c);
        CHECK(m[a] == a);
    }
}

TEST_CASE("region JSON export") {
    const std::vector<Region> q = cubes_at_scale(-3, kDefault);
    const nlohmann::json j = nlohmann::json::parse(regions_to_json(q));
    REQUIRE(j.size() == q.size());
    CHECK(j[0]["kind"] == "cube");
    // Origin-aligned side-8 cells clip to [-4,0) and [0,4).
    CHECK(j[0]["sides"][0] == 4.0);
}
