#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "flagwave/fields.hpp"
#include "flagwave/flag_transform.hpp"
#include "flagwave/maximal.hpp"

using namespace flagwave;

namespace {

// h_z = h_t = 1/2: h_z^2 / h_t = 1/2, so the ball family sits inside the rectangle family.
const GridSpec kGrid{1, 4.0, 16.0, 16, 64};

SampledFunction field(std::uint64_t seed, double s = 1.0) {
    Rng rng(seed);
    return random_smooth_field(kGrid, rng, s, 2.0, 6.0);
}

double rho_of(const std::vector<double>& c) {
    return std::max(std::hypot(c[0], c[1]), std::sqrt(std::abs(c[2])));
}

SampledFunction unit_ball_indicator(const GridSpec& g) {
    SampledFunction f(g);
    std::vector<double> c(3);
    for (std::size_t i = 0; i < f.size(); ++i) {
        g.node_coords(i, c);
        f[i] = rho_of(c) <= 1.0 ? 1.0 : 0.0;
    }
    return f;
}

bool all_leq(const SampledFunction& a, const SampledFunction& b, double tol = 0.0) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i] + tol) return false;
    return true;
}

}  // namespace

TEST_CASE("dyadic scale sets") {
    const MaximalScales s = MaximalScales::dyadic(kGrid);
    REQUIRE(s.z_radii.size() == 5);
    CHECK(s.z_radii.front() == 0.25);
    CHECK(s.z_radii.back() == 4.0);
    CHECK(s.t_halves.front() == 0.0625);
    CHECK(s.t_halves.back() == 16.0);
    for (double r : s.z_radii) CHECK(std::find(s.t_halves.begin(), s.t_halves.end(), r * r) != s.t_halves.end());
    MaximalScales bad = s;
    bad.z_radii.clear();
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = s;
    bad.t_halves.push_back(-1.0);
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("swept averages match the direct averaging oracle") {
    const SampledFunction f = field(3);
    const MaximalScales s = MaximalScales::dyadic(kGrid);
    const SampledFunction M = hl_maximal(f, s);
    for (std::size_t node : {std::size_t{0}, std::size_t{1234}, std::size_t{7777}, kGrid.size() / 2, kGrid.size() - 1}) {
        double oracle = 0.0;
        for (double r : s.z_radii) oracle = std::max(oracle, set_average(f, node, r, r * r, MaximalGeometry::group));
        CHECK(M[node] == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("maximal function of the unit ball decays like the volume ratio") {
    const GridSpec g{1, 8.0, 16.0, 32, 64};
    const SampledFunction f = unit_ball_indicator(g);
    const SampledFunction M = hl_maximal(f);
    std::vector<double> c(3);
    int tested = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        g.node_coords(i, c);
        // Nodes next to the x-axis with rho between 2.75 and 3.75.
        if (std::abs(c[1]) != 0.25 || std::abs(c[2]) != 0.25 || c[0] < 2.5 || c[0] > 4.0) continue;
        const double R = rho_of(c), expect = std::pow(R + 1.0, -4.0);
        CHECK(M[i] >= 0.25 * expect);
        CHECK(M[i] <= 4.0 * expect);
        ++tested;
    }
    CHECK(tested == 12);
}

TEST_CASE("trivial identities: dominance, homogeneity, constants") {
    const SampledFunction f = field(5);
    const SampledFunction M = hl_maximal(f), S = strong_maximal(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(M[i] >= std::abs(f[i]));
        CHECK(S[i] >= std::abs(f[i]));
    }
    SampledFunction g2 = f;
    g2 *= 2.0;
    const SampledFunction M2 = hl_maximal(g2);
    SampledFunction g3 = f;
    g3 *= -3.7;
    const SampledFunction M3 = hl_maximal(g3);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(M2[i] == 2.0 * M[i]);
        CHECK(M3[i] == doctest::Approx(3.7 * M[i]).epsilon(1e-13));
    }
    SampledFunction one(kGrid);
    for (std::size_t i = 0; i < one.size(); ++i) one[i] = 0.75;
    for (MaximalGeometry geo : {MaximalGeometry::group, MaximalGeometry::coordinate}) {
        const MaximalScales s = MaximalScales::dyadic(kGrid, geo);
        const SampledFunction Mc = hl_maximal(one, s), Sc = strong_maximal(one, s);
        for (std::size_t i = 0; i < one.size(); ++i) {
            CHECK(Mc[i] == doctest::Approx(0.75).epsilon(1e-14));
            CHECK(Sc[i] == doctest::Approx(0.75).epsilon(1e-14));
        }
    }
}

TEST_CASE("rectangles refine balls on the shared scale set") {
    const SampledFunction f = field(9, 0.5);
    for (MaximalGeometry geo : {MaximalGeometry::group, MaximalGeometry::coordinate}) {
        const MaximalScales s = MaximalScales::dyadic(kGrid, geo);
        CHECK(all_leq(hl_maximal(f, s), strong_maximal(f, s)));
    }
}

TEST_CASE("sublinearity, monotonicity and scale refinement") {
    const SampledFunction f = field(11), g = field(12, 0.5);
    const MaximalScales s = MaximalScales::dyadic(kGrid);
    using Op = SampledFunction (*)(const SampledFunction&, const MaximalScales&);
    const Op ops[] = {hl_maximal, strong_maximal};
    for (Op op : ops) {
        const SampledFunction Mf = op(f, s), Mg = op(g, s), Mfg = op(f + g, s);
        CHECK(all_leq(Mfg, Mf + Mg, 1e-12));

        // |h| <= |f| pointwise.
        SampledFunction h = f;
        for (std::size_t i = 0; i < h.size(); ++i) h[i] *= 0.5 * (1.0 + std::cos(0.37 * static_cast<double>(i)));
        CHECK(all_leq(op(h, s), Mf, 1e-12));

        MaximalScales coarse = s;
        coarse.z_radii.erase(coarse.z_radii.begin() + 2);
        coarse.t_halves.erase(coarse.t_halves.begin() + 3);
        CHECK(all_leq(op(f, coarse), Mf));
    }
}

TEST_CASE("separable inputs in coordinate geometry") {
    // f = a(z) b(t) >= 0; the joint sup dominates the product of the one-variable sups.
    const MaximalScales s = MaximalScales::dyadic(kGrid, MaximalGeometry::coordinate);
    auto a = [](const double* c) { return std::exp(-(c[0] - 0.3) * (c[0] - 0.3) - 2.0 * c[1] * c[1]); };
    auto b = [](double t) { return 1.0 / (1.0 + (t - 1.0) * (t - 1.0)); };
    SampledFunction f(kGrid), A(kGrid), B(kGrid);
    std::vector<double> c(3);
    for (std::size_t i = 0; i < f.size(); ++i) {
        kGrid.node_coords(i, c);
        A[i] = a(c.data());
        B[i] = b(c[2]);
        f[i] = A[i] * B[i];
    }
    const SampledFunction Ms = strong_maximal(f, s);
    // One-variable maximal functions through degenerate sets: A is constant in t, B in z.
    const double huge_t = 1e6, huge_z = 1e6;
    const std::size_t cols = kGrid.columns();
    const int Pt = kGrid.points_t;
    for (std::size_t col = 0; col < cols; col += 17) {
        for (int it = 0; it < Pt; it += 5) {
            const std::size_t node = col * static_cast<std::size_t>(Pt) + static_cast<std::size_t>(it);
            double Ma = 0.0, Mb = 0.0;
            for (double r : s.z_radii) Ma = std::max(Ma, set_average(A, node, r, huge_t, MaximalGeometry::coordinate));
            for (double tau : s.t_halves)
                Mb = std::max(Mb, set_average(B, node, huge_z, tau, MaximalGeometry::coordinate));
            CHECK(Ms[node] >= Ma * Mb * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("vector-valued maximal check") {
    CHECK_THROWS_WITH_AS(check_fs_exponent(1, 0.8, 1.0), doctest::Contains("4n/(4n+1)<r<p"), Error);
    CHECK_THROWS_AS(check_fs_exponent(1, 1.0, 1.0), Error);
    CHECK_NOTHROW(check_fs_exponent(1, 0.81, 0.9));
    CHECK_THROWS_AS(check_fs_exponent(2, 0.85, 1.0), Error);  // 8/9 for n = 2

    const std::vector<SampledFunction> fam{field(21), field(22, 0.5), field(23, 2.0)};
    CHECK_THROWS_AS(fs_vector_check({}, 1.0, 0.9), Error);
    CHECK_THROWS_AS(fs_vector_check(fam, 1.0, 0.7), Error);
    CHECK_THROWS_AS(fs_vector_check(fam, 1.2, 0.9), Error);

    const MaximalReport r = fs_vector_check(fam, 1.0, 0.9);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio >= 1.0);  // M_s(|f|^r)^{1/r} >= |f|
    CHECK(r.family_size == 3);

    std::vector<SampledFunction> scaled = fam;
    for (SampledFunction& f : scaled) f *= 7.3;
    CHECK(fs_vector_check(scaled, 1.0, 0.9).ratio == doctest::Approx(r.ratio).epsilon(1e-12));

    const MaximalReport single = fs_vector_check({unit_ball_indicator(kGrid)}, 0.95, 0.85);
    CHECK(std::isfinite(single.ratio));
    CHECK(single.ratio > 1.0);
    CHECK(single.json().find("\"ratio\"") != std::string::npos);
}
