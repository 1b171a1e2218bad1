#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "flagwave/fields.hpp"
#include "flagwave/kernels.hpp"
#include "support.hpp"

using namespace flagwave;
using namespace fwtest;

namespace {

const GridSpec kDefault{1, 4.0, 16.0, 32, 64};

KernelSpec spec(KernelProfile p, double eps, double R) {
    KernelSpec s;
    s.profile = p;
    s.eps_in = eps;
    s.R_out = R;
    return s;
}

}  // namespace

TEST_CASE("kernel profiles: value, oddness, homogeneity") {
    const KernelSpec rx = spec(KernelProfile::riesz_x1, 0.25, 4.0);
    const double e1[3] = {1.0, 0.0, 0.0};
    CHECK(rx.value(e1) == doctest::Approx(1.0).epsilon(1e-14));
    Rng rng(17);
    for (const KernelSpec& k : {rx, spec(KernelProfile::riesz_y1, 0.25, 4.0), spec(KernelProfile::central_t, 0.25, 4.0)}) {
        for (int i = 0; i < 200; ++i) {
            double g[3] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            double m[3] = {g[0], g[1], g[2]};
            m[k.odd_axis()] = -m[k.odd_axis()];
            CHECK(k.value(m) == -k.value(g));
            const double d[3] = {2.0 * g[0], 2.0 * g[1], 4.0 * g[2]};
            const double lhs = k.profile_value(d) * 16.0, rhs = k.profile_value(g);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
            const double rb = smooth_gauge(g, 1);
            if (rb >= 0.5 && rb <= 1.0) CHECK(std::abs(k.value(d) * 16.0 - k.value(g)) <= 1e-10 * std::abs(k.value(g)));
        }
    }
}

TEST_CASE("make_kernel validation") {
    CHECK_THROWS_AS(make_kernel(spec(KernelProfile::riesz_x1, 0.1, 2.0), kDefault), Error);
    CHECK_THROWS_AS(make_kernel(spec(KernelProfile::riesz_x1, 0.5, 5.0), kDefault), Error);
    CHECK_THROWS_AS(make_kernel(spec(KernelProfile::riesz_x1, 2.0, 2.0), kDefault), Error);
    CHECK_THROWS_AS(parse_profile("riesz_z"), Error);
    const KernelSpec d = KernelSpec::defaults(KernelProfile::riesz_x1, kDefault);
    CHECK(d.eps_in == 0.5);
    CHECK(d.R_out == 2.0);
    CHECK_NOTHROW(make_kernel(d, kDefault));
}

TEST_CASE("size and smoothness certificates are resolution-stable") {
    for (KernelProfile p : {KernelProfile::riesz_x1, KernelProfile::central_t}) {
        const KernelSpec s = spec(p, 0.5, 4.0);
        const SizeCertificate c = verify_size_smoothness(make_kernel(s, kDefault), s.eps_in, s.R_out);
        const SizeCertificate f = verify_size_smoothness(make_kernel(s, kDefault.refined()), s.eps_in, s.R_out);
        CHECK(std::isfinite(c.C0));
        CHECK(c.C0 > 0.0);
        if (p == KernelProfile::riesz_x1) CHECK(std::abs(c.C0 - f.C0) <= 0.2 * f.C0);
        if (p == KernelProfile::central_t) CHECK(std::abs(c.C2 - f.C2) <= 0.2 * f.C2);
    }
    const SizeCertificate z = verify_size_smoothness(SampledFunction(kDefault), 0.5, 4.0);
    CHECK(z.C0 == 0.0);
    CHECK(z.C1 == 0.0);
    CHECK(z.C2 == 0.0);
}

TEST_CASE("bump cancellation") {
    const KernelSpec rx = spec(KernelProfile::riesz_x1, 1.0 / 64.0, 8.0);
    const PairingReport even = bump_cancellation_test(rx, {even_bump(1)}, {0.5, 1.0, 2.0});
    CHECK(even.max_pairing <= 1e-8);
    const std::vector<Bump> fam = bump_family(1, 5, 7);
    const std::vector<double> radii = {0.25, 0.5, 1.0, 2.0, 4.0};
    const PairingReport rep = bump_cancellation_test(rx, fam, radii);
    REQUIRE(rep.per_r.size() == radii.size());
    const auto [lo, hi] = std::minmax_element(rep.per_r.begin(), rep.per_r.end());
    CHECK(*lo > 0.0);
    CHECK(*hi <= 3.0 * *lo);
    KernelSpec scaled = rx;
    scaled.scale = 2.5;
    const PairingReport rep2 = bump_cancellation_test(scaled, fam, radii);
    CHECK(std::abs(rep2.max_pairing - 2.5 * rep.max_pairing) <= 1e-12 * rep2.max_pairing);
    // A dilate hidden inside the inner cut is skipped and reported.
    const PairingReport skip = bump_cancellation_test(spec(KernelProfile::riesz_x1, 0.5, 8.0), fam, {1.0, 4.0});
    CHECK(skip.skipped_r == std::vector<double>{4.0});
}

TEST_CASE("bump family is normalised") {
    Rng rng(31);
    for (const Bump& b : bump_family(1, 3, 9)) {
        // Grid differencing smooths the peaks, so it may only undershoot the normalisation.
        const GridSpec g{1, 1.0, 1.0, 96, 96};
        SampledFunction F(g);
        std::vector<double> c(3);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g.node_coords(i, c);
            F[i] = b.fn(c.data());
        }
        double m = sup_norm(F);
        for (int a = 0; a < 3; ++a) {
            const SampledFunction d = partial_derivative(a, F);
            m = std::max(m, sup_norm(d));
            for (int q = a; q < 3; ++q) m = std::max(m, sup_norm(partial_derivative(q, d)));
        }
        CHECK(m <= 1.02);
        CHECK(m >= 0.5);
        // Independent pointwise second differences at random points.
        double worst = 0.0;
        const double h = 1e-3;
        for (int s = 0; s < 20000; ++s) {
            double x[3] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            for (int a = 0; a < 3; ++a) {
                double p[3] = {x[0], x[1], x[2]}, q[3] = {x[0], x[1], x[2]};
                p[a] += h;
                q[a] -= h;
                worst = std::max(worst, std::abs(b.fn(p) - 2.0 * b.fn(x) + b.fn(q)) / (h * h));
            }
        }
        CHECK(worst <= 1.0 + 1e-2);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g.node_coords(i, c);
            if (std::max(std::hypot(c[0], c[1]), std::sqrt(std::abs(c[2]))) >= 1.0) CHECK(F[i] == 0.0);
        }
    }
}

TEST_CASE("apply: oracle, zero kernel, linearity") {
    const GridSpec g8{1, 2.0, 4.0, 8, 8};
    Rng rng(4);
    const SampledFunction f = random_field(g8, rng, 0.5);
    const SampledFunction K = make_kernel(spec(KernelProfile::riesz_x1, 0.5, 2.0), g8);
    CHECK(bit_equal(apply(K, f), brute_force_convolve(f, K)));
    CHECK(sup_norm(apply(SampledFunction(g8), f)) == 0.0);
    const SampledFunction h = random_field(g8, rng, 0.5);
    const SampledFunction lhs = apply(K, 3.0 * f + (-2.0) * h);
    const SampledFunction rhs = 3.0 * apply(K, f) + (-2.0) * apply(K, h);
    CHECK(l2_norm(lhs - rhs) <= 1e-12 * l2_norm(rhs));
}

TEST_CASE("L2 ratio of the truncated Riesz kernel is stable across smooth fields") {
    const GridSpec g{1, 2.0, 4.0, 16, 32};
    const SampledFunction K = make_kernel(spec(KernelProfile::riesz_x1, 0.25, 2.0), g);
    Rng rng(2024);
    std::vector<double> ratio;
    for (int i = 0; i < 10; ++i) {
        const SampledFunction f = random_smooth_field(g, rng, 0.5, 1.0, 2.0);
        ratio.push_back(l2_norm(apply(K, f)) / l2_norm(f));
    }
    std::vector<double> s = ratio;
    std::sort(s.begin(), s.end());
    const double med = 0.5 * (s[4] + s[5]);
    for (double r : ratio) CHECK(std::abs(r - med) <= 0.3 * med);
}
