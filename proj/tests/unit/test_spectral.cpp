#include <doctest.h>

#include "flagwave/spectral.hpp"
#include "support.hpp"

using namespace flagwave;
using namespace fwtest;

namespace {

double rel_sup(const SampledFunction& a, const SampledFunction& b) {
    return sup_norm(a - b) / std::max(sup_norm(b), 1e-300);
}

}  // namespace

TEST_CASE("spectral group sums agree with the direct sums") {
    for (const GridSpec& g : {GridSpec{1, 2.0, 4.0, 8, 8}, GridSpec{1, 1.5, 3.0, 6, 14}, GridSpec{1, 2.0, 1.0, 10, 32},
                              GridSpec{2, 1.0, 1.0, 4, 6}}) {
        Rng rng(99);
        const SampledFunction f = random_field(g, rng, 0.3);
        const SampledFunction h = random_field(g, rng, 0.6);
        CHECK(rel_sup(convolve_spectral(f, h), convolve(f, h)) <= 1e-12);
        CHECK(rel_sup(translate_sum_spectral(f, h), translate_sum(f, h, g)) <= 1e-12);
        CHECK(rel_sup(convolve_spectral(h, f), brute_force_convolve(h, f)) <= 1e-12);
    }
}

TEST_CASE("spectral sums: zero operands and grid mismatch") {
    const GridSpec g{1, 2.0, 4.0, 8, 8};
    Rng rng(3);
    const SampledFunction f = random_field(g, rng, 0.5);
    CHECK(sup_norm(convolve_spectral(SampledFunction(g), f)) == 0.0);
    CHECK(sup_norm(convolve_spectral(f, SampledFunction(g))) == 0.0);
    CHECK_THROWS_AS(convolve_spectral(f, SampledFunction(GridSpec{1, 2.0, 4.0, 8, 10})), Error);
}

TEST_CASE("spectral t-convolution agrees with the direct one") {
    const GridSpec g{1, 1.0, 4.0, 4, 40};
    Rng rng(8);
    const SampledFunction f = random_field(g, rng, 0.5);
    for (int half : {3, 39, 70}) {
        Sampled1DFunction w(g.h_t(), half);
        for (double& v : w.values) v = rng.uniform(-1.0, 1.0);
        CHECK(rel_sup(partial_convolve_t_spectral(f, w), partial_convolve_t(f, w)) <= 1e-12);
    }
    CHECK_THROWS_AS(partial_convolve_t_spectral(f, Sampled1DFunction(0.3, 2)), Error);
}
