#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "flagwave/wavelets.hpp"
#include "support.hpp"

using namespace flagwave;
using namespace fwtest;

namespace {

const ComponentWavelet2& psi2() {
    static const ComponentWavelet2 w = build_psi2(4);
    return w;
}

double l1_norm(const SampledFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += std::abs(v);
    return s * f.grid().cell_volume();
}

// Discrete-time Fourier transform of even samples at eta (cycles per unit).
double dtft(const Sampled1DFunction& f, double eta) {
    double acc = 0.0;
    for (int m = -f.half; m <= f.half; ++m)
        acc += f.values[m + f.half] * std::cos(2.0 * std::numbers::pi * eta * m * f.h);
    return acc * f.h;
}

}  // namespace

TEST_CASE("psi1 moments vanish at quadrature for M = 0, 2, 4") {
    const GridSpec g{1, 1.25, 1.25, 40, 40};
    for (int M : {0, 2, 4}) {
        const ComponentWavelet1 w = build_psi1(WaveletSpec{M, 1.0, 1}, g);
        const double l1 = l1_norm(w.samples);
        for (const MomentResidual& r : moments(w.samples, M, 1.0)) {
            CHECK(r.relative <= 1e-10);
            CHECK(std::abs(r.value) <= 1e-10 * l1);
        }
        CHECK(l2_norm(w.samples) == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("psi1 in H^2 has vanishing moments") {
    const ComponentWavelet1 w = build_psi1(WaveletSpec{2, 1.0, 2}, GridSpec{2, 1.0, 1.0, 16, 32});
    for (const MomentResidual& r : moments(w.samples, 2, 1.0)) CHECK(r.relative <= 1e-10);
}

TEST_CASE("psi1 support and symmetry") {
    const GridSpec g{1, 2.0, 2.5, 48, 60};
    const ComponentWavelet1 w = build_psi1(WaveletSpec{4, 1.5, 1}, g);
    std::vector<double> c(3);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.node_coords(i, c);
        const double z2 = c[0] * c[0] + c[1] * c[1];
        if (z2 * z2 + c[2] * c[2] >= std::pow(1.5, 4)) CHECK(w.samples[i] == 0.0);
    }
    // The profile is even under g -> g^{-1}.
    CHECK(relative_l2(reflect(w.samples), w.samples) <= 1e-12);
}

TEST_CASE("psi1 scale checks name the offending scale") {
    const GridSpec g{1, 1.0, 1.0, 32, 32};
    const ComponentWavelet1 w = build_psi1(WaveletSpec{2, 1.0, 1}, g);
    try {
        (void)dilate_psi1(-1, w, g);
        FAIL("expected overflow");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("j=-1") != std::string::npos);
    }
    try {
        (void)dilate_psi1(2, w, g);
        FAIL("expected under-resolution");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("j=2") != std::string::npos);
    }
    CHECK_THROWS_AS(build_psi1(WaveletSpec{2, 1.0, 1}, GridSpec{1, 1.0, 1.0, 6, 32}), Error);
    CHECK_THROWS_AS(build_psi1(WaveletSpec{2, -1.0, 1}, g), Error);
}

TEST_CASE("psi1 derivative levels converge under refinement and are scale-covariant") {
    // Constants C_I = ||X^I psi||_inf r^{d(I)} / ||psi||_inf for |I| <= 2. For a smooth profile the
    // discrete values converge geometrically as h halves; a kink would make them grow like 1/h.
    const std::vector<MultiIndex> I = {MultiIndex({1, 0, 0}), MultiIndex({0, 1, 0}), MultiIndex({0, 0, 1}),
                                       MultiIndex({2, 0, 0}), MultiIndex({1, 1, 0}), MultiIndex({1, 0, 1}),
                                       MultiIndex({0, 0, 2})};
    auto constants = [&](const SampledFunction& f, double r) {
        std::vector<double> out;
        const double s = sup_norm(f);
        for (const MultiIndex& mi : I)
            out.push_back(sup_norm(apply_multi_index(mi, f, FieldVariant::left)) * std::pow(r, mi.degree()) / s);
        return out;
    };
    const WaveletSpec spec{4, 1.0, 1};
    std::vector<std::vector<double>> levels;
    for (int P : {40, 80, 160}) levels.push_back(constants(build_psi1(spec, GridSpec{1, 1.25, 1.25, P, P}).samples, 1.0));
    for (std::size_t q = 0; q < I.size(); ++q) {
        const double d1 = std::abs(levels[1][q] - levels[0][q]), d2 = std::abs(levels[2][q] - levels[1][q]);
        CHECK(d2 <= 0.9 * d1 + 1e-3 * levels[2][q]);
        // Geometric extrapolation of the limit stays bounded.
        CHECK(levels[2][q] + 3.0 * d2 <= 400.0);
    }
    const GridSpec coarse{1, 1.25, 1.25, 80, 80};
    const ComponentWavelet1 w = build_psi1(spec, coarse);
    const std::vector<double> cj = constants(dilate_psi1(1, w, coarse.dilated(1)), 0.5);
    for (std::size_t q = 0; q < I.size(); ++q) CHECK(std::abs(cj[q] - levels[1][q]) <= 1e-9 * levels[1][q]);
}

TEST_CASE("dilate_psi1: identity, exact covariance, mean and L1") {
    const GridSpec g{1, 1.0, 1.0, 64, 64};
    const ComponentWavelet1 w = build_psi1(WaveletSpec{4, 1.0, 1}, g);
    CHECK(bit_equal(dilate_psi1(0, w, g), w.samples));
    // On the dilated grid the nodes map onto each other, so D_2 is a pure rescaling.
    const SampledFunction d1 = dilate_psi1(1, w, g.dilated(1));
    const SampledFunction scaled = 16.0 * w.samples;
    CHECK(bit_equal(d1, SampledFunction(g.dilated(1), {scaled.values().begin(), scaled.values().end()})));
    // On an independent grid: mean preserved exactly, L1 to resampling accuracy.
    const GridSpec fine{1, 1.0, 1.0, 128, 256};
    const SampledFunction d = dilate_psi1(1, w, fine);
    CHECK(std::abs(integrate(d)) <= 1e-9 * l1_norm(d));
    CHECK(std::abs(l1_norm(d) - l1_norm(w.samples)) <= 1e-3 * l1_norm(w.samples));
    for (const MomentResidual& r : moments(d, 4, 0.5)) CHECK(r.relative <= 1e-10);
}

TEST_CASE("psi2 moments, evenness and decay") {
    const ComponentWavelet2& w = psi2();
    const std::vector<double> m = moments_1d(w.samples, 4);
    for (double r : m) CHECK(r <= 1e-10);
    const auto& v = w.samples.values;
    for (int i = 0; i < w.samples.half; ++i) CHECK(v[i] == v[v.size() - 1 - i]);
    CHECK(std::abs(ComponentWavelet2::value(100.0)) <= 1e-14);
    CHECK(ComponentWavelet2::value(0.0) == doctest::Approx(1.5266).epsilon(1e-3));
    CHECK_THROWS_AS(build_psi2(0), Error);
}

TEST_CASE("psi2 discrete Calderon sum from the sampled profile") {
    // Oracle: DTFT of the master samples, not the analytic spectrum.
    const ComponentWavelet2& w = psi2();
    for (int q = 0; q <= 64; ++q) {
        const double eta = std::pow(2.0, -2.0 + 4.0 * q / 64.0);
        double s = 0.0;
        for (int k = -3; k <= 3; ++k) {
            const double a = dtft(w.samples, std::ldexp(eta, -k));
            s += a * a;
        }
        CHECK(std::abs(s - 1.0) <= 1e-6);
    }
    for (double eta : {0.3, 0.7, 1.0, 1.9, 3.1})
        CHECK(calderon_sum(w, eta, -3, 3) == doctest::Approx(std::pow(dtft(w.samples, eta / 8), 2) +
                                                             std::pow(dtft(w.samples, eta / 4), 2) +
                                                             std::pow(dtft(w.samples, eta / 2), 2) +
                                                             std::pow(dtft(w.samples, eta), 2) +
                                                             std::pow(dtft(w.samples, 2 * eta), 2) +
                                                             std::pow(dtft(w.samples, 4 * eta), 2) +
                                                             std::pow(dtft(w.samples, 8 * eta), 2))
                                                .epsilon(1e-13));
    CHECK(std::abs(dtft(w.samples, 0.3)) <= 1e-9);
    CHECK(std::abs(dtft(w.samples, 2.5)) <= 1e-9);
}

TEST_CASE("dilate_psi2 preserves mass and rejects unresolvable bands") {
    const ComponentWavelet2& w = psi2();
    const Sampled1DFunction d0 = dilate_psi2(0, w, 1.0 / 64.0, 4096);
    const Sampled1DFunction d2 = dilate_psi2(2, w, 1.0 / 64.0, 4096);
    auto l1 = [](const Sampled1DFunction& f) {
        double s = 0.0;
        for (double v : f.values) s += std::abs(v);
        return s * f.h;
    };
    CHECK(l1(d2) == doctest::Approx(l1(d0)).epsilon(1e-3));
    CHECK(std::abs(d2.integral()) <= 1e-12 * l1(d2));
    CHECK(d2.at(3) == doctest::Approx(4.0 * ComponentWavelet2::value(4.0 * 3.0 / 64.0)).epsilon(1e-9));
    CHECK_THROWS_AS(dilate_psi2(3, w, 1.0 / 16.0, 1024), Error);
    CHECK_THROWS_AS(dilate_psi2(-3, w, 1.0 / 16.0, 64), Error);
}

TEST_CASE("pair kernel matches discrete convolution of dilates") {
    const ComponentWavelet2& w = psi2();
    const double h = 1.0 / 16.0;
    for (auto [k, kp] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{2, 1}}) {
        const Sampled1DFunction a = dilate_psi2(k, w, h, 1024), b = dilate_psi2(kp, w, h, 1024);
        const Sampled1DFunction c = convolve_1d(a, b);
        const Sampled1DFunction kappa = psi2_pair_kernel(k, kp, h, 256);
        double err = 0.0, ref = 0.0;
        for (int m = -256; m <= 256; ++m) {
            err = std::max(err, std::abs(kappa.at(m) - c.at(m)));
            ref = std::max(ref, std::abs(c.at(m)));
        }
        CHECK(err <= 1e-8 * ref);
    }
    const Sampled1DFunction far = psi2_pair_kernel(0, 2, h, 64);
    for (double v : far.values) CHECK(v == 0.0);
}

TEST_CASE("pair kernel needs only the band overlap below Nyquist") {
    const ComponentWavelet2& w = psi2();
    const double h = 1.0 / 16.0;
    CHECK_THROWS_AS(dilate_psi2(3, w, h, 1024), Error);
    CHECK_THROWS_AS(psi2_pair_kernel(3, 3, h, 64), Error);
    const Sampled1DFunction kappa = psi2_pair_kernel(2, 3, h, 128);
    const Sampled1DFunction a = dilate_psi2(2, w, h / 2, 2048), b = dilate_psi2(3, w, h / 2, 2048);
    const Sampled1DFunction c = convolve_1d(a, b);
    double err = 0.0, ref = 0.0;
    for (int m = -128; m <= 128; ++m) {
        err = std::max(err, std::abs(kappa.at(m) - c.at(2 * m)));
        ref = std::max(ref, std::abs(c.at(2 * m)));
    }
    CHECK(err <= 1e-8 * ref);
}

TEST_CASE("flag wavelet factorisation and central moments") {
    const GridSpec g{1, 2.0, 32.0, 16, 1024};
    const ComponentWavelet1 w1 = build_psi1(WaveletSpec{4, 1.0, 1}, GridSpec{1, 2.0, 2.0, 16, 64});
    const SampledFunction p1 = dilate_psi1(0, w1, g);
    const FlagWavelet fw = flag_wavelet(0, 2, w1, psi2(), g);
    const Sampled1DFunction p2 = dilate_psi2(2, psi2(), g.h_t(), g.points_t - 1);
    CHECK(bit_equal(fw.samples, partial_convolve_t(p1, p2)));
    CHECK(std::abs(integrate(fw.samples)) <= 1e-9 * l1_norm(fw.samples));
    // Per column: int psi_{j,k}(z, u) du = 0.
    double worst = 0.0, scale = 0.0;
    const auto v = fw.samples.values();
    for (std::size_t col = 0; col < g.columns(); ++col) {
        double s = 0.0, a = 0.0;
        for (int t = 0; t < g.points_t; ++t) {
            s += v[col * g.points_t + t];
            a += std::abs(v[col * g.points_t + t]);
        }
        worst = std::max(worst, std::abs(s) * g.h_t());
        scale = std::max(scale, a * g.h_t());
    }
    CHECK(worst <= 1e-9 * scale);
}

TEST_CASE("wavelet sidecar round trip") {
    const GridSpec g{1, 1.0, 1.0, 16, 16};
    const ComponentWavelet1 w = build_psi1(WaveletSpec{2, 1.0, 1}, g);
    const auto dir = std::filesystem::temp_directory_path() / "flagwave_wavelet";
    std::filesystem::create_directories(dir);
    const std::string base = (dir / "psi").string();
    save(w.samples, base, wavelet_metadata(w.spec, 0, 3));
    CHECK(bit_equal(load(base), w.samples));
    std::ifstream side(base + ".json");
    const nlohmann::json meta = nlohmann::json::parse(side)["meta"];
    CHECK(meta["k"] == 3);
    CHECK(meta["M"] == 2);
}
