#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flagwave/grid.hpp"

namespace flagwave {

enum class KernelProfile { riesz_x1, riesz_y1, central_t, custom, zero };

KernelProfile parse_profile(const std::string& name);
std::string profile_name(KernelProfile p);

// C^inf step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s);
// (|z|^4 + t^2)^{1/4}.
double smooth_gauge(const double* coords, int n);

struct KernelSpec {
    KernelProfile profile = KernelProfile::riesz_x1;
    double eps_in = 0.5;
    double R_out = 2.0;
    int n = 1;
    double scale = 1.0;
    std::optional<SampledFunction> samples;  // custom profile only

    // Defaults 2 h_z and L_z / 2.
    static KernelSpec defaults(KernelProfile p, const GridSpec& grid);
    void validate() const;
    // Untruncated homogeneous profile of degree -(2n+2).
    [[nodiscard]] double profile_value(const double* coords) const;
    // Cut-off S((rho-eps)/eps) S((R-rho)/(R/2)): zero below eps and above R, one on [2 eps, R/2].
    [[nodiscard]] double cutoff(const double* coords) const;
    [[nodiscard]] double value(const double* coords) const;
    // Axis negated by the recorded oddness certificate.
    [[nodiscard]] int odd_axis() const;
};

// Samples the truncated kernel; errors when the cuts are not resolved by the grid.
SampledFunction make_kernel(const KernelSpec& spec, const GridSpec& grid);

struct SizeCertificate {
    double C0 = 0.0;  // sup rho^{2n+2} |K|
    double C1 = 0.0;  // sup rho^{2n+3} |grad_z K|
    double C2 = 0.0;  // sup rho^{2n+4} |d_t K|
    [[nodiscard]] std::string json(const KernelSpec& spec) const;
};
// Suprema over nodes with 2 eps_in <= rho_bar <= R_out / 2, rho the max-norm.
SizeCertificate verify_size_smoothness(const SampledFunction& K, double eps_in, double R_out);

// Normalised bump: supported in the unit smooth-gauge ball, |d^I phi| <= 1 for |I| <= 2.
struct Bump {
    std::function<double(const double*)> fn;
    std::string label;
};
// Deterministic family of non-symmetric bumps (polynomial-tilted, shifted), normalised by the
// sup of all partial derivatives up to order 2 (pointwise differences, locally refined).
std::vector<Bump> bump_family(int n, int count, std::uint64_t seed);
// The even bump exp(-1/(1-rho_bar^4)), normalised the same way.
Bump even_bump(int n);

struct PairingReport {
    double max_pairing = 0.0;
    std::vector<double> r_values;
    std::vector<double> per_r;  // max over the family at each r
    std::vector<double> skipped_r;
};
// max |<K, phi(delta_r .)>| by midpoint quadrature on a grid fitted to each dilated support.
// Radii whose dilated support would fall inside the inner cut by more than a factor 4 are skipped.
PairingReport bump_cancellation_test(const KernelSpec& K, const std::vector<Bump>& family,
                                     const std::vector<double>& r_list, int points_per_axis = 48);

// T f = f * K.
SampledFunction apply(const SampledFunction& K, const SampledFunction& f);

}  // namespace flagwave
