#pragma once

#include <string>
#include <vector>

#include "flagwave/grid.hpp"

namespace flagwave {

struct WaveletSpec {
    int M = 4;          // moments with |alpha| + 2 beta <= M vanish
    double r0 = 1.0;    // support radius in the smooth gauge
    int n = 1;
    void validate() const;
};

// z^alpha u^beta with alpha of length 2n.
struct Monomial {
    std::vector<int> alpha;
    int beta = 0;
    [[nodiscard]] int degree() const;
    [[nodiscard]] double eval(const double* coords, int n) const;
};
// All monomials of homogeneous degree <= d, in graded lexicographic order.
std::vector<Monomial> monomials_up_to(int n, int d);

// exp(-1/(1 - rho_bar^4 / r^4)) inside rho_bar < r, else 0; rho_bar^4 = |z|^4 + t^2.
double bump_profile(const double* coords, int n, double r);

class ComponentWavelet1 {
public:
    WaveletSpec spec;
    std::vector<Monomial> basis;   // multiplier monomials in (z/r0, u/r0^2)
    std::vector<double> coeffs;    // multiplier coefficients (L2-normalised on the build grid)
    SampledFunction samples;       // on the build grid, moments exact at quadrature
    double gram_condition = 0.0;

    // Unit-scale analytic profile p(z/r0, u/r0^2) B(g).
    [[nodiscard]] double value(const double* coords) const;
};

ComponentWavelet1 build_psi1(const WaveletSpec& spec, const GridSpec& grid);

// D_{2^j} psi sampled on `target`, then moments re-projected so that they vanish at
// quadrature. Errors when the dilated support leaves the box or is under-resolved.
SampledFunction dilate_psi1(int j, const ComponentWavelet1& psi, const GridSpec& target);
// D_{2^j} of the plain bump (no moments), L1-normalised; used as a negative control.
SampledFunction dilate_bump(int j, const WaveletSpec& spec, const GridSpec& target);
// Resolution check shared by every sampled dilate; throws naming the scale.
void check_psi1_scale(int j, const WaveletSpec& spec, const GridSpec& grid);

struct MomentResidual {
    Monomial m;
    double value = 0.0;       // int z^alpha u^beta f
    double relative = 0.0;    // |value| / int |z^alpha u^beta f|
};
// Moments in the coordinates (z/a, u/a^2).
std::vector<MomentResidual> moments(const SampledFunction& f, int M, double a);

// ---------------------------------------------------------------- psi^(2)

class ComponentWavelet2 {
public:
    int M2 = 4;
    Sampled1DFunction samples;     // master axis, moment-projected

    // Fourier transform sqrt(Phi(log2 |eta|)), support 1/2 <= |eta| <= 2 (cycles per unit).
    [[nodiscard]] static double hat(double eta);
    // Partition function Phi with sum_k Phi(s - k) = 1.
    [[nodiscard]] static double partition(double s);
    // psi(v) = 2 int_{1/2}^{2} hat(eta) cos(2 pi eta v) d eta.
    [[nodiscard]] static double value(double v);
};

ComponentWavelet2 build_psi2(int M2);

// 2^k psi(2^k m h), m = -half..half, with even moments up to M2 re-projected to zero.
Sampled1DFunction dilate_psi2(int k, const ComponentWavelet2& psi, double h, int half);
// psi_k * psi_k' on offsets m h from the product spectrum.
Sampled1DFunction psi2_pair_kernel(int k, int kp, double h, int half);
// sum_m f(m h) cos(2 pi eta m h) h: the spectrum of even samples at eta (cycles per unit).
double sampled_spectrum(const Sampled1DFunction& f, double eta);
// sum_{k_lo <= k <= k_hi} |spectrum of the master samples at 2^-k eta|^2; one inside the band.
double calderon_sum(const ComponentWavelet2& psi, double eta, int k_lo, int k_hi);

// Relative moments gamma = 0..M of a 1-D sample array.
std::vector<double> moments_1d(const Sampled1DFunction& f, int M);

struct FlagWavelet {
    int j = 0;
    int k = 0;
    SampledFunction samples;
};

FlagWavelet flag_wavelet(int j, int k, const ComponentWavelet1& psi1, const ComponentWavelet2& psi2,
                         const GridSpec& grid);

// JSON sidecar recording (M, r0, j, k) for save().
std::string wavelet_metadata(const WaveletSpec& spec, int j, int k);

}  // namespace flagwave
