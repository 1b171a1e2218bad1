#pragma once

#include <string>
#include <vector>

#include "flagwave/kernels.hpp"
#include "flagwave/wavelets.hpp"

namespace flagwave {

enum class EnvelopeCase { one_param, flag_case_geq, flag_case_leq };
std::string case_name(EnvelopeCase c);

// Flag dichotomy: geq iff 2 (j ^ j') >= k ^ k'. Every tuple gets exactly one case.
EnvelopeCase classify_flag(int j, int k, int jp, int kp);

struct EnvelopeReport {
    int j = 0, k = 0, jp = 0, kp = 0;
    EnvelopeCase kase = EnvelopeCase::one_param;
    double epsilon = 0.5;
    double sup_abs = 0.0;      // sup |A|
    double sup_scaled = 0.0;   // sup |A| / shape(g): the ratio without the 2^{-|j-j'| eps} 2^{-|k-k'|} prefactor
    double sup_ratio = 0.0;    // sup |A| / bound(g)
    // CSV row j,k,j_p,k_p,case,epsilon,sup_ratio,slope; slope is the scan's fitted slope (NaN if none).
    [[nodiscard]] std::string csv_row(double slope) const;
};
std::string envelope_csv_header();

// Numerical setting shared by the scans. `base` is the pair grid at coarse scale 0; a pair whose
// coarse scale is m runs on base.dilated(m), the finer factor on its own grid with spacing scaled
// by the scale gap, so every dilate keeps the same number of cells across its support.
struct OrthoSetup {
    GridSpec base{1, 4.0, 16.0, 64, 256};
    WaveletSpec spec{};
    KernelProfile profile = KernelProfile::riesz_x1;
    int boundary_layer = 2;   // cells excluded at the box faces
    bool bump_control = false; // replace psi1 by the non-mean-zero bump
    void validate() const;
};

// Lemma-style pair fields on the pair grid: psi_j * psi_jp, and psi_j * K * psi_jp with K the
// profile under the default cuts of the pair grid.
SampledFunction wavelet_pair_field(int j, int jp, const OrthoSetup& s);
SampledFunction one_param_field(int j, int jp, const OrthoSetup& s);

// sup |A| (2^{-m} + rho)^{2n+3} / (2^{-m} 2^{-|j-j'| eps}), m = j ^ j'.
EnvelopeReport wavelet_pair_envelope(int j, int jp, double eps, const OrthoSetup& s);
EnvelopeReport one_param_envelope(int j, int jp, double eps, const OrthoSetup& s);

// sup |(D_{2^-j} K) * psi| (1 + rho)^{2n+3} on `grid` (unit-scale psi), or psi * (D_{2^-j} K)
// for the right side. D_{2^-j} K is K with both cuts scaled by 2^j; the sup runs over nodes
// whose translate of the psi support stays in the box, where the box truncation is invisible.
enum class Side { left, right };
struct KernelWaveletReport {
    int j = 0;
    Side side = Side::left;
    double sup_weighted = 0.0;
};
struct KernelWaveletSetup {
    GridSpec grid{1, 3.0, 9.0, 48, 144};
    WaveletSpec spec{};
    KernelProfile profile = KernelProfile::riesz_x1;
    double eps_in = 0.5;   // cuts at j = 0
    double R_out = 4.0;
};
KernelWaveletReport kernel_wavelet_envelope(int j, Side side, const KernelWaveletSetup& s);

// psi_{j,k} * K * psi_{j',k'} = (psi1_j * K * psi1_j') *_2 (psi2_k *_2 psi2_k'), evaluated with
// the t-axis of the pair grid extended to hold the psi2 pair kernel.
EnvelopeReport flag_envelope(int j, int k, int jp, int kp, double eps, const OrthoSetup& s);
// Same, reusing B = one_param_field(j, j', s) across (k, k').
EnvelopeReport flag_envelope(const SampledFunction& B, int j, int k, int jp, int kp, double eps,
                             const OrthoSetup& s);
// Case-dependent bound at (|z|, t), including the prefactor.
double flag_bound(int j, int k, int jp, int kp, double eps, int n, double z, double t);

// Least-squares slope of log(sup_scaled) against |j - j'|; needs >= 4 distinct gaps.
double fit_slope(const std::vector<EnvelopeReport>& scan);
// -slope / ln 2 clamped to [0, 1].
double fit_epsilon(const std::vector<EnvelopeReport>& scan);

}  // namespace flagwave
