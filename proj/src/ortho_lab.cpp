#include "flagwave/ortho_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <tuple>

#include "flagwave/spectral.hpp"

namespace flagwave {

std::string case_name(EnvelopeCase c) {
    switch (c) {
        case EnvelopeCase::one_param: return "one_param";
        case EnvelopeCase::flag_case_geq: return "flag_case_geq";
        case EnvelopeCase::flag_case_leq: return "flag_case_leq";
    }
    return "?";
}

EnvelopeCase classify_flag(int j, int k, int jp, int kp) {
    return 2 * std::min(j, jp) >= std::min(k, kp) ? EnvelopeCase::flag_case_geq : EnvelopeCase::flag_case_leq;
}

std::string envelope_csv_header() { return "j,k,j_p,k_p,case,epsilon,sup_ratio,slope"; }

std::string EnvelopeReport::csv_row(double slope) const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%s,%.3f,%.9e,%.9e", j, k, jp, kp, case_name(kase).c_str(), epsilon,
                  sup_ratio, slope);
    return buf;
}

void OrthoSetup::validate() const {
    base.validate();
    spec.validate();
    if (spec.n != base.n) throw Error("ortho: wavelet and grid dimensions differ");
    if (boundary_layer < 0) throw Error("ortho: boundary layer must be >= 0");
}

namespace {

void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error("epsilon must lie in (0, 1), got " + std::to_string(eps));
}

// The analytic profile does not depend on the build grid, so one build per spec is enough.
const ComponentWavelet1& cached_psi1(const WaveletSpec& spec, const GridSpec& grid) {
    static std::mutex mu;
    static std::map<std::tuple<int, double, int>, ComponentWavelet1> cache;
    const std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_tuple(spec.M, spec.r0, spec.n);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_psi1(spec, grid)).first;
    return it->second;
}

SampledFunction factor(int j, const GridSpec& g, const OrthoSetup& s) {
    return s.bump_control ? dilate_bump(j, s.spec, g) : dilate_psi1(j, cached_psi1(s.spec, s.base), g);
}

// Grid for the finer factor at scale M: spacing of the pair grid shrunk by the gap d, box just
// holding the support with a quarter radius to spare.
GridSpec fine_grid(const GridSpec& Gm, int d, double r0, int M) {
    const double hz = std::ldexp(Gm.h_z(), -d), ht = std::ldexp(Gm.h_t(), -2 * d);
    const double need_z = 1.25 * r0 * std::ldexp(1.0, -M), need_t = 1.25 * r0 * r0 * std::ldexp(1.0, -2 * M);
    const int Pz = 2 * static_cast<int>(std::ceil(need_z / hz - 1e-9));
    const int Pt = 2 * static_cast<int>(std::ceil(need_t / ht - 1e-9));
    return GridSpec{Gm.n, 0.5 * Pz * hz, 0.5 * Pt * ht, Pz, Pt};
}

SampledFunction pair_field(int j, int jp, const OrthoSetup& s, bool with_kernel) {
    s.validate();
    const int m = std::min(j, jp), M = std::max(j, jp), d = M - m;
    const GridSpec Gm = s.base.dilated(m);
    const GridSpec Gf = fine_grid(Gm, d, s.spec.r0, M);
    std::optional<SampledFunction> K;
    if (with_kernel) K = make_kernel(KernelSpec::defaults(s.profile, Gm), Gm);
    if (d == 0) {
        SampledFunction A = factor(j, Gm, s);
        if (K) A = convolve_spectral(A, *K);
        return convolve_spectral(A, factor(jp, Gm, s));
    }
    if (j <= jp) {
        SampledFunction C = factor(j, Gm, s);
        if (K) C = convolve_spectral(C, *K);
        return convolve_over_second(C, factor(jp, Gf, s), Gm);
    }
    SampledFunction D = factor(jp, Gm, s);
    if (K) D = convolve_spectral(*K, D);
    return convolve_mixed(factor(j, Gf, s), D, Gm);
}

bool in_layer(const GridSpec& g, std::span<const int> idx, int layer) {
    for (int a = 0; a < g.axes(); ++a)
        if (idx[a] < layer || idx[a] >= g.points(a) - layer) return true;
    return false;
}

// sup |A| / shape over nodes outside the boundary layer; shape(|z|, t, rho) > 0.
template <class Shape>
void weighted_sup(const SampledFunction& A, int layer, Shape&& shape, double& sup_abs, double& sup_scaled) {
    const GridSpec& g = A.grid();
    const int n = g.n;
    std::vector<int> idx(static_cast<std::size_t>(g.axes()));
    std::vector<double> c(static_cast<std::size_t>(g.axes()));
    sup_abs = 0.0;
    sup_scaled = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        const double a = std::abs(A[i]);
        if (a == 0.0) continue;
        g.unflatten(i, idx);
        if (in_layer(g, idx, layer)) continue;
        g.node_coords(i, c);
        double z2 = 0.0;
        for (int q = 0; q < 2 * n; ++q) z2 += c[q] * c[q];
        const double z = std::sqrt(z2), t = c[2 * n];
        const double rho = std::max(z, std::sqrt(std::abs(t)));
        sup_abs = std::max(sup_abs, a);
        sup_scaled = std::max(sup_scaled, a / shape(z, t, rho));
    }
}

EnvelopeReport one_param_report(const SampledFunction& A, int j, int jp, double eps, const OrthoSetup& s) {
    const int m = std::min(j, jp), Q = 2 * s.base.n + 2;
    const double a = std::ldexp(1.0, -m);
    EnvelopeReport r;
    r.j = j;
    r.jp = jp;
    r.epsilon = eps;
    weighted_sup(A, s.boundary_layer, [&](double, double, double rho) { return a / std::pow(a + rho, Q + 1); },
                 r.sup_abs, r.sup_scaled);
    r.sup_ratio = r.sup_scaled * std::exp2(std::abs(j - jp) * eps);
    return r;
}

}  // namespace

SampledFunction wavelet_pair_field(int j, int jp, const OrthoSetup& s) { return pair_field(j, jp, s, false); }
SampledFunction one_param_field(int j, int jp, const OrthoSetup& s) { return pair_field(j, jp, s, true); }

EnvelopeReport wavelet_pair_envelope(int j, int jp, double eps, const OrthoSetup& s) {
    check_eps(eps);
    return one_param_report(wavelet_pair_field(j, jp, s), j, jp, eps, s);
}

EnvelopeReport one_param_envelope(int j, int jp, double eps, const OrthoSetup& s) {
    check_eps(eps);
    return one_param_report(one_param_field(j, jp, s), j, jp, eps, s);
}

KernelWaveletReport kernel_wavelet_envelope(int j, Side side, const KernelWaveletSetup& s) {
    const GridSpec& g = s.grid;
    g.validate();
    const int n = g.n, Q = 2 * n + 2;
    KernelSpec ks;
    ks.profile = s.profile;
    ks.n = n;
    ks.eps_in = std::ldexp(s.eps_in, j);
    ks.R_out = std::ldexp(s.R_out, j);
    ks.validate();
    if (ks.eps_in < g.h_z())
        throw Error("kernel_wavelet_envelope: inner cut at j=" + std::to_string(j) + " is below the grid spacing");
    SampledFunction K(g);
    std::vector<double> c(static_cast<std::size_t>(g.axes()));
    if (s.profile != KernelProfile::zero)
        for (std::size_t i = 0; i < K.size(); ++i) {
            g.node_coords(i, c);
            K[i] = ks.value(c.data());
        }
    const SampledFunction psi = dilate_psi1(0, cached_psi1(s.spec, g), g);
    const SampledFunction E = side == Side::left ? convolve_spectral(K, psi) : convolve_spectral(psi, K);

    // Nodes g whose translates g v^{-1} (left) or v^{-1} g (right), v in supp psi, stay inside the box.
    const double r0 = s.spec.r0, mz = g.half_width_z - 2 * g.h_z(), mt = g.half_width_t - 2 * g.h_t();
    KernelWaveletReport r;
    r.j = j;
    r.side = side;
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (E[i] == 0.0) continue;
        g.node_coords(i, c);
        double zmax = 0.0, zsum = 0.0, z2 = 0.0;
        for (int q = 0; q < 2 * n; ++q) {
            zmax = std::max(zmax, std::abs(c[q]));
            zsum += std::abs(c[q]);
            z2 += c[q] * c[q];
        }
        const double t = c[2 * n];
        if (zmax + r0 > mz || std::abs(t) + r0 * r0 + 2.0 * r0 * zsum > mt) continue;
        const double rho = std::max(std::sqrt(z2), std::sqrt(std::abs(t)));
        r.sup_weighted = std::max(r.sup_weighted, std::abs(E[i]) * std::pow(1.0 + rho, Q + 1));
    }
    return r;
}

double flag_bound(int j, int k, int jp, int kp, double eps, int n, double z, double t) {
    const int m = std::min(j, jp), kap = std::min(k, kp);
    const double pre = std::exp2(-std::abs(j - jp) * eps - std::abs(k - kp));
    const double a = std::ldexp(1.0, -m);
    const double zf = std::sqrt(a) / std::pow(a + z, 2 * n + 0.5);
    if (classify_flag(j, k, jp, kp) == EnvelopeCase::flag_case_geq) {
        const double b = std::ldexp(1.0, -kap);
        return pre * zf * std::pow(b, 0.25) / std::pow(b + std::abs(t), 1.25);
    }
    return pre * zf * std::sqrt(a) / std::pow(a + std::sqrt(std::abs(t)), 2.5);
}

EnvelopeReport flag_envelope(int j, int k, int jp, int kp, double eps, const OrthoSetup& s) {
    return flag_envelope(one_param_field(j, jp, s), j, k, jp, kp, eps, s);
}

EnvelopeReport flag_envelope(const SampledFunction& B, int j, int k, int jp, int kp, double eps,
                             const OrthoSetup& s) {
    check_eps(eps);
    const GridSpec& Gm = B.grid();
    if (!(Gm == s.base.dilated(std::min(j, jp))))
        throw Error("flag_envelope: one-parameter field is not on the pair grid of (j, j')");
    const int kap = std::min(k, kp);
    const double ht = Gm.h_t();

    // Extend the t-axis (same spacing, zero padding) to 24 wavelet units of the coarser psi2.
    const double need = std::max(Gm.half_width_t, 24.0 * std::ldexp(1.0, -kap));
    const int Pt = 2 * static_cast<int>(std::ceil(need / ht - 1e-9));
    const GridSpec G{Gm.n, Gm.half_width_z, 0.5 * Pt * ht, Gm.points_z, Pt};
    SampledFunction Bx(G);
    const int off = (Pt - Gm.points_t) / 2;
    for (std::size_t col = 0; col < Gm.columns(); ++col)
        for (int t = 0; t < Gm.points_t; ++t)
            Bx[col * static_cast<std::size_t>(Pt) + static_cast<std::size_t>(t + off)] =
                B[col * static_cast<std::size_t>(Gm.points_t) + static_cast<std::size_t>(t)];

    const Sampled1DFunction P = psi2_pair_kernel(k, kp, ht, Pt - 1);
    const SampledFunction A = partial_convolve_t_spectral(Bx, P);

    EnvelopeReport r;
    r.j = j;
    r.k = k;
    r.jp = jp;
    r.kp = kp;
    r.kase = classify_flag(j, k, jp, kp);
    r.epsilon = eps;
    const double pre = std::exp2(-std::abs(j - jp) * eps - std::abs(k - kp));
    const int n = G.n;
    weighted_sup(A, s.boundary_layer,
                 [&](double z, double t, double) { return flag_bound(j, k, jp, kp, eps, n, z, t) / pre; }, r.sup_abs,
                 r.sup_scaled);
    r.sup_ratio = r.sup_scaled / pre;
    return r;
}

double fit_slope(const std::vector<EnvelopeReport>& scan) {
    // Sorted points make the sums, and so the slope, independent of scan order.
    std::vector<std::pair<double, double>> pts;
    std::set<int> gaps;
    for (const EnvelopeReport& r : scan) {
        if (!(r.sup_scaled > 0.0) || !std::isfinite(r.sup_scaled))
            throw Error("fit_slope: report with non-positive or non-finite sup");
        pts.emplace_back(std::abs(r.j - r.jp), std::log(r.sup_scaled));
        gaps.insert(std::abs(r.j - r.jp));
    }
    if (gaps.size() < 4) throw Error("fit_slope: degenerate scan, need >= 4 distinct |j - j'| values");
    std::sort(pts.begin(), pts.end());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double N = static_cast<double>(pts.size());
    return (N * sxy - sx * sy) / (N * sxx - sx * sx);
}

double fit_epsilon(const std::vector<EnvelopeReport>& scan) {
    return std::clamp(-fit_slope(scan) / std::log(2.0), 0.0, 1.0);
}

}  // namespace flagwave
