#include "flagwave/wavelets.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <json.hpp>
#include <string>

namespace flagwave {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string scale_tag(int j) { return "scale j=" + std::to_string(j); }

// Parity of a monomial under g -> g^{-1} = (-z, -u).
bool is_even(const Monomial& m) {
    int s = m.beta;
    for (int a : m.alpha) s += a;
    return s % 2 == 0;
}

void enumerate(int n, int d, std::vector<int>& alpha, int axis, int used, std::vector<Monomial>& out) {
    if (axis == 2 * n) {
        for (int beta = 0; used + 2 * beta <= d; ++beta) out.push_back({alpha, beta});
        return;
    }
    for (int a = 0; used + a <= d; ++a) {
        alpha[axis] = a;
        enumerate(n, d, alpha, axis + 1, used + a, out);
    }
    alpha[axis] = 0;
}

// Node coordinates scaled to (z/a, u/a^2).
void scaled_coords(const GridSpec& g, std::size_t i, double a, std::vector<double>& c) {
    g.node_coords(i, c);
    const int A = g.axes();
    for (int ax = 0; ax < A - 1; ++ax) c[ax] /= a;
    c[A - 1] /= a * a;
}

double smooth_step_theta(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / (s * s));
    const double b = std::exp(-1.0 / ((1.0 - s) * (1.0 - s)));
    return a / (a + b);
}

// Smallest power of two >= x.
double pow2_at_least(double x) {
    double p = 1.0;
    while (p < x) p *= 2.0;
    return p;
}

// 2 int_lo^hi S(eta) cos(2 pi eta v) d eta by the trapezoid rule with spacing 1/P.
// S and all its derivatives vanish at lo and hi, so the rule equals the P-periodisation
// of the exact integral; P is chosen so the aliased copies are negligible.
std::vector<double> band_integral(double lo, double hi, const std::function<double(double)>& S,
                                  std::span<const double> v, double decay_length) {
    std::vector<double> out(v.size(), 0.0);
    if (!(hi > lo)) return out;
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    const double P = pow2_at_least(std::max(512.0, 4.0 * (vmax + 64.0 * decay_length)));
    const long m0 = static_cast<long>(std::floor(lo * P)), m1 = static_cast<long>(std::ceil(hi * P));
    std::vector<double> spec;
    std::vector<long> ms;
    for (long m = m0; m <= m1; ++m) {
        const double s = S(static_cast<double>(m) / P);
        if (s != 0.0) {
            spec.push_back(s);
            ms.push_back(m);
        }
    }
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double av = std::abs(v[i]);
        double acc = 0.0;
        for (std::size_t q = 0; q < ms.size(); ++q) {
            // Reduce m v / P modulo 1 before the cosine.
            const double r = std::fmod(static_cast<double>(ms[q]) * av, P) / P;
            acc += spec[q] * std::cos(kTwoPi * r);
        }
        out[i] = 2.0 * acc / P;
    }
    return out;
}

// Subtracts window * sum_{even gamma <= M} a_gamma (v/V)^gamma so that the even moments
// of the samples vanish at quadrature. The correction is even, so evenness survives.
void project_even_moments_1d(Sampled1DFunction& f, int M) {
    const int H = f.half;
    if (H == 0) {
        f.values[0] = 0.0;
        return;
    }
    const double V = (H + 1) * f.h;
    std::vector<int> gam;
    for (int g = 0; g <= M; g += 2) gam.push_back(g);
    const int K = static_cast<int>(gam.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K, K);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(K);
    std::vector<double> win(2 * H + 1);
    for (int m = -H; m <= H; ++m) {
        const double s = std::abs(m * f.h) / V;
        win[m + H] = s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    }
    for (int m = -H; m <= H; ++m) {
        const double s = std::abs(m * f.h) / V;
        for (int a = 0; a < K; ++a) {
            const double pa = std::pow(s, gam[a]);
            mu(a) += pa * f.values[m + H];
            for (int b = 0; b < K; ++b) G(a, b) += pa * std::pow(s, gam[b]) * win[m + H];
        }
    }
    const Eigen::VectorXd c = G.ldlt().solve(mu);
    for (int m = -H; m <= H; ++m) {
        const double s = std::abs(m * f.h) / V;
        double p = 0.0;
        for (int a = 0; a < K; ++a) p += c(a) * std::pow(s, gam[a]);
        f.values[m + H] -= win[m + H] * p;
    }
}

}  // namespace

void WaveletSpec::validate() const {
    if (n < 1) throw Error("WaveletSpec: n must be >= 1");
    if (M < 0) throw Error("WaveletSpec: M must be >= 0");
    if (!(r0 > 0.0) || !std::isfinite(r0)) throw Error("WaveletSpec: support radius must be positive");
}

int Monomial::degree() const {
    int d = 2 * beta;
    for (int a : alpha) d += a;
    return d;
}

double Monomial::eval(const double* c, int n) const {
    double v = 1.0;
    for (int ax = 0; ax < 2 * n; ++ax)
        for (int p = 0; p < alpha[ax]; ++p) v *= c[ax];
    for (int p = 0; p < beta; ++p) v *= c[2 * n];
    return v;
}

std::vector<Monomial> monomials_up_to(int n, int d) {
    std::vector<Monomial> all;
    std::vector<int> alpha(2 * n, 0);
    enumerate(n, d, alpha, 0, 0, all);
    std::stable_sort(all.begin(), all.end(),
                     [](const Monomial& a, const Monomial& b) { return a.degree() < b.degree(); });
    return all;
}

double bump_profile(const double* c, int n, double r) {
    double z2 = 0.0;
    for (int ax = 0; ax < 2 * n; ++ax) z2 += c[ax] * c[ax];
    const double r2 = r * r;
    const double q = (z2 * z2 + c[2 * n] * c[2 * n]) / (r2 * r2);
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
}

double ComponentWavelet1::value(const double* coords) const {
    const int n = spec.n;
    std::vector<double> s(coords, coords + 2 * n + 1);
    for (int ax = 0; ax < 2 * n; ++ax) s[ax] /= spec.r0;
    s[2 * n] /= spec.r0 * spec.r0;
    const double b = bump_profile(s.data(), n, 1.0);
    if (b == 0.0) return 0.0;
    double p = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) p += coeffs[i] * basis[i].eval(s.data(), n);
    return p * b;
}

namespace {

// Subtracts B_j * sum_{deg <= M, even} a_m m so that every moment of degree <= M vanishes
// at quadrature on f's grid.
void project_moments(SampledFunction& f, int M, double a, int n) {
    const GridSpec& g = f.grid();
    std::vector<Monomial> cons;
    for (const Monomial& mono : monomials_up_to(n, M))
        if (is_even(mono)) cons.push_back(mono);
    const int K = static_cast<int>(cons.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K, K);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(K);
    std::vector<double> c(g.axes()), mv(K);
    for (std::size_t i = 0; i < g.size(); ++i) {
        scaled_coords(g, i, a, c);
        const double b = bump_profile(c.data(), n, 1.0);
        if (b == 0.0 && f[i] == 0.0) continue;
        for (int r = 0; r < K; ++r) mv[r] = cons[r].eval(c.data(), n);
        for (int r = 0; r < K; ++r) {
            mu(r) += mv[r] * f[i];
            for (int q = 0; q < K; ++q) G(r, q) += mv[r] * mv[q] * b;
        }
    }
    const Eigen::VectorXd x = G.colPivHouseholderQr().solve(mu);
    for (std::size_t i = 0; i < g.size(); ++i) {
        scaled_coords(g, i, a, c);
        const double b = bump_profile(c.data(), n, 1.0);
        if (b == 0.0) continue;
        double p = 0.0;
        for (int r = 0; r < K; ++r) p += x(r) * cons[r].eval(c.data(), n);
        f[i] -= p * b;
    }
}

}  // namespace

ComponentWavelet1 build_psi1(const WaveletSpec& spec, const GridSpec& grid) {
    spec.validate();
    grid.validate();
    if (grid.n != spec.n) throw Error("build_psi1: grid dimension differs from spec");
    check_psi1_scale(0, spec, grid);

    const int n = spec.n, M = spec.M;
    // Witness |xi|^{2m}, degree above M; the multiplier needs degree > M because a
    // polynomial of degree <= M orthogonal to all such monomials under B is zero.
    const int m = M / 2 + 1;
    std::vector<Monomial> basis, cons;
    for (const Monomial& mono : monomials_up_to(n, M + 2))
        if (is_even(mono)) basis.push_back(mono);
    for (const Monomial& mono : monomials_up_to(n, M))
        if (is_even(mono)) cons.push_back(mono);

    // The multiplier is fixed by a fine midpoint rule on the unit cube, so the profile
    // does not depend on the sampling grid; only the final projection does.
    const int nb = static_cast<int>(basis.size()), nc = static_cast<int>(cons.size());
    const GridSpec unit{n, 1.0, 1.0, n == 1 ? 128 : 16, n == 1 ? 128 : 32};
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nc + 1, nb);
    Eigen::MatrixXd L2 = Eigen::MatrixXd::Zero(nb, nb);
    constexpr int kBatch = 2048;
    Eigen::MatrixXd Bv(kBatch, nb), Cv(kBatch, nc + 1);
    int rows = 0;
    auto flush = [&] {
        A.noalias() += Cv.topRows(rows).transpose() * Bv.topRows(rows);
        L2.noalias() += Bv.topRows(rows).transpose() * Bv.topRows(rows);
        rows = 0;
    };
    std::vector<double> c(unit.axes());
    for (std::size_t i = 0; i < unit.size(); ++i) {
        unit.node_coords(i, c);
        const double b = bump_profile(c.data(), n, 1.0);
        if (b == 0.0) continue;
        for (int q = 0; q < nb; ++q) Bv(rows, q) = basis[q].eval(c.data(), n) * b;
        double z2 = 0.0;
        for (int ax = 0; ax < 2 * n; ++ax) z2 += c[ax] * c[ax];
        for (int r = 0; r < nc; ++r) Cv(rows, r) = cons[r].eval(c.data(), n);
        Cv(rows, nc) = std::pow(z2, m);
        if (++rows == kBatch) flush();
    }
    flush();
    // Minimise ||pB||_2 subject to the constraints: x = L2^{-1} A^T (A L2^{-1} A^T)^{-1} e.
    const Eigen::LDLT<Eigen::MatrixXd> l2f(L2);
    const Eigen::MatrixXd LiAt = l2f.solve(A.transpose());
    const Eigen::MatrixXd S = A * LiAt;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond < 1e14) || l2f.info() != Eigen::Success)
        throw Error("build_psi1: singular moment Gram matrix, condition number " + std::to_string(cond));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc + 1);
    rhs(nc) = 1.0;
    Eigen::VectorXd x = LiAt * S.ldlt().solve(rhs);
    // Unit L2 norm of the profile at radius r0: int (pB)^2 over the r0-ball scales by r0^Q.
    const double norm2 = x.dot(L2 * x) * unit.cell_volume() * std::pow(spec.r0, Dimension(n).Q());
    x /= std::sqrt(norm2);

    ComponentWavelet1 out;
    out.spec = spec;
    out.basis = basis;
    out.gram_condition = cond;
    out.coeffs.assign(x.data(), x.data() + nb);
    SampledFunction f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.node_coords(i, c);
        f[i] = out.value(c.data());
    }
    project_moments(f, M, spec.r0, n);
    out.samples = std::move(f);
    return out;
}

void check_psi1_scale(int j, const WaveletSpec& spec, const GridSpec& grid) {
    const double rz = spec.r0 * std::ldexp(1.0, -j);
    const double rt = spec.r0 * spec.r0 * std::ldexp(1.0, -2 * j);
    if (rz > grid.half_width_z || rt > grid.half_width_t)
        throw Error("support overflow at " + scale_tag(j) + ": radius " + std::to_string(rz) + " x " +
                    std::to_string(rt) + " exceeds box " + std::to_string(grid.half_width_z) + " x " +
                    std::to_string(grid.half_width_t));
    if (2.0 * rz < 8.0 * grid.h_z() || 2.0 * rt < 8.0 * grid.h_t())
        throw Error("under-resolved support at " + scale_tag(j) + ": fewer than 8 cells per axis across it");
}


SampledFunction dilate_psi1(int j, const ComponentWavelet1& psi, const GridSpec& target) {
    if (target.n != psi.spec.n) throw Error("dilate_psi1: dimension mismatch");
    if (j == 0 && target == psi.samples.grid()) return psi.samples;
    check_psi1_scale(j, psi.spec, target);
    const double s = std::ldexp(1.0, j);
    const double amp = std::pow(s, Dimension(psi.spec.n).Q());
    const int A = target.axes();
    SampledFunction f(target);
    std::vector<double> c(A);
    for (std::size_t i = 0; i < target.size(); ++i) {
        target.node_coords(i, c);
        for (int ax = 0; ax < A - 1; ++ax) c[ax] *= s;
        c[A - 1] *= s * s;
        f[i] = amp * psi.value(c.data());
    }
    project_moments(f, psi.spec.M, psi.spec.r0 / s, psi.spec.n);
    return f;
}

SampledFunction dilate_bump(int j, const WaveletSpec& spec, const GridSpec& target) {
    check_psi1_scale(j, spec, target);
    const double a = spec.r0 * std::ldexp(1.0, -j);
    SampledFunction f(target);
    std::vector<double> c(target.axes());
    for (std::size_t i = 0; i < target.size(); ++i) {
        scaled_coords(target, i, a, c);
        f[i] = bump_profile(c.data(), spec.n, 1.0);
    }
    f *= 1.0 / integrate(f);
    return f;
}

std::vector<MomentResidual> moments(const SampledFunction& f, int M, double a) {
    const GridSpec& g = f.grid();
    const std::vector<Monomial> all = monomials_up_to(g.n, M);
    std::vector<MomentResidual> out;
    std::vector<double> sum(all.size(), 0.0), abs_sum(all.size(), 0.0), c(g.axes());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (f[i] == 0.0) continue;
        scaled_coords(g, i, a, c);
        for (std::size_t q = 0; q < all.size(); ++q) {
            const double v = all[q].eval(c.data(), g.n) * f[i];
            sum[q] += v;
            abs_sum[q] += std::abs(v);
        }
    }
    const double w = g.cell_volume();
    for (std::size_t q = 0; q < all.size(); ++q)
        out.push_back({all[q], sum[q] * w, abs_sum[q] > 0.0 ? std::abs(sum[q]) / abs_sum[q] : 0.0});
    return out;
}

// ---------------------------------------------------------------- psi^(2)

double ComponentWavelet2::partition(double s) {
    return s <= 0.0 ? smooth_step_theta(s + 1.0) : smooth_step_theta(1.0 - s);
}

double ComponentWavelet2::hat(double eta) {
    const double a = std::abs(eta);
    if (a <= 0.5 || a >= 2.0) return 0.0;
    return std::sqrt(partition(std::log2(a)));
}

double ComponentWavelet2::value(double v) {
    const double x[1] = {v};
    return band_integral(0.5, 2.0, &ComponentWavelet2::hat, x, 1.0)[0];
}

ComponentWavelet2 build_psi2(int M2) {
    if (M2 < 1) throw Error("build_psi2: M2 must be >= 1");
    // Master axis: spacing far below the Nyquist limit of the band, extent well past the tails.
    constexpr double h = 1.0 / 128.0;
    constexpr int half = 128 * 128;
    ComponentWavelet2 out;
    out.M2 = M2;
    out.samples = Sampled1DFunction(h, half);
    std::vector<double> v(half + 1);
    for (int m = 0; m <= half; ++m) v[m] = m * h;
    const std::vector<double> val = band_integral(0.5, 2.0, &ComponentWavelet2::hat, v, 1.0);
    for (int m = -half; m <= half; ++m) out.samples.values[m + half] = val[std::abs(m)];
    project_even_moments_1d(out.samples, M2);
    return out;
}

Sampled1DFunction dilate_psi2(int k, const ComponentWavelet2& psi, double h, int half) {
    const double s = std::ldexp(1.0, k);
    if (2.0 * s > 0.5 / h)
        throw Error("band not resolvable at scale k=" + std::to_string(k) + ": band edge " + std::to_string(2.0 * s) +
                    " exceeds Nyquist " + std::to_string(0.5 / h));
    if (s * half * h < 16.0)
        throw Error("kernel truncated at scale k=" + std::to_string(k) + ": extent " + std::to_string(half * h) +
                    " covers fewer than 16 wavelet units");
    Sampled1DFunction out(h, half);
    std::vector<double> v(half + 1);
    for (int m = 0; m <= half; ++m) v[m] = s * m * h;
    const std::vector<double> val = band_integral(0.5, 2.0, &ComponentWavelet2::hat, v, 1.0);
    for (int m = -half; m <= half; ++m) out.values[m + half] = s * val[std::abs(m)];
    project_even_moments_1d(out, psi.M2);
    return out;
}

Sampled1DFunction psi2_pair_kernel(int k, int kp, double h, int half) {
    Sampled1DFunction out(h, half);
    if (std::abs(k - kp) >= 2) return out;
    const double s = std::ldexp(1.0, k), sp = std::ldexp(1.0, kp);
    // The product spectrum lives on the band overlap, so only its upper edge must sit below Nyquist.
    const double lo = 0.5 * std::max(s, sp), hi = 2.0 * std::min(s, sp);
    if (hi > 0.5 / h)
        throw Error("band not resolvable for pair (" + std::to_string(k) + "," + std::to_string(kp) + ")");
    auto S = [&](double eta) { return ComponentWavelet2::hat(eta / s) * ComponentWavelet2::hat(eta / sp); };
    std::vector<double> v(half + 1);
    for (int m = 0; m <= half; ++m) v[m] = m * h;
    const std::vector<double> val = band_integral(lo, hi, S, v, 1.0 / std::min(s, sp));
    for (int m = -half; m <= half; ++m) out.values[m + half] = val[std::abs(m)];
    return out;
}

double sampled_spectrum(const Sampled1DFunction& f, double eta) {
    double acc = 0.0;
    for (int m = -f.half; m <= f.half; ++m)
        acc += f.values[static_cast<std::size_t>(m + f.half)] * std::cos(2.0 * std::numbers::pi * eta * m * f.h);
    return acc * f.h;
}

double calderon_sum(const ComponentWavelet2& psi, double eta, int k_lo, int k_hi) {
    double s = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
        const double a = sampled_spectrum(psi.samples, std::ldexp(eta, -k));
        s += a * a;
    }
    return s;
}

std::vector<double> moments_1d(const Sampled1DFunction& f, int M) {
    std::vector<double> out;
    for (int g = 0; g <= M; ++g) {
        double s = 0.0, a = 0.0;
        for (int m = -f.half; m <= f.half; ++m) {
            const double t = std::pow(m * f.h, g) * f.values[m + f.half];
            s += t;
            a += std::abs(t);
        }
        out.push_back(a > 0.0 ? std::abs(s) / a : 0.0);
    }
    return out;
}

FlagWavelet flag_wavelet(int j, int k, const ComponentWavelet1& psi1, const ComponentWavelet2& psi2,
                         const GridSpec& grid) {
    const SampledFunction p1 = dilate_psi1(j, psi1, grid);
    const Sampled1DFunction p2 = dilate_psi2(k, psi2, grid.h_t(), grid.points_t - 1);
    return {j, k, partial_convolve_t(p1, p2)};
}

std::string wavelet_metadata(const WaveletSpec& spec, int j, int k) {
    nlohmann::json meta{{"M", spec.M}, {"r0", spec.r0}, {"n", spec.n}, {"j", j}, {"k", k}};
    return meta.dump();
}

}  // namespace flagwave
