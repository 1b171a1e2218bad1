#include "flagwave/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace flagwave {

namespace {

constexpr int kMaxZ = 8;

// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// Smallest 2^a 3^b 5^c >= m.
int smooth_length(int m) {
    for (int N = std::max(m, 1);; ++N) {
        int r = N;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return N;
    }
}

// Split-complex spectrum storage: one row of L bins per column.
struct Spectra {
    int L = 0;
    std::vector<double> re, im;
    void resize(std::size_t rows, int L_) {
        L = L_;
        re.assign(rows * static_cast<std::size_t>(L), 0.0);
        im.assign(rows * static_cast<std::size_t>(L), 0.0);
    }
    const double* r(std::size_t row) const { return re.data() + row * static_cast<std::size_t>(L); }
    const double* i(std::size_t row) const { return im.data() + row * static_cast<std::size_t>(L); }
};

struct Pair {
    int f_row;   // row in the F spectra
    int g_row;   // row in the G spectra
    int q0;      // integer part of the t-shift, in samples
    double frac; // linear-interpolation weight of sample q0 + 1
};

class Fft {
public:
    explicit Fft(int N) : N_(N) {
        std::vector<double> in(static_cast<std::size_t>(N));
        std::vector<fftw_complex> out(static_cast<std::size_t>(N / 2 + 1));
        const std::lock_guard<std::mutex> lock(plan_mutex());
        fwd_ = fftw_plan_dft_r2c_1d(N, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        inv_ = fftw_plan_dft_c2r_1d(N, out.data(), in.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    ~Fft() {
        const std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }
    // Forward transform of `len` samples zero-padded to N.
    void forward(const double* x, int len, double* re, double* im) const {
        std::vector<double> in(static_cast<std::size_t>(N_), 0.0);
        std::copy(x, x + len, in.begin());
        std::vector<fftw_complex> out(static_cast<std::size_t>(N_ / 2 + 1));
        fftw_execute_dft_r2c(fwd_, in.data(), out.data());
        for (int l = 0; l <= N_ / 2; ++l) {
            re[l] = out[static_cast<std::size_t>(l)][0];
            im[l] = out[static_cast<std::size_t>(l)][1];
        }
    }
    // Inverse transform (unnormalised) of a half spectrum; writes N samples.
    void inverse(const double* re, const double* im, double* x) const {
        std::vector<fftw_complex> in(static_cast<std::size_t>(N_ / 2 + 1));
        for (int l = 0; l <= N_ / 2; ++l) {
            in[static_cast<std::size_t>(l)][0] = re[l];
            in[static_cast<std::size_t>(l)][1] = im[l];
        }
        fftw_execute_dft_c2r(inv_, in.data(), x);
    }

private:
    int N_;
    fftw_plan fwd_{};
    fftw_plan inv_{};
};

bool column_nonzero(const double* v, int Pt) {
    for (int t = 0; t < Pt; ++t)
        if (v[t] != 0.0) return true;
    return false;
}

// out(x) = weight * sum_y F(y) G(w), w = y^{-1} x (sigma > 0) or x y^{-1} (sigma < 0).
SampledFunction spectral_sum(const SampledFunction& F, const SampledFunction& G, int sigma, double weight) {
    if (!(F.grid() == G.grid())) throw Error("spectral group sum: operands live on different grids");
    const GridSpec& g = F.grid();
    const int n = g.n, D = 2 * n, Pz = g.points_z, Pt = g.points_t;
    if (D > kMaxZ) throw Error("spectral group sum: dimension too large");
    const std::size_t Z = g.columns();
    const double ht = g.h_t();

    std::vector<double> cz(static_cast<std::size_t>(Pz));
    for (int i = 0; i < Pz; ++i) cz[static_cast<std::size_t>(i)] = g.coord_z(i);
    auto unflatten = [&](std::size_t col, int* idx) {
        for (int d = D - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(col % static_cast<std::size_t>(Pz));
            col /= static_cast<std::size_t>(Pz);
        }
    };

    const double* Fv = F.values().data();
    const double* Gv = G.values().data();
    std::vector<std::size_t> fcols;
    for (std::size_t c = 0; c < Z; ++c)
        if (column_nonzero(Fv + c * static_cast<std::size_t>(Pt), Pt)) fcols.push_back(c);
    std::vector<char> gnz(Z);
    for (std::size_t c = 0; c < Z; ++c) gnz[c] = column_nonzero(Gv + c * static_cast<std::size_t>(Pt), Pt) ? 1 : 0;

    SampledFunction out(g);
    if (fcols.empty()) return out;

    // z-differences e = i_x - i_y per axis, offset by Pz - 1. On the cell-centred grid the
    // difference of two nodes falls between nodes of G when Pz is even: G is read through
    // the same multilinear z-weights as the direct sum.
    const int E = 2 * Pz - 1;
    std::size_t ecount = 1;
    for (int d = 0; d < D; ++d) ecount *= static_cast<std::size_t>(E);
    std::vector<int> erow(ecount, -1);
    std::vector<std::vector<double>> gbar;
    {
        int e[kMaxZ];
        for (std::size_t ei = 0; ei < ecount; ++ei) {
            std::size_t r = ei;
            for (int d = D - 1; d >= 0; --d) {
                e[d] = static_cast<int>(r % static_cast<std::size_t>(E)) - (Pz - 1);
                r /= static_cast<std::size_t>(E);
            }
            int i0[kMaxZ];
            double fr[kMaxZ];
            bool out_of_range = false;
            for (int d = 0; d < D; ++d) {
                const double wz = e[d] * g.h_z();
                const double s = (wz + g.half_width_z) / g.h_z() - 0.5;
                const double fl = std::floor(s);
                if (fl < -1.0 || fl > Pz - 1) out_of_range = true;
                i0[d] = static_cast<int>(fl);
                fr[d] = s - fl;
            }
            if (out_of_range) continue;
            std::vector<double> col(static_cast<std::size_t>(Pt), 0.0);
            bool any = false;
            for (int cn = 0; cn < (1 << D); ++cn) {
                double w = 1.0;
                std::size_t c = 0;
                bool inside = true;
                for (int d = 0; d < D; ++d) {
                    const int bit = (cn >> (D - 1 - d)) & 1;
                    const int id = i0[d] + bit;
                    if (id < 0 || id >= Pz) {
                        inside = false;
                        break;
                    }
                    w *= bit ? fr[d] : (1.0 - fr[d]);
                    c = c * static_cast<std::size_t>(Pz) + static_cast<std::size_t>(id);
                }
                if (!inside || w == 0.0 || !gnz[c]) continue;
                any = true;
                const double* v = Gv + c * static_cast<std::size_t>(Pt);
                for (int t = 0; t < Pt; ++t) col[static_cast<std::size_t>(t)] += w * v[t];
            }
            if (!any) continue;
            erow[ei] = static_cast<int>(gbar.size());
            gbar.push_back(std::move(col));
        }
    }
    if (gbar.empty()) return out;

    // Pairs per output column, with the shear converted to a t-offset in samples:
    // G is read at t-index (m_x - m_y) + c, c = 2 s / h_t + (Pt - 1) / 2.
    std::vector<std::vector<Pair>> pairs(Z);
    int qmin = std::numeric_limits<int>::max(), qmax = std::numeric_limits<int>::min();
    {
        int ix[kMaxZ], iy[kMaxZ];
        for (std::size_t xc = 0; xc < Z; ++xc) {
            unflatten(xc, ix);
            for (std::size_t fr = 0; fr < fcols.size(); ++fr) {
                unflatten(fcols[fr], iy);
                std::size_t ei = 0;
                for (int d = 0; d < D; ++d) ei = ei * static_cast<std::size_t>(E) + static_cast<std::size_t>(ix[d] - iy[d] + Pz - 1);
                const int row = erow[ei];
                if (row < 0) continue;
                double shear = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double xx = cz[static_cast<std::size_t>(ix[i])], xy = cz[static_cast<std::size_t>(ix[n + i])];
                    const double yx = cz[static_cast<std::size_t>(iy[i])], yy = cz[static_cast<std::size_t>(iy[n + i])];
                    if (sigma > 0)
                        shear += (-yy) * xx - (-yx) * xy;
                    else
                        shear += xy * (-yx) - xx * (-yy);
                }
                const double c = 2.0 * shear / ht + 0.5 * (Pt - 1);
                const double fl = std::floor(c);
                const int q0 = static_cast<int>(fl);
                pairs[xc].push_back({static_cast<int>(fr), row, q0, c - fl});
                qmin = std::min(qmin, q0);
                qmax = std::max(qmax, q0);
            }
        }
    }
    if (qmin > qmax) return out;

    // Linear output indices m_y + r, r = q - q0 - (0|1), span [-qmax - 1, 2 Pt - 2 - qmin]; the
    // padding keeps every alias outside [0, Pt).
    const int N = smooth_length(std::max({2 * Pt - 1 - qmin, Pt + qmax + 2, Pt}));
    const int L = N / 2 + 1;
    const Fft fft(N);

    Spectra Fs, Gs;
    Fs.resize(fcols.size(), L);
    Gs.resize(gbar.size(), L);
    for (std::size_t r = 0; r < fcols.size(); ++r)
        fft.forward(Fv + fcols[r] * static_cast<std::size_t>(Pt), Pt, Fs.re.data() + r * L, Fs.im.data() + r * L);
    for (std::size_t r = 0; r < gbar.size(); ++r)
        fft.forward(gbar[r].data(), Pt, Gs.re.data() + r * L, Gs.im.data() + r * L);

    // Reading G at index (m_x - m_y) + q0 + {0, 1} multiplies its spectrum by exp(2 pi i l q / N).
    const int Q = qmax - qmin + 2;
    Spectra phase;
    phase.resize(static_cast<std::size_t>(Q), L);
    for (int q = 0; q < Q; ++q) {
        const long qq = static_cast<long>(q + qmin);
        for (int l = 0; l < L; ++l) {
            const long k = ((static_cast<long>(l) * qq) % N + N) % N;
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / N;
            phase.re[static_cast<std::size_t>(q) * L + l] = std::cos(a);
            phase.im[static_cast<std::size_t>(q) * L + l] = std::sin(a);
        }
    }

    double* Ov = out.values().data();
    const double scale = weight / N;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t xc = 0; xc < Z; ++xc) {
        const std::vector<Pair>& P = pairs[xc];
        if (P.empty()) continue;
        std::vector<double> ar(static_cast<std::size_t>(L), 0.0), ai(static_cast<std::size_t>(L), 0.0);
        for (const Pair& p : P) {
            const double* fr_ = Fs.r(static_cast<std::size_t>(p.f_row));
            const double* fi_ = Fs.i(static_cast<std::size_t>(p.f_row));
            const double* gr_ = Gs.r(static_cast<std::size_t>(p.g_row));
            const double* gi_ = Gs.i(static_cast<std::size_t>(p.g_row));
            const double* e0r = phase.r(static_cast<std::size_t>(p.q0 - qmin));
            const double* e0i = phase.i(static_cast<std::size_t>(p.q0 - qmin));
            const double* e1r = phase.r(static_cast<std::size_t>(p.q0 - qmin + 1));
            const double* e1i = phase.i(static_cast<std::size_t>(p.q0 - qmin + 1));
            const double w0 = 1.0 - p.frac, w1 = p.frac;
            for (int l = 0; l < L; ++l) {
                const double pr = w0 * e0r[l] + w1 * e1r[l];
                const double pi = w0 * e0i[l] + w1 * e1i[l];
                const double br = fr_[l] * gr_[l] - fi_[l] * gi_[l];
                const double bi = fr_[l] * gi_[l] + fi_[l] * gr_[l];
                ar[static_cast<std::size_t>(l)] += br * pr - bi * pi;
                ai[static_cast<std::size_t>(l)] += br * pi + bi * pr;
            }
        }
        std::vector<double> col(static_cast<std::size_t>(N));
        fft.inverse(ar.data(), ai.data(), col.data());
        double* o = Ov + xc * static_cast<std::size_t>(Pt);
        for (int t = 0; t < Pt; ++t) o[t] = col[static_cast<std::size_t>(t)] * scale;
    }
    return out;
}

}  // namespace

SampledFunction convolve_spectral(const SampledFunction& f, const SampledFunction& g) {
    return spectral_sum(f, g, +1, f.grid().cell_volume());
}

SampledFunction translate_sum_spectral(const SampledFunction& W, const SampledFunction& g) {
    return spectral_sum(W, g, -1, 1.0);
}

SampledFunction partial_convolve_t_spectral(const SampledFunction& f, const Sampled1DFunction& w) {
    const GridSpec& g = f.grid();
    if (std::abs(w.h - g.h_t()) > 1e-12 * g.h_t()) throw Error("t-convolution: kernel spacing differs from h_t");
    const int Pt = g.points_t, K = 2 * w.half + 1;
    const int N = smooth_length(Pt + K - 1);
    const Fft fft(N);
    const int L = N / 2 + 1;
    std::vector<double> wr(static_cast<std::size_t>(L)), wi(static_cast<std::size_t>(L));
    fft.forward(w.values.data(), K, wr.data(), wi.data());
    SampledFunction out(g);
    const double* Fv = f.values().data();
    double* Ov = out.values().data();
    const double scale = w.h / N;
    const auto Z = static_cast<std::ptrdiff_t>(g.columns());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < Z; ++c) {
        const double* v = Fv + static_cast<std::size_t>(c) * static_cast<std::size_t>(Pt);
        if (!column_nonzero(v, Pt)) continue;
        std::vector<double> ar(static_cast<std::size_t>(L)), ai(static_cast<std::size_t>(L));
        fft.forward(v, Pt, ar.data(), ai.data());
        for (int l = 0; l < L; ++l) {
            const double r = ar[l] * wr[l] - ai[l] * wi[l];
            ai[l] = ar[l] * wi[l] + ai[l] * wr[l];
            ar[l] = r;
        }
        std::vector<double> col(static_cast<std::size_t>(N));
        fft.inverse(ar.data(), ai.data(), col.data());
        double* o = Ov + static_cast<std::size_t>(c) * static_cast<std::size_t>(Pt);
        for (int t = 0; t < Pt; ++t) o[t] = col[static_cast<std::size_t>(t + w.half)] * scale;
    }
    return out;
}

}  // namespace flagwave
