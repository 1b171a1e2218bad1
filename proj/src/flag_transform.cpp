#include "flagwave/flag_transform.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "flagwave/spectral.hpp"

namespace flagwave {

void ScaleWindow::validate() const {
    if (j_min > j_max || k_min > k_max)
        throw Error("scale window is empty: j in [" + std::to_string(j_min) + ", " + std::to_string(j_max) +
                    "], k in [" + std::to_string(k_min) + ", " + std::to_string(k_max) + "]");
}

std::vector<std::pair<int, int>> ScaleWindow::pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int j = j_min; j <= j_max; ++j)
        for (int k = k_min; k <= k_max; ++k) out.emplace_back(j, k);
    return out;
}

FlagSystem::FlagSystem(const GridSpec& grid, const WaveletSpec& spec, const ScaleWindow& window, int M2)
    : grid_(grid), spec_(spec), window_(window) {
    grid.validate();
    spec.validate();
    window.validate();
    if (spec.n != grid.n) throw Error("FlagSystem: wavelet and grid dimensions differ");
    psi1_ = build_psi1(spec, grid);
    for (int j = window.j_min; j <= window.j_max; ++j) {
        psi1_j_.emplace(j, dilate_psi1(j, psi1_, grid));
        psi1_r_.emplace(j, reflect(psi1_j_.at(j)));
    }
    const ComponentWavelet2 psi2 = build_psi2(M2);
    for (int k = window.k_min; k <= window.k_max; ++k)
        psi2_k_.emplace(k, dilate_psi2(k, psi2, grid.h_t(), grid.points_t - 1));
}

const SampledFunction& FlagSystem::psi1(int j) const {
    const auto it = psi1_j_.find(j);
    if (it == psi1_j_.end()) throw Error("scale j=" + std::to_string(j) + " outside the window");
    return it->second;
}

const SampledFunction& FlagSystem::psi1_reflected(int j) const {
    const auto it = psi1_r_.find(j);
    if (it == psi1_r_.end()) throw Error("scale j=" + std::to_string(j) + " outside the window");
    return it->second;
}

const Sampled1DFunction& FlagSystem::psi2(int k) const {
    const auto it = psi2_k_.find(k);
    if (it == psi2_k_.end()) throw Error("scale k=" + std::to_string(k) + " outside the window");
    return it->second;
}

SampledFunction FlagSystem::flag_atom(int j, int k) const { return partial_convolve_t(psi1(j), psi2(k)); }

DenseAnalysis dense_analysis(const FlagSystem& sys, const SampledFunction& f) {
    if (!(f.grid() == sys.grid())) throw Error("analyze: function and system live on different grids");
    DenseAnalysis d;
    for (int j = sys.window().j_min; j <= sys.window().j_max; ++j) d.F.emplace(j, convolve_spectral(sys.psi1(j), f));
    return d;
}

namespace {

std::vector<std::size_t> node_columns(const std::vector<std::size_t>& nodes, int Pt) {
    std::vector<std::size_t> cols;
    cols.reserve(nodes.size());
    for (std::size_t v : nodes) cols.push_back(v / static_cast<std::size_t>(Pt));
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
}

const SampledFunction& dense_at(const DenseAnalysis& d, int j) {
    const auto it = d.F.find(j);
    if (it == d.F.end()) throw Error("dense analysis lacks scale j=" + std::to_string(j));
    return it->second;
}

}  // namespace

const CoefficientBlock& FlagCoefficients::block(int j, int k) const {
    for (const CoefficientBlock& b : blocks)
        if (b.j == j && b.k == k) return b;
    throw Error("no coefficient block for (j, k) = (" + std::to_string(j) + ", " + std::to_string(k) + ")");
}

CoefficientBlock& FlagCoefficients::block(int j, int k) {
    return const_cast<CoefficientBlock&>(static_cast<const FlagCoefficients&>(*this).block(j, k));
}

std::size_t FlagCoefficients::rectangle_count() const {
    std::size_t c = 0;
    for (const CoefficientBlock& b : blocks) c += b.pattern.rectangles;
    return c;
}

void FlagCoefficients::for_each(const GridSpec& grid, const std::function<void(const Region&, double)>& fn) const {
    for (const CoefficientBlock& b : blocks) {
        for_each_sampling_rectangle(b.j, b.k, N, grid, [&](const Region& r) {
            const std::size_t a = anchor_index(r, grid, policy);
            const auto it = std::lower_bound(b.pattern.nodes.begin(), b.pattern.nodes.end(), a);
            if (it == b.pattern.nodes.end() || *it != a) throw Error("coefficient index set does not match enumeration");
            fn(r, b.values[static_cast<std::size_t>(it - b.pattern.nodes.begin())]);
        });
    }
}

std::string FlagCoefficients::json(const GridSpec& grid) const {
    nlohmann::json arr = nlohmann::json::array();
    for_each(grid, [&](const Region& r, double v) {
        const GroupPoint a = anchor(r, grid, policy);
        arr.push_back({{"j", r.j}, {"k", r.k}, {"N", r.N}, {"index", r.index}, {"anchor", a.coords()}, {"value", v}});
    });
    return arr.dump();
}

FlagCoefficients zero_coefficients(const FlagSystem& sys, int N, AnchorPolicy policy) {
    if (N < 0) throw Error("analyze: N must be >= 0");
    FlagCoefficients c;
    c.window = sys.window();
    c.N = N;
    c.policy = policy;
    for (auto [j, k] : sys.window().pairs()) {
        CoefficientBlock b;
        b.j = j;
        b.k = k;
        b.pattern = sampling_pattern(j, k, N, sys.grid(), policy);
        b.values.assign(b.pattern.nodes.size(), 0.0);
        c.blocks.push_back(std::move(b));
    }
    return c;
}

FlagCoefficients analyze(const FlagSystem& sys, const DenseAnalysis& dense, int N, AnchorPolicy policy) {
    FlagCoefficients c = zero_coefficients(sys, N, policy);
    const int Pt = sys.grid().points_t;
    for (CoefficientBlock& b : c.blocks) {
        const std::vector<std::size_t> cols = node_columns(b.pattern.nodes, Pt);
        const SampledFunction H = partial_convolve_t(dense_at(dense, b.j), sys.psi2(b.k), cols);
        for (std::size_t q = 0; q < b.pattern.nodes.size(); ++q) b.values[q] = H[b.pattern.nodes[q]];
    }
    return c;
}

FlagCoefficients analyze(const FlagSystem& sys, const SampledFunction& f, int N, AnchorPolicy policy) {
    return analyze(sys, dense_analysis(sys, f), N, policy);
}

SampledFunction synthesize(const FlagSystem& sys, const FlagCoefficients& c) {
    if (!(c.window == sys.window())) throw Error("synthesize: coefficient window differs from the system window");
    const GridSpec& g = sys.grid();
    SampledFunction out(g);
    for (int j = sys.window().j_min; j <= sys.window().j_max; ++j) {
        // G_j = sum_k W_{j,k} *_2 psi2_k; the central t-filter commutes with the group translate.
        SampledFunction Gj(g);
        bool any = false;
        for (int k = sys.window().k_min; k <= sys.window().k_max; ++k) {
            const CoefficientBlock& b = c.block(j, k);
            SampledFunction W(g);
            bool nz = false;
            for (std::size_t q = 0; q < b.pattern.nodes.size(); ++q) {
                W[b.pattern.nodes[q]] = b.pattern.weights[q] * b.values[q];
                nz = nz || b.values[q] != 0.0;
            }
            if (!nz) continue;
            Gj += partial_convolve_t(W, sys.psi2(b.k), node_columns(b.pattern.nodes, g.points_t));
            any = true;
        }
        if (any) out += translate_sum_spectral(Gj, sys.psi1_reflected(j));
    }
    return out;
}

SampledFunction reproduce_limit(const FlagSystem& sys, const DenseAnalysis& dense) {
    const GridSpec& g = sys.grid();
    SampledFunction out(g);
    for (int j = sys.window().j_min; j <= sys.window().j_max; ++j) {
        SampledFunction Gj(g);
        for (int k = sys.window().k_min; k <= sys.window().k_max; ++k)
            Gj += partial_convolve_t(partial_convolve_t(dense_at(dense, j), sys.psi2(k)), sys.psi2(k));
        Gj *= g.cell_volume();
        out += translate_sum_spectral(Gj, sys.psi1_reflected(j));
    }
    return out;
}

namespace {

void paint(SampledFunction& S2, const SampledFunction& coeff, double side_z, double side_t, AnchorPolicy policy) {
    const std::vector<std::size_t> m = cell_anchor_map(side_z, side_t, S2.grid(), policy);
    for (std::size_t i = 0; i < S2.size(); ++i) {
        const double c = coeff[m[i]];
        S2[i] += c * c;
    }
}

}  // namespace

SampledFunction square_function(const FlagSystem& sys, const DenseAnalysis& dense, AnchorPolicy policy) {
    const GridSpec& g = sys.grid();
    const ScaleWindow& w = sys.window();
    SampledFunction S2(g);
    for (int j = w.j_min; j <= w.j_max; ++j) {
        (void)cubes_at_scale(j, g);  // range check
        paint(S2, dense_at(dense, j), std::ldexp(1.0, -j), std::ldexp(1.0, -2 * j), policy);
    }
    for (int j = w.j_min; j <= w.j_max; ++j)
        for (int k = w.k_min; k <= std::min(w.k_max, j - 1); ++k) {
            (void)vertical_rectangles(j, k, g).size();  // range check
            const double sz = std::ldexp(1.0, -j), st = std::ldexp(1.0, -2 * k);
            std::vector<std::size_t> anchors = cell_anchor_map(sz, st, g, policy);
            std::sort(anchors.begin(), anchors.end());
            anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
            const SampledFunction H =
                partial_convolve_t(dense_at(dense, j), sys.psi2(k), node_columns(anchors, g.points_t));
            paint(S2, H, sz, st, policy);
        }
    for (std::size_t i = 0; i < S2.size(); ++i) S2[i] = std::sqrt(S2[i]);
    return S2;
}

SampledFunction square_function(const FlagSystem& sys, const SampledFunction& f, AnchorPolicy policy) {
    return square_function(sys, dense_analysis(sys, f), policy);
}

void check_hp_exponent(int n, double p) {
    const double lo = 4.0 * n / (4.0 * n + 1.0);
    if (!(p > lo && p <= 1.0)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "p=%g outside the admissible interval 4n/(4n+1) < p <= 1, i.e. (%g, 1] for n=%d",
                      p, lo, n);
        throw Error(buf);
    }
}

double hp_norm_of(const SampledFunction& S, double p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) acc += std::pow(S[i], p);
    return std::pow(acc * S.grid().cell_volume(), 1.0 / p);
}

double hp_norm(const FlagSystem& sys, const SampledFunction& f, double p, AnchorPolicy policy) {
    check_hp_exponent(sys.grid().n, p);
    return hp_norm_of(square_function(sys, f, policy), p);
}

double fit_scale(const std::vector<SampledFunction>& f, const std::vector<SampledFunction>& Tf) {
    if (f.size() != Tf.size() || f.empty()) throw Error("fit_scale: need matching nonempty lists");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        num += inner(f[i], Tf[i]);
        den += inner(Tf[i], Tf[i]);
    }
    if (!(den > 0.0)) throw Error("fit_scale: reproduced fields vanish");
    return num / den;
}

double reconstruction_error(const FlagSystem& sys, const SampledFunction& f, int N, double s) {
    const double nf = l2_norm(f);
    if (!(nf > 0.0)) throw Error("reconstruction_error: ||f||_2 = 0");
    SampledFunction r = synthesize(sys, analyze(sys, f, N));
    r *= s;
    return l2_norm(f - r) / nf;
}

}  // namespace flagwave
