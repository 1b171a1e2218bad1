#include "flagwave/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "flagwave/rng.hpp"

namespace flagwave {

KernelProfile parse_profile(const std::string& name) {
    if (name == "riesz_x1") return KernelProfile::riesz_x1;
    if (name == "riesz_y1") return KernelProfile::riesz_y1;
    if (name == "central_t") return KernelProfile::central_t;
    if (name == "zero") return KernelProfile::zero;
    if (name == "custom") return KernelProfile::custom;
    throw Error("unknown kernel profile '" + name + "' (expected riesz_x1, riesz_y1, central_t, zero, custom)");
}

std::string profile_name(KernelProfile p) {
    switch (p) {
        case KernelProfile::riesz_x1: return "riesz_x1";
        case KernelProfile::riesz_y1: return "riesz_y1";
        case KernelProfile::central_t: return "central_t";
        case KernelProfile::custom: return "custom";
        case KernelProfile::zero: return "zero";
    }
    return "?";
}

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

double smooth_gauge(const double* c, int n) {
    double z2 = 0.0;
    for (int a = 0; a < 2 * n; ++a) z2 += c[a] * c[a];
    return std::sqrt(std::sqrt(z2 * z2 + c[2 * n] * c[2 * n]));
}

KernelSpec KernelSpec::defaults(KernelProfile p, const GridSpec& grid) {
    KernelSpec s;
    s.profile = p;
    s.n = grid.n;
    s.eps_in = 2.0 * grid.h_z();
    s.R_out = 0.5 * grid.half_width_z;
    return s;
}

void KernelSpec::validate() const {
    if (n < 1) throw Error("kernel: n must be >= 1");
    if (!(eps_in > 0.0) || !(R_out > 0.0)) throw Error("kernel: cuts must be positive");
    if (!(eps_in < R_out))
        throw Error("kernel: need eps_in < R_out (eps_in=" + std::to_string(eps_in) + ", R_out=" +
                    std::to_string(R_out) + ")");
    if (profile == KernelProfile::custom && !samples) throw Error("kernel: custom profile needs samples");
}

double KernelSpec::profile_value(const double* c) const {
    const double r = smooth_gauge(c, n);
    if (r == 0.0) return 0.0;
    const int Q = 2 * n + 2;
    switch (profile) {
        case KernelProfile::riesz_x1: return c[0] / std::pow(r, Q + 1);
        case KernelProfile::riesz_y1: return c[n] / std::pow(r, Q + 1);
        case KernelProfile::central_t: return c[2 * n] / std::pow(r, Q + 2);
        case KernelProfile::custom: return samples->interpolate(std::span<const double>(c, 2 * n + 1));
        case KernelProfile::zero: return 0.0;
    }
    return 0.0;
}

double KernelSpec::cutoff(const double* c) const {
    const double r = smooth_gauge(c, n);
    return smooth_step((r - eps_in) / eps_in) * smooth_step((R_out - r) / (0.5 * R_out));
}

double KernelSpec::value(const double* c) const {
    if (profile == KernelProfile::zero) return 0.0;
    if (profile == KernelProfile::custom) return scale * profile_value(c);
    const double cut = cutoff(c);
    return cut == 0.0 ? 0.0 : scale * cut * profile_value(c);
}

int KernelSpec::odd_axis() const {
    switch (profile) {
        case KernelProfile::riesz_x1: return 0;
        case KernelProfile::riesz_y1: return n;
        case KernelProfile::central_t: return 2 * n;
        default: return -1;
    }
}

SampledFunction make_kernel(const KernelSpec& spec, const GridSpec& grid) {
    spec.validate();
    if (spec.n != grid.n) throw Error("make_kernel: dimension mismatch");
    if (spec.profile == KernelProfile::custom) {
        SampledFunction K = resample(*spec.samples, grid);
        K *= spec.scale;
        return K;
    }
    if (spec.eps_in < grid.h_z())
        throw Error("make_kernel: inner cut " + std::to_string(spec.eps_in) + " below grid spacing " +
                    std::to_string(grid.h_z()));
    if (spec.R_out > grid.half_width_z || spec.R_out * spec.R_out > grid.half_width_t)
        throw Error("make_kernel: outer cut " + std::to_string(spec.R_out) + " does not fit the box");
    SampledFunction K(grid);
    std::vector<double> c(grid.axes());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.node_coords(i, c);
        K[i] = spec.value(c.data());
    }
    return K;
}

std::string SizeCertificate::json(const KernelSpec& spec) const {
    return nlohmann::json{{"C0", C0},          {"C1", C1},         {"C2", C2},
                          {"eps_in", spec.eps_in}, {"R_out", spec.R_out}, {"profile", profile_name(spec.profile)}}
        .dump();
}

SizeCertificate verify_size_smoothness(const SampledFunction& K, double eps_in, double R_out) {
    const GridSpec& g = K.grid();
    const int n = g.n, Q = 2 * n + 2;
    std::vector<SampledFunction> dz;
    for (int a = 0; a < 2 * n; ++a) dz.push_back(partial_derivative(a, K));
    const SampledFunction dt = partial_derivative(2 * n, K);
    SizeCertificate c;
    std::vector<double> x(g.axes());
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.node_coords(i, x);
        const double rb = smooth_gauge(x.data(), n);
        if (rb < 2.0 * eps_in || rb > 0.5 * R_out) continue;
        double z2 = 0.0;
        for (int a = 0; a < 2 * n; ++a) z2 += x[a] * x[a];
        const double rho = std::max(std::sqrt(z2), std::sqrt(std::abs(x[2 * n])));
        double grad = 0.0;
        for (int a = 0; a < 2 * n; ++a) grad += dz[a][i] * dz[a][i];
        c.C0 = std::max(c.C0, std::pow(rho, Q) * std::abs(K[i]));
        c.C1 = std::max(c.C1, std::pow(rho, Q + 1) * std::sqrt(grad));
        c.C2 = std::max(c.C2, std::pow(rho, Q + 2) * std::abs(dt[i]));
    }
    return c;
}

namespace {

double bump4(const double* c, int n, const double* shift, double radius) {
    std::vector<double> d(c, c + 2 * n + 1);
    for (int a = 0; a <= 2 * n; ++a) d[a] -= shift[a];
    const double r = smooth_gauge(d.data(), n) / radius;
    const double q = r * r * r * r;
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
}

// Largest |d^I f| over |I| <= 2, by pointwise central differences of the closed form. A
// lattice scan locates candidates, then coordinate search refines the best ones: grid
// differencing underestimates the narrow second-derivative peaks near the support edge.
double pointwise_sup(const std::function<double(const double*)>& f, int A, const double* x) {
    constexpr double h = 1e-4;
    std::vector<double> y(x, x + A);
    const double f0 = f(x);
    double m = std::abs(f0);
    auto at = [&](int a, double da, int b, double db) {
        y[a] += da;
        y[b] += db;
        const double v = f(y.data());
        y[a] -= da;
        y[b] -= db;
        return v;
    };
    for (int a = 0; a < A; ++a) {
        const double fp = at(a, h, a, 0.0), fm = at(a, -h, a, 0.0);
        m = std::max(m, std::abs(fp - fm) / (2.0 * h));
        m = std::max(m, std::abs(fp - 2.0 * f0 + fm) / (h * h));
        for (int b = a + 1; b < A; ++b) {
            const double v = at(a, h, b, h) - at(a, h, b, -h) - at(a, -h, b, h) + at(a, -h, b, -h);
            m = std::max(m, std::abs(v) / (4.0 * h * h));
        }
    }
    return m;
}

double derivative_sup(const std::function<double(const double*)>& f, int n) {
    const int A = 2 * n + 1;
    const int P = n == 1 ? 48 : 12;
    const double step = 2.0 / P;
    std::vector<std::pair<double, std::vector<double>>> cand;
    std::vector<int> idx(A, 0);
    std::vector<double> x(A);
    while (true) {
        for (int a = 0; a < A; ++a) x[a] = -1.0 + (idx[a] + 0.5) * step;
        cand.emplace_back(pointwise_sup(f, A, x.data()), x);
        int a = A - 1;
        while (a >= 0 && ++idx[a] == P) idx[a--] = 0;
        if (a < 0) break;
    }
    const std::size_t keep = std::min<std::size_t>(24, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(keep), cand.end(),
                      [](const auto& p, const auto& q) { return p.first > q.first; });
    double best = cand.front().first;
    for (std::size_t c = 0; c < keep; ++c) {
        std::vector<double> p = cand[c].second;
        double v = cand[c].first;
        for (double s = step / 2.0; s > 1e-3; s /= 2.0) {
            bool moved = true;
            while (moved) {
                moved = false;
                for (int a = 0; a < A; ++a)
                    for (double dir : {-s, s}) {
                        p[a] += dir;
                        const double w = pointwise_sup(f, A, p.data());
                        if (w > v) {
                            v = w;
                            moved = true;
                        } else {
                            p[a] -= dir;
                        }
                    }
            }
        }
        best = std::max(best, v);
    }
    return best;
}

Bump normalised(std::function<double(const double*)> raw, int n, std::string label) {
    const double s = derivative_sup(raw, n);
    return {[raw, s](const double* c) { return raw(c) / s; }, std::move(label)};
}

}  // namespace

Bump even_bump(int n) {
    const std::vector<double> zero(2 * n + 1, 0.0);
    return normalised([n, zero](const double* c) { return bump4(c, n, zero.data(), 1.0); }, n, "even");
}

std::vector<Bump> bump_family(int n, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Bump> out;
    for (int i = 0; i < count; ++i) {
        // Radius 0.7 and shifts <= 0.2 keep the support inside the unit ball.
        std::vector<double> shift(2 * n + 1);
        for (double& s : shift) s = rng.uniform(-0.2, 0.2);
        std::vector<double> tilt(2 * n + 1);
        for (double& s : tilt) s = rng.uniform(-1.0, 1.0);
        const double cross = rng.uniform(-1.0, 1.0);
        auto raw = [n, shift, tilt, cross](const double* c) {
            const double b = bump4(c, n, shift.data(), 0.7);
            if (b == 0.0) return 0.0;
            double p = 1.0 + cross * c[0] * c[2 * n];
            for (int a = 0; a <= 2 * n; ++a) p += tilt[a] * c[a];
            return b * p;
        };
        out.push_back(normalised(raw, n, "generic" + std::to_string(i)));
    }
    return out;
}

PairingReport bump_cancellation_test(const KernelSpec& K, const std::vector<Bump>& family,
                                     const std::vector<double>& r_list, int points_per_axis) {
    K.validate();
    PairingReport rep;
    const int n = K.n;
    for (double r : r_list) {
        if (!(r > 0.0)) throw Error("bump_cancellation_test: r must be positive");
        // phi(delta_r .) lives in the ball of radius 1/r.
        if (K.profile != KernelProfile::custom && 1.0 / r < 2.0 * K.eps_in) {
            rep.skipped_r.push_back(r);
            continue;
        }
        const GridSpec g{n, 1.0 / r, 1.0 / (r * r), points_per_axis, points_per_axis};
        std::vector<double> kv(g.size()), c(g.axes()), d(g.axes());
        for (std::size_t i = 0; i < g.size(); ++i) {
            g.node_coords(i, c);
            kv[i] = K.value(c.data());
        }
        double worst = 0.0;
        for (const Bump& b : family) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (kv[i] == 0.0) continue;
                g.node_coords(i, c);
                for (int a = 0; a < 2 * n; ++a) d[a] = r * c[a];
                d[2 * n] = r * r * c[2 * n];
                acc += kv[i] * b.fn(d.data());
            }
            worst = std::max(worst, std::abs(acc * g.cell_volume()));
        }
        rep.r_values.push_back(r);
        rep.per_r.push_back(worst);
        rep.max_pairing = std::max(rep.max_pairing, worst);
    }
    return rep;
}

SampledFunction apply(const SampledFunction& K, const SampledFunction& f) { return convolve(f, K); }

}  // namespace flagwave
