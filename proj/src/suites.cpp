#include "flagwave/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "flagwave/fields.hpp"
#include "flagwave/maximal.hpp"
#include "flagwave/ortho_lab.hpp"
#include "flagwave/spectral.hpp"

namespace flagwave {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"moments", "convolution", "reproduce", "ortho",
                                                "flag-ortho", "maximal", "bound"};
    return names;
}

Suite parse_suite(const std::string& name) {
    const auto& names = suite_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<Suite>(i);
    std::string known;
    for (const std::string& n : names) known += (known.empty() ? "" : ", ") + n;
    throw UsageError("unknown suite '" + name + "' (expected one of: " + known + ")");
}

std::string suite_name(Suite s) { return suite_names().at(static_cast<std::size_t>(s)); }

Calibration Calibration::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open calibration file");
    Calibration c;
    c.source = path;
    try {
        c.data = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), 0, std::string("malformed calibration file: ") + e.what());
    }
    return c;
}

double Calibration::value(const std::string& suite, const std::string& key) const {
    if (!data.contains(suite) || !data[suite].contains(key) || !data[suite][key].is_number())
        throw ConfigError(source.string(), 0, "calibration has no number " + suite + "." + key);
    return data[suite][key].get<double>();
}

bool SuiteResult::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

// ---------------------------------------------------------------- output helpers

std::string sci(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9e", x);
    return buf;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

class Csv {
public:
    Csv(SuiteResult& res, const fs::path& dir, const std::string& name, const std::string& header)
        : path_(dir / name), out_(path_) {
        if (!out_) throw Error("cannot write " + path_.string());
        out_ << header << '\n';
        res.files.push_back(path_);
    }
    void row(const std::string& line) { out_ << line << '\n'; }

private:
    fs::path path_;
    std::ofstream out_;
};

template <class... T>
std::string join(const T&... parts) {
    std::string s;
    ((s += (s.empty() ? "" : ","), s += parts), ...);
    return s;
}

void add(SuiteResult& r, std::string name, bool pass, std::string detail) {
    r.checks.push_back({std::move(name), pass, std::move(detail)});
}

void skipped(SuiteResult& r, std::string name) {
    r.checks.push_back({std::move(name), true, "skipped: no calibration file"});
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

json grid_json(const GridSpec& g) {
    return {{"n", g.n}, {"half_width_z", g.half_width_z}, {"half_width_t", g.half_width_t},
            {"points_z", g.points_z}, {"points_t", g.points_t}};
}

// ---------------------------------------------------------------- moments

void moments_suite(const ExperimentConfig& cfg, const fs::path& out, SuiteResult& res) {
    const ComponentWavelet1 psi1 = build_psi1(cfg.wavelet, cfg.moments.grid);
    const ComponentWavelet2 psi2 = build_psi2(cfg.M2);
    Csv csv(res, out, "moments.csv", "component,alpha,beta,value,relative");

    double worst1 = 0.0;
    for (const MomentResidual& m : moments(psi1.samples, cfg.wavelet.M, cfg.wavelet.r0)) {
        std::string alpha;
        for (std::size_t i = 0; i < m.m.alpha.size(); ++i) alpha += (i ? " " : "") + std::to_string(m.m.alpha[i]);
        csv.row(join(std::string("psi1"), alpha, std::to_string(m.m.beta), sci(m.value), sci(m.relative)));
        worst1 = std::max(worst1, m.relative);
    }

    const Sampled1DFunction& s2 = psi2.samples;
    const std::vector<double> rel2 = moments_1d(s2, cfg.M2);
    double worst2 = 0.0;
    for (int g = 0; g <= cfg.M2; ++g) {
        double v = 0.0;
        for (int m = -s2.half; m <= s2.half; ++m)
            v += s2.values[static_cast<std::size_t>(m + s2.half)] * std::pow(m * s2.h, g);
        csv.row(join(std::string("psi2"), std::string("-"), std::to_string(g), sci(v * s2.h), sci(rel2[g])));
        worst2 = std::max(worst2, rel2[g]);
    }

    // Frequencies over [1/4, 4]; k = -4..4 brings every dilate of each frequency through the band.
    Csv cal(res, out, "calderon.csv", "eta,sum,deviation");
    const int Q = cfg.moments.eta_points;
    double worst_c = 0.0;
    for (int q = 0; q < Q; ++q) {
        const double eta = std::exp2(-2.0 + 4.0 * q / (Q - 1));
        const double s = calderon_sum(psi2, eta, -4, 4);
        cal.row(join(sci(eta), sci(s), sci(s - 1.0)));
        worst_c = std::max(worst_c, std::abs(s - 1.0));
    }

    add(res, "psi1 moments", worst1 <= 1e-10, "max relative " + sci(worst1) + " (limit 1e-10)");
    add(res, "psi2 moments", worst2 <= 1e-10, "max relative " + sci(worst2) + " (limit 1e-10)");
    add(res, "calderon sum", worst_c <= 1e-6, "max |sum - 1| " + sci(worst_c) + " (limit 1e-6)");
    res.metrics = {{"psi1_max_relative", worst1}, {"psi2_max_relative", worst2}, {"calderon_max_deviation", worst_c},
                   {"gram_condition", psi1.gram_condition}};
}

// ---------------------------------------------------------------- convolution

double bump(const GroupPoint& g, double r) {
    const double z = g.z_norm();
    const double q = (z * z * z * z + g.t * g.t) / (r * r * r * r);
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
}

// Smooth, non-central, not symmetric under any coordinate flip.
SampledFunction smooth_field(const GridSpec& grid, double r, double a, double b) {
    return SampledFunction::sample(grid, [=](const GroupPoint& g) {
        return bump(g, r) * (1.0 + a * g.x[0] + b * g.y[0] * g.t + 0.1 * g.t);
    });
}

void convolution_suite(const ExperimentConfig& cfg, const fs::path& out, SuiteResult& res) {
    const GridSpec grids[2] = {cfg.convolution.grid, cfg.convolution.grid.refined()};
    const int fields = grids[0].axes();
    // err[grid][identity][field]
    std::vector<double> err[2][2];
    Csv csv(res, out, "convolution.csv", "refinement,identity,field,error");
    for (int gi = 0; gi < 2; ++gi) {
        const GridSpec& g = grids[gi];
        const SampledFunction f = smooth_field(g, 1.5, 0.3, 0.4);
        const SampledFunction h = smooth_field(g, 1.75, -0.5, 0.2);
        const SampledFunction fh = convolve(f, h);
        for (int j = 1; j <= fields; ++j) {
            // X(f * h) = f * (X h) for left-invariant X.
            const double e_left = relative_l2(vector_field(j, fh, FieldVariant::left),
                                              convolve(f, vector_field(j, h, FieldVariant::left)));
            // (X f) * h = f * (X^R h) moves a left field across as its right twin.
            const double e_move = relative_l2(convolve(vector_field(j, f, FieldVariant::left), h),
                                              convolve(f, vector_field(j, h, FieldVariant::right)));
            err[gi][0].push_back(e_left);
            err[gi][1].push_back(e_move);
            csv.row(join(std::to_string(gi), std::string("left"), std::to_string(j), sci(e_left)));
            csv.row(join(std::to_string(gi), std::string("transfer"), std::to_string(j), sci(e_move)));
        }
    }
    // Fields whose identity holds to rounding on the coarse grid cannot improve further.
    const double rounding = 1e-10;
    double worst = 0.0, worst_gain = std::numeric_limits<double>::infinity();
    for (int id = 0; id < 2; ++id)
        for (int j = 0; j < fields; ++j) {
            worst = std::max(worst, err[0][id][j]);
            if (err[0][id][j] > rounding) worst_gain = std::min(worst_gain, err[0][id][j] / err[1][id][j]);
        }
    add(res, "identity error", worst <= 0.05, "max relative L2 " + sci(worst) + " (limit 0.05)");
    add(res, "refinement gain", worst_gain >= 2.0, "min coarse/refined " + num(worst_gain) + " (limit 2)");
    res.metrics = {{"max_error", worst}, {"min_gain", worst_gain}, {"left", err[0][0]}, {"transfer", err[0][1]},
                   {"left_refined", err[1][0]}, {"transfer_refined", err[1][1]}};
}

// ---------------------------------------------------------------- reproduce

SampledFunction normalised(SampledFunction f) {
    const double n = l2_norm(f);
    if (!(n > 0.0)) throw Error("reproduce: test field vanishes on the grid");
    f *= 1.0 / n;
    return f;
}

void reproduce_suite(const ExperimentConfig& cfg, const fs::path& out, SuiteResult& res) {
    const ReproduceConfig& rc = cfg.reproduce;
    const FlagSystem sys(rc.grid, cfg.wavelet, rc.window, cfg.M2);
    const GridSpec& g = sys.grid();

    // Band-limited calibration fields: smooth random fields filtered by powers of T_inf, which
    // concentrates them where the window's Calderon sum is flat.
    Rng rng(cfg.seed);
    std::vector<SampledFunction> F, Tinf;
    std::vector<DenseAnalysis> dense;
    for (int i = 0; i < rc.fields; ++i) {
        SampledFunction f = normalised(random_smooth_field(g, rng, rc.field_scale, 0.5 * g.half_width_z,
                                                           0.25 * g.half_width_t));
        for (int m = 0; m < rc.filter_power; ++m) f = normalised(reproduce_limit(sys, dense_analysis(sys, f)));
        dense.push_back(dense_analysis(sys, f));
        Tinf.push_back(reproduce_limit(sys, dense.back()));
        F.push_back(std::move(f));
    }
    const double s = fit_scale(F, Tinf);

    std::vector<double> floor_i;
    for (std::size_t i = 0; i < F.size(); ++i) floor_i.push_back(relative_l2(s * Tinf[i], F[i]));

    Csv per(res, out, "recon_fields.csv", "field,N,error,sampling");
    Csv total(res, out, "recon.csv", "N,error");
    Csv samp(res, out, "recon_sampling.csv", "N,error");
    std::vector<double> err, sampling;
    for (int N : rc.N) {
        // Fields have unit norm, so the family error is the RMS of the field errors. The sampling
        // error ||T_N f - T_inf f|| / ||T_inf f|| isolates the discretisation from the window floor.
        double acc = 0.0, acc_s = 0.0;
        for (std::size_t i = 0; i < F.size(); ++i) {
            const SampledFunction T = synthesize(sys, analyze(sys, dense[i], N));
            const double e = relative_l2(s * T, F[i]), d = relative_l2(T, Tinf[i]);
            per.row(join(std::to_string(i), std::to_string(N), sci(e), sci(d)));
            acc += e * e;
            acc_s += d * d;
        }
        err.push_back(std::sqrt(acc / static_cast<double>(F.size())));
        sampling.push_back(std::sqrt(acc_s / static_cast<double>(F.size())));
        total.row(join(std::to_string(N), sci(err.back())));
        samp.row(join(std::to_string(N), sci(sampling.back())));
    }

    // Single atom, reconstructed with the global scale.
    const SampledFunction atom = normalised(sys.flag_atom(rc.atom_j, rc.atom_k));
    const DenseAnalysis atom_dense = dense_analysis(sys, atom);
    const SampledFunction atom_T = reproduce_limit(sys, atom_dense);
    const double s_atom = fit_scale({atom}, {atom_T});
    Csv at(res, out, "recon_atom.csv", "N,error");
    std::vector<double> atom_err;
    for (int N : rc.N) {
        atom_err.push_back(relative_l2(s * synthesize(sys, analyze(sys, atom_dense, N)), atom));
        at.row(join(std::to_string(N), sci(atom_err.back())));
    }

    const auto index_of = [&](int N) {
        const auto it = std::find(rc.N.begin(), rc.N.end(), N);
        return it == rc.N.end() ? -1 : static_cast<int>(it - rc.N.begin());
    };
    std::string rates;
    bool rate_ok = true;
    json ratio_json = json::array();
    for (int N = 0; N <= 3; ++N) {
        const int a = index_of(N), b = index_of(N + 1);
        if (a < 0 || b < 0) {
            rate_ok = false;
            rates += " N=" + std::to_string(N) + ":missing";
            continue;
        }
        const double q = err[b] / err[a];
        ratio_json.push_back(q);
        rate_ok = rate_ok && q <= 0.7;
        rates += " " + num(q);
    }
    add(res, "geometric rate", rate_ok, "error(N+1)/error(N) for N=0..3:" + rates + " (limit 0.7)");

    int rises = 0;
    double worst_rise = 0.0;
    for (std::size_t i = 1; i < err.size(); ++i)
        if (err[i] > err[i - 1]) {
            ++rises;
            worst_rise = std::max(worst_rise, err[i] / err[i - 1] - 1.0);
        }
    add(res, "monotone", rises == 0 || (rises == 1 && worst_rise <= 0.05),
        std::to_string(rises) + " increases, largest " + num(100.0 * worst_rise) + "% (one of <= 5% allowed)");

    const int i3 = index_of(3);
    const double atom3 = i3 < 0 ? std::numeric_limits<double>::quiet_NaN() : atom_err[i3];
    add(res, "single atom", i3 >= 0 && atom3 <= 0.05,
        "atom (" + std::to_string(rc.atom_j) + "," + std::to_string(rc.atom_k) + ") error at N=3 " + num(atom3) +
            " (limit 0.05)");

    res.metrics = {{"s", s},
                   {"N", rc.N},
                   {"error", err},
                   {"sampling_error", sampling},
                   {"ratio", ratio_json},
                   {"field_floor", floor_i},
                   {"atom_error", atom_err},
                   {"atom_s", s_atom},
                   {"atom_floor_own_s", relative_l2(s_atom * atom_T, atom)},
                   {"grid", grid_json(g)}};
}

// ---------------------------------------------------------------- ortho

OrthoSetup ortho_setup(const ExperimentConfig& cfg, const GridSpec& base) {
    OrthoSetup s;
    s.base = base;
    s.spec = cfg.wavelet;
    s.profile = cfg.profile;
    s.boundary_layer = cfg.ortho.boundary_layer;
    s.validate();
    return s;
}

void ortho_suite(const ExperimentConfig& cfg, const fs::path& out, SuiteResult& res, const Calibration* cal) {
    const OrthoConfig& oc = cfg.ortho;
    const double eps = oc.epsilon, threshold = -eps * std::numbers::ln2;
    const double C = cal ? cal->value("ortho", "diagonal_constant") : 0.0;
    OrthoSetup s = ortho_setup(cfg, oc.grid);

    std::vector<EnvelopeReport> scan;
    for (int j = oc.j_min; j <= oc.j_max; ++j)
        for (int jp = oc.j_min; jp <= oc.j_max; ++jp) scan.push_back(one_param_envelope(j, jp, eps, s));
    const double slope = fit_slope(scan), eps_hat = fit_epsilon(scan);

    s.bump_control = true;
    std::vector<EnvelopeReport> control;
    for (int d = 0; d <= oc.control_gap_max; ++d) control.push_back(one_param_envelope(0, d, eps, s));
    const double control_slope = fit_slope(control);

    Csv csv(res, out, "ortho.csv", envelope_csv_header());
    double diag = 0.0, worst = 0.0;
    json ratios = json::array();
    for (const EnvelopeReport& r : scan) {
        csv.row(r.csv_row(slope));
        worst = std::max(worst, r.sup_ratio);
        if (r.j == r.jp) diag = std::max(diag, r.sup_ratio);
        ratios.push_back({r.j, r.jp, r.sup_ratio});
    }
    Csv ctl(res, out, "ortho_control.csv", envelope_csv_header());
    for (const EnvelopeReport& r : control) ctl.row(r.csv_row(control_slope));

    if (cal)
        add(res, "envelope", worst <= 3.0 * C, "max sup_ratio " + num(worst) + " vs 3 x frozen " + num(C));
    else
        skipped(res, "envelope");
    add(res, "fitted epsilon", eps_hat >= 0.4, "eps_hat " + num(eps_hat) + " (limit 0.4), slope " + num(slope));
    add(res, "decay slope", slope <= threshold, "slope " + num(slope) + " vs threshold " + num(threshold));
    add(res, "negative control", control_slope > threshold,
        "bump control slope " + num(control_slope) + " must miss the threshold " + num(threshold));
    res.metrics = {{"diagonal_constant", diag}, {"max_ratio", worst}, {"slope", slope},
                   {"epsilon_hat", eps_hat}, {"control_slope", control_slope}, {"ratios", ratios},
                   {"grid", grid_json(oc.grid)}};
}

// ---------------------------------------------------------------- flag-ortho

struct Tuple {
    int j, k, jp, kp;
};

// Tuples with |k - k'| <= 1 (the t-factor vanishes beyond) and k ^ k' - 2 (j ^ j') <= 1 (the
// pair grid resolves the finer psi2), covering both cases for each (j, j') in {0, 1}^2.
const std::vector<Tuple>& flag_tuples() {
    static const std::vector<Tuple> t{
        {0, -2, 0, -1}, {0, -1, 0, 0}, {0, 0, 0, 1}, {0, 1, 0, 2},  {0, 2, 0, 1},  {0, -2, 1, -2},
        {0, -1, 1, 0},  {0, 0, 1, 0},  {0, 1, 1, 1}, {0, 1, 1, 2},  {0, 2, 1, 1},  {1, -1, 0, -1},
        {1, 0, 0, 1},   {1, 1, 0, 1},  {1, 2, 0, 1}, {1, 2, 1, 3},  {1, 3, 1, 3},
    };
    return t;
}

void flag_ortho_suite(const ExperimentConfig& cfg, const fs::path& out, SuiteResult& res, const Calibration* cal) {
    const double eps = cfg.flag_ortho.epsilon;
    const double C = cal ? cal->value("flag-ortho", "diagonal_constant") : 0.0;
    const OrthoSetup s = ortho_setup(cfg, cfg.flag_ortho.grid);
    std::map<std::pair<int, int>, SampledFunction> B;
    const auto field = [&](int j, int jp) -> const SampledFunction& {
        auto it = B.find({j, jp});
        if (it == B.end()) it = B.emplace(std::pair{j, jp}, one_param_field(j, jp, s)).first;
        return it->second;
    };

    Csv csv(res, out, "flag_ortho.csv", envelope_csv_header());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double diag = 0.0;
    json diag_json = json::array();
    for (int kap = -3; kap <= 1; ++kap) {
        const EnvelopeReport r = flag_envelope(field(0, 0), 0, kap, 0, kap, eps, s);
        csv.row(r.csv_row(nan));
        diag = std::max(diag, r.sup_ratio);
        diag_json.push_back(r.sup_ratio);
    }
    int geq = 0, leq = 0;
    double worst = 0.0;
    json rows = json::array();
    for (const Tuple& t : flag_tuples()) {
        const EnvelopeReport r = flag_envelope(field(t.j, t.jp), t.j, t.k, t.jp, t.kp, eps, s);
        csv.row(r.csv_row(nan));
        (r.kase == EnvelopeCase::flag_case_geq ? geq : leq) += 1;
        worst = std::max(worst, r.sup_ratio);
        rows.push_back({t.j, t.k, t.jp, t.kp, case_name(r.kase), r.sup_ratio});
    }
    add(res, "coverage", geq + leq >= 12 && geq > 0 && leq > 0,
        std::to_string(geq) + " tuples in case geq, " + std::to_string(leq) + " in case leq");
    if (cal)
        add(res, "envelope", worst <= 3.0 * C, "max sup_ratio " + num(worst) + " vs 3 x frozen " + num(C));
    else
        skipped(res, "envelope");
    res.metrics = {{"diagonal_constant", diag}, {"diagonal", diag_json}, {"max_ratio", worst},
                   {"tuples", rows}, {"grid", grid_json(cfg.flag_ortho.grid)}};
}

// ---------------------------------------------------------------- maximal

void maximal_suite(const ExperimentConfig& cfg, const fs::path& out, SuiteResult& res) {
    const MaximalConfig& mc = cfg.maximal;
    const GridSpec& g = mc.grid;
    const double scales[3] = {0.5, 1.0, 2.0};
    Rng rng(cfg.seed);
    Csv csv(res, out, "maximal.csv", "family,p,r,numerator,denominator,ratio");
    std::vector<double> ratio;
    for (int fam = 0; fam < mc.families; ++fam) {
        std::vector<SampledFunction> family;
        for (int i = 0; i < mc.family_size; ++i)
            family.push_back(random_smooth_field(g, rng, scales[i % 3], 0.5 * g.half_width_z, 0.375 * g.half_width_t));
        const MaximalReport r = fs_vector_check(family, cfg.p, cfg.r);
        csv.row(join(std::to_string(fam), num(cfg.p), num(cfg.r), sci(r.numerator), sci(r.denominator), sci(r.ratio)));
        ratio.push_back(r.ratio);
    }
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    const bool finite = std::all_of(ratio.begin(), ratio.end(), [](double x) { return std::isfinite(x); });
    add(res, "finite", finite, "every family ratio finite");
    add(res, "dominance", *lo >= 1.0, "min ratio " + num(*lo) + " (the maximal function dominates |f|)");
    add(res, "uniform", *hi <= 2.0 * *lo, "max/min ratio " + num(*hi / *lo) + " (limit 2)");
    res.metrics = {{"ratios", ratio}, {"min", *lo}, {"max", *hi}, {"grid", grid_json(g)}};
}

// ---------------------------------------------------------------- bound

void bound_suite(const ExperimentConfig& cfg, const fs::path& out, SuiteResult& res, const Calibration* cal) {
    const BoundReport b = run_boundedness_scan(cfg);
    Csv csv(res, out, "bound.csv", "input,kind,refinement,hp_f,hp_Kf,ratio");
    for (std::size_t i = 0; i < b.ratio.size(); ++i)
        csv.row(join(b.labels[i], b.kinds[i], std::string("0"), sci(b.hp_f[i]), sci(b.hp_Kf[i]), sci(b.ratio[i])));
    for (std::size_t i = 0; i < b.ratio_ref.size(); ++i)
        csv.row(join(b.labels[i], b.kinds[i], std::string("1"), sci(b.hp_f_ref[i]), sci(b.hp_Kf_ref[i]),
                     sci(b.ratio_ref[i])));
    add(res, "uniform", b.uniform(), "max " + num(b.max) + " vs 3 x median " + num(b.median));
    add(res, "refinement", b.stable(),
        "max " + num(b.max) + " -> " + num(b.max_ref) + ", change " + num(100.0 * b.refinement_change()) +
            "% (limit 30%)");
    if (cal) {
        const double frozen = cal->value("bound", "median");
        add(res, "envelope", b.max <= 3.0 * frozen, "max " + num(b.max) + " vs 3 x frozen median " + num(frozen));
    } else {
        skipped(res, "envelope");
    }
    res.metrics = {{"max", b.max},         {"median", b.median},     {"max_refined", b.max_ref},
                   {"median_refined", b.median_ref}, {"refinement_change", b.refinement_change()},
                   {"ratios", b.ratio},    {"ratios_refined", b.ratio_ref}, {"grid", grid_json(cfg.bound.grid)}};
}

}  // namespace

// ---------------------------------------------------------------- boundedness scan

double BoundReport::refinement_change() const {
    if (max == 0.0 && max_ref == 0.0) return 0.0;
    return std::abs(max_ref - max) / max;
}

std::vector<BoundInput> bound_family(const FlagSystem& sys, std::uint64_t seed) {
    const GridSpec& g = sys.grid();
    const int n = g.n;
    const double Lz = g.half_width_z, Lt = g.half_width_t;
    std::vector<BoundInput> out;

    // Atoms cycle through the window scales; positions are fractions of the box.
    const std::vector<std::pair<int, int>> scales = sys.window().pairs();
    const double pos[5][3] = {{0.0, 0.0, 0.0}, {0.16, -0.16, 0.11}, {-0.2, 0.07, -0.09},
                              {0.07, 0.13, 0.07}, {-0.13, -0.2, -0.13}};
    for (int i = 0; i < 5; ++i) {
        const auto [j, k] = scales[static_cast<std::size_t>(i) % scales.size()];
        std::vector<double> x(n, 0.0), y(n, 0.0);
        x[0] = pos[i][0] * Lz;
        y[0] = pos[i][1] * Lz;
        const GroupPoint at(x, y, pos[i][2] * Lt);
        out.push_back({"atom" + std::to_string(i) + "_j" + std::to_string(j) + "_k" + std::to_string(k), "atom",
                       left_translate(at, sys.flag_atom(j, k))});
    }

    // Length scales from a sixth to two thirds of the half-width.
    const double field_scale[5] = {1.0 / 6, 7.0 / 30, 1.0 / 3, 7.0 / 15, 2.0 / 3};
    Rng rng(seed);
    for (int i = 0; i < 5; ++i)
        out.push_back({"field" + std::to_string(i), "field",
                       random_smooth_field(g, rng, field_scale[i] * Lz, Lz / 3.0, Lt / 4.5)});
    return out;
}

BoundReport run_boundedness_scan(const ExperimentConfig& cfg) {
    cfg.validate();
    KernelSpec ks;
    ks.profile = cfg.profile;
    ks.eps_in = cfg.eps_in;
    ks.R_out = cfg.R_out;
    ks.n = cfg.n;
    ks.scale = cfg.kernel_scale;
    ks.validate();

    BoundReport rep;
    const GridSpec grids[2] = {cfg.bound.grid, cfg.bound.grid.refined()};
    // Set up both levels first so an unresolvable kernel or window fails before any heavy work.
    std::vector<FlagSystem> systems;
    std::vector<SampledFunction> kernels;
    for (const GridSpec& g : grids) {
        systems.emplace_back(g, cfg.wavelet, cfg.bound.window, cfg.M2);
        kernels.push_back(make_kernel(ks, g));
    }
    for (int level = 0; level < 2; ++level) {
        const FlagSystem& sys = systems[level];
        auto& hp_f = level ? rep.hp_f_ref : rep.hp_f;
        auto& hp_Kf = level ? rep.hp_Kf_ref : rep.hp_Kf;
        auto& ratio = level ? rep.ratio_ref : rep.ratio;
        for (const BoundInput& in : bound_family(sys, cfg.seed)) {
            if (level == 0) {
                rep.labels.push_back(in.label);
                rep.kinds.push_back(in.kind);
            }
            // Same discrete sum as apply(K, f), evaluated through the t-spectral path.
            const SampledFunction Kf = convolve_spectral(in.f, kernels[level]);
            const double a = hp_norm(sys, in.f, cfg.p), b = hp_norm(sys, Kf, cfg.p);
            if (!(a > 0.0)) throw Error("bound: input " + in.label + " has zero H^p norm on the window");
            hp_f.push_back(a);
            hp_Kf.push_back(b);
            ratio.push_back(b / a);
        }
    }
    rep.max = *std::max_element(rep.ratio.begin(), rep.ratio.end());
    rep.median = median(rep.ratio);
    rep.max_ref = *std::max_element(rep.ratio_ref.begin(), rep.ratio_ref.end());
    rep.median_ref = median(rep.ratio_ref);
    return rep;
}

// ---------------------------------------------------------------- dispatch

SuiteResult run_suite(Suite suite, const ExperimentConfig& cfg, const fs::path& out_dir, const Calibration* cal) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    SuiteResult res;
    res.suite = suite_name(suite);
    switch (suite) {
        case Suite::moments: moments_suite(cfg, out_dir, res); break;
        case Suite::convolution: convolution_suite(cfg, out_dir, res); break;
        case Suite::reproduce: reproduce_suite(cfg, out_dir, res); break;
        case Suite::ortho: ortho_suite(cfg, out_dir, res, cal); break;
        case Suite::flag_ortho: flag_ortho_suite(cfg, out_dir, res, cal); break;
        case Suite::maximal: maximal_suite(cfg, out_dir, res); break;
        case Suite::bound: bound_suite(cfg, out_dir, res, cal); break;
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json checks = json::array();
    for (const Check& c : res.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    const json summary = {{"suite", res.suite}, {"pass", res.pass()}, {"checks", checks},
                          {"metrics", res.metrics}, {"seed", cfg.seed}, {"seconds", res.seconds},
                          {"config", cfg.dump()}};
    const fs::path path = out_dir / (res.suite + ".json");
    std::ofstream(path) << summary.dump(2) << '\n';
    res.files.push_back(path);
    return res;
}

}  // namespace flagwave
