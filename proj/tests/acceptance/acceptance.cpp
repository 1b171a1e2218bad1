// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 if any fails.
// usage: acceptance <flagwave binary> <config> <work dir>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "../unit/support.hpp"
#include "flagwave/kernels.hpp"
#include "flagwave/suites.hpp"

using namespace flagwave;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string failed_checks(const SuiteResult& r) {
    std::string s;
    for (const Check& c : r.checks) s += "\n      " + std::string(c.pass ? "ok   " : "FAIL ") + c.name + ": " + c.detail;
    return s;
}

Verdict suite_verdict(const SuiteResult& r, double limit_s) {
    const bool in_time = r.seconds <= limit_s;
    return {r.pass() && in_time, fmt("%.1f s", r.seconds) + fmt(" (limit %.0f s)", limit_s) + failed_checks(r)};
}

// ---------------------------------------------------------------- 1: group algebra

Verdict group_algebra(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0, worst_norm = 0.0;
    for (int n : {1, 2}) {
        Rng rng(seed + static_cast<std::uint64_t>(n));
        const auto draw = [&] {
            GroupPoint g{std::vector<double>(n), std::vector<double>(n), rng.uniform(-1.0, 1.0)};
            for (int i = 0; i < n; ++i) {
                g.x[i] = rng.uniform(-1.0, 1.0);
                g.y[i] = rng.uniform(-1.0, 1.0);
            }
            return g;
        };
        const auto diff = [](const GroupPoint& a, const GroupPoint& b) {
            double d = std::abs(a.t - b.t);
            for (std::size_t i = 0; i < a.x.size(); ++i)
                d = std::max({d, std::abs(a.x[i] - b.x[i]), std::abs(a.y[i] - b.y[i])});
            return d;
        };
        const GroupPoint e = GroupPoint::identity(n);
        for (int i = 0; i < 10000; ++i) {
            const GroupPoint a = draw(), b = draw(), c = draw();
            worst = std::max(worst, diff(multiply(multiply(a, b), c), multiply(a, multiply(b, c))));
            worst = std::max(worst, diff(multiply(a, inverse(a)), e));
            worst = std::max(worst, diff(multiply(inverse(a), a), e));
            worst = std::max(worst, diff(multiply(a, e), a));
            worst = std::max(worst, diff(multiply(e, a), a));
            const double r = std::exp(rng.uniform(-3.0, 3.0));
            const double na = norm(a);
            if (na > 0.0) worst_norm = std::max(worst_norm, std::abs(norm(dilate(r, a)) - r * na) / (r * na));
        }
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-12 && worst_norm <= 1e-12 && t < 1.0,
            "max coordinate error " + fmt("%.2e", worst) + ", homogeneity " + fmt("%.2e", worst_norm) +
                fmt(", %.2f s", t)};
}

// ---------------------------------------------------------------- 8: oracle equivalence

Verdict oracle_equivalence(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed);
    int cases = 0, exact = 0;
    for (const GridSpec g : {GridSpec{1, 2.0, 4.0, 8, 8}, GridSpec{1, 1.0, 3.0, 8, 8}}) {
        KernelSpec ks;
        ks.eps_in = 2.0 * g.h_z();
        ks.R_out = g.half_width_z;
        const SampledFunction K = make_kernel(ks, g);
        for (int trial = 0; trial < 2; ++trial) {
            const SampledFunction f = fwtest::random_field(g, rng, 0.4), h = fwtest::random_field(g, rng, 0.6);
            exact += fwtest::bit_equal(convolve(f, h), fwtest::brute_force_convolve(f, h));
            exact += fwtest::bit_equal(apply(K, f), fwtest::brute_force_convolve(f, K));
            cases += 2;
        }
    }
    const double t = seconds_since(t0);
    return {exact == cases && t < 1.0,
            std::to_string(exact) + "/" + std::to_string(cases) + " bit-exact" + fmt(", %.2f s", t)};
}

// ---------------------------------------------------------------- 7: exponent range

bool p_rejected(double p) {
    try {
        parse_config("[general]\np = " + fmt("%.17g", p) + "\nr = 0.805\n");
    } catch (const ConfigError& e) {
        return std::string(e.what()).find("(0.8, 1]") != std::string::npos;
    }
    return false;
}

int run_cli(const std::string& binary, const std::string& suite, const fs::path& config, const fs::path& out) {
    fs::create_directories(out);
    const std::string cmd = "\"" + binary + "\" " + suite + " --config \"" + config.string() + "\" --out \"" +
                            out.string() + "\" > \"" + (out / "stdout.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::fprintf(stderr, "usage: acceptance <flagwave binary> <config> <work dir>\n");
        return 2;
    }
    const std::string binary = argv[1];
    const fs::path config_path = argv[2], work = argv[3];
    fs::remove_all(work);
    const ExperimentConfig cfg = load_config(config_path);
    const Calibration cal = Calibration::load(cfg.calibration_path());

    std::vector<std::pair<int, Verdict>> results;
    const auto report = [&](int id, const std::string& name, const Verdict& v) {
        std::printf("criterion %d %s  %s: %s\n", id, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
        std::fflush(stdout);
        results.emplace_back(id, v);
    };
    const auto suite = [&](Suite s) { return run_suite(s, cfg, work / "run" / suite_name(s), &cal); };

    report(1, "group algebra", group_algebra(cfg.seed));

    const SuiteResult conv = suite(Suite::convolution);
    report(2, "convolution identities", suite_verdict(conv, 600.0));

    const SuiteResult mom = suite(Suite::moments);
    report(3, "moments and Calderon sum", suite_verdict(mom, 10.0));

    const SuiteResult ortho = suite(Suite::ortho);
    report(4, "one-parameter envelope", suite_verdict(ortho, 900.0));

    const SuiteResult flag = suite(Suite::flag_ortho);
    report(5, "flag envelope", suite_verdict(flag, 1800.0));

    const SuiteResult rec = suite(Suite::reproduce);
    report(6, "discrete reproducing formula", suite_verdict(rec, 1200.0));

    {
        const SuiteResult bound = suite(Suite::bound);
        Verdict v = suite_verdict(bound, 1800.0);
        bool range = true;
        for (double p : {0.8, 0.75, 1.0 + 1e-9, 1.5}) range = range && p_rejected(p);
        for (double p : {0.81, 0.9, 1.0}) range = range && !p_rejected(p);
        const fs::path bad = work / "bad_p.cfg";
        std::ofstream(bad) << "[general]\np = 1.5\n";
        const int code = run_cli(binary, "bound", bad, work / "bad_p");
        const bool quoted = slurp(work / "bad_p" / "stdout.txt").find("(0.8, 1]") != std::string::npos;
        v.pass = v.pass && range && code == 2 && quoted;
        v.detail += std::string("\n      ") + (range ? "ok   " : "FAIL ") + "p outside (0.8, 1] rejected, inside accepted" +
                    "\n      " + (code == 2 && quoted ? "ok   " : "FAIL ") + "flagwave bound with p = 1.5 exits " +
                    std::to_string(code) + (quoted ? " quoting the interval" : " without the interval");
        report(7, "boundedness scan", v);
    }

    report(8, "oracle equivalence", oracle_equivalence(cfg.seed));

    {
        // Rerun suites through the command line and compare every CSV with the in-process run.
        int files = 0, identical = 0;
        std::string detail;
        for (Suite s : {Suite::moments, Suite::convolution, Suite::maximal, Suite::bound, Suite::reproduce}) {
            const std::string name = suite_name(s);
            const fs::path a = work / "run" / name, b = work / "rerun" / name;
            if (!fs::exists(a)) run_suite(s, cfg, a, &cal);
            run_cli(binary, name, config_path, b);
            for (const auto& entry : fs::directory_iterator(a)) {
                if (entry.path().extension() != ".csv") continue;
                ++files;
                const bool same = slurp(entry.path()) == slurp(b / entry.path().filename());
                identical += same;
                if (!same) detail += " " + name + "/" + entry.path().filename().string();
            }
        }
        report(9, "determinism",
               {files > 0 && identical == files, std::to_string(identical) + "/" + std::to_string(files) +
                                                     " CSV files byte-identical" +
                                                     (detail.empty() ? "" : ", differing:" + detail)});
    }

    int failed = 0;
    for (const auto& [id, v] : results) failed += !v.pass;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed ? 1 : 0;
}
