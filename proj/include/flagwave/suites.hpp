#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flagwave/config.hpp"

namespace flagwave {

// Bad suite name or command line; exit status 2 like a configuration error.
class UsageError : public Error {
public:
    using Error::Error;
};

enum class Suite { moments, convolution, reproduce, ortho, flag_ortho, maximal, bound };
const std::vector<std::string>& suite_names();
Suite parse_suite(const std::string& name);
std::string suite_name(Suite s);

// Frozen constants read from the calibration file. Suites that compare against a frozen
// envelope need it; the others ignore it.
struct Calibration {
    nlohmann::json data;
    static Calibration load(const std::filesystem::path& path);
    // data[suite][key]; throws ConfigError naming the file when absent.
    [[nodiscard]] double value(const std::string& suite, const std::string& key) const;
    std::filesystem::path source;
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::vector<Check> checks;
    nlohmann::json metrics;  // numbers the calibration tool and the acceptance driver read
    std::vector<std::filesystem::path> files;
    double seconds = 0.0;
    [[nodiscard]] bool pass() const;
};

// Runs one suite and writes its CSV files and <suite>.json under out_dir. Without a calibration,
// checks against frozen constants are skipped (the calibration tool runs that way).
SuiteResult run_suite(Suite suite, const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                      const Calibration* calibration);

struct BoundInput {
    std::string label;
    std::string kind;  // atom | field
    SampledFunction f;
};

struct BoundReport {
    std::vector<std::string> labels;
    std::vector<std::string> kinds;
    std::vector<double> hp_f, hp_Kf, ratio;                  // configured grid
    std::vector<double> hp_f_ref, hp_Kf_ref, ratio_ref;      // one refinement
    double max = 0.0, median = 0.0, max_ref = 0.0, median_ref = 0.0;
    // |max_ref - max| / max, zero when both vanish.
    [[nodiscard]] double refinement_change() const;
    [[nodiscard]] bool uniform() const { return max <= 3.0 * median; }
    [[nodiscard]] bool stable() const { return refinement_change() <= 0.3; }
};

// The frozen test family on a grid: flag atoms at the window scales, translated, and smooth
// pseudorandom fields at several length scales.
std::vector<BoundInput> bound_family(const FlagSystem& sys, std::uint64_t seed);
// ratio_i = ||K f_i||_{H^p} / ||f_i||_{H^p} on the configured grid and on its refinement.
BoundReport run_boundedness_scan(const ExperimentConfig& cfg);

}  // namespace flagwave
