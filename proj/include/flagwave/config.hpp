#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flagwave/flag_transform.hpp"
#include "flagwave/kernels.hpp"

namespace flagwave {

// Rejected configuration. what() is "<source>:<line>: <message>"; line 0 means a default value.
class ConfigError : public Error {
public:
    ConfigError(const std::string& source, int line, const std::string& message);
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

struct MomentsConfig {
    GridSpec grid{1, 1.25, 1.25, 40, 40};
    int eta_points = 65;  // log-spaced frequencies over two octaves either side of 1
};

struct ConvolutionConfig {
    GridSpec grid{1, 4.0, 16.0, 32, 64};
};

struct ReproduceConfig {
    GridSpec grid{1, 2.0, 16.0, 32, 512};
    ScaleWindow window{-1, 1, 0, 2};
    std::vector<int> N{0, 1, 2, 3, 4};
    int fields = 4;
    double field_scale = 0.5;
    int filter_power = 4;  // calibration fields are random fields pushed through s T_inf this many times
    int atom_j = 1;
    int atom_k = 0;
};

struct OrthoConfig {
    GridSpec grid{1, 4.0, 16.0, 64, 256};
    double epsilon = 0.5;
    int j_min = -2;
    int j_max = 2;
    int control_gap_max = 3;
    int boundary_layer = 2;
};

struct FlagOrthoConfig {
    GridSpec grid{1, 4.0, 16.0, 64, 256};
    double epsilon = 0.5;
};

struct MaximalConfig {
    GridSpec grid{1, 4.0, 16.0, 16, 64};
    int families = 10;
    int family_size = 8;
};

struct BoundConfig {
    GridSpec grid{1, 1.5, 4.5, 24, 144};
    ScaleWindow window{0, 1, 1, 2};
};

struct ExperimentConfig {
    std::string source = "<defaults>";
    std::filesystem::path base_dir = ".";  // relative paths resolve against the config file

    int n = 1;
    std::uint64_t seed = 20261016;
    double p = 1.0;
    double r = 0.9;
    std::filesystem::path calibration = "data/calibration.json";
    std::filesystem::path out;  // empty: must come from the command line

    WaveletSpec wavelet{};
    int M2 = 4;

    KernelProfile profile = KernelProfile::riesz_x1;
    double eps_in = 0.25;
    double R_out = 1.0;
    double kernel_scale = 1.0;

    MomentsConfig moments;
    ConvolutionConfig convolution;
    ReproduceConfig reproduce;
    OrthoConfig ortho;
    FlagOrthoConfig flag_ortho;
    MaximalConfig maximal;
    BoundConfig bound;

    // Line of each "section.key" that was set explicitly.
    std::map<std::string, int> lines;

    // Cross-field constraints; throws ConfigError at the line of the offending key.
    void validate() const;
    [[nodiscard]] std::filesystem::path calibration_path() const;
    // Every suite grid refined `scale - 1` times; scale is 1 or 2.
    [[nodiscard]] ExperimentConfig with_grid_scale(int scale) const;
    // Canonical key = value text; parses back to the same configuration.
    [[nodiscard]] std::string dump() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace flagwave
