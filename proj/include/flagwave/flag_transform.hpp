#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "flagwave/dyadic.hpp"
#include "flagwave/wavelets.hpp"

namespace flagwave {

// Finite window of scales: j indexes psi^(1) (z-side 2^-j), k indexes psi^(2) (t-scale 2^-k).
struct ScaleWindow {
    int j_min = -1;
    int j_max = 1;
    int k_min = 0;
    int k_max = 2;
    void validate() const;
    [[nodiscard]] std::vector<std::pair<int, int>> pairs() const;
    friend bool operator==(const ScaleWindow&, const ScaleWindow&) = default;
};

// Every dilate the transforms need, built once for a grid and a window.
class FlagSystem {
public:
    FlagSystem(const GridSpec& grid, const WaveletSpec& spec, const ScaleWindow& window, int M2 = 4);

    [[nodiscard]] const GridSpec& grid() const { return grid_; }
    [[nodiscard]] const WaveletSpec& spec() const { return spec_; }
    [[nodiscard]] const ScaleWindow& window() const { return window_; }
    [[nodiscard]] const ComponentWavelet1& psi1() const { return psi1_; }
    [[nodiscard]] const SampledFunction& psi1(int j) const;
    [[nodiscard]] const SampledFunction& psi1_reflected(int j) const;
    [[nodiscard]] const Sampled1DFunction& psi2(int k) const;
    // Sampled psi_{j,k} = psi1_j *_2 psi2_k.
    [[nodiscard]] SampledFunction flag_atom(int j, int k) const;

private:
    GridSpec grid_;
    WaveletSpec spec_;
    ScaleWindow window_;
    ComponentWavelet1 psi1_;
    std::map<int, SampledFunction> psi1_j_, psi1_r_;
    std::map<int, Sampled1DFunction> psi2_k_;
};

// psi1_j * f for every j of the window; the t-filtering by psi2_k commutes with it, so every
// flag coefficient and the square function are read off these fields.
struct DenseAnalysis {
    std::map<int, SampledFunction> F;
};
DenseAnalysis dense_analysis(const FlagSystem& sys, const SampledFunction& f);

// Coefficients of one (j, k): one value per anchor node, shared by the sampling rectangles
// snapped to it; pattern.weights holds the summed |R|.
struct CoefficientBlock {
    int j = 0;
    int k = 0;
    SamplingPattern pattern;
    std::vector<double> values;
};

struct FlagCoefficients {
    ScaleWindow window;
    int N = 0;
    AnchorPolicy policy = AnchorPolicy::center;
    std::vector<CoefficientBlock> blocks;

    [[nodiscard]] const CoefficientBlock& block(int j, int k) const;
    [[nodiscard]] CoefficientBlock& block(int j, int k);
    [[nodiscard]] std::size_t rectangle_count() const;
    // Streams every sampling rectangle with its coefficient, in block then enumeration order.
    void for_each(const GridSpec& grid, const std::function<void(const Region&, double)>& fn) const;
    // JSON array of {j, k, N, index, anchor, value}.
    [[nodiscard]] std::string json(const GridSpec& grid) const;
};

// c_R = (psi_{j,k} * f)(anchor of R).
FlagCoefficients analyze(const FlagSystem& sys, const SampledFunction& f, int N,
                         AnchorPolicy policy = AnchorPolicy::center);
FlagCoefficients analyze(const FlagSystem& sys, const DenseAnalysis& dense, int N,
                         AnchorPolicy policy = AnchorPolicy::center);
// Same index set, all values zero.
FlagCoefficients zero_coefficients(const FlagSystem& sys, int N, AnchorPolicy policy = AnchorPolicy::center);

// sum_R |R| psi~_{j,k}(x o a_R^{-1}) c_R.
SampledFunction synthesize(const FlagSystem& sys, const FlagCoefficients& c);

// The N -> infinity limit on the grid: every node is an anchor with weight one cell.
SampledFunction reproduce_limit(const FlagSystem& sys, const DenseAnalysis& dense);

// Cube part over j in the window with psi1_j, vertical part over k < j with psi_{j,k};
// coefficients frozen at the region anchors and painted over each region.
SampledFunction square_function(const FlagSystem& sys, const SampledFunction& f,
                                AnchorPolicy policy = AnchorPolicy::center);
SampledFunction square_function(const FlagSystem& sys, const DenseAnalysis& dense,
                                AnchorPolicy policy = AnchorPolicy::center);

// Admissible exponents 4n/(4n+1) < p <= 1; throws quoting the interval.
void check_hp_exponent(int n, double p);
// (sum S^p dV)^(1/p).
double hp_norm_of(const SampledFunction& S, double p);
double hp_norm(const FlagSystem& sys, const SampledFunction& f, double p,
               AnchorPolicy policy = AnchorPolicy::center);

// Least-squares s minimising sum_i ||f_i - s T f_i||^2.
double fit_scale(const std::vector<SampledFunction>& f, const std::vector<SampledFunction>& Tf);
// ||f - s T_N f|| / ||f||.
double reconstruction_error(const FlagSystem& sys, const SampledFunction& f, int N, double s);

}  // namespace flagwave
