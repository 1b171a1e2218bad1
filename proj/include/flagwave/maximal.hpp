#pragma once

#include <string>
#include <vector>

#include "flagwave/grid.hpp"

namespace flagwave {

// Where the averaging sets sit relative to the centre x.
//   group:      x o (B_z(r) x [-tau, tau]), i.e. y with |z(x^{-1} y)| <= r, |t(x^{-1} y)| <= tau
//   coordinate: |z_y - z_x| <= r, |t_y - t_x| <= tau
// The Hardy-Littlewood ball of radius r is the set with tau = r^2 in either geometry.
enum class MaximalGeometry { group, coordinate };

struct MaximalScales {
    std::vector<double> z_radii;   // ball radii and rectangle z-radii
    std::vector<double> t_halves;  // rectangle t half-lengths
    MaximalGeometry geometry = MaximalGeometry::group;

    // z: 2^m h_z for m >= -1 up to L_z; t: 2^b h_t from (h_z/2)^2 up to max(L_t, r_max^2). When
    // h_z^2 / h_t is a power of two every ball is one of the rectangles.
    static MaximalScales dyadic(const GridSpec& g, MaximalGeometry geometry = MaximalGeometry::group);
    void validate() const;
};

// Average of |f| over the in-box nodes of the set (r, tau) around node x. Sets are truncated to the
// box and normalised by their in-box node count, so constants are reproduced everywhere.
double set_average(const SampledFunction& f, std::size_t node, double r, double tau, MaximalGeometry geometry);

// sup over the radii of ball averages of |f|.
SampledFunction hl_maximal(const SampledFunction& f, const MaximalScales& scales);
SampledFunction hl_maximal(const SampledFunction& f);
// sup over all (z-radius, t-half-length) pairs of rectangle averages of |f|.
SampledFunction strong_maximal(const SampledFunction& f, const MaximalScales& scales);
SampledFunction strong_maximal(const SampledFunction& f);

struct MaximalReport {
    double p = 1.0;
    double r = 0.9;
    std::size_t family_size = 0;
    double numerator = 0.0;    // || (sum_i M_s(|f_i|^r)^{2/r})^{1/2} ||_p
    double denominator = 0.0;  // || (sum_i f_i^2)^{1/2} ||_p
    double ratio = 0.0;
    [[nodiscard]] std::string json() const;
};

// Admissible 4n/(4n+1) < r < p; throws quoting the interval.
void check_fs_exponent(int n, double r, double p);

// Vector-valued maximal ratio with the strong maximal function applied to |f_i|^r.
MaximalReport fs_vector_check(const std::vector<SampledFunction>& family, double p, double r,
                              const MaximalScales& scales);
MaximalReport fs_vector_check(const std::vector<SampledFunction>& family, double p, double r);

}  // namespace flagwave
