#pragma once

#include <cstdint>
#include <vector>

#include "varlab/network.hpp"
#include "varlab/numerics.hpp"

namespace varlab {

/// Regular n x n grid over [lo, hi]^2. Point (i, j) sits at
/// (coord(i), coord(j)); fields index it as i * n + j.
struct Grid2D {
    std::size_t n = 81;
    double lo = -1.0;
    double hi = 1.0;

    double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }
    double coord(std::size_t i) const { return lo + static_cast<double>(i) * spacing(); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * n + j; }
};

struct SurfaceField {
    Grid2D grid;
    std::vector<double> values;  // n*n, row-major over (i, j)
};

/// f(x) = ||Fhat(x)||_2^2 at every grid point (extended net, in_dim = 2).
SurfaceField scalar_field(const ParameterSet& params, const Grid2D& grid);

/// Third partial derivative estimates along each axis from the 5-point
/// central stencil (f(x+2h) - 2f(x+h) + 2f(x-h) - f(x-2h)) / (2h^3).
/// Defined on interior points with a 2-point margin; margin entries are 0
/// and excluded from the V3 quadrature.
struct ThirdPartials {
    Grid2D grid;
    std::size_t margin = 2;
    std::vector<double> d3x;  // d^3 f / dx^3
    std::vector<double> d3y;  // d^3 f / dy^3
};

ThirdPartials third_partials_fd(const SurfaceField& field);

/// V3 of a single field: [mean over interior points of sum_i |d3_i f|^2]
/// divided by [mean over the same points of f^2]. The area factor cancels.
/// Returns 0 when the denominator falls below zero_threshold.
double v3_of_field(const SurfaceField& field, double zero_threshold = 1e-30);

double v3_sample(const ParameterSet& params, const Grid2D& grid,
                 double zero_threshold = 1e-30);

struct V3Config {
    Grid2D grid{81, -1.0, 1.0};
    std::size_t num_samples = 1000;
    double zero_threshold = 1e-30;
    InitScheme scheme = InitScheme::kaiming();
    Activation activation = Activation::relu;
    std::size_t budget = 3300;  // N_w, hidden parameters
};

struct V3Point {
    std::size_t depth = 0;
    std::size_t width = 0;
    double v3 = 0.0;
    std::size_t num_zero_samples = 0;
};

/// Geometric-mean V3 over num_samples random parameter sets at each depth,
/// width chosen from the budget. Sample k uses child generator k, so the
/// result is independent of evaluation order.
std::vector<V3Point> v3_measure(const V3Config& cfg, const std::vector<std::size_t>& depths,
                                Rng& rng);

struct LandscapeSample {
    SurfaceField field;   // normalized by its own max
    double z_max = 0.0;
    bool collapsed = false;  // z_max == 0 (all-zero surface kept as-is)
    std::uint64_t sample_index = 0;
};

/// The 9-samples-per-figure landscape experiment: each surface scaled by
/// its own maximum.
std::vector<LandscapeSample> landscape_suite(std::size_t depth, std::size_t n_w, Activation act,
                                             const InitScheme& scheme, std::size_t grid_n,
                                             std::size_t samples, Rng& rng);

/// True iff (max - min) <= eps * max(1, max |value|).
bool is_constant_field(const SurfaceField& field, double eps);

}  // namespace varlab
