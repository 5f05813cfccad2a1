#include "varlab/variability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "varlab/experiments.hpp"

namespace varlab {

SurfaceField scalar_field(const ParameterSet& params, const Grid2D& grid) {
    if (!params.has_io() || params.in_dim() != 2)
        throw std::invalid_argument("scalar_field: extended network with in_dim=2 required");

    const std::size_t n = grid.n;
    Matrix x(2, n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            x(0, grid.index(i, j)) = grid.coord(i);
            x(1, grid.index(i, j)) = grid.coord(j);
        }

    BatchTrace t = forward_batch(params, x);
    SurfaceField field{grid, std::vector<double>(n * n, 0.0)};
    for (std::size_t c = 0; c < n * n; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < t.output.rows; ++r) acc += t.output(r, c) * t.output(r, c);
        field.values[c] = acc;
    }
    return field;
}

ThirdPartials third_partials_fd(const SurfaceField& field) {
    const std::size_t n = field.grid.n;
    if (n < 5) throw std::invalid_argument("third_partials_fd: grid needs n >= 5");
    const double h = field.grid.spacing();
    const double scale = 1.0 / (2.0 * h * h * h);

    ThirdPartials tp{field.grid, 2, std::vector<double>(n * n, 0.0),
                     std::vector<double>(n * n, 0.0)};
    auto f = [&](std::size_t i, std::size_t j) { return field.values[field.grid.index(i, j)]; };

    for (std::size_t i = 2; i + 2 < n; ++i) {
        for (std::size_t j = 2; j + 2 < n; ++j) {
            std::size_t idx = field.grid.index(i, j);
            tp.d3x[idx] = (f(i + 2, j) - 2.0 * f(i + 1, j) + 2.0 * f(i - 1, j) - f(i - 2, j)) *
                          scale;
            tp.d3y[idx] = (f(i, j + 2) - 2.0 * f(i, j + 1) + 2.0 * f(i, j - 1) - f(i, j - 2)) *
                          scale;
        }
    }
    return tp;
}

double v3_of_field(const SurfaceField& field, double zero_threshold) {
    const std::size_t n = field.grid.n;
    if (n < 5) throw std::invalid_argument("v3_of_field: grid needs n >= 5");
    ThirdPartials tp = third_partials_fd(field);

    double num = 0.0, den = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 2; i + 2 < n; ++i)
        for (std::size_t j = 2; j + 2 < n; ++j) {
            std::size_t idx = field.grid.index(i, j);
            num += tp.d3x[idx] * tp.d3x[idx] + tp.d3y[idx] * tp.d3y[idx];
            den += field.values[idx] * field.values[idx];
            ++count;
        }
    num /= static_cast<double>(count);
    den /= static_cast<double>(count);
    if (den < zero_threshold) return 0.0;
    return num / den;
}

double v3_sample(const ParameterSet& params, const Grid2D& grid, double zero_threshold) {
    return v3_of_field(scalar_field(params, grid), zero_threshold);
}

std::vector<V3Point> v3_measure(const V3Config& cfg, const std::vector<std::size_t>& depths,
                                Rng& rng) {
    if (cfg.num_samples < 1) throw std::invalid_argument("v3_measure: num_samples >= 1");
    std::vector<V3Point> out;
    out.reserve(depths.size());

    for (std::size_t di = 0; di < depths.size(); ++di) {
        WidthPlan plan = width_for_depth(cfg.budget, depths[di]);
        NetworkConfig net_cfg =
            NetworkConfig::extended(depths[di], plan.width, cfg.activation);
        Rng depth_rng = rng.child(di);

        std::vector<double> samples(cfg.num_samples, 0.0);
        for (std::size_t s = 0; s < cfg.num_samples; ++s) {
            Rng sample_rng = depth_rng.child(s);
            ParameterSet params = init_params(net_cfg, cfg.scheme, sample_rng);
            samples[s] = v3_sample(params, cfg.grid, cfg.zero_threshold);
        }

        V3Point pt;
        pt.depth = depths[di];
        pt.width = plan.width;
        pt.num_zero_samples = static_cast<std::size_t>(
            std::count_if(samples.begin(), samples.end(),
                          [&](double v) { return v < cfg.zero_threshold; }));
        pt.v3 = geometric_mean(samples, cfg.zero_threshold);
        out.push_back(pt);
    }
    return out;
}

std::vector<LandscapeSample> landscape_suite(std::size_t depth, std::size_t n_w, Activation act,
                                             const InitScheme& scheme, std::size_t grid_n,
                                             std::size_t samples, Rng& rng) {
    if (samples < 1) throw std::invalid_argument("landscape_suite: samples >= 1");
    WidthPlan plan = width_for_depth(n_w, depth);
    NetworkConfig net_cfg = NetworkConfig::extended(depth, plan.width, act);
    Grid2D grid{grid_n, -1.0, 1.0};

    std::vector<LandscapeSample> out;
    out.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        Rng sample_rng = rng.child(s);
        ParameterSet params = init_params(net_cfg, scheme, sample_rng);
        LandscapeSample ls;
        ls.sample_index = s;
        ls.field = scalar_field(params, grid);
        ls.z_max = *std::max_element(ls.field.values.begin(), ls.field.values.end());
        if (ls.z_max > 0.0) {
            for (double& v : ls.field.values) v /= ls.z_max;
        } else {
            ls.collapsed = true;
        }
        out.push_back(std::move(ls));
    }
    return out;
}

bool is_constant_field(const SurfaceField& field, double eps) {
    auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
    double amplitude = std::max(std::abs(*lo), std::abs(*hi));
    return (*hi - *lo) <= eps * std::max(1.0, amplitude);
}

}  // namespace varlab
