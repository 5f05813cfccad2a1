#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "varlab/network.hpp"
#include "varlab/numerics.hpp"

namespace varlab {

/// Width chosen for a depth under a fixed hidden-parameter budget
/// N_w = (d^2 + d) L. d_exact is the positive root of d^2 + d - N_w/L = 0;
/// d is that root rounded to the nearest integer, at least 1.
struct WidthPlan {
    std::size_t budget = 0;        // N_w
    std::size_t depth = 0;         // L
    std::size_t width = 1;         // d
    double width_exact = 1.0;      // d*
    std::size_t actual_params = 0; // (d^2 + d) L
    double rho_exact = 0.0;        // L d* / N_w
    double rho_actual = 0.0;       // L d / actual_params
};

WidthPlan width_for_depth(std::size_t n_w, std::size_t depth);

/// Activation ratio rho(L) = L d* / N_w with the exact real root d*.
double activation_ratio(std::size_t n_w, std::size_t depth);

/// 81x81 grid over [-1,1]^2 partitioned into an 8x8 alternating block
/// pattern. Grid lines at index multiples of 10 are 0-labeled boundary.
struct CheckerboardDataset {
    static constexpr std::size_t grid_n = 81;
    std::vector<std::pair<double, double>> points;  // 6561, index = i * 81 + j
    std::vector<int> labels;                        // 0 or 1
    std::vector<bool> is_boundary;

    std::size_t size() const { return points.size(); }
};

CheckerboardDataset checkerboard_generate(bool flip_parity = false);

struct DatasetSplit {
    std::vector<std::size_t> train;  // sorted
    std::vector<std::size_t> test;   // sorted
};

DatasetSplit split_dataset(const CheckerboardDataset& ds, double train_fraction, Rng& rng);

struct TrainConfig {
    std::size_t budget = 3200;  // N_w, hidden parameters
    std::size_t depth = 10;     // L
    Activation activation = Activation::relu;
    /// Kaiming weights with zero starting biases. Unit-variance biases grow
    /// the forward scale by ~d per layer, which pushes every usable learning
    /// rate below the grid and stalls the desk-scale protocol.
    InitScheme scheme = InitScheme::kaiming().with_bias_sigma(0.0);
    std::size_t iterations = 40000;
    std::vector<double> lr_grid = {0.001, 0.003, 0.006, 0.01, 0.03,
                                   0.06,  0.1,   0.3,   0.6,  1.0};
    /// Learning rate divided by 5 at these fractions of the iteration count.
    std::vector<double> decay_fractions = {0.5, 0.7, 0.9};
    double decay_factor = 5.0;
    std::size_t seeds = 10;
    std::size_t history_stride = 100;

    /// Desk-scale protocol: 10000 iterations, lr grid {0.01, 0.1, 0.3},
    /// 3 seeds; decay junctures keep the same fractions.
    TrainConfig reduced() const {
        TrainConfig c = *this;
        c.iterations = 10000;
        c.lr_grid = {0.01, 0.1, 0.3};
        c.seeds = 3;
        return c;
    }
};

struct TrainResult {
    double best_train_loss = 0.0;
    double best_train_acc = 0.0;
    double test_loss_at_best = 0.0;
    double test_acc_at_best = 0.0;
    std::size_t best_iteration = 0;
    double lr_used = 0.0;
    std::uint64_t seed = 0;
    bool diverged = false;
    std::size_t width = 0;
    std::size_t actual_params = 0;
    std::vector<double> history;  // train loss every history_stride iterations
};

/// Sum-of-squares loss and classification accuracy over the indexed subset.
/// Predicted label is 1 iff the mean of the two outputs is >= 1/2.
std::pair<double, double> evaluate(const ParameterSet& params, const CheckerboardDataset& ds,
                                   const std::vector<std::size_t>& indices);

/// One (seed, lr) cell of full-batch gradient descent: labels mapped to
/// (0,0)/(1,1), best train loss tracked over all iterations, test metrics
/// taken at the best-loss parameters.
TrainResult train_single(const TrainConfig& cfg, const CheckerboardDataset& ds,
                         const DatasetSplit& split, const ParameterSet& initial, double lr,
                         std::uint64_t seed);

/// Runs the whole lr grid for one seed (shared split and initial parameters)
/// and returns the run with the lowest best train loss. Diverged runs never
/// win. Also returns the per-lr cells when requested.
TrainResult train_gd(const TrainConfig& cfg, const CheckerboardDataset& ds, std::uint64_t seed,
                     std::vector<TrainResult>* cells = nullptr);

struct DepthAggregate {
    std::size_t depth = 0;
    std::size_t width = 0;
    double mean_train_loss = 0.0, var_train_loss = 0.0;
    double mean_train_acc = 0.0, var_train_acc = 0.0;
    double mean_test_loss = 0.0, var_test_loss = 0.0;
    double mean_test_acc = 0.0, var_test_acc = 0.0;
    std::vector<TrainResult> per_seed;  // per-seed best over the lr grid
};

std::vector<DepthAggregate> depth_sweep_train(std::size_t n_w,
                                              const std::vector<std::size_t>& depths,
                                              const TrainConfig& cfg_template, Rng& rng,
                                              std::vector<TrainResult>* all_cells = nullptr);

}  // namespace varlab
