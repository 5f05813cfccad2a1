#include "varlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace varlab {

WidthPlan width_for_depth(std::size_t n_w, std::size_t depth) {
    if (depth < 1) throw std::invalid_argument("width_for_depth: depth >= 1");
    if (n_w < 2 * depth)
        throw std::invalid_argument("width_for_depth: budget too small for depth");

    WidthPlan plan;
    plan.budget = n_w;
    plan.depth = depth;
    double ratio = static_cast<double>(n_w) / static_cast<double>(depth);
    plan.width_exact = (-1.0 + std::sqrt(1.0 + 4.0 * ratio)) / 2.0;
    plan.width = static_cast<std::size_t>(std::max<long long>(1, std::llround(plan.width_exact)));
    plan.actual_params = (plan.width * plan.width + plan.width) * depth;
    plan.rho_exact = static_cast<double>(depth) * plan.width_exact / static_cast<double>(n_w);
    plan.rho_actual = static_cast<double>(depth * plan.width) /
                      static_cast<double>(plan.actual_params);
    return plan;
}

double activation_ratio(std::size_t n_w, std::size_t depth) {
    return width_for_depth(n_w, depth).rho_exact;
}

CheckerboardDataset checkerboard_generate(bool flip_parity) {
    constexpr std::size_t n = CheckerboardDataset::grid_n;
    const double h = 2.0 / static_cast<double>(n - 1);

    CheckerboardDataset ds;
    ds.points.reserve(n * n);
    ds.labels.reserve(n * n);
    ds.is_boundary.reserve(n * n);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            ds.points.emplace_back(-1.0 + static_cast<double>(i) * h,
                                   -1.0 + static_cast<double>(j) * h);
            bool boundary = (i % 10 == 0) || (j % 10 == 0);
            ds.is_boundary.push_back(boundary);
            if (boundary) {
                ds.labels.push_back(0);
            } else {
                int parity = static_cast<int>((i / 10 + j / 10) % 2);
                ds.labels.push_back(flip_parity ? 1 - parity : parity);
            }
        }
    }
    return ds;
}

DatasetSplit split_dataset(const CheckerboardDataset& ds, double train_fraction, Rng& rng) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw std::invalid_argument("split_dataset: fraction in (0,1)");
    const std::size_t total = ds.size();
    const std::size_t m = static_cast<std::size_t>(train_fraction * static_cast<double>(total));

    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates: the first m entries become the train set
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (total - i));
        std::swap(idx[i], idx[j]);
    }
    DatasetSplit split;
    split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
    split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

namespace {

void gather(const CheckerboardDataset& ds, const std::vector<std::size_t>& indices, Matrix& x,
            Matrix& y) {
    x = Matrix(2, indices.size());
    y = Matrix(2, indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        x(0, j) = ds.points[indices[j]].first;
        x(1, j) = ds.points[indices[j]].second;
        double label = static_cast<double>(ds.labels[indices[j]]);
        y(0, j) = label;
        y(1, j) = label;
    }
}

std::pair<double, double> loss_and_accuracy(const Matrix& outputs, const Matrix& y) {
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t j = 0; j < outputs.cols; ++j) {
        double r0 = outputs(0, j) - y(0, j);
        double r1 = outputs(1, j) - y(1, j);
        loss += r0 * r0 + r1 * r1;
        int pred = (outputs(0, j) + outputs(1, j)) / 2.0 >= 0.5 ? 1 : 0;
        if (pred == static_cast<int>(y(0, j))) ++correct;
    }
    return {loss, static_cast<double>(correct) / static_cast<double>(outputs.cols)};
}

}  // namespace

std::pair<double, double> evaluate(const ParameterSet& params, const CheckerboardDataset& ds,
                                   const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw std::invalid_argument("evaluate: empty index set");
    Matrix x, y;
    gather(ds, indices, x, y);
    BatchTrace t = forward_batch(params, x);
    return loss_and_accuracy(t.output, y);
}

TrainResult train_single(const TrainConfig& cfg, const CheckerboardDataset& ds,
                         const DatasetSplit& split, const ParameterSet& initial, double lr,
                         std::uint64_t seed) {
    Matrix x, y;
    gather(ds, split.train, x, y);
    const double inv_m = 1.0 / static_cast<double>(x.cols);

    std::vector<std::size_t> decay_at;
    for (double f : cfg.decay_fractions)
        decay_at.push_back(static_cast<std::size_t>(std::llround(f * cfg.iterations)));

    TrainResult res;
    res.lr_used = lr;
    res.seed = seed;
    res.width = initial.width();
    res.actual_params = initial.hidden_param_count();

    ParameterSet params = initial;
    ParameterSet best_params = initial;
    double best_loss = std::numeric_limits<double>::infinity();
    double step = lr;

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        for (std::size_t k = 0; k < decay_at.size(); ++k)
            if (it == decay_at[k]) step /= cfg.decay_factor;

        auto [loss, grad] = loss_and_gradient(params, x, y);
        if (!std::isfinite(loss)) {
            res.diverged = true;
            break;
        }
        if (cfg.history_stride > 0 && it % cfg.history_stride == 0) res.history.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            res.best_iteration = it;
            best_params = params;
        }

        // descent step on the batch-mean gradient
        double eta = step * inv_m;
        auto axpy = [eta](std::vector<double>& p, const std::vector<double>& g) {
            for (std::size_t i = 0; i < p.size(); ++i) p[i] -= eta * g[i];
        };
        axpy(params.w_in->values, grad.w_in->values);
        axpy(*params.b_in, *grad.b_in);
        for (std::size_t k = 0; k < params.weights.size(); ++k) {
            axpy(params.weights[k].values, grad.weights[k].values);
            axpy(params.biases[k], grad.biases[k]);
        }
        axpy(params.w_out->values, grad.w_out->values);
        axpy(*params.b_out, *grad.b_out);
    }

    if (!std::isfinite(best_loss)) {
        res.diverged = true;
        res.best_train_loss = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    res.best_train_loss = best_loss;
    auto [train_loss, train_acc] = evaluate(best_params, ds, split.train);
    (void)train_loss;
    res.best_train_acc = train_acc;
    std::tie(res.test_loss_at_best, res.test_acc_at_best) = evaluate(best_params, ds, split.test);
    return res;
}

TrainResult train_gd(const TrainConfig& cfg, const CheckerboardDataset& ds, std::uint64_t seed,
                     std::vector<TrainResult>* cells) {
    WidthPlan plan = width_for_depth(cfg.budget, cfg.depth);

    Rng rng(seed);
    Rng split_rng = rng.child(0);
    Rng init_rng = rng.child(1);
    DatasetSplit split = split_dataset(ds, 0.25, split_rng);
    NetworkConfig net_cfg = NetworkConfig::extended(cfg.depth, plan.width, cfg.activation);
    ParameterSet initial = init_params(net_cfg, cfg.scheme, init_rng);

    TrainResult best;
    bool have_best = false;
    for (double lr : cfg.lr_grid) {
        TrainResult r = train_single(cfg, ds, split, initial, lr, seed);
        if (cells) cells->push_back(r);
        if (r.diverged) continue;
        if (!have_best || r.best_train_loss < best.best_train_loss) {
            best = r;
            have_best = true;
        }
    }
    if (!have_best) {
        best.diverged = true;
        best.seed = seed;
        best.width = plan.width;
        best.actual_params = plan.actual_params;
        best.best_train_loss = std::numeric_limits<double>::quiet_NaN();
    }
    return best;
}

std::vector<DepthAggregate> depth_sweep_train(std::size_t n_w,
                                              const std::vector<std::size_t>& depths,
                                              const TrainConfig& cfg_template, Rng& rng,
                                              std::vector<TrainResult>* all_cells) {
    std::vector<DepthAggregate> out;
    CheckerboardDataset ds = checkerboard_generate();

    for (std::size_t di = 0; di < depths.size(); ++di) {
        TrainConfig cfg = cfg_template;
        cfg.budget = n_w;
        cfg.depth = depths[di];

        DepthAggregate agg;
        agg.depth = depths[di];
        agg.width = width_for_depth(n_w, depths[di]).width;

        Rng depth_rng = rng.child(di);
        for (std::size_t s = 0; s < cfg.seeds; ++s) {
            std::uint64_t cell_seed = depth_rng.child(s).seed();
            std::vector<TrainResult> cells;
            TrainResult best = train_gd(cfg, ds, cell_seed, all_cells ? &cells : nullptr);
            if (all_cells)
                all_cells->insert(all_cells->end(), cells.begin(), cells.end());
            agg.per_seed.push_back(best);
        }

        auto moments = [&](auto get) {
            double mean = 0.0, var = 0.0;
            std::size_t n = 0;
            for (const auto& r : agg.per_seed)
                if (!r.diverged) {
                    mean += get(r);
                    ++n;
                }
            if (n == 0) return std::pair{0.0, 0.0};
            mean /= static_cast<double>(n);
            for (const auto& r : agg.per_seed)
                if (!r.diverged) var += (get(r) - mean) * (get(r) - mean);
            var /= static_cast<double>(n);
            return std::pair{mean, var};
        };
        std::tie(agg.mean_train_loss, agg.var_train_loss) =
            moments([](const TrainResult& r) { return r.best_train_loss; });
        std::tie(agg.mean_train_acc, agg.var_train_acc) =
            moments([](const TrainResult& r) { return r.best_train_acc; });
        std::tie(agg.mean_test_loss, agg.var_test_loss) =
            moments([](const TrainResult& r) { return r.test_loss_at_best; });
        std::tie(agg.mean_test_acc, agg.var_test_acc) =
            moments([](const TrainResult& r) { return r.test_acc_at_best; });
        out.push_back(std::move(agg));
    }
    return out;
}

}  // namespace varlab
