// varlab: command-line driver for the variability experiments.
//
// Subcommands: landscape, v3, matrices, probcheck, train, trainsweep,
// checkerboard. Every run writes its outputs plus a manifest.json into
// --out; re-running with the same flags and seed reproduces the output
// files byte for byte (the manifest's duration field aside).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "varlab/experiments.hpp"
#include "varlab/io.hpp"
#include "varlab/matrix_analysis.hpp"
#include "varlab/network.hpp"
#include "varlab/numerics.hpp"
#include "varlab/svg.hpp"
#include "varlab/variability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace varlab;

namespace {

std::string fd(double v) { return io::format_double(v); }

std::uint64_t default_seed() {
    if (const char* env = std::getenv("VARLAB_SEED")) return std::strtoull(env, nullptr, 10);
    return 6;
}

/// "3:45:3" or "2,4,8" -> list of depths.
std::vector<std::size_t> parse_depths(const std::string& s) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        std::size_t c1 = tok.find(':');
        if (c1 == std::string::npos) {
            out.push_back(std::stoul(tok));
        } else {
            std::size_t c2 = tok.find(':', c1 + 1);
            std::size_t lo = std::stoul(tok.substr(0, c1));
            std::size_t hi = std::stoul(tok.substr(c1 + 1, c2 - c1 - 1));
            std::size_t step = c2 == std::string::npos ? 1 : std::stoul(tok.substr(c2 + 1));
            if (step == 0) throw CLI::ValidationError("--depths", "step must be positive");
            for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw CLI::ValidationError("--depths", "empty depth list");
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        out.push_back(s.substr(pos, comma == std::string::npos ? comma : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

InitScheme scheme_from_flag(const std::string& init, Activation act, double sigma) {
    if (init == "default") return default_scheme_for(act);
    InitScheme::Kind kind = init_kind_from_string(init);
    if (kind == InitScheme::Kind::normal) return InitScheme::normal(sigma);
    InitScheme s;
    s.kind = kind;
    return s;
}

/// Index-parallel map with deterministic result placement.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, n); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void finish(io::RunManifest& manifest, const fs::path& out_dir, const Timer& timer) {
    manifest.duration_seconds = timer.seconds();
    manifest.write(out_dir / "manifest.json");
    std::cout << "wrote " << (out_dir / "manifest.json").string() << "\n";
}

// ---------------------------------------------------------------- landscape

int cmd_landscape(const std::string& activation, std::size_t depth, std::size_t params,
                  std::size_t grid_n, std::size_t samples, const std::string& init, double sigma,
                  std::uint64_t seed, bool svg, const fs::path& out_dir) {
    Timer timer;
    Activation act = activation_from_string(activation);
    InitScheme scheme = scheme_from_flag(init, act, sigma);

    Rng rng(seed);
    auto suite = landscape_suite(depth, params, act, scheme, grid_n, samples, rng);

    io::RunManifest manifest;
    manifest.subcommand = "landscape";
    manifest.master_seed = seed;
    manifest.parameters = {{"activation", activation}, {"depth", depth},
                           {"params", params},         {"grid", grid_n},
                           {"samples", samples},       {"init", init},
                           {"sigma", sigma},           {"svg", svg}};

    json sample_meta = json::array();
    std::size_t constant_count = 0;
    for (const auto& ls : suite) {
        io::Csv csv({"x", "y", "value"});
        const Grid2D& g = ls.field.grid;
        for (std::size_t i = 0; i < g.n; ++i)
            for (std::size_t j = 0; j < g.n; ++j)
                csv.row({fd(g.coord(i)), fd(g.coord(j)), fd(ls.field.values[g.index(i, j)])});
        std::string name = "surface_" + std::to_string(ls.sample_index) + ".csv";
        csv.write(out_dir / name);
        manifest.outputs.push_back(name);

        bool constant = ls.collapsed || is_constant_field(ls.field, 1e-3);
        if (constant) ++constant_count;
        sample_meta.push_back({{"sample", ls.sample_index},
                               {"seed", seed},
                               {"L", depth},
                               {"d", width_for_depth(params, depth).width},
                               {"activation", activation},
                               {"scheme", to_string(scheme.kind)},
                               {"z_max", ls.z_max},
                               {"collapsed", ls.collapsed},
                               {"near_constant", constant}});
    }
    io::write_file_atomic(out_dir / "surfaces.json", sample_meta.dump(2) + "\n");
    manifest.outputs.push_back("surfaces.json");

    if (svg) {
        std::vector<SurfaceField> fields;
        for (const auto& ls : suite) fields.push_back(ls.field);
        std::size_t ncols = samples == 9 ? 3 : std::min<std::size_t>(samples, 4);
        io::write_file_atomic(out_dir / "surfaces.svg", svg::heatmap_grid(fields, ncols));
        manifest.outputs.push_back("surfaces.svg");
    }

    std::cout << samples << " surfaces, " << constant_count << " near-constant (eps=1e-3)\n";
    finish(manifest, out_dir, timer);
    return 0;
}

// ----------------------------------------------------------------------- v3

int cmd_v3(std::size_t params, const std::string& depths_flag, std::size_t samples,
           const std::string& activation, const std::string& init, double sigma,
           std::size_t grid_n, std::uint64_t seed, bool svg, const fs::path& out_dir) {
    Timer timer;
    Activation act = activation_from_string(activation);
    InitScheme scheme = scheme_from_flag(init, act, sigma);
    std::vector<std::size_t> depths = parse_depths(depths_flag);

    V3Config cfg;
    cfg.grid = Grid2D{grid_n, -1.0, 1.0};
    cfg.num_samples = samples;
    cfg.scheme = scheme;
    cfg.activation = act;
    cfg.budget = params;

    Rng rng(seed);
    auto points = v3_measure(cfg, depths, rng);

    io::Csv csv({"L", "d", "V3", "num_zero_samples"});
    std::size_t peak_depth = 0;
    double peak = -1.0;
    for (const auto& p : points) {
        csv.row({std::to_string(p.depth), std::to_string(p.width), fd(p.v3),
                 std::to_string(p.num_zero_samples)});
        if (p.v3 > peak) {
            peak = p.v3;
            peak_depth = p.depth;
        }
    }
    csv.write(out_dir / "v3.csv");

    io::RunManifest manifest;
    manifest.subcommand = "v3";
    manifest.master_seed = seed;
    manifest.parameters = {{"params", params},   {"depths", depths_flag}, {"samples", samples},
                           {"activation", activation}, {"init", init},   {"sigma", sigma},
                           {"grid", grid_n}};
    manifest.outputs.push_back("v3.csv");

    if (svg) {
        std::vector<double> xs, hs;
        for (const auto& p : points) {
            xs.push_back(static_cast<double>(p.depth));
            hs.push_back(p.v3);
        }
        io::write_file_atomic(out_dir / "v3.svg", svg::bar_chart(xs, hs, "L", "V3"));
        manifest.outputs.push_back("v3.svg");
    }

    std::cout << "V3 peak " << fd(peak) << " at L=" << peak_depth << "\n";
    finish(manifest, out_dir, timer);
    return 0;
}

// ----------------------------------------------------------------- matrices

int cmd_matrices(std::size_t width, std::size_t max_depth, const std::string& activations,
                 std::size_t seeds, std::uint64_t seed, std::size_t jobs, bool svg,
                 const fs::path& out_dir) {
    Timer timer;
    Rng master(seed);

    // one shared random point pair, per the experiment setup
    Rng pair_rng = master.child(0);
    Vector x(width), xbar(width);
    for (double& v : x) v = pair_rng.uniform(-1.0, 1.0);
    for (double& v : xbar) v = pair_rng.uniform(-1.0, 1.0);

    io::RunManifest manifest;
    manifest.subcommand = "matrices";
    manifest.master_seed = seed;
    manifest.parameters = {{"width", width}, {"max_depth", max_depth},
                           {"activations", activations}, {"seeds", seeds}, {"jobs", jobs}};

    std::vector<std::vector<double>> median_log2_c_per_act;
    std::vector<svg::Series> chart;
    const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    for (const std::string& act_name : split_list(activations)) {
        Activation act = activation_from_string(act_name);
        InitScheme scheme = default_scheme_for(act);
        // Diminished biases for the contrast sweep. Bias magnitudes accrete
        // into the pre-activations, freeze the activation patterns of the two
        // traces, and from then on the C and G factors coincide, hiding the
        // separation this experiment measures. A small positive sigma keeps
        // the nets effectively homogeneous while the trace scale is
        // macroscopic yet still re-randomizes the patterns once the scale
        // decays to the bias level.
        scheme.bias_sigma = 1e-6;

        std::vector<std::vector<MatrixSweepRecord>> sweeps(seeds);
        parallel_for(seeds, jobs, [&](std::size_t s) {
            Rng rng = master.child(1 + s);
            sweeps[s] = depth_sweep(width, max_depth, act, scheme, x, xbar, rng);
        });

        for (std::size_t s = 0; s < seeds; ++s) {
            io::Csv csv({"L", "norm_C", "norm_G_x", "norm_G_xbar", "log2_scale_C", "seed",
                         "activation", "init"});
            for (const auto& rec : sweeps[s])
                csv.row({std::to_string(rec.depth), fd(rec.norm_C), fd(rec.norm_G_x),
                         fd(rec.norm_G_xbar), std::to_string(rec.log2_scale_C),
                         std::to_string(rec.seed), to_string(rec.activation),
                         to_string(rec.init)});
            std::string name = "sweep_" + act_name + "_seed" + std::to_string(s) + ".csv";
            csv.write(out_dir / name);
            manifest.outputs.push_back(name);
        }

        // median aggregate in log2 space
        auto median_of = [&](std::size_t L_idx, auto get) {
            std::vector<double> vals;
            for (std::size_t s = 0; s < seeds; ++s) vals.push_back(get(sweeps[s][L_idx]));
            std::sort(vals.begin(), vals.end());
            return vals[vals.size() / 2];
        };
        io::Csv agg({"L", "median_log2_norm_C", "median_log2_norm_G_x",
                     "median_log2_norm_G_xbar"});
        std::vector<double> med_c, ls, med_gx;
        for (std::size_t li = 0; li < max_depth; ++li) {
            double mc = median_of(li, [](const auto& r) { return r.log2_norm_C; });
            double mgx = median_of(li, [](const auto& r) { return r.log2_norm_G_x; });
            double mgxb = median_of(li, [](const auto& r) { return r.log2_norm_G_xbar; });
            agg.row({std::to_string(li + 1), fd(mc), fd(mgx), fd(mgxb)});
            med_c.push_back(mc);
            med_gx.push_back(mgx);
            ls.push_back(static_cast<double>(li + 1));
        }
        std::string agg_name = "median_" + act_name + ".csv";
        agg.write(out_dir / agg_name);
        manifest.outputs.push_back(agg_name);
        median_log2_c_per_act.push_back(med_c);

        if (svg) {
            double log10_of_2 = std::log10(2.0);
            auto to_log10 = [&](const std::vector<double>& v) {
                std::vector<double> out;
                for (double e : v) out.push_back(std::isfinite(e) ? std::pow(10.0, e * log10_of_2)
                                                                  : 0.0);
                return out;
            };
            chart.push_back({"C " + act_name, ls, to_log10(med_c),
                             colors[chart.size() % colors.size()]});
            chart.push_back({"G_x " + act_name, ls, to_log10(med_gx),
                             colors[chart.size() % colors.size()]});
        }

        double final_ratio_log2 = med_c.back() - med_gx.back();
        std::cout << act_name << ": median log10(|C|/|G_x|) at L=" << max_depth << " = "
                  << fd(final_ratio_log2 * std::log10(2.0)) << "\n";
    }

    if (median_log2_c_per_act.size() == 2) {
        auto acts = split_list(activations);
        io::Csv ratio({"L", "log10_ratio_C_" + acts[1] + "_over_" + acts[0]});
        for (std::size_t li = 0; li < max_depth; ++li) {
            double r = (median_log2_c_per_act[1][li] - median_log2_c_per_act[0][li]) *
                       std::log10(2.0);
            ratio.row({std::to_string(li + 1), fd(r)});
        }
        ratio.write(out_dir / "ratio_C.csv");
        manifest.outputs.push_back("ratio_C.csv");
    }
    if (svg) {
        io::write_file_atomic(out_dir / "norms.svg",
                              svg::line_chart(chart, "L", "spectral norm", /*log_y=*/true));
        manifest.outputs.push_back("norms.svg");
    }
    finish(manifest, out_dir, timer);
    return 0;
}

// ---------------------------------------------------------------- probcheck

int cmd_probcheck(const std::string& ps, const std::string& ds, std::size_t trials,
                  std::uint64_t seed, const fs::path& out_dir) {
    Timer timer;
    if (trials == 0) throw CLI::ValidationError("--trials", "must be positive");

    io::Csv csv({"p", "d", "activation", "closed", "mc", "abs_err", "four_sigma", "status"});
    Rng master(seed);
    std::size_t stream = 0;
    bool all_pass = true;
    for (const std::string& p_tok : split_list(ps)) {
        double p = std::stod(p_tok);
        for (const std::string& d_tok : split_list(ds)) {
            std::size_t d = std::stoul(d_tok);
            for (Activation act : {Activation::relu, Activation::abs}) {
                double closed = preserve_probability_closed(p, d, act);
                Rng rng = master.child(stream++);
                double mc = preserve_probability_mc(p, d, act, trials, rng);
                double err = std::abs(mc - closed);
                double four_sigma =
                    4.0 * std::sqrt(closed * (1.0 - closed) / static_cast<double>(trials));
                bool pass = err <= four_sigma;
                all_pass = all_pass && pass;
                csv.row({fd(p), std::to_string(d), to_string(act), fd(closed), fd(mc), fd(err),
                         fd(four_sigma), pass ? "PASS" : "FAIL"});
            }
        }
    }
    csv.write(out_dir / "probcheck.csv");

    io::RunManifest manifest;
    manifest.subcommand = "probcheck";
    manifest.master_seed = seed;
    manifest.parameters = {{"p", ps}, {"d", ds}, {"trials", trials}};
    manifest.outputs.push_back("probcheck.csv");
    std::cout << (all_pass ? "all rows PASS\n" : "some rows FAIL\n");
    finish(manifest, out_dir, timer);
    return all_pass ? 0 : 1;
}

// ------------------------------------------------------------ train helpers

json result_to_json(const TrainResult& r) {
    return json{{"best_train_loss", r.best_train_loss},
                {"best_train_acc", r.best_train_acc},
                {"test_loss_at_best", r.test_loss_at_best},
                {"test_acc_at_best", r.test_acc_at_best},
                {"best_iteration", r.best_iteration},
                {"lr_used", r.lr_used},
                {"seed", r.seed},
                {"diverged", r.diverged},
                {"width", r.width},
                {"actual_params", r.actual_params}};
}

TrainConfig make_train_config(std::size_t params, std::size_t depth,
                              const std::string& activation, std::size_t iterations,
                              const std::string& lr_grid, std::size_t seeds, bool reduced) {
    TrainConfig cfg;
    cfg.budget = params;
    cfg.depth = depth;
    cfg.activation = activation_from_string(activation);
    // Training keeps the TrainConfig bias convention (zero starting biases).
    cfg.scheme = default_scheme_for(cfg.activation).with_bias_sigma(0.0);
    cfg.seeds = seeds;
    if (reduced) cfg = cfg.reduced();
    if (iterations > 0) cfg.iterations = iterations;
    if (!lr_grid.empty()) {
        cfg.lr_grid.clear();
        for (const std::string& tok : split_list(lr_grid)) cfg.lr_grid.push_back(std::stod(tok));
    }
    if (seeds > 0) cfg.seeds = seeds;
    return cfg;
}

int cmd_train(std::size_t params, std::size_t depth, const std::string& activation,
              std::size_t iterations, const std::string& lr_grid, std::size_t seeds, bool reduced,
              std::uint64_t seed, const fs::path& out_dir) {
    Timer timer;
    TrainConfig cfg = make_train_config(params, depth, activation, iterations, lr_grid,
                                        seeds == 0 ? 1 : seeds, reduced);
    CheckerboardDataset ds = checkerboard_generate();
    Rng master(seed);

    json per_seed = json::array();
    TrainResult best;
    bool have_best = false;
    std::vector<TrainResult> best_cells;
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
        std::vector<TrainResult> cells;
        TrainResult r = train_gd(cfg, ds, master.child(s).seed(), &cells);
        per_seed.push_back(result_to_json(r));
        if (!r.diverged && (!have_best || r.best_train_loss < best.best_train_loss)) {
            best = r;
            best_cells = cells;
            have_best = true;
        }
    }

    json out = {{"config",
                 {{"params", params},
                  {"depth", depth},
                  {"activation", activation},
                  {"iterations", cfg.iterations},
                  {"lr_grid", cfg.lr_grid},
                  {"seeds", cfg.seeds}}},
                {"best", have_best ? result_to_json(best) : json(nullptr)},
                {"per_seed", per_seed}};
    io::write_file_atomic(out_dir / "train.json", out.dump(2) + "\n");

    io::Csv curve({"iteration", "train_loss"});
    for (const auto& cell : best_cells)
        if (cell.lr_used == best.lr_used)
            for (std::size_t i = 0; i < cell.history.size(); ++i)
                curve.row({std::to_string(i * cfg.history_stride), fd(cell.history[i])});
    curve.write(out_dir / "loss_curve.csv");

    io::RunManifest manifest;
    manifest.subcommand = "train";
    manifest.master_seed = seed;
    manifest.parameters = out["config"];
    manifest.outputs = {"train.json", "loss_curve.csv"};
    if (have_best)
        std::cout << "best train acc " << fd(best.best_train_acc) << " (loss "
                  << fd(best.best_train_loss) << ", lr " << fd(best.lr_used) << ")\n";
    else
        std::cout << "all runs diverged\n";
    finish(manifest, out_dir, timer);
    return 0;
}

int cmd_trainsweep(std::size_t params, const std::string& depths_flag,
                   const std::string& activation, std::size_t iterations,
                   const std::string& lr_grid, std::size_t seeds, bool reduced,
                   std::uint64_t seed, std::size_t jobs, bool svg, const fs::path& out_dir) {
    Timer timer;
    std::vector<std::size_t> depths = parse_depths(depths_flag);
    TrainConfig cfg = make_train_config(params, depths.front(), activation, iterations, lr_grid,
                                        seeds, reduced);
    CheckerboardDataset ds = checkerboard_generate();
    Rng master(seed);

    // (depth, seed) cells are independent; run them through the worker pool
    struct Cell {
        std::size_t depth_idx, seed_idx;
        TrainResult best;
        std::vector<TrainResult> runs;
    };
    std::vector<Cell> cells;
    for (std::size_t di = 0; di < depths.size(); ++di)
        for (std::size_t s = 0; s < cfg.seeds; ++s) cells.push_back({di, s, {}, {}});

    parallel_for(cells.size(), jobs, [&](std::size_t c) {
        TrainConfig cell_cfg = cfg;
        cell_cfg.depth = depths[cells[c].depth_idx];
        std::uint64_t cell_seed = master.child(cells[c].depth_idx).child(cells[c].seed_idx).seed();
        cells[c].best = train_gd(cell_cfg, ds, cell_seed, &cells[c].runs);
    });

    io::Csv runs({"L", "d", "actual_params", "seed", "lr", "best_train_loss", "best_train_acc",
                  "test_loss", "test_acc", "best_iter", "diverged"});
    for (const auto& cell : cells)
        for (const auto& r : cell.runs)
            runs.row({std::to_string(depths[cell.depth_idx]), std::to_string(r.width),
                      std::to_string(r.actual_params), std::to_string(r.seed), fd(r.lr_used),
                      fd(r.best_train_loss), fd(r.best_train_acc), fd(r.test_loss_at_best),
                      fd(r.test_acc_at_best), std::to_string(r.best_iteration),
                      r.diverged ? "1" : "0"});
    runs.write(out_dir / "sweep_runs.csv");

    io::Csv agg({"L", "d", "mean_train_loss", "var_train_loss", "mean_train_acc",
                 "var_train_acc", "mean_test_loss", "var_test_loss", "mean_test_acc",
                 "var_test_acc"});
    std::vector<double> ls, acc_mean, loss_mean, test_acc_mean, test_loss_mean;
    for (std::size_t di = 0; di < depths.size(); ++di) {
        std::vector<const TrainResult*> per_seed;
        for (const auto& cell : cells)
            if (cell.depth_idx == di && !cell.best.diverged) per_seed.push_back(&cell.best);
        auto moments = [&](auto get) {
            double mean = 0.0, var = 0.0;
            if (per_seed.empty()) return std::pair{0.0, 0.0};
            for (const auto* r : per_seed) mean += get(*r);
            mean /= static_cast<double>(per_seed.size());
            for (const auto* r : per_seed) var += (get(*r) - mean) * (get(*r) - mean);
            var /= static_cast<double>(per_seed.size());
            return std::pair{mean, var};
        };
        auto [mtl, vtl] = moments([](const TrainResult& r) { return r.best_train_loss; });
        auto [mta, vta] = moments([](const TrainResult& r) { return r.best_train_acc; });
        auto [mel, vel] = moments([](const TrainResult& r) { return r.test_loss_at_best; });
        auto [mea, vea] = moments([](const TrainResult& r) { return r.test_acc_at_best; });
        std::size_t d = width_for_depth(params, depths[di]).width;
        agg.row({std::to_string(depths[di]), std::to_string(d), fd(mtl), fd(vtl), fd(mta),
                 fd(vta), fd(mel), fd(vel), fd(mea), fd(vea)});
        ls.push_back(static_cast<double>(depths[di]));
        acc_mean.push_back(mta);
        loss_mean.push_back(mtl);
        test_acc_mean.push_back(mea);
        test_loss_mean.push_back(mel);
    }
    agg.write(out_dir / "sweep_agg.csv");

    io::RunManifest manifest;
    manifest.subcommand = "trainsweep";
    manifest.master_seed = seed;
    manifest.parameters = {{"params", params},     {"depths", depths_flag},
                           {"activation", activation}, {"iterations", cfg.iterations},
                           {"lr_grid", cfg.lr_grid},   {"seeds", cfg.seeds},
                           {"reduced", reduced},       {"jobs", jobs}};
    manifest.outputs = {"sweep_runs.csv", "sweep_agg.csv"};

    if (svg) {
        io::write_file_atomic(
            out_dir / "sweep_acc.svg",
            svg::line_chart({{"train acc", ls, acc_mean, "#1f77b4"},
                             {"test acc", ls, test_acc_mean, "#d62728"}},
                            "L", "accuracy"));
        io::write_file_atomic(
            out_dir / "sweep_loss.svg",
            svg::line_chart({{"train loss", ls, loss_mean, "#1f77b4"},
                             {"test loss", ls, test_loss_mean, "#d62728"}},
                            "L", "loss", /*log_y=*/true));
        manifest.outputs.push_back("sweep_acc.svg");
        manifest.outputs.push_back("sweep_loss.svg");
    }
    finish(manifest, out_dir, timer);
    return 0;
}

int cmd_checkerboard(bool flip_parity, double train_fraction, std::uint64_t seed,
                     const fs::path& out_dir) {
    Timer timer;
    CheckerboardDataset ds = checkerboard_generate(flip_parity);
    Rng rng(seed);
    DatasetSplit split = split_dataset(ds, train_fraction, rng);
    std::vector<bool> in_train(ds.size(), false);
    for (std::size_t i : split.train) in_train[i] = true;

    io::Csv csv({"x", "y", "label", "is_train"});
    for (std::size_t i = 0; i < ds.size(); ++i)
        csv.row({fd(ds.points[i].first), fd(ds.points[i].second), std::to_string(ds.labels[i]),
                 in_train[i] ? "1" : "0"});
    csv.write(out_dir / "checkerboard.csv");

    io::RunManifest manifest;
    manifest.subcommand = "checkerboard";
    manifest.master_seed = seed;
    manifest.parameters = {{"flip_parity", flip_parity}, {"train_fraction", train_fraction}};
    manifest.outputs = {"checkerboard.csv"};
    std::cout << ds.size() << " points, " << split.train.size() << " train\n";
    finish(manifest, out_dir, timer);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variability experiments for fully connected networks"};
    app.require_subcommand(1);

    std::uint64_t seed = default_seed();
    std::string out_dir = "out";
    std::size_t jobs = 1;
    app.add_option("--seed", seed, "master seed (env VARLAB_SEED is the fallback)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads for independent cells");

    // landscape
    std::string ls_act = "relu", ls_init = "default";
    std::size_t ls_depth = 10, ls_params = 10000, ls_grid = 81, ls_samples = 9;
    double ls_sigma = 1.0;
    bool ls_svg = false;
    auto* ls = app.add_subcommand("landscape", "random-parameter surface plots");
    ls->add_option("--activation", ls_act)->check(CLI::IsMember({"sigmoid", "relu", "abs"}));
    ls->add_option("--depth", ls_depth);
    ls->add_option("--params", ls_params);
    ls->add_option("--grid", ls_grid);
    ls->add_option("--samples", ls_samples);
    ls->add_option("--init", ls_init);
    ls->add_option("--sigma", ls_sigma);
    ls->add_flag("--svg", ls_svg);

    // v3
    std::string v3_depths = "3:45:3", v3_act = "relu", v3_init = "default";
    std::size_t v3_params = 3300, v3_samples = 1000, v3_grid = 81;
    double v3_sigma = 1.0;
    bool v3_svg = false;
    auto* v3 = app.add_subcommand("v3", "V3 variability sweep over depth");
    v3->add_option("--params", v3_params);
    v3->add_option("--depths", v3_depths);
    v3->add_option("--samples", v3_samples);
    v3->add_option("--activation", v3_act)->check(CLI::IsMember({"sigmoid", "relu", "abs"}));
    v3->add_option("--init", v3_init);
    v3->add_option("--sigma", v3_sigma);
    v3->add_option("--grid", v3_grid);
    v3->add_flag("--svg", v3_svg);

    // matrices
    std::string mx_acts = "relu";
    std::size_t mx_width = 64, mx_depth = 1000, mx_seeds = 20;
    bool mx_svg = false;
    auto* mx = app.add_subcommand("matrices", "C/G spectral-norm depth sweep");
    mx->add_option("--width", mx_width);
    mx->add_option("--max-depth", mx_depth);
    mx->add_option("--activation", mx_acts, "one activation or a comma pair, e.g. relu,abs");
    mx->add_option("--seeds", mx_seeds);
    mx->add_flag("--svg", mx_svg);

    // probcheck
    std::string pc_p = "0.25,0.5", pc_d = "1,2,3";
    std::size_t pc_trials = 1000000;
    auto* pc = app.add_subcommand("probcheck", "closed form vs Monte Carlo probabilities");
    pc->add_option("--p", pc_p);
    pc->add_option("--d", pc_d);
    pc->add_option("--trials", pc_trials);

    // train / trainsweep
    std::string tr_act = "relu", tr_lr_grid;
    std::size_t tr_params = 1600, tr_depth = 10, tr_iters = 0, tr_seeds = 0;
    bool tr_reduced = false;
    auto* tr = app.add_subcommand("train", "one checkerboard training cell");
    tr->add_option("--params", tr_params);
    tr->add_option("--depth", tr_depth);
    tr->add_option("--activation", tr_act);
    tr->add_option("--iterations", tr_iters);
    tr->add_option("--lr-grid", tr_lr_grid);
    tr->add_option("--seeds", tr_seeds);
    tr->add_flag("--reduced", tr_reduced, "desk-scale protocol");

    std::string sw_depths = "2:20:1,22:31:2", sw_act = "relu", sw_lr_grid;
    std::size_t sw_params = 3200, sw_iters = 0, sw_seeds = 0;
    bool sw_reduced = false, sw_svg = false;
    auto* sw = app.add_subcommand("trainsweep", "checkerboard depth sweep");
    sw->add_option("--params", sw_params);
    sw->add_option("--depths", sw_depths);
    sw->add_option("--activation", sw_act);
    sw->add_option("--iterations", sw_iters);
    sw->add_option("--lr-grid", sw_lr_grid);
    sw->add_option("--seeds", sw_seeds);
    sw->add_flag("--reduced", sw_reduced, "desk-scale protocol");
    sw->add_flag("--svg", sw_svg);

    // checkerboard
    bool cb_flip = false;
    double cb_frac = 0.25;
    auto* cb = app.add_subcommand("checkerboard", "dataset export");
    cb->add_flag("--flip-parity", cb_flip);
    cb->add_option("--train-fraction", cb_frac);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        fs::path out(out_dir);
        if (*ls)
            return cmd_landscape(ls_act, ls_depth, ls_params, ls_grid, ls_samples, ls_init,
                                 ls_sigma, seed, ls_svg, out);
        if (*v3)
            return cmd_v3(v3_params, v3_depths, v3_samples, v3_act, v3_init, v3_sigma, v3_grid,
                          seed, v3_svg, out);
        if (*mx)
            return cmd_matrices(mx_width, mx_depth, mx_acts, mx_seeds, seed, jobs, mx_svg, out);
        if (*pc) return cmd_probcheck(pc_p, pc_d, pc_trials, seed, out);
        if (*tr)
            return cmd_train(tr_params, tr_depth, tr_act, tr_iters, tr_lr_grid, tr_seeds,
                             tr_reduced, seed, out);
        if (*sw)
            return cmd_trainsweep(sw_params, sw_depths, sw_act, sw_iters, sw_lr_grid, sw_seeds,
                                  sw_reduced, seed, jobs, sw_svg, out);
        if (*cb) return cmd_checkerboard(cb_flip, cb_frac, seed, out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
