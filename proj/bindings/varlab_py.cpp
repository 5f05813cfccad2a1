#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "varlab/experiments.hpp"
#include "varlab/matrix_analysis.hpp"
#include "varlab/network.hpp"
#include "varlab/numerics.hpp"
#include "varlab/variability.hpp"

namespace py = pybind11;
using namespace varlab;

namespace {

py::array_t<double> matrix_to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows, m.cols});
    std::copy(m.values.begin(), m.values.end(), out.mutable_data());
    return out;
}

Matrix numpy_to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.values.begin());
    return m;
}

ParameterSet make_params(std::size_t depth, std::size_t width, const std::string& activation,
                         const std::string& init, double sigma, std::uint64_t seed,
                         bool extended) {
    Activation act = activation_from_string(activation);
    InitScheme scheme = init.empty() ? default_scheme_for(act)
                                     : InitScheme{init_kind_from_string(init), sigma, 1.0};
    if (scheme.kind == InitScheme::Kind::normal) scheme.sigma = sigma;
    NetworkConfig cfg = extended ? NetworkConfig::extended(depth, width, act)
                                 : NetworkConfig::hidden_only(depth, width, act);
    Rng rng(seed);
    return init_params(cfg, scheme, rng);
}

}  // namespace

PYBIND11_MODULE(_varlab, m) {
    m.doc() = "Variability analysis of deep networks: V3, C/G matrices, trainability";

    py::class_<ParameterSet>(m, "ParameterSet")
        .def_property_readonly("depth", &ParameterSet::depth)
        .def_property_readonly("width", &ParameterSet::width)
        .def_property_readonly("hidden_param_count", &ParameterSet::hidden_param_count)
        .def_property_readonly("total_param_count", &ParameterSet::total_param_count)
        .def_property_readonly("has_io", &ParameterSet::has_io);

    m.def(
        "init_network",
        [](std::size_t depth, std::size_t width, const std::string& activation,
           const std::string& init, double sigma, std::uint64_t seed, bool extended) {
            return make_params(depth, width, activation, init, sigma, seed, extended);
        },
        py::arg("depth"), py::arg("width"), py::arg("activation") = "relu",
        py::arg("init") = "", py::arg("sigma") = 1.0, py::arg("seed") = 1,
        py::arg("extended") = true);

    m.def(
        "forward",
        [](const ParameterSet& p,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            return matrix_to_numpy(forward_batch(p, numpy_to_matrix(x)).output);
        },
        py::arg("params"), py::arg("x_columns"),
        "Batched forward pass; columns of x are the inputs.");

    m.def(
        "scalar_field",
        [](const ParameterSet& p, std::size_t grid_n) {
            Grid2D grid{grid_n, -1.0, 1.0};
            SurfaceField f = scalar_field(p, grid);
            py::array_t<double> out({grid_n, grid_n});
            std::copy(f.values.begin(), f.values.end(), out.mutable_data());
            return out;
        },
        py::arg("params"), py::arg("grid_n") = 81,
        "||F(x)||^2 on a grid over [-1,1]^2 as an (n, n) array.");

    m.def(
        "v3_sample",
        [](const ParameterSet& p, std::size_t grid_n) {
            return v3_sample(p, Grid2D{grid_n, -1.0, 1.0});
        },
        py::arg("params"), py::arg("grid_n") = 81);

    m.def(
        "v3_measure",
        [](const std::vector<std::size_t>& depths, std::size_t budget,
           const std::string& activation, const std::string& init, std::size_t samples,
           std::size_t grid_n, std::uint64_t seed) {
            V3Config cfg;
            cfg.grid = Grid2D{grid_n, -1.0, 1.0};
            cfg.num_samples = samples;
            cfg.activation = activation_from_string(activation);
            cfg.scheme = init.empty() ? default_scheme_for(cfg.activation)
                                      : InitScheme{init_kind_from_string(init), 1.0, 1.0};
            cfg.budget = budget;
            Rng rng(seed);
            auto pts = v3_measure(cfg, depths, rng);
            py::list out;
            for (const auto& pt : pts) {
                py::dict d;
                d["L"] = pt.depth;
                d["d"] = pt.width;
                d["V3"] = pt.v3;
                d["num_zero_samples"] = pt.num_zero_samples;
                out.append(d);
            }
            return out;
        },
        py::arg("depths"), py::arg("budget") = 3300, py::arg("activation") = "relu",
        py::arg("init") = "", py::arg("samples") = 1000, py::arg("grid_n") = 81,
        py::arg("seed") = 1);

    m.def(
        "g_matrix",
        [](const ParameterSet& p, const std::vector<double>& x) {
            return matrix_to_numpy(g_matrix(p, x));
        },
        py::arg("params"), py::arg("x"));

    m.def(
        "c_matrix",
        [](const ParameterSet& p, const std::vector<double>& x, const std::vector<double>& xbar) {
            return matrix_to_numpy(c_matrix(p, x, xbar));
        },
        py::arg("params"), py::arg("x"), py::arg("xbar"));

    m.def("verify_c2c_identity", &verify_c2c_identity, py::arg("params"), py::arg("x"),
          py::arg("xbar"),
          "Scaled residual of F(x) - F(xbar) = C^T (x - xbar); ~1e-15 when exact.");

    m.def(
        "preserve_probability",
        [](double p, std::size_t d, const std::string& activation) {
            return preserve_probability_closed(p, d, activation_from_string(activation));
        },
        py::arg("p"), py::arg("d"), py::arg("activation"));

    m.def(
        "preserve_probability_mc",
        [](double p, std::size_t d, const std::string& activation, std::size_t trials,
           std::uint64_t seed) {
            Rng rng(seed);
            return preserve_probability_mc(p, d, activation_from_string(activation), trials, rng);
        },
        py::arg("p"), py::arg("d"), py::arg("activation"), py::arg("trials") = 1000000,
        py::arg("seed") = 1);

    m.def(
        "width_for_depth",
        [](std::size_t n_w, std::size_t depth) {
            WidthPlan plan = width_for_depth(n_w, depth);
            py::dict d;
            d["budget"] = plan.budget;
            d["depth"] = plan.depth;
            d["width"] = plan.width;
            d["width_exact"] = plan.width_exact;
            d["actual_params"] = plan.actual_params;
            d["rho_exact"] = plan.rho_exact;
            d["rho_actual"] = plan.rho_actual;
            return d;
        },
        py::arg("n_w"), py::arg("depth"));

    m.def("activation_ratio", &activation_ratio, py::arg("n_w"), py::arg("depth"));

    m.def(
        "checkerboard",
        [](bool flip_parity) {
            CheckerboardDataset ds = checkerboard_generate(flip_parity);
            const std::size_t n = ds.size();
            std::vector<double> flat(2 * n);
            std::vector<bool>::const_iterator bit = ds.is_boundary.begin();
            std::vector<std::uint8_t> bnd(n);
            for (std::size_t k = 0; k < n; ++k) {
                flat[2 * k] = ds.points[k].first;
                flat[2 * k + 1] = ds.points[k].second;
                bnd[k] = *bit++ ? 1 : 0;
            }
            py::ssize_t sn = static_cast<py::ssize_t>(n);
            py::dict d;
            d["points"] = py::array_t<double>({sn, py::ssize_t{2}}, flat.data());
            d["labels"] = py::array_t<int>(sn, ds.labels.data());
            d["is_boundary"] =
                py::array_t<bool>(sn, reinterpret_cast<const bool*>(bnd.data()));
            return d;
        },
        py::arg("flip_parity") = false);

    m.def(
        "train_checkerboard",
        [](std::size_t n_w, std::size_t depth, const std::string& activation, bool reduced,
           std::size_t iterations, const std::vector<double>& lr_grid, std::uint64_t seed) {
            TrainConfig cfg;
            cfg.budget = n_w;
            cfg.depth = depth;
            cfg.activation = activation_from_string(activation);
            cfg.scheme = default_scheme_for(cfg.activation).with_bias_sigma(0.0);
            if (reduced) cfg = cfg.reduced();
            if (iterations > 0) cfg.iterations = iterations;
            if (!lr_grid.empty()) cfg.lr_grid = lr_grid;
            CheckerboardDataset ds = checkerboard_generate();
            TrainResult r = train_gd(cfg, ds, seed);
            py::dict d;
            d["best_train_loss"] = r.best_train_loss;
            d["best_train_acc"] = r.best_train_acc;
            d["test_loss"] = r.test_loss_at_best;
            d["test_acc"] = r.test_acc_at_best;
            d["best_iter"] = r.best_iteration;
            d["lr"] = r.lr_used;
            d["diverged"] = r.diverged;
            d["width"] = r.width;
            d["actual_params"] = r.actual_params;
            return d;
        },
        py::arg("n_w") = 3200, py::arg("depth") = 10, py::arg("activation") = "relu",
        py::arg("reduced") = true, py::arg("iterations") = 0,
        py::arg("lr_grid") = std::vector<double>{}, py::arg("seed") = 1);
}
