#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "varlab/numerics.hpp"

namespace varlab {

enum class Activation { sigmoid, relu, abs };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Elementwise activation. The sigmoid is evaluated with a branch on the
/// sign of t so exp never overflows.
double activate(Activation a, double t);

/// phi'(t), with phi'(0) = 0 at the ReLU/abs kink.
double activate_deriv(Activation a, double t);

/// Weight-matrix initialization. Biases are always N(0,1) unless bias_sigma
/// is overridden (0 selects exactly-zero biases, giving homogeneous nets).
/// sigma is read as a standard deviation throughout; a single
/// sigma applies to every matrix of a net, set by the hidden width d:
/// kaiming sqrt(2/d), xavier sqrt(1/d). The orthogonal scheme orthonormalizes
/// a standard-normal sample and applies no multiplier; rectangular (io)
/// matrices get a semi-orthogonal factor the same way.
struct InitScheme {
    enum class Kind { normal, kaiming, xavier, orthogonal };
    Kind kind = Kind::kaiming;
    double sigma = 1.0;  // used only by Kind::normal
    double bias_sigma = 1.0;

    static InitScheme normal(double sigma) { return {Kind::normal, sigma, 1.0}; }
    static InitScheme kaiming() { return {Kind::kaiming, 1.0, 1.0}; }
    static InitScheme xavier() { return {Kind::xavier, 1.0, 1.0}; }
    static InitScheme orthogonal() { return {Kind::orthogonal, 1.0, 1.0}; }

    InitScheme with_bias_sigma(double s) const {
        InitScheme c = *this;
        c.bias_sigma = s;
        return c;
    }

    double weight_sigma(std::size_t width) const;
};

std::string to_string(InitScheme::Kind k);
InitScheme::Kind init_kind_from_string(const std::string& s);

/// Default scheme the experiments pair with each activation:
/// sigmoid -> xavier, relu -> kaiming, abs -> xavier.
InitScheme default_scheme_for(Activation a);

struct NetworkConfig {
    std::size_t hidden_layers = 1;  // L
    std::size_t width = 1;          // d
    Activation activation = Activation::relu;
    /// (in_dim, out_dim) of the extended network; nullopt = hidden-only.
    std::optional<std::pair<std::size_t, std::size_t>> io_dims;

    static NetworkConfig hidden_only(std::size_t L, std::size_t d, Activation a) {
        return {L, d, a, std::nullopt};
    }
    static NetworkConfig extended(std::size_t L, std::size_t d, Activation a,
                                  std::size_t in_dim = 2, std::size_t out_dim = 2) {
        return {L, d, a, std::make_pair(in_dim, out_dim)};
    }
};

struct ParameterSet {
    Activation activation = Activation::relu;
    std::vector<Matrix> weights;  // W_1..W_L, each d x d
    std::vector<Vector> biases;   // b_1..b_L
    // Extended-network layers. The input layer is affine + activation,
    // the output layer is purely affine.
    std::optional<Matrix> w_in;   // d x in_dim
    std::optional<Vector> b_in;   // d
    std::optional<Matrix> w_out;  // out_dim x d
    std::optional<Vector> b_out;  // out_dim

    bool has_io() const { return w_in.has_value(); }
    std::size_t depth() const { return weights.size(); }
    std::size_t width() const { return weights.empty() ? 0 : weights[0].rows; }
    std::size_t in_dim() const { return has_io() ? w_in->cols : width(); }
    std::size_t out_dim() const { return has_io() ? w_out->rows : width(); }

    /// Hidden-layer parameters only: (d^2 + d) * L.
    std::size_t hidden_param_count() const;
    std::size_t total_param_count() const;
};

struct ForwardTrace {
    Vector input;                // s_0 of the hidden stack
    std::vector<Vector> z;       // z_1..z_L
    std::vector<Vector> s;       // s_1..s_L
    std::optional<Vector> z_in;  // extended: pre-activation of the input layer
    Vector output;               // s_L, or the affine output-layer image of it
};

ParameterSet init_params(const NetworkConfig& config, const InitScheme& scheme, Rng& rng);

ForwardTrace forward(const ParameterSet& params, const Vector& x);

/// Batched forward: columns of x are inputs. Returns per-layer pre-activation
/// and activation matrices, used by the gradient and the grid evaluators.
struct BatchTrace {
    Matrix input;           // s_0 columns
    std::vector<Matrix> z;  // z_1..z_L columns
    std::vector<Matrix> s;  // s_1..s_L columns
    std::optional<Matrix> z_in;
    Matrix output;
};

BatchTrace forward_batch(const ParameterSet& params, const Matrix& x_columns);

/// Sum of squared errors over the batch and its gradient (same shapes as
/// params). Requires the extended network. Accumulation order is fixed, so
/// results are deterministic.
std::pair<double, ParameterSet> loss_and_gradient(
    const ParameterSet& params, const std::vector<std::pair<Vector, Vector>>& batch);

/// Batched variant: columns of x/y are the samples.
std::pair<double, ParameterSet> loss_and_gradient(const ParameterSet& params,
                                                  const Matrix& x_columns,
                                                  const Matrix& y_columns);

/// Jacobian dF/dx. Hidden-only nets give the d x d product
/// grad_phi(z_L) W_L ... grad_phi(z_1) W_1; extended nets include the io
/// layers (out_dim x in_dim).
Matrix input_jacobian(const ParameterSet& params, const Vector& x);

nlohmann::json params_to_json(const ParameterSet& params);
ParameterSet params_from_json(const nlohmann::json& j);

}  // namespace varlab
