#include "varlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace varlab {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
        case Activation::abs: return "abs";
    }
    return "?";
}

Activation activation_from_string(const std::string& s) {
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "relu") return Activation::relu;
    if (s == "abs") return Activation::abs;
    throw std::invalid_argument("unknown activation: " + s);
}

double activate(Activation a, double t) {
    switch (a) {
        case Activation::sigmoid:
            if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
            {
                double e = std::exp(t);
                return e / (1.0 + e);
            }
        case Activation::relu: return t > 0.0 ? t : 0.0;
        case Activation::abs: return std::abs(t);
    }
    return 0.0;
}

double activate_deriv(Activation a, double t) {
    switch (a) {
        case Activation::sigmoid: {
            double s = activate(Activation::sigmoid, t);
            return s * (1.0 - s);
        }
        case Activation::relu: return t > 0.0 ? 1.0 : 0.0;
        case Activation::abs: return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    }
    return 0.0;
}

double InitScheme::weight_sigma(std::size_t width) const {
    switch (kind) {
        case Kind::normal: return sigma;
        case Kind::kaiming: return std::sqrt(2.0 / static_cast<double>(width));
        case Kind::xavier: return std::sqrt(1.0 / static_cast<double>(width));
        case Kind::orthogonal: return 1.0;  // no multiplier
    }
    return 1.0;
}

std::string to_string(InitScheme::Kind k) {
    switch (k) {
        case InitScheme::Kind::normal: return "normal";
        case InitScheme::Kind::kaiming: return "kaiming";
        case InitScheme::Kind::xavier: return "xavier";
        case InitScheme::Kind::orthogonal: return "orthogonal";
    }
    return "?";
}

InitScheme::Kind init_kind_from_string(const std::string& s) {
    if (s == "normal" || s == "gaussian") return InitScheme::Kind::normal;
    if (s == "kaiming") return InitScheme::Kind::kaiming;
    if (s == "xavier") return InitScheme::Kind::xavier;
    if (s == "orthogonal") return InitScheme::Kind::orthogonal;
    throw std::invalid_argument("unknown init scheme: " + s);
}

InitScheme default_scheme_for(Activation a) {
    switch (a) {
        case Activation::sigmoid: return InitScheme::xavier();
        case Activation::relu: return InitScheme::kaiming();
        case Activation::abs: return InitScheme::xavier();
    }
    return InitScheme::kaiming();
}

std::size_t ParameterSet::hidden_param_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.rows * w.cols;
    for (const auto& b : biases) n += b.size();
    return n;
}

std::size_t ParameterSet::total_param_count() const {
    std::size_t n = hidden_param_count();
    if (w_in) n += w_in->rows * w_in->cols + b_in->size();
    if (w_out) n += w_out->rows * w_out->cols + b_out->size();
    return n;
}

namespace {

/// Sample one weight matrix per the scheme. Orthogonal draws a standard
/// normal and orthonormalizes it; rectangular shapes go through the QR of
/// the tall orientation. Degenerate samples (never seen in practice) are
/// redrawn.
Matrix sample_weight(std::size_t rows, std::size_t cols, const InitScheme& scheme, double sigma,
                     Rng& rng) {
    if (scheme.kind != InitScheme::Kind::orthogonal)
        return gaussian_matrix(rows, cols, sigma, rng);

    for (int attempt = 0; attempt < 16; ++attempt) {
        Matrix g = gaussian_matrix(std::max(rows, cols), std::max(rows, cols), 1.0, rng);
        try {
            Matrix q = orthogonalize(g);
            if (rows == cols) return q;
            Matrix w(rows, cols);
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) w(i, j) = q(i, j);
            return w;
        } catch (const std::runtime_error&) {
            continue;  // resample
        }
    }
    throw std::runtime_error("sample_weight: repeated rank-deficient draws");
}

// bias_sigma == 0 selects exactly-zero biases (homogeneous nets); the rng is
// still advanced by the same number of draws so parameter streams line up
// across bias settings.
Vector sample_bias(std::size_t dim, double sigma, Rng& rng) {
    if (sigma == 0.0) {
        Vector b = gaussian_vector(dim, 1.0, rng);
        std::fill(b.begin(), b.end(), 0.0);
        return b;
    }
    return gaussian_vector(dim, sigma, rng);
}

void check_extended(const ParameterSet& p, const char* who) {
    if (!p.has_io()) throw std::invalid_argument(std::string(who) + ": extended network required");
}

}  // namespace

ParameterSet init_params(const NetworkConfig& config, const InitScheme& scheme, Rng& rng) {
    if (config.hidden_layers < 1 || config.width < 1)
        throw std::invalid_argument("init_params: need hidden_layers >= 1 and width >= 1");

    const std::size_t d = config.width;
    // one sigma for every weight matrix, set by the hidden width
    const double sigma_w = scheme.weight_sigma(d);
    ParameterSet p;
    p.activation = config.activation;

    if (config.io_dims) {
        p.w_in = sample_weight(d, config.io_dims->first, scheme, sigma_w, rng);
        p.b_in = sample_bias(d, scheme.bias_sigma, rng);
    }
    for (std::size_t k = 0; k < config.hidden_layers; ++k) {
        p.weights.push_back(sample_weight(d, d, scheme, sigma_w, rng));
        p.biases.push_back(sample_bias(d, scheme.bias_sigma, rng));
    }
    if (config.io_dims) {
        p.w_out = sample_weight(config.io_dims->second, d, scheme, sigma_w, rng);
        p.b_out = sample_bias(config.io_dims->second, scheme.bias_sigma, rng);
    }
    return p;
}

ForwardTrace forward(const ParameterSet& params, const Vector& x) {
    ForwardTrace t;
    const Activation act = params.activation;

    Vector s = x;
    if (params.has_io()) {
        if (x.size() != params.w_in->cols)
            throw std::invalid_argument("forward: input dim mismatch");
        Vector z = mat_vec(*params.w_in, x);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += (*params.b_in)[i];
        t.z_in = z;
        for (double& v : z) v = activate(act, v);
        s = std::move(z);
    } else if (!params.weights.empty() && x.size() != params.weights[0].cols) {
        throw std::invalid_argument("forward: input dim mismatch");
    }
    t.input = s;

    for (std::size_t k = 0; k < params.weights.size(); ++k) {
        Vector z = mat_vec(params.weights[k], s);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += params.biases[k][i];
        s = z;
        for (double& v : s) v = activate(act, v);
        t.z.push_back(std::move(z));
        t.s.push_back(s);
    }

    if (params.has_io()) {
        Vector out = mat_vec(*params.w_out, s);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*params.b_out)[i];
        t.output = std::move(out);
    } else {
        t.output = s;
    }
    return t;
}

namespace {

Matrix affine_batch(const Matrix& w, const Vector& b, const Matrix& x) {
    Matrix z = mat_mul(w, x);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += b[i];
    return z;
}

Matrix activate_batch(Activation act, const Matrix& z) {
    Matrix s = z;
    for (double& v : s.values) v = activate(act, v);
    return s;
}

}  // namespace

BatchTrace forward_batch(const ParameterSet& params, const Matrix& x_columns) {
    BatchTrace t;
    const Activation act = params.activation;

    Matrix s = x_columns;
    if (params.has_io()) {
        if (x_columns.rows != params.w_in->cols)
            throw std::invalid_argument("forward_batch: input dim mismatch");
        t.z_in = affine_batch(*params.w_in, *params.b_in, x_columns);
        s = activate_batch(act, *t.z_in);
    } else if (!params.weights.empty() && x_columns.rows != params.weights[0].cols) {
        throw std::invalid_argument("forward_batch: input dim mismatch");
    }
    t.input = s;

    for (std::size_t k = 0; k < params.weights.size(); ++k) {
        Matrix z = affine_batch(params.weights[k], params.biases[k], s);
        s = activate_batch(act, z);
        t.z.push_back(std::move(z));
        t.s.push_back(s);
    }
    t.output = params.has_io() ? affine_batch(*params.w_out, *params.b_out, s) : s;
    return t;
}

std::pair<double, ParameterSet> loss_and_gradient(const ParameterSet& params,
                                                  const Matrix& x_columns,
                                                  const Matrix& y_columns) {
    check_extended(params, "loss_and_gradient");
    if (x_columns.cols == 0) throw std::invalid_argument("loss_and_gradient: empty batch");
    if (y_columns.rows != params.out_dim() || y_columns.cols != x_columns.cols)
        throw std::invalid_argument("loss_and_gradient: label shape mismatch");

    const Activation act = params.activation;
    const std::size_t m = x_columns.cols;
    const std::size_t L = params.depth();

    BatchTrace t = forward_batch(params, x_columns);

    // residual and loss
    Matrix dout(t.output.rows, m);
    double loss = 0.0;
    for (std::size_t i = 0; i < dout.values.size(); ++i) {
        double r = t.output.values[i] - y_columns.values[i];
        loss += r * r;
        dout.values[i] = 2.0 * r;
    }

    ParameterSet g;
    g.activation = act;
    g.weights.resize(L);
    g.biases.resize(L);

    auto row_sums = [](const Matrix& mtx) {
        Vector v(mtx.rows, 0.0);
        for (std::size_t i = 0; i < mtx.rows; ++i)
            for (std::size_t j = 0; j < mtx.cols; ++j) v[i] += mtx(i, j);
        return v;
    };

    const Matrix& s_last = L > 0 ? t.s[L - 1] : t.input;
    g.w_out = mat_mul(dout, transpose(s_last));
    g.b_out = row_sums(dout);
    Matrix ds = mat_mul(transpose(*params.w_out), dout);

    for (std::size_t k = L; k-- > 0;) {
        Matrix dz = ds;
        for (std::size_t i = 0; i < dz.values.size(); ++i)
            dz.values[i] *= activate_deriv(act, t.z[k].values[i]);
        const Matrix& s_prev = k > 0 ? t.s[k - 1] : t.input;
        g.weights[k] = mat_mul(dz, transpose(s_prev));
        g.biases[k] = row_sums(dz);
        ds = mat_mul(transpose(params.weights[k]), dz);
    }

    Matrix dz_in = ds;
    for (std::size_t i = 0; i < dz_in.values.size(); ++i)
        dz_in.values[i] *= activate_deriv(act, t.z_in->values[i]);
    g.w_in = mat_mul(dz_in, transpose(x_columns));
    g.b_in = row_sums(dz_in);

    return {loss, std::move(g)};
}

std::pair<double, ParameterSet> loss_and_gradient(
    const ParameterSet& params, const std::vector<std::pair<Vector, Vector>>& batch) {
    check_extended(params, "loss_and_gradient");
    if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");

    Matrix x(params.in_dim(), batch.size());
    Matrix y(params.out_dim(), batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
        if (batch[j].first.size() != x.rows || batch[j].second.size() != y.rows)
            throw std::invalid_argument("loss_and_gradient: sample shape mismatch");
        for (std::size_t i = 0; i < x.rows; ++i) x(i, j) = batch[j].first[i];
        for (std::size_t i = 0; i < y.rows; ++i) y(i, j) = batch[j].second[i];
    }
    return loss_and_gradient(params, x, y);
}

Matrix input_jacobian(const ParameterSet& params, const Vector& x) {
    ForwardTrace t = forward(params, x);
    const Activation act = params.activation;

    // j accumulates grad_phi(z_k) W_k ... from the bottom up
    Matrix j;
    if (params.has_io()) {
        j = *params.w_in;
        for (std::size_t i = 0; i < j.rows; ++i) {
            double dphi = activate_deriv(act, (*t.z_in)[i]);
            for (std::size_t c = 0; c < j.cols; ++c) j(i, c) *= dphi;
        }
    } else {
        j = Matrix::identity(x.size());
    }

    for (std::size_t k = 0; k < params.weights.size(); ++k) {
        Matrix layer = params.weights[k];
        for (std::size_t i = 0; i < layer.rows; ++i) {
            double dphi = activate_deriv(act, t.z[k][i]);
            for (std::size_t c = 0; c < layer.cols; ++c) layer(i, c) *= dphi;
        }
        j = mat_mul(layer, j);
    }

    if (params.has_io()) j = mat_mul(*params.w_out, j);
    return j;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    return nlohmann::json{{"rows", m.rows}, {"cols", m.cols}, {"values", m.values}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.values = j.at("values").get<std::vector<double>>();
    if (m.values.size() != m.rows * m.cols)
        throw std::invalid_argument("matrix_from_json: value count mismatch");
    return m;
}

}  // namespace

nlohmann::json params_to_json(const ParameterSet& params) {
    nlohmann::json j;
    j["activation"] = to_string(params.activation);
    j["weights"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (const auto& w : params.weights) j["weights"].push_back(matrix_to_json(w));
    for (const auto& b : params.biases) j["biases"].push_back(b);
    if (params.has_io()) {
        j["w_in"] = matrix_to_json(*params.w_in);
        j["b_in"] = *params.b_in;
        j["w_out"] = matrix_to_json(*params.w_out);
        j["b_out"] = *params.b_out;
    }
    return j;
}

ParameterSet params_from_json(const nlohmann::json& j) {
    ParameterSet p;
    p.activation = activation_from_string(j.at("activation").get<std::string>());
    for (const auto& w : j.at("weights")) p.weights.push_back(matrix_from_json(w));
    for (const auto& b : j.at("biases")) p.biases.push_back(b.get<Vector>());
    if (j.contains("w_in")) {
        p.w_in = matrix_from_json(j.at("w_in"));
        p.b_in = j.at("b_in").get<Vector>();
        p.w_out = matrix_from_json(j.at("w_out"));
        p.b_out = j.at("b_out").get<Vector>();
    }
    return p;
}

}  // namespace varlab
