#include "varlab/matrix_analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace varlab {

Vector diff_diagonal(const Vector& u, const Vector& v, Activation act) {
    if (u.size() != v.size()) throw std::invalid_argument("diff_diagonal: dim mismatch");
    Vector d(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == v[i]) {
            d[i] = 1.0;  // 0/0 = 1 convention
        } else if (std::abs(u[i] - v[i]) < 1e-12 * std::max(1.0, std::abs(u[i]))) {
            d[i] = activate_deriv(act, u[i]);
        } else {
            d[i] = (activate(act, u[i]) - activate(act, v[i])) / (u[i] - v[i]);
        }
    }
    return d;
}

namespace {

void check_hidden_only(const ParameterSet& p, const char* who) {
    if (p.has_io())
        throw std::invalid_argument(std::string(who) + ": hidden-only network required");
}

/// a <- a * (W^T D), D diagonal. One dgemm plus a column scale.
void right_mul_wt_diag(Matrix& a, const Matrix& w, const Vector& diag) {
    a = mat_mul(a, transpose(w));
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) a(i, j) *= diag[j];
}

}  // namespace

Matrix g_matrix(const ParameterSet& params, const Vector& x) {
    check_hidden_only(params, "g_matrix");
    ForwardTrace t = forward(params, x);
    Matrix g = Matrix::identity(x.size());
    for (std::size_t k = 0; k < params.depth(); ++k) {
        Vector dphi(t.z[k].size());
        for (std::size_t i = 0; i < dphi.size(); ++i)
            dphi[i] = activate_deriv(params.activation, t.z[k][i]);
        right_mul_wt_diag(g, params.weights[k], dphi);
    }
    return g;
}

Matrix c_matrix(const ParameterSet& params, const Vector& x, const Vector& xbar) {
    check_hidden_only(params, "c_matrix");
    ForwardTrace t = forward(params, x);
    ForwardTrace tbar = forward(params, xbar);
    Matrix c = Matrix::identity(x.size());
    for (std::size_t k = 0; k < params.depth(); ++k) {
        Vector d = diff_diagonal(t.z[k], tbar.z[k], params.activation);
        right_mul_wt_diag(c, params.weights[k], d);
    }
    return c;
}

double verify_c2c_identity(const ParameterSet& params, const Vector& x, const Vector& xbar) {
    check_hidden_only(params, "verify_c2c_identity");
    ForwardTrace t = forward(params, x);
    ForwardTrace tbar = forward(params, xbar);
    Matrix c = c_matrix(params, x, xbar);

    Vector dx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] - xbar[i];
    Vector mapped = mat_vec(transpose(c), dx);

    double resid2 = 0.0, dx2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = t.output[i] - tbar.output[i] - mapped[i];
        resid2 += r * r;
        dx2 += dx[i] * dx[i];
    }
    return std::sqrt(resid2) / (1.0 + std::sqrt(dx2));
}

namespace {

/// Running matrix product with a power-of-2 exponent factored out so the
/// mantissa matrix stays inside double range.
struct ScaledProduct {
    Matrix m;
    long exp2 = 0;

    void renormalize() {
        double big = max_abs(m);
        if (big == 0.0) return;
        if (big > 1e300 || big < 1e-300) {
            int e = std::ilogb(big);
            double f = std::ldexp(1.0, -e);
            for (double& v : m.values) v *= f;
            exp2 += e;
        }
    }

    /// (norm as double, log2 of the true norm)
    std::pair<double, double> norm(std::uint64_t seed) const {
        double n = spectral_norm(m, 1e-8, 1000, seed).value;
        if (n == 0.0) return {0.0, -std::numeric_limits<double>::infinity()};
        double l2 = std::log2(n) + static_cast<double>(exp2);
        return {std::exp2(l2), l2};
    }
};

}  // namespace

std::vector<MatrixSweepRecord> depth_sweep(std::size_t d, std::size_t L_max, Activation act,
                                           const InitScheme& scheme, const Vector& x,
                                           const Vector& xbar, Rng& rng) {
    if (L_max < 1) throw std::invalid_argument("depth_sweep: L_max must be >= 1");
    if (x.size() != d || xbar.size() != d)
        throw std::invalid_argument("depth_sweep: point dimension mismatch");

    const std::uint64_t seed = rng.seed();
    ScaledProduct c{Matrix::identity(d), 0};
    ScaledProduct gx{Matrix::identity(d), 0};
    ScaledProduct gxbar{Matrix::identity(d), 0};
    Vector s = x, sbar = xbar;

    std::vector<MatrixSweepRecord> out;
    out.reserve(L_max);
    NetworkConfig layer_cfg = NetworkConfig::hidden_only(1, d, act);

    for (std::size_t L = 1; L <= L_max; ++L) {
        // one layer, drawn in init_params order (weights then bias)
        ParameterSet layer = init_params(layer_cfg, scheme, rng);
        const Matrix& w = layer.weights[0];
        const Vector& b = layer.biases[0];

        Vector z = mat_vec(w, s);
        Vector zbar = mat_vec(w, sbar);
        for (std::size_t i = 0; i < d; ++i) {
            z[i] += b[i];
            zbar[i] += b[i];
        }

        Vector dphi(d), dphibar(d);
        for (std::size_t i = 0; i < d; ++i) {
            dphi[i] = activate_deriv(act, z[i]);
            dphibar[i] = activate_deriv(act, zbar[i]);
        }
        Vector dd = diff_diagonal(z, zbar, act);

        right_mul_wt_diag(c.m, w, dd);
        right_mul_wt_diag(gx.m, w, dphi);
        right_mul_wt_diag(gxbar.m, w, dphibar);
        c.renormalize();
        gx.renormalize();
        gxbar.renormalize();

        for (std::size_t i = 0; i < d; ++i) {
            s[i] = activate(act, z[i]);
            sbar[i] = activate(act, zbar[i]);
        }

        MatrixSweepRecord rec;
        rec.depth = L;
        std::tie(rec.norm_C, rec.log2_norm_C) = c.norm(seed + L);
        std::tie(rec.norm_G_x, rec.log2_norm_G_x) = gx.norm(seed + L);
        std::tie(rec.norm_G_xbar, rec.log2_norm_G_xbar) = gxbar.norm(seed + L);
        rec.log2_scale_C = c.exp2;
        rec.seed = seed;
        rec.activation = act;
        rec.init = scheme.kind;
        out.push_back(rec);
    }
    return out;
}

double preserve_probability_closed(double p, std::size_t d, Activation act) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("preserve_probability: p in (0,1)");
    if (d < 1) throw std::invalid_argument("preserve_probability: d >= 1");
    double per =
        act == Activation::relu ? p * p : p * p + (1.0 - p) * (1.0 - p);
    if (act == Activation::sigmoid)
        throw std::invalid_argument("preserve_probability: relu or abs only");
    return std::pow(per, static_cast<double>(d));
}

double preserve_probability_mc(double p, std::size_t d, Activation act, std::size_t trials,
                               Rng& rng) {
    if (trials < 1) throw std::invalid_argument("preserve_probability_mc: trials >= 1");
    preserve_probability_closed(p, d, act);  // validates p, d, act

    std::size_t hits = 0;
    Vector u(d), v(d);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < d; ++i) {
            double su = rng.uniform() < p ? 1.0 : -1.0;
            double sv = rng.uniform() < p ? 1.0 : -1.0;
            u[i] = su * std::abs(rng.normal());
            v[i] = sv * std::abs(rng.normal());
        }
        bool preserved = true;
        for (std::size_t i = 0; i < d && preserved; ++i) {
            double lhs = std::abs(activate(act, u[i]) - activate(act, v[i]));
            double rhs = std::abs(u[i] - v[i]);
            preserved = lhs == rhs;
        }
        if (preserved) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace varlab
