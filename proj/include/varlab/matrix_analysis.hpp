#pragma once

#include <cstdint>
#include <vector>

#include "varlab/network.hpp"
#include "varlab/numerics.hpp"

namespace varlab {

/// Diagonal of D_phi(u, v): componentwise divided differences
/// (phi(u_i) - phi(v_i)) / (u_i - v_i), with 1 on exact ties (the 0/0 = 1
/// convention) and phi'(u_i) substituted when |u_i - v_i| is below
/// 1e-12 * max(1, |u_i|), where the quotient is ill-conditioned.
Vector diff_diagonal(const Vector& u, const Vector& v, Activation act);

/// G_L = prod_{k=1..L} W_k^T grad_phi(z_k); the transpose of the input
/// Jacobian of a hidden-only net.
Matrix g_matrix(const ParameterSet& params, const Vector& x);

/// C_L = prod_{k=1..L} W_k^T D_phi(z_k, zbar_k), the two traces run from
/// x and xbar.
Matrix c_matrix(const ParameterSet& params, const Vector& x, const Vector& xbar);

/// Residual of the exact difference identity
/// F_L(x) - F_L(xbar) = C_L^T (x - xbar), scaled by 1 / (1 + ||x - xbar||).
double verify_c2c_identity(const ParameterSet& params, const Vector& x, const Vector& xbar);

struct MatrixSweepRecord {
    std::size_t depth = 0;
    double norm_C = 0.0;
    double norm_G_x = 0.0;
    double norm_G_xbar = 0.0;
    // log2 of the true norms; finite whenever the norm is nonzero, even when
    // the double value above under/overflows. -inf for an exactly zero product.
    double log2_norm_C = 0.0;
    double log2_norm_G_x = 0.0;
    double log2_norm_G_xbar = 0.0;
    long log2_scale_C = 0;  // power-of-2 exponent factored out of the C product
    std::uint64_t seed = 0;
    Activation activation = Activation::relu;
    InitScheme::Kind init = InitScheme::Kind::kaiming;
};

/// Incremental depth sweep of the C and G spectral norms. Layers are sampled
/// from rng in the same order init_params uses, so the depth-L prefix equals
/// a direct L-layer construction under the same seed. Running products are
/// rescaled by powers of 2 when their max-abs entry leaves [1e-300, 1e300],
/// keeping the reported norms exact in log space.
std::vector<MatrixSweepRecord> depth_sweep(std::size_t d, std::size_t L_max, Activation act,
                                           const InitScheme& scheme, const Vector& x,
                                           const Vector& xbar, Rng& rng);

/// Proposition-2 closed form: probability that |phi(u)-phi(v)| = |u-v|
/// componentwise, given each component positive with probability p.
double preserve_probability_closed(double p, std::size_t d, Activation act);

/// Monte-Carlo estimate of the same probability. Component signs are
/// Bernoulli(p), magnitudes half-normal; the distance-preservation event is
/// then a pure sign event and exact in floating point.
double preserve_probability_mc(double p, std::size_t d, Activation act, std::size_t trials,
                               Rng& rng);

}  // namespace varlab
