#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace varlab {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major, length rows*cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix diagonal(const Vector& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }
};

Matrix transpose(const Matrix& m);
Vector mat_vec(const Matrix& m, const Vector& v);
Matrix mat_mul(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& m);
double frobenius_norm(const Matrix& m);

/// Deterministic 64-bit generator (SplitMix64 stream).
///
/// The state advances by the golden-ratio increment on every draw and the
/// output is the finalizer of the new state, so a generator is fully
/// determined by its seed. Child generators mix the *original* seed with the
/// stream index, which makes them independent of how many draws the parent
/// or any sibling has made.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// N(0, sigma^2) via Box-Muller (sigma is the standard deviation).
    double normal(double sigma = 1.0);

    /// Child stream `k`, reproducible from (seed, k) alone.
    Rng child(std::uint64_t k) const;

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double sigma, Rng& rng);
Vector gaussian_vector(std::size_t dim, double sigma, Rng& rng);

/// Orthonormal factor Q of a Householder QR of `m` (square, full rank).
/// Throws std::runtime_error when a diagonal of R falls below
/// 1e-12 * ||m||_F, signalling a degenerate sample the caller should redraw.
Matrix orthogonalize(const Matrix& m);

struct SpectralNorm {
    double value = 0.0;
    bool converged = true;
};

/// Largest singular value by power iteration on m^T m with a seeded random
/// start vector. Non-convergence returns the best estimate, flagged.
SpectralNorm spectral_norm(const Matrix& m, double tol = 1e-8,
                           std::size_t max_iter = 1000, std::uint64_t seed = 0x5eed);

/// Geometric mean in log space; returns 0 as soon as one input falls below
/// zero_threshold. Inputs must be nonnegative and nonempty.
double geometric_mean(std::span<const double> xs, double zero_threshold = 1e-30);

}  // namespace varlab
