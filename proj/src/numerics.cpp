#include "varlab/numerics.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace varlab {

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

Vector mat_vec(const Matrix& m, const Vector& v) {
    if (m.cols != v.size())
        throw std::invalid_argument("mat_vec: dimension mismatch (" + std::to_string(m.cols) +
                                    " vs " + std::to_string(v.size()) + ")");
    Vector out(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        const double* row = &m.values[i * m.cols];
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("mat_mul: dimension mismatch (" + std::to_string(a.cols) +
                                    " vs " + std::to_string(b.rows) + ")");
    Matrix c(a.rows, b.cols);
    if (a.rows == 0 || b.cols == 0 || a.cols == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(a.rows),
                static_cast<int>(b.cols), static_cast<int>(a.cols), 1.0, a.values.data(),
                static_cast<int>(a.cols), b.values.data(), static_cast<int>(b.cols), 0.0,
                c.values.data(), static_cast<int>(c.cols));
    return c;
}

double max_abs(const Matrix& m) {
    double best = 0.0;
    for (double v : m.values) best = std::max(best, std::abs(v));
    return best;
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.values) acc += v * v;
    return std::sqrt(acc);
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

}  // namespace

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double Rng::uniform() {
    // 53 random bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double sigma) {
    if (has_spare_) {
        has_spare_ = false;
        return sigma * spare_;
    }
    // Box-Muller; u1 shifted away from 0 so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return sigma * r * std::cos(theta);
}

Rng Rng::child(std::uint64_t k) const { return Rng(mix64(seed_ + kGolden * (k + 1))); }

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double sigma, Rng& rng) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_matrix: sigma must be positive");
    Matrix m(rows, cols);
    for (double& v : m.values) v = rng.normal(sigma);
    return m;
}

Vector gaussian_vector(std::size_t dim, double sigma, Rng& rng) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_vector: sigma must be positive");
    Vector v(dim);
    for (double& x : v) x = rng.normal(sigma);
    return v;
}

Matrix orthogonalize(const Matrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("orthogonalize: matrix must be square");
    const std::size_t n = m.rows;
    const double rank_tol = 1e-12 * frobenius_norm(m);

    Matrix r = m;
    Matrix q = Matrix::identity(n);
    Vector v(n);

    for (std::size_t k = 0; k < n; ++k) {
        double norm_x = 0.0;
        for (std::size_t i = k; i < n; ++i) norm_x += r(i, k) * r(i, k);
        norm_x = std::sqrt(norm_x);

        double alpha = r(k, k) >= 0.0 ? -norm_x : norm_x;
        // v = x - alpha*e_k on the trailing block
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) {
            v[i] = r(i, k) - (i == k ? alpha : 0.0);
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 > 0.0) {
            // apply H = I - 2 v v^T / (v^T v) from the left to R and to Q^T rows
            for (std::size_t j = k; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t i = k; i < n; ++i) dot += v[i] * r(i, j);
                double f = 2.0 * dot / vnorm2;
                for (std::size_t i = k; i < n; ++i) r(i, j) -= f * v[i];
            }
            for (std::size_t j = 0; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t i = k; i < n; ++i) dot += v[i] * q(i, j);
                double f = 2.0 * dot / vnorm2;
                for (std::size_t i = k; i < n; ++i) q(i, j) -= f * v[i];
            }
        }
        if (std::abs(r(k, k)) < rank_tol)
            throw std::runtime_error("orthogonalize: rank-deficient input (|R_" +
                                     std::to_string(k) + "| below tolerance)");
    }
    // q currently holds the product of reflectors = Q^T
    return transpose(q);
}

SpectralNorm spectral_norm(const Matrix& m, double tol, std::size_t max_iter,
                           std::uint64_t seed) {
    if (m.rows == 0 || m.cols == 0)
        throw std::invalid_argument("spectral_norm: empty matrix");

    Rng rng(seed);
    Vector v(m.cols);
    double vn = 0.0;
    for (double& x : v) {
        x = rng.normal();
        vn += x * x;
    }
    vn = std::sqrt(vn);
    for (double& x : v) x /= vn;

    double estimate = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        // w = m v, u = m^T w
        Vector w(m.rows, 0.0);
        for (std::size_t i = 0; i < m.rows; ++i) {
            const double* row = &m.values[i * m.cols];
            double acc = 0.0;
            for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
            w[i] = acc;
        }
        double wn2 = 0.0;
        for (double x : w) wn2 += x * x;
        double next = std::sqrt(wn2);  // ||m v||, v unit
        if (next == 0.0) return {0.0, true};

        Vector u(m.cols, 0.0);
        for (std::size_t i = 0; i < m.rows; ++i) {
            const double* row = &m.values[i * m.cols];
            for (std::size_t j = 0; j < m.cols; ++j) u[j] += row[j] * w[i];
        }
        double un = 0.0;
        for (double x : u) un += x * x;
        un = std::sqrt(un);
        for (std::size_t j = 0; j < m.cols; ++j) v[j] = u[j] / un;

        if (it > 0 && std::abs(next - estimate) < tol * std::max(next, estimate)) {
            return {next, true};
        }
        estimate = next;
    }
    return {estimate, false};
}

double geometric_mean(std::span<const double> xs, double zero_threshold) {
    if (xs.empty()) throw std::invalid_argument("geometric_mean: empty input");
    double acc = 0.0;
    for (double x : xs) {
        if (x < 0.0) throw std::invalid_argument("geometric_mean: negative input");
        if (x < zero_threshold) return 0.0;
        acc += std::log(x);
    }
    return std::exp(acc / static_cast<double>(xs.size()));
}

}  // namespace varlab
