#include <doctest.h>

#include <cmath>
#include <vector>

#include "varlab/numerics.hpp"

using namespace varlab;

TEST_CASE("mat_vec basics") {
    Matrix id = Matrix::identity(2);
    CHECK(mat_vec(id, {3.0, 4.0}) == Vector{3.0, 4.0});

    Matrix zero(2, 2);
    CHECK(mat_vec(zero, {3.0, 4.0}) == Vector{0.0, 0.0});

    Matrix a(2, 2);
    a.values = {1, 2, 3, 4};
    CHECK(mat_vec(a, {1.0, 1.0}) == Vector{3.0, 7.0});

    CHECK_THROWS_AS(mat_vec(a, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("mat_mul basics") {
    Matrix a(2, 2);
    a.values = {1, 1, 0, 1};
    Matrix b(2, 2);
    b.values = {1, 0, 1, 1};
    Matrix c = mat_mul(a, b);
    CHECK(c.values == std::vector<double>{2, 1, 1, 1});

    Matrix id = Matrix::identity(2);
    CHECK(mat_mul(id, a).values == a.values);
    Matrix zero(2, 2);
    CHECK(mat_mul(a, zero).values == zero.values);

    CHECK_THROWS_AS(mat_mul(a, Matrix(3, 2)), std::invalid_argument);
}

TEST_CASE("mat_mul associativity on random triples") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n1 = 1 + rng.next_u64() % 32;
        std::size_t n2 = 1 + rng.next_u64() % 32;
        std::size_t n3 = 1 + rng.next_u64() % 32;
        std::size_t n4 = 1 + rng.next_u64() % 32;
        Matrix a = gaussian_matrix(n1, n2, 1.0, rng);
        Matrix b = gaussian_matrix(n2, n3, 1.0, rng);
        Matrix c = gaussian_matrix(n3, n4, 1.0, rng);
        Matrix lhs = mat_mul(mat_mul(a, b), c);
        Matrix rhs = mat_mul(a, mat_mul(b, c));
        double scale = frobenius_norm(lhs);
        for (std::size_t i = 0; i < lhs.values.size(); ++i)
            CHECK(std::abs(lhs.values[i] - rhs.values[i]) <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("rng determinism and stream independence") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // different seeds diverge within the first 16 draws
    Rng c(123), d(124);
    bool differ = false;
    for (int i = 0; i < 16 && !differ; ++i) differ = c.next_u64() != d.next_u64();
    CHECK(differ);

    // children depend only on (seed, index), not on parent draw position
    Rng e(7);
    Rng child_before = e.child(3);
    e.next_u64();
    e.normal();
    Rng child_after = e.child(3);
    for (int i = 0; i < 8; ++i) CHECK(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("gaussian sampling moments") {
    const std::size_t n = 1000000;
    Rng rng(9001);

    SUBCASE("mean, sigma=1") {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += rng.normal(1.0);
        CHECK(std::abs(sum / n) < 4e-3);  // 4 sigma / sqrt(n)
    }
    SUBCASE("std, sigma=0.5") {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double v = rng.normal(0.5);
            sum += v;
            sum2 += v * v;
        }
        double mean = sum / n;
        double sd = std::sqrt(sum2 / n - mean * mean);
        CHECK(std::abs(sd - 0.5) < 2e-3);
    }
    SUBCASE("fixed seed reproduces the matrix") {
        Rng r1(5), r2(5);
        Matrix m1 = gaussian_matrix(13, 7, 2.0, r1);
        Matrix m2 = gaussian_matrix(13, 7, 2.0, r2);
        CHECK(m1.values == m2.values);
    }
    SUBCASE("sigma validation") {
        CHECK_THROWS_AS(gaussian_matrix(2, 2, 0.0, rng), std::invalid_argument);
    }
}

namespace {

double ortho_error(const Matrix& q) {
    Matrix qtq = mat_mul(transpose(q), q);
    double worst = 0.0;
    for (std::size_t i = 0; i < qtq.rows; ++i)
        for (std::size_t j = 0; j < qtq.cols; ++j)
            worst = std::max(worst, std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)));
    return worst;
}

}  // namespace

TEST_CASE("orthogonalize") {
    SUBCASE("already orthogonal input") {
        Matrix id = Matrix::identity(4);
        CHECK(ortho_error(orthogonalize(id)) <= 1e-12);
    }
    SUBCASE("diag(2,3) maps to signed axes") {
        Matrix m(2, 2);
        m(0, 0) = 2.0;
        m(1, 1) = 3.0;
        Matrix q = orthogonalize(m);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(std::abs(q(j, j)) - 1.0) <= 1e-12);
            CHECK(std::abs(q(j, 1 - j)) <= 1e-12);
        }
    }
    SUBCASE("random gaussians, dims 2..64") {
        Rng rng(77);
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t n = 2 + rng.next_u64() % 63;
            Matrix g = gaussian_matrix(n, n, 1.0, rng);
            Matrix q = orthogonalize(g);
            CHECK(ortho_error(q) <= 1e-12);
        }
    }
    SUBCASE("rank deficiency is detected") {
        Matrix m(3, 3);  // rank 1
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) m(i, j) = static_cast<double>(i + 1);
        CHECK_THROWS_AS(orthogonalize(m), std::runtime_error);
    }
}

TEST_CASE("spectral_norm") {
    CHECK(spectral_norm(Matrix::identity(5)).value == doctest::Approx(1.0).epsilon(1e-8));

    Matrix d(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    CHECK(spectral_norm(d).value == doctest::Approx(3.0).epsilon(1e-8));

    Matrix nilpotent(2, 2);
    nilpotent(0, 1) = 2.0;
    CHECK(spectral_norm(nilpotent).value == doctest::Approx(2.0).epsilon(1e-8));

    SUBCASE("transpose and scaling invariances") {
        Rng rng(31);
        for (int trial = 0; trial < 10; ++trial) {
            Matrix m = gaussian_matrix(6, 9, 1.0, rng);
            double n1 = spectral_norm(m).value;
            CHECK(spectral_norm(transpose(m)).value == doctest::Approx(n1).epsilon(1e-6));
            Matrix scaled = m;
            for (double& v : scaled.values) v *= -2.5;
            CHECK(spectral_norm(scaled).value == doctest::Approx(2.5 * n1).epsilon(1e-6));
        }
    }
}

TEST_CASE("geometric_mean") {
    std::vector<double> a{1.0, 4.0};
    CHECK(geometric_mean(a, 0.0) == doctest::Approx(2.0).epsilon(1e-12));

    std::vector<double> withzero{1.0, 0.0, 9.0};
    CHECK(geometric_mean(withzero, 1e-30) == 0.0);

    const double e = std::exp(1.0);
    std::vector<double> es{e, e, e};
    CHECK(geometric_mean(es) == doctest::Approx(e).epsilon(1e-12));

    std::vector<double> empty;
    CHECK_THROWS_AS(geometric_mean(empty), std::invalid_argument);

    SUBCASE("permutation invariance and scale equivariance") {
        Rng rng(8);
        std::vector<double> xs;
        for (int i = 0; i < 12; ++i) xs.push_back(std::exp(rng.normal()));
        double gm = geometric_mean(xs);
        std::vector<double> rev(xs.rbegin(), xs.rend());
        CHECK(geometric_mean(rev) == doctest::Approx(gm).epsilon(1e-12));
        std::vector<double> scaled = xs;
        for (double& v : scaled) v *= 7.5;
        CHECK(geometric_mean(scaled) == doctest::Approx(7.5 * gm).epsilon(1e-12));
    }
}
