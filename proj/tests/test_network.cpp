#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "varlab/network.hpp"

using namespace varlab;

namespace {

ParameterSet random_extended(Rng& rng, Activation act, std::size_t L, std::size_t d) {
    NetworkConfig cfg = NetworkConfig::extended(L, d, act);
    return init_params(cfg, default_scheme_for(act), rng);
}

}  // namespace

TEST_CASE("forward trivial cases") {
    SUBCASE("all-zero relu net is dead") {
        ParameterSet p;
        p.activation = Activation::relu;
        for (int k = 0; k < 3; ++k) {
            p.weights.push_back(Matrix(2, 2));
            p.biases.push_back(Vector(2, 0.0));
        }
        ForwardTrace t = forward(p, {0.5, -0.7});
        for (const auto& s : t.s) CHECK(s == Vector{0.0, 0.0});
    }
    SUBCASE("abs with identity weights") {
        ParameterSet p;
        p.activation = Activation::abs;
        p.weights.push_back(Matrix::identity(2));
        p.biases.push_back(Vector(2, 0.0));
        CHECK(forward(p, {-2.0, 3.0}).output == Vector{2.0, 3.0});
    }
    SUBCASE("hand-picked two-layer net") {
        // W1 = [[1,2],[0,1]], b1 = (1,-1); W2 = [[1,0],[1,1]], b2 = (0,2); relu
        ParameterSet p;
        p.activation = Activation::relu;
        Matrix w1(2, 2), w2(2, 2);
        w1.values = {1, 2, 0, 1};
        w2.values = {1, 0, 1, 1};
        p.weights = {w1, w2};
        p.biases = {{1.0, -1.0}, {0.0, 2.0}};
        // x=(1,1): z1=(4,0) -> s1=(4,0); z2=(4,6) -> s2=(4,6)
        CHECK(forward(p, {1.0, 1.0}).output == Vector{4.0, 6.0});
    }
    SUBCASE("shape mismatch") {
        ParameterSet p;
        p.activation = Activation::relu;
        p.weights.push_back(Matrix::identity(2));
        p.biases.push_back(Vector(2, 0.0));
        CHECK_THROWS_AS(forward(p, {1.0, 2.0, 3.0}), std::invalid_argument);
    }
}

TEST_CASE("trace consistency: s_k = phi(z_k) bitwise") {
    Rng rng(11);
    ParameterSet p = random_extended(rng, Activation::abs, 4, 6);
    ForwardTrace t = forward(p, {0.3, -0.8});
    for (std::size_t k = 0; k < t.z.size(); ++k)
        for (std::size_t i = 0; i < t.z[k].size(); ++i)
            CHECK(t.s[k][i] == activate(p.activation, t.z[k][i]));
}

TEST_CASE("forward_batch matches per-sample forward") {
    Rng rng(12);
    ParameterSet p = random_extended(rng, Activation::relu, 3, 5);
    Matrix x(2, 4);
    std::vector<Vector> xs = {{0.1, 0.2}, {-0.5, 0.9}, {1.0, -1.0}, {0.0, 0.0}};
    for (std::size_t j = 0; j < xs.size(); ++j) {
        x(0, j) = xs[j][0];
        x(1, j) = xs[j][1];
    }
    BatchTrace bt = forward_batch(p, x);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        Vector out = forward(p, xs[j]).output;
        for (std::size_t r = 0; r < out.size(); ++r)
            CHECK(bt.output(r, j) == doctest::Approx(out[r]).epsilon(1e-14));
    }
}

TEST_CASE("init_params statistics and determinism") {
    SUBCASE("kaiming pooled std, d=8") {
        Rng rng(2024);
        NetworkConfig cfg = NetworkConfig::hidden_only(200, 8, Activation::relu);
        double sum = 0.0, sum2 = 0.0;
        std::size_t count = 0;
        for (int rep = 0; rep < 80; ++rep) {
            ParameterSet p = init_params(cfg, InitScheme::kaiming(), rng);
            for (const auto& w : p.weights)
                for (double v : w.values) {
                    sum += v;
                    sum2 += v * v;
                    ++count;
                }
        }
        REQUIRE(count >= 1000000);
        double mean = sum / count;
        double sd = std::sqrt(sum2 / count - mean * mean);
        CHECK(std::abs(sd - 0.5) < 2e-3);  // sqrt(2/8)
    }
    SUBCASE("orthogonal init gives orthonormal hidden weights") {
        Rng rng(4);
        NetworkConfig cfg = NetworkConfig::hidden_only(5, 8, Activation::abs);
        ParameterSet p = init_params(cfg, InitScheme::orthogonal(), rng);
        for (const auto& w : p.weights) {
            Matrix wtw = mat_mul(transpose(w), w);
            for (std::size_t i = 0; i < 8; ++i)
                for (std::size_t j = 0; j < 8; ++j)
                    CHECK(std::abs(wtw(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
    }
    SUBCASE("same seed, same parameters") {
        Rng r1(99), r2(99);
        NetworkConfig cfg = NetworkConfig::extended(3, 4, Activation::relu);
        ParameterSet a = init_params(cfg, InitScheme::kaiming(), r1);
        ParameterSet b = init_params(cfg, InitScheme::kaiming(), r2);
        CHECK(a.w_in->values == b.w_in->values);
        for (std::size_t k = 0; k < a.weights.size(); ++k)
            CHECK(a.weights[k].values == b.weights[k].values);
        CHECK(a.b_out == b.b_out);
    }
    SUBCASE("parameter counting") {
        Rng rng(1);
        NetworkConfig cfg = NetworkConfig::extended(3, 4, Activation::relu);
        ParameterSet p = init_params(cfg, InitScheme::kaiming(), rng);
        CHECK(p.hidden_param_count() == (4 * 4 + 4) * 3);
        CHECK(p.total_param_count() == p.hidden_param_count() + (4 * 2 + 4) + (2 * 4 + 2));
    }
}

TEST_CASE("loss_and_gradient basics") {
    SUBCASE("zero network: loss is ||y||^2, weight gradients vanish") {
        ParameterSet p;
        p.activation = Activation::relu;
        p.w_in = Matrix(3, 2);
        p.b_in = Vector(3, 0.0);
        p.weights = {Matrix(3, 3)};
        p.biases = {Vector(3, 0.0)};
        p.w_out = Matrix(2, 3);
        p.b_out = Vector(2, 0.0);
        auto [loss, grad] = loss_and_gradient(p, {{{0.5, 0.5}, {1.0, 1.0}}});
        CHECK(loss == 2.0);
        // every ReLU is off, so all gradients upstream of the output bias are 0
        for (double v : grad.w_out->values) CHECK(v == 0.0);
        for (double v : grad.weights[0].values) CHECK(v == 0.0);
        for (double v : grad.w_in->values) CHECK(v == 0.0);
        // the output bias still sees the residual
        CHECK((*grad.b_out)[0] == -2.0);
    }
    SUBCASE("duplicated batch scales loss and gradient") {
        Rng rng(3);
        ParameterSet p = random_extended(rng, Activation::abs, 2, 4);
        std::vector<std::pair<Vector, Vector>> batch = {{{0.2, -0.4}, {1.0, 1.0}}};
        std::vector<std::pair<Vector, Vector>> tripled(3, batch[0]);
        auto [l1, g1] = loss_and_gradient(p, batch);
        auto [l3, g3] = loss_and_gradient(p, tripled);
        CHECK(l3 == doctest::Approx(3.0 * l1).epsilon(1e-12));
        CHECK((*g3.b_in)[0] == doctest::Approx(3.0 * (*g1.b_in)[0]).epsilon(1e-12));
    }
    SUBCASE("empty batch") {
        Rng rng(3);
        ParameterSet p = random_extended(rng, Activation::relu, 1, 2);
        CHECK_THROWS_AS(loss_and_gradient(p, {}), std::invalid_argument);
    }
}

TEST_CASE("analytic gradient matches central differences") {
    Rng master(314);
    int checked = 0;
    for (int trial = 0; checked < 50 && trial < 400; ++trial) {
        Rng rng = master.child(trial);
        Activation act = static_cast<Activation>(trial % 3);
        std::size_t L = 1 + rng.next_u64() % 6;
        std::size_t d = 2 + rng.next_u64() % 7;
        ParameterSet p = random_extended(rng, act, L, d);

        std::vector<std::pair<Vector, Vector>> batch;
        std::vector<Vector> inputs;
        for (int s = 0; s < 3; ++s) {
            Vector x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            batch.push_back({x, {static_cast<double>(s % 2), static_cast<double>(s % 2)}});
            inputs.push_back(x);
        }
        if (!oracles::away_from_kinks(p, inputs)) continue;

        auto [loss, grad] = loss_and_gradient(p, batch);
        std::vector<double> analytic = oracles::flat_values(grad);
        std::vector<double> numeric = oracles::fd_gradient(p, batch);
        REQUIRE(analytic.size() == numeric.size());
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            // the floor scales with the loss: central differences cannot
            // resolve entries below their cancellation noise eps*loss/h
            double floor = 1e-6 * (1.0 + std::abs(loss));
            double denom = std::max({floor, std::abs(analytic[i]), std::abs(numeric[i])});
            CHECK(std::abs(analytic[i] - numeric[i]) / denom <= 1e-4);
        }
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("input_jacobian") {
    SUBCASE("abs net is identity on positive traces") {
        ParameterSet p;
        p.activation = Activation::abs;
        p.weights = {Matrix::identity(3)};
        p.biases = {Vector(3, 0.0)};
        Matrix j = input_jacobian(p, {1.0, 2.0, 3.0});
        CHECK(j.values == Matrix::identity(3).values);
    }
    SUBCASE("dead relu net has zero jacobian") {
        ParameterSet p;
        p.activation = Activation::relu;
        p.weights = {Matrix::identity(2)};
        p.biases = {Vector(2, -10.0)};
        Matrix j = input_jacobian(p, {0.5, 0.5});
        for (double v : j.values) CHECK(v == 0.0);
    }
    SUBCASE("matches finite differences on random nets") {
        Rng master(2718);
        int checked = 0;
        for (int trial = 0; checked < 20 && trial < 200; ++trial) {
            Rng rng = master.child(trial);
            ParameterSet p = random_extended(rng, trial % 2 ? Activation::relu : Activation::abs,
                                             1 + rng.next_u64() % 4, 2 + rng.next_u64() % 5);
            Vector x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            if (!oracles::away_from_kinks(p, {x})) continue;
            Matrix analytic = input_jacobian(p, x);
            Matrix numeric = oracles::fd_jacobian(p, x);
            for (std::size_t i = 0; i < analytic.values.size(); ++i) {
                double denom = std::max({1e-6, std::abs(analytic.values[i])});
                CHECK(std::abs(analytic.values[i] - numeric.values[i]) / denom <= 1e-4);
            }
            ++checked;
        }
        CHECK(checked == 20);
    }
}

TEST_CASE("positive homogeneity for relu/abs with zero biases") {
    Rng rng(55);
    for (Activation act : {Activation::relu, Activation::abs}) {
        NetworkConfig cfg = NetworkConfig::hidden_only(4, 5, act);
        ParameterSet p = init_params(cfg, InitScheme::kaiming(), rng);
        for (auto& b : p.biases) b.assign(b.size(), 0.0);
        Vector x = {0.3, -0.9, 0.4, 0.1, -0.2};
        Vector fx = forward(p, x).output;
        Vector cx = x;
        for (double& v : cx) v *= 3.5;
        Vector fcx = forward(p, cx).output;
        for (std::size_t i = 0; i < fx.size(); ++i)
            CHECK(fcx[i] == doctest::Approx(3.5 * fx[i]).epsilon(1e-10));
    }
}

TEST_CASE("bias_sigma zero yields zero biases with an unchanged weight stream") {
    NetworkConfig cfg = NetworkConfig::hidden_only(3, 4, Activation::relu);
    InitScheme plain = InitScheme::kaiming();
    InitScheme homog = InitScheme::kaiming();
    homog.bias_sigma = 0.0;

    Rng r1(77), r2(77);
    ParameterSet a = init_params(cfg, plain, r1);
    ParameterSet b = init_params(cfg, homog, r2);
    for (const auto& bias : b.biases)
        for (double v : bias) CHECK(v == 0.0);
    // zero-bias sampling consumes the same number of draws, so the weight
    // matrices are bitwise identical across the two settings
    for (std::size_t k = 0; k < a.weights.size(); ++k)
        for (std::size_t i = 0; i < a.weights[k].values.size(); ++i)
            CHECK(a.weights[k].values[i] == b.weights[k].values[i]);
}

TEST_CASE("kaiming relu forward norm stays bounded (d=256, L=10)") {
    std::vector<double> ratios;
    Rng master(888);
    for (int s = 0; s < 100; ++s) {
        Rng rng = master.child(s);
        NetworkConfig cfg = NetworkConfig::hidden_only(10, 256, Activation::relu);
        ParameterSet p = init_params(cfg, InitScheme::kaiming(), rng);
        for (auto& b : p.biases) b.assign(b.size(), 0.0);
        Vector x(256);
        for (double& v : x) v = rng.normal();
        double n0 = 0.0, nL = 0.0;
        Vector out = forward(p, x).output;
        for (double v : x) n0 += v * v;
        for (double v : out) nL += v * v;
        ratios.push_back(std::sqrt(nL / n0));
    }
    std::sort(ratios.begin(), ratios.end());
    double median = ratios[50];
    CHECK(median >= 0.3);
    CHECK(median <= 3.0);
}

TEST_CASE("parameter json round trip") {
    Rng rng(6);
    ParameterSet p = random_extended(rng, Activation::sigmoid, 2, 3);
    nlohmann::json j = params_to_json(p);
    ParameterSet q = params_from_json(j);
    CHECK(q.activation == p.activation);
    CHECK(q.w_in->values == p.w_in->values);
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        CHECK(q.weights[k].values == p.weights[k].values);
        CHECK(q.biases[k] == p.biases[k]);
    }
    CHECK(q.b_out == p.b_out);
}

TEST_CASE("sigmoid is stable at large inputs") {
    CHECK(activate(Activation::sigmoid, 800.0) == 1.0);
    CHECK(activate(Activation::sigmoid, -800.0) == doctest::Approx(0.0).epsilon(1e-300));
    CHECK(activate(Activation::sigmoid, 0.0) == 0.5);
}
