#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gapnet/adam.hpp"
#include "gapnet/error.hpp"
#include "gapnet/gradcheck.hpp"
#include "gapnet/model.hpp"
#include "gapnet/network.hpp"

using namespace gapnet;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Matrix m(r, c);
    for (double& v : m.values()) v = n(rng);
    return m;
}

std::vector<int> random_labels(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
    std::shuffle(y.begin(), y.end(), rng);
    return y;
}

// scalar BCE, written independently of the library
double scalar_bce(const std::vector<double>& s, const std::vector<int>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) total += y[i] == 1 ? -std::log(s[i]) : -std::log(1.0 - s[i]);
    return total / static_cast<double>(s.size());
}

double scalar_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Zero biases put ReLU units exactly on their kink whenever all inputs to a
// layer vanish; a random offset keeps the check at a differentiable point.
void randomize_biases(MlpNetwork& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 1000);
    std::normal_distribution<double> n(0.0, 0.1);
    for (auto& l : net.layers())
        for (double& b : l.biases) b = n(rng);
}

}  // namespace

TEST_CASE("activations") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(relu(-3.0) == 0.0);
    CHECK(relu(2.5) == 2.5);
    CHECK(sigmoid(1000.0) < 1.0);
    CHECK(sigmoid(-1000.0) > 0.0);
    CHECK(activation_from_string(to_string(Activation::ReLU)) == Activation::ReLU);
    CHECK(activation_from_string(to_string(Activation::Sigmoid)) == Activation::Sigmoid);
    CHECK_THROWS_AS(activation_from_string("tanh"), ValidationError);
}

TEST_CASE("identity layer passes input through") {
    MlpNetwork net(3);
    net.add_layer(DenseLayer{Matrix::identity(3), {0, 0, 0}, Activation::Identity});
    const Matrix x = random_matrix(4, 3, 1);
    CHECK(infer(net, x) == x);
}

TEST_CASE("layer chaining is validated") {
    RandomStream rng(1);
    MlpNetwork net(3);
    net.add_layer(make_dense(3, 4, Activation::ReLU, rng));
    CHECK_THROWS_AS(net.add_layer(make_dense(5, 1, Activation::Sigmoid, rng)), ValidationError);
    CHECK_THROWS_AS(forward(net, Matrix(2, 2), Mode::Infer), ValidationError);
}

TEST_CASE("bce_loss") {
    CHECK(bce_loss(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{0, 1, 1}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(std::vector<double>{0.5}, std::vector<int>{1}) == doctest::Approx(0.693147).epsilon(1e-6));
    CHECK(bce_loss(std::vector<double>{1.0 - 1e-15}, std::vector<int>{1}) < 1e-11);
    const std::vector<double> s{0.9, 0.2};
    const std::vector<int> y{1, 0};
    const double oracle = scalar_bce(s, y);
    CHECK(oracle == doctest::Approx(0.164252).epsilon(1e-6));
    CHECK(bce_loss(s, y) == doctest::Approx(oracle).epsilon(1e-14));
    // clamped: exact 0/1 scores do not produce infinities
    CHECK(std::isfinite(bce_loss(std::vector<double>{0.0}, std::vector<int>{1})));
    CHECK_THROWS_AS(bce_loss(std::vector<double>{}, std::vector<int>{}), ValidationError);
    CHECK_THROWS_AS(bce_loss(std::vector<double>{NAN}, std::vector<int>{1}), TrainingError);
}

TEST_CASE("logistic regression gradient has the closed form") {
    RandomStream rng(5);
    MlpNetwork net(4);
    net.add_layer(make_dense(4, 1, Activation::Sigmoid, rng));
    net.layers()[0].biases[0] = 0.3;
    const Matrix x = random_matrix(9, 4, 6);
    const auto y = random_labels(9, 7);
    const Gradients g = backprop(net, forward(net, x, Mode::Infer), y);
    const auto& w = net.layers()[0].weights;
    std::vector<double> residual(9);
    for (std::size_t i = 0; i < 9; ++i) {
        double z = 0.3;
        for (std::size_t j = 0; j < 4; ++j) z += x(i, j) * w(j, 0);
        residual[i] = scalar_sigmoid(z) - y[i];
    }
    for (std::size_t j = 0; j < 4; ++j) {
        double expected = 0.0;
        for (std::size_t i = 0; i < 9; ++i) expected += residual[i] * x(i, j);
        expected /= 9.0;
        CHECK(g.layers[0].weights(j, 0) == doctest::Approx(expected).epsilon(1e-12));
    }
    double bias_expected = 0.0;
    for (double r : residual) bias_expected += r;
    CHECK(g.layers[0].biases[0] == doctest::Approx(bias_expected / 9.0).epsilon(1e-12));

    // the finite-difference oracle agrees with the closed form
    const auto fd = finite_diff_grad(net, x, y, 1e-6);
    for (std::size_t j = 0; j < 4; ++j) {
        double expected = 0.0;
        for (std::size_t i = 0; i < 9; ++i) expected += residual[i] * x(i, j);
        CHECK(std::abs(fd[j] - expected / 9.0) < 1e-6);
    }
}

TEST_CASE("backprop matches finite differences for every architecture family") {
    for (std::size_t inputs : {40u, 25u, 15u, 82u, 5u, 4u, 1u}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            RandomStream rng(seed);
            MlpNetwork net = build_classifier(inputs, 2 * inputs, 0.0, rng);
            randomize_biases(net, seed);
            const Matrix x = random_matrix(6, inputs, seed + 100);
            const auto y = random_labels(6, seed + 200);
            const auto analytic = flatten(backprop(net, forward(net, x, Mode::Infer), y).refs());
            const auto numeric = finite_diff_grad(net, x, y, 1e-5);
            CAPTURE(inputs);
            CAPTURE(seed);
            CHECK(max_relative_error(analytic, numeric) < 1e-4);
        }
    }
}

TEST_CASE("scores equal to labels give zero gradient") {
    // the sigmoid output cannot hit 0 or 1 exactly, so use a score-space check:
    // dL/dz = (s - y)/n vanishes when s == y
    RandomStream rng(3);
    MlpNetwork net(2);
    net.add_layer(make_dense(2, 1, Activation::Sigmoid, rng));
    net.layers()[0].weights.fill(0.0);
    net.layers()[0].biases[0] = 0.0;
    const Matrix x = random_matrix(4, 2, 9);
    const ForwardCache cache = forward(net, x, Mode::Infer);
    const Matrix d_out(4, 1, 0.0);  // (s - y) with s == y
    CHECK(backward(net, cache, d_out).all_zero());
}

TEST_CASE("constant loss has zero numerical gradient") {
    std::vector<double> p{1.0, 2.0, 3.0};
    ParameterRefs refs{std::span<double>(p)};
    const auto g = finite_diff_grad(refs, [] { return 4.2; }, 1e-6);
    for (double v : g) CHECK(v == 0.0);
    CHECK(p == std::vector<double>{1.0, 2.0, 3.0});
    CHECK_THROWS_AS(finite_diff_grad(refs, [] { return 0.0; }, 1e-3), ValidationError);
}

TEST_CASE("frozen layers get zero gradient slots") {
    RandomStream rng(4);
    MlpNetwork net = build_classifier(3, 6, 0.0, rng);
    net.layers()[0].trainable = false;
    const Matrix x = random_matrix(5, 3, 2);
    const Gradients g = backprop(net, forward(net, x, Mode::Infer), random_labels(5, 1));
    for (double v : g.layers[0].weights.values()) CHECK(v == 0.0);
    CHECK_FALSE(g.all_zero());
}

TEST_CASE("inverted dropout preserves the expected activation") {
    const Matrix x = random_matrix(1, 10, 12);
    for (double rate : {0.2, 0.5}) {
        RandomStream init(8);
        const MlpNetwork net = build_classifier(10, 20, rate, init);
        const ForwardCache ref = forward(net, x, Mode::Infer);
        const Matrix& unit_infer = ref.post[1];  // second hidden layer, no dropout
        std::vector<double> sum(20, 0.0);
        RandomStream rng(99);
        const int masks = 10000;
        for (int i = 0; i < masks; ++i) {
            const ForwardCache c = forward(net, x, Mode::Train, &rng);
            for (std::size_t u = 0; u < 20; ++u) sum[u] += c.inputs[2](0, u);
        }
        // at rate 0.2 every unit is checked (about 4 standard errors of slack);
        // at rate 0.5 the standard error is 1%, so only the largest unit is checked
        std::size_t checked = 0;
        std::size_t largest = 0;
        for (std::size_t u = 0; u < 20; ++u)
            if (unit_infer(0, u) > unit_infer(0, largest)) largest = u;
        for (std::size_t u = 0; u < 20; ++u) {
            if (unit_infer(0, u) <= 0.0) continue;
            if (rate == 0.5 && u != largest) continue;
            const double rel = std::abs(sum[u] / masks - unit_infer(0, u)) / unit_infer(0, u);
            CAPTURE(rate);
            CAPTURE(u);
            CHECK(rel < 0.02);
            ++checked;
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("gradient descent on a separable toy decreases loss monotonically") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> n(0.0, 0.5);
    Matrix x(40, 2);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = static_cast<int>(i % 2);
        const double c = y[i] ? 2.0 : -2.0;
        x(i, 0) = c + n(gen);
        x(i, 1) = c + n(gen);
    }
    RandomStream rng(2);
    MlpNetwork net = build_classifier(2, 4, 0.0, rng);
    double previous = INFINITY;
    for (int step = 0; step < 100; ++step) {
        const ForwardCache c = forward(net, x, Mode::Infer);
        const double loss = bce_loss(c.output.values(), y);
        REQUIRE(loss < previous);
        previous = loss;
        const Gradients g = backprop(net, c, y);
        auto params = net.parameters();
        const auto grads = g.refs();
        for (std::size_t k = 0; k < params.size(); ++k)
            for (std::size_t i = 0; i < params[k].size(); ++i) params[k][i] -= 0.05 * grads[k][i];
    }
}

TEST_CASE("Adam first step has magnitude learning_rate") {
    for (double g : {1e-3, 0.5, -3.0, 250.0}) {
        std::vector<double> p{1.0, -2.0};
        std::vector<double> grad{g, -g};
        AdamState state(2, AdamConfig{});
        const std::vector<std::span<double>> params{std::span<double>(p)};
        const std::vector<std::span<const double>> grads{std::span<const double>(grad)};
        state.step(params, grads);
        // closed form: m_hat = g, v_hat = g^2, delta = lr * g / (|g| + eps)
        const double expected = 1e-3 * std::abs(g) / (std::abs(g) + 1e-8);
        CHECK(std::abs(p[0] - 1.0) == doctest::Approx(expected).epsilon(1e-9));
        CHECK(std::abs(p[1] + 2.0) == doctest::Approx(expected).epsilon(1e-9));
        CHECK((p[0] < 1.0) == (g > 0));
        CHECK(state.step_count() == 1);
    }
}

TEST_CASE("Adam with zero gradients leaves parameters unchanged") {
    std::vector<double> p{0.25, -7.0, 3.5};
    const auto original = p;
    std::vector<double> grad(3, 0.0);
    AdamState state(3, AdamConfig{});
    const std::vector<std::span<double>> params{std::span<double>(p)};
    const std::vector<std::span<const double>> grads{std::span<const double>(grad)};
    for (int i = 0; i < 1000; ++i) state.step(params, grads);
    CHECK(p == original);
}

TEST_CASE("Adam rejects non-finite gradients and bad configs") {
    std::vector<double> p{0.0, 0.0};
    std::vector<double> grad{0.0, NAN};
    AdamState state(2, AdamConfig{});
    const std::vector<std::span<double>> params{std::span<double>(p)};
    const std::vector<std::span<const double>> grads{std::span<const double>(grad)};
    CHECK_THROWS_AS(state.step(params, grads), TrainingError);
    AdamConfig bad;
    bad.beta1 = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = AdamConfig{};
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const Matrix x = random_matrix(30, 5, 3);
    const auto y = random_labels(30, 4);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch_size = 8;
    auto run = [&] {
        RandomStream init(10), rng(11);
        MlpNetwork net = build_classifier(5, 10, 0.5, init);
        const auto losses = fit(net, x, y, cfg, rng);
        return std::pair{net, losses};
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("one epoch is one full-batch Adam update") {
    const Matrix x = random_matrix(12, 3, 8);
    const auto y = random_labels(12, 9);
    RandomStream init(1);
    MlpNetwork net = build_classifier(3, 6, 0.0, init);
    MlpNetwork manual = net;
    TrainConfig cfg;
    cfg.epochs = 1;
    RandomStream rng(2);
    fit(net, x, y, cfg, rng);
    AdamState state(manual.parameter_count(), cfg.adam);
    const Gradients g = backprop(manual, forward(manual, x, Mode::Train, &rng), y);
    auto params = manual.parameters();
    const auto grads = g.refs();
    state.step(params, grads);
    CHECK(net == manual);
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("Glorot initialization") {
    RandomStream rng(1);
    const Matrix w = glorot_init(3, 3, rng);
    for (double v : w.values()) CHECK(std::abs(v) <= 1.0);
    RandomStream a(7), b(7);
    CHECK(glorot_init(40, 80, a) == glorot_init(40, 80, b));
    RandomStream big(3);
    const Matrix m = glorot_init(250, 400, big);  // 10^5 draws
    double sum = 0.0;
    const double bound = std::sqrt(6.0 / 650.0);
    for (double v : m.values()) {
        sum += v;
        CHECK(std::abs(v) <= bound);
    }
    CHECK(std::abs(sum / 1e5) < 0.01);
}

TEST_CASE("without_head drops the output layer") {
    RandomStream rng(1);
    const MlpNetwork net = build_classifier(25, 50, 0.5, rng);
    const MlpNetwork body = net.without_head();
    CHECK(body.depth() == 2);
    CHECK(body.output_width() == 50);
    CHECK(body.dropout_after(1) == 0.5);
    CHECK_FALSE(body.is_classifier());
    CHECK(net.is_classifier());
}
