#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "qoc/diffnet.hpp"

using namespace qoc::nn;

namespace {

// Central differences of f over every entry of `x`.
std::vector<double> numeric_grad(const std::function<double()>& f, std::vector<double>& x, double h = 1e-6) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f();
        x[i] = x0 - h;
        const double fm = f();
        x[i] = x0;
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

using UnaryOp = std::function<Var(Var)>;

void check_unary(const UnaryOp& op, std::vector<double> x) {
    Tensor t("x", {static_cast<int>(x.size())});
    t.values() = x;
    const std::vector<double> w{0.7, -1.3, 0.4, 2.1, -0.6};
    auto f = [&] {
        Tape tape;
        Var y = op(tape.parameter(t));
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += w[i % w.size()] * y[i];
        return s;
    };
    Tape tape;
    Var y = op(tape.parameter(t));
    std::vector<double> wv(y.size());
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = w[i % w.size()];
    t.zero_grad();
    tape.backward(sum(mul(y, tape.constant(wv))));
    const auto num = numeric_grad(f, t.values());
    for (std::size_t i = 0; i < num.size(); ++i) EXPECT_NEAR(t.grad()[i], num[i], 1e-6) << "entry " << i;
}

}  // namespace

TEST(Ops, ForwardValues) {
    Tape tape;
    Var a = tape.constant({1.0, -2.0, 3.0});
    Var b = tape.constant({0.5, 0.5, -1.0});
    EXPECT_EQ(add(a, b)[2], 2.0);
    EXPECT_EQ(sub(a, b)[1], -2.5);
    EXPECT_EQ(mul(a, b)[2], -3.0);
    EXPECT_EQ(scale(a, 2.0)[1], -4.0);
    EXPECT_EQ(add_scalar(a, 1.0)[0], 2.0);
    EXPECT_EQ(sum(a).item(), 2.0);
    EXPECT_EQ(pick(a, 1).item(), -2.0);
    EXPECT_EQ(square(a)[1], 4.0);
    EXPECT_EQ(relu(a)[1], 0.0);
    EXPECT_NEAR(two_arctan(a)[0], M_PI / 2, 1e-15);
    EXPECT_NEAR(sigmoid(tape.constant({0.0})).item(), 0.5, 1e-15);
}

TEST(Ops, SoftmaxAndEntropy) {
    Tape tape;
    Var z = tape.constant({0.0, 0.0});
    const auto p = softmax(z);
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(entropy(p).item(), std::log(2.0), 1e-15);
    Var big = tape.constant({1000.0, 0.0});
    EXPECT_NEAR(softmax(big)[0], 1.0, 1e-15);
    EXPECT_NEAR(log_softmax(big)[1], -1000.0, 1e-9);
    EXPECT_EQ(entropy(tape.constant({1.0, 0.0})).item(), 0.0);
}

TEST(Ops, ShapeMismatchThrows) {
    Tape tape;
    Var a = tape.constant({1.0, 2.0});
    Var b = tape.constant({1.0});
    EXPECT_THROW(add(a, b), ShapeError);
    EXPECT_THROW(pick(a, 2), ShapeError);
    EXPECT_THROW(a.item(), ShapeError);
    EXPECT_THROW(tape.backward(a), ShapeError);
    EXPECT_THROW(affine(a, b, b, 2, 1), ShapeError);
}

TEST(Ops, GradientsMatchFiniteDifferences) {
    const std::vector<double> x{0.3, -1.1, 0.8, 2.0, -0.4};
    check_unary([](Var v) { return square(v); }, x);
    check_unary([](Var v) { return relu(v); }, x);
    check_unary([](Var v) { return sigmoid(v); }, x);
    check_unary([](Var v) { return softmax(v); }, x);
    check_unary([](Var v) { return log_softmax(v); }, x);
    check_unary([](Var v) { return entropy(softmax(v)); }, x);
    check_unary([](Var v) { return two_arctan(v); }, x);
    check_unary([](Var v) { return scale(add_scalar(v, 0.5), -3.0); }, x);
    check_unary([](Var v) { return mul(v, square(v)); }, x);
    check_unary([](Var v) { return sub(v, sigmoid(v)); }, x);
    check_unary([](Var v) { return pick(softmax(v), 2); }, x);
}

TEST(Ops, DetachBlocksGradient) {
    Tensor t("x", {2});
    t.values() = {1.0, 2.0};
    Tape tape;
    Var x = tape.parameter(t);
    tape.backward(sum(mul(x, detach(x))));
    // d/dx sum(x * const(x)) = const(x)
    EXPECT_DOUBLE_EQ(t.grad()[0], 1.0);
    EXPECT_DOUBLE_EQ(t.grad()[1], 2.0);
}

TEST(Ops, GradientAccumulatesAcrossUses) {
    Tensor t("x", {1});
    t.values() = {3.0};
    Tape tape;
    Var x = tape.parameter(t);
    Var y = add(square(x), scale(x, 4.0));  // x^2 + 4x
    tape.backward(y);
    EXPECT_DOUBLE_EQ(t.grad()[0], 10.0);
}

TEST(Ops, UnreachedNodesGetNoGradient) {
    Tensor a("a", {1});
    Tensor b("b", {1});
    a.values() = {2.0};
    b.values() = {5.0};
    Tape tape;
    Var va = tape.parameter(a);
    Var vb = tape.parameter(b);
    Var unused = square(vb);
    (void)unused;
    tape.backward(square(va));
    EXPECT_DOUBLE_EQ(a.grad()[0], 4.0);
    EXPECT_DOUBLE_EQ(b.grad()[0], 0.0);
}

TEST(Linear, InitBoundsAndCounts) {
    std::mt19937_64 rng(1);
    Linear l("l", 4, 3);
    l.init(rng);
    EXPECT_EQ(l.param_count(), 15);
    for (double w : l.weight().values()) EXPECT_LE(std::abs(w), 0.5);
    for (double b : l.bias().values()) EXPECT_EQ(b, 0.0);
    EXPECT_EQ(l.weight().name(), "l.weight");
    EXPECT_THROW(Linear("bad", 0, 3), ShapeError);
}

TEST(Linear, AffineForward) {
    Linear l("l", 2, 2);
    l.weight().values() = {1.0, 2.0, -1.0, 0.5};
    l.bias().values() = {0.1, -0.2};
    Tape tape;
    Var y = l.forward(tape, tape.constant({3.0, 4.0}));
    EXPECT_DOUBLE_EQ(y[0], 11.1);
    EXPECT_DOUBLE_EQ(y[1], -1.2);
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(2);
    Mlp m("m", 4, 8, 3);
    m.init(rng);
    for (double& b : m.hidden().bias().values()) b = 0.05;
    EXPECT_EQ(m.param_count(), 4 * 8 + 8 + 8 * 3 + 3);
    const std::vector<double> x{0.3, -0.2, 0.5, 1.0};
    auto f = [&] {
        Tape tape;
        return sum(square(m.forward(tape, tape.constant(x)))).item();
    };
    for (Tensor* p : m.parameters()) p->zero_grad();
    Tape tape;
    tape.backward(sum(square(m.forward(tape, tape.constant(x)))));
    for (Tensor* p : m.parameters()) {
        const auto analytic = p->grad();
        const auto num = numeric_grad(f, p->values());
        for (std::size_t i = 0; i < num.size(); ++i) EXPECT_NEAR(analytic[i], num[i], 1e-6) << p->name();
    }
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Tensor t("w", {2});
    t.values() = {1.0, -1.0};
    Adam opt({&t}, AdamConfig{0.1});
    t.grad() = {3.0, -0.01};
    opt.step();
    // Bias-corrected first step is lr * g / |g| (up to eps).
    EXPECT_NEAR(t.values()[0], 0.9, 1e-7);
    EXPECT_NEAR(t.values()[1], -0.9, 1e-5);
    EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, MinimizesQuadratic) {
    Tensor t("w", {3});
    t.values() = {2.0, -3.0, 0.5};
    Adam opt({&t}, AdamConfig{0.05});
    for (int i = 0; i < 2000; ++i) {
        opt.zero_grad();
        Tape tape;
        tape.backward(sum(square(add_scalar(tape.parameter(t), -1.0))));
        opt.step();
    }
    for (double v : t.values()) EXPECT_NEAR(v, 1.0, 1e-3);
}

TEST(Tape, ForeignVarRejected) {
    Tape a;
    Tape b;
    Var x = a.constant({1.0});
    EXPECT_THROW(b.record({1.0}, {x}, nullptr), std::logic_error);
}
