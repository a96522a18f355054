#include "doctest.h"

#include <cmath>
#include <random>

#include "ssips/transfer.hpp"

using namespace ssips;
using Eigen::VectorXd;

namespace {

PiecewiseConstantField random_field(std::mt19937& gen, int k, int level, int s = 1) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(std::pow(k, level)) * static_cast<std::size_t>(s));
    for (auto& x : v) x = n(gen);
    return PiecewiseConstantField(k, level, s, std::move(v));
}

double smooth(std::span<const double> x) { return std::cos(2 * x[0]) + x[1] * x[1]; }

}  // namespace

TEST_CASE("field construction") {
    CHECK_THROWS_AS(PiecewiseConstantField(3, 2, 1, std::vector<double>(8)), InvalidArgument);
    CHECK_THROWS_AS(PiecewiseConstantField(3, 1, 0, {}), InvalidArgument);
    const auto ind = PiecewiseConstantField::indicator(Word(3, {2, 1}));
    CHECK(ind.level() == 2);
    for (std::size_t i = 0; i < ind.cells(); ++i) CHECK(ind(i) == (i == 3 ? 1.0 : 0.0));
    CHECK_THROWS_AS(KernelMatrix(2, 1, Eigen::MatrixXd::Zero(3, 3)), InvalidArgument);
}

TEST_CASE("martingale levels") {
    const SelfSimilarMeasure sg(make_preset("sg"));
    const auto c = martingale_level(sg, [](auto) { return -1.5; }, 3, 3);
    for (double v : c.values()) CHECK(v == -1.5);

    const auto x1 = martingale_level(sg, [](auto x) { return x[0]; }, 1, 10);
    CHECK(std::abs(x1(0) - 0.25) <= 1e-12);
    CHECK(std::abs(x1(1) - 0.5) <= 1e-12);
    CHECK(std::abs(x1(2) - 0.75) <= 1e-12);

    VectorFunction vec = [](std::span<const double> x) {
        VectorXd out(2);
        out << x[0], x[0] * x[1];
        return out;
    };
    const auto v = martingale_level(sg, vec, 2, 3);
    CHECK(v.state_dim() == 2);
    CHECK(v.cells() == 9);
}

TEST_CASE("tower property") {
    for (const auto& p : {ProbabilityVector::uniform(3), ProbabilityVector({0.2, 0.5, 0.3})}) {
        const SelfSimilarMeasure meas(make_preset("sg"), p);
        for (int m = 0; m <= 4; ++m) {
            const auto fine = martingale_level(meas, smooth, m + 1, 3);
            const auto coarse = martingale_level(meas, smooth, m, 4);
            CHECK(coarsen(fine, p) == coarse);
        }
    }
}

TEST_CASE("refine and coarsen") {
    std::mt19937 gen(2);
    const auto p = ProbabilityVector::uniform(3);
    const auto f = random_field(gen, 3, 2, 2);
    CHECK(refine(f, 2) == f);
    const auto r = refine(f, 4);
    CHECK(r.cells() == 81);
    CHECK(r(80, 1) == f(8, 1));
    const auto back = coarsen(r, p, 2);
    for (std::size_t i = 0; i < f.values().size(); ++i) CHECK(std::abs(back.values()[i] - f.values()[i]) <= 1e-15);
    CHECK_THROWS_AS(refine(f, 1), InvalidArgument);

    const auto c = PiecewiseConstantField::constant(3, 1, 4.0);
    const auto rc = refine(c, 5);
    for (double v : rc.values()) CHECK(v == 4.0);

    for (double q : {1.0, 2.0, 3.5}) CHECK(std::abs(lp_norm(refine(f, 5), p, q) - lp_norm(f, p, q)) <= 1e-14);
}

TEST_CASE("transfer of indicators and constants") {
    const auto p = ProbabilityVector::uniform(3);
    const auto step = transfer_to_interval(PiecewiseConstantField::indicator(Word(3, {2})), p);
    CHECK(evaluate(step, 0.2) == 0.0);
    CHECK(evaluate(step, 1.0 / 3.0 + 1e-12) == 1.0);
    CHECK(evaluate(step, 0.6) == 1.0);
    CHECK(evaluate(step, 2.0 / 3.0 + 1e-12) == 0.0);
    CHECK(evaluate(step, 1.0) == 0.0);
    CHECK(std::abs(integrate(step, 0, 1) - 1.0 / 3.0) <= 1e-15);

    const auto cst = transfer_to_interval(PiecewiseConstantField::constant(3, 3, 2.0), p);
    for (double v : cst.values) CHECK(v == 2.0);
    CHECK(cst.breakpoints.front() == 0.0);
    CHECK(cst.breakpoints.back() == 1.0);
}

TEST_CASE("indicator of a cylinder transfers to the interval cylinder") {
    const auto p = ExactProbabilityVector::uniform(3);
    const Ifs interval = canonical_interval_ifs(3);
    for (int m = 1; m <= 4; ++m)
        for (const auto& w : enumerate_level(3, m)) {
            const auto step = transfer_to_interval(PiecewiseConstantField::indicator(w), p);
            // Q_w = g_w([0,1]) has endpoints idx/3^m and (idx+1)/3^m.
            const Rational left(static_cast<long long>(w.index()), static_cast<long long>(std::pow(3, m)));
            for (std::size_t i = 0; i < step.cells(); ++i) {
                const bool inside = step.breakpoints[i] == left;
                CHECK(step.values[i] == (inside ? 1 : 0));
            }
            const double g0 = compose(interval, w)(VectorXd::Zero(1))(0);
            CHECK(std::abs(g0 - static_cast<double>(left)) <= 1e-15);
        }
}

TEST_CASE("L1 isometry is exact in rational mode") {
    std::mt19937 gen(8);
    for (const auto& p : {ExactProbabilityVector::uniform(3),
                          ExactProbabilityVector({Rational(1, 2), Rational(1, 3), Rational(1, 6)})}) {
        for (int trial = 0; trial < 30; ++trial) {
            const int level = trial % 6 + 1;
            const auto f = random_field(gen, 3, level);
            CHECK(l1_norm(f, p) == transfer_to_interval(f, p).l1_norm());
        }
    }
}

TEST_CASE("transfer is positive and integral preserving") {
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const auto p = ExactProbabilityVector({Rational(1, 4), Rational(1, 4), Rational(1, 2)});
    std::vector<double> v(27);
    for (auto& x : v) x = u(gen);
    const PiecewiseConstantField f(3, 3, 1, v);
    const auto step = transfer_to_interval(f, p);
    Rational integral = 0;
    for (std::size_t i = 0; i < step.cells(); ++i) {
        CHECK(step.values[i] >= 0);
        integral += step.values[i] * step.length(i);
    }
    Rational expected = 0;
    const auto masses = level_masses(p, 3);
    for (std::size_t i = 0; i < 27; ++i) expected += Rational(v[i]) * masses[i];
    CHECK(integral == expected);
}

TEST_CASE("cylinder averages agree on both sides") {
    const auto p = ProbabilityVector({0.5, 0.25, 0.25});
    const SelfSimilarMeasure meas(make_preset("sg"), p);
    const auto fine = martingale_level(meas, smooth, 4, 2);
    const auto step = transfer_to_interval(fine, p);
    const auto coarse = coarsen(fine, p, 2);
    for (const auto& w : enumerate_level(3, 2)) {
        // Interval-side average: Q_w spans [sum of masses of earlier cylinders, + mass(w)).
        double left = 0;
        for (const auto& v : enumerate_level(3, 2)) {
            if (v.index() >= w.index()) break;
            left += cylinder_measure(p, v);
        }
        const double len = cylinder_measure(p, w);
        const double interval_avg = integrate(step, left, std::min(1.0, left + len)) / len;
        CHECK(std::abs(interval_avg - coarse(w.index())) <= 1e-13);
    }
}

TEST_CASE("martingale L1 error decreases") {
    const SelfSimilarMeasure sg(make_preset("sg"));
    const auto p = sg.weights();
    std::vector<double> errors;
    for (int m = 2; m <= 7; ++m) {
        const int fine_level = m + 4;
        const auto exact = martingale_level(sg, smooth, fine_level, 0);
        auto coarse = martingale_level(sg, smooth, m, 4);
        auto diff = refine(coarse, fine_level);
        for (std::size_t i = 0; i < diff.cells(); ++i) diff(i) -= exact(i);
        errors.push_back(lp_norm(diff, p, 1.0));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] <= errors[i - 1] + 1e-12);
}

TEST_CASE("graphon images") {
    const auto p = ProbabilityVector::uniform(3);
    const auto cst = kernel_to_graphon(KernelMatrix::constant(3, 2, 0.7), p);
    CHECK((cst.pixels.array() == 0.7).all());
    CHECK(cst.evaluate(0.1, 0.95) == 0.7);

    std::mt19937 gen(4);
    std::normal_distribution<double> n;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(9, 9, [&] { return n(gen); });
    const Eigen::MatrixXd sym = a + a.transpose();
    const auto img = kernel_to_graphon(KernelMatrix(3, 2, sym), p);
    CHECK(img.pixels == img.pixels.transpose());

    // Rank one: the image is the outer product of the two transferred step functions.
    const auto av = random_field(gen, 3, 2);
    const auto bv = random_field(gen, 3, 2);
    Eigen::MatrixXd outer(9, 9);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) outer(i, j) = av(std::size_t(i)) * bv(std::size_t(j));
    const auto rank1 = kernel_to_graphon(KernelMatrix(3, 2, outer), p);
    const auto sa = transfer_to_interval(av, p);
    const auto sb = transfer_to_interval(bv, p);
    for (double x : {0.01, 0.2, 0.5, 0.77, 0.99})
        for (double y : {0.03, 0.35, 0.6, 0.9})
            CHECK(std::abs(rank1.evaluate(x, y) - evaluate(sa, x) * evaluate(sb, y)) <= 1e-15);
}
