#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ssips/analysis.hpp"

using namespace ssips;
using Eigen::VectorXd;

namespace {

const double s3 = std::sqrt(3.0);

const SelfSimilarMeasure& gasket() {
    static const SelfSimilarMeasure sg(make_preset("sg"));
    return sg;
}

double exp_abs_diff(std::span<const double> x) { return std::exp(-std::abs(x[0] - x[1])); }

Trajectory make_trajectory(std::vector<PiecewiseConstantField> states) {
    Trajectory t;
    for (std::size_t i = 0; i < states.size(); ++i) t.times.push_back(0.1 * double(i));
    t.states = std::move(states);
    return t;
}

PiecewiseConstantField random_field(std::mt19937& gen, int level) {
    std::normal_distribution<double> n;
    std::vector<double> v(static_cast<std::size_t>(std::pow(3, level)));
    for (auto& x : v) x = n(gen);
    return PiecewiseConstantField(3, level, 1, std::move(v));
}

// Brute force over every assignment between two equal-size uniform measures.
double brute_force_w1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            double d2 = 0;
            for (int c = 0; c < a.dim; ++c) d2 += std::pow(a.atom(i)[std::size_t(c)] - b.atom(perm[i])[std::size_t(c)], 2);
            cost += std::sqrt(d2);
        }
        best = std::min(best, cost / double(perm.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("trajectory error") {
    std::mt19937 gen(1);
    const auto p = ProbabilityVector::uniform(3);
    const auto a = make_trajectory({random_field(gen, 3), random_field(gen, 3)});
    CHECK(traj_error(a, a, p).max == 0.0);

    const auto c = make_trajectory({PiecewiseConstantField::constant(3, 2, 1.5), PiecewiseConstantField::constant(3, 2, 1.5)});
    const auto d = make_trajectory({PiecewiseConstantField::constant(3, 4, 0.25), PiecewiseConstantField::constant(3, 4, 0.25)});
    const auto e = traj_error(c, d, p);
    REQUIRE(e.series.size() == 2);
    for (double x : e.series) CHECK(std::abs(x - 1.25) <= 1e-15);

    // Coarse = conditional expectation of fine: the error is the within-parent dispersion.
    const auto fine_field = random_field(gen, 4);
    const auto coarse_field = coarsen(fine_field, p, 2);
    double dispersion = 0;
    for (std::size_t i = 0; i < fine_field.cells(); ++i)
        dispersion += std::pow(fine_field(i) - coarse_field(i / 9), 2) / 81.0;
    const auto err = traj_error(make_trajectory({coarse_field}), make_trajectory({fine_field}), p);
    CHECK(std::abs(err.max - std::sqrt(dispersion)) <= 1e-14);

    const auto b = make_trajectory({random_field(gen, 3), random_field(gen, 3)});
    CHECK(traj_error(a, b, p).max == traj_error(b, a, p).max);

    CHECK_THROWS_AS(traj_error(d, c, p), InvalidArgument);
    CHECK_THROWS_AS(traj_error(make_trajectory({random_field(gen, 2)}), b, p), InvalidArgument);
}

TEST_CASE("projection error of exactly representable functions") {
    const auto& sg = gasket();
    CHECK(projection_error(sg, [](auto) { return 3.0; }, 2, 2.0, 4) <= 1e-15);
    auto ind = [](std::span<const double> x) { return x[0] < 0.5 && x[1] < s3 / 4 ? 1.0 : 0.0; };
    for (int m = 1; m <= 4; ++m) CHECK(projection_error(sg, ind, m, 2.0, 3) <= 1e-15);
    CHECK_THROWS_AS(projection_error(sg, exp_abs_diff, 2, 2.0, 1), InvalidArgument);
}

TEST_CASE("projection error decreases under refinement") {
    const auto& sg = gasket();
    for (double q : {1.0, 2.0}) {
        std::vector<double> errors;
        for (int m = 2; m <= 6; ++m) errors.push_back(projection_error(sg, exp_abs_diff, m, q, 4));
        for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] < errors[i - 1]);
    }
}

TEST_CASE("modulus of continuity of simple functions") {
    const auto& sg = gasket();
    CHECK(modulus_of_continuity(sg, [](auto) { return 2.0; }, 1, 2.0, 4, 2) == 0.0);

    // phi(x) = c.x changes by exactly c.tau on every matched pair, and the pairs for a fixed (i, j) carry mass 1/3.
    const Eigen::Vector2d c(1.5, -0.5);
    auto linear = [&](std::span<const double> x) { return c(0) * x[0] + c(1) * x[1]; };
    double max_tau = 0, max_ctau = 0;
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
            if (i != j) {
                const VectorXd tau = translation_vector(sg.ifs(), i, j);
                max_tau = std::max(max_tau, tau.norm());
                max_ctau = std::max(max_ctau, std::abs(c.dot(tau)));
            }
    for (int m = 1; m <= 5; ++m) {
        const double omega = modulus_of_continuity(sg, linear, m, 2.0, 6, 2);
        CHECK(omega <= c.norm() * std::ldexp(max_tau, -m) * (1 + 1e-12));
        CHECK(std::abs(omega - std::ldexp(max_ctau, -m) / s3) <= 1e-12);
        const double omega1 = modulus_of_continuity(sg, linear, m, 1.0, 6, 2);
        CHECK(std::abs(omega1 - std::ldexp(max_ctau, -m) / 3) <= 1e-12);
    }

    const auto report = modulus_report(sg, linear, {2, 3, 4, 5}, 2.0, 1, 2);
    CHECK(report.fitted_alpha >= 0.85);
    CHECK(report.fitted_alpha <= 1.15);
    CHECK(report.lambda == 0.5);
    REQUIRE(report.omega_shifted.size() == 4);
    CHECK(report.omega_shifted[0] == report.omega[1]);
    CHECK(report.omega_shifted.back() <= report.omega.back());
    CHECK(report.omega_shifted.back() > 0.0);
}

TEST_CASE("modulus is nonnegative and nonincreasing") {
    const auto& sg = gasket();
    const std::vector<ScalarFunction> fns{
        exp_abs_diff, [](std::span<const double> x) { return std::sin(7 * x[0]) * x[1]; },
        [](std::span<const double> x) { return x[0] < 0.4 ? 1.0 : 0.0; }};
    for (const auto& phi : fns)
        for (double q : {1.0, 2.0}) {
            const auto profile = modulus_profile(sg, phi, q, 7, 2);
            double prev = std::numeric_limits<double>::infinity();
            for (int m = 0; m <= 7; ++m) {
                const double omega = *std::max_element(profile.begin() + m, profile.end());
                CHECK(omega >= 0.0);
                CHECK(omega <= prev);
                prev = omega;
            }
        }
}

TEST_CASE("modulus needs a common linear part") {
    std::vector<Similitude> maps{Similitude::planar(0.5, 0.0, Eigen::Vector2d(0, 0)),
                                 Similitude::planar(0.5, std::numbers::pi / 2, Eigen::Vector2d(1, 0)),
                                 Similitude::planar(0.5, 0.0, Eigen::Vector2d(0, 1))};
    const SelfSimilarMeasure rotated{Ifs(maps, "rotated")};
    CHECK_THROWS_AS(modulus_of_continuity(rotated, exp_abs_diff, 1, 2.0, 3, 1), InvalidArgument);
}

TEST_CASE("alpha fits on synthetic data") {
    const std::vector<int> levels{2, 3, 4, 5, 6};
    std::vector<double> full, half;
    for (int m : levels) {
        full.push_back(std::ldexp(1.0, -m));
        half.push_back(std::pow(2.0, -m / 2.0));
    }
    CHECK(std::abs(fit_alpha(levels, full, 0.5) - 1.0) <= 1e-12);
    CHECK(std::abs(fit_alpha(levels, half, 0.5) - 0.5) <= 1e-12);

    const auto r = lipschitz_norm_estimate(levels, full, 2.0, 0.5);
    CHECK(std::abs(r.fitted_alpha - 1.0) <= 1e-12);
    CHECK(std::abs(r.lip_norm - 1.0) <= 1e-12);
    CHECK_THROWS_AS(lipschitz_norm_estimate({2, 3}, {0.25, 0.125}, 2.0, 0.5), InvalidArgument);
}

TEST_CASE("rate fits") {
    const std::vector<int> levels{2, 3, 4, 5};
    std::vector<double> quarter, lam;
    for (int m : levels) {
        quarter.push_back(std::pow(0.25, m));
        lam.push_back(std::pow(0.5, m));
    }
    const auto r2 = rate_fit(levels, quarter, 0.5);
    CHECK(std::abs(r2.fitted_alpha - 2.0) <= 1e-12);
    CHECK(r2.capped_alpha == 1.0);
    CHECK_FALSE(r2.notes.empty());

    const auto r1 = rate_fit(levels, lam, 0.5);
    CHECK(std::abs(r1.fitted_alpha - 1.0) <= 1e-12);
    CHECK(r1.notes.empty());

    // Levels below 2 are excluded from the fit.
    const auto r3 = rate_fit({0, 1, 2, 3, 4}, {5.0, 9.0, 0.25, 0.125, 0.0625}, 0.5);
    CHECK(std::abs(r3.fitted_alpha - 1.0) <= 1e-12);

    const auto floored = rate_fit(levels, {0.25, 0.0, 0.0625, 0.03125}, 0.5);
    CHECK(floored.errors[1] == 1e-15);
    CHECK_FALSE(floored.notes.empty());

    CHECK_THROWS_AS(rate_fit({2, 3}, {0.1, 0.05}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(rate_fit({0, 1, 2}, {0.1, 0.05, 0.02}, 0.5), InvalidArgument);

    const auto bounded = rate_fit(levels, lam, 0.5, RateBoundInputs{3, 2.0, 1.0, 1.0});
    REQUIRE(bounded.bounds.size() == 4);
    CHECK(bounded.below_bound);
    CHECK(bounded.bounds[0] == projection_error_bound(3, 2.0, 0.5, 1.0, 1.0, 2));
}

TEST_CASE("projection error bound formula") {
    const double k = 3, p = 2, lambda = 0.5, alpha = 0.8, lip = 1.7;
    const int m = 4;
    const double expected =
        std::pow(k, 1 / p - 1) * std::pow(k - 1, 1 / p) / (1 - std::pow(lambda, alpha)) * lip * std::pow(lambda, alpha * m);
    CHECK(std::abs(projection_error_bound(3, p, lambda, alpha, lip, m) - expected) <= 1e-15 * expected);
}

TEST_CASE("projection errors of a linear function respect the bound") {
    const auto& sg = gasket();
    auto x1 = [](std::span<const double> x) { return x[0]; };
    const auto report = modulus_report(sg, x1, {2, 3, 4, 5, 6, 7}, 2.0, 1, 2);
    for (int m = 2; m <= 7; ++m) {
        const double bound = std::sqrt(2.0 / 3.0) / (1 - 0.5) * report.lip_norm * std::ldexp(1.0, -m);
        CHECK(projection_error(sg, x1, m, 2.0, 4) <= bound);
    }
}

TEST_CASE("local empirical measures") {
    const auto field = PiecewiseConstantField::constant(3, 4, 0.7);
    const auto mu = local_empirical_measure(field, Word(3, {2, 1}));
    CHECK(mu.size() == 9);
    double total = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        CHECK(mu.atom(i)[0] == 0.7);
        total += mu.weights[i];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);

    std::mt19937 gen(3);
    const auto f = random_field(gen, 3);
    const auto local = local_empirical_measure(f, Word(3, {3}));
    REQUIRE(local.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) CHECK(local.atom(i)[0] == f(18 + i));

    CHECK_THROWS_AS(local_empirical_measure(f, Word(3, {1, 1, 1, 1})), InvalidArgument);
    CHECK(local_empirical_measure(f, Word(3)).size() == 27);
}

TEST_CASE("W1 proxy examples") {
    const auto delta0 = uniform_measure(1, {0.0});
    const auto delta1 = uniform_measure(1, {1.0});
    CHECK(bl_distance_proxy(delta0, delta0) == 0.0);
    CHECK(bl_distance_proxy(delta0, delta1) == 1.0);

    const auto a = uniform_measure(1, {0.0, 0.5});
    const auto b = uniform_measure(1, {0.75, 0.25});
    CHECK(std::abs(bl_distance_proxy(a, b) - 0.25) <= 1e-15);
    CHECK(std::abs(bl_distance_proxy(a, b) - brute_force_w1(a, b)) <= 1e-15);

    CHECK_THROWS_AS(bl_distance_proxy(a, uniform_measure(2, {0.0, 1.0})), InvalidArgument);
}

TEST_CASE("W1 proxy matches brute force in the plane") {
    std::mt19937 gen(12);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> xa(10), xb(10);
        for (auto& x : xa) x = u(gen);
        for (auto& x : xb) x = u(gen);
        const auto a = uniform_measure(2, xa), b = uniform_measure(2, xb);
        CHECK(std::abs(bl_distance_proxy(a, b) - brute_force_w1(a, b)) <= 1e-12);
    }
    // Unequal sizes are compared after replication to a common count.
    const auto two = uniform_measure(2, {0, 0, 1, 0});
    const auto four = uniform_measure(2, {0, 0, 0, 0, 1, 0, 1, 0});
    CHECK(bl_distance_proxy(two, four) <= 1e-15);

    CHECK_THROWS_AS(bl_distance_proxy(uniform_measure(2, std::vector<double>(2 * 600, 0.0)),
                                      uniform_measure(2, std::vector<double>(2 * 600, 1.0))),
                    InvalidArgument);
}

TEST_CASE("W1 proxy is a metric on scalar measures") {
    std::mt19937 gen(21);
    std::uniform_real_distribution<double> u(-2, 2);
    std::uniform_int_distribution<int> size(1, 9);
    auto draw = [&] {
        std::vector<double> xs(static_cast<std::size_t>(size(gen)));
        for (auto& x : xs) x = u(gen);
        return uniform_measure(1, xs);
    };
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = draw(), b = draw(), c = draw();
        const double ab = bl_distance_proxy(a, b), ba = bl_distance_proxy(b, a);
        CHECK(std::abs(ab - ba) <= 1e-12);
        CHECK(ab >= 0.0);
        CHECK(bl_distance_proxy(a, c) <= ab + bl_distance_proxy(b, c) + 1e-12);
    }
}

TEST_CASE("Vlasov self-convergence trivial cases") {
    const auto& sg = gasket();
    ModelSpec frozen;
    frozen.name = "frozen";
    frozen.drift = [](double, auto, auto, std::span<double> out) { out[0] = 0.0; };
    frozen.interaction = [](auto, auto, std::span<double> out) { out[0] = 0.0; };
    auto kernel = [](auto, auto) { return 1.0; };

    VlasovOptions opt;
    opt.m = 1;
    opt.ells = {1, 2};
    opt.T = 0.1;
    opt.dt = 0.01;
    opt.output_stride = 2;

    // Identical deterministic data within each coarse cell.
    auto by_cell = [](std::size_t coarse, CounterRng&, std::span<double> out) { out[0] = 0.1 * double(coarse); };
    const auto kuramoto_factory = [](int level, std::uint64_t) {
        return kuramoto(1.0, PiecewiseConstantField::constant(3, level, 0.0));
    };
    const auto det = vlasov_self_convergence(sg, kuramoto_factory, kernel, by_cell, opt, {1, 2});
    for (const auto& seed : det.distances) CHECK(seed[0][0] == 0.0);

    auto random_init = [](std::size_t, CounterRng& rng, std::span<double> out) { out[0] = rng.uniform(); };
    const auto table = vlasov_self_convergence(sg, [&](int, std::uint64_t) { return frozen; }, kernel, random_init,
                                               opt, {3, 4});
    REQUIRE(table.distances.size() == 2);
    CHECK(table.times.size() == 6);
    for (const auto& seed : table.distances)
        for (double d : seed[0]) CHECK(d == seed[0][0]);
    CHECK(table.distances[0][0][0] > 0.0);
    CHECK(table.max_over_time()[1][0] == table.distances[1][0][0]);

    const auto again = vlasov_self_convergence(sg, [&](int, std::uint64_t) { return frozen; }, kernel, random_init,
                                               opt, {3, 4});
    CHECK(again.distances == table.distances);

    opt.ells = {2, 1};
    CHECK_THROWS_AS(vlasov_self_convergence(sg, kuramoto_factory, kernel, by_cell, opt, {1}), InvalidArgument);
}

TEST_CASE("median") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK_THROWS_AS(median({}), InvalidArgument);
}
