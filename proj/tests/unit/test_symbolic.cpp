#include "doctest.h"

#include <numeric>
#include <random>

#include "ssips/symbolic.hpp"

using namespace ssips;

TEST_CASE("enumerate_level follows lexicographic order") {
    const auto root = enumerate_level(3, 0);
    REQUIRE(root.size() == 1);
    CHECK(root[0].empty());

    const auto l2 = enumerate_level(2, 2);
    REQUIRE(l2.size() == 4);
    CHECK(l2[0] == Word(2, {1, 1}));
    CHECK(l2[1] == Word(2, {1, 2}));
    CHECK(l2[2] == Word(2, {2, 1}));
    CHECK(l2[3] == Word(2, {2, 2}));

    CHECK(enumerate_level(3, 8).size() == 6561);
}

TEST_CASE("enumeration is a bijection with base-k integers") {
    for (int k : {2, 3, 5}) {
        const auto words = enumerate_level(k, 4);
        for (std::size_t i = 0; i < words.size(); ++i) {
            CHECK(words[i].index() == i);
            CHECK(Word::from_index(k, 4, i) == words[i]);
            if (i > 0) CHECK(words[i - 1].to_string() < words[i].to_string());
        }
    }
}

TEST_CASE("level cap is enforced") {
    CHECK_THROWS_AS(level_size(3, 20), BudgetExceeded);
    CHECK_THROWS_AS(enumerate_level(2, 10, 1000), BudgetExceeded);
    CHECK(level_size(3, 15) == 14348907u);
}

TEST_CASE("symbols are validated") {
    CHECK_THROWS_AS(Word(3, {0}), InvalidArgument);
    CHECK_THROWS_AS(Word(3, {4}), InvalidArgument);
    CHECK_THROWS_AS(Word(1), InvalidArgument);
    const Word w(3, {1, 3, 2});
    CHECK(w.symbol(0) == 1);
    CHECK(w.symbol(1) == 3);
    CHECK(w.digit(2) == 1);
}

TEST_CASE("shift drops the first symbol") {
    CHECK(shift(Word(3, {1, 2, 3})) == Word(3, {2, 3}));
    CHECK(shift(Word(3, {2})).empty());
    CHECK_THROWS_AS(shift(Word(3)), InvalidArgument);

    Word w(4, {1, 2, 3, 4, 1, 2});
    for (int j = 1; j <= 6; ++j) {
        w = shift(w);
        CHECK(w.length() == 6 - j);
    }
    CHECK(shift(shift(Word(4, {1, 2, 3, 4}))) == Word(4, {3, 4}));
}

TEST_CASE("word metric") {
    CHECK(word_metric(Word(3, {1, 2}), Word(3, {1, 3})) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(word_metric(Word(3, {2}), Word(3, {3})) == 1.0);
    CHECK_THROWS_AS(word_metric(Word(3), Word(3, {1})), InvalidArgument);

    std::mt19937 gen(11);
    std::uniform_int_distribution<int> sym(1, 2);
    Word w(2);
    for (int i = 0; i < 30; ++i) w.push_back(sym(gen));
    CHECK(word_metric(w, w.prefix(10)) <= std::ldexp(1.0, -10));
}

TEST_CASE("word metric is an ultrametric") {
    std::mt19937 gen(5);
    std::uniform_int_distribution<int> sym(1, 3);
    auto draw = [&] {
        Word w(3);
        // Short words over a small alphabet share prefixes often enough to exercise the inequality.
        for (int i = 0; i < 6; ++i) w.push_back(sym(gen));
        return w;
    };
    for (int trial = 0; trial < 2000; ++trial) {
        const Word a = draw(), b = draw(), c = draw();
        CHECK(word_metric(a, c) <= std::max(word_metric(a, b), word_metric(b, c)));
        CHECK(word_metric(a, b) == word_metric(b, a));
    }
}

TEST_CASE("cylinder measure is a product of weights") {
    const auto third = ProbabilityVector::uniform(3);
    CHECK(cylinder_measure(third, Word(3, {1, 2})) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(cylinder_measure(third, Word(3)) == 1.0);

    const ProbabilityVector p({0.5, 0.25, 0.25});
    CHECK(cylinder_measure(p, Word(3, {2, 3, 1})) == 1.0 / 32.0);

    const ExactProbabilityVector q({Rational(1, 2), Rational(1, 4), Rational(1, 4)});
    CHECK(cylinder_measure(q, Word(3, {2, 3, 1})) == Rational(1, 32));
}

TEST_CASE("probability vectors are validated") {
    CHECK_THROWS_AS(ProbabilityVector({0.5, 0.6}), InvalidArgument);
    CHECK_THROWS_AS(ProbabilityVector({1.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(ExactProbabilityVector({Rational(1, 2), Rational(1, 3)}), InvalidArgument);
    CHECK(ProbabilityVector::uniform(4).is_uniform());
    CHECK_FALSE(ProbabilityVector({0.5, 0.25, 0.25}).is_uniform());
}

TEST_CASE("level masses sum to one") {
    const ExactProbabilityVector exact({Rational(1, 2), Rational(1, 3), Rational(1, 6)});
    const auto approx = exact.to_double();
    for (int m = 0; m <= 10; ++m) {
        const auto masses = level_masses(exact, m);
        CHECK(std::accumulate(masses.begin(), masses.end(), Rational(0)) == Rational(1));
        const auto fm = level_masses(approx, m);
        CHECK(std::abs(std::accumulate(fm.begin(), fm.end(), 0.0) - 1.0) <= 1e-12);
    }
}

TEST_CASE("level masses agree with cylinder measures") {
    const ProbabilityVector p({0.2, 0.3, 0.5});
    const auto masses = level_masses(p, 5);
    const auto words = enumerate_level(3, 5);
    for (std::size_t i = 0; i < words.size(); ++i)
        CHECK(masses[i] == doctest::Approx(cylinder_measure(p, words[i])).epsilon(1e-15));
}

TEST_CASE("preimage under the shift has the same mass") {
    const ExactProbabilityVector p({Rational(1, 5), Rational(3, 10), Rational(1, 2)});
    for (const auto& w : enumerate_level(3, 4)) {
        Rational preimage = 0;
        for (int s = 1; s <= 3; ++s) preimage += cylinder_measure(p, Word(3, {s}).concat(w));
        CHECK(preimage == cylinder_measure(p, w));
    }
}
