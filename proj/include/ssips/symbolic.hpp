#pragma once

// Finite words over the alphabet [k], level enumeration and Bernoulli
// cylinder measures. Symbols are 1-based at the API boundary and stored
// 0-based. A level-m word maps to the base-k integer of its (0-based)
// symbols, so lexicographic order equals integer order and the children of
// cell i are i*k + 0 .. i*k + (k-1).

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ssips/error.hpp"

namespace ssips {

using Rational = boost::multiprecision::cpp_rational;

class Word {
public:
    Word() = default;
    /// Empty word (the root cell) over an alphabet of size k.
    explicit Word(int k);
    /// Word from 1-based symbols; every symbol must lie in [1, k].
    Word(int k, std::initializer_list<int> symbols);
    Word(int k, std::span<const int> symbols);

    /// Decodes the base-k integer `index` into a word of length `level`.
    static Word from_index(int k, int level, std::uint64_t index);

    int alphabet() const noexcept { return k_; }
    int length() const noexcept { return static_cast<int>(digits_.size()); }
    bool empty() const noexcept { return digits_.empty(); }

    /// 1-based symbol at position `pos` (0-based position).
    int symbol(int pos) const { return digits_.at(static_cast<std::size_t>(pos)) + 1; }
    /// 0-based digit at position `pos`.
    int digit(int pos) const { return digits_[static_cast<std::size_t>(pos)]; }
    std::span<const std::uint8_t> digits() const noexcept { return digits_; }

    /// Base-k positional index; lexicographic rank among words of equal length.
    std::uint64_t index() const;

    /// Appends a 1-based symbol.
    Word& push_back(int symbol);
    /// Concatenation w·v.
    Word concat(const Word& tail) const;
    /// Prefix of length n.
    Word prefix(int n) const;

    std::string to_string() const;

    friend bool operator==(const Word&, const Word&) = default;

private:
    int k_ = 2;
    std::vector<std::uint8_t> digits_;
};

/// Strictly positive weights summing to one within 1e-12.
class ProbabilityVector {
public:
    explicit ProbabilityVector(std::vector<double> weights);
    /// p_i = 1/k.
    static ProbabilityVector uniform(int k);

    int size() const noexcept { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
    std::span<const double> weights() const noexcept { return p_; }
    bool is_uniform() const noexcept;

private:
    std::vector<double> p_;
};

/// Rational counterpart of ProbabilityVector; sums to exactly one.
class ExactProbabilityVector {
public:
    explicit ExactProbabilityVector(std::vector<Rational> weights);
    static ExactProbabilityVector uniform(int k);

    int size() const noexcept { return static_cast<int>(p_.size()); }
    const Rational& operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
    ProbabilityVector to_double() const;

private:
    std::vector<Rational> p_;
};

/// k^m, throwing BudgetExceeded when it exceeds `cap`.
std::uint64_t level_size(int k, int m, std::uint64_t cap = default_limits().max_cells);

/// All words of length m in lexicographic order (k >= 2, m >= 0).
std::vector<Word> enumerate_level(int k, int m, std::uint64_t cap = default_limits().max_cells);

/// Drops the first symbol. Rejects the empty word.
Word shift(const Word& w);

/// k^(-L) with L the common-prefix length of two nonempty prefixes.
///
/// Both words stand for infinite sequences truncated at their length; when
/// one is a prefix of the other the returned value is an upper bound on the
/// metric between any infinite extensions.
double word_metric(const Word& a, const Word& b);

/// Bernoulli measure of the cylinder [w]; 1 for the empty word.
double cylinder_measure(const ProbabilityVector& p, const Word& w);
Rational cylinder_measure(const ExactProbabilityVector& p, const Word& w);

/// Masses of all level-m cylinders in lexicographic order, built
/// multiplicatively down the tree.
std::vector<double> level_masses(const ProbabilityVector& p, int m,
                                 std::uint64_t cap = default_limits().max_cells);
std::vector<Rational> level_masses(const ExactProbabilityVector& p, int m,
                                   std::uint64_t cap = default_limits().max_cells);

}  // namespace ssips
