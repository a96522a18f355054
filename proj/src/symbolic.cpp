#include "ssips/symbolic.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace ssips {

const Limits& default_limits() {
    static const Limits limits = [] {
        Limits l;
        if (const char* env = std::getenv("SSIPS_EVAL_BUDGET")) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(env, &end, 10);
            if (end != env && v > 0) l.max_evaluations = v;
        }
        return l;
    }();
    return limits;
}

namespace {

void check_alphabet(int k) {
    if (k < 2 || k > 255) throw InvalidArgument("alphabet size must lie in [2, 255], got " + std::to_string(k));
}

}  // namespace

Word::Word(int k) : k_(k) { check_alphabet(k); }

Word::Word(int k, std::initializer_list<int> symbols)
    : Word(k, std::span<const int>(symbols.begin(), symbols.size())) {}

Word::Word(int k, std::span<const int> symbols) : k_(k) {
    check_alphabet(k);
    digits_.reserve(symbols.size());
    for (int s : symbols) push_back(s);
}

Word Word::from_index(int k, int level, std::uint64_t index) {
    Word w(k);
    if (level < 0) throw InvalidArgument("negative word length");
    w.digits_.assign(static_cast<std::size_t>(level), 0);
    for (int pos = level - 1; pos >= 0; --pos) {
        w.digits_[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(index % static_cast<std::uint64_t>(k));
        index /= static_cast<std::uint64_t>(k);
    }
    if (index != 0) throw InvalidArgument("index out of range for the requested level");
    return w;
}

std::uint64_t Word::index() const {
    std::uint64_t idx = 0;
    for (auto d : digits_) {
        if (idx > (std::numeric_limits<std::uint64_t>::max() - d) / static_cast<std::uint64_t>(k_))
            throw BudgetExceeded("word index overflows 64 bits");
        idx = idx * static_cast<std::uint64_t>(k_) + d;
    }
    return idx;
}

Word& Word::push_back(int symbol) {
    if (symbol < 1 || symbol > k_)
        throw InvalidArgument("symbol " + std::to_string(symbol) + " outside [1, " + std::to_string(k_) + "]");
    digits_.push_back(static_cast<std::uint8_t>(symbol - 1));
    return *this;
}

Word Word::concat(const Word& tail) const {
    if (tail.k_ != k_) throw InvalidArgument("concatenating words over different alphabets");
    Word out = *this;
    out.digits_.insert(out.digits_.end(), tail.digits_.begin(), tail.digits_.end());
    return out;
}

Word Word::prefix(int n) const {
    if (n < 0 || n > length()) throw InvalidArgument("prefix length out of range");
    Word out(k_);
    out.digits_.assign(digits_.begin(), digits_.begin() + n);
    return out;
}

std::string Word::to_string() const {
    if (digits_.empty()) return "()";
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < digits_.size(); ++i) {
        if (i) os << ',';
        os << int(digits_[i]) + 1;
    }
    os << ')';
    return os.str();
}

ProbabilityVector::ProbabilityVector(std::vector<double> weights) : p_(std::move(weights)) {
    if (p_.size() < 2) throw InvalidArgument("probability vector needs at least two weights");
    double sum = 0.0;
    for (double x : p_) {
        if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("probability weights must be positive and finite");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("probability weights must sum to 1");
}

ProbabilityVector ProbabilityVector::uniform(int k) {
    check_alphabet(k);
    return ProbabilityVector(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
}

bool ProbabilityVector::is_uniform() const noexcept {
    const double u = 1.0 / static_cast<double>(p_.size());
    for (double x : p_)
        if (x != u) return false;
    return true;
}

ExactProbabilityVector::ExactProbabilityVector(std::vector<Rational> weights) : p_(std::move(weights)) {
    if (p_.size() < 2) throw InvalidArgument("probability vector needs at least two weights");
    Rational sum = 0;
    for (const auto& x : p_) {
        if (x <= 0) throw InvalidArgument("probability weights must be positive");
        sum += x;
    }
    if (sum != 1) throw InvalidArgument("exact probability weights must sum to exactly 1");
}

ExactProbabilityVector ExactProbabilityVector::uniform(int k) {
    check_alphabet(k);
    return ExactProbabilityVector(std::vector<Rational>(static_cast<std::size_t>(k), Rational(1, k)));
}

ProbabilityVector ExactProbabilityVector::to_double() const {
    std::vector<double> w;
    w.reserve(p_.size());
    for (const auto& x : p_) w.push_back(x.convert_to<double>());
    return ProbabilityVector(std::move(w));
}

std::uint64_t level_size(int k, int m, std::uint64_t cap) {
    check_alphabet(k);
    if (m < 0) throw InvalidArgument("level must be nonnegative");
    std::uint64_t n = 1;
    for (int i = 0; i < m; ++i) {
        if (n > cap / static_cast<std::uint64_t>(k))
            throw BudgetExceeded(std::to_string(k) + "^" + std::to_string(m) + " cells exceed the cap of " +
                                 std::to_string(cap));
        n *= static_cast<std::uint64_t>(k);
    }
    if (n > cap) throw BudgetExceeded("cell count exceeds the cap");
    return n;
}

std::vector<Word> enumerate_level(int k, int m, std::uint64_t cap) {
    const std::uint64_t n = level_size(k, m, cap);
    std::vector<Word> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(Word::from_index(k, m, i));
    return out;
}

Word shift(const Word& w) {
    if (w.empty()) throw InvalidArgument("cannot shift the empty word");
    Word out(w.alphabet());
    for (int i = 1; i < w.length(); ++i) out.push_back(w.symbol(i));
    return out;
}

double word_metric(const Word& a, const Word& b) {
    if (a.empty() || b.empty()) throw InvalidArgument("word_metric needs nonempty words");
    if (a.alphabet() != b.alphabet()) throw InvalidArgument("word_metric over different alphabets");
    const int n = std::min(a.length(), b.length());
    int common = 0;
    while (common < n && a.digit(common) == b.digit(common)) ++common;
    return std::pow(static_cast<double>(a.alphabet()), -common);
}

double cylinder_measure(const ProbabilityVector& p, const Word& w) {
    if (w.alphabet() != p.size()) throw InvalidArgument("word alphabet does not match probability vector");
    double m = 1.0;
    for (auto d : w.digits()) m *= p[d];
    return m;
}

Rational cylinder_measure(const ExactProbabilityVector& p, const Word& w) {
    if (w.alphabet() != p.size()) throw InvalidArgument("word alphabet does not match probability vector");
    Rational m = 1;
    for (auto d : w.digits()) m *= p[d];
    return m;
}

namespace {

template <class T, class P>
std::vector<T> build_masses(const P& p, int m, std::uint64_t cap) {
    const int k = p.size();
    const std::uint64_t n = level_size(k, m, cap);
    std::vector<T> cur{T(1)};
    cur.reserve(n);
    for (int level = 0; level < m; ++level) {
        std::vector<T> next;
        next.reserve(cur.size() * static_cast<std::size_t>(k));
        for (const auto& parent : cur)
            for (int j = 0; j < k; ++j) next.push_back(parent * p[j]);
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

std::vector<double> level_masses(const ProbabilityVector& p, int m, std::uint64_t cap) {
    return build_masses<double>(p, m, cap);
}

std::vector<Rational> level_masses(const ExactProbabilityVector& p, int m, std::uint64_t cap) {
    return build_masses<Rational>(p, m, cap);
}

}  // namespace ssips
