#include "ssips/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssips/random.hpp"

namespace ssips {

SelfSimilarMeasure::SelfSimilarMeasure(Ifs ifs) : SelfSimilarMeasure(ifs, ifs.natural_weights()) {}

SelfSimilarMeasure::SelfSimilarMeasure(Ifs ifs, ProbabilityVector p) : ifs_(std::move(ifs)), p_(std::move(p)) {
    if (p_.size() != ifs_.size()) throw InvalidArgument("probability vector length does not match the IFS");
    natural_ = p_.is_uniform();
}

std::vector<double> tree_average(std::span<const double> values, int width, const ProbabilityVector& p, int levels) {
    const auto k = static_cast<std::size_t>(p.size());
    const auto w = static_cast<std::size_t>(width);
    std::vector<double> cur(values.begin(), values.end());
    for (int l = 0; l < levels; ++l) {
        const std::size_t rows = cur.size() / w;
        if (rows % k != 0) throw InvalidArgument("tree_average: row count is not a multiple of k");
        std::vector<double> next(rows / k * w);
        for (std::size_t parent = 0; parent < rows / k; ++parent) {
            for (std::size_t c = 0; c < w; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < k; ++j) acc += p[static_cast<int>(j)] * cur[(parent * k + j) * w + c];
                next[parent * w + c] = acc;
            }
        }
        cur.swap(next);
    }
    return cur;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void check_budget(std::uint64_t evaluations, const Limits& limits, const char* what) {
    if (evaluations > limits.max_evaluations)
        throw BudgetExceeded(std::string(what) + " needs " + std::to_string(evaluations) +
                             " function evaluations, budget is " + std::to_string(limits.max_evaluations));
}

Eigen::VectorXd resolve_anchor(const Ifs& ifs, const std::optional<Eigen::VectorXd>& anchor) {
    Eigen::VectorXd a = anchor ? *anchor : default_quadrature_anchor(ifs);
    if (a.size() != ifs.dim()) throw InvalidArgument("anchor dimension does not match the IFS");
    return a;
}

// Evaluates phi at every point; returns row-major values and the output width.
std::pair<std::vector<double>, int> evaluate(const PointCloud& cloud, const VectorFunction& phi) {
    std::vector<double> out;
    int width = -1;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Eigen::VectorXd v = phi(cloud[i]);
        if (width < 0) {
            width = static_cast<int>(v.size());
            if (width == 0) throw InvalidArgument("integrand returned an empty vector");
            out.reserve(cloud.size() * static_cast<std::size_t>(width));
        } else if (v.size() != width) {
            throw InvalidArgument("integrand output dimension changed between points");
        }
        out.insert(out.end(), v.data(), v.data() + width);
    }
    return {std::move(out), width};
}

VectorFunction lift(const ScalarFunction& phi) {
    return [phi](std::span<const double> x) { return Eigen::VectorXd::Constant(1, phi(x)); };
}

}  // namespace

Eigen::VectorXd integrate_qmc(const SelfSimilarMeasure& meas, const VectorFunction& phi, int m,
                              const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    const std::uint64_t n = level_size(meas.alphabet(), m, limits.max_cells);
    check_budget(n, limits, "QMC integration");
    const PointCloud nodes = attractor_points(meas.ifs(), m, resolve_anchor(meas.ifs(), anchor), limits.max_cells);
    const auto [values, width] = evaluate(nodes, phi);
    const auto root = tree_average(values, width, meas.weights(), m);
    return Eigen::Map<const Eigen::VectorXd>(root.data(), width);
}

double integrate_qmc(const SelfSimilarMeasure& meas, const ScalarFunction& phi, int m,
                     const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    return integrate_qmc(meas, lift(phi), m, anchor, limits)(0);
}

McEstimate integrate_mc(const SelfSimilarMeasure& meas, const VectorFunction& phi, const McOptions& options,
                        const Limits& limits) {
    const auto& ifs = meas.ifs();
    const int k = ifs.size();
    const auto d = static_cast<std::size_t>(ifs.dim());
    if (options.samples < 1) throw InvalidArgument("Monte Carlo needs at least one sample");
    if (options.tail < 1) throw InvalidArgument("Monte Carlo tail depth must be positive");
    if (options.samples > limits.max_evaluations / static_cast<std::uint64_t>(k))
        throw BudgetExceeded("Monte Carlo sample count exceeds the evaluation budget");

    const std::uint64_t M = options.samples;
    const auto tail = static_cast<std::uint64_t>(options.tail);
    CounterRng rng(options.seed, 0);
    std::vector<std::uint8_t> symbols(M + tail);
    for (auto& s : symbols) s = static_cast<std::uint8_t>(rng.categorical(meas.weights().weights()));

    std::vector<double> per_sample;  // M rows of width entries
    int width = -1;
    std::vector<double> x(d), tmp(d);
    Eigen::VectorXd acc;
    for (std::uint64_t j = 0; j < M; ++j) {
        for (int i = 0; i < k; ++i) {
            const auto& fp = ifs.fixed_points()[static_cast<std::size_t>(i)];
            std::copy(fp.data(), fp.data() + d, x.begin());
            for (std::uint64_t n = tail; n-- > 0;) {
                ifs.maps()[symbols[j + n]].map().apply(x, tmp);
                x.swap(tmp);
            }
            const Eigen::VectorXd v = phi(x);
            if (width < 0) {
                width = static_cast<int>(v.size());
                per_sample.reserve(M * static_cast<std::size_t>(width));
            } else if (v.size() != width) {
                throw InvalidArgument("integrand output dimension changed between points");
            }
            if (i == 0)
                acc = v;
            else
                acc += v;
        }
        acc /= static_cast<double>(k);
        per_sample.insert(per_sample.end(), acc.data(), acc.data() + width);
    }

    const auto w = static_cast<std::size_t>(width);
    McEstimate est;
    est.samples = M;
    est.value.resize(width);
    est.standard_error.setZero(width);
    std::vector<double> column(M);
    const std::uint64_t batches = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(options.batches, 2)), M);
    for (std::size_t c = 0; c < w; ++c) {
        for (std::uint64_t j = 0; j < M; ++j) column[j] = per_sample[j * w + c];
        est.value(static_cast<Eigen::Index>(c)) = pairwise_sum(column) / static_cast<double>(M);
        if (batches < 2) continue;
        const std::uint64_t size = M / batches;
        std::vector<double> means(batches);
        for (std::uint64_t b = 0; b < batches; ++b) {
            const std::uint64_t end = (b + 1 == batches) ? M : (b + 1) * size;
            const std::span<const double> block(column.data() + b * size, end - b * size);
            means[b] = pairwise_sum(block) / static_cast<double>(block.size());
        }
        const double mean = pairwise_sum(means) / static_cast<double>(batches);
        double ss = 0.0;
        for (double mb : means) ss += (mb - mean) * (mb - mean);
        est.standard_error(static_cast<Eigen::Index>(c)) =
            std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
    }
    return est;
}

McEstimate integrate_mc(const SelfSimilarMeasure& meas, const ScalarFunction& phi, const McOptions& options,
                        const Limits& limits) {
    return integrate_mc(meas, lift(phi), options, limits);
}

Eigen::VectorXd cell_average(const SelfSimilarMeasure& meas, const VectorFunction& phi, const Word& w, int sublevel,
                             const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    if (w.alphabet() != meas.alphabet()) throw InvalidArgument("word alphabet does not match the measure");
    level_size(meas.alphabet(), w.length() + sublevel, limits.max_cells);
    const std::uint64_t n = level_size(meas.alphabet(), sublevel, limits.max_cells);
    check_budget(n, limits, "cell average");
    PointCloud nodes = attractor_points(meas.ifs(), sublevel, resolve_anchor(meas.ifs(), anchor), limits.max_cells);
    const auto d = static_cast<std::size_t>(nodes.dim);
    for (std::size_t i = 0; i < nodes.size(); ++i) apply_word(meas.ifs(), w, {nodes.coords.data() + i * d, d});
    const auto [values, width] = evaluate(nodes, phi);
    const auto root = tree_average(values, width, meas.weights(), sublevel);
    return Eigen::Map<const Eigen::VectorXd>(root.data(), width);
}

double cell_average(const SelfSimilarMeasure& meas, const ScalarFunction& phi, const Word& w, int sublevel,
                    const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    return cell_average(meas, lift(phi), w, sublevel, anchor, limits)(0);
}

double stationarity_residual(const SelfSimilarMeasure& meas, int m, const Limits& limits) {
    if (m < 1) throw InvalidArgument("stationarity residual needs m >= 1");
    const int k = meas.alphabet();
    const std::uint64_t n = level_size(k, m, limits.max_cells);
    double worst = 0.0;
    for (std::uint64_t idx = 0; idx < n; ++idx) {
        const Word w = Word::from_index(k, m, idx);
        // f_j^{-1}(K_w) is K_{sigma w} for j = w_1 and null otherwise.
        const double pulled = meas.weights()[w.digit(0)] * meas.cell_mass(shift(w));
        worst = std::max(worst, std::abs(meas.cell_mass(w) - pulled));
    }
    return worst;
}

QuadratureResult integrate(const SelfSimilarMeasure& meas, const VectorFunction& phi, const QuadratureConfig& config,
                           const Limits& limits) {
    if (config.method == QuadratureMethod::qmc) {
        Eigen::VectorXd v = integrate_qmc(meas, phi, config.level, config.anchor, limits);
        Eigen::VectorXd se = Eigen::VectorXd::Zero(v.size());
        return {std::move(v), std::move(se)};
    }
    McEstimate est = integrate_mc(meas, phi, config.mc, limits);
    return {std::move(est.value), std::move(est.standard_error)};
}

}  // namespace ssips
