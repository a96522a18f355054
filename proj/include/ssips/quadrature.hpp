#pragma once

// Integration against self-similar measures: cylinder-tree QMC over
// attractor point clouds, ergodic Monte Carlo along a random symbol string,
// cell averages and the cylinder-level stationarity check.
//
// All weighted sums run bottom-up over the cylinder tree (a parent value is
// sum_j p_j * child_j, children in symbol order). Regrouping a level-n sum
// through any intermediate level therefore reproduces it bit for bit.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssips/geometry.hpp"

namespace ssips {

using ScalarFunction = std::function<double(std::span<const double>)>;
using VectorFunction = std::function<Eigen::VectorXd(std::span<const double>)>;

class SelfSimilarMeasure {
public:
    /// Natural measure p_i = r_i^s.
    explicit SelfSimilarMeasure(Ifs ifs);
    SelfSimilarMeasure(Ifs ifs, ProbabilityVector p);

    const Ifs& ifs() const noexcept { return ifs_; }
    const ProbabilityVector& weights() const noexcept { return p_; }
    int alphabet() const noexcept { return ifs_.size(); }
    /// True when p_i = 1/k for every i.
    bool natural() const noexcept { return natural_; }

    double cell_mass(const Word& w) const { return cylinder_measure(p_, w); }

private:
    Ifs ifs_;
    ProbabilityVector p_;
    bool natural_ = false;
};

/// Averages `levels` times up the cylinder tree. `values` holds k^n rows of
/// `width` entries; the result holds k^(n-levels) rows.
std::vector<double> tree_average(std::span<const double> values, int width, const ProbabilityVector& p, int levels);

/// Summation in a fixed pairwise-tree order.
double pairwise_sum(std::span<const double> values);

/// sum_{|w|=m} mu_p([w]) phi(f_w(anchor)); default anchor is the fixed-point centroid.
double integrate_qmc(const SelfSimilarMeasure& meas, const ScalarFunction& phi, int m,
                     const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                     const Limits& limits = default_limits());
Eigen::VectorXd integrate_qmc(const SelfSimilarMeasure& meas, const VectorFunction& phi, int m,
                              const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                              const Limits& limits = default_limits());

struct McOptions {
    std::uint64_t samples = 100000;  // M
    int tail = 40;                   // symbols per projected point
    std::uint64_t seed = 1;
    int batches = 50;                // batch-means blocks for the standard error
};

struct McEstimate {
    Eigen::VectorXd value;
    /// Batch-means standard error; accounts for the correlation between
    /// successive shifts of the same symbol string.
    Eigen::VectorXd standard_error;
    std::uint64_t samples = 0;
};

/// Ergodic estimator S_M = (1/(M k)) sum_j sum_i phi(pi(x_{1+j} .. x_{tail+j}, i i i ...)).
///
/// The constant tail projects exactly onto the fixed point of f_i, so each
/// point is f_{x_{1+j}..x_{tail+j}}(fixed point of f_i). Symbols are drawn
/// i.i.d. from p on Philox stream (seed, 0).
McEstimate integrate_mc(const SelfSimilarMeasure& meas, const VectorFunction& phi, const McOptions& options,
                        const Limits& limits = default_limits());
McEstimate integrate_mc(const SelfSimilarMeasure& meas, const ScalarFunction& phi, const McOptions& options,
                        const Limits& limits = default_limits());

/// Average of phi over K_w using the level-`sublevel` nodes of the sub-attractor.
double cell_average(const SelfSimilarMeasure& meas, const ScalarFunction& phi, const Word& w, int sublevel,
                    const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                    const Limits& limits = default_limits());
Eigen::VectorXd cell_average(const SelfSimilarMeasure& meas, const VectorFunction& phi, const Word& w, int sublevel,
                             const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                             const Limits& limits = default_limits());

/// max_{|w|=m} |nu(K_w) - sum_j p_j nu(f_j^{-1}(K_w))|, evaluated on cylinders.
double stationarity_residual(const SelfSimilarMeasure& meas, int m, const Limits& limits = default_limits());

enum class QuadratureMethod { qmc, mc };

struct QuadratureConfig {
    QuadratureMethod method = QuadratureMethod::qmc;
    int level = 10;                  // QMC
    McOptions mc{};                  // MC
    std::optional<Eigen::VectorXd> anchor;  // QMC only
};

struct QuadratureResult {
    Eigen::VectorXd value;
    Eigen::VectorXd standard_error;  // zero for QMC
};

QuadratureResult integrate(const SelfSimilarMeasure& meas, const VectorFunction& phi, const QuadratureConfig& config,
                           const Limits& limits = default_limits());

}  // namespace ssips
