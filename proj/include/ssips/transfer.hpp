#pragma once

// Level-m piecewise-constant fields on K, their martingale (conditional
// expectation) levels, and the transfer to step functions on [0,1] and
// [0,1]^2 through the canonical interval cylinders Q_w.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssips/quadrature.hpp"

namespace ssips {

/// sum_{|w|=m} u_w 1_{K_w} with u_w in R^s, cells in lexicographic order.
class PiecewiseConstantField {
public:
    PiecewiseConstantField() = default;
    PiecewiseConstantField(int k, int level, int state_dim, std::vector<double> values);
    static PiecewiseConstantField constant(int k, int level, std::span<const double> state);
    static PiecewiseConstantField constant(int k, int level, double value);
    /// Indicator of K_w at level |w|.
    static PiecewiseConstantField indicator(const Word& w);

    int alphabet() const noexcept { return k_; }
    int level() const noexcept { return level_; }
    int state_dim() const noexcept { return s_; }
    std::size_t cells() const noexcept { return s_ ? values_.size() / static_cast<std::size_t>(s_) : 0; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> cell(std::size_t i) const {
        return {values_.data() + i * static_cast<std::size_t>(s_), static_cast<std::size_t>(s_)};
    }
    double operator()(std::size_t cell, int component = 0) const {
        return values_[cell * static_cast<std::size_t>(s_) + static_cast<std::size_t>(component)];
    }
    double& operator()(std::size_t cell, int component = 0) {
        return values_[cell * static_cast<std::size_t>(s_) + static_cast<std::size_t>(component)];
    }

    friend bool operator==(const PiecewiseConstantField&, const PiecewiseConstantField&) = default;

private:
    int k_ = 0;
    int level_ = 0;
    int s_ = 0;
    std::vector<double> values_;
};

/// Cell-averaged kernel values W_{wv} at level m.
class KernelMatrix {
public:
    KernelMatrix() = default;
    KernelMatrix(int k, int level, Eigen::MatrixXd entries);
    static KernelMatrix constant(int k, int level, double value);

    int alphabet() const noexcept { return k_; }
    int level() const noexcept { return level_; }
    Eigen::Index cells() const noexcept { return entries_.rows(); }
    const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    double operator()(Eigen::Index w, Eigen::Index v) const { return entries_(w, v); }
    bool is_symmetric(double tol = 0.0) const;

private:
    int k_ = 0;
    int level_ = 0;
    Eigen::MatrixXd entries_;
};

/// f_m = E(f | K_m): coefficient w is the cell average of phi over K_w using
/// level m + sublevel nodes.
PiecewiseConstantField martingale_level(const SelfSimilarMeasure& meas, const VectorFunction& phi, int m,
                                        int sublevel, const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                                        const Limits& limits = default_limits());
PiecewiseConstantField martingale_level(const SelfSimilarMeasure& meas, const ScalarFunction& phi, int m,
                                        int sublevel, const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                                        const Limits& limits = default_limits());

/// Conditional expectation onto level (field.level - levels): each parent is
/// the p-weighted average of its children.
PiecewiseConstantField coarsen(const PiecewiseConstantField& field, const ProbabilityVector& p, int levels = 1);

/// Copies every coefficient to all of its descendants at target_level.
PiecewiseConstantField refine(const PiecewiseConstantField& field, int target_level,
                              const Limits& limits = default_limits());

/// (sum_w nu(K_w) |u_w|^q)^(1/q) with |.| Euclidean on the state.
double lp_norm(const PiecewiseConstantField& field, const ProbabilityVector& p, double q = 2.0);

/// Step function on [0,1]: value rows on [breakpoints[i], breakpoints[i+1]),
/// the last interval closed.
template <class T>
struct StepFunction {
    int width = 1;
    std::vector<T> breakpoints;  // size cells + 1, from 0 to 1
    std::vector<T> values;       // cells * width

    std::size_t cells() const noexcept { return breakpoints.empty() ? 0 : breakpoints.size() - 1; }
    T length(std::size_t i) const { return breakpoints[i + 1] - breakpoints[i]; }

    /// sum_i |value_i| * length_i, scalar functions only.
    T l1_norm() const {
        using std::abs;
        T acc = 0;
        for (std::size_t i = 0; i < cells(); ++i) acc += abs(values[i]) * length(i);
        return acc;
    }
};

/// Index of the interval containing x in [0,1].
std::size_t locate(const StepFunction<double>& step, double x);
double evaluate(const StepFunction<double>& step, double x, int component = 0);
/// Integral of component `component` over [a, b] subset [0,1].
double integrate(const StepFunction<double>& step, double a, double b, int component = 0);

/// Tf for a finite-level field: the same coefficients on the interval
/// cylinders Q_w, whose lengths are mu_p([w]).
StepFunction<double> transfer_to_interval(const PiecewiseConstantField& field, const ProbabilityVector& p);
/// Exact counterpart; double coefficients convert to rationals without rounding.
StepFunction<Rational> transfer_to_interval(const PiecewiseConstantField& field, const ExactProbabilityVector& p);

/// sum_w nu(K_w) |u_w| for scalar fields.
double l1_norm(const PiecewiseConstantField& field, const ProbabilityVector& p);
Rational l1_norm(const PiecewiseConstantField& field, const ExactProbabilityVector& p);

/// Pixel image of a kernel on the grid of interval cylinders.
struct GraphonImage {
    std::vector<double> breakpoints;
    Eigen::MatrixXd pixels;  // pixels(idx(w), idx(v)) = W_{wv}

    double evaluate(double x, double y) const;
};

GraphonImage kernel_to_graphon(const KernelMatrix& km, const ProbabilityVector& p);

}  // namespace ssips
