#include "ssips/transfer.hpp"

#include <algorithm>
#include <cmath>

namespace ssips {

PiecewiseConstantField::PiecewiseConstantField(int k, int level, int state_dim, std::vector<double> values)
    : k_(k), level_(level), s_(state_dim), values_(std::move(values)) {
    if (state_dim < 1) throw InvalidArgument("state dimension must be positive");
    const std::uint64_t n = level_size(k, level);
    if (values_.size() != n * static_cast<std::uint64_t>(state_dim))
        throw InvalidArgument("field needs k^m * state_dim coefficients");
}

PiecewiseConstantField PiecewiseConstantField::constant(int k, int level, std::span<const double> state) {
    const std::uint64_t n = level_size(k, level);
    std::vector<double> values;
    values.reserve(n * state.size());
    for (std::uint64_t i = 0; i < n; ++i) values.insert(values.end(), state.begin(), state.end());
    return {k, level, static_cast<int>(state.size()), std::move(values)};
}

PiecewiseConstantField PiecewiseConstantField::constant(int k, int level, double value) {
    return constant(k, level, std::span<const double>(&value, 1));
}

PiecewiseConstantField PiecewiseConstantField::indicator(const Word& w) {
    auto f = constant(w.alphabet(), w.length(), 0.0);
    f(static_cast<std::size_t>(w.index())) = 1.0;
    return f;
}

KernelMatrix::KernelMatrix(int k, int level, Eigen::MatrixXd entries)
    : k_(k), level_(level), entries_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(level_size(k, level));
    if (entries_.rows() != n || entries_.cols() != n) throw InvalidArgument("kernel matrix must be k^m x k^m");
    if (!entries_.allFinite()) throw InvalidArgument("kernel matrix has non-finite entries");
}

KernelMatrix KernelMatrix::constant(int k, int level, double value) {
    const auto n = static_cast<Eigen::Index>(level_size(k, level));
    return {k, level, Eigen::MatrixXd::Constant(n, n, value)};
}

bool KernelMatrix::is_symmetric(double tol) const {
    return (entries_ - entries_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

PiecewiseConstantField martingale_level(const SelfSimilarMeasure& meas, const VectorFunction& phi, int m,
                                        int sublevel, const std::optional<Eigen::VectorXd>& anchor,
                                        const Limits& limits) {
    if (m < 0 || sublevel < 0) throw InvalidArgument("levels must be nonnegative");
    const int k = meas.alphabet();
    const std::uint64_t n = level_size(k, m + sublevel, limits.max_cells);
    if (n > limits.max_evaluations) throw BudgetExceeded("martingale level exceeds the evaluation budget");
    const Eigen::VectorXd a = anchor ? *anchor : default_quadrature_anchor(meas.ifs());
    const PointCloud nodes = attractor_points(meas.ifs(), m + sublevel, a, limits.max_cells);

    std::vector<double> values;
    int width = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Eigen::VectorXd v = phi(nodes[i]);
        if (width < 0) {
            width = static_cast<int>(v.size());
            values.reserve(nodes.size() * static_cast<std::size_t>(width));
        } else if (v.size() != width) {
            throw InvalidArgument("function output dimension changed between points");
        }
        values.insert(values.end(), v.data(), v.data() + width);
    }
    return {k, m, width, tree_average(values, width, meas.weights(), sublevel)};
}

PiecewiseConstantField martingale_level(const SelfSimilarMeasure& meas, const ScalarFunction& phi, int m,
                                        int sublevel, const std::optional<Eigen::VectorXd>& anchor,
                                        const Limits& limits) {
    return martingale_level(
        meas, VectorFunction([&phi](std::span<const double> x) { return Eigen::VectorXd::Constant(1, phi(x)); }), m,
        sublevel, anchor, limits);
}

PiecewiseConstantField coarsen(const PiecewiseConstantField& field, const ProbabilityVector& p, int levels) {
    if (p.size() != field.alphabet()) throw InvalidArgument("probability vector does not match the field");
    if (levels < 0 || levels > field.level()) throw InvalidArgument("cannot coarsen below level 0");
    return {field.alphabet(), field.level() - levels, field.state_dim(),
            tree_average(field.values(), field.state_dim(), p, levels)};
}

PiecewiseConstantField refine(const PiecewiseConstantField& field, int target_level, const Limits& limits) {
    if (target_level < field.level()) throw InvalidArgument("refine target is coarser than the field");
    const std::uint64_t n = level_size(field.alphabet(), target_level, limits.max_cells);
    const std::uint64_t copies = n / field.cells();
    const auto s = static_cast<std::size_t>(field.state_dim());
    std::vector<double> values;
    values.reserve(n * s);
    for (std::size_t parent = 0; parent < field.cells(); ++parent) {
        const auto state = field.cell(parent);
        for (std::uint64_t c = 0; c < copies; ++c) values.insert(values.end(), state.begin(), state.end());
    }
    return {field.alphabet(), target_level, field.state_dim(), std::move(values)};
}

double lp_norm(const PiecewiseConstantField& field, const ProbabilityVector& p, double q) {
    if (!(q >= 1.0)) throw InvalidArgument("L^p norm needs p >= 1");
    std::vector<double> powers(field.cells());
    for (std::size_t i = 0; i < field.cells(); ++i) {
        double sq = 0.0;
        for (double v : field.cell(i)) sq += v * v;
        powers[i] = q == 2.0 ? sq : std::pow(std::sqrt(sq), q);
    }
    const double integral = tree_average(powers, 1, p, field.level())[0];
    return q == 2.0 ? std::sqrt(integral) : std::pow(integral, 1.0 / q);
}

namespace {

// Left endpoints of the interval cylinders: left(w.j) = left(w) + |Q_w| * sum_{l<j} p_l.
template <class T, class P>
std::vector<T> interval_breakpoints(const P& p, int m) {
    const int k = p.size();
    std::vector<T> left{T(0)}, length{T(1)};
    for (int level = 0; level < m; ++level) {
        std::vector<T> nl, nlen;
        nl.reserve(left.size() * static_cast<std::size_t>(k));
        nlen.reserve(left.size() * static_cast<std::size_t>(k));
        for (std::size_t w = 0; w < left.size(); ++w) {
            T offset = 0;
            for (int j = 0; j < k; ++j) {
                nl.push_back(left[w] + length[w] * offset);
                nlen.push_back(length[w] * p[j]);
                offset += p[j];
            }
        }
        left.swap(nl);
        length.swap(nlen);
    }
    left.push_back(T(1));
    return left;
}

void require_scalar(const PiecewiseConstantField& field) {
    if (field.state_dim() != 1) throw InvalidArgument("operation needs a scalar field");
}

}  // namespace

StepFunction<double> transfer_to_interval(const PiecewiseConstantField& field, const ProbabilityVector& p) {
    if (p.size() != field.alphabet()) throw InvalidArgument("probability vector does not match the field");
    StepFunction<double> step;
    step.width = field.state_dim();
    if (p.is_uniform()) {
        const double n = static_cast<double>(field.cells());
        step.breakpoints.resize(field.cells() + 1);
        for (std::size_t i = 0; i <= field.cells(); ++i) step.breakpoints[i] = static_cast<double>(i) / n;
    } else {
        step.breakpoints = interval_breakpoints<double>(p, field.level());
    }
    step.values.assign(field.values().begin(), field.values().end());
    return step;
}

StepFunction<Rational> transfer_to_interval(const PiecewiseConstantField& field, const ExactProbabilityVector& p) {
    if (p.size() != field.alphabet()) throw InvalidArgument("probability vector does not match the field");
    StepFunction<Rational> step;
    step.width = field.state_dim();
    step.breakpoints = interval_breakpoints<Rational>(p, field.level());
    step.values.reserve(field.values().size());
    for (double v : field.values()) step.values.emplace_back(v);
    return step;
}

std::size_t locate(const StepFunction<double>& step, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("step functions live on [0,1]");
    const auto it = std::upper_bound(step.breakpoints.begin(), step.breakpoints.end(), x);
    const auto idx = static_cast<std::size_t>(it - step.breakpoints.begin());
    return std::min(idx == 0 ? 0 : idx - 1, step.cells() - 1);
}

double evaluate(const StepFunction<double>& step, double x, int component) {
    return step.values[locate(step, x) * static_cast<std::size_t>(step.width) + static_cast<std::size_t>(component)];
}

double integrate(const StepFunction<double>& step, double a, double b, int component) {
    if (!(0.0 <= a && a <= b && b <= 1.0)) throw InvalidArgument("integration bounds must satisfy 0 <= a <= b <= 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < step.cells(); ++i) {
        const double lo = std::max(a, step.breakpoints[i]);
        const double hi = std::min(b, step.breakpoints[i + 1]);
        if (hi > lo)
            acc += (hi - lo) * step.values[i * static_cast<std::size_t>(step.width) + static_cast<std::size_t>(component)];
    }
    return acc;
}

double l1_norm(const PiecewiseConstantField& field, const ProbabilityVector& p) {
    require_scalar(field);
    const auto masses = level_masses(p, field.level());
    double acc = 0.0;
    for (std::size_t i = 0; i < field.cells(); ++i) acc += std::abs(field(i)) * masses[i];
    return acc;
}

Rational l1_norm(const PiecewiseConstantField& field, const ExactProbabilityVector& p) {
    require_scalar(field);
    const auto masses = level_masses(p, field.level());
    Rational acc = 0;
    for (std::size_t i = 0; i < field.cells(); ++i) acc += abs(Rational(field(i))) * masses[i];
    return acc;
}

double GraphonImage::evaluate(double x, double y) const {
    StepFunction<double> axis;
    axis.breakpoints = breakpoints;
    axis.values.assign(breakpoints.size() - 1, 0.0);
    return pixels(static_cast<Eigen::Index>(locate(axis, x)), static_cast<Eigen::Index>(locate(axis, y)));
}

GraphonImage kernel_to_graphon(const KernelMatrix& km, const ProbabilityVector& p) {
    if (p.size() != km.alphabet()) throw InvalidArgument("probability vector does not match the kernel");
    const auto axis = transfer_to_interval(PiecewiseConstantField::constant(km.alphabet(), km.level(), 0.0), p);
    return {axis.breakpoints, km.entries()};
}

}  // namespace ssips
