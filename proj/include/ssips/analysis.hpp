#pragma once

// Discrepancy norms, projection errors, the fractal L^p modulus of
// continuity, rate fitting, and local empirical measures for mean-field checks.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssips/dynamics.hpp"
#include "ssips/random.hpp"

namespace ssips {

struct TrajectoryError {
    double max = 0.0;
    std::vector<double> series;  // one L^2 norm per shared time
};

/// sup_t ||refine(u^m)(t) - u^{m'}(t)||_{L^2(K,nu)} over the shared time grid.
TrajectoryError traj_error(const Trajectory& coarse, const Trajectory& fine, const ProbabilityVector& p);

/// ||phi - E(phi | K_m)||_{L^q(K,nu)} by QMC at level m + sublevel (sublevel >= 2).
double projection_error(const SelfSimilarMeasure& meas, const ScalarFunction& phi, int m, double q, int sublevel,
                        const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                        const Limits& limits = default_limits());

/// omega_l for l = 0..max_ell: max over ordered pairs i != j of
/// ||phi(. + lambda^l tau_ij) - phi||_{L^q} on the matched cylinders K_{w i u}.
/// Nodes live at level l + 1 + sublevel. Requires a common linear part.
std::vector<double> modulus_profile(const SelfSimilarMeasure& meas, const ScalarFunction& phi, double q, int max_ell,
                                    int sublevel, const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                                    const Limits& limits = default_limits());

/// omega_q(phi, m) = max_{m <= l <= max_ell} omega_l.
double modulus_of_continuity(const SelfSimilarMeasure& meas, const ScalarFunction& phi, int m, double q, int max_ell,
                             int sublevel, const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                             const Limits& limits = default_limits());

struct ModulusReport {
    std::vector<int> levels;
    std::vector<double> omega;
    /// omega at the lambda^(l+1) scaling, i.e. omega(m + 1); NaN where it was not computed.
    std::vector<double> omega_shifted;
    double p = 2.0;
    double lambda = 0.5;
    double fitted_alpha = 0.0;
    double lip_norm = 0.0;
};

/// Least-squares slope of log(values) against levels * log(lambda).
double fit_alpha(std::span<const int> levels, std::span<const double> values, double lambda);

/// Fits alpha to omega over the given levels (at least 3) and sets
/// lip_norm = max_m lambda^(-alpha m) omega_m.
ModulusReport lipschitz_norm_estimate(std::vector<int> levels, std::vector<double> omega, double p, double lambda);

/// Full report: omega_q(phi, m) for each m in levels, with max_ell = max(levels) + extra_ell.
ModulusReport modulus_report(const SelfSimilarMeasure& meas, const ScalarFunction& phi, std::vector<int> levels,
                             double q, int extra_ell, int sublevel,
                             const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                             const Limits& limits = default_limits());

/// k^(1/p - 1) (k - 1)^(1/p) / (1 - lambda^alpha) * lip_norm * lambda^(alpha m).
double projection_error_bound(int k, double p, double lambda, double alpha, double lip_norm, int m);

struct RateBoundInputs {
    int k = 3;
    double p = 2.0;
    double alpha = 1.0;
    double lip_norm = 1.0;
};

struct RateReport {
    std::vector<int> levels;
    std::vector<double> errors;  // after flooring
    std::vector<double> bounds;  // empty without bound inputs
    double lambda = 0.5;
    double fitted_alpha = 0.0;
    double capped_alpha = 0.0;  // clamped to (0, 1]
    bool below_bound = true;
    std::vector<std::string> notes;
};

/// Fits alpha on levels >= 2 (at least 3 of them). Non-positive errors are
/// replaced by `floor` and noted.
RateReport rate_fit(std::vector<int> levels, std::vector<double> errors, double lambda,
                    const std::optional<RateBoundInputs>& bound = std::nullopt, double floor = 1e-15);

/// Finite probability measure on R^dim.
struct EmpiricalMeasure {
    int dim = 1;
    std::vector<double> atoms;  // size() * dim
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
    std::span<const double> atom(std::size_t i) const {
        return {atoms.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
};

/// Equal-weight measure on the given atoms.
EmpiricalMeasure uniform_measure(int dim, std::vector<double> atoms);

/// States of all descendants of the coarse cell w, each with mass k^(-ell),
/// ell = field.level() - |w|.
EmpiricalMeasure local_empirical_measure(const PiecewiseConstantField& field, const Word& w);
EmpiricalMeasure local_empirical_measure(const Trajectory& traj, const Word& w, std::size_t time_index);

/// Upper bound for d_BL: the 1-Wasserstein distance. Scalar atoms use the
/// CDF integral; higher dimensions use an exact assignment between
/// equal-weight measures of at most 512 atoms after replication.
double bl_distance_proxy(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Draws the initial state of one fine cell; `coarse_cell` indexes its level-m ancestor.
using InitialSampler = std::function<void(std::size_t coarse_cell, CounterRng& rng, std::span<double> out)>;
/// Model at a given level for a given seed, e.g. with a frequency field projected there.
using ModelFactory = std::function<ModelSpec(int level, std::uint64_t seed)>;

struct VlasovOptions {
    int m = 2;
    std::vector<int> ells{2, 3, 4};
    double T = 1.0;
    double dt = 1e-3;
    int output_stride = 10;
    int kernel_sublevel = 1;
    int threads = 1;
};

struct VlasovTable {
    std::vector<double> times;
    std::vector<int> ells;
    std::vector<std::uint64_t> seeds;
    /// distances[seed][pair][time]: nu-integrated W1 proxy between ells[pair] and ells[pair + 1].
    std::vector<std::vector<std::vector<double>>> distances;

    /// max over time for each (seed, pair).
    std::vector<std::vector<double>> max_over_time() const;
};

/// For each seed and ell, integrates the level m+ell system with i.i.d.
/// initial states per fine cell (Philox stream (seed, 16 + ell), cell
/// counter), then compares local empirical measures of successive ells.
VlasovTable vlasov_self_convergence(const SelfSimilarMeasure& meas, const ModelFactory& model,
                                    const KernelFunction& kernel, const InitialSampler& sampler,
                                    const VlasovOptions& options, const std::vector<std::uint64_t>& seeds,
                                    const Limits& limits = default_limits());

double median(std::vector<double> values);

}  // namespace ssips
