#pragma once

// Galerkin assembly and fixed-step RK4 integration of the self-similar
// particle system
//
//   du_w/dt = f(t, u_w) + sum_{|v|=m} G_{wv} D(u_w, u_v),
//
// with G_{wv} = W_{wv} nu(K_v) (deterministic) or xi_{wv} nu(K_v) (W-random).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssips/transfer.hpp"

namespace ssips {

using KernelFunction = std::function<double(std::span<const double>, std::span<const double>)>;
/// out = f(t, u; lambda), lambda the per-cell parameter vector (may be empty).
using DriftFunction =
    std::function<void(double t, std::span<const double> u, std::span<const double> param, std::span<double> out)>;
/// out = D(u, v).
using InteractionFunction = std::function<void(std::span<const double> u, std::span<const double> v, std::span<double> out)>;
using StateMap = std::function<void(std::span<const double> u, std::span<double> out)>;

/// One term a(u) * b(v) (componentwise) of a separable interaction.
struct SeparableTerm {
    StateMap left;
    StateMap right;
};

struct ModelSpec {
    std::string name;
    int state_dim = 1;
    DriftFunction drift;
    InteractionFunction interaction;
    /// When nonempty, D(u,v) = sum_r left_r(u) * right_r(v) and the coupling
    /// sum is evaluated as dense matrix products. Must agree with `interaction`.
    std::vector<SeparableTerm> separable;
    double lipschitz_drift = 1.0;
    double lipschitz_interaction = 1.0;
    /// Per-cell constant parameters (e.g. natural frequencies); empty if unused.
    PiecewiseConstantField parameters;
};

/// Largest |D(u,v)| found on `samples` random state pairs in [-1,1]^s. The
/// model is admissible for the convergence theory when this is <= 1.
double interaction_sup_estimate(const ModelSpec& model, int samples = 1000, std::uint64_t seed = 7);

enum class GraphKind { deterministic, bernoulli };

struct CouplingGraph {
    int alphabet = 0;
    int level = 0;
    GraphKind kind = GraphKind::deterministic;
    Eigen::MatrixXd weights;  // G_{wv}
    std::optional<std::uint64_t> seed;
    bool symmetric = false;
};

struct TrajectoryMetadata {
    std::string model;
    int level = 0;
    double dt = 0.0;
    GraphKind graph = GraphKind::deterministic;
    std::optional<std::uint64_t> seed;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PiecewiseConstantField> states;
    TrajectoryMetadata metadata;

    int level() const { return states.front().level(); }
};

/// W_{wv}: average of W over K_w x K_v on the tensor product of level
/// `sublevel` sub-cylinder nodes.
KernelMatrix project_kernel(const SelfSimilarMeasure& meas, const KernelFunction& kernel, int m, int sublevel,
                            const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                            const Limits& limits = default_limits(), int threads = 1);

/// g_w: cell averages of the initial datum.
PiecewiseConstantField project_initial(const SelfSimilarMeasure& meas, const VectorFunction& g, int m, int sublevel,
                                       const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                                       const Limits& limits = default_limits());
PiecewiseConstantField project_initial(const SelfSimilarMeasure& meas, const ScalarFunction& g, int m, int sublevel,
                                       const std::optional<Eigen::VectorXd>& anchor = std::nullopt,
                                       const Limits& limits = default_limits());

/// G_{wv} = W_{wv} nu(K_v), diagonal included.
CouplingGraph assemble_deterministic(const KernelMatrix& km, const SelfSimilarMeasure& meas);

/// G_{wv} = xi_{wv} nu(K_v) with xi_{wv} ~ Bernoulli(W_{wv}). Entry (w,v)
/// draws from Philox stream (seed, 1) at counter w*n+v; in symmetric mode
/// only w <= v is drawn and mirrored. Entries of km must lie in [0,1].
CouplingGraph sample_bernoulli(const KernelMatrix& km, const SelfSimilarMeasure& meas, std::uint64_t seed,
                               bool symmetric = true);

struct IntegrationOptions {
    int output_stride = 1;  // record every n-th step (and the last)
    int threads = 1;
};

/// Classical RK4 with fixed step dt on [0, T]; T must be a multiple of dt.
/// Throws NumericalAbort on a non-finite state.
Trajectory integrate_ips(const ModelSpec& model, const CouplingGraph& coupling, const PiecewiseConstantField& initial,
                         double T, double dt, const IntegrationOptions& options = {});

struct ModelInfo {
    std::string name;
    int state_dim;
    std::string description;
};

/// Catalog of the built-in models.
std::vector<ModelInfo> builtin_models();

/// du_w/dt = omega_w + sum_v G_wv K sin(2 pi (u_v - u_w)); s = 1.
ModelSpec kuramoto(double coupling, PiecewiseConstantField omega);

/// State (phase, velocity): du/dt = v, dv/dt = -gamma v + omega + coupling term.
ModelSpec kuramoto_inertia(double coupling, double gamma, PiecewiseConstantField omega);

enum class ConsensusRule { linear, bounded_confidence, tanh };

/// du_w/dt = sum_v G_wv h(u_v - u_w); s = 1.
ModelSpec consensus(ConsensusRule rule, double radius = 0.5);

/// Smooth random function on R^d: offset + amplitude * mean of sin(2 pi (b_q . x) + c_q),
/// with b_q uniform in [-max_frequency, max_frequency]^d. Lipschitz constant at
/// most 2 pi * amplitude * max_frequency * sqrt(d).
class RandomFourierField {
public:
    RandomFourierField(int dim, std::uint64_t seed, std::uint64_t stream, int terms = 8, double amplitude = 1.0,
                       double max_frequency = 1.0, double offset = 0.0);

    double operator()(std::span<const double> x) const;
    double offset() const noexcept { return offset_; }

private:
    int dim_;
    double amplitude_;
    double offset_;
    std::vector<double> freq_;   // terms x dim
    std::vector<double> phase_;  // terms
};

}  // namespace ssips
