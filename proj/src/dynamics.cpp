#include "ssips/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "ssips/parallel.hpp"
#include "ssips/random.hpp"

namespace ssips {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double interaction_sup_estimate(const ModelSpec& model, int samples, std::uint64_t seed) {
    const auto s = static_cast<std::size_t>(model.state_dim);
    CounterRng rng(seed, 0);
    std::vector<double> u(s), v(s), out(s);
    double sup = 0.0;
    for (int n = 0; n < samples; ++n) {
        for (auto& x : u) x = 2.0 * rng.uniform() - 1.0;
        for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
        model.interaction(u, v, out);
        double sq = 0.0;
        for (double x : out) sq += x * x;
        sup = std::max(sup, std::sqrt(sq));
    }
    return sup;
}

KernelMatrix project_kernel(const SelfSimilarMeasure& meas, const KernelFunction& kernel, int m, int sublevel,
                            const std::optional<Eigen::VectorXd>& anchor, const Limits& limits, int threads) {
    if (m < 0 || sublevel < 0) throw InvalidArgument("levels must be nonnegative");
    const int k = meas.alphabet();
    const std::uint64_t cells = level_size(k, m, limits.max_cells);
    if (static_cast<double>(cells) * static_cast<double>(cells) > static_cast<double>(limits.max_cells))
        throw BudgetExceeded("dense kernel matrix at level " + std::to_string(m) + " exceeds the cell cap");
    const std::uint64_t sub = level_size(k, sublevel, limits.max_cells);
    const double evaluations = static_cast<double>(cells) * cells * sub * sub;
    if (evaluations > static_cast<double>(limits.max_evaluations))
        throw BudgetExceeded("kernel projection needs " + std::to_string(evaluations) +
                             " kernel evaluations, budget is " + std::to_string(limits.max_evaluations));

    const Eigen::VectorXd a = anchor ? *anchor : default_quadrature_anchor(meas.ifs());
    const PointCloud nodes = attractor_points(meas.ifs(), m + sublevel, a, limits.max_cells);
    // Node weights inside a cell are the sub-cylinder masses.
    const std::vector<double> q = level_masses(meas.weights(), sublevel);

    const auto n = static_cast<Eigen::Index>(cells);
    const auto ns = static_cast<std::size_t>(sub);
    Eigen::MatrixXd entries(n, n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t w) {
        for (Eigen::Index v = 0; v < n; ++v) {
            double outer = 0.0;
            for (std::size_t i = 0; i < ns; ++i) {
                const auto x = nodes[w * ns + i];
                double inner = 0.0;
                for (std::size_t j = 0; j < ns; ++j) inner += q[j] * kernel(x, nodes[static_cast<std::size_t>(v) * ns + j]);
                outer += q[i] * inner;
            }
            entries(static_cast<Eigen::Index>(w), v) = outer;
        }
    });
    return {k, m, std::move(entries)};
}

PiecewiseConstantField project_initial(const SelfSimilarMeasure& meas, const VectorFunction& g, int m, int sublevel,
                                       const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    return martingale_level(meas, g, m, sublevel, anchor, limits);
}

PiecewiseConstantField project_initial(const SelfSimilarMeasure& meas, const ScalarFunction& g, int m, int sublevel,
                                       const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    return martingale_level(meas, g, m, sublevel, anchor, limits);
}

CouplingGraph assemble_deterministic(const KernelMatrix& km, const SelfSimilarMeasure& meas) {
    if (km.alphabet() != meas.alphabet()) throw InvalidArgument("kernel matrix does not match the measure");
    const auto masses = level_masses(meas.weights(), km.level());
    CouplingGraph g;
    g.alphabet = km.alphabet();
    g.level = km.level();
    g.kind = GraphKind::deterministic;
    g.weights = km.entries();
    for (Eigen::Index v = 0; v < g.weights.cols(); ++v) g.weights.col(v) *= masses[static_cast<std::size_t>(v)];
    g.symmetric = km.is_symmetric();
    return g;
}

CouplingGraph sample_bernoulli(const KernelMatrix& km, const SelfSimilarMeasure& meas, std::uint64_t seed,
                               bool symmetric) {
    if (km.alphabet() != meas.alphabet()) throw InvalidArgument("kernel matrix does not match the measure");
    const auto& e = km.entries();
    if ((e.array() < 0.0).any() || (e.array() > 1.0).any())
        throw InvalidArgument("W-random graphs need kernel values in [0,1]");
    if (symmetric && !km.is_symmetric(1e-12))
        throw InvalidArgument("symmetric sampling needs a symmetric kernel matrix");

    const auto masses = level_masses(meas.weights(), km.level());
    const auto n = e.rows();
    CouplingGraph g;
    g.alphabet = km.alphabet();
    g.level = km.level();
    g.kind = GraphKind::bernoulli;
    g.seed = seed;
    g.symmetric = symmetric;
    g.weights = Eigen::MatrixXd::Zero(n, n);
    auto draw = [&](Eigen::Index w, Eigen::Index v) {
        CounterRng rng(seed, 1, static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(n) +
                                    static_cast<std::uint64_t>(v));
        return rng.uniform() < e(w, v) ? 1.0 : 0.0;
    };
    for (Eigen::Index w = 0; w < n; ++w) {
        for (Eigen::Index v = symmetric ? w : 0; v < n; ++v) {
            const double xi = draw(w, v);
            g.weights(w, v) = xi * masses[static_cast<std::size_t>(v)];
            if (symmetric && v != w) g.weights(v, w) = xi * masses[static_cast<std::size_t>(w)];
        }
    }
    return g;
}

namespace {

class RightHandSide {
public:
    RightHandSide(const ModelSpec& model, const CouplingGraph& coupling, int threads)
        : model_(model), g_(coupling.weights), threads_(threads),
          n_(coupling.weights.rows()), s_(model.state_dim) {
        if (!model_.separable.empty()) {
            right_.resize(n_, s_);
            product_.resize(n_, s_);
        }
    }

    // du = F(t, u), both n x s row-major.
    void operator()(double t, const RowMatrix& u, RowMatrix& du) {
        const auto s = static_cast<std::size_t>(s_);
        const bool has_params = model_.parameters.cells() > 0;
        for (Eigen::Index w = 0; w < n_; ++w) {
            const std::span<const double> param =
                has_params ? model_.parameters.cell(static_cast<std::size_t>(w)) : std::span<const double>{};
            model_.drift(t, {u.row(w).data(), s}, param, {du.row(w).data(), s});
        }
        if (!model_.separable.empty()) {
            std::vector<double> left(s);
            for (const auto& term : model_.separable) {
                for (Eigen::Index v = 0; v < n_; ++v) term.right({u.row(v).data(), s}, {right_.row(v).data(), s});
                product_.noalias() = g_ * right_;
                for (Eigen::Index w = 0; w < n_; ++w) {
                    term.left({u.row(w).data(), s}, left);
                    for (Eigen::Index c = 0; c < s_; ++c) du(w, c) += left[static_cast<std::size_t>(c)] * product_(w, c);
                }
            }
            return;
        }
        parallel_for(static_cast<std::size_t>(n_), threads_, [&](std::size_t wi) {
            const auto w = static_cast<Eigen::Index>(wi);
            std::vector<double> d(s), acc(s, 0.0);
            const std::span<const double> uw{u.row(w).data(), s};
            for (Eigen::Index v = 0; v < n_; ++v) {
                const double gwv = g_(w, v);
                if (gwv == 0.0) continue;
                model_.interaction(uw, {u.row(v).data(), s}, d);
                for (std::size_t c = 0; c < s; ++c) acc[c] += gwv * d[c];
            }
            for (std::size_t c = 0; c < s; ++c) du(w, static_cast<Eigen::Index>(c)) += acc[c];
        });
    }

private:
    const ModelSpec& model_;
    const Eigen::MatrixXd& g_;
    int threads_;
    Eigen::Index n_;
    Eigen::Index s_;
    RowMatrix right_;
    RowMatrix product_;
};

}  // namespace

Trajectory integrate_ips(const ModelSpec& model, const CouplingGraph& coupling, const PiecewiseConstantField& initial,
                         double T, double dt, const IntegrationOptions& options) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (!(T >= 0.0)) throw InvalidArgument("horizon must be nonnegative");
    if (options.output_stride < 1) throw InvalidArgument("output stride must be positive");
    if (initial.state_dim() != model.state_dim) throw InvalidArgument("initial data and model state sizes differ");
    const auto n = static_cast<Eigen::Index>(initial.cells());
    if (coupling.weights.rows() != n || coupling.weights.cols() != n || coupling.level != initial.level())
        throw InvalidArgument("coupling graph and initial data live on different levels");
    if (model.parameters.cells() > 0 && model.parameters.cells() != initial.cells())
        throw InvalidArgument("model parameters live on a different level");
    if (!model.drift || (!model.interaction && model.separable.empty()))
        throw InvalidArgument("model needs a drift and an interaction");

    const double raw_steps = T / dt;
    const auto steps = static_cast<long long>(std::llround(raw_steps));
    if (std::abs(raw_steps - static_cast<double>(steps)) > 1e-9 * std::max(1.0, raw_steps))
        throw InvalidArgument("horizon must be an integer multiple of the time step");

    const Eigen::Index s = model.state_dim;
    RowMatrix u = Eigen::Map<const RowMatrix>(initial.values().data(), n, s);
    RowMatrix k1(n, s), k2(n, s), k3(n, s), k4(n, s), tmp(n, s);
    RightHandSide rhs(model, coupling, options.threads);

    Trajectory traj;
    traj.metadata = {model.name, initial.level(), dt, coupling.kind, coupling.seed};
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.states.emplace_back(initial.alphabet(), initial.level(), model.state_dim,
                                 std::vector<double>(u.data(), u.data() + u.size()));
    };
    record(0.0);
    for (long long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        rhs(t, u, k1);
        tmp = u + 0.5 * dt * k1;
        rhs(t + 0.5 * dt, tmp, k2);
        tmp = u + 0.5 * dt * k2;
        rhs(t + 0.5 * dt, tmp, k3);
        tmp = u + dt * k3;
        rhs(t + dt, tmp, k4);
        u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!u.allFinite())
            throw NumericalAbort("non-finite state after step " + std::to_string(step + 1) + " (t = " +
                                 std::to_string(static_cast<double>(step + 1) * dt) + ")");
        if ((step + 1) % options.output_stride == 0 || step + 1 == steps)
            record(static_cast<double>(step + 1) * dt);
    }
    return traj;
}

std::vector<ModelInfo> builtin_models() {
    return {{"kuramoto", 1, "phase oscillators, D(u,v) = K sin(2 pi (v - u)), drift omega_w"},
            {"kuramoto_inertia", 2, "(phase, velocity) with damping gamma; coupling acts on the velocity"},
            {"consensus", 1, "opinion dynamics, D(u,v) = h(v - u) with h linear, bounded-confidence or tanh"}};
}

ModelSpec kuramoto(double coupling, PiecewiseConstantField omega) {
    if (omega.cells() > 0 && omega.state_dim() != 1) throw InvalidArgument("Kuramoto frequencies must be scalar");
    ModelSpec m;
    m.name = "kuramoto";
    m.state_dim = 1;
    m.parameters = std::move(omega);
    m.drift = [](double, std::span<const double>, std::span<const double> p, std::span<double> out) {
        out[0] = p.empty() ? 0.0 : p[0];
    };
    m.interaction = [coupling](std::span<const double> u, std::span<const double> v, std::span<double> out) {
        out[0] = coupling * std::sin(kTwoPi * (v[0] - u[0]));
    };
    // K sin(2 pi (v-u)) = K cos(2 pi u) sin(2 pi v) - K sin(2 pi u) cos(2 pi v)
    m.separable = {
        {[coupling](std::span<const double> u, std::span<double> o) { o[0] = coupling * std::cos(kTwoPi * u[0]); },
         [](std::span<const double> v, std::span<double> o) { o[0] = std::sin(kTwoPi * v[0]); }},
        {[coupling](std::span<const double> u, std::span<double> o) { o[0] = -coupling * std::sin(kTwoPi * u[0]); },
         [](std::span<const double> v, std::span<double> o) { o[0] = std::cos(kTwoPi * v[0]); }}};
    m.lipschitz_drift = 1.0;
    m.lipschitz_interaction = kTwoPi * std::max(std::abs(coupling), 1e-300);
    return m;
}

ModelSpec kuramoto_inertia(double coupling, double gamma, PiecewiseConstantField omega) {
    if (omega.cells() > 0 && omega.state_dim() != 1) throw InvalidArgument("frequencies must be scalar");
    ModelSpec m;
    m.name = "kuramoto_inertia";
    m.state_dim = 2;
    m.parameters = std::move(omega);
    m.drift = [gamma](double, std::span<const double> u, std::span<const double> p, std::span<double> out) {
        out[0] = u[1];
        out[1] = -gamma * u[1] + (p.empty() ? 0.0 : p[0]);
    };
    m.interaction = [coupling](std::span<const double> u, std::span<const double> v, std::span<double> out) {
        out[0] = 0.0;
        out[1] = coupling * std::sin(kTwoPi * (v[0] - u[0]));
    };
    m.separable = {{[coupling](std::span<const double> u, std::span<double> o) {
                        o[0] = 0.0;
                        o[1] = coupling * std::cos(kTwoPi * u[0]);
                    },
                    [](std::span<const double> v, std::span<double> o) {
                        o[0] = 0.0;
                        o[1] = std::sin(kTwoPi * v[0]);
                    }},
                   {[coupling](std::span<const double> u, std::span<double> o) {
                        o[0] = 0.0;
                        o[1] = -coupling * std::sin(kTwoPi * u[0]);
                    },
                    [](std::span<const double> v, std::span<double> o) {
                        o[0] = 0.0;
                        o[1] = std::cos(kTwoPi * v[0]);
                    }}};
    m.lipschitz_drift = std::max(1.0, std::abs(gamma)) + 1.0;
    m.lipschitz_interaction = kTwoPi * std::max(std::abs(coupling), 1e-300);
    return m;
}

ModelSpec consensus(ConsensusRule rule, double radius) {
    ModelSpec m;
    m.name = "consensus";
    m.state_dim = 1;
    m.drift = [](double, std::span<const double>, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    m.lipschitz_drift = 1.0;
    switch (rule) {
        case ConsensusRule::linear:
            m.interaction = [](std::span<const double> u, std::span<const double> v, std::span<double> out) {
                out[0] = v[0] - u[0];
            };
            m.separable = {{[](std::span<const double>, std::span<double> o) { o[0] = 1.0; },
                            [](std::span<const double> v, std::span<double> o) { o[0] = v[0]; }},
                           {[](std::span<const double> u, std::span<double> o) { o[0] = -u[0]; },
                            [](std::span<const double>, std::span<double> o) { o[0] = 1.0; }}};
            m.lipschitz_interaction = 1.0;
            break;
        case ConsensusRule::bounded_confidence:
            if (!(radius > 0.0)) throw InvalidArgument("confidence radius must be positive");
            m.interaction = [radius](std::span<const double> u, std::span<const double> v, std::span<double> out) {
                const double d = v[0] - u[0];
                out[0] = std::abs(d) <= radius ? d : 0.0;
            };
            // Discontinuous at |d| = radius; the constant only bounds the slope inside the window.
            m.lipschitz_interaction = 1.0;
            break;
        case ConsensusRule::tanh:
            m.interaction = [](std::span<const double> u, std::span<const double> v, std::span<double> out) {
                out[0] = std::tanh(v[0] - u[0]);
            };
            m.lipschitz_interaction = 1.0;
            break;
    }
    return m;
}

RandomFourierField::RandomFourierField(int dim, std::uint64_t seed, std::uint64_t stream, int terms, double amplitude,
                                       double max_frequency, double offset)
    : dim_(dim), amplitude_(amplitude), offset_(offset) {
    if (dim < 1 || terms < 1) throw InvalidArgument("random field needs positive dimension and term count");
    CounterRng rng(seed, stream);
    freq_.resize(static_cast<std::size_t>(terms * dim));
    phase_.resize(static_cast<std::size_t>(terms));
    for (auto& b : freq_) b = max_frequency * (2.0 * rng.uniform() - 1.0);
    for (auto& c : phase_) c = rng.uniform();
}

double RandomFourierField::operator()(std::span<const double> x) const {
    const auto d = static_cast<std::size_t>(dim_);
    double acc = 0.0;
    for (std::size_t q = 0; q < phase_.size(); ++q) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += freq_[q * d + i] * x[i];
        acc += std::sin(kTwoPi * (dot + phase_[q]));
    }
    return offset_ + amplitude_ * acc / static_cast<double>(phase_.size());
}

}  // namespace ssips
