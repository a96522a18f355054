#include "ssips/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ssips/parallel.hpp"

namespace ssips {

namespace {

double abs_pow(double x, double q) {
    const double a = std::abs(x);
    return q == 1.0 ? a : q == 2.0 ? a * a : std::pow(a, q);
}

double root(double integral, double q) {
    return q == 1.0 ? integral : q == 2.0 ? std::sqrt(integral) : std::pow(integral, 1.0 / q);
}

void require_exponent(double q) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidArgument("L^p exponent must be finite and >= 1");
}

void require_budget(double evaluations, const Limits& limits, const char* what) {
    if (evaluations > static_cast<double>(limits.max_evaluations))
        throw BudgetExceeded(std::string(what) + " needs " + std::to_string(evaluations) +
                             " function evaluations, budget is " + std::to_string(limits.max_evaluations));
}

std::vector<double> node_values(const ScalarFunction& phi, const PointCloud& nodes) {
    std::vector<double> v(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = phi(nodes[i]);
    return v;
}

}  // namespace

TrajectoryError traj_error(const Trajectory& coarse, const Trajectory& fine, const ProbabilityVector& p) {
    if (coarse.states.empty() || fine.states.empty()) throw InvalidArgument("empty trajectory");
    if (coarse.times.size() != fine.times.size()) throw InvalidArgument("trajectories have different time grids");
    for (std::size_t t = 0; t < coarse.times.size(); ++t)
        if (std::abs(coarse.times[t] - fine.times[t]) > 1e-12 * std::max(1.0, std::abs(fine.times[t])))
            throw InvalidArgument("trajectories have different time grids");
    if (fine.level() < coarse.level()) throw InvalidArgument("fine trajectory is coarser than the coarse one");
    if (coarse.states.front().state_dim() != fine.states.front().state_dim() ||
        coarse.states.front().alphabet() != fine.states.front().alphabet())
        throw InvalidArgument("trajectories have different state spaces");

    TrajectoryError out;
    out.series.reserve(coarse.times.size());
    for (std::size_t t = 0; t < coarse.times.size(); ++t) {
        PiecewiseConstantField diff = refine(coarse.states[t], fine.level());
        const auto f = fine.states[t].values();
        auto d = diff.values();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= f[i];
        const double e = lp_norm(diff, p, 2.0);
        out.series.push_back(e);
        out.max = std::max(out.max, e);
    }
    return out;
}

double projection_error(const SelfSimilarMeasure& meas, const ScalarFunction& phi, int m, double q, int sublevel,
                        const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    require_exponent(q);
    if (m < 0) throw InvalidArgument("level must be nonnegative");
    if (sublevel < 2) throw InvalidArgument("projection error needs sublevel >= 2");
    const int k = meas.alphabet();
    const std::uint64_t n = level_size(k, m + sublevel, limits.max_cells);
    require_budget(static_cast<double>(n), limits, "projection error");
    const Eigen::VectorXd a = anchor ? *anchor : default_quadrature_anchor(meas.ifs());
    const PointCloud nodes = attractor_points(meas.ifs(), m + sublevel, a, limits.max_cells);
    const std::vector<double> values = node_values(phi, nodes);
    const std::vector<double> coeffs = tree_average(values, 1, meas.weights(), sublevel);
    const std::uint64_t block = level_size(k, sublevel);
    std::vector<double> diffs(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) diffs[i] = abs_pow(values[i] - coeffs[i / block], q);
    return root(tree_average(diffs, 1, meas.weights(), m + sublevel)[0], q);
}

std::vector<double> modulus_profile(const SelfSimilarMeasure& meas, const ScalarFunction& phi, double q, int max_ell,
                                    int sublevel, const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    require_exponent(q);
    if (max_ell < 0 || sublevel < 0) throw InvalidArgument("levels must be nonnegative");
    const Ifs& ifs = meas.ifs();
    if (!ifs.has_common_linear_part())
        throw InvalidArgument("the modulus of continuity needs an IFS whose maps share one linear part");
    const int k = meas.alphabet();
    const Eigen::MatrixXd A = ifs.map(1).linear();
    const Eigen::VectorXd a = anchor ? *anchor : default_quadrature_anchor(ifs);
    const std::uint64_t block = level_size(k, sublevel, limits.max_cells);

    std::vector<double> profile;
    Eigen::MatrixXd A_ell = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    for (int ell = 0; ell <= max_ell; ++ell) {
        const int L = ell + 1 + sublevel;
        const std::uint64_t n = level_size(k, L, limits.max_cells);
        require_budget(static_cast<double>(n) * k, limits, "modulus of continuity");
        const PointCloud nodes = attractor_points(ifs, L, a, limits.max_cells);
        const std::vector<double> values = node_values(phi, nodes);
        const std::uint64_t words = level_size(k, ell);

        double omega = 0.0;
        std::vector<double> diffs(n);
        Eigen::VectorXd y(ifs.dim());
        for (int i = 1; i <= k; ++i) {
            for (int j = 1; j <= k; ++j) {
                if (i == j) continue;
                // f_{w j u} = f_{w i u} + A^ell tau_ij for |w| = ell.
                const Eigen::VectorXd tau = A_ell * translation_vector(ifs, i, j);
                std::fill(diffs.begin(), diffs.end(), 0.0);
                for (std::uint64_t w = 0; w < words; ++w) {
                    const std::uint64_t base = (w * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(i - 1)) * block;
                    for (std::uint64_t u = 0; u < block; ++u) {
                        const auto x = nodes[base + u];
                        for (int c = 0; c < y.size(); ++c) y[c] = x[static_cast<std::size_t>(c)] + tau[c];
                        diffs[base + u] = abs_pow(phi({y.data(), static_cast<std::size_t>(y.size())}) - values[base + u], q);
                    }
                }
                omega = std::max(omega, root(tree_average(diffs, 1, meas.weights(), L)[0], q));
            }
        }
        profile.push_back(omega);
        A_ell = A_ell * A;
    }
    return profile;
}

double modulus_of_continuity(const SelfSimilarMeasure& meas, const ScalarFunction& phi, int m, double q, int max_ell,
                             int sublevel, const std::optional<Eigen::VectorXd>& anchor, const Limits& limits) {
    if (m < 0 || max_ell < m) throw InvalidArgument("modulus needs 0 <= m <= max_ell");
    const auto profile = modulus_profile(meas, phi, q, max_ell, sublevel, anchor, limits);
    return *std::max_element(profile.begin() + m, profile.end());
}

double fit_alpha(std::span<const int> levels, std::span<const double> values, double lambda) {
    if (levels.size() != values.size() || levels.size() < 2) throw InvalidArgument("fit needs at least two points");
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("contraction ratio must lie in (0,1)");
    const double log_lambda = std::log(lambda);
    const auto n = static_cast<double>(levels.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(values[i] > 0.0)) throw InvalidArgument("fit needs positive values");
        sx += levels[i] * log_lambda;
        sy += std::log(values[i]);
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double dx = levels[i] * log_lambda - mx;
        sxy += dx * (std::log(values[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ModulusReport lipschitz_norm_estimate(std::vector<int> levels, std::vector<double> omega, double p, double lambda) {
    if (levels.size() != omega.size()) throw InvalidArgument("levels and omega differ in length");
    if (levels.size() < 3) throw InvalidArgument("Lipschitz norm estimate needs at least 3 levels");
    ModulusReport r;
    r.p = p;
    r.lambda = lambda;
    std::vector<int> fit_levels;
    std::vector<double> fit_values;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (omega[i] < 0.0) throw InvalidArgument("omega must be nonnegative");
        if (omega[i] > 0.0) {
            fit_levels.push_back(levels[i]);
            fit_values.push_back(omega[i]);
        }
    }
    r.fitted_alpha = fit_levels.size() >= 2 ? fit_alpha(fit_levels, fit_values, lambda) : 1.0;
    for (std::size_t i = 0; i < levels.size(); ++i)
        r.lip_norm = std::max(r.lip_norm, std::pow(lambda, -r.fitted_alpha * levels[i]) * omega[i]);
    r.levels = std::move(levels);
    r.omega = std::move(omega);
    r.omega_shifted.resize(r.omega.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i + 1 < r.omega.size(); ++i)
        if (r.levels[i + 1] == r.levels[i] + 1) r.omega_shifted[i] = r.omega[i + 1];
    return r;
}

ModulusReport modulus_report(const SelfSimilarMeasure& meas, const ScalarFunction& phi, std::vector<int> levels,
                             double q, int extra_ell, int sublevel, const std::optional<Eigen::VectorXd>& anchor,
                             const Limits& limits) {
    if (levels.empty()) throw InvalidArgument("no levels requested");
    if (extra_ell < 0) throw InvalidArgument("extra_ell must be nonnegative");
    std::sort(levels.begin(), levels.end());
    if (levels.front() < 0) throw InvalidArgument("levels must be nonnegative");
    const int max_ell = levels.back() + extra_ell;
    const auto profile = modulus_profile(meas, phi, q, max_ell + 1, sublevel, anchor, limits);
    std::vector<double> omega;
    for (int m : levels) omega.push_back(*std::max_element(profile.begin() + m, profile.begin() + max_ell + 1));
    ModulusReport r = lipschitz_norm_estimate(levels, std::move(omega), q, meas.ifs().common_ratio());
    // The lambda^(l+1) scaling column uses the profile one level further down.
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        const int m = r.levels[i] + 1;
        r.omega_shifted[i] = *std::max_element(profile.begin() + m, profile.end());
    }
    return r;
}

double projection_error_bound(int k, double p, double lambda, double alpha, double lip_norm, int m) {
    if (k < 2 || !(p >= 1.0) || !(lambda > 0.0 && lambda < 1.0) || !(alpha > 0.0))
        throw InvalidArgument("invalid rate bound parameters");
    const double prefactor = std::pow(k, 1.0 / p - 1.0) * std::pow(k - 1, 1.0 / p) / (1.0 - std::pow(lambda, alpha));
    return prefactor * lip_norm * std::pow(lambda, alpha * m);
}

RateReport rate_fit(std::vector<int> levels, std::vector<double> errors, double lambda,
                    const std::optional<RateBoundInputs>& bound, double floor) {
    if (levels.size() != errors.size()) throw InvalidArgument("levels and errors differ in length");
    RateReport r;
    r.lambda = lambda;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0)) {
            r.notes.push_back("error at level " + std::to_string(levels[i]) + " is not positive; replaced by floor " +
                              std::to_string(floor));
            errors[i] = floor;
        }
    }
    std::vector<int> fit_levels;
    std::vector<double> fit_errors;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] >= 2) {
            fit_levels.push_back(levels[i]);
            fit_errors.push_back(errors[i]);
        }
    }
    if (fit_levels.size() < 3) throw InvalidArgument("rate fit needs at least 3 levels >= 2");
    r.fitted_alpha = fit_alpha(fit_levels, fit_errors, lambda);
    r.capped_alpha = std::clamp(r.fitted_alpha, std::numeric_limits<double>::min(), 1.0);
    if (r.fitted_alpha > 1.0)
        r.notes.push_back("fitted alpha exceeds 1; generalized Lipschitz classes cap alpha at 1");
    if (r.fitted_alpha <= 0.0) r.notes.push_back("errors do not decay; fitted alpha is not positive");
    if (bound) {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const double b = projection_error_bound(bound->k, bound->p, lambda, bound->alpha, bound->lip_norm, levels[i]);
            r.bounds.push_back(b);
            if (errors[i] > b) r.below_bound = false;
        }
    }
    r.levels = std::move(levels);
    r.errors = std::move(errors);
    return r;
}

EmpiricalMeasure uniform_measure(int dim, std::vector<double> atoms) {
    if (dim < 1 || atoms.empty() || atoms.size() % static_cast<std::size_t>(dim) != 0)
        throw InvalidArgument("atoms must be a nonempty multiple of the dimension");
    EmpiricalMeasure mu;
    mu.dim = dim;
    const std::size_t n = atoms.size() / static_cast<std::size_t>(dim);
    mu.atoms = std::move(atoms);
    mu.weights.assign(n, 1.0 / static_cast<double>(n));
    return mu;
}

EmpiricalMeasure local_empirical_measure(const PiecewiseConstantField& field, const Word& w) {
    if (w.alphabet() != field.alphabet()) throw InvalidArgument("word and field use different alphabets");
    const int ell = field.level() - w.length();
    if (ell < 0) throw InvalidArgument("field level is below the word length");
    const std::uint64_t count = level_size(field.alphabet(), ell);
    const std::uint64_t first = w.index() * count;
    const auto s = static_cast<std::size_t>(field.state_dim());
    EmpiricalMeasure mu;
    mu.dim = field.state_dim();
    mu.atoms.assign(field.values().begin() + static_cast<std::ptrdiff_t>(first * s),
                    field.values().begin() + static_cast<std::ptrdiff_t>((first + count) * s));
    mu.weights.assign(count, 1.0 / static_cast<double>(count));
    return mu;
}

EmpiricalMeasure local_empirical_measure(const Trajectory& traj, const Word& w, std::size_t time_index) {
    if (time_index >= traj.states.size()) throw InvalidArgument("time index out of range");
    return local_empirical_measure(traj.states[time_index], w);
}

namespace {

double w1_scalar(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    struct Event {
        double x;
        double dm;
    };
    std::vector<Event> events;
    events.reserve(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i) events.push_back({a.atoms[i], a.weights[i]});
    for (std::size_t i = 0; i < b.size(); ++i) events.push_back({b.atoms[i], -b.weights[i]});
    std::stable_sort(events.begin(), events.end(), [](const Event& l, const Event& r) { return l.x < r.x; });
    double cdf = 0.0, acc = 0.0;
    for (std::size_t i = 0; i + 1 < events.size(); ++i) {
        cdf += events[i].dm;
        acc += std::abs(cdf) * (events[i + 1].x - events[i].x);
    }
    return acc;
}

// Minimum-cost perfect matching on a square cost matrix (Hungarian method with potentials).
double assignment_cost(const Eigen::MatrixXd& cost) {
    const auto n = static_cast<std::size_t>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j)
        total += cost(static_cast<Eigen::Index>(match[j] - 1), static_cast<Eigen::Index>(j - 1));
    return total;
}

bool has_uniform_weights(const EmpiricalMeasure& mu) {
    const double w = 1.0 / static_cast<double>(mu.size());
    return std::all_of(mu.weights.begin(), mu.weights.end(), [w](double x) { return std::abs(x - w) <= 1e-12; });
}

constexpr std::size_t kMaxAssignmentAtoms = 512;

}  // namespace

double bl_distance_proxy(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.dim != b.dim) throw InvalidArgument("measures live in different dimensions");
    if (a.size() == 0 || b.size() == 0) throw InvalidArgument("empty empirical measure");
    if (a.dim == 1) return w1_scalar(a, b);

    if (!has_uniform_weights(a) || !has_uniform_weights(b))
        throw InvalidArgument("multivariate W1 proxy supports equal-weight measures only");
    const std::size_t n = std::lcm(a.size(), b.size());
    if (n > kMaxAssignmentAtoms)
        throw InvalidArgument("multivariate W1 proxy supports at most 512 atoms after replication");
    const std::size_t ra = n / a.size(), rb = n / b.size();
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = a.atom(i / ra);
        for (std::size_t j = 0; j < n; ++j) {
            const auto y = b.atom(j / rb);
            double sq = 0.0;
            for (int c = 0; c < a.dim; ++c) {
                const double d = x[static_cast<std::size_t>(c)] - y[static_cast<std::size_t>(c)];
                sq += d * d;
            }
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::sqrt(sq);
        }
    }
    return assignment_cost(cost) / static_cast<double>(n);
}

std::vector<std::vector<double>> VlasovTable::max_over_time() const {
    std::vector<std::vector<double>> out;
    for (const auto& per_seed : distances) {
        std::vector<double> row;
        for (const auto& series : per_seed) row.push_back(*std::max_element(series.begin(), series.end()));
        out.push_back(std::move(row));
    }
    return out;
}

VlasovTable vlasov_self_convergence(const SelfSimilarMeasure& meas, const ModelFactory& model,
                                    const KernelFunction& kernel, const InitialSampler& sampler,
                                    const VlasovOptions& options, const std::vector<std::uint64_t>& seeds,
                                    const Limits& limits) {
    if (options.ells.size() < 2) throw InvalidArgument("vlasov check needs at least two ell levels");
    if (!std::is_sorted(options.ells.begin(), options.ells.end()) ||
        std::adjacent_find(options.ells.begin(), options.ells.end()) != options.ells.end())
        throw InvalidArgument("ell levels must be strictly increasing");
    if (options.m < 0 || options.ells.front() < 0) throw InvalidArgument("levels must be nonnegative");
    if (seeds.empty()) throw InvalidArgument("vlasov check needs at least one seed");
    const int k = meas.alphabet();
    const int m = options.m;

    std::vector<CouplingGraph> graphs;
    for (int ell : options.ells) {
        const KernelMatrix km = project_kernel(meas, kernel, m + ell, options.kernel_sublevel, std::nullopt, limits,
                                               options.threads);
        graphs.push_back(assemble_deterministic(km, meas));
    }
    const std::uint64_t coarse_cells = level_size(k, m);

    VlasovTable table;
    table.ells = options.ells;
    table.seeds = seeds;
    table.distances.resize(seeds.size());
    std::vector<std::vector<double>> times(seeds.size());

    parallel_for(seeds.size(), options.threads, [&](std::size_t si) {
        std::vector<Trajectory> trajs;
        for (std::size_t li = 0; li < options.ells.size(); ++li) {
            const int ell = options.ells[li];
            const ModelSpec spec = model(m + ell, seeds[si]);
            const std::uint64_t fine = level_size(k, m + ell, limits.max_cells);
            const std::uint64_t per_coarse = level_size(k, ell);
            const int s = spec.state_dim;
            std::vector<double> values(fine * static_cast<std::uint64_t>(s));
            for (std::uint64_t c = 0; c < fine; ++c) {
                CounterRng rng(seeds[si], 16 + static_cast<std::uint64_t>(ell), c * 64);
                sampler(static_cast<std::size_t>(c / per_coarse), rng,
                        {values.data() + c * static_cast<std::uint64_t>(s), static_cast<std::size_t>(s)});
            }
            const PiecewiseConstantField init(k, m + ell, s, std::move(values));
            trajs.push_back(integrate_ips(spec, graphs[li], init, options.T, options.dt,
                                          {options.output_stride, 1}));
        }
        times[si] = trajs.front().times;
        auto& out = table.distances[si];
        out.resize(options.ells.size() - 1);
        for (std::size_t pair = 0; pair + 1 < trajs.size(); ++pair) {
            for (std::size_t t = 0; t < times[si].size(); ++t) {
                std::vector<double> per_cell(coarse_cells);
                for (std::uint64_t w = 0; w < coarse_cells; ++w) {
                    const Word word = Word::from_index(k, m, w);
                    per_cell[w] = bl_distance_proxy(local_empirical_measure(trajs[pair], word, t),
                                                    local_empirical_measure(trajs[pair + 1], word, t));
                }
                out[pair].push_back(tree_average(per_cell, 1, meas.weights(), m)[0]);
            }
        }
    });
    table.times = times.front();
    return table;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median of an empty sequence");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace ssips
