#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>

#include "json.hpp"
#include "ssips/csv.hpp"
#include "ssips/experiment.hpp"
#include "ssips/parallel.hpp"

#ifndef SSIPS_VERSION
#define SSIPS_VERSION "unknown"
#endif

namespace ssips {

namespace {

constexpr std::uint64_t kOmegaStream = 3;
constexpr std::uint64_t kInitialStream = 4;
constexpr std::uint64_t kUniformStream = 5;

ScalarFunction test_function(const std::string& name) {
    if (name == "one") return [](std::span<const double>) { return 1.0; };
    if (name == "linear")
        return [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v;
            return s;
        };
    if (name == "exp_abs_diff") return [](std::span<const double> x) { return std::exp(-std::abs(x[0] - x[1])); };
    if (name.size() == 2 && name[0] == 'x') {
        const auto i = static_cast<std::size_t>(name[1] - '1');
        return [i](std::span<const double> x) { return x[i]; };
    }
    throw InvalidArgument("unknown scalar test function '" + name + "'");
}

KernelFunction kernel_function(const ModelConfig& m) {
    auto dist2 = [](std::span<const double> x, std::span<const double> y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return s;
    };
    if (m.kernel == "exp_distance")
        return [dist2](std::span<const double> x, std::span<const double> y) { return std::exp(-std::sqrt(dist2(x, y))); };
    if (m.kernel == "gaussian") {
        const double s2 = m.kernel_scale * m.kernel_scale;
        return [dist2, s2](std::span<const double> x, std::span<const double> y) { return std::exp(-dist2(x, y) / s2); };
    }
    if (m.kernel == "constant") {
        const double c = m.kernel_value;
        return [c](std::span<const double>, std::span<const double>) { return c; };
    }
    throw InvalidArgument("unknown kernel '" + m.kernel + "'");
}

ConsensusRule consensus_rule(const std::string& name) {
    if (name == "linear") return ConsensusRule::linear;
    if (name == "bounded_confidence") return ConsensusRule::bounded_confidence;
    if (name == "tanh") return ConsensusRule::tanh;
    throw InvalidArgument("unknown consensus rule '" + name + "'");
}

int state_dim_of(const std::string& model) { return model == "kuramoto_inertia" ? 2 : 1; }

std::string graph_name(GraphKind kind) { return kind == GraphKind::deterministic ? "deterministic" : "bernoulli"; }

// Seed-dependent data of one experiment: frequency and initial fields are
// projected once at the finest level and coarsened, so every level sees the
// conditional expectations of one underlying function.
class Scenario {
public:
    Scenario(const ExperimentConfig& cfg, const SelfSimilarMeasure& meas, std::uint64_t seed, int finest)
        : cfg_(cfg), meas_(meas), seed_(seed), finest_(finest) {
        const int dim = meas.ifs().dim();
        const auto& m = cfg.model;
        if (m.omega_amplitude != 0.0) {
            const RandomFourierField omega(dim, seed, kOmegaStream, m.omega_terms, m.omega_amplitude, m.omega_frequency);
            omega_fine_ = project_initial(meas, ScalarFunction([&](std::span<const double> x) { return omega(x); }),
                                          finest, cfg.data_sublevel);
        } else {
            omega_fine_ = PiecewiseConstantField::constant(meas.alphabet(), finest, 0.0);
        }
        if (m.initial == "fourier") {
            const RandomFourierField g(dim, seed, kInitialStream, 8, m.initial_amplitude, m.initial_frequency,
                                       m.initial_value);
            phase_fine_ = project_initial(meas, ScalarFunction([&](std::span<const double> x) { return g(x); }), finest,
                                          cfg.data_sublevel);
        } else if (m.initial == "uniform") {
            const std::uint64_t n = level_size(meas.alphabet(), finest);
            std::vector<double> v(n);
            for (std::uint64_t c = 0; c < n; ++c) v[c] = CounterRng(seed, kUniformStream, c * 2).uniform();
            phase_fine_ = PiecewiseConstantField(meas.alphabet(), finest, 1, std::move(v));
        } else if (m.initial == "constant") {
            phase_fine_ = PiecewiseConstantField::constant(meas.alphabet(), finest, m.initial_value);
        } else {
            throw InvalidArgument("unknown initial datum '" + m.initial + "'");
        }
    }

    PiecewiseConstantField omega(int level) const { return coarsen(omega_fine_, meas_.weights(), finest_ - level); }

    PiecewiseConstantField initial(int level) const {
        const PiecewiseConstantField phase = coarsen(phase_fine_, meas_.weights(), finest_ - level);
        if (state_dim_of(cfg_.model.name) == 1) return phase;
        std::vector<double> v;
        v.reserve(phase.cells() * 2);
        for (std::size_t c = 0; c < phase.cells(); ++c) {
            v.push_back(phase(c));
            v.push_back(0.0);
        }
        return {phase.alphabet(), level, 2, std::move(v)};
    }

    ModelSpec model(int level) const { return make_model(cfg_.model, omega(level)); }

    static ModelSpec make_model(const ModelConfig& m, PiecewiseConstantField omega) {
        if (m.name == "kuramoto") return kuramoto(m.coupling, std::move(omega));
        if (m.name == "kuramoto_inertia") return kuramoto_inertia(m.coupling, m.gamma, std::move(omega));
        if (m.name == "consensus") return consensus(consensus_rule(m.rule), m.radius);
        throw InvalidArgument("unknown model '" + m.name + "'");
    }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    const ExperimentConfig& cfg_;
    const SelfSimilarMeasure& meas_;
    std::uint64_t seed_;
    int finest_;
    PiecewiseConstantField omega_fine_;
    PiecewiseConstantField phase_fine_;
};

class Context {
public:
    Context(std::string command, const ExperimentConfig& cfg)
        : command_(std::move(command)), cfg_(cfg), meas_(build_measure(cfg)), hash_(config_hash(cfg)),
          start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.output_dir, ec);
        if (ec) throw IoFailure("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
    }

    const ExperimentConfig& cfg() const { return cfg_; }
    const SelfSimilarMeasure& meas() const { return meas_; }
    const std::string& hash() const { return hash_; }

    std::filesystem::path file(const std::string& name) {
        std::lock_guard lock(mutex_);
        files_.push_back(cfg_.output_dir / name);
        return files_.back();
    }

    void write_json(const std::string& name, nlohmann::json j) {
        j["config_hash"] = hash_;
        j["seeds"] = cfg_.seeds;
        const auto path = file(name);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
        out << j.dump(2) << '\n';
        if (!out) throw IoFailure("write failed for " + path.string());
    }

    const KernelMatrix& kernel_matrix(int level) {
        std::lock_guard lock(mutex_);
        auto it = kernels_.find(level);
        if (it == kernels_.end())
            it = kernels_
                     .emplace(level, project_kernel(meas_, kernel_function(cfg_.model), level, cfg_.kernel_sublevel,
                                                    std::nullopt, default_limits(), cfg_.threads))
                     .first;
        return it->second;
    }

    RunSummary finish() {
        RunSummary summary;
        summary.files = files_;
        summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        nlohmann::json manifest;
        manifest["command"] = command_;
        manifest["config_hash"] = hash_;
        manifest["version"] = SSIPS_VERSION;
        manifest["seeds"] = cfg_.seeds;
        manifest["wall_time_seconds"] = summary.wall_seconds;
        manifest["config"] = nlohmann::json::parse(canonical_config_json(cfg_));
        std::vector<std::string> names;
        for (const auto& f : files_) names.push_back(f.filename().string());
        manifest["files"] = names;
        const auto path = cfg_.output_dir / "manifest.json";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
        out << manifest.dump(2) << '\n';
        if (!out) throw IoFailure("write failed for " + path.string());
        summary.files.push_back(path);
        return summary;
    }

private:
    std::string command_;
    const ExperimentConfig& cfg_;
    SelfSimilarMeasure meas_;
    std::string hash_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::filesystem::path> files_;
    std::map<int, KernelMatrix> kernels_;
    std::mutex mutex_;
};

void write_trajectory(Context& ctx, const std::string& stem, const Trajectory& traj) {
    CsvWriter csv(ctx.file(stem + ".csv"), {"t", "cell_index", "component", "value"});
    for (std::size_t t = 0; t < traj.times.size(); ++t) {
        const auto& field = traj.states[t];
        for (std::size_t c = 0; c < field.cells(); ++c)
            for (int s = 0; s < field.state_dim(); ++s)
                csv.row(traj.times[t], static_cast<std::uint64_t>(c), s, field(c, s));
    }
    csv.close();
    nlohmann::json meta;
    meta["model"] = traj.metadata.model;
    meta["level"] = traj.metadata.level;
    meta["dt"] = traj.metadata.dt;
    meta["graph"] = graph_name(traj.metadata.graph);
    meta["seed"] = traj.metadata.seed ? nlohmann::json(*traj.metadata.seed) : nlohmann::json(nullptr);
    meta["ifs"] = ctx.meas().ifs().name();
    meta["alphabet"] = ctx.meas().alphabet();
    meta["state_dim"] = traj.states.front().state_dim();
    meta["output_stride"] = ctx.cfg().output_stride;
    meta["T"] = ctx.cfg().T;
    ctx.write_json(stem + ".json", std::move(meta));
}

Eigen::VectorXd barycenter_oracle(const SelfSimilarMeasure& meas) {
    // Stationarity: b = sum_i p_i f_i(b).
    const Ifs& ifs = meas.ifs();
    const int d = ifs.dim();
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (int i = 1; i <= ifs.size(); ++i) {
        const double p = meas.weights()[i - 1];
        M -= p * ifs.map(i).linear();
        rhs += p * ifs.map(i).map().translation;
    }
    return M.fullPivLu().solve(rhs);
}

void run_integrate(Context& ctx) {
    const auto& cfg = ctx.cfg();
    const auto& meas = ctx.meas();
    const VectorFunction phi =
        cfg.function == "barycenter"
            ? VectorFunction([](std::span<const double> x) {
                  return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
              })
            : VectorFunction([f = test_function(cfg.function)](std::span<const double> x) {
                  return Eigen::VectorXd::Constant(1, f(x));
              });

    CsvWriter csv(ctx.file("integrate.csv"), {"function", "method", "seed", "component", "value", "standard_error"});
    const std::string method = cfg.quadrature.method == QuadratureMethod::qmc ? "qmc" : "mc";
    std::vector<std::uint64_t> seeds = cfg.quadrature.method == QuadratureMethod::mc ? cfg.seeds
                                                                                      : std::vector<std::uint64_t>{};
    std::vector<QuadratureResult> results(std::max<std::size_t>(seeds.size(), 1));
    parallel_for(results.size(), cfg.threads, [&](std::size_t i) {
        QuadratureConfig q = cfg.quadrature;
        if (!seeds.empty()) q.mc.seed = seeds[i];
        results[i] = integrate(meas, phi, q);
    });
    for (std::size_t i = 0; i < results.size(); ++i)
        for (Eigen::Index c = 0; c < results[i].value.size(); ++c)
            csv.row(cfg.function, method, seeds.empty() ? std::string() : format_number(seeds[i]),
                    static_cast<int>(c), results[i].value[c], results[i].standard_error[c]);
    csv.close();

    const Eigen::VectorXd oracle = barycenter_oracle(meas);
    const int level = cfg.quadrature.method == QuadratureMethod::qmc ? cfg.quadrature.level : 10;
    const Eigen::VectorXd qmc = integrate_qmc(
        meas,
        VectorFunction([](std::span<const double> x) {
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
        }),
        level);
    CsvWriter bary(ctx.file("barycenter.csv"), {"component", "qmc_level", "qmc", "oracle", "abs_error"});
    for (Eigen::Index c = 0; c < qmc.size(); ++c)
        bary.row(static_cast<int>(c), level, qmc[c], oracle[c], std::abs(qmc[c] - oracle[c]));
    bary.close();
}

void run_project(Context& ctx) {
    const auto& cfg = ctx.cfg();
    const auto& meas = ctx.meas();
    const ScalarFunction phi = test_function(cfg.function);
    std::vector<int> levels = cfg.levels;
    std::sort(levels.begin(), levels.end());
    std::vector<double> errors(levels.size());
    parallel_for(levels.size(), cfg.threads, [&](std::size_t i) {
        errors[i] = projection_error(meas, phi, levels[i], cfg.p, cfg.projection_sublevel);
    });
    const ModulusReport mod = modulus_report(meas, phi, levels, cfg.p, cfg.extra_ell, cfg.modulus_sublevel);
    std::optional<RateBoundInputs> bound;
    if (meas.natural() && mod.fitted_alpha > 0.0)
        bound = RateBoundInputs{meas.alphabet(), cfg.p, mod.fitted_alpha, mod.lip_norm};
    const RateReport rate = rate_fit(levels, errors, mod.lambda, bound);

    CsvWriter csv(ctx.file("project.csv"), {"level", "error", "bound", "fitted_alpha"});
    for (std::size_t i = 0; i < levels.size(); ++i)
        csv.row(levels[i], rate.errors[i], rate.bounds.empty() ? std::nan("") : rate.bounds[i], rate.fitted_alpha);
    csv.close();
    nlohmann::json j;
    j["function"] = cfg.function;
    j["p"] = cfg.p;
    j["lambda"] = mod.lambda;
    j["fitted_alpha"] = rate.fitted_alpha;
    j["capped_alpha"] = rate.capped_alpha;
    j["modulus_alpha"] = mod.fitted_alpha;
    j["lip_norm"] = mod.lip_norm;
    j["below_bound"] = rate.below_bound;
    j["notes"] = rate.notes;
    ctx.write_json("project.json", std::move(j));
}

void run_modulus(Context& ctx) {
    const auto& cfg = ctx.cfg();
    const ModulusReport r =
        modulus_report(ctx.meas(), test_function(cfg.function), cfg.levels, cfg.p, cfg.extra_ell, cfg.modulus_sublevel);
    CsvWriter csv(ctx.file("modulus.csv"), {"level", "omega_p", "fitted_alpha", "omega_p_shifted_scale"});
    for (std::size_t i = 0; i < r.levels.size(); ++i) csv.row(r.levels[i], r.omega[i], r.fitted_alpha, r.omega_shifted[i]);
    csv.close();
    nlohmann::json j;
    j["function"] = cfg.function;
    j["levels"] = r.levels;
    j["omega_p"] = r.omega;
    j["omega_p_shifted_scale"] = r.omega_shifted;
    j["p"] = r.p;
    j["lambda"] = r.lambda;
    j["fitted_alpha"] = r.fitted_alpha;
    j["lip_norm"] = r.lip_norm;
    ctx.write_json("modulus.json", std::move(j));
}

void run_transfer(Context& ctx) {
    const auto& cfg = ctx.cfg();
    const auto& meas = ctx.meas();
    const ScalarFunction phi = test_function(cfg.function);
    for (int m : cfg.levels) {
        const PiecewiseConstantField field = martingale_level(meas, phi, m, cfg.data_sublevel);
        const StepFunction<double> step = transfer_to_interval(field, meas.weights());
        CsvWriter csv(ctx.file("transfer_L" + std::to_string(m) + ".csv"), {"cell_index", "left", "right", "value"});
        for (std::size_t c = 0; c < step.cells(); ++c)
            csv.row(static_cast<std::uint64_t>(c), step.breakpoints[c], step.breakpoints[c + 1], step.values[c]);
        csv.close();

        const GraphonImage img = kernel_to_graphon(ctx.kernel_matrix(m), meas.weights());
        CsvWriter g(ctx.file("graphon_L" + std::to_string(m) + ".csv"),
                    {"row", "col", "x_left", "x_right", "y_left", "y_right", "value"});
        for (Eigen::Index r = 0; r < img.pixels.rows(); ++r)
            for (Eigen::Index c = 0; c < img.pixels.cols(); ++c)
                g.row(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c),
                      img.breakpoints[static_cast<std::size_t>(r)], img.breakpoints[static_cast<std::size_t>(r) + 1],
                      img.breakpoints[static_cast<std::size_t>(c)], img.breakpoints[static_cast<std::size_t>(c) + 1],
                      img.pixels(r, c));
        g.close();
    }
}

std::vector<GraphKind> graph_kinds(const std::string& graph) {
    if (graph == "deterministic") return {GraphKind::deterministic};
    if (graph == "bernoulli") return {GraphKind::bernoulli};
    if (graph == "both") return {GraphKind::deterministic, GraphKind::bernoulli};
    throw InvalidArgument("unknown graph kind '" + graph + "'");
}

void run_simulate(Context& ctx) {
    const auto& cfg = ctx.cfg();
    const auto& meas = ctx.meas();
    std::vector<int> levels = cfg.levels;
    std::sort(levels.begin(), levels.end());
    const int finest = levels.back();
    const auto kinds = graph_kinds(cfg.graph);
    for (int m : levels) ctx.kernel_matrix(m);

    std::vector<Scenario> scenarios;
    for (auto seed : cfg.seeds) scenarios.emplace_back(cfg, meas, seed, finest);

    const std::size_t cells = levels.size() * scenarios.size();
    std::vector<std::vector<Trajectory>> trajs(cells);
    parallel_for(cells, cfg.threads, [&](std::size_t idx) {
        const int m = levels[idx / scenarios.size()];
        const Scenario& sc = scenarios[idx % scenarios.size()];
        const ModelSpec model = sc.model(m);
        const PiecewiseConstantField init = sc.initial(m);
        for (GraphKind kind : kinds) {
            const CouplingGraph g = kind == GraphKind::deterministic
                                        ? assemble_deterministic(ctx.kernel_matrix(m), meas)
                                        : sample_bernoulli(ctx.kernel_matrix(m), meas, sc.seed(), cfg.symmetric);
            Trajectory t = integrate_ips(model, g, init, cfg.T, cfg.dt, {cfg.output_stride, 1});
            t.metadata.seed = sc.seed();
            trajs[idx].push_back(std::move(t));
        }
    });

    std::optional<CsvWriter> summary;
    if (kinds.size() == 2)
        summary.emplace(ctx.file("simulate_summary.csv"),
                        std::vector<std::string>{"level", "seed", "deterministic_vs_bernoulli"});
    for (std::size_t idx = 0; idx < cells; ++idx) {
        const int m = levels[idx / scenarios.size()];
        const auto seed = scenarios[idx % scenarios.size()].seed();
        for (const auto& t : trajs[idx])
            write_trajectory(ctx,
                             "trajectory_L" + std::to_string(m) + "_s" + std::to_string(seed) + "_" +
                                 graph_name(t.metadata.graph),
                             t);
        if (summary) summary->row(m, seed, traj_error(trajs[idx][0], trajs[idx][1], meas.weights()).max);
    }
    if (summary) summary->close();
}

void run_rate(Context& ctx) {
    const auto& cfg = ctx.cfg();
    const auto& meas = ctx.meas();
    std::vector<int> levels = cfg.levels;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::vector<int> runs = levels;
    runs.push_back(levels.back() + 1);
    for (int m : runs) ctx.kernel_matrix(m);
    const int finest = runs.back();

    std::vector<Scenario> scenarios;
    for (auto seed : cfg.seeds) scenarios.emplace_back(cfg, meas, seed, finest);

    // errors[seed][i] = ||u^{m_i} - u^{m_i + 1}||_{C(0,T;L^2)}
    std::vector<std::vector<double>> errors(scenarios.size(), std::vector<double>(levels.size()));
    parallel_for(scenarios.size(), cfg.threads, [&](std::size_t s) {
        const Scenario& sc = scenarios[s];
        std::map<int, Trajectory> trajs;
        for (int m : runs) {
            if (trajs.count(m)) continue;
            trajs.emplace(m, integrate_ips(sc.model(m), assemble_deterministic(ctx.kernel_matrix(m), meas),
                                           sc.initial(m), cfg.T, cfg.dt, {cfg.output_stride, 1}));
        }
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const int m = levels[i];
            if (!trajs.count(m + 1))
                trajs.emplace(m + 1, integrate_ips(sc.model(m + 1), assemble_deterministic(ctx.kernel_matrix(m + 1), meas),
                                                   sc.initial(m + 1), cfg.T, cfg.dt, {cfg.output_stride, 1}));
            errors[s][i] = traj_error(trajs.at(m), trajs.at(m + 1), meas.weights()).max;
        }
    });

    std::vector<double> med(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        std::vector<double> col;
        for (const auto& row : errors) col.push_back(row[i]);
        med[i] = median(std::move(col));
    }

    // Bound column: the projection-error bound for the initial phase field of the first seed.
    std::optional<RateBoundInputs> bound;
    nlohmann::json j;
    if (cfg.model.initial == "fourier" && meas.natural() && meas.ifs().has_common_linear_part() && levels.size() >= 3) {
        const RandomFourierField g(meas.ifs().dim(), cfg.seeds.front(), kInitialStream, 8, cfg.model.initial_amplitude,
                                   cfg.model.initial_frequency, cfg.model.initial_value);
        const ModulusReport mod =
            modulus_report(meas, ScalarFunction([&](std::span<const double> x) { return g(x); }), levels, 2.0,
                           cfg.extra_ell, cfg.modulus_sublevel);
        if (mod.fitted_alpha > 0.0) {
            bound = RateBoundInputs{meas.alphabet(), 2.0, mod.fitted_alpha, mod.lip_norm};
            j["initial_datum_lip_norm"] = mod.lip_norm;
            j["initial_datum_alpha"] = mod.fitted_alpha;
        }
    }
    const double lambda = meas.ifs().common_ratio();
    const RateReport rate = rate_fit(levels, med, lambda, bound);

    CsvWriter csv(ctx.file("rate.csv"), {"level", "error", "bound", "fitted_alpha"});
    for (std::size_t i = 0; i < levels.size(); ++i)
        csv.row(levels[i], rate.errors[i], rate.bounds.empty() ? std::nan("") : rate.bounds[i], rate.fitted_alpha);
    csv.close();
    CsvWriter per_seed(ctx.file("rate_seeds.csv"), {"level", "seed", "error"});
    for (std::size_t i = 0; i < levels.size(); ++i)
        for (std::size_t s = 0; s < scenarios.size(); ++s) per_seed.row(levels[i], scenarios[s].seed(), errors[s][i]);
    per_seed.close();

    j["lambda"] = lambda;
    j["fitted_alpha"] = rate.fitted_alpha;
    j["capped_alpha"] = rate.capped_alpha;
    j["below_bound"] = rate.below_bound;
    j["notes"] = rate.notes;
    ctx.write_json("rate.json", std::move(j));
}

void run_vlasov(Context& ctx) {
    const auto& cfg = ctx.cfg();
    const auto& meas = ctx.meas();
    const int finest = cfg.coarse_level + cfg.ell_levels.back();
    VlasovOptions opt;
    opt.m = cfg.coarse_level;
    opt.ells = cfg.ell_levels;
    opt.T = cfg.T;
    opt.dt = cfg.dt;
    opt.output_stride = cfg.output_stride;
    opt.kernel_sublevel = cfg.kernel_sublevel;
    opt.threads = cfg.threads;

    std::map<std::uint64_t, Scenario> scenarios;
    for (auto seed : cfg.seeds) scenarios.emplace(seed, Scenario(cfg, meas, seed, finest));
    const ModelFactory factory = [&](int level, std::uint64_t seed) { return scenarios.at(seed).model(level); };

    // Initial states: i.i.d. uniform phases per fine cell, or the coarse-cell value for deterministic data.
    std::map<std::uint64_t, PiecewiseConstantField> coarse_init;
    for (auto& [seed, sc] : scenarios) coarse_init.emplace(seed, sc.initial(cfg.coarse_level));
    const int s = state_dim_of(cfg.model.name);
    const InitialSampler sampler = [&](std::size_t coarse, CounterRng& rng, std::span<double> out) {
        if (cfg.model.initial == "uniform") {
            out[0] = rng.uniform();
            for (int c = 1; c < s; ++c) out[static_cast<std::size_t>(c)] = 0.0;
        } else {
            const auto& init = coarse_init.at(rng.seed());
            for (int c = 0; c < s; ++c) out[static_cast<std::size_t>(c)] = init(coarse, c);
        }
    };
    const std::vector<std::uint64_t>& seeds = cfg.seeds;
    const VlasovTable table = vlasov_self_convergence(meas, factory, kernel_function(cfg.model), sampler, opt, seeds);

    CsvWriter csv(ctx.file("vlasov.csv"), {"seed", "ell", "ell_next", "t", "distance"});
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t pair = 0; pair + 1 < opt.ells.size(); ++pair)
            for (std::size_t t = 0; t < table.times.size(); ++t)
                csv.row(seeds[i], opt.ells[pair], opt.ells[pair + 1], table.times[t], table.distances[i][pair][t]);
    csv.close();
    CsvWriter summary(ctx.file("vlasov_summary.csv"), {"ell", "ell_next", "median_max_distance"});
    for (std::size_t pair = 0; pair + 1 < opt.ells.size(); ++pair) {
        std::vector<double> maxima;
        for (const auto& row : table.max_over_time()) maxima.push_back(row[pair]);
        summary.row(opt.ells[pair], opt.ells[pair + 1], median(std::move(maxima)));
    }
    summary.close();
}

}  // namespace

RunSummary run(std::string_view command, const ExperimentConfig& config) {
    const auto diagnostics = validate(config, command);
    if (has_errors(diagnostics)) {
        std::string msg = "invalid configuration:";
        for (const auto& d : diagnostics)
            if (d.severity == Diagnostic::Severity::error) msg += "\n  " + to_string(d);
        throw InvalidArgument(msg);
    }
    Context ctx(std::string(command), config);
    if (command == "integrate")
        run_integrate(ctx);
    else if (command == "project")
        run_project(ctx);
    else if (command == "transfer")
        run_transfer(ctx);
    else if (command == "simulate")
        run_simulate(ctx);
    else if (command == "rate")
        run_rate(ctx);
    else if (command == "vlasov")
        run_vlasov(ctx);
    else if (command == "modulus")
        run_modulus(ctx);
    else
        throw InvalidArgument("subcommand '" + std::string(command) + "' does not produce artifacts");
    return ctx.finish();
}

}  // namespace ssips
