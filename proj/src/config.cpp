#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "ssips/experiment.hpp"

namespace ssips {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n\"");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokens(std::string_view s, std::string_view separators) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto next = s.find_first_of(separators, pos);
        const auto piece = trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (!piece.empty()) out.push_back(piece);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

double parse_double(const std::string& s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(x))
        throw InvalidArgument("'" + s + "' is not a finite number");
    return x;
}

template <class Int>
Int parse_integer(const std::string& s) {
    Int x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw InvalidArgument("'" + s + "' is not an integer in range");
    return x;
}

bool parse_bool(const std::string& s) {
    std::string v = s;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw InvalidArgument("'" + s + "' is not a boolean");
}

// "2 3 4", "2,3,4" or "2..5".
template <class Int>
std::vector<Int> parse_integer_list(const std::string& s) {
    std::vector<Int> out;
    for (const auto& tok : tokens(s, " \t,")) {
        const auto dots = tok.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_integer<Int>(tok));
            continue;
        }
        const Int lo = parse_integer<Int>(tok.substr(0, dots));
        const Int hi = parse_integer<Int>(tok.substr(dots + 2));
        if (hi < lo) throw InvalidArgument("empty range '" + tok + "'");
        if (hi - lo > 100000) throw InvalidArgument("range '" + tok + "' is too long");
        for (Int v = lo; v <= hi; ++v) out.push_back(v);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : tokens(s, " \t,")) out.push_back(parse_double(tok));
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"ifs.preset", [](ExperimentConfig& c, const std::string& v) { c.ifs.preset = v; }},
        {"ifs.dim", [](ExperimentConfig& c, const std::string& v) { c.ifs.dim = parse_integer<int>(v); }},
        {"ifs.maps",
         [](ExperimentConfig& c, const std::string& v) {
             c.ifs.maps.clear();
             for (const auto& m : tokens(v, ";|")) c.ifs.maps.push_back(parse_double_list(m));
         }},
        {"ifs.open_set_condition",
         [](ExperimentConfig& c, const std::string& v) { c.ifs.open_set_condition = parse_bool(v); }},
        {"measure.weights",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "natural")
                 c.weights.clear();
             else
                 c.weights = parse_double_list(v);
         }},
        {"model.name", [](ExperimentConfig& c, const std::string& v) { c.model.name = v; }},
        {"model.coupling", [](ExperimentConfig& c, const std::string& v) { c.model.coupling = parse_double(v); }},
        {"model.gamma", [](ExperimentConfig& c, const std::string& v) { c.model.gamma = parse_double(v); }},
        {"model.rule", [](ExperimentConfig& c, const std::string& v) { c.model.rule = v; }},
        {"model.radius", [](ExperimentConfig& c, const std::string& v) { c.model.radius = parse_double(v); }},
        {"model.kernel", [](ExperimentConfig& c, const std::string& v) { c.model.kernel = v; }},
        {"model.kernel_value",
         [](ExperimentConfig& c, const std::string& v) { c.model.kernel_value = parse_double(v); }},
        {"model.kernel_scale",
         [](ExperimentConfig& c, const std::string& v) { c.model.kernel_scale = parse_double(v); }},
        {"model.omega_amplitude",
         [](ExperimentConfig& c, const std::string& v) { c.model.omega_amplitude = parse_double(v); }},
        {"model.omega_frequency",
         [](ExperimentConfig& c, const std::string& v) { c.model.omega_frequency = parse_double(v); }},
        {"model.omega_terms",
         [](ExperimentConfig& c, const std::string& v) { c.model.omega_terms = parse_integer<int>(v); }},
        {"model.initial", [](ExperimentConfig& c, const std::string& v) { c.model.initial = v; }},
        {"model.initial_value",
         [](ExperimentConfig& c, const std::string& v) { c.model.initial_value = parse_double(v); }},
        {"model.initial_amplitude",
         [](ExperimentConfig& c, const std::string& v) { c.model.initial_amplitude = parse_double(v); }},
        {"model.initial_frequency",
         [](ExperimentConfig& c, const std::string& v) { c.model.initial_frequency = parse_double(v); }},
        {"experiment.levels",
         [](ExperimentConfig& c, const std::string& v) { c.levels = parse_integer_list<int>(v); }},
        {"experiment.coarse_level",
         [](ExperimentConfig& c, const std::string& v) { c.coarse_level = parse_integer<int>(v); }},
        {"experiment.ell_levels",
         [](ExperimentConfig& c, const std::string& v) { c.ell_levels = parse_integer_list<int>(v); }},
        {"experiment.T", [](ExperimentConfig& c, const std::string& v) { c.T = parse_double(v); }},
        {"experiment.dt", [](ExperimentConfig& c, const std::string& v) { c.dt = parse_double(v); }},
        {"experiment.output_stride",
         [](ExperimentConfig& c, const std::string& v) { c.output_stride = parse_integer<int>(v); }},
        {"experiment.seeds",
         [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_integer_list<std::uint64_t>(v); }},
        {"experiment.graph", [](ExperimentConfig& c, const std::string& v) { c.graph = v; }},
        {"experiment.symmetric", [](ExperimentConfig& c, const std::string& v) { c.symmetric = parse_bool(v); }},
        {"experiment.kernel_sublevel",
         [](ExperimentConfig& c, const std::string& v) { c.kernel_sublevel = parse_integer<int>(v); }},
        {"experiment.data_sublevel",
         [](ExperimentConfig& c, const std::string& v) { c.data_sublevel = parse_integer<int>(v); }},
        {"experiment.function", [](ExperimentConfig& c, const std::string& v) { c.function = v; }},
        {"experiment.output_dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }},
        {"experiment.threads",
         [](ExperimentConfig& c, const std::string& v) { c.threads = parse_integer<int>(v); }},
        {"quadrature.method",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "qmc")
                 c.quadrature.method = QuadratureMethod::qmc;
             else if (v == "mc")
                 c.quadrature.method = QuadratureMethod::mc;
             else
                 throw InvalidArgument("method must be qmc or mc");
         }},
        {"quadrature.level",
         [](ExperimentConfig& c, const std::string& v) { c.quadrature.level = parse_integer<int>(v); }},
        {"quadrature.samples",
         [](ExperimentConfig& c, const std::string& v) {
             c.quadrature.mc.samples = parse_integer<std::uint64_t>(v);
         }},
        {"quadrature.tail",
         [](ExperimentConfig& c, const std::string& v) { c.quadrature.mc.tail = parse_integer<int>(v); }},
        {"quadrature.batches",
         [](ExperimentConfig& c, const std::string& v) { c.quadrature.mc.batches = parse_integer<int>(v); }},
        {"quadrature.sublevel",
         [](ExperimentConfig& c, const std::string& v) { c.quadrature_sublevel = parse_integer<int>(v); }},
        {"analysis.p", [](ExperimentConfig& c, const std::string& v) { c.p = parse_double(v); }},
        {"analysis.extra_ell",
         [](ExperimentConfig& c, const std::string& v) { c.extra_ell = parse_integer<int>(v); }},
        {"analysis.modulus_sublevel",
         [](ExperimentConfig& c, const std::string& v) { c.modulus_sublevel = parse_integer<int>(v); }},
        {"analysis.projection_sublevel",
         [](ExperimentConfig& c, const std::string& v) { c.projection_sublevel = parse_integer<int>(v); }},
    };
    return table;
}

Diagnostic error(std::string key, std::string message) {
    return {Diagnostic::Severity::error, std::move(key), std::move(message)};
}

Diagnostic warning(std::string key, std::string message) {
    return {Diagnostic::Severity::warning, std::move(key), std::move(message)};
}

}  // namespace

std::string to_string(const Diagnostic& d) {
    std::string out = d.severity == Diagnostic::Severity::error ? "error" : "warning";
    if (!d.key.empty()) out += " [" + d.key + "]";
    return out + ": " + d.message;
}

ConfigParse parse_config(std::string_view text) {
    ConfigParse result;
    boost::property_tree::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        result.diagnostics.push_back(error("", "malformed INI at line " + std::to_string(e.line()) + ": " + e.message()));
        return result;
    }
    const auto& table = setters();
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            result.diagnostics.push_back(error(section, "key outside of any section"));
            continue;
        }
        for (const auto& [key, node] : body) {
            const std::string name = section + "." + key;
            const auto it = table.find(name);
            if (it == table.end()) {
                result.diagnostics.push_back(error(name, "unknown key"));
                continue;
            }
            try {
                it->second(result.config, trim(node.data()));
            } catch (const InvalidArgument& e) {
                result.diagnostics.push_back(error(name, e.what()));
            }
        }
    }
    return result;
}

ConfigParse load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"integrate", "project", "transfer", "simulate",
                                                   "rate",      "vlasov",  "modulus",  "validate"};
    return names;
}

Ifs build_ifs(const IfsConfig& config) {
    if (config.maps.empty()) return make_preset(config.preset);
    const int d = config.dim;
    if (d < 1) throw InvalidArgument("inline IFS needs ifs.dim >= 1");
    std::vector<Similitude> maps;
    for (const auto& m : config.maps) {
        if (m.size() != static_cast<std::size_t>(d * d + d))
            throw InvalidArgument("each inline map needs dim*dim + dim numbers");
        Eigen::MatrixXd A(d, d);
        Eigen::VectorXd t(d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) A(r, c) = m[static_cast<std::size_t>(r * d + c)];
        for (int r = 0; r < d; ++r) t[r] = m[static_cast<std::size_t>(d * d + r)];
        maps.emplace_back(A, t);
    }
    return Ifs(std::move(maps), "inline", config.open_set_condition);
}

SelfSimilarMeasure build_measure(const ExperimentConfig& config) {
    Ifs ifs = build_ifs(config.ifs);
    if (config.weights.empty()) return SelfSimilarMeasure(std::move(ifs));
    return SelfSimilarMeasure(std::move(ifs), ProbabilityVector(config.weights));
}

namespace {

const std::vector<std::string> kModels = {"kuramoto", "kuramoto_inertia", "consensus"};
const std::vector<std::string> kRules = {"linear", "bounded_confidence", "tanh"};
const std::vector<std::string> kKernels = {"exp_distance", "gaussian", "constant"};
const std::vector<std::string> kInitial = {"fourier", "uniform", "constant"};
const std::vector<std::string> kGraphs = {"deterministic", "bernoulli", "both"};

bool one_of(const std::string& v, const std::vector<std::string>& options) {
    return std::find(options.begin(), options.end(), v) != options.end();
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

bool known_function(const std::string& name, int dim) {
    if (name == "one" || name == "linear" || name == "barycenter") return true;
    if (name == "exp_abs_diff") return dim >= 2;
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '9') return name[1] - '0' <= dim;
    return false;
}

}  // namespace

std::vector<Diagnostic> validate(const ExperimentConfig& c, std::string_view command) {
    std::vector<Diagnostic> out;
    const std::string cmd(command);
    if (!one_of(cmd, subcommands())) out.push_back(error("", "unknown subcommand '" + cmd + "'"));

    std::optional<SelfSimilarMeasure> meas;
    try {
        build_ifs(c.ifs);
    } catch (const Error& e) {
        out.push_back(error(c.ifs.maps.empty() ? "ifs.preset" : "ifs.maps", e.what()));
    }
    if (out.empty() || out.back().key.rfind("ifs.", 0) != 0) {
        try {
            meas.emplace(build_measure(c));
        } catch (const Error& e) {
            out.push_back(error("measure.weights", e.what()));
        }
    }
    if (!c.ifs.open_set_condition)
        out.push_back(warning("ifs.open_set_condition",
                              "overlap assumption not asserted; cylinder overlaps may carry positive measure"));

    const Limits& limits = default_limits();
    const int k = meas ? meas->alphabet() : 2;
    const int dim = meas ? meas->ifs().dim() : 2;
    if (meas && meas->ifs().similarity_dimension() > dim + 1e-12)
        out.push_back(warning("ifs", "similarity dimension exceeds the ambient dimension (fat fractal); "
                                     "cylinders overlap on sets of positive measure"));

    auto check_level = [&](const std::string& key, int level) {
        if (level < 0) {
            out.push_back(error(key, "levels must be nonnegative"));
            return false;
        }
        try {
            level_size(k, level, limits.max_cells);
        } catch (const BudgetExceeded&) {
            out.push_back(error(key, "cap violation: " + std::to_string(k) + "^" + std::to_string(level) +
                                         " cells exceed the cap of " + std::to_string(limits.max_cells)));
            return false;
        }
        return true;
    };
    auto check_dense = [&](const std::string& key, int level) {
        if (!check_level(key, level)) return;
        if (std::pow(static_cast<double>(k), 2.0 * level) > static_cast<double>(limits.max_cells)) {
            out.push_back(error(key, "cap violation: the dense coupling matrix at level " + std::to_string(level) +
                                         " has more than " + std::to_string(limits.max_cells) + " entries"));
            return;
        }
        const double evals = std::pow(static_cast<double>(k), 2.0 * (level + c.kernel_sublevel));
        if (evals > static_cast<double>(limits.max_evaluations))
            out.push_back(error(key, "kernel projection at level " + std::to_string(level) +
                                         " needs more evaluations than the budget allows"));
    };

    for (int m : c.levels) check_level("experiment.levels", m);
    for (int ell : c.ell_levels) check_level("experiment.ell_levels", c.coarse_level + ell);
    if (c.levels.empty() && cmd != "integrate" && cmd != "vlasov")
        out.push_back(error("experiment.levels", "no levels given"));
    if (c.seeds.empty()) out.push_back(error("experiment.seeds", "seeds must be nonempty"));
    if (c.threads < 1) out.push_back(error("experiment.threads", "thread count must be positive"));
    if (!(c.p >= 1.0)) out.push_back(error("analysis.p", "exponent must be >= 1"));
    for (auto [key, v] : {std::pair<const char*, int>{"experiment.kernel_sublevel", c.kernel_sublevel},
                          {"experiment.data_sublevel", c.data_sublevel},
                          {"analysis.extra_ell", c.extra_ell},
                          {"analysis.modulus_sublevel", c.modulus_sublevel},
                          {"quadrature.sublevel", c.quadrature_sublevel}})
        if (v < 0) out.push_back(error(key, "must be nonnegative"));
    if (c.projection_sublevel < 2) out.push_back(error("analysis.projection_sublevel", "must be at least 2"));

    if (!known_function(c.function, dim))
        out.push_back(error("experiment.function", "unknown or unsupported test function '" + c.function +
                                                       "' (one, linear, x1..x" + std::to_string(dim) +
                                                       ", exp_abs_diff for dim >= 2, barycenter)"));
    if (c.function == "barycenter" && cmd != "integrate" && cmd != "validate")
        out.push_back(error("experiment.function", "barycenter is vector-valued; only integrate accepts it"));

    const bool dynamic = cmd == "simulate" || cmd == "rate" || cmd == "vlasov" || cmd == "transfer";
    if (dynamic || cmd == "validate") {
        if (!one_of(c.model.name, kModels))
            out.push_back(error("model.name", "unknown model (known: " + join(kModels) + ")"));
        if (c.model.name == "consensus" && !one_of(c.model.rule, kRules))
            out.push_back(error("model.rule", "unknown consensus rule (known: " + join(kRules) + ")"));
        if (!one_of(c.model.kernel, kKernels))
            out.push_back(error("model.kernel", "unknown kernel (known: " + join(kKernels) + ")"));
        if (!one_of(c.model.initial, kInitial))
            out.push_back(error("model.initial", "unknown initial datum (known: " + join(kInitial) + ")"));
        if (!one_of(c.graph, kGraphs))
            out.push_back(error("experiment.graph", "unknown graph kind (known: " + join(kGraphs) + ")"));
        if (c.model.omega_terms < 1) out.push_back(error("model.omega_terms", "must be positive"));
        if (!(c.model.kernel_scale > 0.0)) out.push_back(error("model.kernel_scale", "must be positive"));
        if (std::abs(c.model.coupling) > 1.0 && c.model.name != "consensus")
            out.push_back(warning("model.coupling", "|coupling| > 1 violates sup|D| <= 1 assumed by the theory"));
    }
    if (cmd == "simulate" || cmd == "rate" || cmd == "vlasov") {
        if (!(c.dt > 0.0)) out.push_back(error("experiment.dt", "time step must be positive"));
        if (!(c.T >= 0.0)) out.push_back(error("experiment.T", "horizon must be nonnegative"));
        if (c.dt > 0.0 && c.T >= 0.0) {
            const double steps = c.T / c.dt;
            if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
                out.push_back(error("experiment.T", "horizon must be an integer multiple of dt"));
        }
        if (c.output_stride < 1) out.push_back(error("experiment.output_stride", "must be positive"));
    }

    const bool bernoulli = cmd == "simulate" && (c.graph == "bernoulli" || c.graph == "both");
    if (bernoulli && meas && one_of(c.model.kernel, kKernels)) {
        double lo = 0.0, hi = 0.0;
        if (c.model.kernel == "constant") {
            lo = hi = c.model.kernel_value;
        } else {
            lo = 0.0;
            hi = 1.0;  // exp(-r) and exp(-r^2/s^2) take values in (0, 1]
        }
        if (lo < 0.0 || hi > 1.0)
            out.push_back(error("model.kernel", "Bernoulli sampling needs kernel values in [0,1]"));
    }

    const int max_level = c.levels.empty() ? 0 : *std::max_element(c.levels.begin(), c.levels.end());
    if (cmd == "integrate") {
        if (c.quadrature.method == QuadratureMethod::qmc)
            check_level("quadrature.level", c.quadrature.level);
        else if (c.quadrature.mc.samples == 0 || c.quadrature.mc.tail < 1 || c.quadrature.mc.batches < 2)
            out.push_back(error("quadrature", "MC needs samples > 0, tail >= 1 and batches >= 2"));
        else if (static_cast<double>(c.quadrature.mc.samples) * k > static_cast<double>(limits.max_evaluations))
            out.push_back(error("quadrature.samples", "MC sample count exceeds the evaluation budget"));
    }
    if (cmd == "project" || cmd == "modulus") {
        if (c.levels.size() < 3) out.push_back(error("experiment.levels", "at least 3 levels are needed for a fit"));
        for (int m : c.levels) check_level("experiment.levels", m);
        if (cmd == "project") check_level("experiment.levels", max_level + c.projection_sublevel);
        check_level("experiment.levels", max_level + c.extra_ell + 2 + c.modulus_sublevel);
        if (meas && !meas->ifs().has_common_linear_part())
            out.push_back(error("ifs", "modulus of continuity needs maps with a common linear part"));
        if (meas && !meas->natural() && cmd == "project")
            out.push_back(warning("measure.weights", "rate bound columns assume natural weights"));
    }
    if (cmd == "transfer") {
        for (int m : c.levels) check_dense("experiment.levels", m);
        check_level("experiment.levels", max_level + c.data_sublevel);
    }
    if (cmd == "simulate" || cmd == "rate") {
        const int top = cmd == "rate" ? max_level + 1 : max_level;
        for (int m : c.levels) check_dense("experiment.levels", m);
        if (cmd == "rate") check_dense("experiment.levels", top);
        check_level("experiment.levels", top + c.data_sublevel);
        if (cmd == "rate" && std::count_if(c.levels.begin(), c.levels.end(), [](int m) { return m >= 2; }) < 3)
            out.push_back(error("experiment.levels", "rate fits need at least 3 levels >= 2"));
    }
    if (cmd == "vlasov") {
        if (c.ell_levels.size() < 2) out.push_back(error("experiment.ell_levels", "need at least two ell levels"));
        if (!std::is_sorted(c.ell_levels.begin(), c.ell_levels.end()) ||
            std::adjacent_find(c.ell_levels.begin(), c.ell_levels.end()) != c.ell_levels.end())
            out.push_back(error("experiment.ell_levels", "ell levels must be strictly increasing"));
        for (int ell : c.ell_levels) check_dense("experiment.ell_levels", c.coarse_level + ell);
        if (c.coarse_level < 0) out.push_back(error("experiment.coarse_level", "must be nonnegative"));
    }
    return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::error; });
}

std::string canonical_config_json(const ExperimentConfig& c) {
    nlohmann::json j;
    if (c.ifs.maps.empty()) {
        j["ifs"]["preset"] = c.ifs.preset;
    } else {
        j["ifs"]["dim"] = c.ifs.dim;
        j["ifs"]["maps"] = c.ifs.maps;
    }
    j["ifs"]["open_set_condition"] = c.ifs.open_set_condition;
    j["measure"]["weights"] = c.weights.empty() ? nlohmann::json("natural") : nlohmann::json(c.weights);
    const auto& m = c.model;
    j["model"] = {{"name", m.name},
                  {"coupling", m.coupling},
                  {"gamma", m.gamma},
                  {"rule", m.rule},
                  {"radius", m.radius},
                  {"kernel", m.kernel},
                  {"kernel_value", m.kernel_value},
                  {"kernel_scale", m.kernel_scale},
                  {"omega_amplitude", m.omega_amplitude},
                  {"omega_frequency", m.omega_frequency},
                  {"omega_terms", m.omega_terms},
                  {"initial", m.initial},
                  {"initial_value", m.initial_value},
                  {"initial_amplitude", m.initial_amplitude},
                  {"initial_frequency", m.initial_frequency}};
    j["experiment"] = {{"levels", c.levels},
                       {"coarse_level", c.coarse_level},
                       {"ell_levels", c.ell_levels},
                       {"T", c.T},
                       {"dt", c.dt},
                       {"output_stride", c.output_stride},
                       {"seeds", c.seeds},
                       {"graph", c.graph},
                       {"symmetric", c.symmetric},
                       {"kernel_sublevel", c.kernel_sublevel},
                       {"data_sublevel", c.data_sublevel},
                       {"function", c.function}};
    j["quadrature"] = {{"method", c.quadrature.method == QuadratureMethod::qmc ? "qmc" : "mc"},
                       {"level", c.quadrature.level},
                       {"samples", c.quadrature.mc.samples},
                       {"tail", c.quadrature.mc.tail},
                       {"batches", c.quadrature.mc.batches},
                       {"sublevel", c.quadrature_sublevel}};
    j["analysis"] = {{"p", c.p},
                     {"extra_ell", c.extra_ell},
                     {"modulus_sublevel", c.modulus_sublevel},
                     {"projection_sublevel", c.projection_sublevel}};
    return j.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config_json(config))));
    return buf;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InvalidArgument*>(&e)) return 2;
    if (dynamic_cast<const BudgetExceeded*>(&e)) return 3;
    if (dynamic_cast<const NumericalAbort*>(&e)) return 4;
    if (dynamic_cast<const IoFailure*>(&e)) return 5;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 5;
    return 1;
}

}  // namespace ssips
