// Acceptance benchmarks. Prints one "AC<n> PASS|FAIL <detail>" line per
// criterion and exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ssips/analysis.hpp"
#include "ssips/csv.hpp"
#include "ssips/experiment.hpp"
#include "ssips/quadrature.hpp"
#include "ssips/transfer.hpp"

using namespace ssips;
namespace fs = std::filesystem;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ssips_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig shipped(const std::string& file, const fs::path& out) {
    auto parsed = load_config(fs::path(SSIPS_CONFIG_DIR) / file);
    if (has_errors(parsed.diagnostics)) throw InvalidArgument("bad shipped config " + file);
    parsed.config.output_dir = out;
    return parsed.config;
}

using Table = std::vector<std::map<std::string, std::string>>;

Table read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    auto split = [](std::string s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
        std::vector<std::string> out;
        std::stringstream ss(s);
        for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
        return out;
    };
    std::getline(in, line);
    const auto header = split(line);
    Table rows;
    while (std::getline(in, line)) {
        const auto cells = split(line);
        auto& row = rows.emplace_back();
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    }
    return rows;
}

double num(const std::map<std::string, std::string>& row, const std::string& key) {
    return std::strtod(row.at(key).c_str(), nullptr);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

std::string list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%.4g", v[i]);
    return s + "]";
}

VectorFunction identity_map() {
    return [](std::span<const double> x) { return VectorXd(Eigen::Map<const VectorXd>(x.data(), Eigen::Index(x.size()))); };
}

Outcome ac1() {
    const auto exact = ExactProbabilityVector::uniform(3);
    const SelfSimilarMeasure sg(make_preset("sg"));
    bool rational_ok = true;
    double worst = 0.0;
    for (int m = 0; m <= 8; ++m) {
        const Rational expected(1, static_cast<long long>(std::pow(3, m)));
        const double expected_d = std::pow(3.0, -m);
        for (const auto& w : enumerate_level(3, m)) {
            rational_ok = rational_ok && cylinder_measure(exact, w) == expected;
            worst = std::max(worst, std::abs(cylinder_measure(sg.weights(), w) - expected_d));
        }
    }
    double residual = 0.0;
    for (int m = 1; m <= 6; ++m) residual = std::max(residual, stationarity_residual(sg, m));
    return {rational_ok && worst <= 1e-15 && residual <= 1e-15,
            std::string("rational exact=") + (rational_ok ? "yes" : "no") + " float err=" + fmt("%.2e", worst) +
                " stationarity=" + fmt("%.2e", residual)};
}

Outcome ac2() {
    const Ifs sg = make_preset("sg");
    std::mt19937 gen(2024);
    std::uniform_int_distribution<int> digit(1, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<int> symbols(40);
        for (auto& s : symbols) s = digit(gen);
        const Word w(3, symbols);
        const int i = digit(gen);
        const VectorXd lhs = natural_projection(sg, Word(3, {i}).concat(w)).point;
        const VectorXd rhs = sg.map(i).map()(natural_projection(sg, w).point);
        worst = std::max(worst, (lhs - rhs).norm());
    }
    return {worst <= 1e-9, "max defect=" + fmt("%.2e", worst)};
}

Outcome ac3() {
    const SelfSimilarMeasure sg(make_preset("sg"));
    const double mass = integrate_qmc(sg, [](auto) { return 1.0; }, 10);
    const VectorXd bary = integrate_qmc(sg, identity_map(), 10);
    const double bary_err = std::hypot(bary(0) - 0.5, bary(1) - std::sqrt(3.0) / 6);
    int within = 0;
    double worst_z = 0.0;
    std::uint64_t worst_seed = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        McOptions opt;
        opt.samples = 100000;
        opt.seed = seed;
        const auto mc = integrate_mc(sg, identity_map(), opt);
        const double z = ((mc.value - bary).cwiseAbs().array() / mc.standard_error.array()).maxCoeff();
        if (z > worst_z) {
            worst_z = z;
            worst_seed = seed;
        }
        if (z <= 3.0) ++within;
    }
    return {mass == 1.0 && bary_err <= 1e-6 && within == 20,
            "mass=" + format_number(mass) + " barycentre err=" + fmt("%.2e", bary_err) +
                " mc seeds within 3se=" + std::to_string(within) + "/20 max z=" + fmt("%.2f", worst_z) +
                " (seed " + std::to_string(worst_seed) + ")"};
}

Outcome ac4() {
    const auto p = ExactProbabilityVector::uniform(3);
    std::mt19937 gen(99);
    std::normal_distribution<double> n;
    int isometric = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int level = 1 + trial % 6;
        std::vector<double> v(static_cast<std::size_t>(std::pow(3, level)));
        for (auto& x : v) x = n(gen);
        const PiecewiseConstantField f(3, level, 1, std::move(v));
        if (l1_norm(f, p) == transfer_to_interval(f, p).l1_norm()) ++isometric;
    }
    int exact_cells = 0, cells = 0;
    for (int m = 1; m <= 5; ++m) {
        const long long size = static_cast<long long>(std::pow(3, m));
        for (const auto& w : enumerate_level(3, m)) {
            const auto step = transfer_to_interval(PiecewiseConstantField::indicator(w), p);
            const Rational left(static_cast<long long>(w.index()), size);
            const Rational right(static_cast<long long>(w.index()) + 1, size);
            bool ok = true;
            for (std::size_t i = 0; i < step.cells(); ++i) {
                const bool inside = step.breakpoints[i] >= left && step.breakpoints[i + 1] <= right;
                ok = ok && step.values[i] == (inside ? 1 : 0);
            }
            exact_cells += ok ? 1 : 0;
            ++cells;
        }
    }
    return {isometric == 100 && exact_cells == cells,
            "isometric fields=" + std::to_string(isometric) + "/100 exact indicators=" + std::to_string(exact_cells) +
                "/" + std::to_string(cells)};
}

Outcome ac5() {
    const auto cfg = shipped("sg_project.ini", scratch("project"));
    run("project", cfg);
    std::vector<double> errors;
    bool below = true;
    double alpha = 0.0;
    for (const auto& row : read_csv(cfg.output_dir / "project.csv")) {
        errors.push_back(num(row, "error"));
        below = below && num(row, "error") <= num(row, "bound");
        alpha = num(row, "fitted_alpha");
    }
    const bool ok = errors.size() == 7 && strictly_decreasing(errors) && alpha >= 0.8 && alpha <= 1.15 && below;
    return {ok, "errors=" + list(errors) + " alpha=" + fmt("%.4f", alpha) + " below bound=" + (below ? "yes" : "no")};
}

Outcome ac6() {
    const auto cfg = shipped("sg_kuramoto_rate.ini", scratch("rate"));
    run("rate", cfg);
    std::vector<double> errors;
    for (const auto& row : read_csv(cfg.output_dir / "rate.csv")) errors.push_back(num(row, "error"));
    std::vector<double> ratios;
    for (std::size_t i = 1; i < errors.size(); ++i) ratios.push_back(errors[i] / errors[i - 1]);
    const double med = ratios.empty() ? NAN : median(ratios);
    return {errors.size() == 4 && strictly_decreasing(errors) && med <= 0.75,
            "e_m=" + list(errors) + " median ratio=" + fmt("%.4f", med)};
}

Outcome ac7() {
    const auto cfg = shipped("sg_bernoulli.ini", scratch("bernoulli"));
    run("simulate", cfg);
    std::map<int, std::vector<double>> by_level;
    for (const auto& row : read_csv(cfg.output_dir / "simulate_summary.csv"))
        by_level[static_cast<int>(num(row, "level"))].push_back(num(row, "deterministic_vs_bernoulli"));
    std::vector<double> medians;
    bool full = by_level.size() == 4;
    for (auto& [m, v] : by_level) {
        full = full && v.size() == 20;
        medians.push_back(median(v));
    }
    bool nonincreasing = true;
    for (std::size_t i = 1; i < medians.size(); ++i) nonincreasing = nonincreasing && medians[i] <= medians[i - 1];
    return {full && nonincreasing, "medians m=2..5 " + list(medians)};
}

Outcome ac8() {
    const auto cfg = shipped("sg_vlasov.ini", scratch("vlasov"));
    run("vlasov", cfg);
    std::vector<double> medians;
    for (const auto& row : read_csv(cfg.output_dir / "vlasov_summary.csv"))
        medians.push_back(num(row, "median_max_distance"));
    return {medians.size() == 2 && strictly_decreasing(medians), "median max W1 (2,3),(3,4)=" + list(medians)};
}

Outcome ac9() {
    const SelfSimilarMeasure sg(make_preset("sg"));
    const int m = 4;
    const auto model = kuramoto(1.0, PiecewiseConstantField::constant(3, m, 0.3));
    const auto graph = assemble_deterministic(KernelMatrix::constant(3, m, 1.0), sg);
    const auto traj = integrate_ips(model, graph, PiecewiseConstantField::constant(3, m, 0.7), 10.0, 1e-3, {100, 1});
    double spread = 0.0;
    for (const auto& state : traj.states) {
        const auto [lo, hi] = std::minmax_element(state.values().begin(), state.values().end());
        spread = std::max(spread, *hi - *lo);
    }
    return {spread <= 1e-12, "max spread over T=10: " + fmt("%.2e", spread)};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SSIPS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac10() {
    const fs::path configs(SSIPS_CONFIG_DIR);
    int identical = 0, compared = 0;
    bool launched = true;
    for (const std::string cmd : {"simulate", "rate", "vlasov"}) {
        const std::string file = cmd == "simulate" ? "sg_simulate.ini"
                                 : cmd == "rate"   ? "sg_kuramoto_rate.ini"
                                                   : "sg_vlasov.ini";
        const fs::path a = scratch("rerun_" + cmd + "_a"), b = scratch("rerun_" + cmd + "_b");
        const std::string base = cmd + " --config " + (configs / file).string();
        launched = launched && run_cli(base + " --output " + a.string()) == 0;
        launched = launched && run_cli(base + " --output " + b.string() + " --threads 3") == 0;
        for (const auto& entry : fs::directory_iterator(a)) {
            const auto name = entry.path().filename();
            if (name == "manifest.json") continue;
            ++compared;
            if (fs::exists(b / name) && slurp(entry.path()) == slurp(b / name)) ++identical;
        }
    }
    return {launched && compared > 0 && identical == compared,
            "byte-identical data files=" + std::to_string(identical) + "/" + std::to_string(compared)};
}

}  // namespace

int main() {
    const std::vector<std::pair<double, std::function<Outcome()>>> criteria{
        {1, ac1}, {1, ac2}, {10, ac3}, {1, ac4}, {60, ac5}, {300, ac6}, {600, ac7}, {600, ac8}, {5, ac9}, {0, ac10}};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto [budget, check] = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = check();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = budget == 0 || secs < budget;
        if (!in_time) out.detail += " (over runtime budget)";
        const bool pass = out.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("AC%zu %s %s [%.2fs]\n", i + 1, pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
