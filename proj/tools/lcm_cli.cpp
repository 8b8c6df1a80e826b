// Command-line surface for fitting latent class models with
// covariate-dependent class weights: fit, model selection over the number
// of classes, simulation, and misspecification experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lcm/data_io.hpp"
#include "lcm/design.hpp"
#include "lcm/misfit.hpp"
#include "lcm/model_core.hpp"
#include "lcm/optimizer.hpp"
#include "lcm/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

void write_result_file(const std::string& path, const lcm::ResultFile& file) {
    std::ofstream out(path);
    if (!out) throw lcm::structural_error("cannot write result file: " + path);
    file.write(out);
}

std::string fmt17(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

struct FitFlags {
    std::string data_path, spec_path, out_path, info_name = "hybrid";
    int classes = 0;
    lcm::OptimOptions opts;
};

int run_fit(const FitFlags& flags) {
    lcm::ModelSpec spec = lcm::load_spec(flags.spec_path);
    if (flags.classes > 0) spec.classes = flags.classes;
    spec.validate();
    const lcm::Dataset data = lcm::parse_dataset_file(flags.data_path, spec);
    if (data.empty()) throw lcm::structural_error("dataset has no rows");

    const lcm::FitResult fit = lcm::fit(spec, data, std::nullopt, flags.opts);
    const auto kind = flags.info_name == "observed" ? lcm::InfoMatrix::Kind::observed
                                                   : lcm::InfoMatrix::Kind::hybrid;
    const lcm::RunReport report = lcm::make_report(spec, data, fit, kind);
    lcm::print_report(std::cout, report);

    if (!flags.out_path.empty()) {
        lcm::ResultFile file = lcm::to_result_file(report);
        file.set("seed", static_cast<long>(flags.opts.seed));
        write_result_file(flags.out_path, file);
    }
    return report.converged ? kExitOk : kExitNotConverged;
}

struct SelectFlags {
    std::string data_path, spec_path, out_path, range = "2..4";
    lcm::OptimOptions opts;
};

int run_select(const SelectFlags& flags) {
    const auto sep = flags.range.find("..");
    int c_min = 0, c_max = 0;
    try {
        if (sep == std::string::npos) {
            c_min = c_max = std::stoi(flags.range);
        } else {
            c_min = std::stoi(flags.range.substr(0, sep));
            c_max = std::stoi(flags.range.substr(sep + 2));
        }
    } catch (const std::exception&) {
        throw lcm::structural_error("cannot parse --classes-range '" + flags.range + "'");
    }
    if (c_min < 1 || c_max < c_min)
        throw lcm::structural_error("invalid --classes-range '" + flags.range + "'");

    const lcm::ModelSpec spec = lcm::load_spec(flags.spec_path);
    const lcm::Dataset data = lcm::parse_dataset_file(flags.data_path, spec);
    if (data.empty()) throw lcm::structural_error("dataset has no rows");

    const auto rows = lcm::select_classes(spec, data, c_min, c_max, flags.opts);
    int best = -1;
    for (std::size_t a = 0; a < rows.size(); ++a)
        if (rows[a].ok && (best < 0 || rows[a].bic_value < rows[static_cast<std::size_t>(best)].bic_value))
            best = static_cast<int>(a);

    std::cout << "c  loglik  n_params  BIC\n";
    lcm::ResultFile file;
    file.set("command", std::string("select"));
    file.set("seed", static_cast<long>(flags.opts.seed));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        const auto& row = rows[a];
        const std::string tag = "c" + std::to_string(row.classes);
        if (!row.ok) {
            std::cout << row.classes << "  failed: " << row.error << "\n";
            file.set(tag + "_error", row.error);
            continue;
        }
        std::cout << row.classes << "  " << row.loglik_value << "  " << row.n_params << "  "
                  << row.bic_value << (static_cast<int>(a) == best ? "  <- best" : "") << "\n";
        file.set(tag + "_loglik", row.loglik_value);
        file.set(tag + "_n_params", static_cast<long>(row.n_params));
        file.set(tag + "_bic", row.bic_value);
    }
    if (best >= 0) file.set("best_classes", static_cast<long>(rows[static_cast<std::size_t>(best)].classes));
    if (!flags.out_path.empty()) write_result_file(flags.out_path, file);
    if (best < 0) throw lcm::structural_error("every class count failed to fit");
    return kExitOk;
}

struct SimulateFlags {
    std::string spec_path, params_path, out_path;
    int n = 0;
    std::uint64_t seed = 0;
};

int run_simulate(const SimulateFlags& flags) {
    const lcm::ModelSpec spec = lcm::load_spec(flags.spec_path);
    const lcm::Params params = lcm::load_params(flags.params_path, spec);
    const lcm::Dataset data =
        lcm::simulate(spec, params, lcm::CovariateIIDNormal{}, flags.n, flags.seed);

    std::ofstream out(flags.out_path);
    if (!out) throw lcm::structural_error("cannot write dataset file: " + flags.out_path);
    lcm::write_dataset(out, spec, data);

    std::cout << "simulated " << flags.n << " subjects (classes = " << spec.classes
              << ", patterns = " << spec.num_patterns() << ", seed = " << flags.seed << ") to "
              << flags.out_path << "\n";
    if (flags.n == 0) std::cerr << "warning: --n 0 produced an empty dataset\n";
    return kExitOk;
}

struct MisfitFlags {
    std::string scenario_path, out_path;
    lcm::OptimOptions opts;
};

int run_misfit(const MisfitFlags& flags) {
    const lcm::MisfitScenario scenario = lcm::load_scenario(flags.scenario_path);
    const lcm::MisfitResult result = lcm::fit_expected(scenario, flags.opts);

    const double gap = result.expected_loglik_true - result.expected_loglik_candidate;
    std::cout << "expected loglik (true model on itself): "
              << fmt17(result.expected_loglik_true) << "\n"
              << "expected loglik (candidate, pseudo-true): "
              << fmt17(result.expected_loglik_candidate) << "\n"
              << "gap: " << fmt17(gap) << "\n"
              << "iterations: " << result.n_iter
              << (result.converged ? "" : " (NOT converged)") << "\n";

    lcm::ResultFile file;
    file.set("command", std::string("misfit"));
    file.set("seed", static_cast<long>(flags.opts.seed));
    file.set("converged", result.converged);
    file.set("n_iter", static_cast<long>(result.n_iter));
    file.set("expected_loglik_true", result.expected_loglik_true);
    file.set("expected_loglik_candidate", result.expected_loglik_candidate);
    file.set("gap", gap);
    file.set("pseudo_beta", result.pseudo_true.beta);
    for (std::size_t j = 0; j < result.pseudo_true.theta.size(); ++j)
        file.set("pseudo_theta_" + std::to_string(j), result.pseudo_true.theta[j]);
    if (result.bias) {
        file.set("bias", *result.bias);
        std::cout << "max |bias| over shared parameters: "
                  << result.bias->lpNorm<Eigen::Infinity>() << "\n";
    }
    if (!flags.out_path.empty()) write_result_file(flags.out_path, file);
    return kExitOk;
}

void add_optim_flags(CLI::App* cmd, lcm::OptimOptions& opts) {
    cmd->add_option("--seed", opts.seed, "RNG seed (64-bit unsigned)");
    cmd->add_option("--restarts", opts.restarts, "number of perturbation restarts")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--tol", opts.tol_loglik, "log-likelihood convergence tolerance");
    cmd->add_option("--tol-score", opts.tol_score, "score max-norm convergence tolerance");
    cmd->add_option("--max-iter", opts.max_iter, "iteration cap per run")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent class models with covariate-dependent class weights"};
    app.require_subcommand(1);

    FitFlags fit_flags;
    auto* fit_cmd = app.add_subcommand("fit", "maximum likelihood fit");
    fit_cmd->add_option("--data", fit_flags.data_path, "dataset CSV")->required();
    fit_cmd->add_option("--spec", fit_flags.spec_path, "model spec JSON")->required();
    fit_cmd->add_option("--classes", fit_flags.classes, "override the spec's class count");
    fit_cmd->add_option("--info", fit_flags.info_name, "information matrix for standard errors")
        ->check(CLI::IsMember({"hybrid", "observed"}));
    fit_cmd->add_option("--out", fit_flags.out_path, "machine-readable result file");
    add_optim_flags(fit_cmd, fit_flags.opts);

    SelectFlags select_flags;
    auto* select_cmd = app.add_subcommand("select", "BIC sweep over class counts");
    select_cmd->add_option("--data", select_flags.data_path, "dataset CSV")->required();
    select_cmd->add_option("--spec", select_flags.spec_path, "model spec JSON")->required();
    select_cmd->add_option("--classes-range", select_flags.range, "range a..b of class counts");
    select_cmd->add_option("--out", select_flags.out_path, "machine-readable result file");
    add_optim_flags(select_cmd, select_flags.opts);

    SimulateFlags sim_flags;
    auto* sim_cmd = app.add_subcommand("simulate", "draw a synthetic dataset");
    sim_cmd->add_option("--spec", sim_flags.spec_path, "model spec JSON")->required();
    sim_cmd->add_option("--params", sim_flags.params_path, "generating parameters JSON")->required();
    sim_cmd->add_option("--n", sim_flags.n, "number of subjects")->required()
        ->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--seed", sim_flags.seed, "RNG seed (64-bit unsigned)");
    sim_cmd->add_option("--out", sim_flags.out_path, "output dataset CSV")->required();

    MisfitFlags misfit_flags;
    auto* misfit_cmd = app.add_subcommand("misfit", "expected-loglik misspecification analysis");
    misfit_cmd->add_option("--scenario", misfit_flags.scenario_path, "scenario JSON")->required();
    misfit_cmd->add_option("--out", misfit_flags.out_path, "machine-readable result file");
    add_optim_flags(misfit_cmd, misfit_flags.opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) return app.exit(err);  // --help
        app.exit(err);
        return kExitInputError;
    }

    try {
        if (fit_cmd->parsed()) return run_fit(fit_flags);
        if (select_cmd->parsed()) return run_select(select_flags);
        if (sim_cmd->parsed()) return run_simulate(sim_flags);
        if (misfit_cmd->parsed()) return run_misfit(misfit_flags);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
