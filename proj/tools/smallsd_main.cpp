// smallsd: mean and standard deviation from median, range and quartiles.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "smallsd/cli.hpp"

namespace cli = smallsd::cli;

int main(int argc, char** argv) {
    CLI::App app{"Estimate study mean and SD from non-parametric summaries"};
    app.require_subcommand(1);

    std::string correction = "first";
    std::string scenario;
    int cutoff = smallsd::kDefaultCutoff;
    std::string format = "csv";
    std::string range = "2:50";
    std::string which;

    auto* estimate = app.add_subcommand("estimate", "Estimate mean and SD for each study in a CSV file");
    std::string input;
    estimate->add_option("input", input, "CSV with header study_id,n,min,q1,median,q3,max")->required();
    estimate->add_option("--correction", correction, "Divisor correction: none, first, second")
        ->capture_default_str();
    estimate->add_option("--scenario", scenario, "Force scenario c1, c2 or c3 (default: auto, C2 > C3 > C1)");
    estimate->add_option("--cutoff", cutoff,
                         "Largest n that uses the small-sample correction (experimental if not 50)")
        ->capture_default_str();
    estimate->add_option("--format", format, "Output format: csv, tsv, jsonl")->capture_default_str();

    auto* tables = app.add_subcommand("tables", "Tabulated divisors next to their closed-form approximations");
    tables->add_option("--which", which, "xi or eta")->required();
    tables->add_option("--range", range, "n range A:B")->capture_default_str();
    tables->add_option("--correction", correction, "none, first, second")->capture_default_str();
    tables->add_option("--cutoff", cutoff, "Largest n that uses the correction (experimental if not 50)")
        ->capture_default_str();

    auto* refit = app.add_subcommand("refit", "Refit the correction coefficients from the tables");
    std::string kind = "epsilon";
    std::string order = "first";
    std::string emit_series;
    refit->add_option("--kind", kind, "epsilon or delta")->capture_default_str();
    refit->add_option("--order", order, "first or second (epsilon only)")->capture_default_str();
    refit->add_option("--emit-series", emit_series, "Write the fitted data series as TSV to PATH");

    auto* oracle = app.add_subcommand("oracle", "Recompute the divisor tables numerically");
    cli::OracleOptions oracle_opts;
    std::string oracle_which = "both";
    std::string convention;
    std::string report_path;
    oracle->add_option("--which", oracle_which, "xi, eta or both")->capture_default_str();
    oracle->add_option("--range", range, "n range A:B (A >= 2)")->capture_default_str();
    oracle->add_option("--abs-tol", oracle_opts.quadrature.abs_tol, "Quadrature absolute tolerance")
        ->capture_default_str();
    oracle->add_option("--bound", oracle_opts.quadrature.integration_bound,
                       "Quadrature truncation half-width in z units (>= 8)")
        ->capture_default_str();
    oracle->add_option("--reps", oracle_opts.monte_carlo.replications, "Monte Carlo replications (>= 10000)")
        ->capture_default_str();
    oracle->add_option("--seed", oracle_opts.monte_carlo.seed, "Monte Carlo seed")->capture_default_str();
    oracle->add_option("--chunk", oracle_opts.monte_carlo.chunk_size, "Replications per RNG stream")
        ->capture_default_str();
    oracle->add_option("--threads", oracle_opts.monte_carlo.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    oracle->add_option("--convention", convention, "Quartile convention for the eta column: blom, h7, rounded");
    oracle->add_option("--report", report_path, "Write the deviation report to PATH instead of stderr");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*estimate) {
            cli::RunConfig config;
            config.correction = cli::parse_correction(correction);
            if (!scenario.empty()) config.scenario_override = cli::parse_scenario(scenario);
            config.cutoff = cutoff;
            config.format = cli::parse_format(format);
            std::ifstream in(input, std::ios::binary);
            if (!in) throw cli::FatalError(fmt::format("cannot read '{}'", input));
            cli::cmd_estimate(in, std::cout, std::cerr, config);
        } else if (*tables) {
            cli::RunConfig config;
            config.correction = cli::parse_correction(correction);
            config.cutoff = cutoff;
            cli::cmd_tables(std::cout, cli::parse_range(range), cli::parse_which(which), config);
        } else if (*refit) {
            cli::RefitOptions opts;
            if (kind == "epsilon") {
                opts.kind = cli::RefitKind::Epsilon;
            } else if (kind == "delta") {
                opts.kind = cli::RefitKind::Delta;
            } else {
                throw cli::FatalError(fmt::format("unknown kind '{}'", kind));
            }
            opts.order = cli::parse_correction(order);
            if (!emit_series.empty()) opts.emit_series = emit_series;
            cli::cmd_refit(std::cout, opts);
        } else if (*oracle) {
            oracle_opts.which = cli::parse_which(oracle_which);
            oracle_opts.range = cli::parse_range(range);
            if (!convention.empty()) {
                oracle_opts.convention = smallsd::parse_convention(convention);
                if (!oracle_opts.convention) {
                    throw cli::FatalError(fmt::format("unknown convention '{}'", convention));
                }
            }
            if (report_path.empty()) {
                cli::cmd_oracle(std::cout, std::cerr, oracle_opts);
            } else {
                std::ofstream report(report_path, std::ios::binary);
                if (!report) throw cli::FatalError(fmt::format("cannot open '{}'", report_path));
                cli::cmd_oracle(std::cout, report, oracle_opts);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "smallsd: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
