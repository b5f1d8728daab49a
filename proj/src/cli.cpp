#include "smallsd/cli.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "smallsd/divisor_tables.hpp"
#include "smallsd/errors.hpp"
#include "smallsd/refit.hpp"

namespace smallsd::cli {

namespace {

constexpr std::array<std::string_view, 7> kInputColumns = {"study_id", "n",  "min", "q1",
                                                           "median",   "q3", "max"};
enum Column { kStudyId, kN, kMin, kQ1, kMedian, kQ3, kMax };

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                current += ch;
            }
        } else if (ch == '"' && current.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += ch;
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quoted field");
    fields.push_back(std::move(current));
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_optional_real(std::string_view cell, std::string_view column) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        throw std::invalid_argument(fmt::format("{}: '{}' is not a dot-decimal number", column, cell));
    }
    return value;
}

int parse_sample_size(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) throw std::invalid_argument("n: missing sample size");
    int value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw std::invalid_argument(fmt::format("n: '{}' is not an integer", cell));
    }
    return value;
}

std::string csv_quote(std::string_view s, char sep) {
    if (s.find_first_of(std::string{sep, '"', '\n'}) == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string number(double v) { return fmt::format("{:.10g}", v); }
std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string{}; }

std::array<int, kInputColumns.size()> map_header(const std::vector<std::string>& header) {
    std::array<int, kInputColumns.size()> index{};
    index.fill(-1);
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto name = trim(header[i]);
        const auto it = std::find(kInputColumns.begin(), kInputColumns.end(), name);
        if (it == kInputColumns.end()) {
            throw FatalError(fmt::format(
                "unexpected column '{}' in header; expected exactly study_id,n,min,q1,median,q3,max "
                "(estimate output is not valid input)",
                name));
        }
        auto& slot = index[static_cast<std::size_t>(it - kInputColumns.begin())];
        if (slot != -1) throw FatalError(fmt::format("duplicate column '{}' in header", name));
        slot = static_cast<int>(i);
    }
    for (std::size_t c = 0; c < kInputColumns.size(); ++c) {
        if (index[c] == -1) throw FatalError(fmt::format("header is missing column '{}'", kInputColumns[c]));
    }
    return index;
}

void write_estimate_header(std::ostream& out, OutputFormat format) {
    if (format == OutputFormat::JsonLines) return;
    const char sep = format == OutputFormat::Csv ? ',' : '\t';
    fmt::print(out, "study_id{0}n{0}scenario{0}mean{0}sd{0}xi_divisor{0}eta_divisor{0}correction{0}degenerate\n",
               sep);
}

void write_estimate_row(std::ostream& out, OutputFormat format, const std::string& id, int n,
                        const MomentEstimate& est) {
    if (format == OutputFormat::JsonLines) {
        nlohmann::ordered_json row;
        row["study_id"] = id;
        row["n"] = n;
        row["scenario"] = to_string(est.scenario);
        row["mean"] = *est.mean;
        row["sd"] = *est.sd;
        row["xi_divisor"] = est.xi_divisor ? nlohmann::ordered_json(*est.xi_divisor) : nlohmann::ordered_json(nullptr);
        row["eta_divisor"] = est.eta_divisor ? nlohmann::ordered_json(*est.eta_divisor) : nlohmann::ordered_json(nullptr);
        row["correction"] = to_string(est.correction);
        row["degenerate"] = est.degenerate;
        out << row.dump() << '\n';
        return;
    }
    const char sep = format == OutputFormat::Csv ? ',' : '\t';
    fmt::print(out, "{1}{0}{2}{0}{3}{0}{4}{0}{5}{0}{6}{0}{7}{0}{8}{0}{9}\n", sep, csv_quote(id, sep), n,
               to_string(est.scenario), number(*est.mean), number(*est.sd), number(est.xi_divisor),
               number(est.eta_divisor), to_string(est.correction), est.degenerate ? "true" : "false");
}

std::optional<double> fixture_value(DivisorKind kind, int n) {
    if (n < DivisorTable::kMinN || n > DivisorTable::kMaxN) return std::nullopt;
    return kind == DivisorKind::Xi ? xi_table(n) : eta_table(n);
}

void write_series(const std::string& path, const RefitOptions& options, const ResidualSeries& series,
                  const RegressionFit& fit) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw FatalError(fmt::format("cannot open '{}' for writing", path));

    if (options.kind == RefitKind::Delta) {
        const auto diffs = central_difference(series);
        fmt::print(file, "n\tlog_n\tdelta\tfitted\tresidual\tcentral_diff\tb_over_central_diff\n");
        const double slope = fit["b"].estimate;
        for (std::size_t i = 0; i < series.points.size(); ++i) {
            const auto& p = series.points[i];
            std::string diff_cell;
            std::string ratio_cell;
            for (const auto& d : diffs) {
                if (d.n != p.n) continue;
                diff_cell = number(d.value);
                if (d.value != 0.0) ratio_cell = number(slope / d.value);
            }
            fmt::print(file, "{}\t{}\t{}\t{}\t{}\t{}\t{}\n", p.n, number(std::log(double(p.n))),
                       number(p.value), number(fit.fitted[i]), number(fit.residuals[i]), diff_cell,
                       ratio_cell);
        }
        return;
    }
    const int first_n = options.order == CorrectionOrder::Second ? 3 : 2;
    fmt::print(file, "n\tepsilon\ty\tfitted\tresidual\tepsilon_hat\n");
    std::size_t row = 0;
    for (const auto& p : series.points) {
        if (p.n < first_n) continue;
        const double eps_hat = options.order == CorrectionOrder::Second ? predict_epsilon_quadratic(fit, p.n)
                                                                        : predict_epsilon_linear(fit, p.n);
        fmt::print(file, "{}\t{}\t{}\t{}\t{}\t{}\n", p.n, number(p.value), number(p.n / std::log(p.value)),
                   number(fit.fitted[row]), number(fit.residuals[row]), number(eps_hat));
        ++row;
    }
}

}  // namespace

NRange parse_range(std::string_view text) {
    const auto colon = text.find(':');
    const auto parse_int = [text](std::string_view s) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
            throw FatalError(fmt::format("invalid range '{}': expected A:B", text));
        }
        return v;
    };
    NRange range;
    if (colon == std::string_view::npos) {
        range.first = range.last = parse_int(text);
    } else {
        range.first = parse_int(text.substr(0, colon));
        range.last = parse_int(text.substr(colon + 1));
    }
    if (range.first < 1 || range.first > range.last) {
        throw FatalError(fmt::format("invalid range '{}': need 1 <= A <= B", text));
    }
    return range;
}

CorrectionOrder parse_correction(std::string_view text) {
    if (text == "none") return CorrectionOrder::None;
    if (text == "first") return CorrectionOrder::First;
    if (text == "second") return CorrectionOrder::Second;
    throw FatalError(fmt::format("unknown correction '{}'", text));
}

Scenario parse_scenario(std::string_view text) {
    if (text == "c1" || text == "C1") return Scenario::C1;
    if (text == "c2" || text == "C2") return Scenario::C2;
    if (text == "c3" || text == "C3") return Scenario::C3;
    throw FatalError(fmt::format("unknown scenario '{}'", text));
}

OutputFormat parse_format(std::string_view text) {
    if (text == "csv") return OutputFormat::Csv;
    if (text == "tsv") return OutputFormat::Tsv;
    if (text == "jsonl") return OutputFormat::JsonLines;
    throw FatalError(fmt::format("unknown format '{}'", text));
}

Which parse_which(std::string_view text) {
    if (text == "xi") return Which::Xi;
    if (text == "eta") return Which::Eta;
    if (text == "both") return Which::Both;
    throw FatalError(fmt::format("unknown table '{}'", text));
}

EstimateCounts cmd_estimate(std::istream& in, std::ostream& out, std::ostream& errors,
                            const RunConfig& config) {
    if (config.cutoff < 2) throw FatalError("cutoff must be >= 2");
    std::string line;
    if (!std::getline(in, line)) throw FatalError("input is empty; expected a header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    std::array<int, kInputColumns.size()> col{};
    try {
        col = map_header(split_csv_line(trim(line)));
    } catch (const std::invalid_argument& e) {
        throw FatalError(fmt::format("malformed header: {}", e.what()));
    }

    EstimateOptions options;
    options.correction = config.correction;
    options.scenario = config.scenario_override;
    options.cutoff = config.cutoff;

    write_estimate_header(out, config.format);
    EstimateCounts counts;
    std::set<std::string> seen;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string id;
        try {
            const auto fields = split_csv_line(trim(line));
            if (fields.size() != kInputColumns.size()) {
                throw std::invalid_argument(
                    fmt::format("expected {} fields, got {}", kInputColumns.size(), fields.size()));
            }
            const auto cell = [&](Column c) -> std::string_view {
                return fields[static_cast<std::size_t>(col[c])];
            };
            id = std::string(trim(cell(kStudyId)));
            if (id.empty()) throw std::invalid_argument("study_id is empty");
            if (!seen.insert(id).second) throw std::invalid_argument("duplicate study_id");

            StudySummary summary;
            summary.n = parse_sample_size(cell(kN));
            summary.min = parse_optional_real(cell(kMin), "min");
            summary.q1 = parse_optional_real(cell(kQ1), "q1");
            summary.median = parse_optional_real(cell(kMedian), "median");
            summary.q3 = parse_optional_real(cell(kQ3), "q3");
            summary.max = parse_optional_real(cell(kMax), "max");

            const MomentEstimate est = estimate_moments(summary, options);
            write_estimate_row(out, config.format, id, summary.n, est);
            ++counts.estimated;
        } catch (const std::exception& e) {
            fmt::print(errors, "line {}{}: {}\n", line_no,
                       id.empty() ? std::string{} : fmt::format(" (study '{}')", id), e.what());
            ++counts.rejected;
        }
    }
    return counts;
}

void cmd_tables(std::ostream& out, NRange range, Which which, const RunConfig& config) {
    if (which == Which::Both) throw FatalError("tables: --which must be xi or eta");
    if (config.cutoff < 2) throw FatalError("cutoff must be >= 2");
    const bool xi = which == Which::Xi;
    fmt::print(out, "n\ttable\tblom\tcorrected\tresidual\n");
    for (int n = range.first; n <= range.last; ++n) {
        const auto table = fixture_value(xi ? DivisorKind::Xi : DivisorKind::Eta, n);
        const double blom = xi ? blom_xi(n) : blom_eta(n);
        std::optional<double> corrected;
        if (n >= 2) {
            if (xi) {
                corrected = config.correction == CorrectionOrder::None ? blom : xi_hat(n, config.cutoff);
            } else if (config.correction != CorrectionOrder::Second || n >= 3) {
                corrected = eta_hat(n, config.correction, config.cutoff);
            }
        }
        std::optional<double> residual;
        if (table && corrected) residual = *table - *corrected;
        fmt::print(out, "{}\t{}\t{}\t{}\t{}\n", n, table ? fmt::format("{:.3f}", *table) : "",
                   number(blom), number(corrected), number(residual));
    }
}

void cmd_refit(std::ostream& out, const RefitOptions& options) {
    if (options.kind == RefitKind::Delta && options.order == CorrectionOrder::Second) {
        throw FatalError("refit: the delta correction has no second-order form");
    }
    if (options.order == CorrectionOrder::None) throw FatalError("refit: order must be first or second");

    const auto kind = options.kind == RefitKind::Delta ? ResidualKind::Delta : ResidualKind::Epsilon;
    const ResidualSeries series = residual_series(kind);
    RegressionFit fit;
    std::string title;
    if (options.kind == RefitKind::Delta) {
        fit = fit_delta(series);
        title = "delta(n) = a + b * log(n), n = 2..50";
    } else if (options.order == CorrectionOrder::Second) {
        fit = fit_epsilon_quadratic(series);
        title = "n / log(epsilon(n)) = a + b * (n - 26) + c * (n - 26)^2, n = 3..50";
    } else {
        fit = fit_epsilon_linear(series);
        title = "n / log(epsilon(n)) = a + b * n, n = 2..50";
    }
    write_fit_report(out, fit, title);
    if (options.emit_series) write_series(*options.emit_series, options, series, fit);
}

void cmd_oracle(std::ostream& out, std::ostream& report, const OracleOptions& options) {
    if (options.range.first < 2) throw FatalError("oracle: range must start at n >= 2");
    validate(options.quadrature);
    validate(options.monte_carlo);

    RegenerationReport regen;
    const bool want_xi = options.which != Which::Eta;
    const bool want_eta = options.which != Which::Xi;
    if (want_xi) regen.xi = regenerate_xi(options.range.first, options.range.last, options.quadrature);
    if (want_eta) {
        regen.eta = regenerate_eta(options.range.first, options.range.last, options.monte_carlo,
                                   options.quadrature);
        summarize_eta(regen);
    }
    const QuantileConvention chosen = options.convention.value_or(
        regen.best_convention.value_or(QuantileConvention::BlomInterpolation));
    const auto chosen_idx = static_cast<std::size_t>(
        std::find(kAllConventions.begin(), kAllConventions.end(), chosen) - kAllConventions.begin());

    for (int n = options.range.first; n <= options.range.last; ++n) {
        const auto i = static_cast<std::size_t>(n - options.range.first);
        fmt::print(out, "{}\t{}\t{}\n", n, want_xi ? fmt::format("{:.7f}", regen.xi[i].value) : "",
                   want_eta ? fmt::format("{:.7f}", regen.eta[i].by_convention[chosen_idx].estimate) : "");
    }

    if (want_xi) {
        fmt::print(report, "# xi: expected range by adaptive quadrature\n");
        fmt::print(report, "n\tfixture\tregenerated\tabs_dev\n");
        double max_dev = 0.0;
        for (const auto& row : regen.xi) {
            std::string dev;
            if (row.fixture) {
                const double d = std::abs(row.value - *row.fixture);
                max_dev = std::max(max_dev, d);
                dev = fmt::format("{:.7f}", d);
            }
            fmt::print(report, "{}\t{}\t{:.7f}\t{}\n", row.n,
                       row.fixture ? fmt::format("{:.3f}", *row.fixture) : "", row.value, dev);
        }
        fmt::print(report, "xi_max_abs_dev\t{:.7f}\n", max_dev);
    }
    if (want_eta) {
        fmt::print(report, "# eta: expected IQR by Monte Carlo ({} replications, seed {}, chunk {})\n",
                   options.monte_carlo.replications, options.monte_carlo.seed,
                   options.monte_carlo.chunk_size);
        fmt::print(report, "n\tfixture");
        for (auto c : kAllConventions) fmt::print(report, "\t{0}\t{0}_se", to_string(c));
        fmt::print(report, "\tquartile_indexed\n");
        double q_dev = 0.0;
        for (const auto& row : regen.eta) {
            fmt::print(report, "{}\t{}", row.n, row.fixture ? fmt::format("{:.3f}", *row.fixture) : "");
            for (const auto& e : row.by_convention) {
                fmt::print(report, "\t{:.7f}\t{:.7f}", e.estimate, e.std_error);
            }
            fmt::print(report, "\t{}\n", row.quartile_indexed ? fmt::format("{:.7f}", *row.quartile_indexed) : "");
            if (row.fixture && row.quartile_indexed) {
                q_dev = std::max(q_dev, std::abs(*row.quartile_indexed - *row.fixture));
            }
        }
        for (std::size_t k = 0; k < kAllConventions.size(); ++k) {
            fmt::print(report, "eta_max_abs_dev\t{}\t{:.7f}\n", to_string(kAllConventions[k]),
                       regen.eta_max_deviation[k]);
        }
        if (regen.best_convention) {
            fmt::print(report, "eta_best_convention\t{}\n", to_string(*regen.best_convention));
        }
        fmt::print(report, "eta_quartile_indexed_max_abs_dev\t{:.7f}\n", q_dev);
        fmt::print(report, "eta_column_convention\t{}\n", to_string(chosen));
    }
}

}  // namespace smallsd::cli
