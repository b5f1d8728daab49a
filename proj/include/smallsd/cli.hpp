#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "smallsd/estimators.hpp"
#include "smallsd/oracle.hpp"

namespace smallsd::cli {

/// Aborts a command: bad usage, unreadable input, malformed header.
class FatalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Tsv, JsonLines };

struct RunConfig {
    CorrectionOrder correction = CorrectionOrder::First;
    std::optional<Scenario> scenario_override;
    int cutoff = kDefaultCutoff;
    OutputFormat format = OutputFormat::Csv;
};

struct NRange {
    int first = 2;
    int last = 50;
};

/// Parses "A:B" (or a single "A"). Throws FatalError.
[[nodiscard]] NRange parse_range(std::string_view text);

[[nodiscard]] CorrectionOrder parse_correction(std::string_view text);
[[nodiscard]] Scenario parse_scenario(std::string_view text);
[[nodiscard]] OutputFormat parse_format(std::string_view text);

struct EstimateCounts {
    int estimated = 0;
    int rejected = 0;
};

/**
 * Reads study rows (header `study_id,n,min,q1,median,q3,max`, columns in any
 * order, empty cell = absent) and writes one estimate row per valid study.
 * Invalid rows are reported on `errors` and skipped.
 */
EstimateCounts cmd_estimate(std::istream& in, std::ostream& out, std::ostream& errors,
                            const RunConfig& config);

enum class Which { Xi, Eta, Both };
[[nodiscard]] Which parse_which(std::string_view text);

/// TSV with columns n, table, blom, corrected, residual (= table - corrected).
void cmd_tables(std::ostream& out, NRange range, Which which, const RunConfig& config);

enum class RefitKind { Epsilon, Delta };

struct RefitOptions {
    RefitKind kind = RefitKind::Epsilon;
    CorrectionOrder order = CorrectionOrder::First;  ///< Second selects the quadratic epsilon fit
    std::optional<std::string> emit_series;          ///< path for the TSV data series
};

void cmd_refit(std::ostream& out, const RefitOptions& options);

struct OracleOptions {
    Which which = Which::Both;
    NRange range{2, 50};
    QuadratureConfig quadrature;
    McConfig monte_carlo;
    std::optional<QuantileConvention> convention;  ///< eta column; default: best match to fixtures
};

/// Regenerated values in fixture format (`n<TAB>xi<TAB>eta`) on `out`,
/// per-n deviations and convention comparison on `report`.
void cmd_oracle(std::ostream& out, std::ostream& report, const OracleOptions& options);

}  // namespace smallsd::cli
