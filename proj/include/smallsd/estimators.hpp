#pragma once

#include <optional>
#include <string_view>

namespace smallsd {

/// Sample sizes up to this value use the small-sample corrected divisors.
inline constexpr int kDefaultCutoff = 50;

enum class Scenario {
    C1,  ///< min, median, max
    C2,  ///< min, q1, median, q3, max
    C3,  ///< q1, median, q3
};

enum class CorrectionOrder { None, First, Second };

[[nodiscard]] std::string_view to_string(Scenario scenario) noexcept;
[[nodiscard]] std::string_view to_string(CorrectionOrder order) noexcept;

/// Non-parametric summary of one study. Absent fields are std::nullopt.
struct StudySummary {
    int n = 0;
    std::optional<double> min;
    std::optional<double> q1;
    std::optional<double> median;
    std::optional<double> q3;
    std::optional<double> max;
};

struct EstimateOptions {
    CorrectionOrder correction = CorrectionOrder::First;
    std::optional<Scenario> scenario;  ///< force a scenario instead of auto-detection
    int cutoff = kDefaultCutoff;
    bool simplified_c1_mean = false;  ///< drop the (a - 2m + b)/(4n) term
};

struct MomentEstimate {
    std::optional<double> mean;
    std::optional<double> sd;
    Scenario scenario = Scenario::C1;
    CorrectionOrder correction = CorrectionOrder::First;
    // Divisors applied to the range and to the IQR; which ones are set depends on the scenario.
    std::optional<double> xi_divisor;
    std::optional<double> eta_divisor;
    bool degenerate = false;  ///< a spread used by the scenario was zero

    /// The single divisor for C1/C3. For C2 the divisor that maps the mean spread
    /// ((b - a) + (q3 - q1))/2 onto sd is not meaningful, so the xi divisor is returned.
    [[nodiscard]] double divisor_used() const;
};

/// Checks n >= 2, finiteness, and ordering of the fields present.
/// Throws ValidationError.
void validate(const StudySummary& summary);

/// Scenario selection with priority C2 > C3 > C1. Throws MissingFieldsError.
[[nodiscard]] Scenario detect_scenario(const StudySummary& summary);

/// Scenario to use: the override when given (its fields must be present), else detected.
[[nodiscard]] Scenario resolve_scenario(const StudySummary& summary,
                                        std::optional<Scenario> override_scenario);

[[nodiscard]] double estimate_mean(const StudySummary& summary, const EstimateOptions& options = {});

/// Blom approximation 2 Phi^-1((n - 0.375)/(n + 0.25)) of the expected range; n >= 1.
[[nodiscard]] double blom_xi(int n);

/// Blom approximation 2 Phi^-1((0.75 n - 0.125)/(n + 0.25)) of the expected IQR; n >= 1.
[[nodiscard]] double blom_eta(int n);

/// Additive correction -0.0626 + 0.0197 ln(n) for the range divisor. n >= 2.
[[nodiscard]] double delta_hat(int n);

/**
 * Additive correction for the IQR divisor.
 *
 *   First:  exp(n / (-2.882 - 0.231 n)),                               n >= 2
 *   Second: exp(n / (-9.01647 - 0.23238 (n-26) + 0.00074 (n-26)^2)),  3 <= n <= 50
 *   None:   0
 */
[[nodiscard]] double epsilon_hat(int n, CorrectionOrder order);

/// Corrected range divisor: blom_xi(n) + delta_hat(n) for n <= cutoff, blom_xi(n) beyond.
[[nodiscard]] double xi_hat(int n, int cutoff = kDefaultCutoff);

/// Corrected IQR divisor: blom_eta(n) + epsilon_hat(n, order) for n <= cutoff, blom_eta(n) beyond.
[[nodiscard]] double eta_hat(int n, CorrectionOrder order = CorrectionOrder::First,
                             int cutoff = kDefaultCutoff);

/**
 * Standard deviation from the range and/or the quartiles.
 *
 *   C1: (b - a) / xi_hat(n)
 *   C3: (q3 - q1) / eta_hat(n)
 *   C2: average of the two
 *
 * A zero spread yields sd = 0 with `degenerate` set rather than an error.
 * The returned estimate has no mean; see estimate_moments().
 */
[[nodiscard]] MomentEstimate estimate_sd(const StudySummary& summary,
                                         const EstimateOptions& options = {});

/// estimate_sd() plus the scenario's mean estimate.
[[nodiscard]] MomentEstimate estimate_moments(const StudySummary& summary,
                                              const EstimateOptions& options = {});

/// Real-valued right-hand side 2 sigma^2 (z_{alpha/2} + z_beta)^2 / delta^2.
[[nodiscard]] double sample_size_bound(double sigma, double delta, double alpha, double beta);

/// Smallest integer n satisfying n >= sample_size_bound(...).
[[nodiscard]] long long required_sample_size(double sigma, double delta, double alpha,
                                             double beta);

}  // namespace smallsd
