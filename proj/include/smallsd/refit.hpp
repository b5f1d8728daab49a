#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smallsd/divisor_tables.hpp"

namespace smallsd {

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double t_value = 0.0;
    bool p_below_001 = false;  ///< two-sided Student-t p-value below 0.001
};

struct RegressionFit {
    std::vector<Coefficient> coefficients;
    double residual_std_error = 0.0;
    double r_squared = 0.0;
    int df = 0;
    std::vector<double> fitted;
    std::vector<double> residuals;

    [[nodiscard]] const Coefficient& operator[](std::string_view name) const;
};

struct Regressor {
    std::string name;
    std::vector<double> values;
};

/**
 * Ordinary least squares of y on an intercept plus the given regressors.
 *
 * Standard errors come from the residual variance RSS/df. Requires
 * rows >= regressors + 2 (at least one residual degree of freedom).
 * Throws SingularDesignError if the design matrix is rank deficient and
 * DomainError on shape mismatches.
 */
[[nodiscard]] RegressionFit ols(std::span<const Regressor> regressors, std::span<const double> y,
                                std::string intercept_name = "a");

enum class ResidualKind { Delta, Epsilon };

struct SeriesPoint {
    int n = 0;
    double value = 0.0;
};

struct ResidualSeries {
    ResidualKind kind = ResidualKind::Delta;
    std::vector<SeriesPoint> points;
};

/// Table minus Blom approximation over n = 2..50. Epsilon points must all be positive.
[[nodiscard]] ResidualSeries residual_series(ResidualKind kind,
                                             const DivisorTables& tables = builtin_tables());

/// OLS of Y = n / ln(eps(n)) on n. Coefficients a (intercept), b.
[[nodiscard]] RegressionFit fit_epsilon_linear(const ResidualSeries& series);

/// OLS of Y on (n - 26) and (n - 26)^2 over n >= 3. Coefficients a, b, c.
[[nodiscard]] RegressionFit fit_epsilon_quadratic(const ResidualSeries& series);

/// OLS of delta(n) on ln(n). Coefficients a (intercept), b.
[[nodiscard]] RegressionFit fit_delta(const ResidualSeries& series);

/// (v(n+1) - v(n-1)) / 2 at every interior point of a contiguous series.
[[nodiscard]] std::vector<SeriesPoint> central_difference(const ResidualSeries& series);

/// exp(n / (a + b n)) using the fit's own coefficients.
[[nodiscard]] double predict_epsilon_linear(const RegressionFit& fit, int n);
/// exp(n / (a + b (n-26) + c (n-26)^2)).
[[nodiscard]] double predict_epsilon_quadratic(const RegressionFit& fit, int n);
/// a + b ln(n).
[[nodiscard]] double predict_delta(const RegressionFit& fit, int n);

/// Plain-text summary: one row per coefficient, then residual SE, df and R^2.
void write_fit_report(std::ostream& out, const RegressionFit& fit, std::string_view title);

}  // namespace smallsd
