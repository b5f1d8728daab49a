#include "smallsd/refit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "smallsd/errors.hpp"
#include "smallsd/estimators.hpp"

namespace smallsd {

namespace {

constexpr double kQuadraticCenter = 26.0;

double two_sided_critical_t(int df, double p) {
    boost::math::students_t dist(df);
    return boost::math::quantile(boost::math::complement(dist, p / 2.0));
}

std::vector<double> log_transformed_epsilon(const ResidualSeries& series, std::vector<double>& ns,
                                            int n_min) {
    if (series.kind != ResidualKind::Epsilon) {
        throw DomainError("epsilon fit requires an epsilon residual series");
    }
    std::vector<double> y;
    for (const auto& p : series.points) {
        if (p.n < n_min) continue;
        if (!(p.value > 0.0 && p.value < 1.0)) {
            throw DataIntegrityError(fmt::format(
                "epsilon({}) = {} outside (0, 1); n / ln(epsilon) is undefined", p.n, p.value));
        }
        ns.push_back(p.n);
        y.push_back(p.n / std::log(p.value));
    }
    return y;
}

}  // namespace

const Coefficient& RegressionFit::operator[](std::string_view name) const {
    const auto it = std::find_if(coefficients.begin(), coefficients.end(),
                                 [name](const Coefficient& c) { return c.name == name; });
    if (it == coefficients.end()) throw std::out_of_range(fmt::format("no coefficient '{}'", name));
    return *it;
}

RegressionFit ols(std::span<const Regressor> regressors, std::span<const double> y,
                  std::string intercept_name) {
    const auto rows = static_cast<Eigen::Index>(y.size());
    const auto cols = static_cast<Eigen::Index>(regressors.size() + 1);
    for (const auto& r : regressors) {
        if (r.values.size() != y.size()) {
            throw DomainError(fmt::format("regressor '{}' has {} values, response has {}", r.name,
                                          r.values.size(), y.size()));
        }
    }
    if (rows < cols + 1) {
        throw DomainError(fmt::format("ols: {} rows cannot fit {} coefficients with a residual df",
                                      rows, cols));
    }

    Eigen::MatrixXd design(rows, cols);
    design.col(0).setOnes();
    for (Eigen::Index j = 1; j < cols; ++j) {
        design.col(j) = Eigen::Map<const Eigen::VectorXd>(
            regressors[static_cast<std::size_t>(j - 1)].values.data(), rows);
    }
    const Eigen::Map<const Eigen::VectorXd> response(y.data(), rows);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) {
        throw SingularDesignError(
            fmt::format("ols: design matrix has rank {} < {} columns", qr.rank(), cols));
    }
    const Eigen::VectorXd beta = qr.solve(response);
    const Eigen::VectorXd fitted = design * beta;
    const Eigen::VectorXd resid = response - fitted;

    RegressionFit fit;
    fit.df = static_cast<int>(rows - cols);
    const double rss = resid.squaredNorm();
    const double tss = (response.array() - response.mean()).square().sum();
    const double sigma2 = rss / fit.df;
    fit.residual_std_error = std::sqrt(sigma2);
    fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;

    // (X'X)^-1 = P R^-1 R^-T P^T
    const Eigen::MatrixXd r_upper =
        qr.matrixR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r_upper.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
    const Eigen::MatrixXd xtx_inv_perm = r_inv * r_inv.transpose();
    const Eigen::MatrixXd xtx_inv =
        qr.colsPermutation() * xtx_inv_perm * qr.colsPermutation().transpose();

    const double t_crit = two_sided_critical_t(fit.df, 0.001);
    for (Eigen::Index j = 0; j < cols; ++j) {
        Coefficient c;
        c.name = j == 0 ? intercept_name : regressors[static_cast<std::size_t>(j - 1)].name;
        c.estimate = beta(j);
        c.std_error = std::sqrt(sigma2 * xtx_inv(j, j));
        if (c.std_error > 0.0) {
            c.t_value = c.estimate / c.std_error;
        } else {
            c.t_value = c.estimate == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                          : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
        }
        c.p_below_001 = std::abs(c.t_value) > t_crit;
        fit.coefficients.push_back(std::move(c));
    }
    fit.fitted.assign(fitted.data(), fitted.data() + rows);
    fit.residuals.assign(resid.data(), resid.data() + rows);
    return fit;
}

ResidualSeries residual_series(ResidualKind kind, const DivisorTables& tables) {
    ResidualSeries series;
    series.kind = kind;
    for (int n = 2; n <= DivisorTable::kMaxN; ++n) {
        const double value = kind == ResidualKind::Delta ? tables.xi.at(n) - blom_xi(n)
                                                         : tables.eta.at(n) - blom_eta(n);
        if (kind == ResidualKind::Epsilon && !(value > 0.0)) {
            throw DataIntegrityError(
                fmt::format("epsilon({}) = {} is not positive; the log transform needs epsilon > 0",
                            n, value));
        }
        series.points.push_back({n, value});
    }
    return series;
}

RegressionFit fit_epsilon_linear(const ResidualSeries& series) {
    std::vector<double> ns;
    const auto y = log_transformed_epsilon(series, ns, 2);
    const std::vector<Regressor> regs = {{"b", ns}};
    return ols(regs, y);
}

RegressionFit fit_epsilon_quadratic(const ResidualSeries& series) {
    std::vector<double> ns;
    const auto y = log_transformed_epsilon(series, ns, 3);
    Regressor linear{"b", {}};
    Regressor quadratic{"c", {}};
    for (double n : ns) {
        const double c = n - kQuadraticCenter;
        linear.values.push_back(c);
        quadratic.values.push_back(c * c);
    }
    const std::vector<Regressor> regs = {linear, quadratic};
    return ols(regs, y);
}

RegressionFit fit_delta(const ResidualSeries& series) {
    if (series.kind != ResidualKind::Delta) {
        throw DomainError("fit_delta requires a delta residual series");
    }
    Regressor log_n{"b", {}};
    std::vector<double> y;
    for (const auto& p : series.points) {
        log_n.values.push_back(std::log(static_cast<double>(p.n)));
        y.push_back(p.value);
    }
    const std::vector<Regressor> regs = {log_n};
    return ols(regs, y);
}

std::vector<SeriesPoint> central_difference(const ResidualSeries& series) {
    const auto& pts = series.points;
    if (pts.size() < 3) {
        throw DomainError("central_difference: need at least three consecutive points");
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].n != pts[i - 1].n + 1) {
            throw DomainError(fmt::format("central_difference: gap between n = {} and n = {}",
                                          pts[i - 1].n, pts[i].n));
        }
    }
    std::vector<SeriesPoint> out;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        out.push_back({pts[i].n, (pts[i + 1].value - pts[i - 1].value) / 2.0});
    }
    return out;
}

double predict_epsilon_linear(const RegressionFit& fit, int n) {
    return std::exp(n / (fit["a"].estimate + fit["b"].estimate * n));
}

double predict_epsilon_quadratic(const RegressionFit& fit, int n) {
    const double c = n - kQuadraticCenter;
    return std::exp(n / (fit["a"].estimate + fit["b"].estimate * c + fit["c"].estimate * c * c));
}

double predict_delta(const RegressionFit& fit, int n) {
    return fit["a"].estimate + fit["b"].estimate * std::log(static_cast<double>(n));
}

void write_fit_report(std::ostream& out, const RegressionFit& fit, std::string_view title) {
    fmt::print(out, "{}\n", title);
    fmt::print(out, "{:<4}{:>12}{:>12}{:>10}{:>10}\n", "", "Estimate", "Std. Error", "t value",
               "Pr(>|t|)");
    for (const auto& c : fit.coefficients) {
        fmt::print(out, "{:<4}{:>12.6f}{:>12.6f}{:>10.2f}{:>10}\n", c.name, c.estimate, c.std_error,
                   c.t_value, c.p_below_001 ? "< 0.001" : ">= 0.001");
    }
    fmt::print(out, "Residual standard error: {:.5f} on {} degrees of freedom\n",
               fit.residual_std_error, fit.df);
    fmt::print(out, "Multiple R-squared: {:.5f}\n", fit.r_squared);
}

}  // namespace smallsd
