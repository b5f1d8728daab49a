#pragma once

#include <functional>

namespace smallsd {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;  ///< summed Gauss/Kronrod error estimate
    int evaluations = 0;
    int intervals = 0;
};

/**
 * Globally adaptive 7/15-point Gauss-Kronrod integration of f over [a, b].
 *
 * [a, b] is first cut into `initial_intervals` equal panels so that narrow
 * peaks are not missed by the first rule evaluation. The interval with the largest error estimate is bisected until the total
 * estimate drops below max(abs_tol, rel_tol * |I|). Throws NumericalError if
 * that does not happen within max_intervals subintervals.
 */
[[nodiscard]] QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                                  double b, double abs_tol, double rel_tol,
                                                  int max_intervals = 4000,
                                                  int initial_intervals = 1);

}  // namespace smallsd
