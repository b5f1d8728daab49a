#pragma once

namespace smallsd {

/// Standard normal density (1/sqrt(2 pi)) exp(-z^2/2).
[[nodiscard]] double std_normal_pdf(double z) noexcept;

/// Standard normal distribution function. Absolute error <= 1e-12.
[[nodiscard]] double std_normal_cdf(double z) noexcept;

/// Upper tail 1 - Phi(z), computed without cancellation.
[[nodiscard]] double std_normal_sf(double z) noexcept;

/**
 * Standard normal quantile function Phi^-1(p).
 *
 * Wichura's AS241 (PPND16) rational approximation followed by one Newton
 * correction against std_normal_cdf. For p in [1e-10, 1 - 1e-10] the result
 * satisfies |Phi(x) - p| <= 1e-12.
 *
 * Throws DomainError unless 0 < p < 1.
 */
[[nodiscard]] double std_normal_quantile(double p);

}  // namespace smallsd
