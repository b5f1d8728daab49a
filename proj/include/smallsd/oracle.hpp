#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace smallsd {

struct QuadratureConfig {
    double abs_tol = 1e-9;
    double rel_tol = 1e-12;
    double integration_bound = 10.0;  ///< integrate over [-bound, bound] in z units
};

/// How sample quartiles are read off sorted data.
enum class QuantileConvention {
    BlomInterpolation,  ///< linear interpolation at positions p (n + 0.25) + 0.375
    LinearH7,           ///< linear interpolation at h = (n - 1) p + 1
    RoundedPosition,    ///< order statistics at round((n+1)/4) and round(3(n+1)/4)
};

inline constexpr std::array<QuantileConvention, 3> kAllConventions = {
    QuantileConvention::BlomInterpolation, QuantileConvention::LinearH7,
    QuantileConvention::RoundedPosition};

[[nodiscard]] std::string_view to_string(QuantileConvention convention) noexcept;
[[nodiscard]] std::optional<QuantileConvention> parse_convention(std::string_view name) noexcept;

struct McConfig {
    long long replications = 1'000'000;
    std::uint64_t seed = 1;
    QuantileConvention convention = QuantileConvention::BlomInterpolation;
    long long chunk_size = 10'000;
    unsigned threads = 0;  ///< 0 = hardware concurrency; never affects the result
};

void validate(const QuadratureConfig& cfg);
void validate(const McConfig& cfg);

/// E[X(n) - X(1)] for n iid standard normals, by adaptive quadrature. n >= 2.
[[nodiscard]] double expected_range(int n, const QuadratureConfig& cfg = {});

/// E[X(r:n)], the expected r-th smallest of n iid standard normals. 1 <= r <= n.
[[nodiscard]] double expected_order_statistic(int r, int n, const QuadratureConfig& cfg = {});

/// Sample (Q1, Q3) of already sorted data under the given convention.
[[nodiscard]] std::pair<double, double> sample_quartiles(std::span<const double> sorted,
                                                         QuantileConvention convention);

/// Exact E[Q3 - Q1] for n standard normals under a convention, from expected order statistics.
[[nodiscard]] double exact_expected_iqr(int n, QuantileConvention convention,
                                        const QuadratureConfig& cfg = {});

struct IqrEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo E[Q3 - Q1] under cfg.convention. Deterministic in (seed, replications, chunk_size).
[[nodiscard]] IqrEstimate expected_iqr(int n, const McConfig& cfg);

/// Same draws evaluated under every convention, in kAllConventions order.
[[nodiscard]] std::array<IqrEstimate, 3> expected_iqr_all(int n, const McConfig& cfg);

struct XiRow {
    int n = 0;
    double value = 0.0;
    std::optional<double> fixture;
};

struct EtaRow {
    int n = 0;
    std::array<IqrEstimate, 3> by_convention{};
    std::optional<double> fixture;
    /// 2 E[X(3n+1 : 4n+1)]: the fixture value if its index were the quartile count Q with 4Q+1 observations.
    std::optional<double> quartile_indexed;
};

struct RegenerationReport {
    std::vector<XiRow> xi;
    std::vector<EtaRow> eta;
    /// max |estimate - fixture| per convention over rows that have a fixture value.
    std::array<double, 3> eta_max_deviation{};
    std::optional<QuantileConvention> best_convention;
};

[[nodiscard]] std::vector<XiRow> regenerate_xi(int n_min, int n_max, const QuadratureConfig& cfg);
[[nodiscard]] std::vector<EtaRow> regenerate_eta(int n_min, int n_max, const McConfig& cfg,
                                                 const std::optional<QuadratureConfig>& q_indexed = {});

/// Both tables over [2, 50] with per-convention deviations from the fixtures.
[[nodiscard]] RegenerationReport regenerate_tables(const QuadratureConfig& cfg_q,
                                                   const McConfig& cfg_mc, int n_min = 2,
                                                   int n_max = 50);

/// Fill eta_max_deviation and best_convention from report.eta.
void summarize_eta(RegenerationReport& report);

}  // namespace smallsd
