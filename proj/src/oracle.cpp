#include "smallsd/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "smallsd/divisor_tables.hpp"
#include "smallsd/errors.hpp"
#include "smallsd/quadrature.hpp"
#include "smallsd/specfun.hpp"

namespace smallsd {

namespace {

// Starting panels for the order-statistic integrals; the densities narrow as n grows.
constexpr int kInitialPanels = 64;

struct QuartilePosition {
    int lo;       // 1-based order statistic index
    int hi;
    double frac;  // weight on hi
};

QuartilePosition interpolated(double pos, int n) {
    pos = std::clamp(pos, 1.0, static_cast<double>(n));
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, n);
    return {lo, hi, pos - lo};
}

QuartilePosition quartile_position(int n, double p, QuantileConvention convention) {
    switch (convention) {
        case QuantileConvention::BlomInterpolation:
            return interpolated(p * (n + 0.25) + 0.375, n);
        case QuantileConvention::LinearH7:
            return interpolated((n - 1) * p + 1.0, n);
        case QuantileConvention::RoundedPosition: {
            const auto k = static_cast<int>(std::lround(p * (n + 1)));
            const int idx = std::clamp(k, 1, n);
            return {idx, idx, 0.0};
        }
    }
    return {1, 1, 0.0};
}

template <typename At>
double read_quartile(const QuartilePosition& pos, At&& at) {
    const double lo = at(pos.lo);
    if (pos.frac == 0.0) return lo;
    return lo + pos.frac * (at(pos.hi) - lo);
}

double uniform_open(std::mt19937_64& engine) {
    // 53 random bits centred in their cell: strictly inside (0, 1).
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

struct ChunkSums {
    std::array<double, 3> sum{};
    std::array<double, 3> sum_sq{};
};

ChunkSums run_chunk(int n, std::uint64_t seed, long long chunk, long long count) {
    const auto c = static_cast<std::uint64_t>(chunk);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 engine(seq);

    std::array<QuartilePosition, 3> q1_pos{};
    std::array<QuartilePosition, 3> q3_pos{};
    for (std::size_t k = 0; k < kAllConventions.size(); ++k) {
        q1_pos[k] = quartile_position(n, 0.25, kAllConventions[k]);
        q3_pos[k] = quartile_position(n, 0.75, kAllConventions[k]);
    }

    ChunkSums sums;
    std::vector<double> sample(static_cast<std::size_t>(n));
    const auto at = [&sample](int idx) { return sample[static_cast<std::size_t>(idx - 1)]; };
    for (long long rep = 0; rep < count; ++rep) {
        for (auto& x : sample) x = std_normal_quantile(uniform_open(engine));
        std::sort(sample.begin(), sample.end());
        for (std::size_t k = 0; k < kAllConventions.size(); ++k) {
            const double iqr = read_quartile(q3_pos[k], at) - read_quartile(q1_pos[k], at);
            sums.sum[k] += iqr;
            sums.sum_sq[k] += iqr * iqr;
        }
    }
    return sums;
}

double log_binomial_coefficient(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::size_t convention_index(QuantileConvention convention) {
    return static_cast<std::size_t>(
        std::find(kAllConventions.begin(), kAllConventions.end(), convention) - kAllConventions.begin());
}

}  // namespace

std::string_view to_string(QuantileConvention convention) noexcept {
    switch (convention) {
        case QuantileConvention::BlomInterpolation: return "blom";
        case QuantileConvention::LinearH7: return "h7";
        case QuantileConvention::RoundedPosition: return "rounded";
    }
    return "?";
}

std::optional<QuantileConvention> parse_convention(std::string_view name) noexcept {
    for (auto c : kAllConventions) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

void validate(const QuadratureConfig& cfg) {
    if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0)) {
        throw DomainError("quadrature tolerances must be positive");
    }
    if (!(cfg.integration_bound >= 8.0)) {
        throw DomainError(fmt::format("integration bound must be >= 8, got {}", cfg.integration_bound));
    }
}

void validate(const McConfig& cfg) {
    if (cfg.replications < 10'000) {
        throw DomainError(fmt::format("replications must be >= 10000, got {}", cfg.replications));
    }
    if (cfg.chunk_size < 1) throw DomainError("chunk size must be positive");
}

double expected_range(int n, const QuadratureConfig& cfg) {
    if (n < 2) throw DomainError(fmt::format("expected_range: requires n >= 2, got {}", n));
    validate(cfg);
    const int power = n - 1;
    const auto integrand = [n, power](double z) {
        const double upper = std::pow(std_normal_cdf(z), power);
        const double lower = std::pow(std_normal_sf(z), power);
        return z * n * std_normal_pdf(z) * (upper - lower);
    };
    const double bound = cfg.integration_bound;
    return integrate_adaptive(integrand, -bound, bound, cfg.abs_tol, cfg.rel_tol, 4000, kInitialPanels).value;
}

double expected_order_statistic(int r, int n, const QuadratureConfig& cfg) {
    if (n < 1 || r < 1 || r > n) {
        throw DomainError(fmt::format("expected_order_statistic: invalid rank {} of {}", r, n));
    }
    validate(cfg);
    const double log_coeff = std::log(static_cast<double>(n)) + log_binomial_coefficient(n - 1, r - 1);
    const auto integrand = [=](double z) {
        const double log_density = log_coeff + (r - 1) * std::log(std_normal_cdf(z)) +
                                   (n - r) * std::log(std_normal_sf(z)) - 0.5 * z * z;
        return z * std::exp(log_density) * 0.3989422804014326779399460599343819;
    };
    const double bound = cfg.integration_bound;
    return integrate_adaptive(integrand, -bound, bound, cfg.abs_tol, cfg.rel_tol, 4000, kInitialPanels).value;
}

std::pair<double, double> sample_quartiles(std::span<const double> sorted,
                                           QuantileConvention convention) {
    if (sorted.empty()) throw DomainError("sample_quartiles: empty sample");
    const int n = static_cast<int>(sorted.size());
    const auto at = [sorted](int idx) { return sorted[static_cast<std::size_t>(idx - 1)]; };
    return {read_quartile(quartile_position(n, 0.25, convention), at),
            read_quartile(quartile_position(n, 0.75, convention), at)};
}

double exact_expected_iqr(int n, QuantileConvention convention, const QuadratureConfig& cfg) {
    if (n < 2) throw DomainError(fmt::format("exact_expected_iqr: requires n >= 2, got {}", n));
    const auto at = [n, &cfg](int idx) { return expected_order_statistic(idx, n, cfg); };
    return read_quartile(quartile_position(n, 0.75, convention), at) -
           read_quartile(quartile_position(n, 0.25, convention), at);
}

std::array<IqrEstimate, 3> expected_iqr_all(int n, const McConfig& cfg) {
    if (n < 2) throw DomainError(fmt::format("expected_iqr: requires n >= 2, got {}", n));
    validate(cfg);

    const long long chunks = (cfg.replications + cfg.chunk_size - 1) / cfg.chunk_size;
    std::vector<ChunkSums> results(static_cast<std::size_t>(chunks));
    std::atomic<long long> next{0};
    const auto worker = [&] {
        for (long long c = next++; c < chunks; c = next++) {
            const long long count = std::min(cfg.chunk_size, cfg.replications - c * cfg.chunk_size);
            results[static_cast<std::size_t>(c)] = run_chunk(n, cfg.seed, c, count);
        }
    };
    unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<long long>(threads, chunks));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    // Reduce in chunk order so the result never depends on scheduling.
    ChunkSums total;
    for (const auto& r : results) {
        for (std::size_t k = 0; k < 3; ++k) {
            total.sum[k] += r.sum[k];
            total.sum_sq[k] += r.sum_sq[k];
        }
    }
    const auto reps = static_cast<double>(cfg.replications);
    std::array<IqrEstimate, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) {
        const double mean = total.sum[k] / reps;
        const double var = std::max(0.0, (total.sum_sq[k] - reps * mean * mean) / (reps - 1.0));
        out[k] = {mean, std::sqrt(var / reps)};
    }
    return out;
}

IqrEstimate expected_iqr(int n, const McConfig& cfg) {
    return expected_iqr_all(n, cfg)[convention_index(cfg.convention)];
}

std::vector<XiRow> regenerate_xi(int n_min, int n_max, const QuadratureConfig& cfg) {
    if (n_min < 2 || n_min > n_max) {
        throw DomainError(fmt::format("regenerate_xi: invalid range {}..{}", n_min, n_max));
    }
    std::vector<XiRow> rows;
    for (int n = n_min; n <= n_max; ++n) {
        XiRow row{n, expected_range(n, cfg), std::nullopt};
        if (n <= DivisorTable::kMaxN) row.fixture = xi_table(n);
        rows.push_back(row);
    }
    return rows;
}

std::vector<EtaRow> regenerate_eta(int n_min, int n_max, const McConfig& cfg,
                                   const std::optional<QuadratureConfig>& q_indexed) {
    if (n_min < 2 || n_min > n_max) {
        throw DomainError(fmt::format("regenerate_eta: invalid range {}..{}", n_min, n_max));
    }
    std::vector<EtaRow> rows;
    for (int n = n_min; n <= n_max; ++n) {
        EtaRow row;
        row.n = n;
        row.by_convention = expected_iqr_all(n, cfg);
        if (n <= DivisorTable::kMaxN) row.fixture = eta_table(n);
        if (q_indexed) {
            const int size = 4 * n + 1;
            row.quartile_indexed = expected_order_statistic(3 * n + 1, size, *q_indexed) -
                                   expected_order_statistic(n + 1, size, *q_indexed);
        }
        rows.push_back(row);
    }
    return rows;
}

void summarize_eta(RegenerationReport& report) {
    report.eta_max_deviation = {};
    report.best_convention.reset();
    bool any = false;
    for (const auto& row : report.eta) {
        if (!row.fixture) continue;
        any = true;
        for (std::size_t k = 0; k < 3; ++k) {
            report.eta_max_deviation[k] = std::max(
                report.eta_max_deviation[k], std::abs(row.by_convention[k].estimate - *row.fixture));
        }
    }
    if (!any) return;
    const auto best = std::min_element(report.eta_max_deviation.begin(), report.eta_max_deviation.end());
    report.best_convention = kAllConventions[static_cast<std::size_t>(best - report.eta_max_deviation.begin())];
}

RegenerationReport regenerate_tables(const QuadratureConfig& cfg_q, const McConfig& cfg_mc,
                                     int n_min, int n_max) {
    RegenerationReport report;
    report.xi = regenerate_xi(n_min, n_max, cfg_q);
    report.eta = regenerate_eta(n_min, n_max, cfg_mc, cfg_q);
    summarize_eta(report);
    return report;
}

}  // namespace smallsd
