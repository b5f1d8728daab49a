#include "smallsd/estimators.hpp"

#include <cmath>

#include <fmt/format.h>

#include "smallsd/errors.hpp"
#include "smallsd/specfun.hpp"

namespace smallsd {

namespace {

// Least-squares coefficients of the correction terms, as published.
constexpr double kDeltaIntercept = -0.0626;
constexpr double kDeltaSlope = 0.0197;
constexpr double kEpsilonIntercept = -2.882;
constexpr double kEpsilonSlope = -0.231;
constexpr double kEpsilon2Intercept = -9.01647;
constexpr double kEpsilon2Linear = -0.23238;
constexpr double kEpsilon2Quadratic = 0.00074;
constexpr double kEpsilon2Center = 26.0;
constexpr int kSecondOrderMinN = 3;
constexpr int kSecondOrderMaxN = 50;

void require_n(int n, int min_n, const char* what) {
    if (n < min_n) throw DomainError(fmt::format("{}: requires n >= {}, got {}", what, min_n, n));
}

void require_cutoff(int cutoff) {
    if (cutoff < 2) throw DomainError(fmt::format("cutoff must be >= 2, got {}", cutoff));
}

bool has_c1(const StudySummary& s) { return s.min && s.median && s.max; }
bool has_c3(const StudySummary& s) { return s.q1 && s.median && s.q3; }
bool has_c2(const StudySummary& s) { return has_c1(s) && has_c3(s); }

}  // namespace

std::string_view to_string(Scenario scenario) noexcept {
    switch (scenario) {
        case Scenario::C1: return "C1";
        case Scenario::C2: return "C2";
        case Scenario::C3: return "C3";
    }
    return "?";
}

std::string_view to_string(CorrectionOrder order) noexcept {
    switch (order) {
        case CorrectionOrder::None: return "none";
        case CorrectionOrder::First: return "first";
        case CorrectionOrder::Second: return "second";
    }
    return "?";
}

double MomentEstimate::divisor_used() const {
    if (scenario == Scenario::C3) return eta_divisor.value();
    return xi_divisor.value();
}

void validate(const StudySummary& s) {
    if (s.n < 2) throw ValidationError(fmt::format("sample size must be >= 2, got {}", s.n));

    const std::optional<double>* fields[] = {&s.min, &s.q1, &s.median, &s.q3, &s.max};
    const char* names[] = {"min", "q1", "median", "q3", "max"};
    for (std::size_t i = 0; i < 5; ++i) {
        if (*fields[i] && !std::isfinite(**fields[i])) {
            throw ValidationError(fmt::format("{} is not finite", names[i]));
        }
    }
    // Every present pair must respect min <= q1 <= median <= q3 <= max.
    for (std::size_t i = 0; i < 5; ++i) {
        if (!*fields[i]) continue;
        for (std::size_t j = i + 1; j < 5; ++j) {
            if (*fields[j] && **fields[i] > **fields[j]) {
                throw ValidationError(fmt::format("ordering violated: {} ({}) > {} ({})", names[i],
                                                  **fields[i], names[j], **fields[j]));
            }
        }
    }
}

Scenario detect_scenario(const StudySummary& s) {
    if (has_c2(s)) return Scenario::C2;
    if (has_c3(s)) return Scenario::C3;
    if (has_c1(s)) return Scenario::C1;
    throw MissingFieldsError(
        "no scenario applies: need {min, median, max}, {q1, median, q3}, or all five");
}

Scenario resolve_scenario(const StudySummary& s, std::optional<Scenario> override_scenario) {
    if (!override_scenario) return detect_scenario(s);
    const bool ok = [&] {
        switch (*override_scenario) {
            case Scenario::C1: return has_c1(s);
            case Scenario::C2: return has_c2(s);
            case Scenario::C3: return has_c3(s);
        }
        return false;
    }();
    if (!ok) {
        throw MissingFieldsError(
            fmt::format("scenario {} requested but its fields are missing", to_string(*override_scenario)));
    }
    return *override_scenario;
}

double estimate_mean(const StudySummary& s, const EstimateOptions& options) {
    validate(s);
    const Scenario scenario = resolve_scenario(s, options.scenario);
    switch (scenario) {
        case Scenario::C1: {
            const double a = *s.min, m = *s.median, b = *s.max;
            double mean = (a + 2.0 * m + b) / 4.0;
            if (!options.simplified_c1_mean) mean += (a - 2.0 * m + b) / (4.0 * s.n);
            return mean;
        }
        case Scenario::C2:
            return (*s.min + 2.0 * *s.q1 + 2.0 * *s.median + 2.0 * *s.q3 + *s.max) / 8.0;
        case Scenario::C3:
            return (*s.q1 + *s.median + *s.q3) / 3.0;
    }
    return 0.0;
}

double blom_xi(int n) {
    require_n(n, 1, "blom_xi");
    return 2.0 * std_normal_quantile((n - 0.375) / (n + 0.25));
}

double blom_eta(int n) {
    require_n(n, 1, "blom_eta");
    return 2.0 * std_normal_quantile((0.75 * n - 0.125) / (n + 0.25));
}

double delta_hat(int n) {
    require_n(n, 2, "delta_hat");
    return kDeltaIntercept + kDeltaSlope * std::log(static_cast<double>(n));
}

double epsilon_hat(int n, CorrectionOrder order) {
    const double x = n;
    switch (order) {
        case CorrectionOrder::None:
            require_n(n, 2, "epsilon_hat");
            return 0.0;
        case CorrectionOrder::First:
            require_n(n, 2, "epsilon_hat");
            return std::exp(x / (kEpsilonIntercept + kEpsilonSlope * x));
        case CorrectionOrder::Second: {
            if (n < kSecondOrderMinN || n > kSecondOrderMaxN) {
                throw DomainError(fmt::format(
                    "second-order epsilon_hat is defined for 3 <= n <= 50, got {}", n));
            }
            const double c = x - kEpsilon2Center;
            return std::exp(x / (kEpsilon2Intercept + kEpsilon2Linear * c + kEpsilon2Quadratic * c * c));
        }
    }
    return 0.0;
}

double xi_hat(int n, int cutoff) {
    require_n(n, 2, "xi_hat");
    require_cutoff(cutoff);
    const double base = blom_xi(n);
    return n <= cutoff ? base + delta_hat(n) : base;
}

double eta_hat(int n, CorrectionOrder order, int cutoff) {
    require_n(n, order == CorrectionOrder::Second ? kSecondOrderMinN : 2, "eta_hat");
    require_cutoff(cutoff);
    const double base = blom_eta(n);
    return n <= cutoff ? base + epsilon_hat(n, order) : base;
}

MomentEstimate estimate_sd(const StudySummary& s, const EstimateOptions& options) {
    validate(s);
    MomentEstimate est;
    est.scenario = resolve_scenario(s, options.scenario);
    est.correction = options.correction;

    double range_sd = 0.0;
    double iqr_sd = 0.0;
    if (est.scenario != Scenario::C3) {
        const double range = *s.max - *s.min;
        est.xi_divisor = options.correction == CorrectionOrder::None ? blom_xi(s.n)
                                                                      : xi_hat(s.n, options.cutoff);
        range_sd = range / *est.xi_divisor;
        if (range == 0.0) est.degenerate = true;
    }
    if (est.scenario != Scenario::C1) {
        const double iqr = *s.q3 - *s.q1;
        est.eta_divisor = eta_hat(s.n, options.correction, options.cutoff);
        iqr_sd = iqr / *est.eta_divisor;
        if (iqr == 0.0) est.degenerate = true;
    }
    switch (est.scenario) {
        case Scenario::C1: est.sd = range_sd; break;
        case Scenario::C3: est.sd = iqr_sd; break;
        case Scenario::C2: est.sd = 0.5 * (range_sd + iqr_sd); break;
    }
    return est;
}

MomentEstimate estimate_moments(const StudySummary& s, const EstimateOptions& options) {
    MomentEstimate est = estimate_sd(s, options);
    est.mean = estimate_mean(s, options);
    return est;
}

double sample_size_bound(double sigma, double delta, double alpha, double beta) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError(fmt::format("sigma must be positive, got {}", sigma));
    }
    if (delta == 0.0 || !std::isfinite(delta)) {
        throw DomainError("delta must be finite and non-zero");
    }
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
        throw DomainError(fmt::format("alpha and beta must lie in (0, 1), got {} and {}", alpha, beta));
    }
    const double z_alpha = std_normal_quantile(1.0 - alpha / 2.0);
    const double z_beta = std_normal_quantile(1.0 - beta);
    const double z = z_alpha + z_beta;
    return 2.0 * sigma * sigma * z * z / (delta * delta);
}

long long required_sample_size(double sigma, double delta, double alpha, double beta) {
    return static_cast<long long>(std::ceil(sample_size_bound(sigma, delta, alpha, beta)));
}

}  // namespace smallsd
