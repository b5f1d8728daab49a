#pragma once

#include <array>
#include <functional>
#include <string_view>

namespace smallsd {

enum class DivisorKind { Xi, Eta };

/// Tabulated divisor values for n = 1..50 (expected range / expected IQR in sigma units).
class DivisorTable {
public:
    static constexpr int kMinN = 1;
    static constexpr int kMaxN = 50;
    static constexpr std::size_t kSize = kMaxN - kMinN + 1;

    DivisorTable(DivisorKind kind, const std::array<double, kSize>& values);

    [[nodiscard]] DivisorKind kind() const noexcept { return kind_; }

    /// Throws LookupError outside 1..50.
    [[nodiscard]] double at(int n) const;

    [[nodiscard]] const std::array<double, kSize>& values() const noexcept { return values_; }

private:
    DivisorKind kind_;
    std::array<double, kSize> values_;
};

struct DivisorTables {
    DivisorTable xi;
    DivisorTable eta;
};

/**
 * Parse the fixture format: one `n<TAB>xi<TAB>eta` record per line for
 * n = 1..50 in order, dot decimals, no header.
 *
 * Throws DataIntegrityError when the text is malformed or violates the table
 * invariants (xi(1) = 0, xi strictly increasing, eta non-decreasing).
 */
[[nodiscard]] DivisorTables parse_divisor_tables(std::string_view text);

/// Tables compiled into the library from data/divisor_tables.tsv.
[[nodiscard]] const DivisorTables& builtin_tables();

/// The raw embedded fixture text.
[[nodiscard]] std::string_view builtin_fixture_text() noexcept;

[[nodiscard]] double xi_table(int n);
[[nodiscard]] double eta_table(int n);

struct ErrorBounds {
    double sup_abs = 0.0;
    double inf_abs = 0.0;
    int argmax_n = 0;
    int argmin_n = 0;
};

/// sup and inf of |reference(n) - approx(n)| over the integer range [n_min, n_max].
/// Ties resolve to the smallest n.
[[nodiscard]] ErrorBounds error_bounds(const DivisorTable& reference,
                                       const std::function<double(int)>& approx, int n_min,
                                       int n_max);

}  // namespace smallsd
