#include "smallsd/divisor_tables.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "smallsd/errors.hpp"

namespace smallsd {

// Defined in the generated fixture_data.cpp.
extern const char* const kEmbeddedDivisorFixture;

namespace {

std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

template <typename T>
T parse_field(std::string_view field, int line_no) {
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw DataIntegrityError(
            fmt::format("divisor fixture line {}: cannot parse '{}'", line_no, field));
    }
    return value;
}

void check_invariants(const std::array<double, DivisorTable::kSize>& xi,
                      const std::array<double, DivisorTable::kSize>& eta) {
    if (xi[0] != 0.0) throw DataIntegrityError("divisor fixture: xi(1) must be exactly 0");
    for (std::size_t i = 1; i < DivisorTable::kSize; ++i) {
        if (!(xi[i] > xi[i - 1])) {
            throw DataIntegrityError(
                fmt::format("divisor fixture: xi not strictly increasing at n = {}", i + 1));
        }
        if (eta[i] < eta[i - 1]) {
            throw DataIntegrityError(
                fmt::format("divisor fixture: eta decreasing at n = {}", i + 1));
        }
    }
}

}  // namespace

DivisorTable::DivisorTable(DivisorKind kind, const std::array<double, kSize>& values)
    : kind_(kind), values_(values) {}

double DivisorTable::at(int n) const {
    if (n < kMinN || n > kMaxN) {
        throw LookupError(fmt::format("{} table covers n = 1..50, got n = {}",
                                      kind_ == DivisorKind::Xi ? "xi" : "eta", n));
    }
    return values_[static_cast<std::size_t>(n - kMinN)];
}

DivisorTables parse_divisor_tables(std::string_view text) {
    std::array<double, DivisorTable::kSize> xi{};
    std::array<double, DivisorTable::kSize> eta{};
    int expected_n = DivisorTable::kMinN;
    int line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        auto line = trim_cr(text.substr(0, eol));
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (line.empty() && text.empty()) break;

        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
        if (tab2 == std::string_view::npos || line.find('\t', tab2 + 1) != std::string_view::npos) {
            throw DataIntegrityError(
                fmt::format("divisor fixture line {}: expected 3 tab-separated fields", line_no));
        }
        const int n = parse_field<int>(line.substr(0, tab1), line_no);
        if (n != expected_n || n > DivisorTable::kMaxN) {
            throw DataIntegrityError(
                fmt::format("divisor fixture line {}: expected n = {}, got {}", line_no,
                            expected_n, n));
        }
        const auto idx = static_cast<std::size_t>(n - DivisorTable::kMinN);
        xi[idx] = parse_field<double>(line.substr(tab1 + 1, tab2 - tab1 - 1), line_no);
        eta[idx] = parse_field<double>(line.substr(tab2 + 1), line_no);
        ++expected_n;
    }
    if (expected_n != DivisorTable::kMaxN + 1) {
        throw DataIntegrityError(fmt::format("divisor fixture: expected 50 records, got {}",
                                             expected_n - DivisorTable::kMinN));
    }
    check_invariants(xi, eta);
    return DivisorTables{DivisorTable(DivisorKind::Xi, xi), DivisorTable(DivisorKind::Eta, eta)};
}

std::string_view builtin_fixture_text() noexcept { return kEmbeddedDivisorFixture; }

const DivisorTables& builtin_tables() {
    static const DivisorTables tables = parse_divisor_tables(builtin_fixture_text());
    return tables;
}

double xi_table(int n) { return builtin_tables().xi.at(n); }

double eta_table(int n) { return builtin_tables().eta.at(n); }

ErrorBounds error_bounds(const DivisorTable& reference, const std::function<double(int)>& approx,
                         int n_min, int n_max) {
    if (n_min < DivisorTable::kMinN || n_max > DivisorTable::kMaxN || n_min > n_max) {
        throw DomainError(fmt::format("error_bounds: invalid range {}..{}", n_min, n_max));
    }
    ErrorBounds bounds;
    bool first = true;
    for (int n = n_min; n <= n_max; ++n) {
        const double err = std::abs(reference.at(n) - approx(n));
        if (first || err > bounds.sup_abs) {
            bounds.sup_abs = err;
            bounds.argmax_n = n;
        }
        if (first || err < bounds.inf_abs) {
            bounds.inf_abs = err;
            bounds.argmin_n = n;
        }
        first = false;
    }
    return bounds;
}

}  // namespace smallsd
