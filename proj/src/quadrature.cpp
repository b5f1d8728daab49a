#include "smallsd/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include <fmt/format.h>

#include "smallsd/errors.hpp"

namespace smallsd {

namespace {

// QUADPACK qk15 abscissae and weights; odd entries are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, int max_intervals,
                                    int initial_intervals) {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw DomainError("integrate_adaptive: tolerances must be positive");
    }
    if (initial_intervals < 1 || initial_intervals > max_intervals) {
        throw DomainError("integrate_adaptive: initial_intervals must lie in [1, max_intervals]");
    }
    std::priority_queue<Segment> heap;
    double total = 0.0;
    double total_error = 0.0;
    const double width = (b - a) / initial_intervals;
    for (int i = 0; i < initial_intervals; ++i) {
        const double lo = a + i * width;
        const double hi = i + 1 == initial_intervals ? b : lo + width;
        const Segment s = gk15(f, lo, hi);
        total += s.value;
        total_error += s.error;
        heap.push(s);
    }
    int evaluations = 15 * initial_intervals;

    while (total_error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (static_cast<int>(heap.size()) >= max_intervals) {
            throw NumericalError(fmt::format(
                "integrate_adaptive: no convergence on [{}, {}] after {} intervals "
                "(estimate {:.12g}, error {:.3g}, abs_tol {:.3g})",
                a, b, heap.size(), total, total_error, abs_tol));
        }
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = gk15(f, worst.a, mid);
        const Segment right = gk15(f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift from incremental updates.
    QuadratureResult result;
    result.intervals = static_cast<int>(heap.size());
    result.evaluations = evaluations;
    while (!heap.empty()) {
        result.value += heap.top().value;
        result.abs_error += heap.top().error;
        heap.pop();
    }
    return result;
}

}  // namespace smallsd
