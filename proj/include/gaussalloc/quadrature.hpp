#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration over a finite interval,
// split up front at caller-supplied breakpoints. Follows the QUADPACK QAG
// scheme: bisect the interval with the largest error estimate until the
// summed estimate drops below the absolute tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace gaussalloc::quadrature {

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    std::size_t intervals = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const noexcept { return error < other.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
    constexpr double epmach = std::numeric_limits<double>::epsilon();
    constexpr double uflow = std::numeric_limits<double>::min();
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::abs(half);

    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    const double fc = f(centre);
    double res_gauss = fc * kGaussWeights[3];
    double res_kronrod = fc * kKronrodWeights[7];
    double res_abs = std::abs(res_kronrod);
    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double dx = half * kKronrodNodes[jtw];
        f1[jtw] = f(centre - dx);
        f2[jtw] = f(centre + dx);
        res_gauss += kGaussWeights[j] * (f1[jtw] + f2[jtw]);
        res_kronrod += kKronrodWeights[jtw] * (f1[jtw] + f2[jtw]);
        res_abs += kKronrodWeights[jtw] * (std::abs(f1[jtw]) + std::abs(f2[jtw]));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double dx = half * kKronrodNodes[jtwm1];
        f1[jtwm1] = f(centre - dx);
        f2[jtwm1] = f(centre + dx);
        res_kronrod += kKronrodWeights[jtwm1] * (f1[jtwm1] + f2[jtwm1]);
        res_abs += kKronrodWeights[jtwm1] * (std::abs(f1[jtwm1]) + std::abs(f2[jtwm1]));
    }
    const double mean = 0.5 * res_kronrod;
    double res_asc = kKronrodWeights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        res_asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    }
    res_abs *= abs_half;
    res_asc *= abs_half;

    double err = std::abs((res_kronrod - res_gauss) * half);
    if (res_asc != 0.0 && err != 0.0) {
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    }
    if (res_abs > uflow / (50.0 * epmach)) {
        err = std::max(epmach * 50.0 * res_abs, err);
    }
    return {a, b, res_kronrod * half, err};
}

}  // namespace detail

/// Integrates f over [lo, hi]. Interior breakpoints (unsorted, duplicates and
/// out-of-range values allowed) mark discontinuities or sharp features.
/// Never throws; callers inspect `converged`.
template <class F>
Result integrate(F&& f, double lo, double hi, std::span<const double> breakpoints,
                 double abs_tol, std::size_t max_intervals = 2000) {
    Result out;
    if (!(hi > lo)) {
        out.converged = true;
        return out;
    }

    std::vector<double> cuts{lo, hi};
    for (double x : breakpoints) {
        if (x > lo && x < hi) cuts.push_back(x);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<detail::Segment> heap;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto seg = detail::gauss_kronrod_15(f, cuts[i], cuts[i + 1]);
        total_error += seg.error;
        heap.push(seg);
    }

    while (total_error > abs_tol && heap.size() < max_intervals) {
        const detail::Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        // Stop refining once the interval can no longer be split in floating point.
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop();
        auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Sum in left-to-right order so the result is independent of heap layout.
    std::vector<detail::Segment> segments;
    segments.reserve(heap.size());
    while (!heap.empty()) {
        segments.push_back(heap.top());
        heap.pop();
    }
    std::sort(segments.begin(), segments.end(),
              [](const auto& x, const auto& y) { return x.a < y.a; });
    double error = 0.0;
    for (const auto& s : segments) {
        out.value += s.value;
        error += s.error;
    }
    out.abs_error = error;
    out.intervals = segments.size();
    out.converged = error <= abs_tol;
    return out;
}

}  // namespace gaussalloc::quadrature
