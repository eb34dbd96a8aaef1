#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "gaussalloc/seeding.hpp"

namespace gaussalloc {

/// Rows per independently seeded chunk. Chunk c draws from an engine seeded
/// with derive_seed(seed, c), so any partition of chunks across workers gives
/// the same samples, and reductions merge in chunk order.
inline constexpr std::size_t kChunkRows = std::size_t{1} << 14;

/// Welford mean/variance accumulator with Chan's pairwise merge.
class RunningStats {
public:
    void add(double x) noexcept {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const RunningStats& other) noexcept {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double n1 = static_cast<double>(count_);
        const double n2 = static_cast<double>(other.count_);
        const double delta = other.mean_ - mean_;
        const double n = n1 + n2;
        mean_ += delta * n2 / n;
        m2_ += other.m2_ + delta * delta * n1 * n2 / n;
        count_ += other.count_;
    }

    /// Accumulator holding `count` values with the given mean and sum of
    /// squared deviations.
    static RunningStats from_moments(std::uint64_t count, double mean, double m2) noexcept {
        RunningStats r;
        r.count_ = count;
        r.mean_ = mean;
        r.m2_ = m2;
        return r;
    }

    std::uint64_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept {
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    }
    /// Normal-approximation 95% half-width, 1.96 * s / sqrt(N).
    double half_width_95() const noexcept {
        return count_ > 1 ? 1.96 * std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Calls fn(row_index, z) for `rows` standard-normal vectors z of length dim,
/// in row order. Normals come from Boost's ziggurat sampler over mt19937_64.
template <class RowFn>
void for_each_normal_row(std::uint64_t rows, std::size_t dim, std::uint64_t seed, RowFn&& fn) {
    std::vector<double> z(dim);
    const std::uint64_t chunks = (rows + kChunkRows - 1) / kChunkRows;
    for (std::uint64_t c = 0; c < chunks; ++c) {
        std::mt19937_64 engine(derive_seed(seed, c));
        boost::random::normal_distribution<double> normal;
        const std::uint64_t begin = c * kChunkRows;
        const std::uint64_t end = std::min<std::uint64_t>(rows, begin + kChunkRows);
        for (std::uint64_t r = begin; r < end; ++r) {
            for (auto& v : z) v = normal(engine);
            fn(r, std::span<const double>(z));
        }
    }
}

/// Mean and 95% CI of fn(z) over `samples` standard-normal vectors of length dim.
template <class SampleFn>
RunningStats monte_carlo_mean(std::uint64_t samples, std::size_t dim, std::uint64_t seed,
                              SampleFn&& fn) {
    // Within a chunk, sums are taken about the chunk's first value; chunks
    // then merge pairwise.
    RunningStats total;
    std::uint64_t n = 0;
    double shift = 0.0, sum = 0.0, sum_sq = 0.0;
    auto flush = [&] {
        if (n == 0) return;
        const double d = sum / static_cast<double>(n);
        total.merge(RunningStats::from_moments(n, shift + d,
                                               std::max(0.0, sum_sq - d * sum)));
        n = 0;
        sum = sum_sq = 0.0;
    };
    for_each_normal_row(samples, dim, seed, [&](std::uint64_t r, std::span<const double> z) {
        if (r % kChunkRows == 0) flush();
        const double x = fn(z);
        if (n == 0) shift = x;
        const double d = x - shift;
        sum += d;
        sum_sq += d * d;
        ++n;
    });
    flush();
    return total;
}

/// A fixed rows x cols matrix of standard normals, shared across allocation
/// comparisons so that their differences have low variance.
class NormalSampleMatrix {
public:
    NormalSampleMatrix() = default;
    NormalSampleMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed)
        : rows_(rows), cols_(cols), data_(rows * cols) {
        for_each_normal_row(rows, cols, seed, [&](std::uint64_t r, std::span<const double> z) {
            std::copy(z.begin(), z.end(), data_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
        });
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace gaussalloc
