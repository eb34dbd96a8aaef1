#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gaussalloc {

using IndexSet = std::vector<std::size_t>;

/// Non-negative means for n variables plus m index sets over them.
/// Every set is non-empty, sorted ascending, duplicate-free and in range.
class Instance {
public:
    /// Throws InvalidArgument naming the offending field ("means[i]", "sets[j]").
    Instance(std::vector<double> means, std::vector<IndexSet> sets);

    std::size_t n() const noexcept { return means_.size(); }
    std::size_t m() const noexcept { return sets_.size(); }
    const std::vector<double>& means() const noexcept { return means_; }
    const std::vector<IndexSet>& sets() const noexcept { return sets_; }
    const IndexSet& set(std::size_t j) const { return sets_.at(j); }

    /// Indices j of the sets containing variable i, ascending.
    std::vector<std::size_t> sets_containing(std::size_t i) const;

    bool operator==(const Instance&) const = default;

private:
    std::vector<double> means_;
    std::vector<IndexSet> sets_;
};

/// Per-variable standard deviations under the shared budget sum(sigma^2) <= 1.
class AllocationVector {
public:
    static constexpr double kBudgetTolerance = 1e-9;

    explicit AllocationVector(std::vector<double> stddevs);
    static AllocationVector zeros(std::size_t n) { return AllocationVector(std::vector<double>(n)); }

    std::size_t size() const noexcept { return stddevs_.size(); }
    const std::vector<double>& stddevs() const noexcept { return stddevs_; }
    double operator[](std::size_t i) const { return stddevs_.at(i); }
    double variance_sum() const noexcept;
    std::size_t support_size() const noexcept;

    bool operator==(const AllocationVector&) const = default;

private:
    std::vector<double> stddevs_;
};

/// Each membership (i, j) is drawn independently with probability p. A set
/// that comes out empty is redrawn (at most 10^4 times, else InvalidArgument);
/// the number of redraws is written to `resamples` when given. Means are 0.
Instance erdos_renyi_instance(std::size_t n, std::size_t m, double p, std::uint64_t seed,
                              std::size_t* resamples = nullptr);

/// n sets {j, (j+1) mod n}, all means equal to mu.
Instance cycle_instance(std::size_t n, double mu);

/// Every k-subset of {0..n-1} as a set, zero means. Rejects C(n,k) > 10^6.
Instance complete_k_subsets_instance(std::size_t n, std::size_t k);

/// JSON instance document {"n": int, "means": [float], "sets": [[int]]}.
/// Throws ParseError with the offending field path.
Instance parse_instance(std::string_view text);
std::string serialize_instance(const Instance& inst);

/// Exact binomial coefficient, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

}  // namespace gaussalloc
