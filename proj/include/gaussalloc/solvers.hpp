#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "gaussalloc/gaussian_oracle.hpp"
#include "gaussalloc/instances.hpp"

namespace gaussalloc {

enum class Algorithm { ptas_independent, ptas_correlated, log_approx, brute_force, uniform };

std::string_view to_string(Algorithm a) noexcept;

struct SolverLimits {
    /// Upper bound on candidate allocations a grid search may evaluate.
    std::uint64_t node_budget = 5'000'000;
};

using Allocation = std::variant<AllocationVector, CovarianceSpec>;

struct SolveReport {
    Allocation allocation;
    Estimate objective;
    Algorithm algorithm = Algorithm::uniform;
    std::optional<double> eps;
    std::optional<double> grid_step;
    std::size_t support_size = 0;
    std::chrono::duration<double> elapsed{};
    std::uint64_t seed = 0;
    std::uint64_t nodes_evaluated = 0;
    EstimatorConfig config;
    /// Seed of the estimate in `objective` (derived from `seed` when the
    /// objective was re-estimated after the search).
    std::uint64_t objective_seed = 0;
};

/// Grid search over allocations supported on at most ceil(1/eps^2) variables
/// of the single set, each sigma a positive multiple of grid_step (default
/// eps^3) and sum(sigma^2) <= 1. Returns the first best candidate in
/// (support size, support, sigma) lexicographic order.
/// Requires m == 1. Throws BudgetExceeded before evaluating anything when the
/// grid holds more than limits.node_budget candidates.
SolveReport ptas_independent(const Instance& inst, double eps, const EstimatorConfig& cfg,
                             std::optional<double> grid_step = std::nullopt,
                             SolverLimits limits = {});

/// Grid search over covariance matrices supported on at most ceil(1/eps^2)
/// variables of the single set. Entries are multiples of grid_step (default
/// eps^3): variances positive with trace <= 1, covariances within the
/// Cauchy-Schwarz bound; non-PSD candidates are skipped. Candidates are
/// compared by Monte Carlo on one shared sample matrix; the reported objective
/// comes from a fresh, larger sample.
SolveReport ptas_correlated(const Instance& inst, double eps, std::optional<double> grid_step,
                            const EstimatorConfig& cfg, SolverLimits limits = {});

/// One greedy step of the logarithmic approximation.
struct LogApproxStep {
    std::size_t round = 0;         // k: variance level 4^-k
    std::size_t step = 0;          // variables placed so far in this round, after this step
    std::size_t variable = 0;      // index given variance 4^-k
    double objective = 0.0;        // working objective after the step (singletons removed)
    double variance_sum = 0.0;     // sum of sigma^2 after the step
};

/// Logarithmic approximation for the multi-set problem. Singleton sets are
/// dropped from the working objective; for k = 0..floor(log2 n) the greedy
/// places variance 4^-k on min(4^k, n) variables one at a time (ties to the
/// lowest index); the best round wins. The reported objective is taken on the
/// original instance, singletons included.
SolveReport log_approx_graph(const Instance& inst, const EstimatorConfig& cfg,
                             const std::function<void(const LogApproxStep&)>& observer = {});

struct GreedyResult {
    std::vector<std::size_t> chosen;  // in selection order
    AllocationVector allocation;
    Estimate objective;
};

/// Greedy for the fixed-variance set function: give variance `variance_level`
/// to up to `cardinality` variables, each time the one with the largest
/// marginal gain, stopping early once no gain is positive.
GreedyResult greedy_fixed_variance(const Instance& inst, double variance_level,
                                   std::size_t cardinality, const EstimatorConfig& cfg);

/// Exhaustive search over every sigma vector with entries that are multiples
/// of grid_step and sum(sigma^2) <= 1, using a deterministic objective
/// (a monte_carlo method in cfg is replaced by auto).
SolveReport brute_force_grid(const Instance& inst, double grid_step, const EstimatorConfig& cfg,
                             std::uint64_t budget = 10'000'000);

/// sigma_i = 1/sqrt(n) for every variable.
AllocationVector uniform_allocation(const Instance& inst);

/// uniform_allocation wrapped in a report with its objective.
SolveReport solve_uniform(const Instance& inst, const EstimatorConfig& cfg);

/// Number of vectors in N^dims (or (N+)^dims when `positive`) whose squared
/// entries sum to at most `radius_sq`. Exact up to radius_sq = 2e5, volume
/// estimate beyond.
double count_lattice_points(std::size_t dims, std::uint64_t radius_sq, bool positive);

}  // namespace gaussalloc
