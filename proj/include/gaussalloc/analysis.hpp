#pragma once

// Empirical checks of the structural inequalities behind the solvers, and
// the sweeps that produce the concavity and concentration curves.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaussalloc/gaussian_oracle.hpp"
#include "gaussalloc/instances.hpp"

namespace gaussalloc {

struct TrialRecord {
    std::size_t trial = 0;
    double parameter = 0.0;  // n, eps, k, ... depending on the claim
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;     // rhs - lhs; negative beyond tolerance is a violation
};

struct VerificationReport {
    std::string claim;
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;
    std::vector<TrialRecord> details;
    std::uint64_t seed = 0;
    /// Named aggregate statistics, e.g. the worst observed Lipschitz ratio.
    std::vector<std::pair<std::string, double>> summary;

    bool passed() const noexcept { return violations == 0; }
    /// Value of a summary entry; throws InvalidArgument when absent.
    double stat(std::string_view name) const;
};

struct SweepRow {
    double parameter = 0.0;
    std::string statistic;
    double value = 0.0;
    double ci_half_width = 0.0;

    bool operator==(const SweepRow&) const = default;
};

/// Rows of (parameter, statistic, value, ci_half_width). Within each
/// statistic the parameter points are strictly increasing.
class SweepTable {
public:
    /// Throws InvalidArgument when the parameter does not exceed the previous
    /// one of the same statistic, or the statistic name contains a comma,
    /// quote or line break.
    void add(double parameter, std::string statistic, double value, double ci_half_width = 0.0);

    const std::vector<SweepRow>& rows() const noexcept { return rows_; }
    bool empty() const noexcept { return rows_.empty(); }
    /// Rows of one statistic, in insertion order.
    std::vector<SweepRow> series(std::string_view statistic) const;

    bool operator==(const SweepTable&) const = default;

private:
    std::vector<SweepRow> rows_;
};

// ---------------------------------------------------------------------------
// Lemma checks. Every trial draws from its own engine seeded by
// derive_seed(derive_seed(seed, claim), trial).

/// For each eps: the adversarial profile floor(1/eps^2) variables at variance
/// eps^2 plus `trials` random profiles of n_per_trial variables with
/// variances <= eps^2 and total <= 1. measured(eps) is the largest
/// E max(0, Y) seen; C(eps) = measured / (eps sqrt(ln(1/eps))).
/// A grid point is a violation when C(eps) > 2 min C. Summary holds
/// "C(<eps>)" per grid point and "ratio" = max C / min C.
VerificationReport verify_eps_contribution(const std::vector<double>& eps_grid,
                                           std::size_t n_per_trial, std::size_t trials,
                                           std::uint64_t seed);

/// |E max X - E max Y| <= C sum|sigma_i - sigma'_i| with C = 2 on random
/// means in [0, 1] and feasible sigma, sigma'. Summary "worst_ratio".
VerificationReport verify_lipschitz(std::size_t trials, std::size_t n, std::uint64_t seed,
                                    double constant = 2.0);

/// E max X >= (1 - 2^(1-n)) E max(0, X) for independent X with means >= 0,
/// n drawn uniformly from [n_min, n_max].
VerificationReport verify_max_floor_bound(std::size_t trials, std::size_t n_min,
                                          std::size_t n_max, std::uint64_t seed);

/// Zero means, sigma'_i = c_i sigma_i with c_i in [1, 2]:
/// E max X <= E max X' <= 2 E max X. n drawn from [2, n].
VerificationReport verify_var2approx(std::size_t trials, std::size_t n, std::uint64_t seed);

/// Random trace-normalized PSD matrices and means in [0, 1]:
/// E max(correlated) <= 2e/(e-1) E max(independent, same marginals) + CI.
/// The left side is Monte Carlo with mc_samples draws, the right side exact.
VerificationReport verify_correlation_gap(std::size_t trials, std::size_t n,
                                          std::uint64_t mc_samples, std::uint64_t seed);

inline constexpr double kCorrelationGap = 3.1639534;

/// g(k) = E max(0, X_1..X_k) for iid standard normals, k = 0..k_max.
std::vector<double> g_values(std::size_t k_max);

/// g(k+1) - g(k) <= g(k) - g(k-1) + 1e-9 for k = 1..k_max-1; the
/// increments must also stay positive. Summary "g(k)" per k.
VerificationReport verify_submodular_g(std::size_t k_max);

/// max(a,b) + max(a,c) >= max(a,b,c) + a and
/// 3 max(a,b,c,d) + max(a,d) + max(b,d) + max(c,d)
///   <= 2 max(a,b,d) + 2 max(a,c,d) + 2 max(b,c,d)
/// on fuzzed tuples with ties and extreme magnitudes. Each trial checks both.
VerificationReport verify_max_inequalities(std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Concavity of the per-set objective on the complete k-subset instances.

struct NamedAllocation {
    std::string name;
    std::vector<double> stddevs;
};

/// Uniform on the first s variables for s = 1..n, a geometric profile and
/// `random_count` random profiles, all with sum(sigma^2) = 1.
std::vector<NamedAllocation> concavity_candidates(std::size_t n, std::size_t random_count,
                                                  std::uint64_t seed);

/// f(k) = OBJ(I_k, sigma) / C(n, k) for k = 1..n with zero means, by exact
/// enumeration of the k-subsets (same guard as complete_k_subsets_instance).
/// Rows: (k, "f", f(k)) and, for k >= 3, (k, "margin", f(k) + f(k-2) - 2 f(k-1)).
SweepTable concavity_curve(std::size_t n, const AllocationVector& alloc,
                           const EstimatorConfig& cfg);

/// Figure-style correlated variant: consecutive pairs (0,1), (2,3), ... form
/// 2x2 blocks with covariance sign * sigma_a sigma_b (a perfectly correlated
/// or anti-correlated pair). f(k) is estimated by Monte Carlo on one sample
/// matrix shared by all k. Same row layout as concavity_curve.
SweepTable concavity_curve_correlated(std::size_t n, const AllocationVector& alloc, int sign,
                                      const EstimatorConfig& cfg);

struct ConcavitySweep {
    SweepTable table;  // "f[name]", "margin[name]", "f_max", "margin_max"
    VerificationReport report;
};

/// Runs concavity_curve for every candidate and both correlated block
/// variants of the uniform candidate. The report counts candidate margins
/// above 1e-6 (per-sigma concavity); the margins of the per-k maximum are
/// recorded in the summary as "worst_margin_max" without counting as
/// violations.
ConcavitySweep concavity_sweep(std::size_t n, const std::vector<NamedAllocation>& candidates,
                               const EstimatorConfig& cfg);

// ---------------------------------------------------------------------------
// Concentration of the greedy allocation on random set systems.

/// For each p: log_approx_graph on erdos_renyi_instance(n, m, p, s) for every
/// s in seeds. Rows per p: "count" (mean number of variables with
/// sigma^2 >= c p, with CI), "max_variance" and "var_rank_<r>" (mean r-th
/// largest variance).
SweepTable concentration_profile(std::size_t n, std::size_t m, const std::vector<double>& p_grid,
                                 const std::vector<std::uint64_t>& seeds,
                                 const EstimatorConfig& cfg, double c = 0.25);

/// Number of adjacent increases in `values` and how many of them exceed the
/// combined half-widths of the two points.
struct InversionCount {
    std::size_t total = 0;
    std::size_t beyond_ci = 0;
};
InversionCount count_inversions(const std::vector<SweepRow>& series);

// ---------------------------------------------------------------------------

/// Every lemma check with its default size at the given seed.
std::vector<VerificationReport> run_all_verifications(std::uint64_t seed);

/// Names accepted by run_verification: eps-contribution, lipschitz,
/// max-floor, var2approx, correlation-gap, submodular-g, max-inequalities,
/// concavity.
const std::vector<std::string>& verification_claims();
VerificationReport run_verification(std::string_view claim, std::uint64_t seed);

/// CSV with header parameter,statistic,value,ci_half_width, LF line endings
/// and shortest round-trip floats.
std::string format_sweep_csv(const SweepTable& table);
SweepTable parse_sweep_csv(std::string_view text);
/// Writes format_sweep_csv(table) to path; throws Error on I/O failure.
void emit_sweep_csv(const SweepTable& table, const std::filesystem::path& path);

/// Shortest decimal that parses back to the same double.
std::string shortest_decimal(double x);

}  // namespace gaussalloc
