#pragma once

// Expected maximum of Gaussian vectors: the objective every solver and
// verifier in this library is built on.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gaussalloc/instances.hpp"
#include "gaussalloc/sampling.hpp"

namespace gaussalloc {

enum class Method { automatic, closed_form, quadrature, monte_carlo };

std::string_view to_string(Method m) noexcept;
/// Accepts "auto", "closed_form", "quadrature", "monte_carlo".
Method method_from_string(std::string_view name);

struct EstimatorConfig {
    Method method = Method::automatic;
    double quadrature_tolerance = 1e-9;
    std::uint64_t mc_samples = 2'000'000;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument unless quadrature_tolerance > 0 and mc_samples >= 1000.
    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double half_width = 0.0;  // 95% CI; 0 for deterministic methods
    Method method_used = Method::closed_form;
};

/// Independent coordinates N(means[i], stddevs[i]^2); stddev 0 is a point mass.
class GaussianVector {
public:
    GaussianVector(std::vector<double> means, std::vector<double> stddevs);

    std::size_t size() const noexcept { return means_.size(); }
    const std::vector<double>& means() const noexcept { return means_; }
    const std::vector<double>& stddevs() const noexcept { return stddevs_; }

private:
    std::vector<double> means_;
    std::vector<double> stddevs_;
};

/// Mean vector plus a symmetric PSD covariance matrix. The matrix is
/// symmetrized on construction; smallest eigenvalue must be >= -1e-9 and
/// |S_ij| <= sqrt(S_ii S_jj) + 1e-12.
class CovarianceSpec {
public:
    static constexpr double kEigenTolerance = 1e-9;
    static constexpr double kRankTolerance = 1e-10;

    CovarianceSpec(std::vector<double> means, Eigen::MatrixXd matrix);
    /// Diagonal matrix with the given standard deviations.
    static CovarianceSpec diagonal(std::vector<double> means, std::span<const double> stddevs);

    std::size_t size() const noexcept { return means_.size(); }
    const std::vector<double>& means() const noexcept { return means_; }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    double trace() const { return matrix_.trace(); }
    bool is_diagonal() const;
    /// Number of strictly positive diagonal entries.
    std::size_t support_size() const;

    /// n x r factor L with L L^T = matrix up to the rank tolerance.
    const Eigen::MatrixXd& factor() const noexcept { return factor_; }

private:
    std::vector<double> means_;
    Eigen::MatrixXd matrix_;
    Eigen::MatrixXd factor_;
};

/// Diagonally pivoted Cholesky of a symmetric PSD matrix. Stops once the
/// largest remaining pivot is <= rank_tol * max(1, max diagonal), returning
/// an n x r factor. Throws FactorizationError on a pivot below -1e-9.
Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& sym, double rank_tol);

/// Smallest eigenvalue of a symmetric matrix (0 for an empty matrix).
double min_eigenvalue(const Eigen::MatrixXd& sym);

/// E[max(X, floor)] for X ~ N(mu, sigma^2):
/// floor*Phi(z) + mu*Phi(-z) + sigma*phi(z), z = (floor - mu)/sigma.
double expected_max_with_floor(double mu, double sigma, double floor);

/// E[max(X1, X2)] for independent normals; equals the floor form when one
/// sigma is zero and max(mu1, mu2) when both are.
double expected_max_pair(double mu1, double sigma1, double mu2, double sigma2);

/// E[max_i X_i]. `auto` uses a closed form when at most two coordinates or at
/// most one non-degenerate coordinate remain, else adaptive quadrature of the
/// tail-integral identity. Quadrature failures throw QuadratureError.
Estimate expected_max_independent(const GaussianVector& v, const EstimatorConfig& cfg);

/// E[max_i X_i] for X ~ N(mu, Sigma). `auto` and `monte_carlo` sample via the
/// pivoted factor; `closed_form` is available for n <= 2 (bivariate pair
/// formula with theta^2 = S11 + S22 - 2 S12); `quadrature` only for diagonal
/// matrices.
Estimate expected_max_correlated(const CovarianceSpec& c, const EstimatorConfig& cfg);

/// Sum over sets of E[max over the set]. Monte Carlo half-widths combine in
/// quadrature. Errors name the offending set index.
Estimate graph_objective(const Instance& inst, const AllocationVector& alloc,
                         const EstimatorConfig& cfg);

/// Monte Carlo over joint draws; every set maximum is taken on the same draw.
/// `closed_form`/`quadrature` requests are served set by set only when the
/// matrix is diagonal.
Estimate graph_objective_correlated(const Instance& inst, const CovarianceSpec& c,
                                    const EstimatorConfig& cfg);

/// Evaluates set maxima for many allocations of one instance against a single
/// fixed sample matrix (common random numbers), so comparisons between
/// allocations are low-variance and deterministic.
class SharedSampleEvaluator {
public:
    SharedSampleEvaluator(const Instance& inst, std::size_t samples, std::uint64_t seed);

    /// E[max_{i in set} (mu_i + sigma_i z_i)] over the shared samples.
    Estimate set_value(const IndexSet& set, std::span<const double> stddevs) const;

private:
    std::vector<double> means_;
    NormalSampleMatrix samples_;
};

}  // namespace gaussalloc
