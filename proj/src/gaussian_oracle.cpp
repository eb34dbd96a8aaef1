#include "gaussalloc/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gaussalloc/errors.hpp"
#include "gaussalloc/normal.hpp"
#include "gaussalloc/quadrature.hpp"
#include "gaussalloc/seeding.hpp"

namespace gaussalloc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Integration range reaches this many standard deviations past every mean.
constexpr double kTruncationSigmas = 10.0;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be finite");
}

// Ranks methods so a sum of estimates reports the least exact one used.
int exactness_rank(Method m) {
    switch (m) {
        case Method::closed_form: return 0;
        case Method::quadrature: return 1;
        case Method::monte_carlo: return 2;
        case Method::automatic: return 0;
    }
    return 0;
}

Method least_exact(Method a, Method b) { return exactness_rank(a) >= exactness_rank(b) ? a : b; }

double pair_formula(double mu1, double mu2, double theta) {
    if (theta <= 0.0) return std::max(mu1, mu2);
    const double z = (mu1 - mu2) / theta;
    return mu1 * normal_cdf(z) + mu2 * normal_cdf(-z) + theta * normal_pdf(z);
}

struct Split {
    std::vector<double> means;   // non-degenerate coordinates
    std::vector<double> sigmas;
    double floor = kNegInf;      // max over point masses
};

Split split_degenerate(const GaussianVector& v) {
    Split s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v.stddevs()[i] > 0.0) {
            s.means.push_back(v.means()[i]);
            s.sigmas.push_back(v.stddevs()[i]);
        } else {
            s.floor = std::max(s.floor, v.means()[i]);
        }
    }
    return s;
}

bool has_closed_form(const GaussianVector& v, const Split& s) {
    return v.size() <= 2 || s.means.size() <= 1;
}

double closed_form_independent(const GaussianVector& v, const Split& s) {
    if (s.means.empty()) return s.floor;
    if (s.means.size() == 1) {
        if (s.floor == kNegInf) return s.means[0];
        return expected_max_with_floor(s.means[0], s.sigmas[0], s.floor);
    }
    // Two non-degenerate coordinates and nothing else.
    return expected_max_pair(v.means()[0], v.stddevs()[0], v.means()[1], v.stddevs()[1]);
}

// E[max] = a + int_a^inf (1 - P(t)) dt - int_-inf^a P(t) dt for any a, with
// P the product of coordinate CDFs. Taking a = max_i(mu_i - 10 sigma_i) makes
// the last term negligible and P is ~1 beyond max_i(mu_i + 10 sigma_i).
Estimate quadrature_independent(const GaussianVector& v, double tolerance) {
    const auto& mu = v.means();
    const auto& sd = v.stddevs();
    const std::size_t n = v.size();

    double lo = kNegInf;
    double hi = kNegInf;
    std::size_t lo_arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = mu[i] - kTruncationSigmas * sd[i];
        if (a > lo) {
            lo = a;
            lo_arg = i;
        }
        hi = std::max(hi, mu[i] + kTruncationSigmas * sd[i]);
    }

    // Point masses first: they zero the product below their location.
    std::vector<double> step_at;
    std::vector<double> centre;
    std::vector<double> inv_sigma;
    for (std::size_t i = 0; i < n; ++i) {
        if (sd[i] > 0.0) {
            centre.push_back(mu[i]);
            inv_sigma.push_back(1.0 / sd[i]);
        } else {
            step_at.push_back(mu[i]);
        }
    }
    auto one_minus_product = [&](double t) {
        for (double s : step_at) {
            if (t < s) return 1.0;
        }
        double p = 1.0;
        for (std::size_t k = 0; k < centre.size(); ++k) {
            p *= normal_cdf((t - centre[k]) * inv_sigma[k]);
        }
        return 1.0 - p;
    };

    std::vector<double> breaks(mu.begin(), mu.end());
    breaks.push_back(0.0);
    const auto res = quadrature::integrate(one_minus_product, lo, hi, breaks, tolerance);

    // Analytic bounds on the discarded tails.
    double tail = sd[lo_arg] * normal_lower_partial_expectation(kTruncationSigmas);
    for (std::size_t i = 0; i < n; ++i) {
        if (sd[i] > 0.0) tail += sd[i] * normal_lower_partial_expectation((hi - mu[i]) / sd[i]);
    }

    const double value = lo + res.value;
    if (!res.converged || res.abs_error + tail > tolerance) {
        throw QuadratureError("quadrature did not reach tolerance " + std::to_string(tolerance) +
                                  " (error estimate " + std::to_string(res.abs_error + tail) + ")",
                              value, res.abs_error + tail);
    }
    return {value, 0.0, Method::quadrature};
}

Estimate monte_carlo_independent(const Split& s, const EstimatorConfig& cfg) {
    if (s.means.empty()) return {s.floor, 0.0, Method::monte_carlo};
    const auto stats = monte_carlo_mean(cfg.mc_samples, s.means.size(), cfg.seed,
                                        [&](std::span<const double> z) {
                                            double m = s.floor;
                                            for (std::size_t k = 0; k < z.size(); ++k) {
                                                m = std::max(m, s.means[k] + s.sigmas[k] * z[k]);
                                            }
                                            return m;
                                        });
    return {stats.mean(), stats.half_width_95(), Method::monte_carlo};
}

std::vector<double> diagonal_stddevs(const CovarianceSpec& c) {
    std::vector<double> sd(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) sd[i] = std::sqrt(std::max(0.0, c.matrix()(i, i)));
    return sd;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::automatic: return "auto";
        case Method::closed_form: return "closed_form";
        case Method::quadrature: return "quadrature";
        case Method::monte_carlo: return "monte_carlo";
    }
    return "auto";
}

Method method_from_string(std::string_view name) {
    if (name == "auto") return Method::automatic;
    if (name == "closed_form") return Method::closed_form;
    if (name == "quadrature") return Method::quadrature;
    if (name == "monte_carlo") return Method::monte_carlo;
    throw InvalidArgument("unknown estimator method '" + std::string(name) + "'");
}

void EstimatorConfig::validate() const {
    if (!(quadrature_tolerance > 0.0)) throw InvalidArgument("quadrature_tolerance must be > 0");
    if (mc_samples < 1000) throw InvalidArgument("mc_samples must be >= 1000");
}

GaussianVector::GaussianVector(std::vector<double> means, std::vector<double> stddevs)
    : means_(std::move(means)), stddevs_(std::move(stddevs)) {
    if (means_.empty()) throw InvalidArgument("GaussianVector needs at least one coordinate");
    if (means_.size() != stddevs_.size()) {
        throw InvalidArgument("means and stddevs differ in length");
    }
    for (std::size_t i = 0; i < means_.size(); ++i) {
        require_finite(means_[i], "mean");
        require_finite(stddevs_[i], "stddev");
        if (stddevs_[i] < 0.0) {
            throw InvalidArgument("stddevs[" + std::to_string(i) + "] is negative");
        }
    }
}

// ---------------------------------------------------------------------------
// Covariance handling

double min_eigenvalue(const Eigen::MatrixXd& sym) {
    if (sym.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& sym, double rank_tol) {
    const Eigen::Index n = sym.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd residual = sym.diagonal();
    std::vector<bool> pivoted(static_cast<std::size_t>(n), false);
    const double scale = std::max(1.0, n > 0 ? residual.maxCoeff() : 0.0);

    Eigen::Index rank = 0;
    while (rank < n) {
        Eigen::Index piv = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!pivoted[static_cast<std::size_t>(i)] && (piv < 0 || residual(i) > residual(piv))) {
                piv = i;
            }
        }
        if (residual(piv) <= rank_tol * scale) break;
        const double root = std::sqrt(residual(piv));
        l(piv, rank) = root;
        pivoted[static_cast<std::size_t>(piv)] = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (pivoted[static_cast<std::size_t>(i)]) continue;
            double s = sym(i, piv);
            for (Eigen::Index q = 0; q < rank; ++q) s -= l(i, q) * l(piv, q);
            l(i, rank) = s / root;
            residual(i) -= l(i, rank) * l(i, rank);
        }
        ++rank;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!pivoted[static_cast<std::size_t>(i)] &&
            residual(i) < -CovarianceSpec::kEigenTolerance * scale) {
            throw FactorizationError("matrix is not positive semidefinite (residual pivot " +
                                     std::to_string(residual(i)) + ")");
        }
    }
    return l.leftCols(rank);
}

CovarianceSpec::CovarianceSpec(std::vector<double> means, Eigen::MatrixXd matrix)
    : means_(std::move(means)), matrix_(std::move(matrix)) {
    const auto n = static_cast<Eigen::Index>(means_.size());
    if (n == 0) throw InvalidArgument("CovarianceSpec needs at least one coordinate");
    if (matrix_.rows() != n || matrix_.cols() != n) {
        throw InvalidArgument("covariance matrix must be " + std::to_string(n) + "x" +
                              std::to_string(n));
    }
    for (double m : means_) require_finite(m, "mean");
    if (!matrix_.allFinite()) throw InvalidArgument("covariance matrix must be finite");

    matrix_ = 0.5 * (matrix_ + matrix_.transpose()).eval();
    const double lambda_min = min_eigenvalue(matrix_);
    if (lambda_min < -kEigenTolerance) {
        throw InvalidArgument("covariance matrix is not PSD (smallest eigenvalue " +
                              std::to_string(lambda_min) + ")");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double bound =
                std::sqrt(std::max(0.0, matrix_(i, i)) * std::max(0.0, matrix_(j, j))) + 1e-12;
            if (std::abs(matrix_(i, j)) > bound) {
                throw InvalidArgument("covariance entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") violates Cauchy-Schwarz");
            }
        }
    }
    factor_ = pivoted_cholesky(matrix_, kRankTolerance);
}

CovarianceSpec CovarianceSpec::diagonal(std::vector<double> means,
                                        std::span<const double> stddevs) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(stddevs.size()),
                                              static_cast<Eigen::Index>(stddevs.size()));
    for (std::size_t i = 0; i < stddevs.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        m(k, k) = stddevs[i] * stddevs[i];
    }
    return CovarianceSpec(std::move(means), std::move(m));
}

bool CovarianceSpec::is_diagonal() const {
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
            if (i != j && matrix_(i, j) != 0.0) return false;
        }
    }
    return true;
}

std::size_t CovarianceSpec::support_size() const {
    std::size_t s = 0;
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i) s += matrix_(i, i) > 0.0 ? 1 : 0;
    return s;
}

// ---------------------------------------------------------------------------
// Closed forms

double expected_max_with_floor(double mu, double sigma, double floor) {
    require_finite(mu, "mu");
    require_finite(sigma, "sigma");
    require_finite(floor, "floor");
    if (sigma < 0.0) throw InvalidArgument("sigma must be non-negative");
    if (sigma == 0.0) return std::max(mu, floor);
    const double z = (floor - mu) / sigma;
    return floor * normal_cdf(z) + mu * normal_cdf(-z) + sigma * normal_pdf(z);
}

double expected_max_pair(double mu1, double sigma1, double mu2, double sigma2) {
    require_finite(mu1, "mu1");
    require_finite(mu2, "mu2");
    require_finite(sigma1, "sigma1");
    require_finite(sigma2, "sigma2");
    if (sigma1 < 0.0 || sigma2 < 0.0) throw InvalidArgument("sigmas must be non-negative");
    if (sigma1 == 0.0 && sigma2 == 0.0) return std::max(mu1, mu2);
    if (sigma2 == 0.0) return expected_max_with_floor(mu1, sigma1, mu2);
    if (sigma1 == 0.0) return expected_max_with_floor(mu2, sigma2, mu1);
    return pair_formula(mu1, mu2, std::hypot(sigma1, sigma2));
}

// ---------------------------------------------------------------------------
// Estimators

Estimate expected_max_independent(const GaussianVector& v, const EstimatorConfig& cfg) {
    cfg.validate();
    const Split s = split_degenerate(v);
    switch (cfg.method) {
        case Method::automatic:
            if (has_closed_form(v, s)) return {closed_form_independent(v, s), 0.0, Method::closed_form};
            return quadrature_independent(v, cfg.quadrature_tolerance);
        case Method::closed_form:
            if (!has_closed_form(v, s)) {
                throw InvalidArgument("no closed form for " + std::to_string(s.means.size()) +
                                      " non-degenerate coordinates");
            }
            return {closed_form_independent(v, s), 0.0, Method::closed_form};
        case Method::quadrature:
            return quadrature_independent(v, cfg.quadrature_tolerance);
        case Method::monte_carlo:
            return monte_carlo_independent(s, cfg);
    }
    throw InvalidArgument("unknown method");
}

Estimate expected_max_correlated(const CovarianceSpec& c, const EstimatorConfig& cfg) {
    cfg.validate();
    const auto& mu = c.means();
    switch (cfg.method) {
        case Method::closed_form: {
            if (c.size() > 2) throw InvalidArgument("correlated closed form needs n <= 2");
            if (c.size() == 1) return {mu[0], 0.0, Method::closed_form};
            const auto& m = c.matrix();
            const double theta2 = std::max(0.0, m(0, 0) + m(1, 1) - 2.0 * m(0, 1));
            return {pair_formula(mu[0], mu[1], std::sqrt(theta2)), 0.0, Method::closed_form};
        }
        case Method::quadrature: {
            if (!c.is_diagonal()) throw InvalidArgument("quadrature needs a diagonal covariance");
            EstimatorConfig q = cfg;
            return expected_max_independent(GaussianVector(mu, diagonal_stddevs(c)), q);
        }
        case Method::automatic:
        case Method::monte_carlo:
            break;
    }

    const Eigen::MatrixXd& l = c.factor();
    const auto n = static_cast<Eigen::Index>(c.size());
    if (l.cols() == 0) {
        return {*std::max_element(mu.begin(), mu.end()), 0.0, Method::monte_carlo};
    }
    const auto stats = monte_carlo_mean(
        cfg.mc_samples, static_cast<std::size_t>(l.cols()), cfg.seed,
        [&](std::span<const double> z) {
            const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
            double best = kNegInf;
            for (Eigen::Index i = 0; i < n; ++i) {
                best = std::max(best, mu[static_cast<std::size_t>(i)] + l.row(i).dot(zv));
            }
            return best;
        });
    return {stats.mean(), stats.half_width_95(), Method::monte_carlo};
}

Estimate graph_objective(const Instance& inst, const AllocationVector& alloc,
                         const EstimatorConfig& cfg) {
    cfg.validate();
    if (alloc.size() != inst.n()) {
        throw InvalidArgument("allocation has " + std::to_string(alloc.size()) +
                              " entries, instance has " + std::to_string(inst.n()));
    }
    Estimate total{0.0, 0.0, Method::closed_form};
    double var_sum = 0.0;
    for (std::size_t j = 0; j < inst.m(); ++j) {
        const auto& set = inst.set(j);
        std::vector<double> mu;
        std::vector<double> sd;
        mu.reserve(set.size());
        sd.reserve(set.size());
        for (auto i : set) {
            mu.push_back(inst.means()[i]);
            sd.push_back(alloc[i]);
        }
        EstimatorConfig set_cfg = cfg;
        set_cfg.seed = derive_seed(cfg.seed, j);
        Estimate e;
        try {
            e = expected_max_independent(GaussianVector(std::move(mu), std::move(sd)), set_cfg);
        } catch (const QuadratureError& err) {
            throw QuadratureError("set " + std::to_string(j) + ": " + err.what(),
                                  err.best_estimate(), err.error_estimate());
        } catch (const InvalidArgument& err) {
            throw InvalidArgument("set " + std::to_string(j) + ": " + err.what());
        }
        total.value += e.value;
        var_sum += e.half_width * e.half_width;
        total.method_used = least_exact(total.method_used, e.method_used);
    }
    total.half_width = std::sqrt(var_sum);
    return total;
}

Estimate graph_objective_correlated(const Instance& inst, const CovarianceSpec& c,
                                    const EstimatorConfig& cfg) {
    cfg.validate();
    if (c.size() != inst.n()) {
        throw InvalidArgument("covariance dimension " + std::to_string(c.size()) +
                              " does not match instance n = " + std::to_string(inst.n()));
    }
    if (cfg.method == Method::closed_form || cfg.method == Method::quadrature) {
        if (!c.is_diagonal()) {
            throw InvalidArgument(std::string(to_string(cfg.method)) +
                                  " needs a diagonal covariance");
        }
        return graph_objective(inst, AllocationVector(diagonal_stddevs(c)), cfg);
    }

    const Eigen::MatrixXd& l = c.factor();
    const auto& mu = inst.means();
    if (l.cols() == 0) {
        double v = 0.0;
        for (const auto& set : inst.sets()) {
            double best = kNegInf;
            for (auto i : set) best = std::max(best, mu[i]);
            v += best;
        }
        return {v, 0.0, Method::monte_carlo};
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(inst.n()));
    const auto stats = monte_carlo_mean(
        cfg.mc_samples, static_cast<std::size_t>(l.cols()), cfg.seed,
        [&](std::span<const double> z) {
            const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
            x.noalias() = l * zv;
            double total = 0.0;
            for (const auto& set : inst.sets()) {
                double best = kNegInf;
                for (auto i : set) best = std::max(best, mu[i] + x(static_cast<Eigen::Index>(i)));
                total += best;
            }
            return total;
        });
    return {stats.mean(), stats.half_width_95(), Method::monte_carlo};
}

SharedSampleEvaluator::SharedSampleEvaluator(const Instance& inst, std::size_t samples,
                                             std::uint64_t seed)
    : means_(inst.means()), samples_(samples, inst.n(), seed) {}

Estimate SharedSampleEvaluator::set_value(const IndexSet& set,
                                          std::span<const double> stddevs) const {
    // A single Gaussian's expected maximum is its mean; skip the sampling noise.
    if (set.size() == 1) return {means_[set[0]], 0.0, Method::monte_carlo};
    RunningStats stats;
    for (std::size_t r = 0; r < samples_.rows(); ++r) {
        const auto z = samples_.row(r);
        double best = kNegInf;
        for (auto i : set) best = std::max(best, means_[i] + stddevs[i] * z[i]);
        stats.add(best);
    }
    return {stats.mean(), stats.half_width_95(), Method::monte_carlo};
}

}  // namespace gaussalloc
