#include "gaussalloc/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "gaussalloc/errors.hpp"
#include "gaussalloc/seeding.hpp"
#include "gaussalloc/solvers.hpp"

namespace gaussalloc {

namespace {

constexpr double kQuadratureSlack = 1e-8;
constexpr double kConcavityTolerance = 1e-6;

using Engine = std::mt19937_64;

Engine trial_engine(std::uint64_t seed, std::string_view claim, std::size_t trial) {
    return Engine(derive_seed(derive_seed(seed, claim), trial));
}

double uniform(Engine& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(Engine& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(Engine& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// E max_i X_i by the deterministic oracle.
double emax(std::vector<double> mu, std::vector<double> sd) {
    return expected_max_independent(GaussianVector(std::move(mu), std::move(sd)), EstimatorConfig{})
        .value;
}

// E max(0, X_1, ..., X_n).
double emax_floor0(std::vector<double> mu, std::vector<double> sd) {
    mu.push_back(0.0);
    sd.push_back(0.0);
    return emax(std::move(mu), std::move(sd));
}

// Random stddevs with about a quarter of the entries zero and
// sum(sigma^2) uniform in [0.25, 1].
std::vector<double> random_profile(Engine& rng, std::size_t n) {
    std::vector<double> u(n);
    double sq = 0.0;
    for (auto& x : u) {
        x = coin(rng, 0.25) ? 0.0 : uniform(rng, 0.0, 1.0);
        sq += x * x;
    }
    if (sq == 0.0) {
        u[0] = 1.0;
        sq = 1.0;
    }
    const double scale = std::sqrt(uniform(rng, 0.25, 1.0) / sq);
    for (auto& x : u) x *= scale;
    return u;
}

std::vector<double> random_means(Engine& rng, std::size_t n) {
    std::vector<double> mu(n);
    for (auto& x : mu) x = coin(rng, 0.5) ? 0.0 : uniform(rng, 0.0, 1.0);
    return mu;
}

void record(VerificationReport& r, TrialRecord rec, double tolerance) {
    if (r.details.empty() || rec.margin < r.worst_margin) r.worst_margin = rec.margin;
    if (rec.margin < -tolerance) ++r.violations;
    r.details.push_back(rec);
}

VerificationReport new_report(std::string claim) {
    VerificationReport r;
    r.claim = std::move(claim);
    return r;
}

std::string eps_label(double eps) { return "C(" + shortest_decimal(eps) + ")"; }

}  // namespace

double VerificationReport::stat(std::string_view name) const {
    for (const auto& [k, v] : summary) {
        if (k == name) return v;
    }
    throw InvalidArgument("no summary statistic named " + std::string(name));
}

// ---------------------------------------------------------------------------

void SweepTable::add(double parameter, std::string statistic, double value, double ci_half_width) {
    if (statistic.find_first_of(",\"\r\n") != std::string::npos) {
        throw InvalidArgument("statistic name may not contain commas, quotes or line breaks");
    }
    for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
        if (it->statistic == statistic) {
            if (!(parameter > it->parameter)) {
                throw InvalidArgument("parameter points of '" + statistic +
                                      "' must be strictly increasing");
            }
            break;
        }
    }
    rows_.push_back({parameter, std::move(statistic), value, ci_half_width});
}

std::vector<SweepRow> SweepTable::series(std::string_view statistic) const {
    std::vector<SweepRow> out;
    for (const auto& r : rows_) {
        if (r.statistic == statistic) out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------

VerificationReport verify_eps_contribution(const std::vector<double>& eps_grid,
                                           std::size_t n_per_trial, std::size_t trials,
                                           std::uint64_t seed) {
    if (eps_grid.empty()) throw InvalidArgument("eps_grid is empty");
    VerificationReport r = new_report("eps-contribution");
    r.seed = seed;
    std::vector<double> constants;
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        const double eps = eps_grid[e];
        if (!(eps > 0.0 && eps <= 0.5)) throw InvalidArgument("eps values must lie in (0, 1/2]");
        const double cap = eps * eps;
        const auto m = static_cast<std::size_t>(std::floor(1.0 / cap + 1e-9));
        double measured = emax_floor0(std::vector<double>(m, 0.0), std::vector<double>(m, eps));
        for (std::size_t t = 0; t < trials; ++t) {
            Engine rng = trial_engine(seed, r.claim, e * trials + t);
            std::vector<double> var(n_per_trial);
            double total = 0.0;
            for (auto& v : var) {
                v = cap * uniform(rng, 0.0, 1.0);
                total += v;
            }
            std::vector<double> sd(n_per_trial);
            const double shrink = total > 1.0 ? 1.0 / total : 1.0;
            for (std::size_t i = 0; i < n_per_trial; ++i) sd[i] = std::sqrt(var[i] * shrink);
            measured = std::max(measured, emax_floor0(std::vector<double>(n_per_trial, 0.0), sd));
        }
        r.trials += trials + 1;
        constants.push_back(measured / (eps * std::sqrt(std::log(1.0 / eps))));
    }
    const double lo = *std::min_element(constants.begin(), constants.end());
    const double hi = *std::max_element(constants.begin(), constants.end());
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        record(r, {e, eps_grid[e], constants[e], 2.0 * lo, 2.0 * lo - constants[e]}, 0.0);
        r.summary.emplace_back(eps_label(eps_grid[e]), constants[e]);
    }
    r.summary.emplace_back("ratio", hi / lo);
    return r;
}

VerificationReport verify_lipschitz(std::size_t trials, std::size_t n, std::uint64_t seed,
                                    double constant) {
    if (n == 0) throw InvalidArgument("n must be positive");
    VerificationReport r = new_report("lipschitz");
    r.seed = seed;
    r.trials = trials;
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Engine rng = trial_engine(seed, r.claim, t);
        const auto mu = random_means(rng, n);
        const auto a = random_profile(rng, n);
        std::vector<double> b;
        if (coin(rng, 0.5)) {
            b = random_profile(rng, n);
        } else {
            // Small perturbation, renormalized into the budget.
            b = a;
            double sq = 0.0;
            for (auto& x : b) {
                x = std::max(0.0, x + uniform(rng, -0.05, 0.05));
                sq += x * x;
            }
            if (sq > 1.0) {
                for (auto& x : b) x /= std::sqrt(sq);
            }
        }
        double l1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) l1 += std::abs(a[i] - b[i]);
        const double diff = std::abs(emax(mu, a) - emax(mu, b));
        if (l1 > 0.0) worst_ratio = std::max(worst_ratio, diff / l1);
        record(r, {t, static_cast<double>(n), diff, constant * l1, constant * l1 - diff},
               kQuadratureSlack);
    }
    r.summary.emplace_back("worst_ratio", worst_ratio);
    r.summary.emplace_back("constant", constant);
    return r;
}

VerificationReport verify_max_floor_bound(std::size_t trials, std::size_t n_min,
                                          std::size_t n_max, std::uint64_t seed) {
    if (n_min < 2 || n_max < n_min) throw InvalidArgument("need 2 <= n_min <= n_max");
    VerificationReport r = new_report("max-floor");
    r.seed = seed;
    r.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        Engine rng = trial_engine(seed, r.claim, t);
        const std::size_t n = uniform_index(rng, n_min, n_max);
        const auto mu = random_means(rng, n);
        const auto sd = random_profile(rng, n);
        const double factor = 1.0 - std::ldexp(1.0, 1 - static_cast<int>(n));
        const double lhs = factor * emax_floor0(mu, sd);
        const double rhs = emax(mu, sd);
        record(r, {t, static_cast<double>(n), lhs, rhs, rhs - lhs}, kQuadratureSlack);
    }
    return r;
}

VerificationReport verify_var2approx(std::size_t trials, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("n must be at least 2");
    VerificationReport r = new_report("var2approx");
    r.seed = seed;
    r.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        Engine rng = trial_engine(seed, r.claim, t);
        const std::size_t size = uniform_index(rng, 2, n);
        const auto sd = random_profile(rng, size);
        auto wide = sd;
        for (auto& x : wide) {
            const double pick = uniform(rng, 0.0, 1.0);
            x *= pick < 0.2 ? 1.0 : pick < 0.4 ? 2.0 : uniform(rng, 1.0, 2.0);
        }
        const std::vector<double> zero(size, 0.0);
        const double base = emax(zero, sd);
        const double spread = emax(zero, wide);
        const double margin = std::min(spread - base, 2.0 * base - spread);
        record(r, {t, static_cast<double>(size), spread, 2.0 * base, margin}, kQuadratureSlack);
    }
    return r;
}

VerificationReport verify_correlation_gap(std::size_t trials, std::size_t n,
                                          std::uint64_t mc_samples, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("n must be at least 2");
    VerificationReport r = new_report("correlation-gap");
    r.seed = seed;
    r.trials = trials;
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Engine rng = trial_engine(seed, r.claim, t);
        const std::size_t size = uniform_index(rng, 2, n);
        const std::size_t rank = uniform_index(rng, 1, size);
        std::normal_distribution<double> normal;
        Eigen::MatrixXd a(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(rank));
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            for (Eigen::Index q = 0; q < a.cols(); ++q) a(i, q) = normal(rng);
        }
        Eigen::MatrixXd sigma = a * a.transpose();
        sigma /= sigma.trace();
        const auto mu = random_means(rng, size);
        std::vector<double> sd(size);
        for (std::size_t i = 0; i < size; ++i) {
            sd[i] = std::sqrt(sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
        }

        EstimatorConfig cfg;
        cfg.method = Method::monte_carlo;
        cfg.mc_samples = mc_samples;
        cfg.seed = derive_seed(derive_seed(seed, "correlation-gap/mc"), t);
        const Estimate corr = expected_max_correlated(CovarianceSpec(mu, sigma), cfg);
        const double indep = emax(mu, sd);
        if (indep > 0.0) worst_ratio = std::max(worst_ratio, corr.value / indep);
        const double rhs = kCorrelationGap * indep + corr.half_width;
        record(r, {t, static_cast<double>(size), corr.value, rhs, rhs - corr.value}, 0.0);
    }
    r.summary.emplace_back("worst_ratio", worst_ratio);
    return r;
}

std::vector<double> g_values(std::size_t k_max) {
    std::vector<double> g(k_max + 1, 0.0);
    for (std::size_t k = 1; k <= k_max; ++k) {
        g[k] = emax_floor0(std::vector<double>(k, 0.0), std::vector<double>(k, 1.0));
    }
    return g;
}

VerificationReport verify_submodular_g(std::size_t k_max) {
    if (k_max < 2) throw InvalidArgument("k_max must be at least 2");
    VerificationReport r = new_report("submodular-g");
    const auto g = g_values(k_max);
    for (std::size_t k = 1; k < k_max; ++k) {
        const double prev = g[k] - g[k - 1];
        const double next = g[k + 1] - g[k];
        record(r, {k, static_cast<double>(k), next, prev, prev - next}, 1e-9);
        if (!(next > 0.0)) ++r.violations;
    }
    r.trials = k_max - 1;
    for (std::size_t k = 1; k <= k_max; ++k) r.summary.emplace_back("g(" + std::to_string(k) + ")", g[k]);
    return r;
}

VerificationReport verify_max_inequalities(std::size_t trials, std::uint64_t seed) {
    VerificationReport r = new_report("max-inequalities");
    r.seed = seed;
    r.trials = trials;
    using std::max;
    for (std::size_t t = 0; t < trials; ++t) {
        Engine rng = trial_engine(seed, r.claim, t);
        const std::size_t mode = t % 6;
        auto draw = [&]() -> double {
            switch (mode) {
                case 0: return uniform(rng, -1.0, 1.0);
                case 1: return static_cast<double>(static_cast<int>(uniform_index(rng, 0, 4)) - 2);
                case 2: return 1e300 * uniform(rng, -1.0, 1.0);
                case 3: return 1e-300 * uniform(rng, -1.0, 1.0);
                case 4: {
                    static constexpr double scales[] = {1e-300, 1.0, 1e300};
                    return scales[uniform_index(rng, 0, 2)] * uniform(rng, -1.0, 1.0);
                }
                default: return 0.5;
            }
        };
        const double a = draw(), b = draw(), c = draw(), d = draw();

        const double lhs3 = max(a, b) + max(a, c);
        const double rhs3 = max(max(a, b), c) + a;
        const double m4 = max(max(a, b), max(c, d));
        const double lhs4 = 3.0 * m4 + max(a, d) + max(b, d) + max(c, d);
        const double rhs4 = 2.0 * max(max(a, b), d) + 2.0 * max(max(a, c), d) +
                            2.0 * max(max(b, c), d);
        // Six-term sums may round differently on the two sides.
        const double scale = std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d);
        const double tol4 = 16.0 * std::numeric_limits<double>::epsilon() * scale;

        const double margin3 = lhs3 - rhs3;
        const double margin4 = rhs4 - lhs4;
        // Report margins relative to magnitude so extreme scales stay comparable.
        const double norm = scale > 0.0 ? scale : 1.0;
        const bool bad = margin3 < 0.0 || margin4 < -tol4;
        const double margin = std::min(margin3, margin4 + tol4) / norm;
        if (r.details.empty() || margin < r.worst_margin) r.worst_margin = margin;
        if (bad) ++r.violations;
        r.details.push_back({t, static_cast<double>(mode), lhs4, rhs4, margin});
    }
    return r;
}

// ---------------------------------------------------------------------------

std::vector<NamedAllocation> concavity_candidates(std::size_t n, std::size_t random_count,
                                                  std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("n must be positive");
    std::vector<NamedAllocation> out;
    for (std::size_t s = n; s >= 1; --s) {
        std::vector<double> sd(n, 0.0);
        for (std::size_t i = 0; i < s; ++i) sd[i] = 1.0 / std::sqrt(static_cast<double>(s));
        out.push_back({s == n ? "uniform" : "support" + std::to_string(s), std::move(sd)});
    }
    {
        std::vector<double> sd(n);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sd[i] = std::ldexp(1.0, -static_cast<int>(i));
            sq += sd[i] * sd[i];
        }
        for (auto& x : sd) x /= std::sqrt(sq);
        out.push_back({"geometric", std::move(sd)});
    }
    for (std::size_t t = 0; t < random_count; ++t) {
        Engine rng = trial_engine(seed, "concavity-candidates", t);
        std::vector<double> sd(n);
        double sq = 0.0;
        for (auto& x : sd) {
            x = uniform(rng, 0.0, 1.0);
            sq += x * x;
        }
        for (auto& x : sd) x /= std::sqrt(sq);
        out.push_back({"random" + std::to_string(t), std::move(sd)});
    }
    return out;
}

namespace {

void check_subset_guard(std::size_t n) {
    for (std::size_t k = 1; k <= n; ++k) {
        if (binomial(n, k) > 1'000'000) {
            throw InvalidArgument("C(" + std::to_string(n) + "," + std::to_string(k) +
                                  ") exceeds the limit of 10^6 subsets");
        }
    }
}

void add_margins(SweepTable& table, const std::vector<double>& f, const std::vector<double>& hw,
                 const std::string& f_name, const std::string& margin_name) {
    const std::size_t n = f.size() - 1;
    for (std::size_t k = 1; k <= n; ++k) table.add(static_cast<double>(k), f_name, f[k], hw[k]);
    for (std::size_t k = 3; k <= n; ++k) {
        table.add(static_cast<double>(k), margin_name, f[k] + f[k - 2] - 2.0 * f[k - 1],
                  hw[k] + hw[k - 2] + 2.0 * hw[k - 1]);
    }
}

}  // namespace

SweepTable concavity_curve(std::size_t n, const AllocationVector& alloc,
                           const EstimatorConfig& cfg) {
    cfg.validate();
    if (n == 0 || alloc.size() != n) throw InvalidArgument("allocation length must equal n");
    check_subset_guard(n);
    const auto& sigma = alloc.stddevs();
    std::vector<double> f(n + 1, 0.0), hw(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double count = static_cast<double>(binomial(n, k));
        std::vector<std::size_t> pos(k);
        for (std::size_t i = 0; i < k; ++i) pos[i] = i;
        double sum = 0.0, var = 0.0;
        std::uint64_t index = 0;
        while (true) {
            std::vector<double> sd(k);
            for (std::size_t i = 0; i < k; ++i) sd[i] = sigma[pos[i]];
            EstimatorConfig sub = cfg;
            sub.seed = derive_seed(derive_seed(cfg.seed, k), index++);
            const Estimate e =
                expected_max_independent(GaussianVector(std::vector<double>(k, 0.0), sd), sub);
            sum += e.value;
            var += e.half_width * e.half_width;
            std::size_t p = k;
            while (p > 0 && pos[p - 1] == n - k + p - 1) --p;
            if (p == 0) break;
            ++pos[p - 1];
            for (std::size_t i = p; i < k; ++i) pos[i] = pos[i - 1] + 1;
        }
        f[k] = sum / count;
        hw[k] = std::sqrt(var) / count;
    }
    SweepTable table;
    add_margins(table, f, hw, "f", "margin");
    return table;
}

SweepTable concavity_curve_correlated(std::size_t n, const AllocationVector& alloc, int sign,
                                      const EstimatorConfig& cfg) {
    cfg.validate();
    if (n == 0 || alloc.size() != n) throw InvalidArgument("allocation length must equal n");
    if (sign != 1 && sign != -1) throw InvalidArgument("sign must be +1 or -1");
    check_subset_guard(n);
    const auto& sigma = alloc.stddevs();

    // weight[k][r]: probability that the r-th largest of n values is the
    // maximum of a uniformly random k-subset.
    std::vector<std::vector<double>> weight(n + 1, std::vector<double>(n, 0.0));
    for (std::size_t k = 1; k <= n; ++k) {
        const double total = static_cast<double>(binomial(n, k));
        for (std::size_t r = 0; r + k <= n; ++r) {
            weight[k][r] = static_cast<double>(binomial(n - r - 1, k - 1)) / total;
        }
    }

    std::vector<RunningStats> stats(n + 1);
    std::vector<RunningStats> margin_stats(n + 1);
    std::vector<double> x(n), h(n + 1);
    const std::size_t blocks = (n + 1) / 2;
    for_each_normal_row(cfg.mc_samples, blocks, cfg.seed,
                        [&](std::uint64_t, std::span<const double> z) {
        for (std::size_t i = 0; i < n; ++i) {
            const double s = (i % 2 == 1) ? static_cast<double>(sign) : 1.0;
            x[i] = s * sigma[i] * z[i / 2];
        }
        std::sort(x.begin(), x.end(), std::greater<>());
        h[0] = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            double v = 0.0;
            for (std::size_t r = 0; r + k <= n; ++r) v += weight[k][r] * x[r];
            h[k] = v;
            stats[k].add(v);
        }
        for (std::size_t k = 3; k <= n; ++k) margin_stats[k].add(h[k] + h[k - 2] - 2.0 * h[k - 1]);
    });

    SweepTable table;
    for (std::size_t k = 1; k <= n; ++k) {
        table.add(static_cast<double>(k), "f", stats[k].mean(), stats[k].half_width_95());
    }
    for (std::size_t k = 3; k <= n; ++k) {
        table.add(static_cast<double>(k), "margin", margin_stats[k].mean(),
                  margin_stats[k].half_width_95());
    }
    return table;
}

ConcavitySweep concavity_sweep(std::size_t n, const std::vector<NamedAllocation>& candidates,
                               const EstimatorConfig& cfg) {
    ConcavitySweep out;
    VerificationReport& r = out.report;
    r.claim = "concavity";
    r.seed = cfg.seed;
    std::vector<double> f_max(n + 1, -std::numeric_limits<double>::infinity());
    f_max[0] = 0.0;

    auto absorb = [&](const std::string& name, const SweepTable& curve, bool independent) {
        for (const auto& row : curve.series("f")) {
            out.table.add(row.parameter, "f[" + name + "]", row.value, row.ci_half_width);
            if (independent) {
                auto& slot = f_max[static_cast<std::size_t>(row.parameter)];
                slot = std::max(slot, row.value);
            }
        }
        for (const auto& row : curve.series("margin")) {
            out.table.add(row.parameter, "margin[" + name + "]", row.value, row.ci_half_width);
            const double slack = kConcavityTolerance + row.ci_half_width - row.value;
            record(r, {r.trials++, row.parameter, row.value, kConcavityTolerance + row.ci_half_width,
                       slack},
                   0.0);
        }
    };

    for (const auto& c : candidates) {
        if (c.stddevs.size() != n) throw InvalidArgument("candidate " + c.name + " has wrong length");
        absorb(c.name, concavity_curve(n, AllocationVector(c.stddevs), cfg), true);
    }
    if (n >= 2) {
        EstimatorConfig mc = cfg;
        mc.method = Method::monte_carlo;
        const AllocationVector uniform(
            std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n))));
        absorb("corr+", concavity_curve_correlated(n, uniform, +1, mc), false);
        absorb("corr-", concavity_curve_correlated(n, uniform, -1, mc), false);
    }

    double worst_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= n; ++k) out.table.add(static_cast<double>(k), "f_max", f_max[k]);
    for (std::size_t k = 3; k <= n; ++k) {
        const double m = f_max[k] + f_max[k - 2] - 2.0 * f_max[k - 1];
        out.table.add(static_cast<double>(k), "margin_max", m);
        worst_max = std::max(worst_max, m);
    }
    r.summary.emplace_back("worst_margin_max", worst_max);
    r.summary.emplace_back("candidates", static_cast<double>(candidates.size()));
    return out;
}

// ---------------------------------------------------------------------------

SweepTable concentration_profile(std::size_t n, std::size_t m, const std::vector<double>& p_grid,
                                 const std::vector<std::uint64_t>& seeds,
                                 const EstimatorConfig& cfg, double c) {
    if (seeds.empty()) throw InvalidArgument("seeds is empty");
    if (!(c > 0.0)) throw InvalidArgument("c must be positive");
    SweepTable table;
    for (double p : p_grid) {
        if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("p values must lie in (0, 1]");
        RunningStats count, top;
        std::vector<RunningStats> rank(n);
        for (auto s : seeds) {
            const Instance inst = erdos_renyi_instance(n, m, p, s);
            EstimatorConfig run = cfg;
            run.seed = derive_seed(cfg.seed, s);
            const SolveReport rep = log_approx_graph(inst, run);
            const auto& sd = std::get<AllocationVector>(rep.allocation).stddevs();
            std::vector<double> var(n);
            for (std::size_t i = 0; i < n; ++i) var[i] = sd[i] * sd[i];
            std::sort(var.begin(), var.end(), std::greater<>());
            const double threshold = c * p - 1e-12;
            count.add(static_cast<double>(
                std::count_if(var.begin(), var.end(), [&](double v) { return v >= threshold; })));
            top.add(var[0]);
            for (std::size_t i = 0; i < n; ++i) rank[i].add(var[i]);
        }
        table.add(p, "count", count.mean(), count.half_width_95());
        table.add(p, "max_variance", top.mean(), top.half_width_95());
        for (std::size_t i = 0; i < n; ++i) {
            table.add(p, "var_rank_" + std::to_string(i + 1), rank[i].mean(), rank[i].half_width_95());
        }
    }
    return table;
}

InversionCount count_inversions(const std::vector<SweepRow>& series) {
    InversionCount out;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double rise = series[i].value - series[i - 1].value;
        if (rise > 0.0) {
            ++out.total;
            if (rise > series[i].ci_half_width + series[i - 1].ci_half_width) ++out.beyond_ci;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& verification_claims() {
    static const std::vector<std::string> claims = {
        "eps-contribution", "lipschitz",        "max-floor", "var2approx",
        "correlation-gap",  "submodular-g", "max-inequalities", "concavity"};
    return claims;
}

VerificationReport run_verification(std::string_view claim, std::uint64_t seed) {
    if (claim == "eps-contribution") return verify_eps_contribution({0.5, 0.25, 0.125, 0.0625}, 8, 16, seed);
    if (claim == "lipschitz") return verify_lipschitz(1000, 4, seed);
    if (claim == "max-floor") return verify_max_floor_bound(1000, 2, 6, seed);
    if (claim == "var2approx") return verify_var2approx(1000, 4, seed);
    if (claim == "correlation-gap") return verify_correlation_gap(1000, 4, 20'000, seed);
    if (claim == "submodular-g") return verify_submodular_g(12);
    if (claim == "max-inequalities") return verify_max_inequalities(10'000, seed);
    if (claim == "concavity") {
        EstimatorConfig cfg;
        cfg.seed = derive_seed(seed, "concavity");
        cfg.mc_samples = 200'000;
        auto sweep = concavity_sweep(8, concavity_candidates(8, 4, seed), cfg);
        sweep.report.seed = seed;
        return sweep.report;
    }
    throw InvalidArgument("unknown claim '" + std::string(claim) + "'");
}

std::vector<VerificationReport> run_all_verifications(std::uint64_t seed) {
    std::vector<VerificationReport> out;
    for (const auto& c : verification_claims()) out.push_back(run_verification(c, seed));
    return out;
}

// ---------------------------------------------------------------------------

std::string shortest_decimal(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_sweep_csv(const SweepTable& table) {
    std::string out = "parameter,statistic,value,ci_half_width\n";
    for (const auto& r : table.rows()) {
        out += shortest_decimal(r.parameter);
        out += ',';
        out += r.statistic;
        out += ',';
        out += shortest_decimal(r.value);
        out += ',';
        out += shortest_decimal(r.ci_half_width);
        out += '\n';
    }
    return out;
}

SweepTable parse_sweep_csv(std::string_view text) {
    auto parse_double = [](std::string_view s, std::size_t line) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw ParseError("line " + std::to_string(line), "bad number '" + std::string(s) + "'");
        }
        return v;
    };
    SweepTable table;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line_no == 1) {
            if (line != "parameter,statistic,value,ci_half_width") {
                throw ParseError("line 1", "unexpected header");
            }
            continue;
        }
        if (line.empty()) continue;
        std::string_view fields[4];
        for (int f = 0; f < 3; ++f) {
            const auto comma = line.find(',');
            if (comma == std::string_view::npos) {
                throw ParseError("line " + std::to_string(line_no), "expected 4 fields");
            }
            fields[f] = line.substr(0, comma);
            line = line.substr(comma + 1);
        }
        fields[3] = line;
        if (fields[3].find(',') != std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no), "expected 4 fields");
        }
        try {
            table.add(parse_double(fields[0], line_no), std::string(fields[1]),
                      parse_double(fields[2], line_no), parse_double(fields[3], line_no));
        } catch (const InvalidArgument& e) {
            throw ParseError("line " + std::to_string(line_no), e.what());
        }
    }
    if (line_no == 0) throw ParseError("line 1", "missing header");
    return table;
}

void emit_sweep_csv(const SweepTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    const std::string text = format_sweep_csv(table);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace gaussalloc
