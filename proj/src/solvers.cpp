#include "gaussalloc/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "gaussalloc/errors.hpp"
#include "gaussalloc/seeding.hpp"

namespace gaussalloc {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBudgetSlack = 1e-9;
constexpr std::uint64_t kExactCountLimit = 200'000;

void require_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
}

double resolve_step(std::optional<double> grid_step, double eps) {
    const double step = grid_step.value_or(eps * eps * eps);
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("grid_step must be positive");
    return step;
}

// k = ceil(1/eps^2), the support size bound of the grid searches.
std::size_t support_cap(double eps) {
    return static_cast<std::size_t>(std::ceil(1.0 / (eps * eps) - 1e-9));
}

// Largest r with r * step^2 <= 1 (+ slack): sigma = a * step is feasible
// exactly when sum(a_i^2) <= r.
std::uint64_t squared_radius(double step) {
    const double r = std::floor((1.0 + kBudgetSlack) / (step * step));
    if (r > 1e18) throw InvalidArgument("grid_step is too small");
    return static_cast<std::uint64_t>(r);
}

EstimatorConfig search_config(const EstimatorConfig& cfg) {
    EstimatorConfig c = cfg;
    c.mc_samples = std::max<std::uint64_t>(1000, cfg.mc_samples / 10);
    return c;
}

EstimatorConfig report_config(const EstimatorConfig& cfg) {
    EstimatorConfig c = cfg;
    c.seed = derive_seed(cfg.seed, "report");
    return c;
}

// Evaluates one set's expected maximum under a sigma vector. Deterministic
// methods go through the oracle; monte_carlo compares allocations on one
// fixed sample matrix.
class SetObjective {
public:
    SetObjective(const Instance& inst, const EstimatorConfig& cfg, std::string_view label)
        : inst_(inst), cfg_(cfg) {
        if (cfg.method == Method::monte_carlo) {
            const auto search = search_config(cfg);
            shared_.emplace(inst, search.mc_samples, derive_seed(cfg.seed, label));
        }
    }

    double operator()(std::size_t j, std::span<const double> stddevs) const {
        const auto& set = inst_.set(j);
        if (shared_) return shared_->set_value(set, stddevs).value;
        std::vector<double> mu;
        std::vector<double> sd;
        mu.reserve(set.size());
        sd.reserve(set.size());
        for (auto i : set) {
            mu.push_back(inst_.means()[i]);
            sd.push_back(stddevs[i]);
        }
        try {
            return expected_max_independent(GaussianVector(std::move(mu), std::move(sd)), cfg_).value;
        } catch (const QuadratureError& e) {
            throw QuadratureError("set " + std::to_string(j) + ": " + e.what(), e.best_estimate(),
                                  e.error_estimate());
        }
    }

private:
    const Instance& inst_;
    EstimatorConfig cfg_;
    std::optional<SharedSampleEvaluator> shared_;
};

// Calls visit() for every s-combination of `pool` in lexicographic order.
template <class Visit>
void for_each_combination(const IndexSet& pool, std::size_t s, Visit&& visit) {
    const std::size_t n = pool.size();
    if (s > n) return;
    std::vector<std::size_t> pos(s);
    for (std::size_t i = 0; i < s; ++i) pos[i] = i;
    IndexSet chosen(s);
    while (true) {
        for (std::size_t i = 0; i < s; ++i) chosen[i] = pool[pos[i]];
        visit(static_cast<const IndexSet&>(chosen));
        std::size_t k = s;
        while (k > 0 && pos[k - 1] == n - s + k - 1) --k;
        if (k == 0) return;
        ++pos[k - 1];
        for (std::size_t i = k; i < s; ++i) pos[i] = pos[i - 1] + 1;
    }
}

SolveReport finish(Allocation alloc, Estimate objective, Algorithm algorithm,
                   const EstimatorConfig& cfg, Clock::time_point start, std::uint64_t nodes,
                   std::uint64_t objective_seed) {
    const std::size_t support = std::visit([](const auto& a) { return a.support_size(); }, alloc);
    SolveReport r{std::move(alloc), objective, algorithm, std::nullopt, std::nullopt, support,
                  Clock::now() - start, cfg.seed, nodes, cfg, objective_seed};
    return r;
}

void check_budget(double required, std::uint64_t budget, const char* what) {
    if (required > static_cast<double>(budget)) {
        const auto req = required >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                                            : static_cast<std::uint64_t>(required);
        throw BudgetExceeded(std::string(what) + " needs " + std::to_string(req) +
                                 " candidates, budget is " + std::to_string(budget),
                             req, budget);
    }
}

}  // namespace

std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
        case Algorithm::ptas_independent: return "ptas-ind";
        case Algorithm::ptas_correlated: return "ptas-corr";
        case Algorithm::log_approx: return "log-approx";
        case Algorithm::brute_force: return "brute-force";
        case Algorithm::uniform: return "uniform";
    }
    return "uniform";
}

double count_lattice_points(std::size_t dims, std::uint64_t radius_sq, bool positive) {
    if (dims == 0) return 1.0;
    if (radius_sq > kExactCountLimit) {
        // Volume of the positive orthant of the ball of radius sqrt(R).
        const double d = static_cast<double>(dims);
        const double log_vol = 0.5 * d * std::log(M_PI * static_cast<double>(radius_sq)) -
                               std::lgamma(0.5 * d + 1.0) - d * std::log(2.0);
        return std::exp(log_vol);
    }
    if (!positive) {
        double total = 0.0;
        for (std::size_t s = 0; s <= dims; ++s) {
            total += static_cast<double>(binomial(dims, s)) * count_lattice_points(s, radius_sq, true);
        }
        return total;
    }
    // exact[r]: number of positive vectors of the current length with sum of squares r.
    const std::size_t r_max = static_cast<std::size_t>(radius_sq);
    std::vector<double> exact(r_max + 1, 0.0);
    exact[0] = 1.0;
    for (std::size_t d = 0; d < dims; ++d) {
        std::vector<double> next(r_max + 1, 0.0);
        for (std::size_t r = 0; r <= r_max; ++r) {
            if (exact[r] == 0.0) continue;
            for (std::size_t a = 1; r + a * a <= r_max; ++a) next[r + a * a] += exact[r];
        }
        exact.swap(next);
    }
    double total = 0.0;
    for (double c : exact) total += c;
    return total;
}

// ---------------------------------------------------------------------------

SolveReport ptas_independent(const Instance& inst, double eps, const EstimatorConfig& cfg,
                             std::optional<double> grid_step, SolverLimits limits) {
    const auto start = Clock::now();
    cfg.validate();
    require_eps(eps);
    if (inst.m() != 1) throw InvalidArgument("ptas_independent needs a single set (m = 1)");
    const double step = resolve_step(grid_step, eps);
    const IndexSet& pool = inst.set(0);
    const std::size_t s_max = std::min(support_cap(eps), pool.size());
    const std::uint64_t radius = squared_radius(step);

    double required = 1.0;
    for (std::size_t s = 1; s <= s_max; ++s) {
        required += static_cast<double>(binomial(pool.size(), s)) *
                    count_lattice_points(s, radius, true);
    }
    check_budget(required, limits.node_budget, "ptas_independent");

    SetObjective objective(inst, cfg, "ptas-independent/search");
    std::vector<double> sd(inst.n(), 0.0);
    std::vector<double> best_sd = sd;
    double best = objective(0, sd);
    std::uint64_t nodes = 1;

    for (std::size_t s = 1; s <= s_max; ++s) {
        for_each_combination(pool, s, [&](const IndexSet& support) {
            // Positive multiples a_i of the step with sum(a_i^2) <= radius.
            auto assign = [&](auto&& self, std::size_t pos, std::uint64_t remaining) -> void {
                if (pos == support.size()) {
                    const double v = objective(0, sd);
                    ++nodes;
                    if (v > best) {
                        best = v;
                        best_sd = sd;
                    }
                    return;
                }
                for (std::uint64_t a = 1; a * a <= remaining; ++a) {
                    sd[support[pos]] = static_cast<double>(a) * step;
                    self(self, pos + 1, remaining - a * a);
                }
                sd[support[pos]] = 0.0;
            };
            assign(assign, 0, radius);
        });
    }

    AllocationVector alloc(best_sd);
    const Estimate est = graph_objective(inst, alloc, report_config(cfg));
    auto r = finish(std::move(alloc), est, Algorithm::ptas_independent, cfg, start, nodes,
                    report_config(cfg).seed);
    r.eps = eps;
    r.grid_step = step;
    return r;
}

// ---------------------------------------------------------------------------

SolveReport ptas_correlated(const Instance& inst, double eps, std::optional<double> grid_step,
                            const EstimatorConfig& cfg, SolverLimits limits) {
    const auto start = Clock::now();
    cfg.validate();
    require_eps(eps);
    if (inst.m() != 1) throw InvalidArgument("ptas_correlated needs a single set (m = 1)");
    const double step = resolve_step(grid_step, eps);
    const IndexSet& pool = inst.set(0);
    const std::size_t s_max = std::min(support_cap(eps), pool.size());
    const auto& mu = inst.means();
    // Diagonal entries are variances d * step with sum(d) <= max_units.
    const auto max_units = static_cast<std::uint64_t>(std::floor((1.0 + kBudgetSlack) / step));
    auto offdiag_bound = [](std::uint64_t di, std::uint64_t dj) {
        return static_cast<std::int64_t>(
            std::floor(std::sqrt(static_cast<double>(di) * static_cast<double>(dj)) + 1e-9));
    };

    // Visits every positive diagonal vector of length s with sum <= max_units.
    auto for_each_diagonal = [&](std::size_t s, auto&& visit) {
        std::vector<std::uint64_t> d(s, 0);
        auto rec = [&](auto&& self, std::size_t pos, std::uint64_t remaining) -> void {
            if (pos == s) {
                visit(static_cast<const std::vector<std::uint64_t>&>(d));
                return;
            }
            for (std::uint64_t a = 1; a <= remaining; ++a) {
                d[pos] = a;
                self(self, pos + 1, remaining - a);
            }
        };
        rec(rec, 0, max_units);
    };

    double required = 1.0;
    for (std::size_t s = 1; s <= s_max; ++s) {
        double per_support = 0.0;
        for_each_diagonal(s, [&](const std::vector<std::uint64_t>& d) {
            double combos = 1.0;
            for (std::size_t i = 0; i < s; ++i) {
                for (std::size_t j = i + 1; j < s; ++j) {
                    combos *= static_cast<double>(2 * offdiag_bound(d[i], d[j]) + 1);
                }
            }
            per_support += combos;
        });
        required += static_cast<double>(binomial(pool.size(), s)) * per_support;
    }
    check_budget(required, limits.node_budget, "ptas_correlated");

    const auto search = search_config(cfg);
    const NormalSampleMatrix z(search.mc_samples, s_max,
                               derive_seed(cfg.seed, "ptas-correlated/search"));

    double zero_value = kNegInf;
    for (auto i : pool) zero_value = std::max(zero_value, mu[i]);
    double best = zero_value;
    IndexSet best_support;
    Eigen::MatrixXd best_block;
    std::uint64_t nodes = 1;

    auto evaluate = [&](const IndexSet& support, const Eigen::MatrixXd& block) {
        const Eigen::MatrixXd l = pivoted_cholesky(block, CovarianceSpec::kRankTolerance);
        double floor = kNegInf;
        for (auto i : pool) {
            if (!std::binary_search(support.begin(), support.end(), i)) floor = std::max(floor, mu[i]);
        }
        const auto s = static_cast<Eigen::Index>(support.size());
        RunningStats stats;
        for (std::size_t r = 0; r < z.rows(); ++r) {
            const auto row = z.row(r);
            double m = floor;
            for (Eigen::Index i = 0; i < s; ++i) {
                double x = mu[support[static_cast<std::size_t>(i)]];
                for (Eigen::Index q = 0; q < l.cols(); ++q) x += l(i, q) * row[static_cast<std::size_t>(q)];
                m = std::max(m, x);
            }
            stats.add(m);
        }
        return stats.mean();
    };

    for (std::size_t s = 1; s <= s_max; ++s) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = i + 1; j < s; ++j) pairs.emplace_back(i, j);
        }
        for_each_combination(pool, s, [&](const IndexSet& support) {
            for_each_diagonal(s, [&](const std::vector<std::uint64_t>& d) {
                std::vector<std::int64_t> bound(pairs.size());
                std::vector<std::int64_t> c(pairs.size());
                for (std::size_t p = 0; p < pairs.size(); ++p) {
                    bound[p] = offdiag_bound(d[pairs[p].first], d[pairs[p].second]);
                    c[p] = -bound[p];
                }
                Eigen::MatrixXd block(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
                while (true) {
                    for (std::size_t i = 0; i < s; ++i) {
                        const auto k = static_cast<Eigen::Index>(i);
                        block(k, k) = static_cast<double>(d[i]) * step;
                    }
                    for (std::size_t p = 0; p < pairs.size(); ++p) {
                        const auto a = static_cast<Eigen::Index>(pairs[p].first);
                        const auto b = static_cast<Eigen::Index>(pairs[p].second);
                        block(a, b) = block(b, a) = static_cast<double>(c[p]) * step;
                    }
                    ++nodes;
                    if (min_eigenvalue(block) >= -CovarianceSpec::kEigenTolerance) {
                        const double v = evaluate(support, block);
                        if (v > best) {
                            best = v;
                            best_support = support;
                            best_block = block;
                        }
                    }
                    // Odometer over the off-diagonal entries, last pair fastest.
                    std::size_t p = pairs.size();
                    while (p > 0 && c[p - 1] == bound[p - 1]) {
                        c[p - 1] = -bound[p - 1];
                        --p;
                    }
                    if (p == 0) break;
                    ++c[p - 1];
                }
            });
        });
    }

    const auto n = static_cast<Eigen::Index>(inst.n());
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t a = 0; a < best_support.size(); ++a) {
        for (std::size_t b = 0; b < best_support.size(); ++b) {
            sigma(static_cast<Eigen::Index>(best_support[a]), static_cast<Eigen::Index>(best_support[b])) =
                best_block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    CovarianceSpec spec(mu, std::move(sigma));
    EstimatorConfig rc = report_config(cfg);
    rc.method = Method::monte_carlo;
    const Estimate est = graph_objective_correlated(inst, spec, rc);
    auto r = finish(std::move(spec), est, Algorithm::ptas_correlated, cfg, start, nodes, rc.seed);
    r.eps = eps;
    r.grid_step = step;
    return r;
}

// ---------------------------------------------------------------------------

SolveReport log_approx_graph(const Instance& inst, const EstimatorConfig& cfg,
                             const std::function<void(const LogApproxStep&)>& observer) {
    const auto start = Clock::now();
    cfg.validate();
    const std::size_t n = inst.n();

    std::vector<std::size_t> working;
    for (std::size_t j = 0; j < inst.m(); ++j) {
        if (inst.set(j).size() >= 2) working.push_back(j);
    }
    // Working sets touching each variable.
    std::vector<std::vector<std::size_t>> touching(n);
    for (auto j : working) {
        for (auto i : inst.set(j)) touching[i].push_back(j);
    }

    SetObjective objective(inst, cfg, "log-approx/search");
    std::vector<double> best_sd(n, 0.0);
    double best = 0.0;
    std::uint64_t nodes = 0;

    if (!working.empty()) {
        const auto rounds = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(n))));
        for (std::size_t k = 0; k <= rounds; ++k) {
            const double level = std::ldexp(1.0, -static_cast<int>(k));  // sigma = 2^-k
            const std::size_t target =
                k >= 32 ? n : std::min<std::size_t>(std::size_t{1} << (2 * k), n);
            std::vector<double> sd(n, 0.0);
            std::vector<double> set_value(inst.m(), 0.0);
            for (auto j : working) set_value[j] = objective(j, sd);

            for (std::size_t placed = 0; placed < target; ++placed) {
                try {
                    std::size_t pick = n;
                    double pick_gain = kNegInf;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (sd[i] != 0.0) continue;
                        sd[i] = level;
                        double gain = 0.0;
                        for (auto j : touching[i]) gain += objective(j, sd) - set_value[j];
                        sd[i] = 0.0;
                        ++nodes;
                        if (gain > pick_gain) {
                            pick_gain = gain;
                            pick = i;
                        }
                    }
                    sd[pick] = level;
                    for (auto j : touching[pick]) set_value[j] = objective(j, sd);
                    if (observer) {
                        double total = 0.0;
                        for (auto j : working) total += set_value[j];
                        double var = 0.0;
                        for (double x : sd) var += x * x;
                        observer({k, placed + 1, pick, total, var});
                    }
                } catch (const QuadratureError& e) {
                    throw QuadratureError("round " + std::to_string(k) + ", step " +
                                              std::to_string(placed + 1) + ": " + e.what(),
                                          e.best_estimate(), e.error_estimate());
                }
            }
            double total = 0.0;
            for (auto j : working) total += set_value[j];
            if (total > best) {
                best = total;
                best_sd = sd;
            }
        }
    }

    AllocationVector alloc(best_sd);
    const Estimate est = graph_objective(inst, alloc, report_config(cfg));
    return finish(std::move(alloc), est, Algorithm::log_approx, cfg, start, nodes,
                  report_config(cfg).seed);
}

// ---------------------------------------------------------------------------

GreedyResult greedy_fixed_variance(const Instance& inst, double variance_level,
                                   std::size_t cardinality, const EstimatorConfig& cfg) {
    cfg.validate();
    if (!(variance_level > 0.0) || !std::isfinite(variance_level)) {
        throw InvalidArgument("variance_level must be positive");
    }
    if (static_cast<double>(cardinality) * variance_level > 1.0 + kBudgetSlack) {
        throw InvalidArgument("cardinality * variance_level exceeds the variance budget");
    }
    const std::size_t n = inst.n();
    const double sigma = std::sqrt(variance_level);
    std::vector<std::vector<std::size_t>> touching(n);
    for (std::size_t j = 0; j < inst.m(); ++j) {
        for (auto i : inst.set(j)) touching[i].push_back(j);
    }

    SetObjective objective(inst, cfg, "greedy/search");
    std::vector<double> sd(n, 0.0);
    std::vector<double> set_value(inst.m());
    for (std::size_t j = 0; j < inst.m(); ++j) set_value[j] = objective(j, sd);

    std::vector<std::size_t> chosen;
    while (chosen.size() < std::min(cardinality, n)) {
        std::size_t pick = n;
        double pick_gain = kNegInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (sd[i] != 0.0) continue;
            sd[i] = sigma;
            double gain = 0.0;
            for (auto j : touching[i]) gain += objective(j, sd) - set_value[j];
            sd[i] = 0.0;
            if (gain > pick_gain) {
                pick_gain = gain;
                pick = i;
            }
        }
        if (!(pick_gain > 0.0)) break;
        sd[pick] = sigma;
        for (auto j : touching[pick]) set_value[j] = objective(j, sd);
        chosen.push_back(pick);
    }

    AllocationVector alloc(sd);
    Estimate est = graph_objective(inst, alloc, report_config(cfg));
    return {std::move(chosen), std::move(alloc), est};
}

// ---------------------------------------------------------------------------

SolveReport brute_force_grid(const Instance& inst, double grid_step, const EstimatorConfig& cfg,
                             std::uint64_t budget) {
    const auto start = Clock::now();
    cfg.validate();
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
        throw InvalidArgument("grid_step must be positive");
    }
    const std::uint64_t radius = squared_radius(grid_step);
    const std::size_t n = inst.n();
    check_budget(count_lattice_points(n, radius, false), budget, "brute_force_grid");

    EstimatorConfig det = cfg;
    if (det.method == Method::monte_carlo) det.method = Method::automatic;
    SetObjective objective(inst, det, "brute-force");

    std::vector<std::vector<std::size_t>> touching(n);
    for (std::size_t j = 0; j < inst.m(); ++j) {
        for (auto i : inst.set(j)) touching[i].push_back(j);
    }
    std::vector<double> sd(n, 0.0);
    std::vector<double> set_value(inst.m(), 0.0);
    std::vector<char> dirty(inst.m(), 1);
    std::vector<double> best_sd;
    double best = kNegInf;
    std::uint64_t nodes = 0;

    auto set_coord = [&](std::size_t i, double v) {
        if (sd[i] == v) return;
        sd[i] = v;
        for (auto j : touching[i]) dirty[j] = 1;
    };
    auto rec = [&](auto&& self, std::size_t pos, std::uint64_t remaining) -> void {
        if (pos == n) {
            double total = 0.0;
            for (std::size_t j = 0; j < inst.m(); ++j) {
                if (dirty[j]) {
                    set_value[j] = objective(j, sd);
                    dirty[j] = 0;
                }
                total += set_value[j];
            }
            ++nodes;
            if (total > best) {
                best = total;
                best_sd = sd;
            }
            return;
        }
        for (std::uint64_t a = 0; a * a <= remaining; ++a) {
            set_coord(pos, static_cast<double>(a) * grid_step);
            self(self, pos + 1, remaining - a * a);
        }
        set_coord(pos, 0.0);
    };
    rec(rec, 0, radius);

    AllocationVector alloc(best_sd);
    Estimate est = graph_objective(inst, alloc, report_config(det));
    auto r = finish(std::move(alloc), est, Algorithm::brute_force, cfg, start, nodes,
                    report_config(det).seed);
    r.grid_step = grid_step;
    return r;
}

AllocationVector uniform_allocation(const Instance& inst) {
    return AllocationVector(
        std::vector<double>(inst.n(), 1.0 / std::sqrt(static_cast<double>(inst.n()))));
}

SolveReport solve_uniform(const Instance& inst, const EstimatorConfig& cfg) {
    const auto start = Clock::now();
    cfg.validate();
    AllocationVector alloc = uniform_allocation(inst);
    const Estimate est = graph_objective(inst, alloc, cfg);
    return finish(std::move(alloc), est, Algorithm::uniform, cfg, start, 0, cfg.seed);
}

}  // namespace gaussalloc
