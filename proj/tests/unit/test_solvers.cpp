#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gaussalloc/errors.hpp"
#include "gaussalloc/solvers.hpp"
#include "oracles.hpp"

using namespace gaussalloc;

namespace {

constexpr double kPhi0 = 0.3989422804014327;
const double kCycle4 = std::sqrt(4.0 / M_PI);

EstimatorConfig quad() {
    EstimatorConfig c;
    c.method = Method::quadrature;
    return c;
}

EstimatorConfig mc(std::uint64_t samples, std::uint64_t seed = 0) {
    EstimatorConfig c;
    c.method = Method::monte_carlo;
    c.mc_samples = samples;
    c.seed = seed;
    return c;
}

const AllocationVector& vec(const SolveReport& r) { return std::get<AllocationVector>(r.allocation); }

// Sum over sets of the Simpson oracle.
double oracle_objective(const Instance& inst, const std::vector<double>& sd) {
    double total = 0.0;
    for (const auto& s : inst.sets()) {
        std::vector<double> mu, sg;
        for (auto i : s) {
            mu.push_back(inst.means()[i]);
            sg.push_back(sd[i]);
        }
        total += oracle::emax(mu, sg);
    }
    return total;
}

Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> mu(n);
    for (auto& x : mu) x = u(rng);
    std::vector<IndexSet> sets;
    for (std::size_t j = 0; j < m; ++j) {
        IndexSet s;
        for (std::size_t i = 0; i < n; ++i) {
            if (u(rng) < 0.5) s.push_back(i);
        }
        if (s.empty()) s.push_back(j % n);
        sets.push_back(s);
    }
    return Instance(mu, sets);
}

}  // namespace

TEST(Algorithms, Names) {
    EXPECT_EQ(to_string(Algorithm::ptas_independent), "ptas-ind");
    EXPECT_EQ(to_string(Algorithm::ptas_correlated), "ptas-corr");
    EXPECT_EQ(to_string(Algorithm::log_approx), "log-approx");
    EXPECT_EQ(to_string(Algorithm::brute_force), "brute-force");
    EXPECT_EQ(to_string(Algorithm::uniform), "uniform");
}

// ---------------------------------------------------------------------------

TEST(PtasIndependent, TwoZeroMeanVariables) {
    const Instance inst({0, 0}, {{0, 1}});
    const auto r = ptas_independent(inst, 0.5, quad());
    EXPECT_NEAR(r.objective.value, kPhi0, 1e-3);
    EXPECT_NEAR(vec(r).variance_sum(), 1.0, 1e-9);
    EXPECT_EQ(r.eps, 0.5);
    EXPECT_EQ(r.grid_step, 0.125);
    EXPECT_EQ(r.algorithm, Algorithm::ptas_independent);
    EXPECT_GT(r.nodes_evaluated, 1u);
}

TEST(PtasIndependent, SingleVariableIsItsMean) {
    const Instance inst({0.7}, {{0}});
    EXPECT_NEAR(ptas_independent(inst, 0.5, quad()).objective.value, 0.7, 1e-12);
}

TEST(PtasIndependent, ThreeZeroMeanVariables) {
    const Instance inst({0, 0, 0}, {{0, 1, 2}});
    const auto r = ptas_independent(inst, 0.5, quad());
    // Best point of the 1/8 grid is sigma = (1, 5, 6)/8 up to order; an
    // independent adaptive-quadrature search gives 0.47354527773.
    EXPECT_NEAR(r.objective.value, 0.47354527773, 1e-8);
    EXPECT_GE(r.objective.value, 3.0 / (2.0 * std::sqrt(M_PI)) / std::sqrt(3.0) - 0.5);
    const auto bf = brute_force_grid(inst, 0.125, quad());
    EXPECT_GE(r.objective.value, bf.objective.value - 1e-6);
    EXPECT_NEAR(r.objective.value, oracle_objective(inst, vec(r).stddevs()), 1e-7);
}

TEST(PtasIndependent, Preconditions) {
    const Instance two_sets({0, 0}, {{0}, {1}});
    EXPECT_THROW(ptas_independent(two_sets, 0.5, quad()), InvalidArgument);
    const Instance inst({0, 0}, {{0, 1}});
    EXPECT_THROW(ptas_independent(inst, 0.0, quad()), InvalidArgument);
    EXPECT_THROW(ptas_independent(inst, 1.0, quad()), InvalidArgument);
    EXPECT_THROW(ptas_independent(inst, 0.5, quad(), -0.1), InvalidArgument);
}

TEST(PtasIndependent, BudgetExceededBeforeWork) {
    const Instance inst({0, 0, 0, 0}, {{0, 1, 2, 3}});
    try {
        ptas_independent(inst, 0.35, quad(), std::nullopt, SolverLimits{100});
        FAIL() << "expected BudgetExceeded";
    } catch (const BudgetExceeded& e) {
        EXPECT_GT(e.required(), 100u);
        EXPECT_EQ(e.budget(), 100u);
    }
}

TEST(PtasIndependentProperty, ContainsBruteForceGrid) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0, 1);
    for (double eps : {0.5, 0.35}) {
        for (std::size_t n = 1; n <= 3; ++n) {
            std::vector<double> mu(n);
            for (auto& x : mu) x = u(rng);
            IndexSet all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = i;
            const Instance inst(mu, {all});
            const double step = eps * eps * eps;
            const auto p = ptas_independent(inst, eps, quad());
            const auto b = brute_force_grid(inst, step, quad());
            EXPECT_GE(p.objective.value, b.objective.value - 1e-6) << "eps=" << eps << " n=" << n;
        }
    }
}

// ---------------------------------------------------------------------------

TEST(PtasCorrelated, FindsAntiCorrelatedPair) {
    const Instance inst({0, 0}, {{0, 1}});
    const auto r = ptas_correlated(inst, 0.7, 0.25, mc(200'000, 3));
    const auto& c = std::get<CovarianceSpec>(r.allocation);
    EXPECT_LT(c.matrix()(0, 1), 0.0);
    EXPECT_NEAR(c.trace(), 1.0, 1e-12);
    EXPECT_GE(r.objective.value, 0.5641896 - r.objective.half_width);
    EXPECT_EQ(r.support_size, 2u);
    EXPECT_EQ(r.objective_seed, derive_seed(3, "report"));
}

TEST(PtasCorrelated, SingleVariableAndDominance) {
    const Instance one({0.4}, {{0}});
    EXPECT_NEAR(ptas_correlated(one, 0.7, 0.25, mc(10'000)).objective.value, 0.4, 1e-12);

    const Instance inst({0.2, 0.0}, {{0, 1}});
    const auto c = ptas_correlated(inst, 0.7, 0.25, mc(200'000, 1));
    const auto i = ptas_independent(inst, 0.7, mc(200'000, 1), 0.25);
    EXPECT_GE(c.objective.value, i.objective.value - c.objective.half_width - i.objective.half_width);
}

TEST(PtasCorrelated, Determinism) {
    const Instance inst({0, 0.1}, {{0, 1}});
    const auto a = ptas_correlated(inst, 0.7, 0.25, mc(20'000, 8));
    const auto b = ptas_correlated(inst, 0.7, 0.25, mc(20'000, 8));
    EXPECT_EQ(std::get<CovarianceSpec>(a.allocation).matrix(),
              std::get<CovarianceSpec>(b.allocation).matrix());
    EXPECT_EQ(a.objective.value, b.objective.value);
    EXPECT_EQ(a.nodes_evaluated, b.nodes_evaluated);
}

// ---------------------------------------------------------------------------

TEST(LogApprox, CycleMatchesUniform) {
    const auto r = log_approx_graph(cycle_instance(4, 0.0), quad());
    EXPECT_NEAR(r.objective.value, kCycle4, 1e-7);
    for (double s : vec(r).stddevs()) EXPECT_DOUBLE_EQ(s, 0.5);
}

TEST(LogApprox, SinglePair) {
    const Instance inst({0, 0}, {{0, 1}});
    const auto r = log_approx_graph(inst, quad());
    EXPECT_GE(r.objective.value, kPhi0 - 1e-9);
}

TEST(LogApprox, SingletonsOnlyKeepsZeroAllocation) {
    const Instance inst({0.3, 0.5, 0.2}, {{0}, {1}, {2}, {1}});
    const auto r = log_approx_graph(inst, quad());
    EXPECT_EQ(r.objective.value, 0.3 + 0.5 + 0.2 + 0.5);
    EXPECT_EQ(vec(r).support_size(), 0u);
}

TEST(LogApprox, SingletonsAddedBackInReport) {
    const Instance inst({0.0, 0.0, 0.9}, {{0, 1}, {2}});
    const auto r = log_approx_graph(inst, quad());
    EXPECT_NEAR(r.objective.value, kPhi0 + 0.9, 1e-9);
}

TEST(LogApproxProperty, NeverExceedsBudget) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 2 + t % 9;
        const Instance inst = random_instance(rng, n, 1 + t % 6);
        std::size_t steps = 0;
        std::size_t last_round = 0;
        log_approx_graph(inst, quad(), [&](const LogApproxStep& s) {
            EXPECT_LE(s.variance_sum, 1.0 + 1e-12);
            EXPECT_NEAR(s.variance_sum, static_cast<double>(s.step) * std::ldexp(1.0, -2 * static_cast<int>(s.round)), 1e-12);
            EXPECT_LE(s.step, std::min<std::size_t>(std::size_t{1} << (2 * s.round), n));
            EXPECT_GE(s.round, last_round);
            last_round = s.round;
            ++steps;
        });
        bool has_pair = false;
        for (const auto& s : inst.sets()) has_pair |= s.size() >= 2;
        if (has_pair) EXPECT_GT(steps, 0u);
    }
}

TEST(LogApproxProperty, ObjectiveMatchesOracle) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 5; ++t) {
        const Instance inst = random_instance(rng, 3 + t, 4);
        const auto r = log_approx_graph(inst, quad());
        EXPECT_NEAR(r.objective.value, oracle_objective(inst, vec(r).stddevs()), 1e-7);
    }
}

// ---------------------------------------------------------------------------

TEST(GreedyFixedVariance, Examples) {
    const Instance one({0, 0, 0}, {{0, 1, 2}});
    const auto a = greedy_fixed_variance(one, 1.0, 1, quad());
    ASSERT_EQ(a.chosen.size(), 1u);
    EXPECT_NEAR(a.objective.value, kPhi0, 1e-9);

    const Instance inst({0.2, 0.5, 0.1}, {{0, 1}, {2}});
    const auto none = greedy_fixed_variance(inst, 0.5, 0, quad());
    EXPECT_TRUE(none.chosen.empty());
    EXPECT_NEAR(none.objective.value, 0.5 + 0.1, 1e-15);

    const Instance split({0, 0, 0}, {{0}, {1, 2}});
    const auto b = greedy_fixed_variance(split, 1.0, 1, quad());
    ASSERT_EQ(b.chosen.size(), 1u);
    EXPECT_EQ(b.chosen[0], 1u);  // singleton gains nothing; lowest index among {1,2}

    EXPECT_THROW(greedy_fixed_variance(split, 0.5, 3, quad()), InvalidArgument);
    EXPECT_THROW(greedy_fixed_variance(split, 0.0, 1, quad()), InvalidArgument);
}

TEST(GreedyFixedVarianceProperty, WithinOneMinusInverseEOfExhaustive) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 8; ++t) {
        const std::size_t n = 3 + t % 5;
        const Instance inst = random_instance(rng, n, 2 + t % 4);
        const std::size_t c = 1 + t % 3;
        const double level = 1.0 / static_cast<double>(c);
        const auto g = greedy_fixed_variance(inst, level, c, quad());

        double best = -1.0;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != c) continue;
            std::vector<double> sd(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (mask >> i & 1u) sd[i] = std::sqrt(level);
            }
            best = std::max(best, graph_objective(inst, AllocationVector(sd), quad()).value);
        }
        EXPECT_GE(g.objective.value, (1.0 - std::exp(-1.0)) * best - 1e-9);
        EXPECT_LE(g.objective.value, best + 1e-9);
    }
}

// ---------------------------------------------------------------------------

TEST(BruteForce, Examples) {
    const auto cycle = brute_force_grid(cycle_instance(4, 0.0), 0.25, quad());
    EXPECT_NEAR(cycle.objective.value, kCycle4, 1e-7);
    for (double s : vec(cycle).stddevs()) EXPECT_DOUBLE_EQ(s, 0.5);

    const Instance single({0.3}, {{0}});
    EXPECT_NEAR(brute_force_grid(single, 0.1, quad()).objective.value, 0.3, 1e-12);

    const Instance pair({0, 0}, {{0, 1}});
    EXPECT_NEAR(brute_force_grid(pair, 0.5, quad()).objective.value, kPhi0, 1e-12);
}

TEST(BruteForce, BudgetAndMonteCarloDowngrade) {
    try {
        brute_force_grid(cycle_instance(6, 0.0), 0.05, quad(), 1000);
        FAIL() << "expected BudgetExceeded";
    } catch (const BudgetExceeded& e) {
        EXPECT_GT(e.required(), 1000u);
    }
    const auto r = brute_force_grid(cycle_instance(3, 0.0), 0.5, mc(1000));
    EXPECT_EQ(r.objective.half_width, 0.0);
}

TEST(CycleProperty, UniformIsGridOptimal) {
    for (std::size_t n : {3u, 4u}) {
        for (double mu : {0.0, 0.5}) {
            const Instance c = cycle_instance(n, mu);
            const double u = solve_uniform(c, quad()).objective.value;
            const double expect =
                static_cast<double>(n) * (mu + kPhi0 * std::sqrt(2.0 / static_cast<double>(n)));
            EXPECT_NEAR(u, expect, 1e-9);
            EXPECT_LE(brute_force_grid(c, 0.25, quad()).objective.value, u + 1e-6);
        }
    }
}

TEST(Uniform, Allocation) {
    EXPECT_EQ(uniform_allocation(cycle_instance(4, 0)).stddevs(), std::vector<double>(4, 0.5));
    const Instance one({0}, {{0}});
    EXPECT_EQ(uniform_allocation(one).stddevs(), std::vector<double>{1.0});
    EXPECT_NEAR(uniform_allocation(cycle_instance(7, 0)).variance_sum(), 1.0, 1e-15);
    const auto r = solve_uniform(cycle_instance(4, 0), quad());
    EXPECT_EQ(r.support_size, 4u);
    EXPECT_EQ(r.nodes_evaluated, 0u);
}

TEST(SolverProperty, Determinism) {
    const Instance inst = erdos_renyi_instance(6, 5, 0.5, 3);
    const auto a = log_approx_graph(inst, mc(5000, 2));
    const auto b = log_approx_graph(inst, mc(5000, 2));
    EXPECT_EQ(vec(a), vec(b));
    EXPECT_EQ(a.objective.value, b.objective.value);
    EXPECT_EQ(a.objective.half_width, b.objective.half_width);
    EXPECT_EQ(a.nodes_evaluated, b.nodes_evaluated);
    EXPECT_EQ(a.objective_seed, b.objective_seed);
}

TEST(SolverProperty, ReportedObjectiveIsReproducible) {
    const Instance inst({0.1, 0.0, 0.3}, {{0, 1, 2}});
    const auto r = ptas_independent(inst, 0.5, mc(50'000, 4));
    EstimatorConfig again = r.config;
    again.seed = r.objective_seed;
    const auto e = graph_objective(inst, vec(r), again);
    EXPECT_NEAR(e.value, r.objective.value, r.objective.half_width + 1e-6);
}

// ---------------------------------------------------------------------------

TEST(LatticeCount, MatchesEnumeration) {
    auto brute = [](std::size_t dims, std::uint64_t r, bool positive) {
        std::uint64_t count = 0;
        auto rec = [&](auto&& self, std::size_t d, std::uint64_t left) -> void {
            if (d == dims) {
                ++count;
                return;
            }
            for (std::uint64_t a = positive ? 1 : 0; a * a <= left; ++a) self(self, d + 1, left - a * a);
        };
        rec(rec, 0, r);
        return static_cast<double>(count);
    };
    for (std::size_t d = 1; d <= 4; ++d) {
        for (std::uint64_t r : {0u, 1u, 5u, 16u, 64u, 100u}) {
            EXPECT_EQ(count_lattice_points(d, r, false), brute(d, r, false)) << d << " " << r;
            EXPECT_EQ(count_lattice_points(d, r, true), brute(d, r, true)) << d << " " << r;
        }
    }
}
