#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "erto/paretoctl.hpp"
#include "erto/synthetic.hpp"
#include "support/oracles.hpp"

using namespace erto;

namespace {

OptimizationContext single_level_context(double p, std::vector<double> links, int max_degree, double rho = 1e-4) {
  OptimizationContext ctx;
  ctx.d_sd = 250.0;
  ctx.rho = rho;
  ctx.grid = {{p}, max_degree};
  ctx.links_by_level = {std::move(links)};
  ctx.ch = ChannelParams::defaults();
  return ctx;
}

ParetoSolution sol(double p, int n, double pdr, double pmd, double cost) { return {p, n, pdr, pmd, cost}; }

bool same_point(const ParetoSolution& a, const ParetoSolution& b) { return a.p_ts == b.p_ts && a.n_rel == b.n_rel; }

}  // namespace

TEST(Dominance, Basics) {
  EXPECT_TRUE(dominates({0, 0, 0}, {0, 0, 1}));
  EXPECT_FALSE(dominates({0, 0, 1}, {0, 0, 1}));
  EXPECT_FALSE(dominates({0, 1, 0}, {1, 0, 0}));
}

TEST(ObjectiveVector, SingleLink) {
  const auto ctx = single_level_context(0.1, {0.5}, 1);
  const auto f = objective_vector(0.1, 1, ctx);
  ASSERT_TRUE(f);
  EXPECT_DOUBLE_EQ((*f)[0], -0.5);
}

TEST(ObjectiveVector, PoissonAtUnitMean) {
  const auto ch = ChannelParams::defaults();
  const double area = candidate_relay_area(transmission_range(0.1, ch), 250.0);
  const auto ctx = single_level_context(0.1, {0.3, 0.2}, 2, 1.0 / area);
  EXPECT_NEAR((*objective_vector(0.1, 1, ctx))[1], -std::exp(-1.0), 1e-14);
}

TEST(ObjectiveVector, FixtureMatchesComposedOracles) {
  SyntheticContextSpec spec;
  spec.seed = 3;
  const auto ctx = make_synthetic_context(spec);
  for (const auto& ref : oracle::all_points(ctx)) {
    const auto f = objective_vector(ref.p_ts, ref.n_rel, ctx);
    ASSERT_TRUE(f);
    EXPECT_NEAR((*f)[0], -ref.pdr_sc, 1e-14);
    EXPECT_NEAR((*f)[1], -ref.p_md, 1e-12 * ref.p_md + 1e-300);
    EXPECT_NEAR((*f)[2], ref.cost, 1e-12 * ref.cost);
  }
}

TEST(ObjectiveVector, OffGridPowerRejected) {
  const auto ctx = single_level_context(0.1, {0.5}, 1);
  EXPECT_THROW(objective_vector(0.3, 1, ctx), DomainError);
}

TEST(ObjectiveVector, NoCandidatesIsInfeasible) {
  const auto ctx = single_level_context(0.1, {}, 1);
  EXPECT_FALSE(objective_vector(0.1, 1, ctx));
}

TEST(ExhaustiveFront, SinglePointGrid) {
  const auto ctx = single_level_context(0.1, {0.4}, 1);
  const auto front = pareto_front_exhaustive(ctx);
  ASSERT_EQ(front.size(), 1u);
  EXPECT_EQ(front[0].p_ts, 0.1);
  EXPECT_EQ(front[0].n_rel, 1);
}

TEST(ExhaustiveFront, DominatedPointRemoved) {
  const auto a = sol(0.1, 1, 0.9, 0.5, 1.0), b = sol(0.2, 2, 0.8, 0.4, 2.0);
  const auto front = pareto_filter({b, a});
  ASSERT_EQ(front.size(), 1u);
  EXPECT_EQ(front[0], a);
}

TEST(ExhaustiveFront, MatchesBruteForceOnFullGrid) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SyntheticContextSpec spec;
    spec.seed = seed;
    const auto ctx = make_synthetic_context(spec);
    ASSERT_EQ(ctx.grid.power_levels.size(), 71u);
    const auto front = pareto_front_exhaustive(ctx);
    const auto ref = oracle::brute_front(oracle::all_points(ctx));
    ASSERT_EQ(front.size(), ref.size()) << "seed " << seed;
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_TRUE(same_point(front[i], ref[i]));
  }
}

TEST(ExhaustiveFront, NothingFeasibleThrows) {
  const auto ctx = single_level_context(0.1, {0.0, 0.0}, 2);
  EXPECT_THROW(pareto_front_exhaustive(ctx), NoFeasibleTopology);
}

TEST(EvolutionaryFront, SinglePointGrid) {
  const auto ctx = single_level_context(0.1, {0.4}, 1);
  const auto front = pareto_front_evolutionary(ctx);
  ASSERT_EQ(front.size(), 1u);
  EXPECT_EQ(front[0].n_rel, 1);
}

TEST(EvolutionaryFront, SubsetAndCoverageOnFixture) {
  SyntheticContextSpec spec;
  spec.seed = 42;
  const auto ctx = make_synthetic_context(spec);
  const auto exact = pareto_front_exhaustive(ctx);
  EaParams ea;
  ea.seed = 42;
  const auto approx = pareto_front_evolutionary(ctx, ea);
  std::size_t covered = 0;
  for (const auto& a : approx) {
    const bool in = std::any_of(exact.begin(), exact.end(), [&](const ParetoSolution& e) { return same_point(a, e); });
    EXPECT_TRUE(in) << a.p_ts << "," << a.n_rel;
    covered += in;
  }
  EXPECT_GE(static_cast<double>(covered), 0.95 * static_cast<double>(exact.size()));
}

TEST(EvolutionaryFront, DeterministicForSeed) {
  SyntheticContextSpec spec;
  spec.seed = 9;
  const auto ctx = make_synthetic_context(spec);
  EXPECT_EQ(pareto_front_evolutionary(ctx), pareto_front_evolutionary(ctx));
}

TEST(OptimalFeasible, UniqueMaximum) {
  const std::vector<ParetoSolution> front{sol(0.1, 1, 0.5, 0.3, 1), sol(0.2, 2, 0.6, 0.2, 2)};
  const auto f = optimal_feasible_set(front);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0], front[0]);
}

TEST(OptimalFeasible, TiedMaximaBothKept) {
  const std::vector<ParetoSolution> front{sol(0.1, 1, 0.5, 0.3, 1), sol(0.2, 2, 0.6, 0.3, 2), sol(0.3, 3, 0.7, 0.1, 3)};
  EXPECT_EQ(optimal_feasible_set(front).size(), 2u);
}

TEST(OptimalFeasible, FixtureMatchesLinearScan) {
  SyntheticContextSpec spec;
  spec.seed = 5;
  const auto front = pareto_front_exhaustive(make_synthetic_context(spec));
  double best = 0.0;
  for (const auto& s : front) best = std::max(best, s.p_md);
  std::vector<ParetoSolution> ref;
  for (const auto& s : front)
    if (std::abs(s.p_md - best) <= 1e-9 * best) ref.push_back(s);
  EXPECT_EQ(optimal_feasible_set(front), ref);
}

TEST(BalancedSelect, Singleton) {
  const std::vector<ParetoSolution> f{sol(0.2, 3, 0.5, 0.1, 1.0)};
  EXPECT_EQ(balanced_select(f), f[0]);
}

TEST(BalancedSelect, OddPicksMiddle) {
  const std::vector<ParetoSolution> f{sol(0.3, 3, 0.9, 0.1, 3.0), sol(0.1, 1, 0.5, 0.1, 1.0), sol(0.2, 2, 0.7, 0.1, 2.0)};
  EXPECT_EQ(balanced_select(f), f[2]);
}

TEST(BalancedSelect, EvenWithLargerPdrVariancePrefersHigherPdr) {
  // pdr spread 0.1..0.9 dwarfs cost spread 0.010..0.013.
  const std::vector<ParetoSolution> f{sol(0.1, 1, 0.1, 0.1, 0.010), sol(0.2, 2, 0.4, 0.1, 0.011),
                                      sol(0.3, 3, 0.6, 0.1, 0.012), sol(0.4, 4, 0.9, 0.1, 0.013)};
  EXPECT_EQ(balanced_select(f), f[2]);
}

TEST(BalancedSelect, EvenWithLargerCostVariancePrefersLowerCost) {
  const std::vector<ParetoSolution> f{sol(0.1, 1, 0.50, 0.1, 1.0), sol(0.2, 2, 0.51, 0.1, 4.0),
                                      sol(0.3, 3, 0.52, 0.1, 9.0), sol(0.4, 4, 0.53, 0.1, 16.0)};
  EXPECT_EQ(balanced_select(f), f[1]);
}

TEST(BalancedSelect, LowerMiddleRuleWhenItHasLargerPdr) {
  // The branch where element m/2 carries the larger PDRsc, exercised on the
  // pair directly since a sorted set never presents it.
  const auto lower = sol(0.1, 1, 0.8, 0.1, 1.0), upper = sol(0.2, 2, 0.6, 0.1, 2.0);
  EXPECT_TRUE(detail::pick_lower_middle(lower, upper, 1.0, 0.5));
  EXPECT_FALSE(detail::pick_lower_middle(upper, lower, 1.0, 0.5));
  EXPECT_TRUE(detail::pick_lower_middle(lower, upper, 0.1, 0.1));
}

TEST(BalancedSelect, EmptyThrows) { EXPECT_THROW(balanced_select(std::vector<ParetoSolution>{}), DomainError); }

TEST(AdjustPower, KeepWhenOnFront) {
  const std::vector<ParetoSolution> front{sol(0.1, 1, 0.5, 0.3, 1), sol(0.2, 2, 0.6, 0.2, 2)};
  const auto d = adjust_power(0.2, 2, front, optimal_feasible_set(front), 0.005);
  EXPECT_TRUE(d.keep);
}

TEST(AdjustPower, MoveToBalancedWhenOff) {
  const std::vector<ParetoSolution> front{sol(0.1, 1, 0.5, 0.3, 1), sol(0.2, 2, 0.6, 0.2, 2)};
  const auto feasible = optimal_feasible_set(front);
  const auto d = adjust_power(0.5, 4, front, feasible, 0.005);
  EXPECT_FALSE(d.keep);
  EXPECT_EQ(d.target, balanced_select(feasible));
}

TEST(AdjustPower, FeasibleSetOfNonEmptyFrontIsNonEmpty) {
  SyntheticContextSpec spec;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    spec.seed = seed;
    const auto front = pareto_front_exhaustive(make_synthetic_context(spec));
    EXPECT_FALSE(optimal_feasible_set(front).empty());
  }
}

TEST(OptimalFeasible, SortedByPdrIsSortedByCost) {
  SyntheticContextSpec spec;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    spec.seed = seed;
    auto f = optimal_feasible_set(pareto_front_exhaustive(make_synthetic_context(spec)));
    std::sort(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.pdr_sc < b.pdr_sc; });
    for (std::size_t i = 1; i < f.size(); ++i) EXPECT_GE(f[i].cost, f[i - 1].cost - 1e-12);
  }
}

TEST(DecisionGrid, LevelLookup) {
  const auto g = DecisionGrid::from(RadioParams{}, 5);
  EXPECT_EQ(g.size(), 71u * 5u);
  EXPECT_EQ(g.level_of(0.1, g.half_step()), 0u);
  EXPECT_EQ(g.level_of(0.8, g.half_step()), 70u);
  EXPECT_EQ(g.level_of(0.453, g.half_step()), 35u);
  EXPECT_FALSE(g.level_of(0.9, g.half_step()));
}
