#pragma once

// Three-objective topology control over the (transmit power, relay degree)
// grid:
//   f1 = -pdr_sc      delivery to the candidate set
//   f2 = -p_md        probability that the relay degree is realized
//   f3 = cost         expected one-hop energy
// All objectives are minimized.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "erto/energymodel.hpp"
#include "erto/errors.hpp"
#include "erto/geometry.hpp"
#include "erto/linkmodel.hpp"
#include "erto/rng.hpp"

namespace erto {

using Objectives = std::array<double, 3>;

/// Component-wise minimization dominance.
inline bool dominates(const Objectives& a, const Objectives& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

struct DecisionGrid {
  std::vector<double> power_levels;  // strictly increasing
  int max_degree = 1;                // degrees are 1..max_degree

  static DecisionGrid from(const RadioParams& rp, int neighbor_count) {
    return {rp.power_levels(), std::max(1, neighbor_count)};
  }

  std::size_t size() const { return power_levels.size() * static_cast<std::size_t>(max_degree); }

  /// Index of the level within `tol` of p, if any.
  std::optional<std::size_t> level_of(double p, double tol) const {
    auto it = std::lower_bound(power_levels.begin(), power_levels.end(), p - tol);
    if (it != power_levels.end() && std::abs(*it - p) <= tol) return static_cast<std::size_t>(it - power_levels.begin());
    return std::nullopt;
  }

  /// Half the smallest spacing between levels; the membership tolerance.
  double half_step() const {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < power_levels.size(); ++i) gap = std::min(gap, power_levels[i] - power_levels[i - 1]);
    return std::isfinite(gap) ? gap / 2.0 : 1e-9;
  }

  void validate() const {
    if (power_levels.empty()) throw DomainError("grid: no power levels");
    for (std::size_t i = 1; i < power_levels.size(); ++i)
      if (!(power_levels[i] > power_levels[i - 1])) throw DomainError("grid: power levels must be strictly increasing");
    if (max_degree < 1) throw DomainError("grid: empty degree range");
  }
};

struct ParetoSolution {
  double p_ts = 0.0;
  int n_rel = 0;
  double pdr_sc = 0.0;
  double p_md = 0.0;
  double cost = 0.0;

  Objectives objectives() const { return {-pdr_sc, -p_md, cost}; }

  friend bool operator==(const ParetoSolution&, const ParetoSolution&) = default;
};

/// Everything a sender knows when it optimizes one hop.
struct OptimizationContext {
  double d_sd = 0.0;
  double rho = 0.0;
  DecisionGrid grid;
  // p_i of the in-lens candidates, one list per grid power level.
  std::vector<std::vector<double>> links_by_level;
  ChannelParams ch;
  RadioParams rp;

  void validate() const {
    grid.validate();
    if (links_by_level.size() != grid.power_levels.size())
      throw DomainError("context: neighbor links must be given for every power level");
    if (!(d_sd > 0.0)) throw DomainError("context: d_sd must be positive");
    if (!(rho > 0.0)) throw DomainError("context: rho must be positive");
  }
};

/// Objective values for every grid point, precomputed per power level so each
/// (level, degree) lookup is O(1).
class ObjectiveTable {
 public:
  explicit ObjectiveTable(const OptimizationContext& ctx) : ctx_(&ctx) {
    ctx.validate();
    const std::size_t levels = ctx.grid.power_levels.size();
    miss_.resize(levels);
    lambda_.resize(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      std::vector<double> p = ctx.links_by_level[l];
      for (double v : p) detail::require_probability(v);
      std::sort(p.begin(), p.end(), std::greater<>());
      // miss_[l][k] = prod over the k best candidates of (1 - p_i)
      auto& m = miss_[l];
      m.reserve(p.size() + 1);
      m.push_back(1.0);
      for (double v : p) m.push_back(m.back() * (1.0 - v));
      const double range = transmission_range(ctx.grid.power_levels[l], ctx.ch);
      lambda_[l] = ctx.rho * candidate_relay_area(range, ctx.d_sd);
    }
  }

  const OptimizationContext& context() const { return *ctx_; }
  std::size_t levels() const { return miss_.size(); }
  int max_degree() const { return ctx_->grid.max_degree; }
  std::size_t available(std::size_t level) const { return miss_[level].size() - 1; }

  /// nullopt when no candidate with p_i > 0 exists at this level.
  std::optional<ParetoSolution> evaluate(std::size_t level, int n_rel) const {
    if (level >= levels() || n_rel < 1 || n_rel > max_degree()) throw DomainError("objective: point outside the grid");
    const auto& m = miss_[level];
    const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(n_rel), m.size() - 1);
    const double sc = 1.0 - m[used];
    if (used == 0 || !(sc > 0.0)) return std::nullopt;
    const double p = ctx_->grid.power_levels[level];
    ParetoSolution s;
    s.p_ts = p;
    s.n_rel = n_rel;
    s.pdr_sc = sc;
    s.p_md = poisson_pmf(lambda_[level], n_rel);
    s.cost = (n_rel * ctx_->rp.E_r + ctx_->rp.xi * p) * ctx_->rp.delta() / (sc * sc);
    return s;
  }

  std::vector<ParetoSolution> all_feasible() const {
    std::vector<ParetoSolution> out;
    out.reserve(ctx_->grid.size());
    for (std::size_t l = 0; l < levels(); ++l)
      for (int n = 1; n <= max_degree(); ++n)
        if (auto s = evaluate(l, n)) out.push_back(*s);
    return out;
  }

 private:
  const OptimizationContext* ctx_;
  std::vector<std::vector<double>> miss_;
  std::vector<double> lambda_;
};

/// (f1, f2, f3) at a grid point. f1 and f3 use the n_rel best candidates, or
/// all of them when fewer exist; nullopt marks an infeasible point.
inline std::optional<Objectives> objective_vector(double p_ts, int n_rel, const OptimizationContext& ctx) {
  const ObjectiveTable table(ctx);
  const auto level = ctx.grid.level_of(p_ts, ctx.grid.half_step());
  if (!level) throw DomainError("objective_vector: power is not a grid level");
  if (auto s = table.evaluate(*level, n_rel)) return s->objectives();
  return std::nullopt;
}

namespace detail {

inline bool by_grid_position(const ParetoSolution& a, const ParetoSolution& b) {
  return a.p_ts != b.p_ts ? a.p_ts < b.p_ts : a.n_rel < b.n_rel;
}

}  // namespace detail

/// Non-dominated subset of `points`, returned in (p_ts, n_rel) order.
///
/// After a lexicographic sort no later point can dominate an earlier one, so
/// one pass against the growing front suffices.
inline std::vector<ParetoSolution> pareto_filter(std::vector<ParetoSolution> points) {
  std::sort(points.begin(), points.end(), [](const ParetoSolution& a, const ParetoSolution& b) {
    const auto oa = a.objectives(), ob = b.objectives();
    if (oa != ob) return oa < ob;
    return detail::by_grid_position(a, b);
  });
  std::vector<ParetoSolution> front;
  std::vector<Objectives> front_obj;
  for (const auto& p : points) {
    const auto o = p.objectives();
    const bool dominated =
        std::any_of(front_obj.begin(), front_obj.end(), [&](const Objectives& f) { return dominates(f, o); });
    if (!dominated) {
      front.push_back(p);
      front_obj.push_back(o);
    }
  }
  std::sort(front.begin(), front.end(), detail::by_grid_position);
  return front;
}

/// Exact Pareto front by enumerating the whole grid.
inline std::vector<ParetoSolution> pareto_front_exhaustive(const OptimizationContext& ctx) {
  const ObjectiveTable table(ctx);
  auto feasible = table.all_feasible();
  if (feasible.empty()) throw NoFeasibleTopology("no feasible (power, degree) point");
  return pareto_filter(std::move(feasible));
}

struct EaParams {
  int population = 100;
  int generations = 100;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  std::uint64_t seed = 42;
  // Pareto local search on the archive after the last generation: grid
  // neighbors of every non-dominated point are evaluated until none is new.
  bool local_search = true;
};

namespace detail {

struct Genome {
  std::size_t level;
  int degree;
  friend auto operator<=>(const Genome&, const Genome&) = default;
};

struct Individual {
  Genome g;
  Objectives f;
  int rank = 0;
  double crowding = 0.0;
};

/// Fast non-dominated sort; returns fronts as index lists and fills rank.
inline std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(pop[p].f, pop[q].f))
        dominated_by[p].push_back(q);
      else if (dominates(pop[q].f, pop[p].f))
        ++count[p];
    }
    if (count[p] == 0) {
      pop[p].rank = 0;
      fronts[0].push_back(p);
    }
  }
  for (std::size_t i = 0; !fronts[i].empty(); ++i) {
    std::vector<std::size_t> next;
    for (std::size_t p : fronts[i])
      for (std::size_t q : dominated_by[p])
        if (--count[q] == 0) {
          pop[q].rank = static_cast<int>(i) + 1;
          next.push_back(q);
        }
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

inline void assign_crowding(std::vector<Individual>& pop, const std::vector<std::size_t>& front) {
  for (std::size_t i : front) pop[i].crowding = 0.0;
  if (front.size() <= 2) {
    for (std::size_t i : front) pop[i].crowding = std::numeric_limits<double>::infinity();
    return;
  }
  std::vector<std::size_t> order = front;
  for (std::size_t m = 0; m < 3; ++m) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pop[a].f[m] < pop[b].f[m]; });
    const double lo = pop[order.front()].f[m];
    const double hi = pop[order.back()].f[m];
    pop[order.front()].crowding = std::numeric_limits<double>::infinity();
    pop[order.back()].crowding = std::numeric_limits<double>::infinity();
    if (!(hi > lo) || !std::isfinite(hi - lo)) continue;
    for (std::size_t k = 1; k + 1 < order.size(); ++k)
      pop[order[k]].crowding += (pop[order[k + 1]].f[m] - pop[order[k - 1]].f[m]) / (hi - lo);
  }
}

}  // namespace detail

/// Elitist non-dominated-sorting genetic search over the grid.
///
/// Every evaluated grid point is kept in an archive, and the result is the
/// non-dominated subset of that archive, so a front larger than the
/// population is still reported in full.
inline std::vector<ParetoSolution> pareto_front_evolutionary(const OptimizationContext& ctx, const EaParams& ea = {}) {
  using detail::Genome;
  using detail::Individual;
  if (ea.population < 2 || ea.generations < 0) throw DomainError("evolutionary: population >= 2 and generations >= 0 required");
  const ObjectiveTable table(ctx);
  rng::Stream rs(ea.seed, "pareto.evolutionary");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::map<Genome, std::optional<ParetoSolution>> archive;
  auto evaluate = [&](const Genome& g) -> Objectives {
    auto [it, inserted] = archive.try_emplace(g);
    if (inserted) it->second = table.evaluate(g.level, g.degree);
    return it->second ? it->second->objectives() : Objectives{kInf, kInf, kInf};
  };
  const auto levels = static_cast<std::uint64_t>(table.levels());
  const auto degrees = static_cast<std::uint64_t>(table.max_degree());
  auto random_level = [&] { return static_cast<std::size_t>(rs.below(levels)); };
  auto random_degree = [&] { return 1 + static_cast<int>(rs.below(degrees)); };

  const auto n = static_cast<std::size_t>(ea.population);
  std::vector<Individual> pop;
  pop.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    Genome g{random_level(), random_degree()};
    pop.push_back({g, evaluate(g)});
  }
  for (const auto& front : detail::non_dominated_sort(pop)) detail::assign_crowding(pop, front);

  auto tournament = [&]() -> const Individual& {
    const Individual& a = pop[rs.below(pop.size())];
    const Individual& b = pop[rs.below(pop.size())];
    if (a.rank != b.rank) return a.rank < b.rank ? a : b;
    return b.crowding > a.crowding ? b : a;
  };

  for (int gen = 0; gen < ea.generations; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(n);
    while (offspring.size() < n) {
      Genome c1 = tournament().g;
      Genome c2 = tournament().g;
      // One cut point between the two genes: swap the degree gene.
      if (rs.bernoulli(ea.crossover_rate)) std::swap(c1.degree, c2.degree);
      for (Genome* c : {&c1, &c2}) {
        if (rs.bernoulli(ea.mutation_rate)) c->level = random_level();
        if (rs.bernoulli(ea.mutation_rate)) c->degree = random_degree();
      }
      offspring.push_back({c1, evaluate(c1)});
      if (offspring.size() < n) offspring.push_back({c2, evaluate(c2)});
    }
    pop.insert(pop.end(), offspring.begin(), offspring.end());

    auto fronts = detail::non_dominated_sort(pop);
    std::vector<Individual> next;
    next.reserve(2 * n);
    for (auto& front : fronts) {
      detail::assign_crowding(pop, front);
      if (next.size() + front.size() <= n) {
        for (std::size_t i : front) next.push_back(pop[i]);
        continue;
      }
      std::stable_sort(front.begin(), front.end(),
                       [&](std::size_t a, std::size_t b) { return pop[a].crowding > pop[b].crowding; });
      for (std::size_t k = 0; next.size() < n; ++k) next.push_back(pop[front[k]]);
      break;
    }
    pop = std::move(next);
    for (const auto& front : detail::non_dominated_sort(pop)) detail::assign_crowding(pop, front);
  }

  auto archive_front = [&] {
    std::vector<ParetoSolution> seen;
    for (const auto& [g, s] : archive)
      if (s) seen.push_back(*s);
    return pareto_filter(std::move(seen));
  };
  auto front = archive_front();
  if (front.empty()) throw NoFeasibleTopology("no feasible (power, degree) point found");
  if (!ea.local_search) return front;

  // The population holds at most n points of a front that can be larger, so
  // finish with neighbor moves from the archive front.
  const int max_deg = table.max_degree();
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& s : front) {
      const auto lvl = *ctx.grid.level_of(s.p_ts, ctx.grid.half_step());
      for (int dl = -1; dl <= 1; ++dl)
        for (int dn = -1; dn <= 1; ++dn) {
          const auto l = static_cast<std::ptrdiff_t>(lvl) + dl;
          const int d = s.n_rel + dn;
          if (l < 0 || l >= static_cast<std::ptrdiff_t>(levels) || d < 1 || d > max_deg) continue;
          const Genome g{static_cast<std::size_t>(l), d};
          if (archive.contains(g)) continue;
          evaluate(g);
          grew = true;
        }
    }
    if (grew) front = archive_front();
  }
  return front;
}

/// Front members whose p_md equals the front maximum, up to a relative
/// tolerance.
inline std::vector<ParetoSolution> optimal_feasible_set(std::span<const ParetoSolution> front,
                                                        double eps_rel = 1e-9) {
  if (front.empty()) return {};
  double best = 0.0;
  for (const auto& s : front) best = std::max(best, s.p_md);
  std::vector<ParetoSolution> out;
  for (const auto& s : front)
    if (s.p_md >= best * (1.0 - eps_rel)) out.push_back(s);
  return out;
}

struct BalancedOptions {
  // Rescale each column to [0,1] before taking variances. Off by default:
  // the raw variances are compared as they are.
  bool normalize_variances = false;
};

namespace detail {

inline double population_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

inline std::vector<double> rescaled(std::vector<double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double a = *lo, span = *hi - *lo;
  for (double& x : v) x = span > 0.0 ? (x - a) / span : 0.0;
  return v;
}

/// Even-cardinality choice between the two middle elements. Returns true to
/// pick the lower one (1-indexed m/2), false for (m+2)/2.
///   v_pdr > v_cost: prefer the larger pdr_sc
///   v_pdr < v_cost: prefer the smaller cost
///   equal:          lower middle
inline bool pick_lower_middle(const ParetoSolution& lower, const ParetoSolution& upper, double v_pdr, double v_cost) {
  if (v_pdr > v_cost) return lower.pdr_sc > upper.pdr_sc;
  if (v_pdr < v_cost) return !(lower.cost > upper.cost);
  return true;
}

}  // namespace detail

/// Median-by-pdr_sc member of the optimal feasible set, with the variance
/// rule breaking the even case.
inline ParetoSolution balanced_select(std::span<const ParetoSolution> feasible, BalancedOptions opt = {}) {
  if (feasible.empty()) throw DomainError("balanced_select: empty feasible set");
  std::vector<ParetoSolution> s(feasible.begin(), feasible.end());
  std::sort(s.begin(), s.end(), [](const ParetoSolution& a, const ParetoSolution& b) {
    if (a.pdr_sc != b.pdr_sc) return a.pdr_sc < b.pdr_sc;
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.p_ts != b.p_ts) return a.p_ts < b.p_ts;
    return a.n_rel < b.n_rel;
  });
  const std::size_t m = s.size();
  if (m % 2 == 1) return s[(m + 1) / 2 - 1];

  std::vector<double> pdr, cost;
  for (const auto& x : s) {
    pdr.push_back(x.pdr_sc);
    cost.push_back(x.cost);
  }
  if (opt.normalize_variances) {
    pdr = detail::rescaled(std::move(pdr));
    cost = detail::rescaled(std::move(cost));
  }
  const double v_pdr = detail::population_variance(pdr);
  const double v_cost = detail::population_variance(cost);
  const ParetoSolution& lower = s[m / 2 - 1];
  const ParetoSolution& upper = s[m / 2];
  return detail::pick_lower_middle(lower, upper, v_pdr, v_cost) ? lower : upper;
}

struct PowerDecision {
  bool keep = true;
  ParetoSolution target;  // meaningful when !keep
};

/// Keep the current operating point if it is on the front; otherwise move to
/// the balanced member of the optimal feasible set.
inline PowerDecision adjust_power(double current_p, int current_n, std::span<const ParetoSolution> front,
                                  std::span<const ParetoSolution> feasible, double eps_p, BalancedOptions opt = {}) {
  if (front.empty()) throw DomainError("adjust_power: empty front");
  for (const auto& s : front)
    if (s.n_rel == current_n && std::abs(s.p_ts - current_p) <= eps_p) return {true, s};
  return {false, balanced_select(feasible, opt)};
}

}  // namespace erto
