#pragma once

// Routing strategies behind one interface: the power-controlled ERTO
// forwarder and simplified ExOR / TCOR / EEOR baselines.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "erto/energymodel.hpp"
#include "erto/errors.hpp"
#include "erto/geometry.hpp"
#include "erto/linkmodel.hpp"
#include "erto/paretoctl.hpp"
#include "erto/rng.hpp"

namespace erto {

using NodeId = std::uint32_t;

struct NodeState {
  NodeId id = 0;
  Point position;
  double energy = 0.0;
  double tx_power = 0.0;
  bool alive = true;
};

struct Neighbor {
  NodeId id;
  double dist;
};

/// A transmitter whose coverage reaches a given receiver.
struct Coverer {
  NodeId id;
  double power;
  double dist;
};

/// Read-only picture of the network that a sender decides on: positions,
/// powers and liveness of every node, the concurrent transmitters that cover
/// each node, and static neighbor lists out to the p_max range.
struct NetView {
  std::span<const NodeState> nodes;
  std::span<const std::vector<Neighbor>> neighbors;  // indexed by node id
  std::span<const std::vector<Coverer>> coverers;    // indexed by node id
  const ChannelParams* ch = nullptr;
  const RadioParams* rp = nullptr;
  double area_m2 = 1e6;

  const NodeState& node(NodeId id) const { return nodes[id]; }

  double rho() const {
    const auto alive = std::count_if(nodes.begin(), nodes.end(), [](const NodeState& n) { return n.alive; });
    return static_cast<double>(std::max<std::ptrdiff_t>(alive, 1)) / area_m2;
  }

  /// Interferers at `receiver` for a transmission by `sender`.
  std::vector<Interferer> interferers(NodeId receiver, NodeId sender) const {
    std::vector<Interferer> out;
    for (const Coverer& c : coverers[receiver])
      if (c.id != sender && c.id != receiver) out.push_back({c.power, c.dist});
    return out;
  }
};

/// Owns everything a NetView points at; handy for building fixtures.
class NetworkSnapshot {
 public:
  NetworkSnapshot(std::vector<NodeState> nodes, ChannelParams ch, RadioParams rp, double area_m2)
      : nodes_(std::move(nodes)), ch_(ch), rp_(rp), area_m2_(area_m2) {
    rebuild_neighbors();
    coverers_.assign(nodes_.size(), {});
  }

  std::vector<NodeState>& nodes() { return nodes_; }
  const ChannelParams& channel() const { return ch_; }
  const RadioParams& radio() const { return rp_; }

  void rebuild_neighbors() {
    const double r_max = transmission_range(rp_.p_max, ch_);
    neighbors_.assign(nodes_.size(), {});
    for (const auto& a : nodes_)
      for (const auto& b : nodes_) {
        if (a.id == b.id) continue;
        const double dist = distance(a.position, b.position);
        if (dist <= r_max) neighbors_[a.id].push_back({b.id, dist});
      }
  }

  /// Record which of `transmitting` (with their current tx_power) cover each
  /// node.
  void set_transmitting(std::span<const NodeId> transmitting) {
    coverers_.assign(nodes_.size(), {});
    for (NodeId t : transmitting) {
      const auto& tn = nodes_[t];
      const double range = transmission_range(tn.tx_power, ch_);
      for (const auto& n : nodes_) {
        if (n.id == t) continue;
        const double dist = distance(tn.position, n.position);
        if (dist <= range) coverers_[n.id].push_back({t, tn.tx_power, dist});
      }
    }
  }

  NetView view() const { return {nodes_, neighbors_, coverers_, &ch_, &rp_, area_m2_}; }

 private:
  std::vector<NodeState> nodes_;
  ChannelParams ch_;
  RadioParams rp_;
  double area_m2_;
  std::vector<std::vector<Neighbor>> neighbors_;
  std::vector<std::vector<Coverer>> coverers_;
};

struct CandidateMember {
  NodeId id;
  double p_i;
  double etx;
};

/// Forwarding candidates in priority order (first = highest priority).
struct CandidateSet {
  NodeId sender = 0;
  std::vector<CandidateMember> members;

  bool empty() const { return members.empty(); }
  std::size_t size() const { return members.size(); }
  bool contains(NodeId id) const {
    return std::any_of(members.begin(), members.end(), [&](const CandidateMember& m) { return m.id == id; });
  }
};

struct RoutingDecision {
  double tx_power = 0.0;
  CandidateSet candidate_set;
  bool adjusted = false;  // power control moved the sender's power
  bool fallback = false;  // no feasible topology; sent at p_max

  bool routing_void() const { return candidate_set.empty(); }
};

enum class LinkEstimator {
  WithInterference,  // pdr_sn: fading, noise, threshold and concurrent interferers
  ThresholdOnly,     // reception_prob alone
};

namespace detail {

/// Alive neighbors inside the candidate relay area at range `r_max`
/// (within range of s and strictly closer to d than s is).
struct LensMember {
  NodeId id;
  double dist_s;
};

inline std::vector<LensMember> lens_members(NodeId s, NodeId d, const NetView& view, double range) {
  const Point ps = view.node(s).position, pd = view.node(d).position;
  const double d_sd = distance(ps, pd);
  std::vector<LensMember> out;
  for (const Neighbor& nb : view.neighbors[s]) {
    if (nb.dist > range) continue;
    const auto& n = view.node(nb.id);
    if (!n.alive) continue;
    if (distance(n.position, pd) < d_sd) out.push_back({nb.id, nb.dist});
  }
  return out;
}

inline double estimate(LinkEstimator how, NodeId s, const LensMember& m, double power, const NetView& view) {
  if (how == LinkEstimator::ThresholdOnly) return reception_prob(power, m.dist_s, *view.ch);
  return pdr_sn(power, m.dist_s, view.interferers(m.id, s), *view.ch);
}

inline void order_by_etx(std::vector<CandidateMember>& members) {
  std::sort(members.begin(), members.end(), [](const CandidateMember& a, const CandidateMember& b) {
    return a.etx != b.etx ? a.etx < b.etx : a.id < b.id;
  });
}

/// Build members from lens nodes and their p_i, dropping unreachable links.
inline CandidateSet make_candidate_set(NodeId s, std::span<const LensMember> lens, std::span<const double> p) {
  CandidateSet cs{s, {}};
  for (std::size_t i = 0; i < lens.size(); ++i)
    if (p[i] > 0.0) cs.members.push_back({lens[i].id, p[i], etx(p[i])});
  order_by_etx(cs.members);
  return cs;
}

}  // namespace detail

/// Candidate set of s toward d at transmit power `power`, ordered by
/// ascending ETX. Empty when no alive neighbor makes progress.
inline CandidateSet build_candidate_set(NodeId s, NodeId d, const NetView& view, double power,
                                        LinkEstimator how = LinkEstimator::WithInterference) {
  const double range = transmission_range(power, *view.ch);
  const auto lens = detail::lens_members(s, d, view, range);
  std::vector<double> p;
  p.reserve(lens.size());
  for (const auto& m : lens) p.push_back(detail::estimate(how, s, m, power, view));
  return detail::make_candidate_set(s, lens, p);
}

/// As build_candidate_set at the sender's current power, but a void is an
/// error.
inline CandidateSet candidate_set(NodeId s, NodeId d, const NetView& view,
                                  LinkEstimator how = LinkEstimator::WithInterference) {
  if (!view.node(s).alive) throw DomainError("candidate_set: sender is dead");
  if (s == d) throw DomainError("candidate_set: sender is the destination");
  auto cs = build_candidate_set(s, d, view, view.node(s).tx_power, how);
  if (cs.empty()) throw RoutingVoid("candidate_set: no neighbor closer to the destination");
  return cs;
}

/// Highest-priority member that received, if any.
inline std::optional<NodeId> opportunistic_relay(const CandidateSet& candidates, const std::vector<bool>& outcomes) {
  if (outcomes.size() != candidates.members.size()) throw DomainError("opportunistic_relay: outcome count mismatch");
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if (outcomes[i]) return candidates.members[i].id;
  return std::nullopt;
}

class RoutingStrategy {
 public:
  virtual ~RoutingStrategy() = default;
  virtual std::string_view name() const = 0;
  virtual RoutingDecision decide(NodeId s, NodeId d, const NetView& view) = 0;
};

/// Fixed power, candidates prioritized by threshold-only ETX.
class ExorStrategy final : public RoutingStrategy {
 public:
  explicit ExorStrategy(double fixed_power = ChannelParams::kCalibrationPower) : power_(fixed_power) {}
  std::string_view name() const override { return "exor"; }

  RoutingDecision decide(NodeId s, NodeId d, const NetView& view) override {
    RoutingDecision out;
    out.tx_power = power_;
    out.candidate_set = build_candidate_set(s, d, view, power_, LinkEstimator::ThresholdOnly);
    out.adjusted = view.node(s).tx_power != power_;
    return out;
  }

 private:
  double power_;
};

/// Grid power minimizing expected energy cost over the whole in-lens
/// candidate set, with interference-free link estimates.
class TcorStrategy final : public RoutingStrategy {
 public:
  std::string_view name() const override { return "tcor"; }

  RoutingDecision decide(NodeId s, NodeId d, const NetView& view) override {
    const auto& rp = *view.rp;
    const auto levels = rp.power_levels();
    const auto lens = detail::lens_members(s, d, view, transmission_range(levels.back(), *view.ch));
    double best_cost = std::numeric_limits<double>::infinity();
    std::optional<double> best_power;
    std::vector<double> p;
    for (double power : levels) {
      const double range = transmission_range(power, *view.ch);
      p.clear();
      for (const auto& m : lens)
        if (m.dist_s <= range) p.push_back(reception_prob(power, m.dist_s, *view.ch));
      if (p.empty() || !(pdr_sc(p) > 0.0)) continue;
      const double c = expected_energy_cost(power, static_cast<int>(p.size()), p, rp);
      if (c < best_cost) {
        best_cost = c;
        best_power = power;
      }
    }
    RoutingDecision out;
    out.tx_power = best_power.value_or(view.node(s).tx_power);
    if (best_power) out.candidate_set = build_candidate_set(s, d, view, *best_power, LinkEstimator::ThresholdOnly);
    out.candidate_set.sender = s;
    out.adjusted = out.tx_power != view.node(s).tx_power;
    return out;
  }
};

/// Scans powers upward; at each, candidates sorted by energetic cost and the
/// cheapest prefix of that list is the forwarder set.
class EeorStrategy final : public RoutingStrategy {
 public:
  std::string_view name() const override { return "eeor"; }

  RoutingDecision decide(NodeId s, NodeId d, const NetView& view) override {
    const auto& rp = *view.rp;
    const auto levels = rp.power_levels();
    const auto lens = detail::lens_members(s, d, view, transmission_range(levels.back(), *view.ch));
    double best_cost = std::numeric_limits<double>::infinity();
    double best_power = view.node(s).tx_power;
    std::vector<CandidateMember> best_members;

    for (double power : levels) {
      const double range = transmission_range(power, *view.ch);
      std::vector<CandidateMember> ranked;
      for (const auto& m : lens) {
        if (m.dist_s > range) continue;
        const double p = reception_prob(power, m.dist_s, *view.ch);
        if (p > 0.0) ranked.push_back({m.id, p, etx(p)});
      }
      // Per-candidate energetic cost (E_r + xi P) delta / p^2 ranks like ETX.
      detail::order_by_etx(ranked);
      std::vector<double> prefix;
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        prefix.push_back(ranked[k].p_i);
        const double c = expected_energy_cost(power, static_cast<int>(k + 1), prefix, rp);
        if (c < best_cost) {
          best_cost = c;
          best_power = power;
          best_members.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k + 1));
        }
      }
    }
    RoutingDecision out;
    out.tx_power = best_power;
    out.candidate_set = {s, std::move(best_members)};
    out.adjusted = out.tx_power != view.node(s).tx_power;
    return out;
  }
};

enum class FrontSolver { Exhaustive, Evolutionary };

struct ErtoOptions {
  FrontSolver solver = FrontSolver::Evolutionary;
  EaParams ea;
  BalancedOptions balanced;
  bool memoize = true;
};

/// Interference-aware power control: keep the current (power, degree) if it
/// is Pareto-optimal, else move to the balanced member of the optimal
/// feasible set, then forward to every in-lens neighbor by ETX priority.
class ErtoStrategy final : public RoutingStrategy {
 public:
  explicit ErtoStrategy(ErtoOptions opt = {}) : opt_(opt) {}
  std::string_view name() const override { return "erto"; }

  /// Context the sender optimizes over: per-level p_i of in-lens neighbors.
  static OptimizationContext build_context(NodeId s, NodeId d, const NetView& view) {
    const auto& ch = *view.ch;
    const auto levels = view.rp->power_levels();
    const double r_max = transmission_range(levels.back(), ch);
    const auto lens = detail::lens_members(s, d, view, r_max);
    int neighbors = 0;
    for (const Neighbor& nb : view.neighbors[s])
      if (nb.dist <= r_max && view.node(nb.id).alive) ++neighbors;

    OptimizationContext ctx;
    ctx.d_sd = distance(view.node(s).position, view.node(d).position);
    ctx.rho = view.rho();
    ctx.grid = {levels, std::max(1, neighbors)};
    ctx.ch = ch;
    ctx.rp = *view.rp;
    std::vector<std::vector<Interferer>> interf;
    interf.reserve(lens.size());
    for (const auto& m : lens) interf.push_back(view.interferers(m.id, s));
    for (double p : levels) {
      const double range = transmission_range(p, ch);
      std::vector<double> links;
      for (std::size_t i = 0; i < lens.size(); ++i)
        if (lens[i].dist_s <= range) links.push_back(pdr_sn(p, lens[i].dist_s, interf[i], ch));
      ctx.links_by_level.push_back(std::move(links));
    }
    return ctx;
  }

  RoutingDecision decide(NodeId s, NodeId d, const NetView& view) override {
    const double current = view.node(s).tx_power;
    const auto ctx = build_context(s, d, view);
    const double chosen = choose_power(ctx, current);

    RoutingDecision out;
    out.fallback = fallback_;
    out.tx_power = chosen;
    out.adjusted = chosen != current;
    out.candidate_set = build_candidate_set(s, d, view, chosen, LinkEstimator::WithInterference);
    return out;
  }

  /// Decision core on a prepared context: returns the power to use.
  double choose_power(const OptimizationContext& ctx, double current) {
    fallback_ = false;
    std::uint64_t key = 0;
    if (opt_.memoize) {
      key = context_key(ctx, current);
      if (auto it = memo_.find(key); it != memo_.end()) {
        fallback_ = it->second.fallback;
        return it->second.power;
      }
    }
    const double chosen = solve(ctx, current);
    if (opt_.memoize) memo_[key] = {chosen, fallback_};
    return chosen;
  }

 private:
  struct Memo {
    double power;
    bool fallback;
  };

  double solve(const OptimizationContext& ctx, double current) {
    const ObjectiveTable table(ctx);
    const double eps_p = ctx.grid.half_step();
    const auto level = ctx.grid.level_of(current, eps_p);
    const int current_n = level ? static_cast<int>(std::min<std::size_t>(table.available(*level),
                                                                         static_cast<std::size_t>(ctx.grid.max_degree)))
                                : 0;

    if (opt_.solver == FrontSolver::Exhaustive) {
      auto all = table.all_feasible();
      if (all.empty()) return fall_back(ctx);
      // On the exhaustive front exactly when no grid point dominates it.
      if (level && current_n > 0) {
        if (auto cur = table.evaluate(*level, current_n)) {
          const auto o = cur->objectives();
          const bool dominated =
              std::any_of(all.begin(), all.end(), [&](const ParetoSolution& x) { return dominates(x.objectives(), o); });
          if (!dominated) return current;
        }
      }
      const auto front = pareto_filter(std::move(all));
      const auto feasible = optimal_feasible_set(front);
      return adjust_power(current, current_n, front, feasible, eps_p, opt_.balanced).target.p_ts;
    }

    std::vector<ParetoSolution> front;
    try {
      front = pareto_front_evolutionary(ctx, opt_.ea);
    } catch (const NoFeasibleTopology&) {
      return fall_back(ctx);
    }
    const auto feasible = optimal_feasible_set(front);
    const auto decision = adjust_power(current, current_n, front, feasible, eps_p, opt_.balanced);
    return decision.keep ? current : decision.target.p_ts;
  }

  double fall_back(const OptimizationContext& ctx) {
    fallback_ = true;
    return ctx.grid.power_levels.back();
  }

  static std::uint64_t context_key(const OptimizationContext& ctx, double current) {
    std::uint64_t h = rng::splitmix64(std::bit_cast<std::uint64_t>(current));
    auto mix = [&](double v) { h = rng::splitmix64(h ^ std::bit_cast<std::uint64_t>(v)); };
    mix(ctx.d_sd);
    mix(ctx.rho);
    mix(static_cast<double>(ctx.grid.max_degree));
    for (const auto& level : ctx.links_by_level) {
      mix(static_cast<double>(level.size()));
      for (double p : level) mix(p);
    }
    return h;
  }

  ErtoOptions opt_;
  bool fallback_ = false;
  std::unordered_map<std::uint64_t, Memo> memo_;
};

inline std::unique_ptr<RoutingStrategy> make_strategy(std::string_view name, const ErtoOptions& erto = {},
                                                      double fixed_power = ChannelParams::kCalibrationPower) {
  if (name == "erto") return std::make_unique<ErtoStrategy>(erto);
  if (name == "exor") return std::make_unique<ExorStrategy>(fixed_power);
  if (name == "tcor") return std::make_unique<TcorStrategy>();
  if (name == "eeor") return std::make_unique<EeorStrategy>();
  throw ConfigError("unknown strategy '" + std::string(name) + "' (expected erto, exor, tcor or eeor)");
}

inline const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names{"erto", "exor", "tcor", "eeor"};
  return names;
}

}  // namespace erto
