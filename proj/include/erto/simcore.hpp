#pragma once

// Seeded slotted discrete-event simulator: uniform node placement, CBR flows,
// concurrent-transmission interference, Bernoulli receptions, energy
// accounting and run metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "erto/energymodel.hpp"
#include "erto/errors.hpp"
#include "erto/geometry.hpp"
#include "erto/linkmodel.hpp"
#include "erto/protocols.hpp"
#include "erto/rng.hpp"

namespace erto {

enum class LinkModelKind {
  Analytic,  // pdr_sn with the slot's actual interferers
  Ideal,     // every in-range candidate receives; for sanity fixtures
};

struct SimConfig {
  double area_w = 1000.0;  // [m]
  double area_h = 1000.0;  // [m]
  int node_count = 100;
  int cbr_pairs = 30;
  double cbr_rate = 15000.0 / 1024.0;  // packets/s per flow
  double sim_time = 300.0;             // [s]
  std::uint64_t seed = 42;
  std::string strategy = "erto";
  ChannelParams ch = ChannelParams::defaults();
  RadioParams rp;
  int retx_limit = 7;
  double coordination_delay = 0.0;  // extra per-hop delay [s]
  double initial_energy = 5.0;      // [J]
  double initial_power = 0.1;       // [W]
  int queue_capacity = 50;          // packets per node
  bool half_duplex = true;          // a transmitting node cannot receive
  LinkModelKind link_model = LinkModelKind::Analytic;
  FrontSolver front_solver = FrontSolver::Exhaustive;
  EaParams ea;
  std::vector<double> residual_sample_times{50, 100, 150, 200, 250, 300};

  double area_m2() const { return area_w * area_h; }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (!(area_w > 0.0) || !(area_h > 0.0)) fail("area must be positive");
    if (node_count < 2) fail("node_count must be >= 2");
    if (cbr_pairs < 1) fail("cbr_pairs must be >= 1");
    if (!(cbr_rate > 0.0)) fail("cbr_rate must be positive");
    if (!(sim_time > 0.0)) fail("sim_time must be positive");
    if (retx_limit < 1) fail("retx_limit must be >= 1");
    if (!(coordination_delay >= 0.0)) fail("coordination_delay must be >= 0");
    if (!(initial_energy > 0.0)) fail("initial_energy must be positive");
    if (queue_capacity < 1) fail("queue_capacity must be >= 1");
    ch.validate();
    rp.validate();
    if (!(initial_power >= rp.p_min - 1e-12 && initial_power <= rp.p_max + 1e-12))
      fail("initial_power must lie within [p_min, p_max]");
    make_strategy(strategy);
  }
};

/// Min-heap of timed events; ties resolve by insertion order.
template <class T>
class EventQueue {
 public:
  struct Entry {
    double time;
    std::uint64_t seq;
    T payload;
  };

  void push(double time, T payload) {
    if (time < now_) throw DomainError("EventQueue: event scheduled in the past");
    heap_.push({time, next_seq_++, std::move(payload)});
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

  Entry pop() {
    Entry e = heap_.top();
    heap_.pop();
    now_ = e.time;
    return e;
  }

  double now() const { return now_; }

 private:
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  double now_ = -std::numeric_limits<double>::infinity();
};

struct Flow {
  NodeId src;
  NodeId dst;
  double start;     // [s]
  double interval;  // [s]
  std::uint64_t packets;

  double time_of(std::uint64_t k) const { return start + static_cast<double>(k) * interval; }
};

/// i.i.d. uniform positions over the deployment area.
inline std::vector<NodeState> place_nodes(const SimConfig& cfg) {
  rng::Stream rs(cfg.seed, "placement");
  std::vector<NodeState> nodes;
  nodes.reserve(static_cast<std::size_t>(cfg.node_count));
  for (int i = 0; i < cfg.node_count; ++i) {
    const double x = rs.uniform(0.0, cfg.area_w);
    const double y = rs.uniform(0.0, cfg.area_h);
    nodes.push_back({static_cast<NodeId>(i), {x, y}, cfg.initial_energy, cfg.initial_power, true});
  }
  return nodes;
}

/// cbr_pairs flows between random distinct endpoints, each emitting
/// floor(rate * sim_time) packets. Start offsets are whole slots within one
/// inter-packet interval.
inline std::vector<Flow> generate_traffic(const SimConfig& cfg) {
  if (cfg.node_count < 2) throw ConfigError("generate_traffic: need at least two nodes");
  rng::Stream rs(cfg.seed, "traffic");
  const double interval = 1.0 / cfg.cbr_rate;
  const double slot = cfg.rp.delta();
  const auto offsets = static_cast<std::uint64_t>(std::max(1.0, std::floor(interval / slot + 1e-9)));
  const auto packets = static_cast<std::uint64_t>(std::floor(cfg.cbr_rate * cfg.sim_time + 1e-9));
  const auto n = static_cast<std::uint64_t>(cfg.node_count);
  std::vector<Flow> flows;
  for (int i = 0; i < cfg.cbr_pairs; ++i) {
    const auto src = static_cast<NodeId>(rs.below(n));
    auto dst = static_cast<NodeId>(rs.below(n - 1));
    if (dst >= src) ++dst;
    const double start = static_cast<double>(rs.below(offsets)) * slot;
    flows.push_back({src, dst, start, interval, packets});
  }
  return flows;
}

struct ActiveTransmitter {
  NodeId id;
  Point position;
  double power;
};

/// Concurrent transmitters other than `sender` whose coverage reaches the
/// receiver.
inline std::vector<Interferer> interferer_set(const NodeState& receiver, std::span<const ActiveTransmitter> transmitting,
                                              NodeId sender, const ChannelParams& ch) {
  if (std::none_of(transmitting.begin(), transmitting.end(),
                   [&](const ActiveTransmitter& t) { return t.id == sender; }))
    throw DomainError("interferer_set: sender is not transmitting");
  std::vector<Interferer> out;
  for (const auto& t : transmitting) {
    if (t.id == sender || t.id == receiver.id) continue;
    const double dist = distance(t.position, receiver.position);
    if (dist <= transmission_range(t.power, ch)) out.push_back({t.power, dist});
  }
  return out;
}

struct EnergyLedger {
  double tx = 0.0;
  double rx = 0.0;
};

/// Everything one broadcast needs from the running simulation.
struct HopEnv {
  std::vector<NodeState>& nodes;
  std::span<const ActiveTransmitter> active;
  const ChannelParams& ch;
  const RadioParams& rp;
  rng::Stream& draws;
  EnergyLedger& ledger;
  LinkModelKind link_model = LinkModelKind::Analytic;
  bool half_duplex = true;
};

struct HopOutcome {
  enum class Kind { DeliveredTo, AllFailed, SenderDied } kind = Kind::AllFailed;
  NodeId node = 0;            // receiver that takes the packet (DeliveredTo)
  std::vector<bool> received;  // aligned with the candidate list
  std::vector<double> p;       // realized per-candidate success probabilities

  bool delivered() const { return kind == Kind::DeliveredTo; }
};

namespace detail {

/// Charge `cost` to a node; drains it and marks it dead when it cannot pay.
/// Returns whether the full cost was paid.
inline bool charge(NodeState& n, double cost, double& account) {
  if (n.energy >= cost) {
    n.energy -= cost;
    account += cost;
    if (n.energy <= 0.0) {
      n.energy = 0.0;
      n.alive = false;
    }
    return true;
  }
  account += n.energy;
  n.energy = 0.0;
  n.alive = false;
  return false;
}

}  // namespace detail

/// One broadcast from `sender` at `power` to its candidate set. The
/// destination, if it receives, takes the packet regardless of priority.
inline HopOutcome attempt_hop(NodeId sender, double power, const CandidateSet& candidates, NodeId destination,
                              HopEnv& env) {
  HopOutcome out;
  NodeState& s = env.nodes[sender];
  if (!s.alive) throw DomainError("attempt_hop: sender is dead");
  if (!detail::charge(s, env.rp.xi * power * env.rp.delta(), env.ledger.tx)) {
    out.kind = HopOutcome::Kind::SenderDied;
    return out;
  }
  const double range = transmission_range(power, env.ch);
  const double rx_cost = env.rp.E_r * env.rp.delta();
  out.received.assign(candidates.size(), false);
  out.p.assign(candidates.size(), 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    NodeState& c = env.nodes[candidates.members[i].id];
    if (!c.alive) continue;
    if (env.half_duplex && std::any_of(env.active.begin(), env.active.end(),
                                       [&](const ActiveTransmitter& t) { return t.id == c.id; }))
      continue;
    const double dist = distance(s.position, c.position);
    double p = 0.0;
    if (env.link_model == LinkModelKind::Ideal)
      p = dist <= range ? 1.0 : 0.0;
    else
      p = pdr_sn(power, dist, interferer_set(c, env.active, sender, env.ch), env.ch);
    out.p[i] = p;
    if (!env.draws.bernoulli(p)) continue;
    out.received[i] = detail::charge(c, rx_cost, env.ledger.rx);
  }
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (out.received[i] && candidates.members[i].id == destination) {
      out.kind = HopOutcome::Kind::DeliveredTo;
      out.node = destination;
      return out;
    }
  if (auto f = opportunistic_relay(candidates, out.received)) {
    out.kind = HopOutcome::Kind::DeliveredTo;
    out.node = *f;
  }
  return out;
}

struct RunMetrics {
  double pdr = 0.0;
  double mean_delay = 0.0;  // [s], delivered packets only
  double throughput = 0.0;
  double residual_energy_ratio = 1.0;
  std::uint64_t power_adjustments = 0;
  std::map<std::string, std::uint64_t> drops_by_cause;

  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t sends = 0;          // throughput denominator
  std::uint64_t transmissions = 0;  // every broadcast, retransmissions included
  std::uint64_t fallbacks = 0;      // no feasible topology, sent at p_max
  double mean_hops = 0.0;           // delivered packets only
  double initial_energy_total = 0.0;
  double final_energy_total = 0.0;
  double tx_energy = 0.0;
  double rx_energy = 0.0;
  std::vector<std::pair<double, double>> residual_series;  // (time, ratio)

  std::uint64_t dropped() const {
    std::uint64_t n = 0;
    for (const auto& [cause, count] : drops_by_cause) n += count;
    return n;
  }

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Raw counters a run accumulates; the metric_* functions turn them into the
/// reported ratios.
struct Accumulators {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t sends = 0;
  double delay_sum = 0.0;
  double hop_sum = 0.0;
  std::vector<double> energy;  // per node, at the end
  double initial_energy = 0.0;
};

inline double metric_pdr(const Accumulators& a) {
  return a.generated ? static_cast<double>(a.delivered) / static_cast<double>(a.generated) : 0.0;
}

inline double metric_delay(const Accumulators& a) {
  return a.delivered ? a.delay_sum / static_cast<double>(a.delivered) : 0.0;
}

/// Delivered packets over packets sent by all nodes. Every generated packet
/// counts as sent by its source; each relay transmission and retransmission
/// adds one more, so the denominator never falls below `generated`.
inline double metric_throughput(const Accumulators& a) {
  return a.sends ? static_cast<double>(a.delivered) / static_cast<double>(a.sends) : 0.0;
}

inline double metric_residual(const Accumulators& a) {
  if (a.energy.empty()) return 1.0;
  double sum = 0.0;
  for (double e : a.energy) sum += e / a.initial_energy;
  return sum / static_cast<double>(a.energy.size());
}

struct TraceEvent {
  enum class Kind { Generated, Hop, Retry, Delivered, Dropped } kind;
  double time;
  std::uint64_t packet;
  NodeId from;
  NodeId to;
  std::string cause;  // drops only
};

using TraceSink = std::function<void(const TraceEvent&)>;

class Simulator {
 public:
  explicit Simulator(SimConfig cfg, TraceSink trace = {}) : cfg_(std::move(cfg)), trace_(std::move(trace)) {
    cfg_.validate();
  }

  /// Run with placement and traffic drawn from the seed.
  RunMetrics run() { return run(place_nodes(cfg_), generate_traffic(cfg_)); }

  /// Run on a given topology and flow set.
  RunMetrics run(std::vector<NodeState> nodes, std::vector<Flow> flows) {
    ErtoOptions erto_opt;
    erto_opt.solver = cfg_.front_solver;
    erto_opt.ea = cfg_.ea;
    auto strategy = make_strategy(cfg_.strategy, erto_opt, cfg_.initial_power);
    State st(cfg_, std::move(nodes), std::move(flows));
    for (auto& n : st.net.nodes()) {
      n.energy = cfg_.initial_energy;
      n.alive = true;
      n.tx_power = cfg_.initial_power;
    }

    EventQueue<Event> events;
    for (std::size_t f = 0; f < st.flows.size(); ++f)
      if (st.flows[f].packets > 0) events.push(st.enqueue_time(st.flows[f].time_of(0)), {Event::Generate, f, 0});
    events.push(0.0, {Event::Tick, 0, 0});

    while (!events.empty()) {
      auto e = events.pop();
      if (e.payload.kind == Event::Generate) {
        on_generate(st, e.payload.index, e.payload.k);
        const Flow& fl = st.flows[e.payload.index];
        if (e.payload.k + 1 < fl.packets)
          events.push(st.enqueue_time(fl.time_of(e.payload.k + 1)), {Event::Generate, e.payload.index, e.payload.k + 1});
      } else {
        on_tick(st, *strategy, e.payload.index);
        const std::size_t next = e.payload.index + 1;
        if (static_cast<double>(next) * st.slot < cfg_.sim_time) events.push(static_cast<double>(next) * st.slot, {Event::Tick, next, 0});
      }
    }
    return finish(st);
  }

  const SimConfig& config() const { return cfg_; }

 private:
  struct Event {
    enum Kind { Generate, Tick } kind;
    std::size_t index;  // flow or slot
    std::uint64_t k;    // packet number within the flow
  };

  struct Packet {
    std::uint64_t id;
    NodeId dst;
    double created;
    int attempts = 0;  // at the current hop
    int hops = 0;
    std::size_t ready_slot = 0;
    bool sent_once = false;
  };

  struct State {
    State(const SimConfig& cfg, std::vector<NodeState> nodes, std::vector<Flow> fl)
        : net(std::move(nodes), cfg.ch, cfg.rp, cfg.area_m2()), flows(std::move(fl)), slot(cfg.rp.delta()),
          draws(cfg.seed, "hop.draws") {
      queues.resize(net.nodes().size());
      next_sample = 0;
    }

    std::size_t slot_of(double t) const {
      return static_cast<std::size_t>(std::max(0.0, std::ceil(t / slot - 1e-9)));
    }
    double enqueue_time(double t) const { return static_cast<double>(slot_of(t)) * slot; }

    NetworkSnapshot net;
    std::vector<Flow> flows;
    double slot;
    rng::Stream draws;
    std::vector<std::deque<Packet>> queues;
    EnergyLedger ledger;
    Accumulators acc;
    std::uint64_t next_packet_id = 0;
    std::uint64_t transmissions = 0;
    std::uint64_t adjustments = 0;
    std::uint64_t fallbacks = 0;
    std::map<std::string, std::uint64_t> drops;
    std::size_t next_sample;
    std::vector<std::pair<double, double>> series;
  };

  void emit(TraceEvent::Kind kind, double t, std::uint64_t packet, NodeId from, NodeId to, std::string cause = {}) {
    if (trace_) trace_({kind, t, packet, from, to, std::move(cause)});
  }

  void drop(State& st, const Packet& p, NodeId at, const std::string& cause, double t) {
    ++st.drops[cause];
    emit(TraceEvent::Kind::Dropped, t, p.id, at, p.dst, cause);
  }

  void drop_queue(State& st, NodeId n, const std::string& cause, double t) {
    for (const auto& p : st.queues[n]) drop(st, p, n, cause, t);
    st.queues[n].clear();
  }

  bool enqueue(State& st, NodeId n, Packet p, double t) {
    if (!st.net.nodes()[n].alive) {
      drop(st, p, n, "node_death", t);
      return false;
    }
    if (st.queues[n].size() >= static_cast<std::size_t>(cfg_.queue_capacity)) {
      drop(st, p, n, "queue_overflow", t);
      return false;
    }
    st.queues[n].push_back(p);
    return true;
  }

  void on_generate(State& st, std::size_t flow, std::uint64_t k) {
    const Flow& fl = st.flows[flow];
    const double t = fl.time_of(k);
    Packet p{st.next_packet_id++, fl.dst, t};
    p.ready_slot = st.slot_of(t);
    ++st.acc.generated;
    emit(TraceEvent::Kind::Generated, t, p.id, fl.src, fl.dst);
    if (!st.net.nodes()[fl.src].alive) {
      drop(st, p, fl.src, "source_dead", t);
      return;
    }
    enqueue(st, fl.src, p, t);
  }

  void sample_residual(State& st, double now, bool final) {
    const auto& times = cfg_.residual_sample_times;
    while (st.next_sample < times.size() && (final || times[st.next_sample] <= now + 1e-9)) {
      double sum = 0.0;
      for (const auto& n : st.net.nodes()) sum += n.energy / cfg_.initial_energy;
      st.series.emplace_back(times[st.next_sample], sum / static_cast<double>(st.net.nodes().size()));
      ++st.next_sample;
    }
  }

  void on_tick(State& st, RoutingStrategy& strategy, std::size_t slot) {
    const double t0 = static_cast<double>(slot) * st.slot;
    sample_residual(st, t0, false);
    auto& nodes = st.net.nodes();

    auto has_ready = [&](NodeId n) {
      return nodes[n].alive && !st.queues[n].empty() && st.queues[n].front().ready_slot <= slot;
    };
    std::vector<NodeId> ready;
    for (const auto& n : nodes)
      if (has_ready(n.id)) ready.push_back(n.id);
    if (ready.empty()) return;

    // Decisions see the transmitters of this slot at their pre-slot powers.
    st.net.set_transmitting(ready);
    const NetView view = st.net.view();
    struct Pending {
      NodeId sender;
      RoutingDecision decision;
    };
    std::vector<Pending> sends;
    for (NodeId s : ready) {
      while (has_ready(s)) {
        const Packet& head = st.queues[s].front();
        RoutingDecision dec = strategy.decide(s, head.dst, view);
        if (dec.fallback) ++st.fallbacks;
        if (dec.routing_void()) {
          drop(st, head, s, "routing_void", t0);
          st.queues[s].pop_front();
          continue;
        }
        sends.push_back({s, std::move(dec)});
        break;
      }
    }
    if (sends.empty()) return;

    std::vector<ActiveTransmitter> active;
    for (const auto& snd : sends) {
      NodeState& n = nodes[snd.sender];
      if (snd.decision.tx_power != n.tx_power) {
        ++st.adjustments;
        n.tx_power = snd.decision.tx_power;
      }
      active.push_back({n.id, n.position, n.tx_power});
    }

    HopEnv env{nodes, active, cfg_.ch, cfg_.rp, st.draws, st.ledger, cfg_.link_model, cfg_.half_duplex};
    std::vector<std::pair<NodeId, Packet>> forwarded;
    const double hop_done = t0 + st.slot + cfg_.coordination_delay;
    for (const auto& snd : sends) {
      const NodeId s = snd.sender;
      if (!nodes[s].alive) {
        // Died receiving earlier in this slot.
        continue;
      }
      Packet& p = st.queues[s].front();
      ++st.transmissions;
      if (p.sent_once || p.hops > 0) ++st.acc.sends;
      p.sent_once = true;
      const HopOutcome out = attempt_hop(s, nodes[s].tx_power, snd.decision.candidate_set, p.dst, env);
      if (out.kind == HopOutcome::Kind::SenderDied) {
        drop_queue(st, s, "node_death", t0);
        continue;
      }
      if (out.delivered()) {
        Packet moved = p;
        st.queues[s].pop_front();
        if (out.node == moved.dst) {
          ++st.acc.delivered;
          st.acc.delay_sum += hop_done - moved.created;
          st.acc.hop_sum += moved.hops + 1;
          emit(TraceEvent::Kind::Hop, hop_done, moved.id, s, out.node);
          emit(TraceEvent::Kind::Delivered, hop_done, moved.id, s, out.node);
        } else {
          moved.hops += 1;
          moved.attempts = 0;
          moved.ready_slot = st.slot_of(hop_done);
          emit(TraceEvent::Kind::Hop, hop_done, moved.id, s, out.node);
          forwarded.emplace_back(out.node, moved);
        }
        continue;
      }
      if (++p.attempts >= cfg_.retx_limit) {
        drop(st, p, s, "retry_limit", t0);
        st.queues[s].pop_front();
      } else {
        emit(TraceEvent::Kind::Retry, t0, p.id, s, s);
      }
    }
    // Receivers that ran out of energy this slot lose their backlog.
    for (const auto& n : nodes)
      if (!n.alive && !st.queues[n.id].empty()) drop_queue(st, n.id, "node_death", t0);
    for (auto& [to, p] : forwarded) enqueue(st, to, p, hop_done);
  }

  RunMetrics finish(State& st) {
    for (std::size_t n = 0; n < st.queues.size(); ++n) drop_queue(st, static_cast<NodeId>(n), "sim_end", cfg_.sim_time);
    sample_residual(st, cfg_.sim_time, true);

    auto& acc = st.acc;
    acc.sends += acc.generated;
    acc.initial_energy = cfg_.initial_energy;
    acc.energy.clear();
    for (const auto& n : st.net.nodes()) acc.energy.push_back(n.energy);

    RunMetrics m;
    m.pdr = metric_pdr(acc);
    m.mean_delay = metric_delay(acc);
    m.throughput = metric_throughput(acc);
    m.residual_energy_ratio = metric_residual(acc);
    m.power_adjustments = st.adjustments;
    m.drops_by_cause = st.drops;
    m.generated = acc.generated;
    m.delivered = acc.delivered;
    m.sends = acc.sends;
    m.transmissions = st.transmissions;
    m.fallbacks = st.fallbacks;
    m.mean_hops = acc.delivered ? acc.hop_sum / static_cast<double>(acc.delivered) : 0.0;
    m.initial_energy_total = cfg_.initial_energy * static_cast<double>(st.net.nodes().size());
    for (double e : acc.energy) m.final_energy_total += e;
    m.tx_energy = st.ledger.tx;
    m.rx_energy = st.ledger.rx;
    m.residual_series = st.series;
    return m;
  }

  SimConfig cfg_;
  TraceSink trace_;
};

inline RunMetrics run(const SimConfig& cfg) { return Simulator(cfg).run(); }

}  // namespace erto
