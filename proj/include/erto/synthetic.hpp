#pragma once

#include <cstdint>
#include <vector>

#include "erto/geometry.hpp"
#include "erto/paretoctl.hpp"
#include "erto/rng.hpp"

namespace erto {

struct SyntheticContextSpec {
  std::uint64_t seed = 1;
  double d_sd = 250.0;
  double rho = 1e-4;
  int candidates = 20;       // nodes dropped in the lens at p_max
  int max_degree = 20;
  int max_interferers = 3;   // per candidate, drawn uniformly in 0..max
  ChannelParams ch = ChannelParams::defaults();
  RadioParams rp;
};

/// Sender at the origin, destination at (d_sd, 0), `candidates` relays drawn
/// uniformly over the p_max lens. Each relay gets a few random interferers;
/// its p_i at every grid level follows from pdr_sn.
inline OptimizationContext make_synthetic_context(const SyntheticContextSpec& spec) {
  rng::Stream rs(spec.seed, "synthetic.context");
  const Point s{0.0, 0.0}, d{spec.d_sd, 0.0};
  const auto levels = spec.rp.power_levels();
  const double r_max = transmission_range(levels.back(), spec.ch);

  struct Relay {
    double dist;
    std::vector<Interferer> interferers;
  };
  std::vector<Relay> relays;
  while (static_cast<int>(relays.size()) < spec.candidates) {
    const Point c{rs.uniform(-r_max, r_max), rs.uniform(-r_max, r_max)};
    const double dist = distance(s, c);
    if (dist > r_max || dist == 0.0 || !(distance(c, d) < spec.d_sd)) continue;
    Relay r{dist, {}};
    const auto k = static_cast<int>(rs.below(static_cast<std::uint64_t>(spec.max_interferers) + 1));
    for (int i = 0; i < k; ++i)
      r.interferers.push_back({rs.uniform(spec.rp.p_min, spec.rp.p_max), rs.uniform(20.0, r_max)});
    relays.push_back(std::move(r));
  }

  OptimizationContext ctx;
  ctx.d_sd = spec.d_sd;
  ctx.rho = spec.rho;
  ctx.grid = {levels, spec.max_degree};
  ctx.ch = spec.ch;
  ctx.rp = spec.rp;
  for (double p : levels) {
    const double range = transmission_range(p, spec.ch);
    std::vector<double> links;
    for (const auto& r : relays)
      if (r.dist <= range) links.push_back(pdr_sn(p, r.dist, r.interferers, spec.ch));
    ctx.links_by_level.push_back(std::move(links));
  }
  return ctx;
}

}  // namespace erto
