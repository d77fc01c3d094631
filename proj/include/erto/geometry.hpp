#pragma once

// Candidate relay area (the lens between the sender's coverage disk and the
// disk around the destination through the sender), power-to-range
// conversion, and the Poisson relay-degree distribution.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "erto/errors.hpp"
#include "erto/linkmodel.hpp"

namespace erto {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct DensityContext {
  double rho;  // nodes per m^2
};

struct Lens {
  double r_s;
  double d_sd;
  double area;
};

/// Distance at which the mean received power equals P_thresh.
inline double transmission_range(double p_ts, const ChannelParams& ch) {
  detail::require_positive(p_ts, "transmit power");
  if (!(ch.P_thresh > ch.P_n)) throw ConfigError("transmission_range: P_thresh must exceed P_n");
  return std::pow(ch.K * ch.alpha_sq * p_ts / (ch.P_thresh - ch.P_n), 1.0 / ch.eta);
}

/// Inverse of transmission_range.
inline double power_for_range(double range, const ChannelParams& ch) {
  detail::require_positive(range, "range");
  return std::pow(range, ch.eta) * (ch.P_thresh - ch.P_n) / (ch.K * ch.alpha_sq);
}

/// Angle at s between sd and sa, where a is an intersection point of the two
/// circles. Only defined while the circles actually cross.
inline double dsa_half_angle(double r_s, double d_sd) {
  if (!(r_s > 0.0) || !(d_sd > 0.0)) throw DomainError("dsa_half_angle: r_s and d_sd must be positive");
  if (r_s >= 2.0 * d_sd) throw GeometryDegenerate("dsa_half_angle: sender disk contains the destination disk");
  return std::acos(r_s / (2.0 * d_sd));
}

/// Exact area of C(s, r_s) ∩ C(d, d_sd) with |sd| = d_sd.
///
/// Sum of two circular segments. The destination circle passes through s, so
/// the only containment case is r_s >= 2 d_sd, where the whole destination
/// disk is covered.
inline double candidate_relay_area(double r_s, double d_sd) {
  if (!(r_s >= 0.0) || !std::isfinite(r_s)) throw DomainError("candidate_relay_area: r_s must be >= 0");
  if (!(d_sd > 0.0) || !std::isfinite(d_sd)) throw DomainError("candidate_relay_area: d_sd must be > 0");
  if (r_s == 0.0) return 0.0;
  if (r_s >= 2.0 * d_sd) return std::numbers::pi * d_sd * d_sd;

  const double c = r_s / (2.0 * d_sd);
  const double angle_s = std::acos(c);                           // half-angle at s
  const double angle_d = std::acos(1.0 - 2.0 * c * c);           // half-angle at d
  const double seg_s = r_s * r_s * (angle_s - std::sin(angle_s) * std::cos(angle_s));
  const double seg_d = d_sd * d_sd * (angle_d - std::sin(angle_d) * std::cos(angle_d));
  return std::clamp(seg_s + seg_d, 0.0, std::numbers::pi * std::min(r_s, d_sd) * std::min(r_s, d_sd));
}

inline Lens make_lens(double r_s, double d_sd) { return {r_s, d_sd, candidate_relay_area(r_s, d_sd)}; }

/// Poisson pmf evaluated in log space; stays finite for n in the hundreds.
inline double poisson_pmf(double lambda, int n) {
  if (n < 0) throw DomainError("poisson_pmf: negative count");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("poisson_pmf: bad mean");
  if (lambda == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(lambda) - lambda - std::lgamma(n + 1.0));
}

/// Probability that exactly n_rel nodes fall inside the candidate relay area
/// of a sender transmitting at p_ts toward a destination d_sd away.
inline double relay_degree_pmf(double p_ts, double d_sd, int n_rel, DensityContext dc, const ChannelParams& ch) {
  if (!(dc.rho > 0.0)) throw DomainError("relay_degree_pmf: density must be positive");
  const double area = candidate_relay_area(transmission_range(p_ts, ch), d_sd);
  return poisson_pmf(dc.rho * area, n_rel);
}

}  // namespace erto
