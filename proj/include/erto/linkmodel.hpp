#pragma once

// Per-link and per-candidate-set delivery probabilities under path loss,
// Rayleigh fading, noise and concurrent interference.

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "erto/errors.hpp"

namespace erto {

/// Physical-layer constants.
///
/// Only eta's range is given by the model; every numeric default below is a
/// desk choice, collected here so that a run's channel is fully described by
/// one value. K is calibrated so that 0.1 W reaches exactly 100 m.
struct ChannelParams {
  double eta = 3.0;          // path-loss exponent, 2..5
  double K = 0.0;            // composite antenna gain, see calibrated()
  double G = 1.0;            // processing gain
  double beta = 1.0;         // SINR decode threshold (0 dB)
  double sigma = 1.0;        // spread of the threshold test, normalized
  double P_n = 1e-9;         // noise power [W]
  double P_thresh = 1e-8;    // reception power threshold [W]
  double alpha_sq = 1.0;     // nominal fading power gain (unit mean)

  static constexpr double kCalibrationPower = 0.1;  // [W]
  static constexpr double kCalibrationRange = 100.0;  // [m]

  /// Solve for K such that transmission_range(power) == range.
  void calibrate(double power = kCalibrationPower, double range = kCalibrationRange) {
    if (!(power > 0.0) || !(range > 0.0)) throw DomainError("calibration needs positive power and range");
    if (!(P_thresh > P_n)) throw ConfigError("P_thresh must exceed P_n");
    K = (P_thresh - P_n) * std::pow(range, eta) / (alpha_sq * power);
  }

  static ChannelParams defaults() {
    ChannelParams ch;
    ch.calibrate();
    return ch;
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("channel: " + m); };
    if (!(eta >= 2.0 && eta <= 5.0)) fail("eta must lie in [2, 5]");
    if (!(K > 0.0)) fail("K must be positive");
    if (!(G >= 1.0)) fail("G must be >= 1");
    if (!(beta > 0.0)) fail("beta must be positive");
    if (!(sigma > 0.0)) fail("sigma must be positive");
    if (!(P_n >= 0.0)) fail("P_n must be non-negative");
    if (!(P_thresh > P_n)) fail("P_thresh must exceed P_n");
    if (!(alpha_sq > 0.0)) fail("alpha_sq must be positive");
  }
};

/// A concurrently transmitting node as seen from one receiver.
struct Interferer {
  double power;                 // [W]
  double distance_to_receiver;  // [m]
};

struct LinkEstimate {
  double p_i;
  double etx;
};

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

inline void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0, 1]");
}

}  // namespace detail

/// Upper tail of the standard normal. erfc is accurate to a few ulp over the
/// whole real line, well under the 1e-12 absolute budget.
inline double q_function(double x) {
  if (!std::isfinite(x)) throw DomainError("q_function: non-finite argument");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// Probability that the received power clears P_thresh.
/// Never exceeds 0.5: the Q argument is non-negative for every valid input.
inline double reception_prob(double p_ts, double dist, const ChannelParams& ch) {
  detail::require_positive(p_ts, "transmit power");
  detail::require_positive(dist, "distance");
  const double x = (ch.P_thresh * std::pow(dist, ch.eta)) / (p_ts * ch.K * ch.alpha_sq) / ch.sigma;
  return q_function(x);
}

/// Probability that the SINR stays above beta with Rayleigh fading on every
/// path (fading already integrated out).
inline double sinr_success_prob(double p_ts, double dist, std::span<const Interferer> interferers,
                                const ChannelParams& ch) {
  detail::require_positive(p_ts, "transmit power");
  detail::require_positive(dist, "distance");
  double prob = std::exp(-ch.beta * ch.P_n * std::pow(dist, ch.eta) / (p_ts * ch.K));
  for (const Interferer& i : interferers) {
    detail::require_positive(i.power, "interferer power");
    detail::require_positive(i.distance_to_receiver, "interferer distance");
    const double ratio = std::pow(i.distance_to_receiver / dist, ch.eta);
    prob /= 1.0 + ch.beta * i.power / (ch.G * p_ts * ratio);
  }
  return prob;
}

/// Sender-to-neighbor delivery probability.
inline double pdr_sn(double p_ts, double dist, std::span<const Interferer> interferers,
                     const ChannelParams& ch) {
  return sinr_success_prob(p_ts, dist, interferers, ch) * reception_prob(p_ts, dist, ch);
}

/// Probability that at least one candidate receives: 1 - prod(1 - p_i).
inline double pdr_sc(std::span<const double> p_list) {
  double miss = 1.0;
  for (double p : p_list) {
    detail::require_probability(p);
    miss *= 1.0 - p;
  }
  return 1.0 - miss;
}

inline double etx(double p_i) {
  detail::require_probability(p_i);
  if (p_i == 0.0) throw UnreachableLink("etx: link has zero delivery probability");
  return 1.0 / p_i;
}

inline LinkEstimate estimate_link(double p_i) { return {p_i, etx(p_i)}; }

}  // namespace erto
