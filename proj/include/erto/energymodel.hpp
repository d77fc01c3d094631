#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "erto/errors.hpp"
#include "erto/linkmodel.hpp"

namespace erto {

/// Radio power grid and energy constants.
struct RadioParams {
  double p_min = 0.1;        // [W]
  double p_max = 0.8;        // [W]
  double power_step = 0.01;  // [W]
  double E_r = 0.05;         // reception power draw [W]
  double xi = 1.0;           // transmit draw per radiated watt
  double L = 1024.0;         // packet length [bit]
  double B = 15000.0;        // data rate [bit/s]

  /// Airtime of one packet [s].
  double delta() const { return L / B; }

  /// Power levels p_min, p_min + step, ..., p_max. The last level is pinned
  /// to p_max so accumulated rounding never drops or overshoots it.
  std::vector<double> power_levels() const {
    validate();
    const auto steps = static_cast<long>(std::floor((p_max - p_min) / power_step + 1e-9));
    std::vector<double> levels;
    levels.reserve(static_cast<std::size_t>(steps) + 1);
    for (long k = 0; k <= steps; ++k) levels.push_back(p_min + static_cast<double>(k) * power_step);
    if (std::abs(levels.back() - p_max) <= 1e-9 * p_max) levels.back() = p_max;
    return levels;
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("radio: " + m); };
    if (!(p_min > 0.0)) fail("p_min must be positive");
    if (!(p_max >= p_min)) fail("p_max must be >= p_min");
    if (!(power_step > 0.0)) fail("power_step must be positive");
    if (!(E_r > 0.0)) fail("E_r must be positive");
    if (!(xi > 0.0)) fail("xi must be positive");
    if (!(L > 0.0) || !(B > 0.0)) fail("L and B must be positive");
  }
};

/// Mean number of broadcasts until at least one candidate receives.
inline double expected_attempts(std::span<const double> p_list) {
  const double sc = pdr_sc(p_list);
  if (!(sc > 0.0)) throw NoReachableCandidate("expected_attempts: no candidate can receive");
  return 1.0 / sc;
}

/// One-hop expected energy cost toward a candidate set:
///   (n_rel * E_r + xi * p_ts) * delta / pdr_sc^2.
/// The square is kept as derived; the simulator charges real energy per
/// attempt and does not use this value for accounting.
inline double expected_energy_cost(double p_ts, int n_rel, std::span<const double> p_list,
                                   const RadioParams& rp) {
  if (n_rel < 0) throw DomainError("expected_energy_cost: negative relay degree");
  detail::require_positive(p_ts, "transmit power");
  const double sc = pdr_sc(p_list);
  if (!(sc > 0.0)) throw NoReachableCandidate("expected_energy_cost: no candidate can receive");
  return (n_rel * rp.E_r + rp.xi * p_ts) * rp.delta() / (sc * sc);
}

}  // namespace erto
