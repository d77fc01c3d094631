#pragma once

// Multi-seed aggregation of sweep results: per-cell mean, std and 95% CI,
// ordering tests between strategies and per-figure CSV output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erto/errors.hpp"
#include "erto/simcore.hpp"

namespace erto {

enum class Axis { NodeCount, CbrPairs, Time };

inline std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::NodeCount: return "node_count";
    case Axis::CbrPairs: return "cbr_pairs";
    case Axis::Time: return "time";
  }
  return "?";
}

enum class Metric { Pdr, Delay, Throughput, Residual, PowerAdjustments };

inline std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Pdr: return "pdr";
    case Metric::Delay: return "delay";
    case Metric::Throughput: return "throughput";
    case Metric::Residual: return "residual";
    case Metric::PowerAdjustments: return "power_adjustments";
  }
  return "?";
}

inline double metric_value(const RunMetrics& r, Metric m) {
  switch (m) {
    case Metric::Pdr: return r.pdr;
    case Metric::Delay: return r.mean_delay;
    case Metric::Throughput: return r.throughput;
    case Metric::Residual: return r.residual_energy_ratio;
    case Metric::PowerAdjustments: return static_cast<double>(r.power_adjustments);
  }
  return 0.0;
}

struct SweepPoint {
  double axis_value = 0.0;
  std::map<std::string, std::vector<RunMetrics>> runs;  // strategy -> one per seed
};

struct SweepResult {
  Axis axis = Axis::NodeCount;
  std::vector<SweepPoint> points;

  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i > 0 && !(points[i].axis_value > points[i - 1].axis_value))
        throw DomainError("sweep: axis values must be strictly increasing");
      if (points[i].runs.size() != points.front().runs.size())
        throw DomainError("sweep: strategy sets differ between points");
      for (const auto& [name, runs] : points[i].runs) {
        if (runs.size() != points[i].runs.begin()->second.size())
          throw DomainError("sweep: seed counts differ between strategies");
        const auto it = points.front().runs.find(name);
        if (it == points.front().runs.end()) throw DomainError("sweep: strategy sets differ between points");
        if (runs.size() != it->second.size()) throw DomainError("sweep: seed counts differ for strategy " + name);
      }
    }
  }
};

struct CellStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n = 0;
};

/// Mean, sample std and normal-approximation 95% CI. Values are sorted before
/// summation so the result does not depend on seed order.
inline CellStats summarize(std::vector<double> values) {
  if (values.size() < 2) throw DomainError("summarize: need at least two samples");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  if (values.front() == values.back()) return {values.front(), 0.0, values.front(), values.front(), values.size()};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double half = 1.959963984540054 * sd / std::sqrt(n);
  return {mean, sd, mean - half, mean + half, values.size()};
}

struct Summary {
  Axis axis = Axis::NodeCount;
  std::vector<double> axis_values;
  std::vector<std::string> strategies;
  // cells[metric][point][strategy]
  std::map<Metric, std::vector<std::map<std::string, CellStats>>> cells;

  const CellStats& at(Metric m, std::size_t point, const std::string& strategy) const {
    return cells.at(m).at(point).at(strategy);
  }
};

inline Summary aggregate(const SweepResult& r, std::span<const Metric> metrics) {
  r.validate();
  Summary s;
  s.axis = r.axis;
  if (!r.points.empty())
    for (const auto& [name, runs] : r.points.front().runs) s.strategies.push_back(name);
  for (const auto& pt : r.points) s.axis_values.push_back(pt.axis_value);
  for (Metric m : metrics) {
    auto& per_point = s.cells[m];
    for (const auto& pt : r.points) {
      std::map<std::string, CellStats> row;
      for (const auto& [name, runs] : pt.runs) {
        std::vector<double> v;
        for (const auto& run : runs) v.push_back(metric_value(run, m));
        row[name] = summarize(std::move(v));
      }
      per_point.push_back(std::move(row));
    }
  }
  return s;
}

inline Summary aggregate(const SweepResult& r) {
  static constexpr Metric all[] = {Metric::Pdr, Metric::Delay, Metric::Throughput, Metric::Residual,
                                   Metric::PowerAdjustments};
  return aggregate(r, all);
}

/// Residual-energy ratio sampled over time for every strategy at one sweep
/// point; the axis is the sample time.
inline Summary residual_over_time(const SweepPoint& pt) {
  Summary s;
  s.axis = Axis::Time;
  auto& per_time = s.cells[Metric::Residual];
  for (const auto& [name, runs] : pt.runs) {
    s.strategies.push_back(name);
    if (runs.empty()) throw DomainError("residual_over_time: no runs for " + name);
    const auto& ref = runs.front().residual_series;
    if (s.axis_values.empty()) {
      for (const auto& [t, v] : ref) s.axis_values.push_back(t);
      per_time.resize(ref.size());
    }
    if (ref.size() != s.axis_values.size()) throw DomainError("residual_over_time: sample times differ");
    for (std::size_t k = 0; k < ref.size(); ++k) {
      std::vector<double> v;
      for (const auto& run : runs) {
        if (run.residual_series.size() != ref.size()) throw DomainError("residual_over_time: sample times differ");
        v.push_back(run.residual_series[k].second);
      }
      per_time[k][name] = summarize(std::move(v));
    }
  }
  return s;
}

enum class Better { Higher, Lower };

struct PointVerdict {
  double axis_value = 0.0;
  bool means_ordered = false;  // strict order of means
  bool separated = false;      // and no adjacent 95% CIs overlap
};

namespace detail {

inline bool strictly_better(const CellStats& a, const CellStats& b, Better dir) {
  return dir == Better::Higher ? a.mean > b.mean : a.mean < b.mean;
}

inline bool ci_separated(const CellStats& a, const CellStats& b, Better dir) {
  return dir == Better::Higher ? a.ci_lo > b.ci_hi : a.ci_hi < b.ci_lo;
}

}  // namespace detail

/// For each axis point: do the strategies in `order` (best first) have
/// strictly ordered means, and are consecutive CIs disjoint?
inline std::vector<PointVerdict> ordering_test(const Summary& s, Metric m, std::span<const std::string> order,
                                               Better dir) {
  std::vector<PointVerdict> out;
  const auto& per_point = s.cells.at(m);
  for (std::size_t i = 0; i < per_point.size(); ++i) {
    PointVerdict v{s.axis_values[i], true, true};
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const auto& a = per_point[i].at(order[k]);
      const auto& b = per_point[i].at(order[k + 1]);
      if (!detail::strictly_better(a, b, dir)) v.means_ordered = false;
      if (!detail::ci_separated(a, b, dir)) v.separated = false;
    }
    v.separated = v.separated && v.means_ordered;
    out.push_back(v);
  }
  return out;
}

/// As ordering_test, but only `leader` against each of `others`.
inline std::vector<PointVerdict> leader_test(const Summary& s, Metric m, const std::string& leader,
                                             std::span<const std::string> others, Better dir) {
  std::vector<PointVerdict> out;
  for (const auto& o : others) {
    const std::string pair[] = {leader, o};
    const auto v = ordering_test(s, m, pair, dir);
    if (out.empty()) {
      out = v;
      continue;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i].means_ordered = out[i].means_ordered && v[i].means_ordered;
      out[i].separated = out[i].separated && v[i].separated;
    }
  }
  return out;
}

/// Least-squares slope of y against x.
inline double fitted_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fitted_slope: need two or more paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("fitted_slope: x has no spread");
  return sxy / sxx;
}

inline std::vector<double> means(const Summary& s, Metric m, const std::string& strategy) {
  std::vector<double> out;
  for (const auto& row : s.cells.at(m)) out.push_back(row.at(strategy).mean);
  return out;
}

/// Shortest "%.Ng" rendering (N <= 9) that reads back as the 9-digit value;
/// on equal length the lower precision wins.
inline std::string format_float(double v) {
  char ref[64];
  std::snprintf(ref, sizeof ref, "%.9g", v);
  const double target = std::strtod(ref, nullptr);
  std::string best = ref;
  char buf[64];
  for (int p = 1; p < 9; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == target && std::string_view(buf).size() < best.size()) best = buf;
  }
  return best;
}

inline constexpr std::string_view kFigureCsvHeader = "axis,strategy,mean,std,ci_lo,ci_hi";

/// One row per (axis point, strategy), points ascending, strategies in the
/// summary's order.
inline void write_figure_csv(std::ostream& os, const Summary& s, Metric m) {
  os << kFigureCsvHeader << '\n';
  const auto& per_point = s.cells.at(m);
  for (std::size_t i = 0; i < per_point.size(); ++i)
    for (const auto& name : s.strategies) {
      const auto& c = per_point[i].at(name);
      os << format_float(s.axis_values[i]) << ',' << name << ',' << format_float(c.mean) << ',' << format_float(c.std)
         << ',' << format_float(c.ci_lo) << ',' << format_float(c.ci_hi) << '\n';
    }
}

}  // namespace erto
