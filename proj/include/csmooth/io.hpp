#pragma once

// Text formats used by the command-line tool.
//
//   trajectories:  k,t,x1,...,xN     (one row per step, k is 1-based)
//   measurements:  k,t,y1,...,yM
//   traces:        iter,theta,max_ineq,max_eq,step_norm,wall_ms
//   scaling:       T,solver,repeats,mean_seconds,mean_outer_iterations,status
//   config:        "key = value" lines, '#' starts a comment
//
// Floating-point values are written in shortest round-trip form, so a
// write/read cycle reproduces every double exactly.

#include "csmooth/ship.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace csmooth::io {

std::string format_double(double v);
double parse_double(const std::string& s);

struct SeriesTable {
  std::vector<double> times;
  Matrix values;  ///< one column per step
};

/// `prefix` names the value columns ("x" -> x1, x2, ...).
void write_series_csv(std::ostream& os, const Matrix& columns, const std::vector<double>& times,
                      const std::string& prefix);
SeriesTable read_series_csv(std::istream& is);

/// wall_ms is written as 0 when `with_timing` is false.
void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace, bool with_timing = true);
ConvergenceTrace read_trace_csv(std::istream& is);

void write_scaling_csv(std::ostream& os, const std::vector<ship::ScalingRow>& rows);

using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(std::istream& is);
void write_key_values(std::ostream& os, const KeyValues& kv);

KeyValues to_key_values(const ship::ShipExperimentConfig& cfg);
/// Keys absent from `kv` keep their default values.
ship::ShipExperimentConfig config_from_key_values(const KeyValues& kv);

/// Step times of the experiment grid.
std::vector<double> time_grid(const ship::ShipExperimentConfig& cfg);

}  // namespace csmooth::io
