#pragma once

// Sampled time series produced by the stochastic and deterministic engines,
// plus the CSV writers shared by the command-line tools.  Numbers are written
// with 17 significant digits so that reading them back reproduces the exact
// binary doubles.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace okin {

struct Trajectory {
    std::vector<double> times;
    std::vector<std::string> value_names;    // one per value column (species)
    std::vector<std::string> channel_names;  // one per event-count column; may be empty
    std::vector<std::vector<double>> values;        // [sample][value column]
    std::vector<std::vector<double>> event_counts;  // [sample][channel], cumulative
    std::uint64_t seed = 0;                         // seed that produced the run (0 if n/a)

    std::size_t sample_count() const { return times.size(); }

    // Value of a named column at sample i; throws DomainError on unknown name.
    double value_at(std::size_t i, const std::string& name) const;
};

// Uniform sampling grid with n points: t0 + k*(t1-t0)/(n-1), k=0..n-1
// (n = 1 gives just t1).
std::vector<double> sample_grid(double t0, double t1, int n);

// printf "%.17g": enough significant digits to round-trip the exact double.
std::string format_double(double x);

// Header "time,<values...>,<channels...>"; one row per sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv_file(const std::string& path, const Trajectory& traj);

}  // namespace okin
