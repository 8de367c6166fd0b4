#include "okin/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "okin/errors.hpp"

namespace okin {

double Trajectory::value_at(std::size_t i, const std::string& name) const {
    for (std::size_t k = 0; k < value_names.size(); ++k)
        if (value_names[k] == name) return values[i][k];
    throw DomainError("trajectory has no column '" + name + "'");
}

std::vector<double> sample_grid(double t0, double t1, int n) {
    if (n < 1) throw DomainError("sample_grid: need at least one sample");
    if (!(t1 >= t0)) throw DomainError("sample_grid: t1 must not precede t0");
    std::vector<double> grid(static_cast<std::size_t>(n));
    if (n == 1) {
        grid[0] = t1;
        return grid;
    }
    for (int k = 0; k < n; ++k)
        grid[static_cast<std::size_t>(k)] = t0 + (t1 - t0) * static_cast<double>(k) / (n - 1);
    grid.back() = t1;
    return grid;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "time";
    for (const auto& name : traj.value_names) out << ',' << name;
    for (const auto& name : traj.channel_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << format_double(traj.times[i]);
        for (double v : traj.values[i]) out << ',' << format_double(v);
        if (!traj.channel_names.empty())
            for (double v : traj.event_counts[i]) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_trajectory_csv_file(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_trajectory_csv(out, traj);
}

}  // namespace okin
