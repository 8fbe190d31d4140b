#ifndef RELAYPLAN_IO_HPP
#define RELAYPLAN_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include "relayplan/queue.hpp"
#include "relayplan/scenario.hpp"

namespace relayplan
{

/// All writers emit plain columnar text with a header row and %.9g numbers,
/// byte-identical across runs for identical inputs.

void write_trajectory(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory(const std::string& path);

void write_queue_trace(const std::string& path, const RatePlan& plan, const QueueTrace& trace);

/// key = value lines, in the given order.
void write_metrics(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries);

void write_iteration_log(const std::string& path, const std::vector<double>& objective_log);

struct PmfBin
{
    double lo_m;
    double hi_m;
    double fraction;
};

/// Occupancy fraction of the x coordinate over slots 1..N, binned with the
/// given width starting at origin_m. Fractions sum to 1.
std::vector<PmfBin> position_pmf(const Trajectory& traj, double bin_width_m, double origin_m = 0.0);

void write_pmf(const std::string& path, const std::vector<PmfBin>& bins);

struct SweepRow
{
    double value;
    bool failed = false;
    std::string error;
    double objective_bps = 0.0;
    int iterations = 0;
    double mean_delay_slots = 0.0;
    double mean_packet_delay = 0.0;
};

void write_sweep(const std::string& path, const std::vector<SweepRow>& rows);

/// Shortest text that round-trips a double (printf %.9g semantics widened to
/// %.17g when needed); used by every writer.
std::string format_number(double v);

} // namespace relayplan

#endif
