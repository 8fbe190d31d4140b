#include "relayplan/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace relayplan
{

namespace
{

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path);
    if (!f)
    {
        throw std::runtime_error("cannot open output file '" + path + "'");
    }
    return f;
}

} // namespace

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_trajectory(const std::string& path, const Trajectory& traj)
{
    auto f = open_out(path);
    f << "slot,x_m,y_m,vx,vy,ax,ay\n";
    const int n_slots = traj.num_slots();
    for (int n = 0; n <= n_slots + 1; ++n)
    {
        const auto i = static_cast<size_t>(n);
        const Eigen::Vector2d a =
            n <= n_slots ? traj.acc[i] : Eigen::Vector2d::Zero().eval();
        f << n << ',' << format_number(traj.pos[i].x()) << ',' << format_number(traj.pos[i].y())
          << ',' << format_number(traj.vel[i].x()) << ',' << format_number(traj.vel[i].y()) << ','
          << format_number(a.x()) << ',' << format_number(a.y()) << '\n';
    }
}

Trajectory read_trajectory(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
    {
        throw std::runtime_error("cannot open trajectory file '" + path + "'");
    }
    std::string line;
    if (!std::getline(f, line))
    {
        throw std::runtime_error("trajectory file '" + path + "' is empty");
    }
    Trajectory traj;
    int lineno = 1;
    while (std::getline(f, line))
    {
        ++lineno;
        if (line.empty())
        {
            continue;
        }
        std::istringstream ss(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(ss, field, ','))
        {
            try
            {
                vals.push_back(std::stod(field));
            }
            catch (const std::exception&)
            {
                throw std::runtime_error("trajectory file '" + path + "' line " +
                                         std::to_string(lineno) + ": bad number '" + field + "'");
            }
        }
        if (vals.size() != 7)
        {
            throw std::runtime_error("trajectory file '" + path + "' line " +
                                     std::to_string(lineno) + ": expected 7 columns");
        }
        traj.pos.emplace_back(vals[1], vals[2]);
        traj.vel.emplace_back(vals[3], vals[4]);
        traj.acc.emplace_back(vals[5], vals[6]);
    }
    if (traj.pos.size() < 3)
    {
        throw std::runtime_error("trajectory file '" + path + "': too few rows");
    }
    traj.acc.pop_back(); // the final slot carries no acceleration
    return traj;
}

void write_queue_trace(const std::string& path, const RatePlan& plan, const QueueTrace& trace)
{
    auto f = open_out(path);
    f << "slot,c_sr_bps,c_rd_bps,q_bits\n";
    for (int n = 1; n <= plan.num_slots(); ++n)
    {
        f << n << ',' << format_number(plan.c_sr[static_cast<size_t>(n - 1)]) << ','
          << format_number(plan.c_rd_at(n)) << ','
          << format_number(trace.q_bits[static_cast<size_t>(n - 1)]) << '\n';
    }
}

void write_metrics(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries)
{
    auto f = open_out(path);
    for (const auto& [key, value] : entries)
    {
        f << key << " = " << value << '\n';
    }
}

void write_iteration_log(const std::string& path, const std::vector<double>& objective_log)
{
    auto f = open_out(path);
    f << "iter,objective_bps\n";
    for (size_t i = 0; i < objective_log.size(); ++i)
    {
        f << (i + 1) << ',' << format_number(objective_log[i]) << '\n';
    }
}

std::vector<PmfBin> position_pmf(const Trajectory& traj, double bin_width_m, double origin_m)
{
    if (bin_width_m <= 0.0)
    {
        throw std::invalid_argument("position_pmf: bin width must be positive");
    }
    const int n_slots = traj.num_slots();
    std::map<long long, int> counts;
    for (int n = 1; n <= n_slots; ++n)
    {
        const double x = traj.pos[static_cast<size_t>(n)].x();
        counts[static_cast<long long>(std::floor((x - origin_m) / bin_width_m))]++;
    }
    std::vector<PmfBin> bins;
    for (const auto& [idx, count] : counts)
    {
        bins.push_back({origin_m + idx * bin_width_m, origin_m + (idx + 1) * bin_width_m,
                        static_cast<double>(count) / n_slots});
    }
    return bins;
}

void write_pmf(const std::string& path, const std::vector<PmfBin>& bins)
{
    auto f = open_out(path);
    f << "bin_lo_m,bin_hi_m,fraction\n";
    for (const auto& b : bins)
    {
        f << format_number(b.lo_m) << ',' << format_number(b.hi_m) << ','
          << format_number(b.fraction) << '\n';
    }
}

void write_sweep(const std::string& path, const std::vector<SweepRow>& rows)
{
    auto f = open_out(path);
    f << "value,objective_bps,iterations,mean_delay_slots,mean_packet_delay\n";
    for (const auto& r : rows)
    {
        if (r.failed)
        {
            f << format_number(r.value) << ",error(" << r.error << "),,,\n";
        }
        else
        {
            f << format_number(r.value) << ',' << format_number(r.objective_bps) << ','
              << r.iterations << ',' << format_number(r.mean_delay_slots) << ','
              << format_number(r.mean_packet_delay) << '\n';
        }
    }
}

} // namespace relayplan
