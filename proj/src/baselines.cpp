#include "relayplan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace relayplan
{

namespace
{

Eigen::Vector2d axis_point(const ScenarioParams& p, double x_m)
{
    const Eigen::Vector2d src = p.src_pos.head<2>();
    const Eigen::Vector2d dst = p.dst_pos.head<2>();
    const double len = (dst - src).norm();
    return src + (dst - src) * (x_m / len);
}

/// Symmetric trapezoidal leg: r ramp slots at +/-a around an optional
/// plateau, rest-to-rest, covering dist_m exactly. Returns per-slot axis
/// accelerations; empty when dist_m == 0.
std::vector<double> leg_profile(double dist_m, double dt, double v_max, double a_max)
{
    std::vector<double> acc;
    if (dist_m <= 0.0)
    {
        return acc;
    }
    // Displacement of the profile is a * dt^2 * r * (M - r) for M slots total.
    for (int m_slots = 2;; ++m_slots)
    {
        for (int r = m_slots / 2; r >= 1; --r)
        {
            const double a = dist_m / (dt * dt * r * (m_slots - r));
            if (a <= a_max && r * a * dt <= v_max)
            {
                acc.assign(static_cast<size_t>(m_slots), 0.0);
                for (int j = 0; j < r; ++j)
                {
                    acc[static_cast<size_t>(j)] = a;
                    acc[static_cast<size_t>(m_slots - 1 - j)] = -a;
                }
                return acc;
            }
        }
        if (m_slots > 100000)
        {
            throw std::logic_error("leg_profile: no feasible profile");
        }
    }
}

RatePlan gated_plan(const ScenarioParams& p,
                    const FsoLinkModel& fso,
                    const RfLinkModel& rf,
                    const Trajectory& traj,
                    double d1_m,
                    double d2_m)
{
    const int n_slots = p.num_slots;
    const double dt = p.slot_s;
    const double cap = p.buffer_bits.value_or(std::numeric_limits<double>::infinity());
    RatePlan plan;
    plan.c_sr.resize(static_cast<size_t>(n_slots));
    plan.c_rd.resize(static_cast<size_t>(n_slots - 1));
    double q = 0.0;
    const double range_tol = 1e-6;
    for (int n = 1; n <= n_slots; ++n)
    {
        const Eigen::Vector3d pos = traj.pos3(n, p.altitude_m);
        const bool in_s = (pos - p.src_pos).norm() <= d1_m + range_tol;
        const bool in_d = (pos - p.dst_pos).norm() <= d2_m + range_tol;
        double c_sr = in_s ? fso_rate(fso, pos, p.src_pos) : 0.0;
        double c_rd = (n >= 2 && in_d)
                          ? std::min(rf_rate(rf, pos, p.dst_pos), q / dt + c_sr)
                          : 0.0;
        if (q + (c_sr - c_rd) * dt > cap)
        {
            c_sr = std::max(0.0, c_rd + (cap - q) / dt);
        }
        q = std::max(0.0, q + (c_sr - c_rd) * dt);
        plan.c_sr[static_cast<size_t>(n - 1)] = c_sr;
        if (n >= 2)
        {
            plan.c_rd[static_cast<size_t>(n - 2)] = c_rd;
        }
    }
    return plan;
}

} // namespace

StaticRelayResult static_relay(const ScenarioParams& p,
                               const FsoLinkModel& fso,
                               const RfLinkModel& rf)
{
    const double len = (p.dst_pos.head<2>() - p.src_pos.head<2>()).norm();
    double best_x = 0.0;
    double best_rate = -1.0;
    for (double x = 0.0; x <= len; x += 1.0)
    {
        const Eigen::Vector2d xy = axis_point(p, x);
        const Eigen::Vector3d pos(xy.x(), xy.y(), p.altitude_m);
        const double r = std::min(fso_rate(fso, pos, p.src_pos), rf_rate(rf, pos, p.dst_pos));
        if (r > best_rate)
        {
            best_rate = r;
            best_x = x;
        }
    }
    ScenarioParams unbuffered = p;
    unbuffered.buffer_bits.reset();
    StaticRelayResult out;
    out.x_s_m = best_x;
    Trajectory hover;
    const Eigen::Vector2d point = axis_point(p, best_x);
    hover.pos.assign(static_cast<size_t>(p.num_slots + 2), point);
    hover.vel.assign(static_cast<size_t>(p.num_slots + 2), Eigen::Vector2d::Zero());
    hover.acc.assign(static_cast<size_t>(p.num_slots + 1), Eigen::Vector2d::Zero());
    out.result = evaluate_plan(unbuffered, fso, rf, hover);
    return out;
}

std::string FerryResult::description() const
{
    std::ostringstream os;
    os << num_cycles << " cycle(s): load " << load_slots << " slot(s) at x=" << x_load_m
       << " m, cruise " << travel_slots << " slot(s), unload " << unload_slots
       << " slot(s) at x=" << x_unload_m << " m";
    return os.str();
}

FerryResult data_ferry(const ScenarioParams& p,
                       const FsoLinkModel& fso,
                       const RfLinkModel& rf,
                       double d1_m,
                       double d2_m)
{
    const double len = (p.dst_pos.head<2>() - p.src_pos.head<2>()).norm();
    if (d1_m + d2_m >= len)
    {
        throw std::invalid_argument("data_ferry: d1 + d2 must be below the link span");
    }
    if (d1_m <= p.altitude_m || d2_m <= p.altitude_m)
    {
        throw std::invalid_argument("data_ferry: ranges must exceed the flight altitude");
    }
    const double x_load = std::sqrt(d1_m * d1_m - p.altitude_m * p.altitude_m);
    const double x_unload = len - std::sqrt(d2_m * d2_m - p.altitude_m * p.altitude_m);
    if (x_load >= x_unload)
    {
        throw std::invalid_argument("data_ferry: loading and unloading ranges overlap");
    }

    const std::vector<double> leg =
        leg_profile(x_unload - x_load, p.slot_s, p.v_max, p.a_max);
    const int travel = static_cast<int>(leg.size());
    const int n_slots = p.num_slots;

    const Eigen::Vector2d src_xy = p.src_pos.head<2>();
    const Eigen::Vector2d dst_xy = p.dst_pos.head<2>();
    const Eigen::Vector2d axis = (dst_xy - src_xy).normalized();
    const Eigen::Vector2d load_pt = axis_point(p, x_load);
    const Eigen::Vector3d load_pos(load_pt.x(), load_pt.y(), p.altitude_m);
    const Eigen::Vector2d unload_pt = axis_point(p, x_unload);
    const Eigen::Vector3d unload_pos(unload_pt.x(), unload_pt.y(), p.altitude_m);
    const double r_load = fso_rate(fso, load_pos, p.src_pos);
    const double r_unload = rf_rate(rf, unload_pos, p.dst_pos);
    const double load_share = r_unload / std::max(r_load + r_unload, 1e-12);

    FerryResult best;
    bool found = false;
    for (int cycles = 1;; ++cycles)
    {
        const int dwell_budget = n_slots - (2 * cycles - 1) * travel;
        if (dwell_budget < 2 * cycles)
        {
            break;
        }
        const int per_cycle = dwell_budget / cycles;
        int load_slots = static_cast<int>(std::lround(per_cycle * load_share));
        load_slots = std::clamp(load_slots, 1, per_cycle - 1);
        const int unload_slots = per_cycle - load_slots;
        const int leftover = dwell_budget - cycles * per_cycle;

        // Assemble the acceleration sequence: dwell, leg out, dwell, leg back.
        std::vector<double> acc;
        acc.reserve(static_cast<size_t>(n_slots + 1));
        for (int c = 0; c < cycles; ++c)
        {
            acc.insert(acc.end(), static_cast<size_t>(load_slots), 0.0);
            acc.insert(acc.end(), leg.begin(), leg.end());
            int dwell = unload_slots + (c == cycles - 1 ? leftover : 0);
            acc.insert(acc.end(), static_cast<size_t>(dwell), 0.0);
            if (c != cycles - 1)
            {
                for (const double a : leg)
                {
                    acc.push_back(-a);
                }
            }
        }
        acc.resize(static_cast<size_t>(n_slots + 1), 0.0);

        Trajectory traj;
        traj.pos.resize(static_cast<size_t>(n_slots + 2));
        traj.vel.resize(static_cast<size_t>(n_slots + 2));
        traj.acc.resize(static_cast<size_t>(n_slots + 1));
        traj.pos[0] = load_pt;
        traj.vel[0] = Eigen::Vector2d::Zero();
        for (int n = 0; n <= n_slots; ++n)
        {
            const auto i = static_cast<size_t>(n);
            traj.acc[i] = acc[i] * axis;
            traj.vel[i + 1] = traj.vel[i] + traj.acc[i] * p.slot_s;
            traj.pos[i + 1] =
                traj.pos[i] + traj.vel[i] * p.slot_s + 0.5 * traj.acc[i] * p.slot_s * p.slot_s;
        }

        PlanResult res;
        res.trajectory = traj;
        res.plan = gated_plan(p, fso, rf, traj, d1_m, d2_m);
        res.trace = evolve_queue(res.plan, p.slot_s);
        res.objective_bps = res.trace.throughput_bps;

        if (!found || res.objective_bps > best.result.objective_bps)
        {
            found = true;
            best.x_load_m = x_load;
            best.x_unload_m = x_unload;
            best.num_cycles = cycles;
            best.travel_slots = travel;
            best.load_slots = load_slots;
            best.unload_slots = unload_slots;
            best.result = std::move(res);
        }
    }
    if (!found)
    {
        throw std::invalid_argument("data_ferry: no full cycle fits within the horizon");
    }
    return best;
}

} // namespace relayplan
