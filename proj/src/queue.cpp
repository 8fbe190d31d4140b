#include "relayplan/queue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace relayplan
{

QueueTrace evolve_queue(const RatePlan& plan, double slot_s)
{
    const int n_slots = plan.num_slots();
    if (n_slots < 2)
    {
        throw std::invalid_argument("evolve_queue: need at least 2 slots");
    }
    if (static_cast<int>(plan.c_rd.size()) != n_slots - 1)
    {
        throw std::invalid_argument("evolve_queue: c_rd must cover slots 2..N");
    }

    QueueTrace trace;
    trace.q_bits.resize(static_cast<size_t>(n_slots));
    double q = 0.0;
    double sum_q = 0.0;
    double sum_sr = 0.0;
    double sum_rd = 0.0;
    for (int n = 1; n <= n_slots; ++n)
    {
        const double c_sr = plan.c_sr[static_cast<size_t>(n - 1)];
        const double c_rd = plan.c_rd_at(n);
        if (c_sr < 0.0 || c_rd < 0.0)
        {
            throw std::invalid_argument("evolve_queue: negative rate at slot " +
                                        std::to_string(n));
        }
        q += (c_sr - c_rd) * slot_s;
        if (q < -1e-6)
        {
            throw std::invalid_argument("evolve_queue: queue negative at slot " +
                                        std::to_string(n) + " (plan violates causality)");
        }
        q = std::max(q, 0.0);
        trace.q_bits[static_cast<size_t>(n - 1)] = q;
        sum_q += q;
        sum_sr += c_sr;
        sum_rd += c_rd;
    }

    trace.throughput_bps = sum_rd / (n_slots - 1);
    trace.arrival_rate_bps = sum_sr / n_slots;
    trace.avg_queue_bits = sum_q / n_slots;
    if (trace.arrival_rate_bps > 0.0)
    {
        const double delay_s = trace.avg_queue_bits / trace.arrival_rate_bps;
        trace.avg_delay_slots = delay_s / slot_s;
        trace.avg_delay_adjusted_slots = delay_s / slot_s - 1.0;
    }
    return trace;
}

RatePlan greedy_rates(const Trajectory& traj,
                      const ScenarioParams& p,
                      const FsoLinkModel& fso,
                      const RfLinkModel& rf,
                      std::optional<double> buffer_bits)
{
    const int n_slots = traj.num_slots();
    const double dt = p.slot_s;
    const double cap = buffer_bits.value_or(std::numeric_limits<double>::infinity());

    RatePlan plan;
    plan.c_sr.resize(static_cast<size_t>(n_slots));
    plan.c_rd.resize(static_cast<size_t>(n_slots - 1));

    double q = 0.0;
    for (int n = 1; n <= n_slots; ++n)
    {
        const Eigen::Vector3d pos = traj.pos3(n, p.altitude_m);
        const double r_fso = fso_rate(fso, pos, p.src_pos);
        const double r_rf = rf_rate(rf, pos, p.dst_pos);

        double c_sr = r_fso;
        double c_rd = n == 1 ? 0.0 : std::min(r_rf, q / dt + c_sr);
        // Buffer overflow can only happen when the RF side binds; scale the
        // intake back until the slot-end queue fits.
        if (q + (c_sr - c_rd) * dt > cap)
        {
            c_sr = std::max(0.0, c_rd + (cap - q) / dt);
            c_rd = n == 1 ? 0.0 : std::min(r_rf, q / dt + c_sr);
        }
        q = std::max(q + (c_sr - c_rd) * dt, 0.0);
        plan.c_sr[static_cast<size_t>(n - 1)] = c_sr;
        if (n >= 2)
        {
            plan.c_rd[static_cast<size_t>(n - 2)] = c_rd;
        }
    }
    return plan;
}

std::map<int, int> PacketDelayStats::histogram() const
{
    std::map<int, int> h;
    for (const int d : delays_slots)
    {
        ++h[d];
    }
    return h;
}

PacketDelayStats packet_delay_replay(const RatePlan& plan, double slot_s, double packet_bits)
{
    if (packet_bits <= 0.0)
    {
        throw std::invalid_argument("packet_delay_replay: packet_bits must be positive");
    }
    const int n_slots = plan.num_slots();
    std::vector<double> cum_arr(static_cast<size_t>(n_slots));
    std::vector<double> cum_dep(static_cast<size_t>(n_slots));
    double a = 0.0;
    double d = 0.0;
    for (int n = 1; n <= n_slots; ++n)
    {
        a += plan.c_sr[static_cast<size_t>(n - 1)] * slot_s;
        d += plan.c_rd_at(n) * slot_s;
        cum_arr[static_cast<size_t>(n - 1)] = a;
        cum_dep[static_cast<size_t>(n - 1)] = d;
    }

    PacketDelayStats stats;
    // Tiny slack so a mark reached exactly (up to roundoff) counts in that slot.
    const double eps = 1e-9 * std::max(1.0, packet_bits);
    const int num_packets = static_cast<int>(std::floor(cum_arr.back() / packet_bits + eps));
    int arr_slot = 1;
    int dep_slot = 1;
    long long sum = 0;
    for (int k = 1; k <= num_packets; ++k)
    {
        const double mark = k * packet_bits;
        while (cum_arr[static_cast<size_t>(arr_slot - 1)] < mark - eps)
        {
            ++arr_slot;
        }
        while (dep_slot <= n_slots && cum_dep[static_cast<size_t>(dep_slot - 1)] < mark - eps)
        {
            ++dep_slot;
        }
        if (dep_slot > n_slots)
        {
            stats.num_undelivered = num_packets - k + 1;
            break;
        }
        const int delay = std::max(dep_slot - arr_slot, 1);
        stats.delays_slots.push_back(delay);
        stats.max_delay_slots = std::max(stats.max_delay_slots, delay);
        sum += delay;
        ++stats.num_delivered;
    }
    if (stats.num_delivered > 0)
    {
        stats.mean_delay_slots = static_cast<double>(sum) / stats.num_delivered;
    }
    return stats;
}

} // namespace relayplan
