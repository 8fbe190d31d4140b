#ifndef RELAYPLAN_QUEUE_HPP
#define RELAYPLAN_QUEUE_HPP

#include <map>
#include <optional>
#include <vector>

#include "relayplan/scenario.hpp"

namespace relayplan
{

/// Per-slot transmission rates. c_sr covers slots 1..N; c_rd covers slots
/// 2..N (the relay forwards nothing in slot 1 -- decode-and-forward costs one
/// slot). All entries are nonnegative bps.
struct RatePlan
{
    std::vector<double> c_sr;
    std::vector<double> c_rd;

    int num_slots() const { return static_cast<int>(c_sr.size()); }

    /// C_RD at slot n in 1..N; returns 0 for n = 1.
    double c_rd_at(int n) const { return n <= 1 ? 0.0 : c_rd[static_cast<size_t>(n - 2)]; }
};

/// Buffer evolution and the derived throughput/delay metrics.
struct QueueTrace
{
    std::vector<double> q_bits; //!< Q[1..N]
    double throughput_bps = 0.0;
    double arrival_rate_bps = 0.0;
    double avg_queue_bits = 0.0;
    std::optional<double> avg_delay_slots;          //!< unset when the arrival rate is zero
    std::optional<double> avg_delay_adjusted_slots; //!< avg_delay minus the one-slot DF offset
};

/// Runs the buffer recursion Q[n] = Q[n-1] + (C_SR[n] - C_RD[n]) dt from
/// Q[0] = 0 and computes throughput (mean C_RD over slots 2..N), arrival rate
/// (mean C_SR) and the Little's-law average delay. Throws std::invalid_argument
/// if the plan drives any Q[n] below -1e-6 bits (causality violation) or has
/// negative rates.
QueueTrace evolve_queue(const RatePlan& plan, double slot_s);

/// Largest-rate plan along a fixed trajectory: each slot sends as much as the
/// FSO link and the buffer headroom allow and drains as much as the RF link
/// and buffered data allow. The resulting trace satisfies
/// 0 <= Q[n] <= buffer_bits.
RatePlan greedy_rates(const Trajectory& traj,
                      const ScenarioParams& p,
                      const FsoLinkModel& fso,
                      const RfLinkModel& rf,
                      std::optional<double> buffer_bits);

/// FIFO fluid replay at packet granularity.
struct PacketDelayStats
{
    std::vector<int> delays_slots; //!< one entry per delivered packet, in arrival order
    double mean_delay_slots = 0.0;
    int max_delay_slots = 0;
    int num_delivered = 0;
    int num_undelivered = 0;

    /// delay -> packet count
    std::map<int, int> histogram() const;
};

/// Packet k (k = 1, 2, ...) arrives in the first slot whose cumulative S-side
/// bits reach k * packet_bits and departs in the first slot whose cumulative
/// D-side bits reach the same mark; its delay is the slot difference, floored
/// at one slot. Packets whose mark is never departed within the horizon are
/// counted as undelivered. Throws std::invalid_argument if packet_bits <= 0.
PacketDelayStats packet_delay_replay(const RatePlan& plan, double slot_s, double packet_bits);

} // namespace relayplan

#endif
