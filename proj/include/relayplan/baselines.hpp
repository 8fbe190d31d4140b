#ifndef RELAYPLAN_BASELINES_HPP
#define RELAYPLAN_BASELINES_HPP

#include <string>

#include "relayplan/planner.hpp"

namespace relayplan
{

struct StaticRelayResult
{
    double x_s_m = 0.0; //!< hover offset along the source-destination axis
    PlanResult result;
};

/// Hovering relay at the best point of the source-destination axis: 1 m grid
/// search maximizing min(R_FSO, R_RF), evaluated with an unbounded buffer.
StaticRelayResult static_relay(const ScenarioParams& p,
                               const FsoLinkModel& fso,
                               const RfLinkModel& rf);

struct FerryResult
{
    double x_load_m = 0.0;   //!< on-axis loading dwell point
    double x_unload_m = 0.0; //!< on-axis unloading dwell point
    int num_cycles = 0;
    int travel_slots = 0; //!< per one-way leg
    int load_slots = 0;   //!< per cycle
    int unload_slots = 0; //!< per cycle (final cycle absorbs leftover slots)
    PlanResult result;

    std::string description() const;
};

/// Data-ferrying baseline: dwell at the axis point at 3-D range d1 of the
/// source, load at full FSO rate while in range, cruise silently, unload
/// within range d2 of the destination, return; repeated for the best whole
/// number of cycles. Load/unload dwell split follows the rate-balance fixed
/// point. Throws std::invalid_argument when no full cycle fits the horizon or
/// when a range does not reach the flight altitude.
FerryResult data_ferry(const ScenarioParams& p,
                       const FsoLinkModel& fso,
                       const RfLinkModel& rf,
                       double d1_m,
                       double d2_m);

} // namespace relayplan

#endif
