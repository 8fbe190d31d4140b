#ifndef RELAYPLAN_PLANNER_HPP
#define RELAYPLAN_PLANNER_HPP

#include <string>
#include <vector>

#include "relayplan/queue.hpp"
#include "relayplan/scenario.hpp"
#include "relayplan/socp.hpp"

namespace relayplan
{

enum class PlanMode
{
    delay_limited,
    delay_tolerant,
};

enum class InitStrategy
{
    midpoint_hover,
    hover_source,
    hover_dest,
    sweep, //!< constant-speed pass from source to destination
};

std::string to_string(PlanMode mode);

struct PlanResult
{
    Trajectory trajectory;
    RatePlan plan;
    QueueTrace trace;
    double objective_bps = 0.0;
    int iterations = 0;
    std::vector<double> objective_log; //!< subproblem objective per iteration
    PlanMode mode = PlanMode::delay_tolerant;
    double surrogate_gap = 0.0; //!< greedy true-rate throughput minus the surrogate objective
};

/// Kinematically feasible starting path. Default hovers at the midpoint of
/// the source-destination segment with zero velocity. When endpoint
/// constraints are enabled the path interpolates them with a linear-in-time
/// acceleration profile; throws std::invalid_argument if that profile breaks
/// the velocity or acceleration caps.
Trajectory initialize_trajectory(const ScenarioParams& p,
                                 InitStrategy strategy = InitStrategy::midpoint_hover);

/// Index map from semantic variables to solver columns. Internally the
/// program is scaled to km / Mbps / Mbit; accessors return column indices.
struct VarMap
{
    int n_slots = 0;
    int pos(int slot, int axis) const { return 2 * slot + axis; }
    int vel(int slot, int axis) const { return 2 * (n_slots + 2) + 2 * slot + axis; }
    int acc(int slot, int axis) const { return 4 * (n_slots + 2) + 2 * slot + axis; }
    int t_s(int slot) const { return 4 * (n_slots + 2) + 2 * (n_slots + 1) + (slot - 1); }
    int t_d(int slot) const { return t_s(n_slots + 1) + (slot - 2); }
    int q_buf(int slot) const { return t_d(n_slots + 1) + (slot - 1); }
    int fso_dist(int slot) const { return q_buf(n_slots + 1) + (slot - 1); }
    int rf_sqdist(int slot) const { return fso_dist(n_slots + 1) + (slot - 2); }
    int total() const { return rf_sqdist(n_slots + 1); }
};

struct Subproblem
{
    ConeProgram program;
    VarMap vars;
    int paper_constraint_census = 0; //!< grouped count, double-sided bounds as one
};

/// Convex restriction around ref_traj: exact kinematics, cone-bounded
/// velocity/acceleration, tangent lower bound of the FSO rate in the relay-
/// source distance, first-order lower bound of the RF rate in the squared
/// relay-destination distance, buffer recursion and bounds, and (delay-limited
/// mode) the average-delay budget.
Subproblem build_subproblem(const ScenarioParams& p,
                            const FsoLinkModel& fso,
                            const RfLinkModel& rf,
                            const Trajectory& ref_traj,
                            PlanMode mode);

/// Successive convex approximation: repeatedly rebuild the subproblem around
/// the previous optimum until the objective gain drops below sca_tol
/// (relative, with a 1 bps absolute floor) or sca_max_iters is hit. The
/// returned plan is the final subproblem's rate plan, so every constraint
/// (including the delay budget) holds with true-rate upper bounds. Throws
/// std::runtime_error if a subproblem solve fails.
PlanResult optimize(const ScenarioParams& p,
                    const FsoLinkModel& fso,
                    const RfLinkModel& rf,
                    PlanMode mode,
                    InitStrategy strategy = InitStrategy::midpoint_hover);

/// Same loop started from an explicit (kinematically feasible) trajectory;
/// used for warm-started sweeps.
PlanResult optimize(const ScenarioParams& p,
                    const FsoLinkModel& fso,
                    const RfLinkModel& rf,
                    PlanMode mode,
                    const Trajectory& initial);

/// True-rate evaluation of a fixed trajectory: greedy rates plus queue
/// evolution under the exact channel models. Used for reporting and for the
/// surrogate gap.
PlanResult evaluate_plan(const ScenarioParams& p,
                         const FsoLinkModel& fso,
                         const RfLinkModel& rf,
                         const Trajectory& traj,
                         PlanMode mode = PlanMode::delay_tolerant);

/// Independent check of a finished plan: kinematics, true-rate upper bounds,
/// queue consistency, buffer bounds and (delay-limited) the delay budget.
/// Returns an empty string when everything holds, else a description of the
/// first violation. Shares no code with build_subproblem.
std::string verify_plan(const ScenarioParams& p,
                        const FsoLinkModel& fso,
                        const RfLinkModel& rf,
                        const PlanResult& result);

} // namespace relayplan

#endif
