#include "relayplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace relayplan
{

namespace
{

// Program units: km, Mbps, Mbit. Meter-scale geometry with 1e8 Hz rates makes
// the KKT systems too ill-conditioned otherwise.
constexpr double kKm = 1e-3;   // m -> km
constexpr double kMbps = 1e-6; // bps -> Mbps

Trajectory hover_at(const Eigen::Vector2d& point, int n_slots)
{
    Trajectory t;
    t.pos.assign(static_cast<size_t>(n_slots + 2), point);
    t.vel.assign(static_cast<size_t>(n_slots + 2), Eigen::Vector2d::Zero());
    t.acc.assign(static_cast<size_t>(n_slots + 1), Eigen::Vector2d::Zero());
    return t;
}

Trajectory endpoint_profile(const ScenarioParams& p)
{
    const EndpointConstraints& ep = *p.endpoints;
    const int steps = p.num_slots + 1;
    const double dt = p.slot_s;

    // Linear-in-time acceleration a(n) = c1 + c2 n fitted to the four
    // boundary conditions per axis.
    const double m = steps;
    const double s1 = m * (m - 1.0) / 2.0;
    const double s2 = (m - 1.0) * m * (2.0 * m - 1.0) / 6.0;
    const double t0 = m * m / 2.0;
    const double t1 = (m - 0.5) * s1 - s2;
    Eigen::Matrix2d sys;
    sys << m, s1, t0, t1;
    Eigen::Matrix2d coef; // column per axis
    for (int axis = 0; axis < 2; ++axis)
    {
        Eigen::Vector2d rhs;
        rhs[0] = (ep.v_final[axis] - ep.v_init[axis]) / dt;
        rhs[1] = (ep.q_final[axis] - ep.q_init[axis] - m * dt * ep.v_init[axis]) / (dt * dt);
        coef.col(axis) = sys.fullPivLu().solve(rhs);
    }

    Trajectory t;
    t.pos.resize(static_cast<size_t>(p.num_slots + 2));
    t.vel.resize(static_cast<size_t>(p.num_slots + 2));
    t.acc.resize(static_cast<size_t>(p.num_slots + 1));
    t.pos[0] = ep.q_init;
    t.vel[0] = ep.v_init;
    for (int n = 0; n < steps; ++n)
    {
        const auto i = static_cast<size_t>(n);
        t.acc[i] = Eigen::Vector2d(coef(0, 0) + coef(1, 0) * n, coef(0, 1) + coef(1, 1) * n);
        t.vel[i + 1] = t.vel[i] + t.acc[i] * dt;
        t.pos[i + 1] = t.pos[i] + t.vel[i] * dt + 0.5 * t.acc[i] * dt * dt;
    }
    try
    {
        t.check_kinematics(p.slot_s, p.v_max, p.a_max, 1e-6);
    }
    catch (const std::invalid_argument& e)
    {
        throw std::invalid_argument(
            std::string("initialize_trajectory: endpoint constraints infeasible within the "
                        "horizon (") +
            e.what() + ")");
    }
    return t;
}

struct Extraction
{
    Trajectory traj;
    RatePlan plan;
    double objective_bps = 0.0;
};

Extraction extract(const ScenarioParams& p, const VarMap& vm, const Eigen::VectorXd& x)
{
    const int n_slots = p.num_slots;
    Extraction out;
    out.traj.pos.resize(static_cast<size_t>(n_slots + 2));
    out.traj.vel.resize(static_cast<size_t>(n_slots + 2));
    out.traj.acc.resize(static_cast<size_t>(n_slots + 1));
    // Take the start state and accelerations from the solver, then
    // re-integrate so the kinematic recursion holds exactly (the solver
    // satisfies the equalities only to its own tolerance).
    out.traj.pos[0] = Eigen::Vector2d(x[vm.pos(0, 0)], x[vm.pos(0, 1)]) / kKm;
    out.traj.vel[0] = Eigen::Vector2d(x[vm.vel(0, 0)], x[vm.vel(0, 1)]) / kKm;
    for (int n = 0; n <= n_slots; ++n)
    {
        const auto i = static_cast<size_t>(n);
        out.traj.acc[i] = Eigen::Vector2d(x[vm.acc(n, 0)], x[vm.acc(n, 1)]) / kKm;
        out.traj.vel[i + 1] = out.traj.vel[i] + out.traj.acc[i] * p.slot_s;
        out.traj.pos[i + 1] = out.traj.pos[i] + out.traj.vel[i] * p.slot_s +
                              0.5 * out.traj.acc[i] * p.slot_s * p.slot_s;
    }
    out.plan.c_sr.resize(static_cast<size_t>(n_slots));
    out.plan.c_rd.resize(static_cast<size_t>(n_slots - 1));
    // Re-impose exact causality and buffer bounds: solver tolerances can
    // leave bit-scale slack that the exact queue recursion rejects.
    const double cap = p.buffer_bits.value_or(std::numeric_limits<double>::infinity());
    double q = 0.0;
    double sum_rd = 0.0;
    for (int n = 1; n <= n_slots; ++n)
    {
        double c_sr = std::max(0.0, x[vm.t_s(n)] / kMbps);
        double c_rd = n == 1 ? 0.0 : std::max(0.0, x[vm.t_d(n)] / kMbps);
        c_rd = std::min(c_rd, q / p.slot_s + c_sr);
        if (q + (c_sr - c_rd) * p.slot_s > cap)
        {
            c_sr = std::max(0.0, c_rd + (cap - q) / p.slot_s);
        }
        q = std::max(0.0, q + (c_sr - c_rd) * p.slot_s);
        out.plan.c_sr[static_cast<size_t>(n - 1)] = c_sr;
        if (n >= 2)
        {
            out.plan.c_rd[static_cast<size_t>(n - 2)] = c_rd;
        }
        sum_rd += c_rd;
    }
    out.objective_bps = sum_rd / (n_slots - 1);
    return out;
}

} // namespace

std::string to_string(PlanMode mode)
{
    return mode == PlanMode::delay_limited ? "delay_limited" : "delay_tolerant";
}

Trajectory initialize_trajectory(const ScenarioParams& p, InitStrategy strategy)
{
    if (p.endpoints)
    {
        return endpoint_profile(p);
    }
    const Eigen::Vector2d src = p.src_pos.head<2>();
    const Eigen::Vector2d dst = p.dst_pos.head<2>();
    switch (strategy)
    {
    case InitStrategy::midpoint_hover:
        return hover_at(0.5 * (src + dst), p.num_slots);
    case InitStrategy::hover_source:
        return hover_at(src, p.num_slots);
    case InitStrategy::hover_dest:
        return hover_at(dst, p.num_slots);
    case InitStrategy::sweep:
    {
        const int steps = p.num_slots + 1;
        const Eigen::Vector2d vel = (dst - src) / (steps * p.slot_s);
        if (vel.norm() > p.v_max)
        {
            throw std::invalid_argument("initialize_trajectory: sweep exceeds v_max");
        }
        Trajectory t;
        t.pos.resize(static_cast<size_t>(p.num_slots + 2));
        t.vel.assign(static_cast<size_t>(p.num_slots + 2), vel);
        t.acc.assign(static_cast<size_t>(p.num_slots + 1), Eigen::Vector2d::Zero());
        for (int n = 0; n <= p.num_slots + 1; ++n)
        {
            t.pos[static_cast<size_t>(n)] = src + vel * (n * p.slot_s);
        }
        return t;
    }
    }
    throw std::logic_error("initialize_trajectory: unknown strategy");
}

Subproblem build_subproblem(const ScenarioParams& p,
                            const FsoLinkModel& fso,
                            const RfLinkModel& rf,
                            const Trajectory& ref_traj,
                            PlanMode mode)
{
    const int n_slots = p.num_slots;
    if (ref_traj.num_slots() != n_slots)
    {
        throw std::invalid_argument("build_subproblem: trajectory slot count mismatch");
    }
    if (mode == PlanMode::delay_limited && !p.delay_req_slots)
    {
        throw std::invalid_argument("build_subproblem: delay_limited mode needs delay_req_slots");
    }
    VarMap vm;
    vm.n_slots = n_slots;
    const int nv = vm.total();
    const double dt = p.slot_s;

    Subproblem sub;
    sub.vars = vm;
    ConeProgram& prog = sub.program;
    prog.num_vars = nv;
    prog.objective = Eigen::VectorXd::Zero(nv);
    for (int n = 2; n <= n_slots; ++n)
    {
        prog.objective[vm.t_d(n)] = 1.0;
    }

    std::vector<Eigen::Triplet<double>> eq;
    std::vector<double> eq_rhs;
    auto eq_row = [&eq, &eq_rhs](std::initializer_list<std::pair<int, double>> terms, double rhs)
    {
        const int row = static_cast<int>(eq_rhs.size());
        for (const auto& [col, val] : terms)
        {
            eq.emplace_back(row, col, val);
        }
        eq_rhs.push_back(rhs);
    };

    for (int n = 0; n <= n_slots; ++n)
    {
        for (int ax = 0; ax < 2; ++ax)
        {
            eq_row({{vm.vel(n + 1, ax), 1.0}, {vm.vel(n, ax), -1.0}, {vm.acc(n, ax), -dt}}, 0.0);
            eq_row({{vm.pos(n + 1, ax), 1.0},
                    {vm.pos(n, ax), -1.0},
                    {vm.vel(n, ax), -dt},
                    {vm.acc(n, ax), -0.5 * dt * dt}},
                   0.0);
        }
    }
    eq_row({{vm.q_buf(1), 1.0}, {vm.t_s(1), -dt}}, 0.0);
    for (int n = 2; n <= n_slots; ++n)
    {
        eq_row({{vm.q_buf(n), 1.0}, {vm.q_buf(n - 1), -1.0}, {vm.t_s(n), -dt}, {vm.t_d(n), dt}},
               0.0);
    }
    if (p.endpoints)
    {
        for (int ax = 0; ax < 2; ++ax)
        {
            eq_row({{vm.pos(0, ax), 1.0}}, p.endpoints->q_init[ax] * kKm);
            eq_row({{vm.pos(n_slots + 1, ax), 1.0}}, p.endpoints->q_final[ax] * kKm);
            eq_row({{vm.vel(0, ax), 1.0}}, p.endpoints->v_init[ax] * kKm);
            eq_row({{vm.vel(n_slots + 1, ax), 1.0}}, p.endpoints->v_final[ax] * kKm);
        }
    }

    std::vector<Eigen::Triplet<double>> ineq;
    std::vector<double> ineq_rhs;
    auto ineq_row = [&ineq, &ineq_rhs](std::initializer_list<std::pair<int, double>> terms,
                                       double rhs)
    {
        const int row = static_cast<int>(ineq_rhs.size());
        for (const auto& [col, val] : terms)
        {
            ineq.emplace_back(row, col, val);
        }
        ineq_rhs.push_back(rhs);
    };

    const Eigen::Vector3d src = p.src_pos;
    const Eigen::Vector3d dst = p.dst_pos;
    for (int n = 1; n <= n_slots; ++n)
    {
        ineq_row({{vm.t_s(n), -1.0}}, 0.0);
        const double ref_dist = (ref_traj.pos3(n, p.altitude_m) - src).norm();
        const FsoTangent tan = fso_rate_tangent(fso, ref_dist);
        // t_s <= tangent value + slope * dist, dist replaced by its cone
        // overestimate d_n (the slope is nonpositive, so that only tightens).
        ineq_row({{vm.t_s(n), 1.0}, {vm.fso_dist(n), -tan.slope_bps_per_m * kMbps / kKm}},
                 tan.value_bps * kMbps);
    }
    for (int n = 2; n <= n_slots; ++n)
    {
        ineq_row({{vm.t_d(n), -1.0}}, 0.0);
        const double ref_u = (ref_traj.pos3(n, p.altitude_m) - dst).squaredNorm();
        const RfTaylor tay = rf_rate_taylor(rf, ref_u);
        // t_d <= B (a_k - b_k (u - u_k)); u in km^2 cancels the Mbps scale.
        ineq_row({{vm.t_d(n), 1.0}, {vm.rf_sqdist(n), rf.bandwidth_hz * tay.b_k}},
                 rf.bandwidth_hz * (tay.a_k + tay.b_k * tay.u_k) * kMbps);
        ineq_row({{vm.t_d(n), 1.0}, {vm.t_s(n), -1.0}, {vm.q_buf(n - 1), -1.0 / dt}}, 0.0);
    }
    for (int n = 1; n <= n_slots; ++n)
    {
        ineq_row({{vm.q_buf(n), -1.0}}, 0.0);
        if (p.buffer_bits)
        {
            ineq_row({{vm.q_buf(n), 1.0}}, *p.buffer_bits * kMbps);
        }
    }
    if (mode == PlanMode::delay_limited)
    {
        const int row = static_cast<int>(ineq_rhs.size());
        for (int n = 1; n <= n_slots; ++n)
        {
            ineq.emplace_back(row, vm.q_buf(n), 1.0);
            ineq.emplace_back(row, vm.t_s(n), -*p.delay_req_slots * dt);
        }
        ineq_rhs.push_back(0.0);
    }

    prog.eq_a.resize(static_cast<int>(eq_rhs.size()), nv);
    prog.eq_a.setFromTriplets(eq.begin(), eq.end());
    prog.eq_b = Eigen::Map<Eigen::VectorXd>(eq_rhs.data(), static_cast<int>(eq_rhs.size()));
    prog.ineq_a.resize(static_cast<int>(ineq_rhs.size()), nv);
    prog.ineq_a.setFromTriplets(ineq.begin(), ineq.end());
    prog.ineq_b = Eigen::Map<Eigen::VectorXd>(ineq_rhs.data(), static_cast<int>(ineq_rhs.size()));

    auto norm_soc = [nv](std::initializer_list<std::pair<int, double>> rows_cols,
                         const Eigen::VectorXd& b, int bound_col, double bound_const)
    {
        SocConstraint soc;
        soc.a.resize(static_cast<int>(b.size()), nv);
        std::vector<Eigen::Triplet<double>> trip;
        int r = 0;
        for (const auto& [col, val] : rows_cols)
        {
            if (col >= 0)
            {
                trip.emplace_back(r, col, val);
            }
            ++r;
        }
        soc.a.setFromTriplets(trip.begin(), trip.end());
        soc.b = b;
        soc.c.resize(nv);
        if (bound_col >= 0)
        {
            soc.c.insert(bound_col) = 1.0;
        }
        soc.d = bound_const;
        return soc;
    };

    for (int n = 1; n <= n_slots; ++n)
    {
        prog.socs.push_back(norm_soc({{vm.vel(n, 0), 1.0}, {vm.vel(n, 1), 1.0}},
                                     Eigen::Vector2d::Zero(), -1, p.v_max * kKm));
    }
    for (int n = 0; n <= n_slots; ++n)
    {
        prog.socs.push_back(norm_soc({{vm.acc(n, 0), 1.0}, {vm.acc(n, 1), 1.0}},
                                     Eigen::Vector2d::Zero(), -1, p.a_max * kKm));
    }
    for (int n = 1; n <= n_slots; ++n)
    {
        Eigen::Vector3d b;
        b << -src.x() * kKm, -src.y() * kKm, (p.altitude_m - src.z()) * kKm;
        prog.socs.push_back(norm_soc(
            {{vm.pos(n, 0), 1.0}, {vm.pos(n, 1), 1.0}, {-1, 0.0}}, b, vm.fso_dist(n), 0.0));
    }
    for (int n = 2; n <= n_slots; ++n)
    {
        QuadConstraint quad;
        quad.q_mat.resize(nv, nv);
        quad.q_mat.insert(vm.pos(n, 0), vm.pos(n, 0)) = 1.0;
        quad.q_mat.insert(vm.pos(n, 1), vm.pos(n, 1)) = 1.0;
        quad.q_vec.resize(nv);
        quad.q_vec.insert(vm.pos(n, 0)) = -2.0 * dst.x() * kKm;
        quad.q_vec.insert(vm.pos(n, 1)) = -2.0 * dst.y() * kKm;
        quad.q_vec.insert(vm.rf_sqdist(n)) = -1.0;
        const double hz = (p.altitude_m - dst.z()) * kKm;
        quad.r = -(dst.x() * kKm * dst.x() * kKm + dst.y() * kKm * dst.y() * kKm + hz * hz);
        prog.quads.push_back(std::move(quad));
    }

    sub.paper_constraint_census = 4 * (n_slots + 1) + (n_slots + 1) + n_slots + n_slots +
                                  (n_slots - 1) + (n_slots - 1) + n_slots + n_slots +
                                  (mode == PlanMode::delay_limited ? 1 : 0) +
                                  (p.endpoints ? 8 : 0);
    return sub;
}

PlanResult evaluate_plan(const ScenarioParams& p,
                         const FsoLinkModel& fso,
                         const RfLinkModel& rf,
                         const Trajectory& traj,
                         PlanMode mode)
{
    PlanResult res;
    res.trajectory = traj;
    res.mode = mode;
    res.plan = greedy_rates(traj, p, fso, rf, p.buffer_bits);
    res.trace = evolve_queue(res.plan, p.slot_s);
    res.objective_bps = res.trace.throughput_bps;
    return res;
}

PlanResult optimize(const ScenarioParams& p,
                    const FsoLinkModel& fso,
                    const RfLinkModel& rf,
                    PlanMode mode,
                    InitStrategy strategy)
{
    return optimize(p, fso, rf, mode, initialize_trajectory(p, strategy));
}

PlanResult optimize(const ScenarioParams& p,
                    const FsoLinkModel& fso,
                    const RfLinkModel& rf,
                    PlanMode mode,
                    const Trajectory& initial)
{
    Trajectory traj = initial;
    traj.check_kinematics(p.slot_s, p.v_max, p.a_max, 1e-5);
    double prev_obj = evaluate_plan(p, fso, rf, traj, mode).objective_bps;

    PlanResult res;
    res.mode = mode;
    Extraction best;
    best.objective_bps = -1.0;
    for (int iter = 1; iter <= p.sca_max_iters; ++iter)
    {
        const Subproblem sub = build_subproblem(p, fso, rf, traj, mode);
        const Solution sol = solve(sub.program, 1e-8, 100);
        const bool usable = sol.status == SolveStatus::optimal ||
                            (sol.status == SolveStatus::max_iter && sol.max_violation <= 1e-5);
        if (!usable)
        {
            if (best.objective_bps >= 0.0)
            {
                // A late subproblem ground to a halt numerically; the best
                // earlier iterate is a valid plan, so stop here.
                break;
            }
            throw std::runtime_error("optimize: subproblem solve failed at iteration " +
                                     std::to_string(iter) +
                                     (sol.diagnostic.empty() ? "" : " (" + sol.diagnostic + ")"));
        }
        Extraction ext = extract(p, sub.vars, sol.x);
        res.objective_log.push_back(ext.objective_bps);
        res.iterations = iter;
        if (ext.objective_bps > best.objective_bps)
        {
            best = ext;
        }
        const double gain = ext.objective_bps - prev_obj;
        const double threshold = std::max(p.sca_tol * std::abs(prev_obj), 1.0);
        traj = std::move(ext.traj);
        prev_obj = res.objective_log.back();
        if (gain <= threshold || !std::isfinite(threshold))
        {
            break;
        }
    }

    res.trajectory = best.traj;
    res.plan = best.plan;
    res.trace = evolve_queue(res.plan, p.slot_s);
    res.objective_bps = res.trace.throughput_bps;
    const double true_obj = evaluate_plan(p, fso, rf, best.traj, mode).objective_bps;
    res.surrogate_gap = true_obj - res.objective_bps;
    return res;
}

std::string verify_plan(const ScenarioParams& p,
                        const FsoLinkModel& fso,
                        const RfLinkModel& rf,
                        const PlanResult& result)
{
    try
    {
        result.trajectory.check_kinematics(p.slot_s, p.v_max, p.a_max, 1e-5);
    }
    catch (const std::invalid_argument& e)
    {
        return e.what();
    }
    const int n_slots = p.num_slots;
    if (result.plan.num_slots() != n_slots || result.trajectory.num_slots() != n_slots)
    {
        return "slot count mismatch";
    }
    double q = 0.0;
    double sum_q = 0.0;
    double sum_sr = 0.0;
    const double cap = p.buffer_bits.value_or(std::numeric_limits<double>::infinity());
    for (int n = 1; n <= n_slots; ++n)
    {
        const Eigen::Vector3d pos = result.trajectory.pos3(n, p.altitude_m);
        const double c_sr = result.plan.c_sr[static_cast<size_t>(n - 1)];
        const double c_rd = result.plan.c_rd_at(n);
        const double r_fso = fso_rate(fso, pos, p.src_pos);
        const double r_rf = rf_rate(rf, pos, p.dst_pos);
        auto tol = [](double r) { return 1e-6 * std::max(1.0, r) + 1e-3; };
        if (c_sr < 0.0 || c_sr > r_fso + tol(r_fso))
        {
            return "c_sr exceeds the FSO rate at slot " + std::to_string(n);
        }
        if (c_rd < 0.0 || c_rd > r_rf + tol(r_rf))
        {
            return "c_rd exceeds the RF rate at slot " + std::to_string(n);
        }
        if (c_rd > q / p.slot_s + c_sr + tol(c_rd))
        {
            return "causality violated at slot " + std::to_string(n);
        }
        q = std::max(0.0, q + (c_sr - c_rd) * p.slot_s);
        if (q > cap * (1.0 + 1e-9) + 1e-3)
        {
            return "buffer overflow at slot " + std::to_string(n);
        }
        sum_q += q;
        sum_sr += c_sr;
    }
    if (result.mode == PlanMode::delay_limited && p.delay_req_slots)
    {
        const double budget = *p.delay_req_slots * p.slot_s * sum_sr;
        if (sum_q > budget * (1.0 + 1e-9) + 1e-3)
        {
            return "average delay budget exceeded";
        }
    }
    return "";
}

} // namespace relayplan
