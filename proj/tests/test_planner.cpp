#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "relayplan/planner.hpp"

using namespace relayplan;

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

ScenarioParams small_scenario(int n_slots)
{
    ScenarioParams p;
    p.num_slots = n_slots;
    p.horizon_s = n_slots * p.slot_s;
    return p;
}

/// N=4 miniature: short hop, strong FSO, one-sided RF bottleneck.
ScenarioParams toy_scenario()
{
    ScenarioParams p;
    p.num_slots = 4;
    p.horizon_s = 4.0;
    p.dst_pos = Eigen::Vector3d(200.0, 0.0, 0.0);
    p.v_max = 50.0;
    p.a_max = 100.0;
    p.fso_bandwidth_hz = 2e7;
    p.fso_asnr_db = 20.0;
    return p;
}

} // namespace

TEST_CASE("initializers")
{
    ScenarioParams p = small_scenario(10);

    SUBCASE("midpoint hover")
    {
        const Trajectory t = initialize_trajectory(p, InitStrategy::midpoint_hover);
        REQUIRE(t.num_slots() == 10);
        t.check_kinematics(p.slot_s, p.v_max, p.a_max);
        for (const auto& pos : t.pos)
        {
            CHECK(pos.x() == doctest::Approx(1000.0));
            CHECK(pos.y() == doctest::Approx(0.0));
        }
        for (const auto& vel : t.vel)
        {
            CHECK(vel.norm() == doctest::Approx(0.0));
        }
    }
    SUBCASE("source and destination hovers")
    {
        const Trajectory ts = initialize_trajectory(p, InitStrategy::hover_source);
        CHECK(ts.pos[1].x() == doctest::Approx(0.0));
        const Trajectory td = initialize_trajectory(p, InitStrategy::hover_dest);
        CHECK(td.pos[1].x() == doctest::Approx(2000.0));
    }
    SUBCASE("constant-speed sweep")
    {
        ScenarioParams big = small_scenario(200);
        const Trajectory t = initialize_trajectory(big, InitStrategy::sweep);
        t.check_kinematics(big.slot_s, big.v_max, big.a_max);
        const double speed = 2000.0 / 201.0;
        for (size_t i = 0; i + 1 < t.pos.size(); ++i)
        {
            CHECK(t.vel[i].x() == doctest::Approx(speed));
            CHECK(t.pos[i + 1].x() - t.pos[i].x() == doctest::Approx(speed));
        }
    }
    SUBCASE("endpoint interpolation")
    {
        EndpointConstraints ep;
        ep.q_init = Eigen::Vector2d(0.0, 0.0);
        ep.q_final = Eigen::Vector2d(60.0, 30.0);
        ep.v_init = Eigen::Vector2d::Zero();
        ep.v_final = Eigen::Vector2d::Zero();
        p.endpoints = ep;
        const Trajectory t = initialize_trajectory(p);
        t.check_kinematics(p.slot_s, p.v_max, p.a_max);
        CHECK((t.pos.front() - ep.q_init).norm() <= 1e-6);
        CHECK((t.pos.back() - ep.q_final).norm() <= 1e-6);
        CHECK(t.vel.front().norm() <= 1e-6);
        CHECK(t.vel.back().norm() <= 1e-6);
    }
    SUBCASE("unreachable endpoints raise")
    {
        ScenarioParams tight = small_scenario(4);
        tight.v_max = 1.0;
        tight.a_max = 0.5;
        EndpointConstraints ep;
        ep.q_init = Eigen::Vector2d(0.0, 0.0);
        ep.q_final = Eigen::Vector2d(5000.0, 0.0);
        ep.v_init = Eigen::Vector2d::Zero();
        ep.v_final = Eigen::Vector2d::Zero();
        tight.endpoints = ep;
        CHECK_THROWS_AS(initialize_trajectory(tight), std::invalid_argument);
    }
}

TEST_CASE("subproblem shape")
{
    ScenarioParams p; // defaults: N = 200
    p.delay_req_slots = 5.0;
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    const Trajectory ref = initialize_trajectory(p);

    const Subproblem limited = build_subproblem(p, fso, rf, ref, PlanMode::delay_limited);
    CHECK(limited.paper_constraint_census == 11 * 200 + 4);
    CHECK(limited.program.num_vars == limited.vars.total());
    limited.program.validate();

    const Subproblem tolerant = build_subproblem(p, fso, rf, ref, PlanMode::delay_tolerant);
    CHECK(tolerant.program.ineq_b.size() + 1 == limited.program.ineq_b.size());
    CHECK(tolerant.program.eq_b.size() == limited.program.eq_b.size());
    CHECK(tolerant.program.socs.size() == limited.program.socs.size());

    ScenarioParams no_req = p;
    no_req.delay_req_slots.reset();
    CHECK_THROWS_AS(build_subproblem(no_req, fso, rf, ref, PlanMode::delay_limited),
                    std::invalid_argument);
}

TEST_CASE("small solve: ascent, verification, dominance")
{
    ScenarioParams p = small_scenario(12);
    p.buffer_bits = 5e7;
    p.delay_req_slots = 3.0;
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();

    const PlanResult tolerant = optimize(p, fso, rf, PlanMode::delay_tolerant);
    CHECK(tolerant.objective_bps > 0.0);
    CHECK(verify_plan(p, fso, rf, tolerant) == "");
    for (size_t i = 1; i < tolerant.objective_log.size(); ++i)
    {
        CHECK(tolerant.objective_log[i] >=
              tolerant.objective_log[i - 1] - 1e-6 * std::abs(tolerant.objective_log[i - 1]));
    }

    const PlanResult limited = optimize(p, fso, rf, PlanMode::delay_limited);
    CHECK(verify_plan(p, fso, rf, limited) == "");
    CHECK(tolerant.objective_bps >= limited.objective_bps * (1.0 - 1e-6));
    REQUIRE(limited.trace.avg_delay_slots.has_value());
    CHECK(*limited.trace.avg_delay_slots <= 3.0 + 1e-6);
}

TEST_CASE("infinite tolerance stops after one iteration")
{
    ScenarioParams p = small_scenario(8);
    p.sca_tol = kInf;
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    const PlanResult r = optimize(p, fso, rf, PlanMode::delay_tolerant);
    CHECK(r.iterations == 1);
    CHECK(verify_plan(p, fso, rf, r) == "");
}

TEST_CASE("surrogate never overstates the true throughput")
{
    ScenarioParams p = small_scenario(12);
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    const PlanResult r = optimize(p, fso, rf, PlanMode::delay_tolerant);
    CHECK(r.surrogate_gap >= -1e-6 * std::max(1.0, r.objective_bps));

    // Re-evaluating the returned trajectory with true rates reproduces or
    // beats the reported objective.
    const PlanResult re = evaluate_plan(p, fso, rf, r.trajectory);
    CHECK(re.objective_bps >= r.objective_bps * (1.0 - 1e-9));
}

TEST_CASE("verifier flags corrupted plans")
{
    ScenarioParams p = small_scenario(8);
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    PlanResult r = optimize(p, fso, rf, PlanMode::delay_tolerant);
    REQUIRE(verify_plan(p, fso, rf, r) == "");

    SUBCASE("rate above the physical link")
    {
        r.plan.c_sr[3] += 1e9;
        CHECK(verify_plan(p, fso, rf, r) != "");
    }
    SUBCASE("broken kinematics")
    {
        r.trajectory.pos[4].x() += 500.0;
        CHECK(verify_plan(p, fso, rf, r) != "");
    }
    SUBCASE("buffer overflow")
    {
        ScenarioParams capped = p;
        capped.buffer_bits = 1.0;
        CHECK(verify_plan(capped, fso, rf, r) != "");
    }
}

TEST_CASE("toy scenario matches the exhaustive grid oracle")
{
    const ScenarioParams p = toy_scenario();
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();

    // Exhaustive search over x in {0, 10, ..., 200} per slot (y = 0 by
    // symmetry), keeping only step sequences realizable under the velocity
    // and acceleration caps. With slot 0 free, v1 is free in [-v, v]; a step
    // d from velocity u needs a = 2(d - u) with |a| <= a_max and the next
    // velocity 2d - u within [-v, v]. Feasible v-intervals stay intervals.
    const double v = p.v_max;
    const double half_a = p.a_max / 2.0;
    double best = -1.0;
    std::vector<Eigen::Vector2d> best_pts;
    const int pts = 21;
    std::vector<int> idx(4, 0);
    Trajectory traj;
    traj.pos.assign(6, Eigen::Vector2d::Zero());
    traj.vel.assign(6, Eigen::Vector2d::Zero());
    traj.acc.assign(5, Eigen::Vector2d::Zero());
    for (idx[0] = 0; idx[0] < pts; ++idx[0])
    {
        for (idx[1] = 0; idx[1] < pts; ++idx[1])
        {
            for (idx[2] = 0; idx[2] < pts; ++idx[2])
            {
                for (idx[3] = 0; idx[3] < pts; ++idx[3])
                {
                    double lo = -v;
                    double hi = v;
                    bool ok = true;
                    for (int n = 0; n < 3 && ok; ++n)
                    {
                        const double d = 10.0 * (idx[n + 1] - idx[n]);
                        lo = std::max({lo, d - 2.0 * half_a, 2.0 * d - v});
                        hi = std::min({hi, d + 2.0 * half_a, 2.0 * d + v});
                        ok = lo <= hi;
                        const double nlo = 2.0 * d - hi;
                        const double nhi = 2.0 * d - lo;
                        lo = nlo;
                        hi = nhi;
                    }
                    if (!ok)
                    {
                        continue;
                    }
                    for (int n = 1; n <= 4; ++n)
                    {
                        traj.pos[static_cast<size_t>(n)] = Eigen::Vector2d(10.0 * idx[n - 1], 0.0);
                    }
                    traj.pos[0] = traj.pos[1];
                    traj.pos[5] = traj.pos[4];
                    const RatePlan plan = greedy_rates(traj, p, fso, rf, std::nullopt);
                    const QueueTrace t = evolve_queue(plan, p.slot_s);
                    if (t.throughput_bps > best)
                    {
                        best = t.throughput_bps;
                        best_pts.assign(traj.pos.begin() + 1, traj.pos.begin() + 5);
                    }
                }
            }
        }
    }
    REQUIRE(best > 0.0);

    double planned = -1.0;
    for (const InitStrategy init : {InitStrategy::midpoint_hover, InitStrategy::hover_source,
                                    InitStrategy::hover_dest, InitStrategy::sweep})
    {
        const PlanResult r = optimize(p, fso, rf, PlanMode::delay_tolerant, init);
        CHECK(verify_plan(p, fso, rf, r) == "");
        planned = std::max(planned, r.objective_bps);
    }
    CHECK(planned >= 0.95 * best);
    CHECK(planned <= 1.05 * best);
}
