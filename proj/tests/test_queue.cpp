#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "relayplan/queue.hpp"

using namespace relayplan;

namespace
{

ScenarioParams tiny_scenario(int n_slots)
{
    ScenarioParams p;
    p.num_slots = n_slots;
    p.horizon_s = n_slots * p.slot_s;
    return p;
}

Trajectory hover(const Eigen::Vector2d& point, int n_slots)
{
    Trajectory t;
    t.pos.assign(static_cast<size_t>(n_slots + 2), point);
    t.vel.assign(static_cast<size_t>(n_slots + 2), Eigen::Vector2d::Zero());
    t.acc.assign(static_cast<size_t>(n_slots + 1), Eigen::Vector2d::Zero());
    return t;
}

} // namespace

TEST_CASE("three-slot hand computation")
{
    RatePlan plan;
    plan.c_sr = {10.0, 10.0, 10.0};
    plan.c_rd = {10.0, 10.0};
    const QueueTrace t = evolve_queue(plan, 1.0);
    CHECK(t.q_bits[0] == doctest::Approx(10.0));
    CHECK(t.q_bits[1] == doctest::Approx(10.0));
    CHECK(t.q_bits[2] == doctest::Approx(10.0));
    CHECK(t.throughput_bps == doctest::Approx(10.0));
    CHECK(t.arrival_rate_bps == doctest::Approx(10.0));
    REQUIRE(t.avg_delay_slots.has_value());
    CHECK(*t.avg_delay_slots == doctest::Approx(1.0));
    CHECK(*t.avg_delay_adjusted_slots == doctest::Approx(0.0));
}

TEST_CASE("all-zero plan leaves the delay undefined")
{
    RatePlan plan;
    plan.c_sr = {0.0, 0.0, 0.0};
    plan.c_rd = {0.0, 0.0};
    const QueueTrace t = evolve_queue(plan, 1.0);
    CHECK(t.throughput_bps == doctest::Approx(0.0));
    CHECK_FALSE(t.avg_delay_slots.has_value());
    for (const double q : t.q_bits)
    {
        CHECK(q == doctest::Approx(0.0));
    }
}

TEST_CASE("single packet in and out")
{
    RatePlan plan;
    plan.c_sr = {10.0, 0.0, 0.0};
    plan.c_rd = {10.0, 0.0};
    const QueueTrace t = evolve_queue(plan, 1.0);
    CHECK(t.q_bits[0] == doctest::Approx(10.0));
    CHECK(t.q_bits[1] == doctest::Approx(0.0));
    CHECK(t.q_bits[2] == doctest::Approx(0.0));
}

TEST_CASE("causality violations raise")
{
    RatePlan plan;
    plan.c_sr = {10.0, 10.0, 10.0};
    plan.c_rd = {25.0, 10.0};
    CHECK_THROWS_AS(evolve_queue(plan, 1.0), std::invalid_argument);
    plan.c_rd = {-1.0, 10.0};
    CHECK_THROWS_AS(evolve_queue(plan, 1.0), std::invalid_argument);
}

TEST_CASE("conservation on random feasible plans")
{
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> rate(0.0, 100.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        const int n = 20;
        RatePlan plan;
        plan.c_sr.resize(n);
        plan.c_rd.resize(n - 1);
        double q = 0.0;
        for (int slot = 1; slot <= n; ++slot)
        {
            const double c_sr = rate(rng);
            const double c_rd = slot == 1 ? 0.0 : std::min(rate(rng), q + c_sr);
            plan.c_sr[slot - 1] = c_sr;
            if (slot >= 2)
            {
                plan.c_rd[slot - 2] = c_rd;
            }
            q += c_sr - c_rd;
        }
        const QueueTrace t = evolve_queue(plan, 1.0);
        double sum_sr = 0.0;
        double sum_rd = 0.0;
        for (int slot = 1; slot <= n; ++slot)
        {
            sum_sr += plan.c_sr[slot - 1];
            sum_rd += plan.c_rd_at(slot);
        }
        CHECK(sum_sr - sum_rd == doctest::Approx(t.q_bits.back()).epsilon(1e-9));
        // causality: cumulative departures never exceed cumulative arrivals
        double ca = 0.0;
        double cd = 0.0;
        for (int slot = 1; slot <= n; ++slot)
        {
            ca += plan.c_sr[slot - 1];
            cd += plan.c_rd_at(slot);
            CHECK(cd <= ca + 1e-9);
        }
    }
}

TEST_CASE("greedy rates: no binding minimum")
{
    // Hover close to the source: the FSO rate dominates the RF rate, and
    // with an unbounded buffer the greedy plan is c_sr = R_FSO, c_rd = R_RF.
    const ScenarioParams p = tiny_scenario(8);
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    const Trajectory traj = hover({100.0, 0.0}, 8);
    const double r_fso = fso_rate(fso, traj.pos3(1, p.altitude_m), p.src_pos);
    const double r_rf = rf_rate(rf, traj.pos3(1, p.altitude_m), p.dst_pos);
    REQUIRE(r_fso > r_rf);
    const RatePlan plan = greedy_rates(traj, p, fso, rf, std::nullopt);
    for (int n = 1; n <= 8; ++n)
    {
        CHECK(plan.c_sr[n - 1] == doctest::Approx(r_fso).epsilon(1e-12));
        if (n >= 2)
        {
            CHECK(plan.c_rd_at(n) == doctest::Approx(r_rf).epsilon(1e-12));
        }
    }
}

TEST_CASE("greedy rates: zero buffer degenerates to a pass-through relay")
{
    const ScenarioParams p = tiny_scenario(8);
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    const Trajectory traj = hover({100.0, 0.0}, 8);
    const double r_fso = fso_rate(fso, traj.pos3(1, p.altitude_m), p.src_pos);
    const double r_rf = rf_rate(rf, traj.pos3(1, p.altitude_m), p.dst_pos);
    const RatePlan plan = greedy_rates(traj, p, fso, rf, 0.0);
    CHECK(plan.c_sr[0] == doctest::Approx(0.0)); // nothing can be forwarded in slot 1
    for (int n = 2; n <= 8; ++n)
    {
        CHECK(plan.c_sr[n - 1] == doctest::Approx(std::min(r_fso, r_rf)).epsilon(1e-12));
        CHECK(plan.c_rd_at(n) == doctest::Approx(plan.c_sr[n - 1]).epsilon(1e-12));
    }
    const QueueTrace t = evolve_queue(plan, p.slot_s);
    for (const double q : t.q_bits)
    {
        CHECK(q <= 1e-9);
    }
}

TEST_CASE("greedy rates equal the straightforward per-slot recursion oracle")
{
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> xpos(0.0, 2000.0);
    std::uniform_real_distribution<double> buf(1e6, 1e8);
    const ScenarioParams p = tiny_scenario(10);
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    for (int trial = 0; trial < 100; ++trial)
    {
        Trajectory traj = hover({0.0, 0.0}, 10);
        for (auto& pos : traj.pos)
        {
            pos.x() = xpos(rng);
        }
        const double cap = trial % 3 == 0 ? std::numeric_limits<double>::infinity() : buf(rng);
        const RatePlan plan = greedy_rates(
            traj, p, fso, rf,
            std::isfinite(cap) ? std::optional<double>(cap) : std::nullopt);

        // Independent re-implementation: per slot take the min-recursion.
        double q = 0.0;
        for (int n = 1; n <= 10; ++n)
        {
            const Eigen::Vector3d pos = traj.pos3(n, p.altitude_m);
            const double r_f = fso_rate(fso, pos, p.src_pos);
            const double r_r = rf_rate(rf, pos, p.dst_pos);
            double best_sr = r_f;
            double best_rd = n == 1 ? 0.0 : std::min(r_r, q + best_sr);
            if (q + (best_sr - best_rd) > cap)
            {
                best_sr = std::max(0.0, best_rd + (cap - q));
                best_rd = n == 1 ? 0.0 : std::min(r_r, q + best_sr);
            }
            q = std::max(q + (best_sr - best_rd), 0.0);
            CHECK(plan.c_sr[n - 1] == doctest::Approx(best_sr).epsilon(1e-12));
            CHECK(plan.c_rd_at(n) == doctest::Approx(best_rd).epsilon(1e-12));
            CHECK(q <= cap + 1e-6);
        }
    }
}

TEST_CASE("packet replay: immediate forwarding")
{
    RatePlan plan;
    plan.c_sr = {10.0, 10.0, 10.0, 0.0};
    plan.c_rd = {10.0, 10.0, 10.0};
    const PacketDelayStats s = packet_delay_replay(plan, 1.0, 10.0);
    CHECK(s.num_delivered == 3);
    CHECK(s.num_undelivered == 0);
    for (const int d : s.delays_slots)
    {
        CHECK(d == 1);
    }
    CHECK(s.mean_delay_slots == doctest::Approx(1.0));
    CHECK(s.max_delay_slots == 1);
}

TEST_CASE("packet replay: backlogged tail stays undelivered")
{
    RatePlan plan;
    plan.c_sr = {10.0, 10.0, 10.0};
    plan.c_rd = {10.0, 10.0};
    const PacketDelayStats s = packet_delay_replay(plan, 1.0, 10.0);
    // The third packet arrives in the last slot and never departs.
    CHECK(s.num_delivered == 2);
    CHECK(s.num_undelivered == 1);
    CHECK(s.delays_slots == std::vector<int>{1, 1});
}

TEST_CASE("packet replay: zero departures")
{
    RatePlan plan;
    plan.c_sr = {10.0, 10.0, 10.0};
    plan.c_rd = {0.0, 0.0};
    const PacketDelayStats s = packet_delay_replay(plan, 1.0, 10.0);
    CHECK(s.num_delivered == 0);
    CHECK(s.num_undelivered == 3);
    CHECK_THROWS_AS(packet_delay_replay(plan, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("Little's law matches the FIFO replay on stationary plans")
{
    for (const double rate : {5.0, 20.0, 80.0})
    {
        const int n = 200;
        RatePlan plan;
        plan.c_sr.assign(n, rate);
        plan.c_rd.assign(n - 1, rate);
        const QueueTrace t = evolve_queue(plan, 1.0);
        REQUIRE(t.avg_delay_slots.has_value());
        const PacketDelayStats s = packet_delay_replay(plan, 1.0, rate);
        CHECK(std::abs(*t.avg_delay_slots - s.mean_delay_slots) <= 1.0);
    }
}
