#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relayplan/baselines.hpp"

using namespace relayplan;

TEST_CASE("static relay sits at the min-rate crossing")
{
    const ScenarioParams p; // defaults
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    const StaticRelayResult r = static_relay(p, fso, rf);

    // Independent 1 m grid re-computation of argmax min(R_FSO, R_RF).
    double best_x = 0.0;
    double best = -1.0;
    for (int x = 0; x <= 2000; ++x)
    {
        const Eigen::Vector3d pos(static_cast<double>(x), 0.0, p.altitude_m);
        const double m = std::min(fso_rate(fso, pos, p.src_pos), rf_rate(rf, pos, p.dst_pos));
        if (m > best)
        {
            best = m;
            best_x = x;
        }
    }
    CHECK(r.x_s_m == doctest::Approx(best_x).epsilon(1e-12));
    // Hovering forever at the crossing: throughput is the min rate, up to the
    // end-of-horizon queue flush (at most a factor N/(N-1)).
    CHECK(r.result.objective_bps >= best * (1.0 - 1e-9));
    CHECK(r.result.objective_bps <= best * p.num_slots / (p.num_slots - 1.0) * (1.0 + 1e-9));

    // The min-rate curve is unimodal (FSO decreasing, RF increasing in x), so
    // neighbours of the grid optimum cannot beat it.
    for (const double dx : {-1.0, 1.0})
    {
        const Eigen::Vector3d pos(best_x + dx, 0.0, p.altitude_m);
        CHECK(std::min(fso_rate(fso, pos, p.src_pos), rf_rate(rf, pos, p.dst_pos)) <= best);
    }
}

TEST_CASE("halving the FSO bandwidth pulls the hover toward the source")
{
    ScenarioParams p;
    const StaticRelayResult base = static_relay(p, p.fso_model(), p.rf_model());
    p.fso_bandwidth_hz /= 2.0;
    const StaticRelayResult narrow = static_relay(p, p.fso_model(), p.rf_model());
    CHECK(narrow.x_s_m < base.x_s_m);
}

TEST_CASE("data ferry on the default scenario")
{
    const ScenarioParams p;
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    const FerryResult r = data_ferry(p, fso, rf, 300.0, 300.0);

    CHECK(r.result.objective_bps > 0.0);
    CHECK(r.num_cycles >= 1);
    // Dwell points sit where the 3-D range equals the requested radii.
    const double expect_load = std::sqrt(300.0 * 300.0 - p.altitude_m * p.altitude_m);
    CHECK(r.x_load_m == doctest::Approx(expect_load).epsilon(1e-9));
    CHECK(r.x_unload_m == doctest::Approx(2000.0 - expect_load).epsilon(1e-9));
    // Leg length 2000 - 2*283 = 1434 m at v_max 50, a_max 5: between the
    // all-out bound (29 slots) and a generous margin.
    CHECK(r.travel_slots >= 29);
    CHECK(r.travel_slots <= 40);
    CHECK(r.description().find("cycle") != std::string::npos);

    // The whole plan must still verify against the physical constraints.
    CHECK(verify_plan(p, fso, rf, r.result) == "");
}

TEST_CASE("ferry with an unthrottled RF side delivers most of the load")
{
    ScenarioParams p;
    p.gamma0_override = 1e30; // effectively infinite unload rate
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    const FerryResult r = data_ferry(p, fso, rf, 300.0, 300.0);
    double loaded = 0.0;
    double delivered = 0.0;
    for (int n = 1; n <= p.num_slots; ++n)
    {
        loaded += r.result.plan.c_sr[static_cast<size_t>(n - 1)] * p.slot_s;
        delivered += r.result.plan.c_rd_at(n) * p.slot_s;
    }
    REQUIRE(loaded > 0.0);
    CHECK(delivered >= 0.8 * loaded);
}

TEST_CASE("ferry rejects impossible geometries")
{
    const ScenarioParams p;
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    // Ranges overlap: no silent cruise segment exists.
    CHECK_THROWS_AS(data_ferry(p, fso, rf, 1200.0, 1200.0), std::invalid_argument);
    // Range below the flight altitude: the source is never reachable.
    CHECK_THROWS_AS(data_ferry(p, fso, rf, 90.0, 300.0), std::invalid_argument);
    CHECK_THROWS_AS(data_ferry(p, fso, rf, 300.0, 90.0), std::invalid_argument);

    // Horizon too short for even one cycle.
    ScenarioParams tiny = p;
    tiny.num_slots = 5;
    tiny.horizon_s = 5.0;
    CHECK_THROWS_AS(data_ferry(tiny, tiny.fso_model(), tiny.rf_model(), 300.0, 300.0),
                    std::invalid_argument);
}
