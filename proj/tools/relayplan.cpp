#include <algorithm>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relayplan/baselines.hpp"
#include "relayplan/io.hpp"
#include "relayplan/planner.hpp"

namespace
{

using namespace relayplan;

constexpr double kPacketBits = 1e6;

PlanMode parse_mode(const std::string& mode)
{
    if (mode == "delay-tolerant" || mode == "delay_tolerant")
    {
        return PlanMode::delay_tolerant;
    }
    if (mode == "delay-limited" || mode == "delay_limited")
    {
        return PlanMode::delay_limited;
    }
    throw CLI::ValidationError("--mode", "expected delay-tolerant or delay-limited");
}

std::string out_path(const std::string& dir, const std::string& name)
{
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

void apply_overrides(ScenarioParams& p, std::optional<double> delay_req,
                     std::optional<int> max_iters, std::optional<double> tol)
{
    if (delay_req)
    {
        p.delay_req_slots = *delay_req;
    }
    if (max_iters)
    {
        p.sca_max_iters = *max_iters;
    }
    if (tol)
    {
        p.sca_tol = *tol;
    }
    p.validate();
}

void write_plan_products(const std::string& dir, const ScenarioParams& p, const PlanResult& res)
{
    write_trajectory(out_path(dir, "trajectory.txt"), res.trajectory);
    write_queue_trace(out_path(dir, "queue.txt"), res.plan, res.trace);
    write_iteration_log(out_path(dir, "iterations.txt"), res.objective_log);
    const PacketDelayStats pkt = packet_delay_replay(res.plan, p.slot_s, kPacketBits);
    std::vector<std::pair<std::string, std::string>> metrics = {
        {"mode", to_string(res.mode)},
        {"objective_bps", format_number(res.objective_bps)},
        {"iterations", std::to_string(res.iterations)},
        {"surrogate_gap_bps", format_number(res.surrogate_gap)},
        {"arrival_rate_bps", format_number(res.trace.arrival_rate_bps)},
        {"mean_delay_slots",
         res.trace.avg_delay_slots ? format_number(*res.trace.avg_delay_slots) : "undefined"},
        {"mean_packet_delay_slots", format_number(pkt.mean_delay_slots)},
        {"packets_undelivered", std::to_string(pkt.num_undelivered)},
    };
    if (p.buffer_bits)
    {
        metrics.emplace_back("buffer_bits", format_number(*p.buffer_bits));
    }
    if (p.delay_req_slots)
    {
        metrics.emplace_back("delay_req_slots", format_number(*p.delay_req_slots));
    }
    write_metrics(out_path(dir, "metrics.txt"), metrics);
}

int cmd_optimize(const std::string& config, const std::string& mode_str, const std::string& dir,
                 std::optional<double> delay_req, std::optional<int> max_iters,
                 std::optional<double> tol)
{
    ScenarioParams p;
    PlanMode mode;
    try
    {
        p = load_scenario(config);
        mode = parse_mode(mode_str);
        apply_overrides(p, delay_req, max_iters, tol);
        if (mode == PlanMode::delay_limited && !p.delay_req_slots)
        {
            throw std::invalid_argument("delay-limited mode needs delay_req_slots (--delay-req)");
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try
    {
        const PlanResult res = optimize(p, p.fso_model(), p.rf_model(), mode);
        write_plan_products(dir, p, res);
    }
    catch (const std::exception& e)
    {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& key,
              const std::vector<double>& values, const std::string& mode_str,
              const std::string& dir, std::optional<double> delay_req,
              std::optional<int> max_iters, std::optional<double> tol)
{
    ScenarioParams base;
    PlanMode mode;
    try
    {
        base = load_scenario(config);
        mode = parse_mode(mode_str);
        apply_overrides(base, delay_req, max_iters, tol);
        if (values.empty())
        {
            throw std::invalid_argument("empty sweep values list");
        }
        const std::vector<std::string> keys = {"buffer_bits", "delay_req_slots", "ref_snr_db",
                                               "visibility_km"};
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
        {
            throw std::invalid_argument("unsupported sweep key '" + key + "'");
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    std::vector<SweepRow> rows;
    std::optional<Trajectory> warm;
    for (const double v : values)
    {
        SweepRow row;
        row.value = v;
        ScenarioParams p = base;
        try
        {
            if (key == "buffer_bits")
            {
                p.buffer_bits = v;
            }
            else if (key == "delay_req_slots")
            {
                p.delay_req_slots = v;
            }
            else if (key == "ref_snr_db")
            {
                p.ref_snr_db = v;
            }
            else
            {
                p.visibility_km = v;
            }
            p.validate();
            const PlanMode pt_mode =
                (key == "delay_req_slots") ? PlanMode::delay_limited : mode;
            if (pt_mode == PlanMode::delay_limited && !p.delay_req_slots)
            {
                throw std::invalid_argument("delay-limited sweep needs delay_req_slots");
            }
            const FsoLinkModel fso = p.fso_model();
            const RfLinkModel rf = p.rf_model();
            const PlanResult res = warm ? optimize(p, fso, rf, pt_mode, *warm)
                                        : optimize(p, fso, rf, pt_mode);
            warm = res.trajectory;
            row.objective_bps = res.objective_bps;
            row.iterations = res.iterations;
            row.mean_delay_slots = res.trace.avg_delay_slots.value_or(0.0);
            row.mean_packet_delay =
                packet_delay_replay(res.plan, p.slot_s, kPacketBits).mean_delay_slots;
        }
        catch (const std::exception& e)
        {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    write_sweep(out_path(dir, "sweep.txt"), rows);
    return 0;
}

int cmd_pmf(const std::string& traj_file, double bin_width, double origin, const std::string& dir)
{
    try
    {
        const Trajectory traj = read_trajectory(traj_file);
        write_pmf(out_path(dir, "pmf.txt"), position_pmf(traj, bin_width, origin));
    }
    catch (const std::exception& e)
    {
        std::cerr << "pmf error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_baseline(const std::string& config, const std::string& scheme, double d1, double d2,
                 const std::string& dir)
{
    ScenarioParams p;
    try
    {
        p = load_scenario(config);
        if (scheme != "static" && scheme != "ferry")
        {
            throw std::invalid_argument("unknown scheme '" + scheme + "'");
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try
    {
        const FsoLinkModel fso = p.fso_model();
        const RfLinkModel rf = p.rf_model();
        if (scheme == "static")
        {
            const StaticRelayResult res = static_relay(p, fso, rf);
            write_trajectory(out_path(dir, "trajectory.txt"), res.result.trajectory);
            write_queue_trace(out_path(dir, "queue.txt"), res.result.plan, res.result.trace);
            write_metrics(out_path(dir, "metrics.txt"),
                          {{"scheme", "static"},
                           {"x_s_m", format_number(res.x_s_m)},
                           {"objective_bps", format_number(res.result.objective_bps)}});
        }
        else
        {
            const FerryResult res = data_ferry(p, fso, rf, d1, d2);
            write_trajectory(out_path(dir, "trajectory.txt"), res.result.trajectory);
            write_queue_trace(out_path(dir, "queue.txt"), res.result.plan, res.result.trace);
            write_metrics(out_path(dir, "metrics.txt"),
                          {{"scheme", "ferry"},
                           {"objective_bps", format_number(res.result.objective_bps)},
                           {"cycle", res.description()}});
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "baseline error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"UAV relay trajectory planning for a buffered mixed FSO/RF link"};
    app.require_subcommand(1);

    std::string config;
    std::string mode = "delay-tolerant";
    std::string out_dir = ".";
    std::string sweep_key;
    std::vector<double> values;
    std::string scheme;
    std::string traj_file;
    double bin_width = 300.0;
    double origin = 0.0;
    double d1 = 300.0;
    double d2 = 300.0;
    std::optional<double> delay_req;
    std::optional<int> max_iters;
    std::optional<double> tol;
    int seed = 0; // reserved

    auto* opt = app.add_subcommand("optimize", "Run the SCA trajectory optimizer");
    opt->add_option("--config", config)->required();
    opt->add_option("--mode", mode);
    opt->add_option("--out", out_dir);
    opt->add_option("--delay-req", delay_req);
    opt->add_option("--max-iters", max_iters);
    opt->add_option("--tol", tol);
    opt->add_option("--seed", seed);

    auto* swp = app.add_subcommand("sweep", "Re-run the optimizer over a parameter range");
    swp->add_option("--config", config)->required();
    swp->add_option("--sweep-key", sweep_key)->required();
    swp->add_option("--values", values)->required()->delimiter(',');
    swp->add_option("--mode", mode);
    swp->add_option("--out", out_dir);
    swp->add_option("--delay-req", delay_req);
    swp->add_option("--max-iters", max_iters);
    swp->add_option("--tol", tol);
    swp->add_option("--seed", seed);

    auto* pmf = app.add_subcommand("pmf", "Bin a trajectory's x occupancy");
    pmf->add_option("trajectory", traj_file)->required();
    pmf->add_option("--bin-width", bin_width);
    pmf->add_option("--origin", origin);
    pmf->add_option("--out", out_dir);

    auto* bl = app.add_subcommand("baseline", "Run a reference scheme");
    bl->add_option("--config", config)->required();
    bl->add_option("--scheme", scheme)->required();
    bl->add_option("--d1", d1);
    bl->add_option("--d2", d2);
    bl->add_option("--out", out_dir);
    bl->add_option("--seed", seed);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (opt->parsed())
    {
        return cmd_optimize(config, mode, out_dir, delay_req, max_iters, tol);
    }
    if (swp->parsed())
    {
        return cmd_sweep(config, sweep_key, values, mode, out_dir, delay_req, max_iters, tol);
    }
    if (pmf->parsed())
    {
        return cmd_pmf(traj_file, bin_width, origin, out_dir);
    }
    return cmd_baseline(config, scheme, d1, d2, out_dir);
}
