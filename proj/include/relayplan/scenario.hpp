#ifndef RELAYPLAN_SCENARIO_HPP
#define RELAYPLAN_SCENARIO_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relayplan/channel.hpp"

namespace relayplan
{

/// Optional initial/final position and velocity constraints.
struct EndpointConstraints
{
    Eigen::Vector2d q_init;
    Eigen::Vector2d q_final;
    Eigen::Vector2d v_init;
    Eigen::Vector2d v_final;
};

/// All physical and system constants for one scenario. Immutable after
/// construction; defaults reproduce the reference parameter set
/// (H=100 m, L=2000 m, V_max=50, A_max=5, T=200 s, light fog V=0.8 km).
struct ScenarioParams
{
    Eigen::Vector3d src_pos{0.0, 0.0, 0.0};
    Eigen::Vector3d dst_pos{2000.0, 0.0, 0.0};
    double altitude_m = 100.0;

    double horizon_s = 200.0;
    int num_slots = 200;
    double slot_s = 1.0;

    double v_max = 50.0;
    double a_max = 5.0;

    double visibility_km = 0.8;
    double wavelength_nm = 1550.0;
    double fso_bandwidth_hz = 1e8;
    double fso_asnr_db = 5.0;
    bool fso_asnr_is_amplitude = false;
    double apr = 0.1;

    double rf_bandwidth_hz = 1e8;
    double ref_snr_db = 6.0;
    std::optional<double> gamma0_override;
    double pathloss_exp_half = 2.2;
    double los_c = 10.0;
    double los_d = 0.6;
    double nlos_atten = 0.2;

    std::optional<double> buffer_bits;      //!< nullopt = unbounded buffer
    std::optional<double> delay_req_slots;  //!< nullopt = no delay requirement
    std::optional<EndpointConstraints> endpoints;

    double sca_tol = 1e-3;
    int sca_max_iters = 30;

    /// Throws std::invalid_argument naming the violated invariant.
    void validate() const;

    FsoLinkModel fso_model() const;
    RfLinkModel rf_model() const;
};

/// Time-indexed UAV state on the fixed-altitude plane. Slots 0..N+1 for
/// position/velocity and 0..N for acceleration.
struct Trajectory
{
    std::vector<Eigen::Vector2d> pos;
    std::vector<Eigen::Vector2d> vel;
    std::vector<Eigen::Vector2d> acc;

    int num_slots() const { return static_cast<int>(pos.size()) - 2; }

    /// 3-D position of slot n at the flight altitude.
    Eigen::Vector3d pos3(int n, double altitude_m) const
    {
        return {pos[static_cast<size_t>(n)].x(), pos[static_cast<size_t>(n)].y(), altitude_m};
    }

    /// Checks array sizes, the discrete kinematics recursion and the
    /// velocity/acceleration caps. Throws on violation.
    void check_kinematics(double slot_s, double v_max, double a_max, double tol_m = 1e-6) const;
};

/// Deterministic constants derived from a scenario.
struct DerivedConstants
{
    double beta_per_m;
    double k1;
    double k2;
    double gamma0;
    double los_prob_bar;
    double mu_star; //!< NaN when apr > 1/2
};

/// Loads a flat key=value config file ('#' comments). Unset keys keep the
/// documented defaults. Throws with a line number on parse errors and with
/// the violated invariant on validation errors.
ScenarioParams load_scenario(const std::string& path);

/// Parses config text (same format as load_scenario, without the file).
ScenarioParams parse_scenario(const std::string& text);

DerivedConstants derived_constants(const ScenarioParams& p);

} // namespace relayplan

#endif
