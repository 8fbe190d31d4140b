#ifndef RELAYPLAN_CHANNEL_HPP
#define RELAYPLAN_CHANNEL_HPP

#include <Eigen/Dense>

namespace relayplan
{

/// Free-space optical link model (Beer-Lambert attenuation, intensity-channel
/// capacity lower bound). All rates are in bits/second via log2.
struct FsoLinkModel
{
    double beta_per_m;   //!< attenuation coefficient [1/m]
    double k1;           //!< ASNR-related capacity parameter
    double k2;           //!< distance attenuation parameter, equals 2*beta
    double bandwidth_hz; //!< FSO bandwidth [Hz]
    double asnr_linear;  //!< average electrical SNR (linear)
    double apr;          //!< average-to-peak optical power ratio in (0,1)
    double mu_star;      //!< free parameter of the APR equation (NaN if apr > 1/2)
};

/// Air-to-ground RF link model with probabilistic LoS folded into a
/// homogeneous reference SNR.
struct RfLinkModel
{
    double gamma0;       //!< reference SNR scaled by distance^(2*alpha) [m^(2 alpha)]
    double alpha;        //!< half path-loss exponent (alpha = alpha_tilde / 2)
    double bandwidth_hz; //!< RF bandwidth [Hz]
    double los_c;        //!< LoS probability model parameter C
    double los_d;        //!< LoS probability model parameter D
    double nlos_atten;   //!< extra NLoS attenuation factor kappa
    double los_prob_bar; //!< homogeneous LoS probability (evaluated at 90 deg)
};

/// Kim-model size distribution coefficient p for a given visibility [km].
/// Boundaries are half-open: a boundary visibility takes the lower piece.
double kim_coefficient(double visibility_km);

/// Beer-Lambert channel gain exp(-beta * d), in (0, 1].
double fso_gain(double dist_m, double beta_per_m);

/// Solves apr = 1/mu - exp(-mu)/(1 - exp(-mu)) for mu on (1e-9, 1e4) by
/// bisection. Valid for apr in (0, 1/2). Residual is driven below 1e-12.
double solve_mu_star(double apr);

/// Capacity parameter k1. Uses the mu* branch for 0 < apr < 1/2 and the
/// closed form asnr / (2 pi e apr^2) for 1/2 < apr < 1.
double fso_k1(double asnr_linear, double apr);

/// Achievable FSO rate (B/2) log2(1 + k1 exp(-k2 d)) in bps.
double fso_rate(const FsoLinkModel& model,
                const Eigen::Vector3d& uav_pos,
                const Eigen::Vector3d& src_pos);

/// High-SNR surrogate (B / (2 ln 2)) (ln k1 - k2 d). Lower bound on
/// fso_rate; may be negative far from the source.
double fso_rate_surrogate(const FsoLinkModel& model,
                          const Eigen::Vector3d& uav_pos,
                          const Eigen::Vector3d& src_pos);

/// Tangent-line lower bound of the true FSO rate expanded at ref_dist_m:
/// rate(ref) + rate'(ref) (d - ref). The true rate is convex in distance, so
/// the tangent is a global lower bound and is exact at the expansion point.
/// Returns the bound in bps; coefficients are exposed for planner use.
struct FsoTangent
{
    double value_bps;       //!< bound at d = 0
    double slope_bps_per_m; //!< nonpositive slope
    double eval(double dist_m) const { return value_bps + slope_bps_per_m * dist_m; }
};
FsoTangent fso_rate_tangent(const FsoLinkModel& model, double ref_dist_m);

/// Logistic elevation-angle LoS probability (elevation in degrees).
double los_probability(const Eigen::Vector3d& uav_pos,
                       const Eigen::Vector3d& dst_pos,
                       double altitude_m,
                       double los_c,
                       double los_d);

/// Achievable RF rate B log2(1 + gamma0 / (d^2)^alpha) in bps.
double rf_rate(const RfLinkModel& model,
               const Eigen::Vector3d& uav_pos,
               const Eigen::Vector3d& dst_pos);

/// First-order lower bound of rf_rate in the squared distance, expanded at
/// expansion_pos: B (A_k - B_k (u - u_k)). Exact when uav_pos == expansion_pos.
double rf_rate_linearized(const RfLinkModel& model,
                          const Eigen::Vector3d& uav_pos,
                          const Eigen::Vector3d& expansion_pos,
                          const Eigen::Vector3d& dst_pos);

/// Taylor coefficients of the RF lower bound at squared distance u_k [m^2]:
/// rate(u) >= B (a_k - b_k (u - u_k)) with a_k in bits and b_k in 1/m^2.
struct RfTaylor
{
    double a_k;
    double b_k;
    double u_k;
};
RfTaylor rf_rate_taylor(const RfLinkModel& model, double sq_dist_m2);

} // namespace relayplan

#endif
