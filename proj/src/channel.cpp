#include "relayplan/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace relayplan
{

double kim_coefficient(double visibility_km)
{
    if (visibility_km <= 0.0)
    {
        throw std::invalid_argument("kim_coefficient: visibility must be positive");
    }
    if (visibility_km > 50.0)
    {
        return 1.6;
    }
    if (visibility_km > 6.0)
    {
        return 1.3;
    }
    if (visibility_km > 1.0)
    {
        return 0.16 * visibility_km + 0.34;
    }
    if (visibility_km > 0.5)
    {
        return visibility_km - 0.5;
    }
    return 0.0;
}

double fso_gain(double dist_m, double beta_per_m)
{
    if (dist_m < 0.0 || beta_per_m < 0.0)
    {
        throw std::invalid_argument("fso_gain: distance and beta must be nonnegative");
    }
    return std::exp(-beta_per_m * dist_m);
}

namespace
{

// Left-hand side of the APR equation alpha0 = 1/mu - exp(-mu)/(1-exp(-mu)).
double aprOfMu(double mu)
{
    // exp(-mu)/(1-exp(-mu)) = 1/expm1(mu), stable for tiny mu
    return 1.0 / mu - 1.0 / std::expm1(mu);
}

} // namespace

double solve_mu_star(double apr)
{
    if (!(apr > 0.0 && apr < 0.5))
    {
        throw std::invalid_argument("solve_mu_star: apr must be in (0, 1/2)");
    }
    // aprOfMu is strictly decreasing from 1/2 (mu -> 0) to 0 (mu -> inf).
    double lo = 1e-9;
    double hi = 1e4;
    if (aprOfMu(hi) > apr || aprOfMu(lo) < apr)
    {
        throw std::runtime_error("solve_mu_star: no bracketing root for apr");
    }
    for (int i = 0; i < 200; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        if (aprOfMu(mid) > apr)
        {
            lo = mid;
        }
        else
        {
            hi = mid;
        }
    }
    const double mu = 0.5 * (lo + hi);
    if (std::abs(apr - aprOfMu(mu)) > 1e-12)
    {
        throw std::runtime_error("solve_mu_star: residual above tolerance");
    }
    return mu;
}

double fso_k1(double asnr_linear, double apr)
{
    if (asnr_linear <= 0.0)
    {
        throw std::invalid_argument("fso_k1: asnr must be positive");
    }
    if (!(apr > 0.0 && apr < 1.0) || apr == 0.5)
    {
        throw std::invalid_argument("fso_k1: apr must be in (0,1) and != 1/2");
    }
    const double twoPiE = 2.0 * std::numbers::pi * std::numbers::e;
    if (apr > 0.5)
    {
        return asnr_linear / (twoPiE * apr * apr);
    }
    const double mu = solve_mu_star(apr);
    const double ratio = (1.0 - std::exp(-mu)) / mu;
    return std::exp(2.0 * apr * mu) / twoPiE * ratio * ratio * asnr_linear / (apr * apr);
}

double fso_rate(const FsoLinkModel& model,
                const Eigen::Vector3d& uav_pos,
                const Eigen::Vector3d& src_pos)
{
    const double d = (uav_pos - src_pos).norm();
    return 0.5 * model.bandwidth_hz * std::log2(1.0 + model.k1 * std::exp(-model.k2 * d));
}

double fso_rate_surrogate(const FsoLinkModel& model,
                          const Eigen::Vector3d& uav_pos,
                          const Eigen::Vector3d& src_pos)
{
    const double d = (uav_pos - src_pos).norm();
    return model.bandwidth_hz / (2.0 * std::numbers::ln2) * (std::log(model.k1) - model.k2 * d);
}

FsoTangent fso_rate_tangent(const FsoLinkModel& model, double ref_dist_m)
{
    const double c = 0.5 * model.bandwidth_hz / std::numbers::ln2;
    const double y = model.k1 * std::exp(-model.k2 * ref_dist_m);
    const double value = c * std::log1p(y);
    const double slope = -c * model.k2 * y / (1.0 + y); // d/dd of c*ln(1 + k1 e^{-k2 d})
    return FsoTangent{value - slope * ref_dist_m, slope};
}

double los_probability(const Eigen::Vector3d& uav_pos,
                       const Eigen::Vector3d& dst_pos,
                       double altitude_m,
                       double los_c,
                       double los_d)
{
    const double dist = (uav_pos - dst_pos).norm();
    if (dist < altitude_m || altitude_m <= 0.0)
    {
        throw std::invalid_argument("los_probability: link distance must be >= altitude > 0");
    }
    const double theta = 180.0 / std::numbers::pi * std::asin(altitude_m / dist);
    return 1.0 / (1.0 + los_c * std::exp(-los_d * (theta - los_c)));
}

double rf_rate(const RfLinkModel& model,
               const Eigen::Vector3d& uav_pos,
               const Eigen::Vector3d& dst_pos)
{
    const double u = (dst_pos - uav_pos).squaredNorm();
    return model.bandwidth_hz * std::log2(1.0 + model.gamma0 / std::pow(u, model.alpha));
}

RfTaylor rf_rate_taylor(const RfLinkModel& model, double sq_dist_m2)
{
    const double ua = std::pow(sq_dist_m2, model.alpha);
    const double aK = std::log2(1.0 + model.gamma0 / ua);
    const double bK = model.gamma0 * model.alpha /
                      (std::numbers::ln2 * (model.gamma0 + ua) * sq_dist_m2);
    return RfTaylor{aK, bK, sq_dist_m2};
}

double rf_rate_linearized(const RfLinkModel& model,
                          const Eigen::Vector3d& uav_pos,
                          const Eigen::Vector3d& expansion_pos,
                          const Eigen::Vector3d& dst_pos)
{
    const double u = (dst_pos - uav_pos).squaredNorm();
    const RfTaylor t = rf_rate_taylor(model, (dst_pos - expansion_pos).squaredNorm());
    return model.bandwidth_hz * (t.a_k - t.b_k * (u - t.u_k));
}

} // namespace relayplan
