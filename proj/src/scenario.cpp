#include "relayplan/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace relayplan
{

namespace
{

bool parseBool(const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes")
    {
        return true;
    }
    if (v == "false" || v == "0" || v == "no")
    {
        return false;
    }
    throw std::invalid_argument("expected boolean, got '" + v + "'");
}

double parseDouble(const std::string& v)
{
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size())
    {
        throw std::invalid_argument("trailing characters in number '" + v + "'");
    }
    return d;
}

// Accepts "inf", "infinite" or "unbounded" for optional limits.
std::optional<double> parseLimit(const std::string& v)
{
    if (v == "inf" || v == "infinite" || v == "unbounded")
    {
        return std::nullopt;
    }
    return parseDouble(v);
}

Eigen::Vector3d parseVec3(const std::string& v)
{
    std::stringstream ss(v);
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ','))
    {
        if (i >= 3)
        {
            throw std::invalid_argument("expected at most 3 components in '" + v + "'");
        }
        out[i++] = parseDouble(item);
    }
    if (i < 2)
    {
        throw std::invalid_argument("expected at least 2 components in '" + v + "'");
    }
    return out;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
    {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

ScenarioParams parse_scenario(const std::string& text)
{
    ScenarioParams p;
    bool horizonSet = false;
    Eigen::Vector3d qInit = Eigen::Vector3d::Zero();
    Eigen::Vector3d qFinal = Eigen::Vector3d::Zero();
    Eigen::Vector3d vInit = Eigen::Vector3d::Zero();
    Eigen::Vector3d vFinal = Eigen::Vector3d::Zero();
    bool anyEndpoint = false;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
        {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty())
        {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
        {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try
        {
            if (key == "src_pos") { p.src_pos = parseVec3(val); }
            else if (key == "dst_pos") { p.dst_pos = parseVec3(val); }
            else if (key == "altitude") { p.altitude_m = parseDouble(val); }
            else if (key == "horizon_s") { p.horizon_s = parseDouble(val); horizonSet = true; }
            else if (key == "num_slots") { p.num_slots = static_cast<int>(parseDouble(val)); }
            else if (key == "slot_s") { p.slot_s = parseDouble(val); }
            else if (key == "v_max") { p.v_max = parseDouble(val); }
            else if (key == "a_max") { p.a_max = parseDouble(val); }
            else if (key == "visibility_km") { p.visibility_km = parseDouble(val); }
            else if (key == "wavelength_nm") { p.wavelength_nm = parseDouble(val); }
            else if (key == "fso_bandwidth_hz") { p.fso_bandwidth_hz = parseDouble(val); }
            else if (key == "fso_asnr_db") { p.fso_asnr_db = parseDouble(val); }
            else if (key == "fso_asnr_is_amplitude") { p.fso_asnr_is_amplitude = parseBool(val); }
            else if (key == "apr") { p.apr = parseDouble(val); }
            else if (key == "rf_bandwidth_hz") { p.rf_bandwidth_hz = parseDouble(val); }
            else if (key == "ref_snr_db") { p.ref_snr_db = parseDouble(val); }
            else if (key == "gamma0_override") { p.gamma0_override = parseDouble(val); }
            else if (key == "pathloss_exp_half") { p.pathloss_exp_half = parseDouble(val); }
            else if (key == "los_c") { p.los_c = parseDouble(val); }
            else if (key == "los_d") { p.los_d = parseDouble(val); }
            else if (key == "nlos_atten") { p.nlos_atten = parseDouble(val); }
            else if (key == "buffer_bits") { p.buffer_bits = parseLimit(val); }
            else if (key == "delay_req_slots") { p.delay_req_slots = parseLimit(val); }
            else if (key == "sca_tol") { p.sca_tol = parseDouble(val); }
            else if (key == "sca_max_iters") { p.sca_max_iters = static_cast<int>(parseDouble(val)); }
            else if (key == "q_init") { qInit = parseVec3(val); anyEndpoint = true; }
            else if (key == "q_final") { qFinal = parseVec3(val); anyEndpoint = true; }
            else if (key == "v_init") { vInit = parseVec3(val); anyEndpoint = true; }
            else if (key == "v_final") { vFinal = parseVec3(val); anyEndpoint = true; }
            else
            {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        }
        catch (const std::invalid_argument& e)
        {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!horizonSet)
    {
        p.horizon_s = p.num_slots * p.slot_s;
    }
    if (anyEndpoint)
    {
        p.endpoints = EndpointConstraints{qInit.head<2>(), qFinal.head<2>(), vInit.head<2>(), vFinal.head<2>()};
    }
    p.validate();
    return p;
}

ScenarioParams load_scenario(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
    {
        throw std::runtime_error("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str());
}

void ScenarioParams::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("scenario: " + what); };
    if (num_slots < 2) fail("num_slots must be >= 2");
    if (slot_s <= 0.0) fail("slot_s must be positive");
    if (std::abs(horizon_s - num_slots * slot_s) > 1e-9 * std::max(1.0, horizon_s))
    {
        fail("horizon_s must equal num_slots * slot_s");
    }
    if (v_max <= 0.0) fail("v_max must be positive");
    if (a_max <= 0.0) fail("a_max must be positive");
    if (altitude_m <= 0.0) fail("altitude must be positive");
    if (fso_bandwidth_hz <= 0.0 || rf_bandwidth_hz <= 0.0) fail("bandwidths must be positive");
    if (!(apr > 0.0 && apr < 1.0) || apr == 0.5) fail("apr must be in (0,1) and != 1/2");
    if (!(nlos_atten > 0.0 && nlos_atten <= 1.0)) fail("nlos_atten must be in (0, 1]");
    if (visibility_km <= 0.0) fail("visibility_km must be positive");
    if (wavelength_nm <= 0.0) fail("wavelength_nm must be positive");
    if (pathloss_exp_half < 1.0) fail("pathloss_exp_half must be >= 1");
    if (buffer_bits && *buffer_bits < 0.0) fail("buffer_bits must be >= 0");
    if (delay_req_slots && *delay_req_slots < 0.0) fail("delay_req_slots must be >= 0");
    if (sca_max_iters < 1) fail("sca_max_iters must be >= 1");
    if (gamma0_override && *gamma0_override <= 0.0) fail("gamma0_override must be positive");
}

FsoLinkModel ScenarioParams::fso_model() const
{
    FsoLinkModel m{};
    const double pcoef = kim_coefficient(visibility_km);
    const double betaDbPerKm = 3.91 / visibility_km * std::pow(wavelength_nm / 550.0, -pcoef);
    m.beta_per_m = betaDbPerKm * std::numbers::ln10 / 1e4;
    m.k2 = 2.0 * m.beta_per_m;
    // fso_asnr_db is the ASNR gamma^2 in dB; with fso_asnr_is_amplitude it is
    // read as the amplitude gamma in dB, so the ASNR doubles in dB terms.
    m.asnr_linear = fso_asnr_is_amplitude ? std::pow(10.0, fso_asnr_db / 5.0)
                                          : std::pow(10.0, fso_asnr_db / 10.0);
    m.apr = apr;
    m.mu_star = apr < 0.5 ? solve_mu_star(apr) : std::nan("");
    m.k1 = fso_k1(m.asnr_linear, apr);
    m.bandwidth_hz = fso_bandwidth_hz;
    return m;
}

RfLinkModel ScenarioParams::rf_model() const
{
    RfLinkModel m{};
    m.alpha = pathloss_exp_half;
    m.bandwidth_hz = rf_bandwidth_hz;
    m.los_c = los_c;
    m.los_d = los_d;
    m.nlos_atten = nlos_atten;
    // Homogeneous LoS probability at the 90 degree elevation angle, NLoS
    // attenuation mixed in.
    const double pLos = 1.0 / (1.0 + los_c * std::exp(-los_d * (90.0 - los_c)));
    m.los_prob_bar = pLos + (1.0 - pLos) * nlos_atten;
    if (gamma0_override)
    {
        m.gamma0 = *gamma0_override;
    }
    else
    {
        // ref_snr_db is the received SNR directly overhead the user, where
        // the squared distance is H^2; the homogeneous LoS probability is
        // already folded into that reference measurement.
        m.gamma0 = std::pow(10.0, ref_snr_db / 10.0) *
                   std::pow(altitude_m * altitude_m, pathloss_exp_half);
    }
    return m;
}

DerivedConstants derived_constants(const ScenarioParams& p)
{
    const FsoLinkModel fso = p.fso_model();
    const RfLinkModel rf = p.rf_model();
    return DerivedConstants{fso.beta_per_m, fso.k1, fso.k2, rf.gamma0, rf.los_prob_bar, fso.mu_star};
}

void Trajectory::check_kinematics(double slot_s, double v_max, double a_max, double tol_m) const
{
    if (pos.size() != vel.size() || pos.size() < 3 || acc.size() + 1 != pos.size())
    {
        throw std::invalid_argument("trajectory: inconsistent array sizes");
    }
    const int n_slots = num_slots();
    for (int n = 0; n <= n_slots; ++n)
    {
        const auto i = static_cast<size_t>(n);
        const Eigen::Vector2d vNext = vel[i] + acc[i] * slot_s;
        const Eigen::Vector2d qNext = pos[i] + vel[i] * slot_s + 0.5 * acc[i] * slot_s * slot_s;
        if ((vel[i + 1] - vNext).norm() > tol_m || (pos[i + 1] - qNext).norm() > tol_m)
        {
            throw std::invalid_argument("trajectory: kinematic recursion violated at slot " +
                                        std::to_string(n));
        }
        if (acc[i].norm() > a_max + tol_m)
        {
            throw std::invalid_argument("trajectory: acceleration cap violated at slot " +
                                        std::to_string(n));
        }
    }
    for (int n = 1; n <= n_slots; ++n)
    {
        if (vel[static_cast<size_t>(n)].norm() > v_max + tol_m)
        {
            throw std::invalid_argument("trajectory: velocity cap violated at slot " +
                                        std::to_string(n));
        }
    }
}

} // namespace relayplan
