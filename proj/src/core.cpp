// SPDX-License-Identifier: Apache-2.0
//
// thzsense: terahertz monostatic sensing channel toolkit
// Copyright (C) 2026 The thzsense authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "thzsense/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thz
{

double wrap_2pi(double rad)
{
    double w = std::fmod(rad, kTwoPi);
    if (w < 0.0)
        w += kTwoPi;
    if (w >= kTwoPi)
        w = 0.0;
    return w;
}

double wrap_pi(double rad)
{
    double w = wrap_2pi(rad + kPi) - kPi;
    return w;
}

void AntennaModel::validate() const
{
    if (!(hpbw_deg > 0.0))
        throw std::invalid_argument("antenna: hpbw_deg must be > 0");
    if (!(sidelobe_floor_dbr < 0.0))
        throw std::invalid_argument("antenna: sidelobe_floor_dbr must be < 0");
    if (!std::isfinite(peak_gain_dbi))
        throw std::invalid_argument("antenna: peak gain must be finite");
}

void SounderConfig::validate() const
{
    if (!(f_start > 0.0) || !(f_stop > f_start))
        throw std::invalid_argument("config: require 0 < f_start < f_stop");
    if (n_freq < 2)
        throw std::invalid_argument("config: n_freq must be >= 2");
    if (n_angles < 1 || !(angle_step_deg > 0.0))
        throw std::invalid_argument("config: require n_angles >= 1 and angle_step_deg > 0");
    if (static_cast<double>(n_angles) * angle_step_deg > 360.0 + 1e-9)
        throw std::invalid_argument("config: n_angles * angle_step_deg exceeds 360");
    if (!(arm_radius_m >= 0.0))
        throw std::invalid_argument("config: arm_radius_m must be >= 0");
    antenna.validate();
}

bool SounderConfig::full_circle() const
{
    return std::abs(static_cast<double>(n_angles) * angle_step_deg - 360.0) < 1e-9;
}

double Mpc::power_db() const
{
    return 20.0 * std::log10(std::abs(amplitude));
}

const char *to_string(MpcTag tag)
{
    return tag == MpcTag::specular ? "specular" : "diffuse";
}

MpcTag parse_tag(const std::string &s)
{
    if (s == "specular")
        return MpcTag::specular;
    if (s == "diffuse")
        return MpcTag::diffuse;
    throw DataError("unknown MPC tag '" + s + "'");
}

// ---- distributions ------------------------------------------------------

void NormalParams::validate() const
{
    if (!(sigma > 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("normal: sigma must be > 0");
}

double NormalParams::logpdf(double x) const
{
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(kTwoPi);
}

double NormalParams::cdf(double x) const
{
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

void WeibullParams::validate() const
{
    if (!(shape > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("weibull: shape and scale must be > 0");
}

double WeibullParams::logpdf(double x) const
{
    if (!(x > 0.0))
        return -std::numeric_limits<double>::infinity();
    const double u = x / scale;
    return std::log(shape / scale) + (shape - 1.0) * std::log(u) - std::pow(u, shape);
}

double WeibullParams::quantile(double p) const
{
    return scale * std::pow(-std::log1p(-p), 1.0 / shape);
}

double WeibullParams::log_cdf(double x) const
{
    if (!(x > 0.0))
        return -std::numeric_limits<double>::infinity();
    return std::log(-std::expm1(-std::pow(x / scale, shape)));
}

double WeibullParams::mean() const
{
    return scale * std::tgamma(1.0 + 1.0 / shape);
}

WeibullParams WeibullParams::from_quantile_range(double lo, double hi)
{
    if (!(lo > 0.0) || !(hi > lo))
        throw std::invalid_argument("weibull: quantile range requires 0 < lo < hi");
    // q(p) = scale * (-ln(1-p))^(1/k), so hi/lo = (ln(0.025)/ln(0.975))^(1/k).
    const double a = -std::log1p(-0.025);
    const double b = -std::log1p(-0.975);
    WeibullParams w;
    w.shape = std::log(b / a) / std::log(hi / lo);
    w.scale = lo / std::pow(a, 1.0 / w.shape);
    return w;
}

void LognormalParams::validate() const
{
    if (!(sigma_log > 0.0) || !std::isfinite(mu_log))
        throw std::invalid_argument("lognormal: sigma_log must be > 0");
}

double LognormalParams::logpdf(double x) const
{
    if (!(x > 0.0))
        return -std::numeric_limits<double>::infinity();
    const double z = (std::log(x) - mu_log) / sigma_log;
    return -0.5 * z * z - std::log(sigma_log * x) - 0.5 * std::log(kTwoPi);
}

double LognormalParams::mean() const
{
    return std::exp(mu_log + 0.5 * sigma_log * sigma_log);
}

LognormalParams LognormalParams::from_mean(double mean, double sigma_log)
{
    if (!(mean > 0.0) || !(sigma_log > 0.0))
        throw std::invalid_argument("lognormal: mean and sigma_log must be > 0");
    return {std::log(mean) - 0.5 * sigma_log * sigma_log, sigma_log};
}

// ---- materials ----------------------------------------------------------

void MaterialModel::validate() const
{
    if (name.empty())
        throw std::invalid_argument("material: empty name");
    specular_loss.validate();
    diffuse_loss.validate();
    if (!(diffuse_span_deg > 0.0) || diffuse_span_deg > 180.0)
        throw std::invalid_argument("material '" + name + "': diffuse span must be in (0, 180]");
}

double MaterialModel::lambertian_db(double delta_theta_rad) const
{
    const double c = std::cos(delta_theta_rad);
    return lambertian_slope_db * c * c + lambertian_intercept_db;
}

namespace
{

MaterialModel make_material(std::string name, double spec_lo, double spec_hi, double diff_lo, double diff_hi, double slope,
                            double intercept, int rank, double span, bool measured)
{
    MaterialModel m;
    m.name = std::move(name);
    m.specular_loss = {0.5 * (spec_lo + spec_hi), 0.25 * (spec_hi - spec_lo)};
    m.diffuse_loss = WeibullParams::from_quantile_range(diff_lo, diff_hi);
    m.lambertian_slope_db = slope;
    m.lambertian_intercept_db = intercept;
    m.roughness_rank = rank;
    m.diffuse_span_deg = span;
    m.lambertian_measured = measured;
    return m;
}

} // namespace

std::vector<MaterialModel> default_material_db()
{
    // Specular/diffuse loss ranges (dB), Lambertian fits and angular spans from
    // the polymer, cement and tile flat-wall measurements. Metal and glass reuse
    // the cement Lambertian law and span, flagged unmeasured.
    return {
        make_material("metal", 0.03, 4.25, 15.97, 44.90, 18.30, -32.07, 1, 106.0, false),
        make_material("glass", 9.26, 12.50, 15.19, 52.53, 18.30, -32.07, 1, 106.0, false),
        make_material("cement", 10.56, 14.66, 24.97, 65.74, 18.30, -32.07, 2, 106.0, true),
        make_material("polymer", 11.50, 15.58, 23.63, 63.44, 10.29, -26.98, 3, 110.0, true),
        make_material("tile", 9.41, 10.86, 29.33, 60.99, 24.09, -45.01, 1, 90.0, true),
    };
}

const MaterialModel &find_material(const std::vector<MaterialModel> &db, const std::string &name)
{
    auto it = std::find_if(db.begin(), db.end(), [&](const MaterialModel &m) { return m.name == name; });
    if (it == db.end())
        throw DataError("unknown material '" + name + "'");
    return *it;
}

// ---- scenario statistics ------------------------------------------------

ScenarioCase parse_scenario_case(const std::string &s)
{
    if (s == "scenario1")
        return ScenarioCase::scenario1;
    if (s == "scenario2")
        return ScenarioCase::scenario2;
    if (s == "trx37-45" || s == "trx37_45")
        return ScenarioCase::trx37_45;
    if (s == "trx46-57" || s == "trx46_57")
        return ScenarioCase::trx46_57;
    throw std::invalid_argument("unknown scenario case '" + s + "' (expected scenario1, scenario2, trx37-45, trx46-57)");
}

const char *to_string(ScenarioCase c)
{
    switch (c)
    {
    case ScenarioCase::scenario1:
        return "scenario1";
    case ScenarioCase::scenario2:
        return "scenario2";
    case ScenarioCase::trx37_45:
        return "trx37-45";
    case ScenarioCase::trx46_57:
        return "trx46-57";
    }
    return "?";
}

void ScenarioStats::validate() const
{
    cluster_count.validate();
    delay_depth_log.validate();
    angular_width_log.validate();
    delay_spread_log.validate();
    angular_spread_log.validate();
}

ScenarioStats default_scenario_stats(ScenarioCase c)
{
    struct Row
    {
        double count_mu, count_sigma, depth_ns, width_deg, ds_ns, as_deg;
    };
    Row r{};
    switch (c)
    {
    case ScenarioCase::scenario1:
        r = {36.01, 10.23, 0.89, 8.83, 0.18, 1.40};
        break;
    case ScenarioCase::scenario2:
        r = {85.0, 42.0, 1.00, 9.71, 0.17, 1.71};
        break;
    case ScenarioCase::trx37_45:
        r = {54.89, 24.36, 1.16, 8.28, 0.18, 1.27};
        break;
    case ScenarioCase::trx46_57:
        r = {38.25, 44.93, 1.47, 10.81, 0.21, 1.48};
        break;
    }
    ScenarioStats s;
    s.cluster_count = {r.count_mu, r.count_sigma};
    s.delay_depth_log = LognormalParams::from_mean(r.depth_ns * 1e-9, kDefaultLogSigma);
    s.angular_width_log = LognormalParams::from_mean(r.width_deg, kDefaultLogSigma);
    s.delay_spread_log = LognormalParams::from_mean(r.ds_ns * 1e-9, kDefaultLogSigma);
    s.angular_spread_log = LognormalParams::from_mean(r.as_deg, kDefaultLogSigma);
    return s;
}

// ---- clusters -----------------------------------------------------------

void update_centroid(ClusterRecord &cluster)
{
    double wsum = 0.0, tsum = 0.0;
    cplx phasor{0.0, 0.0};
    for (const auto &m : cluster.members)
    {
        const double p = std::norm(m.mpc.amplitude);
        wsum += p;
        tsum += p * m.mpc.delay_s;
        phasor += p * std::polar(1.0, m.mpc.azimuth_rad);
    }
    if (wsum > 0.0)
    {
        cluster.centroid_delay_s = tsum / wsum;
        cluster.centroid_azimuth_rad = wrap_2pi(std::arg(phasor));
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

} // namespace thz
