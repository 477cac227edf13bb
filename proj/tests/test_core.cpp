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

#include <doctest.h>

#include "thzsense/core.hpp"

#include <cmath>
#include <limits>
#include <map>

using namespace thz;

namespace
{

// Published [min, max] reflection-loss ranges in dB.
struct Range
{
    double lo, hi;
};
const std::map<std::string, Range> kSpecularRanges = {
    {"metal", {0.03, 4.25}}, {"tile", {9.41, 10.86}},     {"glass", {9.26, 12.50}},
    {"cement", {10.56, 14.66}}, {"polymer", {11.50, 15.58}},
};
const std::map<std::string, Range> kDiffuseRanges = {
    {"metal", {15.97, 44.90}}, {"glass", {15.19, 52.53}},   {"cement", {24.97, 65.74}},
    {"polymer", {23.63, 63.44}}, {"tile", {29.33, 60.99}},
};

} // namespace

TEST_CASE("sounder defaults match the campaign configuration")
{
    SounderConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.f_start == 290e9);
    CHECK(cfg.f_stop == 310e9);
    CHECK(cfg.n_freq == 2001);
    CHECK(cfg.n_angles == 360);
    CHECK(cfg.angle_step_deg == 1.0);
    CHECK(cfg.arm_radius_m == 0.2);
    CHECK(cfg.antenna.peak_gain_dbi == 25.5);
    CHECK(cfg.antenna.hpbw_deg == 8.0);
    CHECK(cfg.delay_resolution() == doctest::Approx(50e-12));
    CHECK(cfg.max_delay() == doctest::Approx(100e-9));
    CHECK(cfg.full_circle());

    SounderConfig bad = cfg;
    bad.f_stop = bad.f_start;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.n_angles = 361;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.antenna.sidelobe_floor_dbr = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("default material database")
{
    const auto db = default_material_db();
    REQUIRE(db.size() == 5);
    for (const auto &m : db)
        CHECK_NOTHROW(m.validate());

    const auto &metal = find_material(db, "metal");
    CHECK(metal.specular_loss.mu == doctest::Approx(2.14).epsilon(1e-12));
    CHECK(metal.specular_loss.sigma == doctest::Approx(1.055).epsilon(1e-12));

    const auto &tile = find_material(db, "tile");
    CHECK(tile.lambertian_slope_db == 24.09);
    CHECK(tile.lambertian_intercept_db == -45.01);
    CHECK(find_material(db, "polymer").lambertian_slope_db == 10.29);
    CHECK(find_material(db, "polymer").lambertian_intercept_db == -26.98);
    CHECK(find_material(db, "cement").lambertian_slope_db == 18.30);
    CHECK(find_material(db, "cement").lambertian_intercept_db == -32.07);
    CHECK_FALSE(metal.lambertian_measured);
    CHECK_FALSE(find_material(db, "glass").lambertian_measured);

    const auto &cement = find_material(db, "cement");
    CHECK(std::abs(cement.diffuse_loss.quantile(0.025) - 24.97) < 0.01);

    CHECK_THROWS_AS(find_material(db, "teak"), DataError);
}

TEST_CASE("specular +/- 2 sigma and diffuse 2.5/97.5 % reproduce the published ranges")
{
    const auto db = default_material_db();
    for (const auto &m : db)
    {
        CAPTURE(m.name);
        const auto s = kSpecularRanges.at(m.name);
        CHECK(std::abs(m.specular_loss.mu - 2.0 * m.specular_loss.sigma - s.lo) < 0.01);
        CHECK(std::abs(m.specular_loss.mu + 2.0 * m.specular_loss.sigma - s.hi) < 0.01);
        const auto d = kDiffuseRanges.at(m.name);
        CHECK(std::abs(m.diffuse_loss.quantile(0.025) - d.lo) < 0.01);
        CHECK(std::abs(m.diffuse_loss.quantile(0.975) - d.hi) < 0.01);
    }
}

TEST_CASE("material orderings")
{
    const auto db = default_material_db();
    auto mu = [&](const char *n) { return find_material(db, n).specular_loss.mu; };
    CHECK(mu("metal") < mu("tile"));
    CHECK(mu("tile") < mu("glass"));
    CHECK(mu("glass") < mu("cement"));
    CHECK(mu("cement") < mu("polymer"));

    // Smoother surfaces (lower rank) have steeper Lambertian slopes.
    const auto &tile = find_material(db, "tile");
    const auto &cement = find_material(db, "cement");
    const auto &polymer = find_material(db, "polymer");
    CHECK(tile.lambertian_slope_db > cement.lambertian_slope_db);
    CHECK(cement.lambertian_slope_db > polymer.lambertian_slope_db);
    CHECK(tile.roughness_rank < cement.roughness_rank);
    CHECK(cement.roughness_rank < polymer.roughness_rank);
}

TEST_CASE("scenario statistics")
{
    const auto s1 = default_scenario_stats(ScenarioCase::scenario1);
    CHECK(s1.cluster_count.mu == 36.01);
    CHECK(s1.cluster_count.sigma == 10.23);
    CHECK(default_scenario_stats(ScenarioCase::scenario2).cluster_count.mu == 85.0);
    CHECK(default_scenario_stats(ScenarioCase::trx37_45).cluster_count.sigma == 24.36);
    CHECK(default_scenario_stats(ScenarioCase::trx46_57).cluster_count.sigma == 44.93);

    const auto s4 = default_scenario_stats(ScenarioCase::trx46_57);
    CHECK(std::abs(s4.delay_spread_log.mean() / 0.21e-9 - 1.0) < 0.01);

    const std::map<ScenarioCase, std::array<double, 4>> means = {
        {ScenarioCase::scenario1, {0.89e-9, 8.83, 0.18e-9, 1.40}},
        {ScenarioCase::scenario2, {1.00e-9, 9.71, 0.17e-9, 1.71}},
        {ScenarioCase::trx37_45, {1.16e-9, 8.28, 0.18e-9, 1.27}},
        {ScenarioCase::trx46_57, {1.47e-9, 10.81, 0.21e-9, 1.48}},
    };
    for (const auto &[c, m] : means)
    {
        const auto s = default_scenario_stats(c);
        CHECK_NOTHROW(s.validate());
        const LognormalParams *ps[] = {&s.delay_depth_log, &s.angular_width_log, &s.delay_spread_log,
                                       &s.angular_spread_log};
        for (int i = 0; i < 4; ++i)
        {
            CHECK(ps[i]->sigma_log == 0.5);
            // exp(mu + sigma^2 / 2) equals the reported mean.
            CHECK(std::exp(ps[i]->mu_log + 0.125) == doctest::Approx(m[static_cast<std::size_t>(i)]).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(parse_scenario_case("scenario9"), std::invalid_argument);
    CHECK(parse_scenario_case("trx46-57") == ScenarioCase::trx46_57);
}

TEST_CASE("angle wrapping and seeds")
{
    CHECK(wrap_2pi(-0.5 * kPi) == doctest::Approx(1.5 * kPi));
    CHECK(wrap_2pi(kTwoPi) == 0.0);
    CHECK(wrap_pi(1.5 * kPi) == doctest::Approx(-0.5 * kPi));
    CHECK(derive_seed(7, 1) == derive_seed(7, 1));
    CHECK(derive_seed(7, 1) != derive_seed(7, 2));
    CHECK(derive_seed(7, 1, 0) != derive_seed(8, 1, 0));
}

TEST_CASE("distribution helpers")
{
    NormalParams n{1.0, 2.0};
    CHECK(n.cdf(1.0) == doctest::Approx(0.5));
    CHECK(n.logpdf(1.0) == doctest::Approx(-std::log(2.0) - 0.5 * std::log(kTwoPi)));
    WeibullParams w{2.0, 1.0};
    CHECK(w.median() == doctest::Approx(std::sqrt(std::log(2.0))));
    CHECK(w.logpdf(1.0) == doctest::Approx(std::log(2.0) - 1.0));
    const WeibullParams loss{3.5, 40.0};
    for (double p : {1e-6, 0.1, 0.5, 0.97})
        CHECK(loss.log_cdf(loss.quantile(p)) == doctest::Approx(std::log(p)).epsilon(1e-10));
    CHECK(loss.log_cdf(0.0) == -std::numeric_limits<double>::infinity());
    CHECK(LognormalParams::from_mean(3.0, 0.7).mean() == doctest::Approx(3.0));
}
