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

#include "thzsense/pipeline.hpp"

#include <cmath>

using namespace thz;
using geometry::ReflectorKind;

namespace
{

Scene reduced_scene()
{
    Scene s;
    s.config.n_freq = 501;
    s.config.angle_step_deg = 2.0;
    s.config.n_angles = 180;
    s.trx_positions = {{0.0, 0.0}};
    return s;
}

PipelineOptions fast_options()
{
    PipelineOptions o;
    o.estimator.max_paths = 80;
    return o;
}

} // namespace

TEST_CASE("metal wall end to end")
{
    Scene s = reduced_scene();
    geometry::Reflector w;
    w.distance_m = 1.4;
    w.azimuth_deg = 60.0;
    w.span_deg = 100.0;
    w.material = "metal";
    s.reflectors = {w};

    std::vector<TrxAnalysis> analyses;
    const auto rep = run_scene_report(s, 11, fast_options(), &analyses);
    REQUIRE(analyses.size() == 1);
    CHECK(analyses[0].noise_floor_db < -80.0);
    CHECK(rep.reflector_count() == 1);
    REQUIRE(rep.level1.size() == 1);
    CHECK(rad2deg(rep.level1[0].azimuth_rad) == doctest::Approx(60.0).epsilon(0.05));
    CHECK(rep.level1[0].delay_s == doctest::Approx(2.0 * 1.4 / kSpeedOfLight + 2.0 * 0.2 / kSpeedOfLight).epsilon(0.05));
    REQUIRE(rep.level3.size() == 1);
    CHECK(rep.level3[0].classification.kind == ReflectorKind::flat_wall);
    CHECK(rep.level3[0].classification.best.params.distance_m == doctest::Approx(1.4).epsilon(0.02));
    REQUIRE(rep.level4.size() == 1);
    CHECK(rep.level4[0].ranked.front().material == "metal");
}

TEST_CASE("detection floor is the weakest estimate")
{
    std::vector<PathEstimate> e(2);
    e[0].mpc.amplitude = cplx(1e-5, 0.0);
    e[1].mpc.amplitude = cplx(0.0, 1e-7);
    CHECK(detection_floor_db(e) == doctest::Approx(-140.0));
    CHECK(detection_floor_db({}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("thread count does not change the analysis")
{
    Scene s = reduced_scene();
    geometry::Reflector a, b;
    a.distance_m = 1.5;
    a.azimuth_deg = 90.0;
    a.span_deg = 60.0;
    b.kind = ReflectorKind::cylinder;
    b.distance_m = 2.0;
    b.radius_m = 0.3;
    b.azimuth_deg = 300.0;
    b.material = "metal";
    s.reflectors = {a, b};
    s.trx_positions = {{0.0, 0.0}, {0.3, 0.1}, {-0.2, 0.2}};

    PipelineOptions one = fast_options(), three = fast_options();
    three.threads = 3;
    std::vector<TrxAnalysis> x, y;
    const auto ra = run_scene_report(s, 5, one, &x);
    const auto rb = run_scene_report(s, 5, three, &y);
    CHECK(report_to_json(ra) == report_to_json(rb));
    REQUIRE(x.size() == y.size());
    for (std::size_t t = 0; t < x.size(); ++t)
    {
        CHECK(x[t].trx_id == t);
        CHECK(y[t].trx_id == t);
        REQUIRE(x[t].estimates.size() == y[t].estimates.size());
        for (std::size_t i = 0; i < x[t].estimates.size(); ++i)
        {
            CHECK(x[t].estimates[i].mpc.amplitude == y[t].estimates[i].mpc.amplitude);
            CHECK(x[t].estimates[i].mpc.delay_s == y[t].estimates[i].mpc.delay_s);
        }
        CHECK(x[t].regions.labels == y[t].regions.labels);
    }
}

TEST_CASE("analysis of pure noise finds no reflector")
{
    Scene s = reduced_scene();
    CfrTensor cfr;
    cfr.config = s.config;
    cfr.values = Matrix<cplx>(s.config.n_angles, s.config.n_freq);
    cfr = add_noise(cfr, -90.0, 3);
    const auto a = analyze_cfr(cfr, fast_options());
    CHECK(a.estimates.size() <= 1);
    const auto rep = build_environment_report(a.clusters, default_material_db());
    CHECK(rep.reflector_count() == 0);
}
