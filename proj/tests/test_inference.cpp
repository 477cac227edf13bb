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

#include "thzsense/characterization.hpp"
#include "thzsense/inference.hpp"
#include "thzsense/synthesis.hpp"

#include <cmath>
#include <random>

using namespace thz;
using geometry::ReflectorKind;

namespace
{

// Diffuse members at integer-degree azimuths whose power follows slope*cos^2 + intercept.
std::vector<TaggedMpc> affine_diffuse(double slope, double intercept, double spec_deg, std::vector<int> offsets)
{
    std::vector<TaggedMpc> out;
    for (int o : offsets)
    {
        TaggedMpc t;
        t.tag = MpcTag::diffuse;
        t.mpc = {cplx(1e-6, 0.0), 10e-9, deg2rad(spec_deg + o)};
        const double c = std::cos(deg2rad(static_cast<double>(o)));
        t.loss_db = -(slope * c * c + intercept);
        out.push_back(t);
    }
    return out;
}

ClusterRecord wall_cluster(const std::string &material, std::uint64_t seed, double span_deg = 150.0)
{
    Scene s;
    geometry::Reflector r;
    r.material = material;
    r.span_deg = span_deg;
    s.reflectors = {r};
    s.trx_positions = {{0.0, 0.0}};
    ClusterRecord c;
    c.members = scene_to_mpcs(s, 0, seed);
    return c;
}

TaggedMpc tagged_loss(MpcTag tag, double loss)
{
    TaggedMpc t;
    t.tag = tag;
    t.loss_db = loss;
    t.mpc = {cplx(1e-5, 0.0), 8e-9, 0.0};
    return t;
}

} // namespace

TEST_CASE("Lambertian fit")
{
    std::vector<int> offs;
    for (int o = -50; o <= 50; o += 5)
        offs.push_back(o);

    SUBCASE("exact on affine data")
    {
        const auto d = affine_diffuse(10.29, -26.98, 120.0, offs);
        const auto f = fit_lambertian(d, deg2rad(120.0));
        CHECK(f.slope_db == doctest::Approx(10.29).epsilon(1e-10));
        CHECK(f.intercept_db == doctest::Approx(-26.98).epsilon(1e-10));
        CHECK(f.rms_residual_db < 1e-9);
        CHECK(f.n_points == offs.size());
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-40.0, 40.0);
        for (int i = 0; i < 20; ++i)
        {
            const double a = u(rng), b = u(rng);
            const auto g = fit_lambertian(affine_diffuse(a, b, 10.0, offs), deg2rad(10.0));
            CHECK(g.slope_db == doctest::Approx(a).epsilon(1e-9));
            CHECK(g.intercept_db == doctest::Approx(b).epsilon(1e-9));
            CHECK(g.rms_residual_db < 1e-9);
        }
    }
    SUBCASE("two points interpolate")
    {
        const auto f = fit_lambertian(affine_diffuse(5.0, -20.0, 0.0, {0, 30}), 0.0);
        CHECK(f.slope_db == doctest::Approx(5.0));
        CHECK(f.rms_residual_db < 1e-12);
    }
    SUBCASE("powers in one bin are summed")
    {
        auto d = affine_diffuse(5.0, -20.0, 0.0, {0, 30});
        d.push_back(d[1]);
        const auto f = fit_lambertian(d, 0.0);
        // Doubling the 30 degree bin adds 10 log10 2 there.
        const double c2 = std::pow(std::cos(deg2rad(30.0)), 2);
        const double y0 = 5.0 - 20.0, y1 = 5.0 * c2 - 20.0 + 10.0 * std::log10(2.0);
        CHECK(f.slope_db == doctest::Approx((y0 - y1) / (1.0 - c2)));
    }
    SUBCASE("reference loss shifts the intercept only")
    {
        const auto d = affine_diffuse(10.0, -30.0, 0.0, offs);
        const auto f = fit_lambertian(d, 0.0, 12.0);
        CHECK(f.slope_db == doctest::Approx(10.0));
        CHECK(f.intercept_db == doctest::Approx(-18.0));
    }
    SUBCASE("degenerate inputs")
    {
        CHECK_THROWS_AS(fit_lambertian(affine_diffuse(5.0, -20.0, 0.0, {10}), 0.0), DataError);
        CHECK_THROWS_AS(fit_lambertian(affine_diffuse(5.0, -20.0, 0.0, {10, 10}), 0.0), DataError);
    }
    SUBCASE("synthetic cement walls")
    {
        int within = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed)
            within += std::abs(roughness_indicators(wall_cluster("cement", seed)).lambertian.slope_db - 18.30) <= 3.0;
        CHECK(within >= 90);
    }
}

TEST_CASE("roughness indicators")
{
    int polymer_more = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed)
    {
        const auto p = roughness_indicators(wall_cluster("polymer", seed));
        const auto t = roughness_indicators(wall_cluster("tile", seed));
        polymer_more += p.n_diffuse > t.n_diffuse ? 1 : 0;
        CHECK(std::abs(p.angular_span_deg - 110.0) <= 2.0);
        CHECK(std::abs(t.angular_span_deg - 90.0) <= 2.0);
        CHECK(rougher_than(p, t));
        CHECK_FALSE(rougher_than(t, p));
    }
    CHECK(polymer_more >= 38);

    ClusterRecord one;
    one.members = {tagged_loss(MpcTag::specular, 10.0), tagged_loss(MpcTag::diffuse, 30.0)};
    CHECK_THROWS_AS(roughness_indicators(one), DataError);
}

TEST_CASE("structure classification")
{
    const double step = deg2rad(1.0);
    SUBCASE("noise-free flat wall")
    {
        const auto r = classify_structure(geometry::signature_flat(1.2, deg2rad(40.0), deg2rad(100.0), step).samples);
        CHECK(r.kind == ReflectorKind::flat_wall);
        CHECK(std::abs(r.best.params.distance_m - 1.2) <= 0.02);
    }
    SUBCASE("noise-free cylinder")
    {
        const auto r = classify_structure(geometry::signature_cylinder(1.7, 0.5, deg2rad(250.0), step).samples);
        CHECK(r.kind == ReflectorKind::cylinder);
        CHECK(std::abs(r.best.params.radius_m - 0.5) <= 0.05);
    }
    SUBCASE("generating kind has the smallest residual")
    {
        const std::array<geometry::SignatureCurve, 4> curves = {
            geometry::signature_flat(1.2, 1.0, deg2rad(100.0), step), geometry::signature_cylinder(1.7, 0.5, 2.0, step),
            geometry::signature_corner(1.2, 1.0, 3.0, true, step), geometry::signature_corner(1.2, 1.0, 4.0, false, step)};
        for (std::size_t i = 0; i < 4; ++i)
        {
            const auto r = classify_structure(curves[i].samples);
            CHECK(r.kind == geometry::kAllKinds[i]);
            for (std::size_t j = 0; j < 4; ++j)
                CHECK(r.fits[i].rms_residual_s <= r.fits[j].rms_residual_s);
        }
    }
    SUBCASE("composite scene: two convex corners and a flat wall")
    {
        Scene s;
        geometry::Reflector w;
        w.distance_m = 2.0;
        w.span_deg = 70.0;
        geometry::Reflector c1;
        c1.kind = ReflectorKind::convex_corner;
        c1.distance_m = 0.8;
        c1.b_m = 0.8;
        c1.azimuth_deg = 210.0;
        c1.arm_length_m = 1.5;
        c1.material = "metal";
        geometry::Reflector c2 = c1;
        c2.azimuth_deg = 330.0;
        s.reflectors = {w, c1, c2};
        s.trx_positions = {{0.0, 0.0}};
        const auto mpcs = scene_to_mpcs(s, 0, 5);
        std::array<ReflectorKind, 3> kinds{};
        for (std::size_t i = 0; i < 3; ++i)
        {
            ClusterRecord c;
            for (const auto &m : mpcs)
                if (m.source_reflector == i)
                    c.members.push_back(m);
            kinds[i] = classify_structure(diffuse_points(c)).kind;
        }
        CHECK(kinds[0] == ReflectorKind::flat_wall);
        CHECK(kinds[1] == ReflectorKind::convex_corner);
        CHECK(kinds[2] == ReflectorKind::convex_corner);
    }
    SUBCASE("too few points")
    {
        auto pts = geometry::signature_flat(1.2, 0.0, deg2rad(100.0), step).samples;
        pts.resize(3);
        CHECK_THROWS_AS(classify_structure(pts), DataError);
        const std::vector<geometry::SignatureSample> same = {{0.1, 8e-9}, {0.1, 9e-9}, {0.2, 8e-9}, {0.2, 9e-9}};
        CHECK_THROWS_AS(classify_structure(same), DataError);
    }
}

TEST_CASE("material classification")
{
    const auto db = default_material_db();
    auto single = [&](double loss) {
        ClusterRecord c;
        c.members = {tagged_loss(MpcTag::specular, loss)};
        return classify_material(c, db);
    };
    CHECK(single(2.0).front().material == "metal");
    CHECK(single(15.5).front().material == "polymer");
    for (const auto &m : single(11.0))
        if (m.material == "glass" || m.material == "cement" || m.material == "polymer")
            CHECK(m.posterior < 0.9);

    SUBCASE("posteriors")
    {
        ClusterRecord c;
        c.members = {tagged_loss(MpcTag::specular, 12.0), tagged_loss(MpcTag::diffuse, 30.0),
                     tagged_loss(MpcTag::diffuse, 41.0)};
        for (auto ev : {DiffuseEvidence::pooled, DiffuseEvidence::independent})
        {
            const auto r = classify_material(c, db, ev);
            double sum = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i)
            {
                sum += r[i].posterior;
                CHECK(r[i].posterior >= 0.0);
                CHECK(r[i].posterior <= 1.0);
                if (i > 0)
                    CHECK(r[i].log_likelihood <= r[i - 1].log_likelihood);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        // Pooled diffuse evidence is the mean of the independent diffuse terms.
        const auto pooled = classify_material(c, db, DiffuseEvidence::pooled);
        for (const auto &m : pooled)
        {
            const auto &mat = find_material(db, m.material);
            const double expect = mat.specular_loss.logpdf(12.0) +
                                  0.5 * (mat.diffuse_loss.logpdf(30.0) + mat.diffuse_loss.logpdf(41.0));
            CHECK(m.log_likelihood == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("detection floor truncates the diffuse likelihood")
    {
        ClusterRecord c;
        c.members = {tagged_loss(MpcTag::specular, 12.0), tagged_loss(MpcTag::diffuse, 30.0),
                     tagged_loss(MpcTag::diffuse, 41.0)};
        c.members[1].mpc.amplitude = cplx(1e-6, 0.0); // -120 dB
        c.members[2].mpc.amplitude = cplx(0.0, 1e-7); // -140 dB
        const auto plain = classify_material(c, db);
        c.detection_floor_db = -150.0;
        const auto cut = classify_material(c, db);
        for (const auto &m : cut)
        {
            const auto &mat = find_material(db, m.material);
            // A path of this delay would reach the floor at loss + (amplitude - floor).
            const double norm = 0.5 * (mat.diffuse_loss.log_cdf(30.0 + 30.0) + mat.diffuse_loss.log_cdf(41.0 + 10.0));
            const auto p = std::find_if(plain.begin(), plain.end(), [&](const auto &x) { return x.material == m.material; });
            CHECK(m.log_likelihood == doctest::Approx(p->log_likelihood - norm).epsilon(1e-12));
        }
    }
    SUBCASE("softmax shift invariance")
    {
        const std::vector<double> ll{-3.0, -1.0, -7.5, -2.2}, shifted{997.0, 999.0, 992.5, 997.8};
        const auto a = softmax_posteriors(ll), b = softmax_posteriors(shifted);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
        const double inf = std::numeric_limits<double>::infinity();
        const std::vector<double> none{-inf, -inf};
        CHECK(softmax_posteriors(none)[0] == doctest::Approx(0.5));
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(classify_material(ClusterRecord{}, db), DataError);
        ClusterRecord c;
        c.members = {tagged_loss(MpcTag::specular, 3.0)};
        CHECK_THROWS_AS(classify_material(c, {}), DataError);
    }
}

TEST_CASE("environment report")
{
    const auto db = default_material_db();
    SUBCASE("empty")
    {
        const auto r = build_environment_report({}, db);
        CHECK(r.reflector_count() == 0);
        CHECK(r.level2.empty());
        CHECK(r.level3.empty());
        CHECK(r.level4.empty());
        CHECK(report_to_json(r).find("\"reflector_count\": 0") != std::string::npos);
    }
    SUBCASE("ground-truth walls")
    {
        std::vector<ClusterRecord> clusters;
        const char *mats[] = {"polymer", "tile", "metal"};
        for (std::size_t i = 0; i < 3; ++i)
        {
            auto c = wall_cluster(mats[i], 3 + i);
            c.id = 10 - i;
            clusters.push_back(c);
        }
        ClusterRecord frag;
        frag.id = 99;
        frag.members = {tagged_loss(MpcTag::diffuse, 40.0)};
        clusters.push_back(frag);

        const auto r = build_environment_report(clusters, db);
        CHECK(r.reflector_count() == 3);
        CHECK(r.n_fragments == 1);
        REQUIRE(r.level3.size() == 3);
        for (const auto &e : r.level3)
            CHECK(e.classification.kind == ReflectorKind::flat_wall);
        REQUIRE(r.level4.size() == 3);
        // Ordered by cluster id: metal (8), tile (9), polymer (10).
        CHECK(r.level4[0].ranked.front().material == "metal");
        CHECK(r.level1[0].cluster_id == 8);
        REQUIRE(r.level2.size() == 3);
        CHECK(r.level2[2].rank == 1); // polymer is the roughest
        for (const auto &e : r.level4)
        {
            double s = 0.0;
            for (const auto &m : e.ranked)
                s += m.posterior;
            CHECK(s == doctest::Approx(1.0));
        }
        CHECK(report_to_json(r) == report_to_json(build_environment_report(clusters, db)));
        CHECK(report_to_text(r) == report_to_text(build_environment_report(clusters, db)));
        CHECK(report_to_text(r).find("Level 4") != std::string::npos);
    }
    SUBCASE("structure needs enough diffuse azimuths")
    {
        const auto full = wall_cluster("cement", 5);
        ClusterRecord c;
        std::size_t diffuse = 0;
        for (const auto &m : full.members)
            if (m.tag == MpcTag::specular || (m.tag == MpcTag::diffuse && diffuse++ < 5))
                c.members.push_back(m);
        REQUIRE(diffuse >= 5);
        const std::vector<ClusterRecord> one{c};
        CHECK(build_environment_report(one, db).level3.empty());
        ReportOptions o;
        o.min_structure_points = 5;
        CHECK(build_environment_report(one, db, o).level3.size() == 1);
    }
}
