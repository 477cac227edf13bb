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

#include "thzsense/clustering.hpp"
#include "thzsense/synthesis.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace thz;

namespace
{

BinaryMask random_mask(std::mt19937_64 &rng, std::size_t nd, std::size_t na, double density)
{
    std::bernoulli_distribution b(density);
    BinaryMask m(nd, na, 0);
    for (auto &v : m.data())
        v = b(rng) ? 1 : 0;
    return m;
}

bool subset(const BinaryMask &a, const BinaryMask &b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.data()[i] && !b.data()[i])
            return false;
    return true;
}

// Flood fill over an explicit neighbour list, angle axis circular.
std::vector<std::set<std::pair<std::size_t, std::size_t>>> flood_fill(const BinaryMask &m, int conn)
{
    const long nd = static_cast<long>(m.rows()), na = static_cast<long>(m.cols());
    std::vector<std::vector<bool>> seen(static_cast<std::size_t>(nd), std::vector<bool>(static_cast<std::size_t>(na)));
    std::vector<std::set<std::pair<std::size_t, std::size_t>>> out;
    for (long d = 0; d < nd; ++d)
        for (long a = 0; a < na; ++a)
        {
            if (!m(static_cast<std::size_t>(d), static_cast<std::size_t>(a)) || seen[d][a])
                continue;
            std::set<std::pair<std::size_t, std::size_t>> region;
            std::vector<std::pair<long, long>> stack = {{d, a}};
            seen[d][a] = true;
            while (!stack.empty())
            {
                auto [x, y] = stack.back();
                stack.pop_back();
                region.insert({static_cast<std::size_t>(x), static_cast<std::size_t>(y)});
                for (long dx = -1; dx <= 1; ++dx)
                    for (long dy = -1; dy <= 1; ++dy)
                    {
                        if ((dx == 0 && dy == 0) || (conn == 4 && dx != 0 && dy != 0))
                            continue;
                        const long u = x + dx, v = ((y + dy) % na + na) % na;
                        if (u < 0 || u >= nd || seen[u][v] || !m(static_cast<std::size_t>(u), static_cast<std::size_t>(v)))
                            continue;
                        seen[u][v] = true;
                        stack.push_back({u, v});
                    }
            }
            out.push_back(region);
        }
    return out;
}

std::multiset<std::size_t> region_sizes(const LabeledRegions &r)
{
    std::multiset<std::size_t> s;
    for (const auto &g : r.regions)
        s.insert(g.size());
    return s;
}

} // namespace

TEST_CASE("binarization threshold")
{
    PadpGrid p;
    p.values_db = Matrix<double>(1, 3);
    p.values_db(0, 0) = -75.0;
    p.values_db(0, 1) = -81.0;
    p.values_db(0, 2) = -80.0;
    const auto m = binarize_padp(p, -90.0);
    CHECK(m(0, 0) == 1);
    CHECK(m(0, 1) == 0);
    CHECK(m(0, 2) == 0);
    PadpGrid s;
    s.values_db = Matrix<double>(4, 4, kPadpSentinelDb);
    const auto z = binarize_padp(s, -90.0);
    CHECK(std::all_of(z.data().begin(), z.data().end(), [](auto v) { return v == 0; }));
    CHECK_THROWS_AS(binarize_padp(p, -90.0, -1.0), std::invalid_argument);
}

TEST_CASE("closing examples")
{
    const auto k3 = StructuringElement::rectangle(3, 3);
    CHECK(k3.symmetric());
    BinaryMask block(9, 9, 0);
    for (std::size_t d = 2; d < 7; ++d)
        for (std::size_t a = 2; a < 7; ++a)
            block(d, a) = 1;
    block(4, 4) = 0;
    CHECK(morph_close(block, k3)(4, 4) == 1);

    BinaryMask dot(7, 7, 0);
    dot(3, 3) = 1;
    const auto c = morph_close(dot, k3);
    CHECK(c(3, 3) == 1);

    BinaryMask gap(3, 7, 0);
    gap(1, 2) = 1;
    gap(1, 4) = 1;
    const auto h = StructuringElement::rectangle(1, 3);
    const auto g = morph_close(gap, h);
    CHECK(g(1, 3) == 1);
    CHECK(g(1, 1) == 0);
    CHECK(g(0, 3) == 0);

    StructuringElement bad;
    bad.offsets = {{1, 0}};
    CHECK_THROWS_AS(dilate(dot, bad), std::invalid_argument);
}

TEST_CASE("morphology properties on random masks")
{
    std::mt19937_64 rng(17);
    StructuringElement skew;
    skew.offsets = {{0, 0}, {1, 0}, {0, 2}, {-1, 1}};
    CHECK_FALSE(skew.symmetric());
    for (int t = 0; t < 200; ++t)
    {
        const auto m = random_mask(rng, 24, 30, t % 2 ? 0.2 : 0.5);
        for (const auto &k : {StructuringElement::rectangle(3, 3), StructuringElement::rectangle(1, 5), skew})
        {
            const auto d = dilate(m, k), e = erode(m, k), c = morph_close(m, k);
            CHECK(subset(m, d));
            CHECK(subset(e, m));
            CHECK(subset(m, c));
            CHECK(morph_close(c, k) == c);
        }
    }
}

TEST_CASE("connectivity and size filter")
{
    BinaryMask diag(4, 4, 0);
    diag(1, 1) = 1;
    diag(2, 2) = 1;
    CHECK(label_regions(diag, 8, 1).regions.size() == 1);
    CHECK(label_regions(diag, 4, 1).regions.size() == 2);

    BinaryMask three(5, 5, 0);
    three(0, 0) = three(0, 1) = three(0, 2) = 1;
    CHECK(label_regions(three, 8, 5).regions.empty());
    CHECK(label_regions(three, 8, 3).regions.size() == 1);

    // A band straddling the 359 -> 0 degree seam.
    BinaryMask seam(6, 360, 0);
    for (std::size_t d = 2; d < 4; ++d)
        for (std::size_t a : {357u, 358u, 359u, 0u, 1u, 2u})
            seam(d, a) = 1;
    const auto r = label_regions(seam, 4, 4);
    REQUIRE(r.regions.size() == 1);
    CHECK(r.regions[0].size() == 12);
    CHECK(r.labels(2, 0) == 1);
    CHECK(r.labels(3, 359) == 1);

    CHECK_THROWS_AS(label_regions(seam, 6, 1), std::invalid_argument);
    CHECK_THROWS_AS(label_regions(seam, 8, 0), std::invalid_argument);
}

TEST_CASE("labeling agrees with a flood-fill oracle")
{
    std::mt19937_64 rng(23);
    for (int t = 0; t < 40; ++t)
    {
        const auto m = random_mask(rng, 64, 64, 0.15 + 0.01 * t);
        for (int conn : {4, 8})
        {
            const auto got = label_regions(m, conn, 1);
            const auto ref = flood_fill(m, conn);
            REQUIRE(got.regions.size() == ref.size());
            // Same partition: map each oracle region onto one label.
            for (const auto &region : ref)
            {
                const int l = got.labels(region.begin()->first, region.begin()->second);
                CHECK(got.regions[static_cast<std::size_t>(l - 1)].size() == region.size());
                for (const auto &[d, a] : region)
                    CHECK(got.labels(d, a) == l);
            }
            // Labels follow raster order of first pixels.
            for (std::size_t i = 1; i < got.regions.size(); ++i)
            {
                const auto &p = got.regions[i - 1].front(), &q = got.regions[i].front();
                CHECK(std::make_pair(p.delay_bin, p.angle_bin) < std::make_pair(q.delay_bin, q.angle_bin));
            }
        }
    }
}

TEST_CASE("labeling invariants")
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t)
    {
        const auto m = random_mask(rng, 20, 36, 0.3);
        std::size_t set_bits = 0;
        for (auto v : m.data())
            set_bits += v;
        std::size_t total = 0;
        const auto r = label_regions(m, 8, 3);
        for (const auto &g : r.regions)
            total += g.size();
        CHECK(total <= set_bits);
        std::size_t all = 0;
        for (const auto &g : label_regions(m, 8, 1).regions)
            all += g.size();
        CHECK(all == set_bits);

        BinaryMask shifted(m.rows(), m.cols(), 0);
        for (std::size_t d = 0; d < m.rows(); ++d)
            for (std::size_t a = 0; a < m.cols(); ++a)
                shifted(d, (a + 7) % m.cols()) = m(d, a);
        CHECK(region_sizes(label_regions(shifted, 8, 3)) == region_sizes(r));
    }
}

TEST_CASE("mpc assignment")
{
    SounderConfig cfg;
    cfg.arm_radius_m = 0.0;
    cfg.n_freq = 101;
    cfg.f_stop = cfg.f_start + 100 * 10e6;
    cfg.n_angles = 36;
    cfg.angle_step_deg = 10.0;
    BinaryMask m(cfg.n_freq, cfg.n_angles, 0);
    for (std::size_t d = 10; d < 14; ++d)
        for (std::size_t a = 3; a < 5; ++a)
            m(d, a) = 1;
    const auto regions = label_regions(m, 8, 1);
    REQUIRE(regions.regions.size() == 1);

    auto at = [&](double bin, double angle_deg) {
        TaggedMpc t;
        t.mpc = {cplx(1e-5, 0.0), bin * cfg.delay_bin(), deg2rad(angle_deg)};
        return t;
    };
    const std::vector<TaggedMpc> mpcs = {at(11, 30), at(15, 50), at(17, 30), at(5, 200)};
    const auto clusters = assign_mpcs_to_clusters(regions, mpcs, cfg, 4);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].id == 1);
    CHECK(clusters[0].trx_id == 4);
    REQUIRE(clusters[0].members.size() == 2); // centre bin and 2-bin fallback; 3 bins away is dropped
    CHECK(clusters[0].bins.size() == 8);
    CHECK(clusters[0].centroid_delay_s == doctest::Approx(13.0 * cfg.delay_bin()));

    // The arm offset shifts the PADP peak earlier by 2 r / c.
    cfg.arm_radius_m = 0.2;
    const Mpc shifted{cplx(1.0, 0.0), 11 * cfg.delay_bin() + 0.4 / kSpeedOfLight, deg2rad(31.0)};
    const auto bin = mpc_grid_bin(shifted, cfg);
    REQUIRE(bin);
    CHECK(bin->delay_bin == 11);
    CHECK(bin->angle_bin == 3);
}

TEST_CASE("flat wall scene concentrates in one cluster")
{
    // Grazing-angle diffuse MPCs sit several delay bins apart and may form
    // small satellite regions; the specular cluster must hold the bulk of
    // the wall's detected power.
    Scene s;
    geometry::Reflector wall;
    wall.distance_m = 1.2;
    wall.azimuth_deg = 90.0;
    wall.span_deg = 140.0;
    s.reflectors.push_back(wall);
    s.trx_positions.push_back({});
    const auto k = StructuringElement::rectangle(3, 3);
    int good = 0;
    constexpr int kSeeds = 10;
    for (int seed = 0; seed < kSeeds; ++seed)
    {
        const auto mpcs = scene_to_mpcs(s, 0, static_cast<std::uint64_t>(seed));
        const auto cfr = add_noise(synthesize_cfr(mpcs, s.config), -90.0, static_cast<std::uint64_t>(seed));
        const auto padp = cir_to_padp(cfr_to_cir(cfr));
        const auto regions = label_regions(morph_close(binarize_padp(padp, estimate_noise_floor(padp)), k));
        const auto clusters = assign_mpcs_to_clusters(regions, mpcs, s.config);
        double total = 0.0, main = 0.0;
        int with_specular = 0;
        for (const auto &c : clusters)
        {
            double p = 0.0;
            bool spec = false;
            for (const auto &m : c.members)
            {
                p += std::norm(m.mpc.amplitude);
                spec = spec || m.tag == MpcTag::specular;
            }
            total += p;
            if (spec)
            {
                ++with_specular;
                main = p;
            }
        }
        good += with_specular == 1 && main >= 0.97 * total;
    }
    CHECK(good == kSeeds);
}
