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

#include "thzsense/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace thz;

namespace
{

SounderConfig iso_config(std::size_t n_angles = 8)
{
    SounderConfig c;
    c.n_angles = n_angles;
    c.angle_step_deg = 360.0 / static_cast<double>(n_angles);
    c.antenna.isotropic = true;
    c.arm_radius_m = 0.0;
    return c;
}

std::size_t argmax_row(const CirTensor &cir, std::size_t row)
{
    const cplx *r = cir.values.row(row);
    return static_cast<std::size_t>(
        std::max_element(r, r + cir.values.cols(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); }) - r);
}

} // namespace

TEST_CASE("unit CFR gives a unit impulse")
{
    const auto cfg = iso_config();
    const std::vector<Mpc> m = {{cplx(1.0, 0.0), 0.0, 0.0}};
    const auto cir = cfr_to_cir(synthesize_cfr(m, cfg));
    REQUIRE(cir.delay_axis.size() == cfg.n_freq);
    for (std::size_t a = 0; a < cfg.n_angles; ++a)
        for (std::size_t k = 0; k < cfg.n_freq; ++k)
            CHECK(std::abs(cir.values(a, k) - (k == 0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0))) < 1e-12);
}

TEST_CASE("delay bins")
{
    const auto cfg = iso_config(4);
    CHECK(cfg.delay_bin() == doctest::Approx(1.0 / (2001.0 * 10e6)));
    const std::vector<Mpc> nominal = {{cplx(1.0, 0.0), 8e-9, 0.0}};
    CHECK(argmax_row(cfr_to_cir(synthesize_cfr(nominal, cfg)), 0) == 160);

    const double tau = 160.0 * cfg.delay_bin();
    const std::vector<Mpc> on_grid = {{std::polar(0.3, 1.1), tau, 0.0}};
    const auto cir = cfr_to_cir(synthesize_cfr(on_grid, cfg));
    CHECK(argmax_row(cir, 2) == 160);
    CHECK(std::abs(cir.values(2, 160)) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(cir.delay_axis[160] == doctest::Approx(tau).epsilon(1e-12));
}

TEST_CASE("on-grid magnitude equals alpha times the antenna gain")
{
    SounderConfig cfg;
    cfg.arm_radius_m = 0.0;
    cfg.n_angles = 36;
    cfg.angle_step_deg = 1.0;
    const double tau = 300.0 * cfg.delay_bin();
    const std::vector<Mpc> m = {{std::polar(1e-5, 0.2), tau, deg2rad(17.0)}};
    const auto cir = cfr_to_cir(synthesize_cfr(m, cfg));
    for (std::size_t a = 0; a < cfg.n_angles; ++a)
    {
        const double g = antenna_gain(cfg.antenna, deg2rad(17.0) - cfg.angle_rad(a));
        CHECK(std::abs(cir.values(a, 300)) == doctest::Approx(1e-5 * g).epsilon(1e-9));
    }
}

TEST_CASE("parseval and reconstruction")
{
    SounderConfig cfg;
    cfg.n_angles = 6;
    cfg.angle_step_deg = 60.0;
    const std::vector<Mpc> m = {{std::polar(1e-4, 0.3), 8.37e-9, 0.5}, {std::polar(2e-5, 2.0), 14.01e-9, 4.0}};
    const auto h = synthesize_cfr(m, cfg);
    for (Window w : {Window::rectangular, Window::hann})
    {
        const auto cir = cfr_to_cir(h, w);
        const auto back = cir_to_cfr(cir);
        for (std::size_t a = 0; a < cfg.n_angles; ++a)
        {
            double eh = 0.0, ec = 0.0, err = 0.0, ref = 0.0;
            for (std::size_t k = 0; k < cfg.n_freq; ++k)
            {
                const double wk = w == Window::hann ? 0.5 * (1.0 - std::cos(kTwoPi * k / (cfg.n_freq - 1.0))) : 1.0;
                const cplx hw = h.values(a, k) * wk;
                eh += std::norm(hw);
                ec += std::norm(cir.values(a, k));
                err = std::max(err, std::abs(back.values(a, k) - hw));
                ref = std::max(ref, std::abs(hw));
            }
            CHECK(std::abs(eh / static_cast<double>(cfg.n_freq) - ec) < 1e-10 * ec);
            CHECK(err < 1e-10 * ref);
        }
    }
    CHECK(parse_window("hann") == Window::hann);
    CHECK_THROWS_AS(parse_window("kaiser"), std::invalid_argument);
}

TEST_CASE("padp levels")
{
    CirTensor cir;
    cir.config.n_angles = 1;
    cir.values = Matrix<cplx>(1, 3);
    cir.values(0, 0) = 1.0;
    cir.values(0, 1) = cplx(0.0, 0.1);
    cir.delay_axis = {0.0, 1.0, 2.0};
    const auto p = cir_to_padp(cir);
    REQUIRE(p.values_db.rows() == 3);
    REQUIRE(p.values_db.cols() == 1);
    CHECK(p.values_db(0, 0) == 0.0);
    CHECK(p.values_db(1, 0) == doctest::Approx(-20.0));
    CHECK(p.values_db(2, 0) == kPadpSentinelDb);

    SounderConfig cfg;
    cfg.n_angles = 4;
    cfg.angle_step_deg = 90.0;
    const std::vector<Mpc> m = {{std::polar(1e-4, 0.3), 8.37e-9, 0.5}};
    auto h = synthesize_cfr(m, cfg);
    const auto p1 = cir_to_padp(cfr_to_cir(h));
    for (auto &v : h.values.data())
        v *= 3.0;
    const auto p3 = cir_to_padp(cfr_to_cir(h));
    for (std::size_t i = 0; i < p1.values_db.size(); ++i)
        CHECK(p3.values_db.data()[i] - p1.values_db.data()[i] == doctest::Approx(20.0 * std::log10(3.0)).epsilon(1e-9));
}

TEST_CASE("noise floor estimation")
{
    SounderConfig cfg; // 2001 x 360
    CfrTensor zero;
    zero.config = cfg;
    zero.values = Matrix<cplx>(cfg.n_angles, cfg.n_freq);
    const auto noise = add_noise(zero, -90.0, 4);
    const double floor_noise = estimate_noise_floor(cir_to_padp(cfr_to_cir(noise)));
    CHECK(std::abs(floor_noise + 90.0) < 1.0);

    // A strong wall return leaves the estimate in place.
    const std::vector<Mpc> m = {{std::polar(1e-5, 0.0), 8e-9, deg2rad(90.0)}};
    auto with_path = synthesize_cfr(m, cfg);
    for (std::size_t i = 0; i < with_path.values.size(); ++i)
        with_path.values.data()[i] += noise.values.data()[i];
    const double floor_path = estimate_noise_floor(cir_to_padp(cfr_to_cir(with_path)));
    CHECK(std::abs(floor_path - floor_noise) < 0.2);

    PadpGrid flat;
    flat.values_db = Matrix<double>(10, 4, -50.0);
    CHECK(estimate_noise_floor(flat) == -50.0);
    PadpGrid empty;
    empty.values_db = Matrix<double>(3, 3, kPadpSentinelDb);
    CHECK_THROWS_AS(estimate_noise_floor(empty), DataError);
}

TEST_CASE("padp csv")
{
    PadpGrid p;
    p.values_db = Matrix<double>(2, 2, -60.0);
    p.delay_axis = {0.0, 0.05e-9};
    p.angle_axis = {0.0, deg2rad(1.0)};
    std::ostringstream os;
    write_padp_csv(os, p);
    CHECK(os.str() == "delay_ns,0.000000,1.000000\n0.000000,-60.0000,-60.0000\n0.050000,-60.0000,-60.0000\n");
}
