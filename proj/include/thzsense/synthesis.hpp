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

#ifndef THZSENSE_SYNTHESIS_HPP
#define THZSENSE_SYNTHESIS_HPP

#include "thzsense/core.hpp"
#include "thzsense/geometry.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace thz
{

struct Scene
{
    std::vector<geometry::Reflector> reflectors;
    std::vector<geometry::Point2> trx_positions;
    SounderConfig config;
    std::vector<MaterialModel> material_db = default_material_db();

    // Throws DataError for empty reflector/TRx lists or unknown materials,
    // std::invalid_argument for invalid reflector or config parameters.
    void validate() const;
};

// Directional CFR H(f_k, theta_n), one row per rotation angle.
struct CfrTensor
{
    Matrix<cplx> values; // n_angles x n_freq
    SounderConfig config;
    std::size_t trx_id = 0;
};

struct SynthesisOptions
{
    bool include_diffuse = true;
    // Multiplies the median-centred Weibull jitter added to each diffuse loss.
    double jitter_scale = 0.25;
};

// Gaussian main lobe floored at the sidelobe level, as a linear power ratio.
double antenna_gain(const AntennaModel &antenna, double offset_rad);
double antenna_gain_dbi(const AntennaModel &antenna, double offset_rad);

// One specular MPC per reflector with a visible normal-incidence point and
// one diffuse MPC per degree of the material's diffuse span, cast onto the
// surface. Amplitudes satisfy 20 log10|alpha| = -(FSPL + loss).
std::vector<TaggedMpc> scene_to_mpcs(const Scene &scene, std::size_t trx_id, std::uint64_t seed,
                                     const SynthesisOptions &opts = {});

std::vector<Mpc> untagged(std::span<const TaggedMpc> mpcs);

// H = sum alpha e^{-j2 pi f tau} e^{j4 pi f r cos(phi - theta)/c} G(phi - theta).
// Throws NumericalError for delays outside [0, max_delay).
CfrTensor synthesize_cfr(std::span<const Mpc> mpcs, const SounderConfig &config, unsigned threads = 1);
CfrTensor synthesize_cfr(std::span<const TaggedMpc> mpcs, const SounderConfig &config, unsigned threads = 1);

// Adds i.i.d. complex Gaussian noise whose PADP median sits at floor_db.
// A floor of -inf returns the input unchanged.
CfrTensor add_noise(const CfrTensor &cfr, double floor_db, std::uint64_t seed);

// Noise variance per CFR bin for a PADP median of floor_db.
double noise_variance_for_floor(double floor_db, std::size_t n_freq);

struct StochasticCluster
{
    ClusterRecord record;
    double delay_spread_s = 0.0;
    double angular_spread_rad = 0.0;
    std::string material;
};

// Location of N(mu', sigma) such that max(round(x), 1) has mean mu.
double calibrated_count_location(const NormalParams &count);

// Clusters of one specular and round(angular width) diffuse MPCs. Member
// offsets are drawn zero-mean normal and rescaled so each cluster's
// power-weighted spreads equal the drawn lognormal values.
std::vector<StochasticCluster> draw_stochastic_clusters(const ScenarioStats &stats,
                                                        const std::vector<MaterialModel> &material_db,
                                                        const SounderConfig &config, std::uint64_t seed);

} // namespace thz

#endif
