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

#ifndef THZSENSE_IO_HPP
#define THZSENSE_IO_HPP

#include "thzsense/clustering.hpp"
#include "thzsense/core.hpp"
#include "thzsense/estimation.hpp"
#include "thzsense/spectral.hpp"
#include "thzsense/synthesis.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace thz::io
{

// ---- scene files --------------------------------------------------------
//
//   # comment
//   [config]            f_start_hz, f_stop_hz, n_freq, angle_start_deg,
//                       angle_step_deg, n_angles, arm_radius_m, noise_floor_db,
//                       antenna_peak_gain_dbi, antenna_hpbw_deg,
//                       antenna_sidelobe_floor_dbr, antenna_isotropic
//   [material NAME]     specular_mu_db, specular_sigma_db, diffuse_shape,
//                       diffuse_scale_db, lambertian_slope_db,
//                       lambertian_intercept_db, roughness_rank,
//                       diffuse_span_deg, lambertian_measured
//   [reflector]         kind, distance_m, b_m, azimuth_deg, span_deg,
//                       arm_length_m, radius_m, material
//   [trx]               x_m, y_m
//
// Omitted keys keep their defaults; a material section naming a built-in
// material overrides only the keys it lists, a new material must list the
// specular and diffuse keys. Errors are DataError "line N: ...".

Scene parse_scene(const std::string &text);
Scene load_scene(const std::filesystem::path &path);
// Canonical text; parse_scene(serialize_scene(s)) reproduces s exactly.
std::string serialize_scene(const Scene &scene);

// ---- CFR files ----------------------------------------------------------
//
// "THZCFR1", version u8 = 1, n_freq u32, n_angles u32, f_start f64,
// f_stop f64, arm_radius f64, angle_step f64 (little-endian), then
// angle-major complex32 (re, im) pairs. Fields absent from the header
// (angle start, antenna, noise floor) take their defaults on reading.

inline constexpr char kCfrMagic[8] = "THZCFR1";
inline constexpr std::uint8_t kCfrVersion = 1;

void write_cfr(std::ostream &os, const CfrTensor &cfr);
CfrTensor read_cfr(std::istream &is);
void write_cfr(const std::filesystem::path &path, const CfrTensor &cfr);
CfrTensor read_cfr(const std::filesystem::path &path);

// ---- CSV ----------------------------------------------------------------

// trx,amplitude_db,phase_deg,delay_ns,azimuth_deg
void write_mpc_csv(std::ostream &os, const std::vector<PathEstimate> &estimates, std::size_t trx_id = 0);
// trx,reflector,tag,loss_db,amplitude_db,phase_deg,delay_ns,azimuth_deg
void write_truth_csv(std::ostream &os, const std::vector<TaggedMpc> &mpcs, std::size_t trx_id);
// Reads the columns of either layout; missing tag/loss/reflector keep defaults.
std::vector<TaggedMpc> read_mpc_csv(std::istream &is, std::vector<std::size_t> *trx_ids = nullptr);

PadpGrid read_padp_csv(std::istream &is);

// label,delay_bin,angle_bin
void write_regions_csv(std::ostream &os, const LabeledRegions &regions);
LabeledRegions read_regions_csv(std::istream &is, std::size_t n_delay, std::size_t n_angles);

// trx,cluster,n_members,n_specular,n_diffuse,centroid_delay_ns,centroid_azimuth_deg,
// delay_depth_ns,angular_width_deg,delay_spread_ns,angular_spread_deg
void write_metrics_csv(std::ostream &os, const std::vector<ClusterRecord> &clusters);
// trx,cluster,reflector,tag,loss_db,amplitude_db,phase_deg,delay_ns,azimuth_deg
void write_members_csv(std::ostream &os, const std::vector<ClusterRecord> &clusters);
std::vector<ClusterRecord> read_members_csv(std::istream &is);

std::string read_text(const std::filesystem::path &path);
void write_text(const std::filesystem::path &path, const std::string &text);

} // namespace thz::io

#endif
