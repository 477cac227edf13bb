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

#ifndef THZSENSE_CLUSTERING_HPP
#define THZSENSE_CLUSTERING_HPP

#include "thzsense/core.hpp"
#include "thzsense/spectral.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

// Image-processing cluster identification on delay-angle grids. Masks are
// indexed (delay_bin, angle_bin). The angle axis wraps; the delay axis is
// bounded, with no foreground beyond either end.

namespace thz
{

using BinaryMask = Matrix<std::uint8_t>;

struct StructuringElement
{
    // (delta_delay, delta_angle) offsets; must contain (0, 0).
    std::vector<std::pair<int, int>> offsets;

    static StructuringElement rectangle(int delay_extent, int angle_extent);
    void validate() const;
    bool symmetric() const;
};

// bit = 1 iff PADP > floor + margin.
BinaryMask binarize_padp(const PadpGrid &padp, double noise_floor_db, double margin_db = 10.0);

// {z | (K* + z) intersects A}
BinaryMask dilate(const BinaryMask &mask, const StructuringElement &k);
// {z | K + z lies inside A}; positions of K + z beyond the delay ends are not tested.
BinaryMask erode(const BinaryMask &mask, const StructuringElement &k);
BinaryMask morph_close(const BinaryMask &mask, const StructuringElement &k);

struct LabeledRegions
{
    Matrix<int> labels; // 0 = background, regions numbered from 1
    std::vector<std::vector<GridBin>> regions; // regions[i] holds label i + 1, raster order
};

// Union-find labeling. Regions smaller than n_min are dropped; survivors are
// numbered by the raster position of their first bin.
LabeledRegions label_regions(const BinaryMask &mask, int connectivity = 8, std::size_t n_min = 4);

struct AssignOptions
{
    // Chebyshev search radius, in bins, when an MPC falls on background.
    int radius_bins = 2;
};

// Grid bin at which an MPC peaks in the PADP: delay tau - 2 r / c, angle phi.
std::optional<GridBin> mpc_grid_bin(const Mpc &mpc, const SounderConfig &config);

// One record per region that receives at least one MPC; record id = label.
// Unassigned MPCs are dropped.
std::vector<ClusterRecord> assign_mpcs_to_clusters(const LabeledRegions &regions, std::span<const TaggedMpc> mpcs,
                                                   const SounderConfig &config, std::size_t trx_id = 0,
                                                   const AssignOptions &opts = {});

} // namespace thz

#endif
