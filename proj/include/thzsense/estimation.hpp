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

#ifndef THZSENSE_ESTIMATION_HPP
#define THZSENSE_ESTIMATION_HPP

#include "thzsense/core.hpp"
#include "thzsense/synthesis.hpp"

#include <span>
#include <vector>

namespace thz
{

struct EstimatorOptions
{
    std::size_t max_paths = 64;
    // Stop once a candidate falls this far below the strongest path.
    double dynamic_range_db = 40.0;
    // Halvings of the native (delay bin, angle step) grid after the coarse peak.
    int grid_refine_levels = 2;
    // Parabolic polish rounds after the grid halvings.
    int polish_rounds = 3;
    // Candidate peaks must exceed the median of the initial coarse map by this margin.
    double detection_margin_db = 10.0;
    // Cyclic re-refinement passes over all paths after detection.
    int refine_sweeps = 1;
    // Sweeps stop early once no amplitude changes by more than this fraction.
    double convergence_tol = 1e-6;
    unsigned threads = 1;

    void validate() const;
};

struct PathEstimate
{
    Mpc mpc;
    double residual_power_db_after = 0.0;
};

// Normalized matched-filter power
// |sum_{f,theta} H conj(a(tau, phi))|^2 / sum |a|^2 with
// a = e^{-j2 pi f (tau - 2 r cos(phi - theta) / c)} G(phi - theta).
// Result is indexed [delay][angle]. Throws std::invalid_argument on empty grids.
Matrix<double> beamform_spectrum(const CfrTensor &cfr, std::span<const double> delay_grid,
                                 std::span<const double> angle_grid, unsigned threads = 1);

// Successive interference cancellation with local refinement and closed-form
// least-squares amplitudes. Sorted by descending |alpha|.
std::vector<PathEstimate> estimate_paths(const CfrTensor &cfr, const EstimatorOptions &opts = {});

// Estimates as (amplitude, delay, azimuth) paths.
MpcSet to_mpc_set(const std::vector<PathEstimate> &estimates, std::size_t trx_id = 0);

} // namespace thz

#endif
