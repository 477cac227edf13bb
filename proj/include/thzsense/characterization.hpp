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

#ifndef THZSENSE_CHARACTERIZATION_HPP
#define THZSENSE_CHARACTERIZATION_HPP

#include "thzsense/core.hpp"

#include <span>
#include <variant>
#include <vector>

namespace thz
{

// Free-space path loss 20 log10(4 pi f d / c) in dB.
double fspl(double fc_hz, double distance_m);

// Path loss -20 log10|alpha| in excess of the FSPL over the round-trip
// distance tau * c, in dB.
double reflection_loss(const Mpc &mpc, double fc_hz);

struct SplitOptions
{
    double cutoff_db = 18.0;
    double margin_db = 5.0;
};

// Tags from losses: the minimum-loss entry is specular iff below the cutoff,
// and so is every other entry within the margin of it.
std::vector<MpcTag> split_by_loss(std::span<const double> losses_db, const SplitOptions &opts = {});

// Fills member loss_db from the path gains and re-tags every member.
void split_specular_diffuse(ClusterRecord &cluster, double fc_hz, const SplitOptions &opts = {});

enum class SpreadConvention
{
    circular,
    linear_rms
};

// Depth, width (smallest enclosing arc), power-weighted delay and angular
// spreads and tag counts of the members. Powers are |alpha|^2.
ClusterMetrics cluster_metrics(const ClusterRecord &cluster, SpreadConvention angle = SpreadConvention::circular);

// sqrt(-2 ln R) for the weighted mean resultant length R. 1 - R^2 is summed
// over member pairs so tight clusters keep full relative precision.
double circular_spread(std::span<const double> azimuth_rad, std::span<const double> weights);

// Population RMS deviation about the mean.
double rms_surface_height(std::span<const double> heights_m);

enum class DistributionFamily
{
    normal,
    lognormal,
    weibull
};

const char *to_string(DistributionFamily f);

struct DistributionFit
{
    DistributionFamily family = DistributionFamily::normal;
    std::variant<NormalParams, LognormalParams, WeibullParams> params;
    double log_likelihood = 0.0;
    std::size_t n = 0;
};

// Maximum-likelihood fit. Normal and lognormal are closed form; the Weibull
// shape solves the profile score equation by safeguarded Newton iteration.
// Throws DataError on fewer than 3 samples, zero variance, or nonpositive
// samples for the log families.
DistributionFit fit_distribution(std::span<const double> samples, DistributionFamily family);

struct ClusterCountFit
{
    std::vector<double> counts;
    NormalParams normal;
    double log_likelihood = 0.0;
};

// Per-TRx cluster counts and their normal MLE. Needs >= 3 TRx positions.
ClusterCountFit count_clusters(const std::vector<std::vector<ClusterRecord>> &clusters_per_trx);

} // namespace thz

#endif
