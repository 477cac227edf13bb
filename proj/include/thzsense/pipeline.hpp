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

#ifndef THZSENSE_PIPELINE_HPP
#define THZSENSE_PIPELINE_HPP

#include "thzsense/characterization.hpp"
#include "thzsense/clustering.hpp"
#include "thzsense/estimation.hpp"
#include "thzsense/inference.hpp"
#include "thzsense/spectral.hpp"
#include "thzsense/synthesis.hpp"

#include <cstdint>
#include <vector>

namespace thz
{

struct PipelineOptions
{
    EstimatorOptions estimator{.max_paths = 400};
    double binarize_margin_db = 10.0;
    int element_delay_extent = 3;
    int element_angle_extent = 3;
    int connectivity = 8;
    std::size_t n_min = 4;
    AssignOptions assign;
    SplitOptions split;
    ReportOptions report;
    SynthesisOptions synthesis;
    // Worker threads, spread over TRx positions first; results do not depend on it.
    unsigned threads = 1;
};

struct TrxAnalysis
{
    std::size_t trx_id = 0;
    std::vector<PathEstimate> estimates;
    PadpGrid padp;
    double noise_floor_db = 0.0;
    LabeledRegions regions;
    // Tagged, loss-annotated and metric-complete.
    std::vector<ClusterRecord> clusters;
};

// Power (dB) of the weakest estimate: the observability floor handed to material inference.
double detection_floor_db(const std::vector<PathEstimate> &estimates);

// Estimation, PADP clustering, MPC assignment, specular/diffuse split and metrics for one CFR.
TrxAnalysis analyze_cfr(const CfrTensor &cfr, const PipelineOptions &opts = {});

// Noisy CFR of one TRx position: synthesized scene MPCs plus noise at the config floor.
CfrTensor simulate_trx(const Scene &scene, std::size_t trx_id, std::uint64_t seed,
                       const SynthesisOptions &synthesis = {}, std::vector<TaggedMpc> *truth = nullptr);

// Simulate, analyze and report every TRx position of a scene.
EnvironmentReport run_scene_report(const Scene &scene, std::uint64_t seed, const PipelineOptions &opts = {},
                                   std::vector<TrxAnalysis> *analyses = nullptr);

} // namespace thz

#endif
