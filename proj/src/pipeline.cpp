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

#include "thzsense/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <exception>
#include <mutex>
#include <thread>

namespace thz
{

double detection_floor_db(const std::vector<PathEstimate> &estimates)
{
    double floor = std::numeric_limits<double>::infinity();
    for (const auto &e : estimates)
        floor = std::min(floor, e.mpc.power_db());
    return std::isfinite(floor) ? floor : -std::numeric_limits<double>::infinity();
}

TrxAnalysis analyze_cfr(const CfrTensor &cfr, const PipelineOptions &opts)
{
    TrxAnalysis out;
    out.trx_id = cfr.trx_id;
    EstimatorOptions eo = opts.estimator;
    eo.threads = opts.threads;
    out.estimates = estimate_paths(cfr, eo);

    out.padp = cir_to_padp(cfr_to_cir(cfr));
    out.noise_floor_db = estimate_noise_floor(out.padp);
    const auto element = StructuringElement::rectangle(opts.element_delay_extent, opts.element_angle_extent);
    out.regions = label_regions(morph_close(binarize_padp(out.padp, out.noise_floor_db, opts.binarize_margin_db), element),
                                opts.connectivity, opts.n_min);

    std::vector<TaggedMpc> mpcs;
    mpcs.reserve(out.estimates.size());
    for (const auto &e : out.estimates)
        mpcs.push_back({e.mpc, MpcTag::diffuse, 0, 0.0});
    out.clusters = assign_mpcs_to_clusters(out.regions, mpcs, cfr.config, cfr.trx_id, opts.assign);
    const double floor_db = detection_floor_db(out.estimates);
    for (auto &c : out.clusters)
    {
        c.detection_floor_db = floor_db;
        split_specular_diffuse(c, cfr.config.center_freq(), opts.split);
        c.metrics = cluster_metrics(c);
    }
    return out;
}

CfrTensor simulate_trx(const Scene &scene, std::size_t trx_id, std::uint64_t seed, const SynthesisOptions &synthesis,
                       std::vector<TaggedMpc> *truth)
{
    auto mpcs = scene_to_mpcs(scene, trx_id, seed, synthesis);
    CfrTensor cfr = synthesize_cfr(std::span<const TaggedMpc>(mpcs), scene.config);
    cfr = add_noise(cfr, scene.config.noise_floor_db, derive_seed(seed, 0x747278ULL, trx_id));
    cfr.trx_id = trx_id;
    if (truth)
        *truth = std::move(mpcs);
    return cfr;
}

EnvironmentReport run_scene_report(const Scene &scene, std::uint64_t seed, const PipelineOptions &opts,
                                   std::vector<TrxAnalysis> *analyses)
{
    scene.validate();
    const std::size_t n_trx = scene.trx_positions.size();
    std::vector<TrxAnalysis> results(n_trx);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(opts.threads, 1u), n_trx));
    PipelineOptions per = opts;
    if (workers > 1)
        per.threads = 1;

    // Each TRx is independent; results are stored by index so completion order is irrelevant.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&]() {
        for (std::size_t t = next++; t < n_trx; t = next++)
        {
            try
            {
                results[t] = analyze_cfr(simulate_trx(scene, t, seed, per.synthesis), per);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = n_trx;
            }
        }
    };
    if (workers <= 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto &th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<ClusterRecord> all;
    for (const auto &a : results)
        all.insert(all.end(), a.clusters.begin(), a.clusters.end());
    if (analyses)
        for (auto &a : results)
            analyses->push_back(std::move(a));
    return build_environment_report(all, scene.material_db, opts.report);
}

} // namespace thz
