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

#ifndef THZSENSE_INFERENCE_HPP
#define THZSENSE_INFERENCE_HPP

#include "thzsense/core.hpp"
#include "thzsense/geometry.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thz
{

// ---- roughness ----------------------------------------------------------

// p(dtheta) = slope * cos^2(dtheta) + intercept, in dB.
struct LambertianFit
{
    double slope_db = 0.0;
    double intercept_db = 0.0;
    double rms_residual_db = 0.0;
    std::size_t n_points = 0;
};

// Diffuse powers are taken as reference_loss_db - loss_db (so 0 dB is the
// specular level when the reference is the specular loss), summed linearly
// per 1 degree azimuth bin and regressed on cos^2(specular - bin azimuth).
// Throws DataError when fewer than two distinct bins are occupied.
LambertianFit fit_lambertian(std::span<const TaggedMpc> diffuse, double specular_azimuth_rad,
                             double reference_loss_db = 0.0);

struct RoughnessIndicators
{
    std::size_t n_diffuse = 0;
    double angular_span_deg = 0.0;
    LambertianFit lambertian;
};

// Indicators from the diffuse members of a tagged cluster (loss_db filled).
// The reference direction and loss come from the lowest-loss specular
// member, or the lowest-loss member when none is specular.
// Throws DataError with fewer than two diffuse members.
RoughnessIndicators roughness_indicators(const ClusterRecord &cluster);

// Majority vote of (more diffuse MPCs, wider span, lower slope).
bool rougher_than(const RoughnessIndicators &a, const RoughnessIndicators &b);

// ---- structure ----------------------------------------------------------

struct StructureClassification
{
    geometry::ReflectorKind kind = geometry::ReflectorKind::flat_wall;
    geometry::TemplateFit best;
    // Indexed like geometry::kAllKinds.
    std::array<geometry::TemplateFit, 4> fits;
    std::array<double, 4> bic{};
};

// Fits every template and picks the lowest BIC
// n ln(max(RSS / n, (1 fs)^2)) + k ln n; ties go flat < cylinder < corners.
// Throws DataError for fewer than 4 points or 3 distinct azimuths.
StructureClassification classify_structure(std::span<const geometry::SignatureSample> points);

// Signature points of a cluster's diffuse members.
std::vector<geometry::SignatureSample> diffuse_points(const ClusterRecord &cluster);

// ---- material -----------------------------------------------------------

struct MaterialLikelihood
{
    std::string material;
    double log_likelihood = 0.0;
    double posterior = 0.0;
};

enum class DiffuseEvidence
{
    // Mean diffuse log density: the diffuse members count as one observation.
    pooled,
    // Sum over diffuse members, treating them as independent.
    independent
};

// Specular normal plus diffuse Weibull log densities of the member losses per
// material; uniform-prior posteriors, descending.
// Throws DataError for an empty cluster or material list.
std::vector<MaterialLikelihood> classify_material(const ClusterRecord &cluster,
                                                  const std::vector<MaterialModel> &material_db,
                                                  DiffuseEvidence evidence = DiffuseEvidence::pooled);

// Posteriors from log-likelihoods by a shifted softmax. All -inf gives uniform.
std::vector<double> softmax_posteriors(std::span<const double> log_likelihoods);

// ---- report -------------------------------------------------------------

struct ReportOptions
{
    // Clusters with fewer members are fragments, not reflectors.
    std::size_t min_reflector_members = 3;
    // Structure is classified only with this many diffuse points at distinct azimuths;
    // every template has three free parameters, so fewer leave almost no residual to compare.
    std::size_t min_structure_points = 6;
    DiffuseEvidence evidence = DiffuseEvidence::pooled;
};

struct ReflectorEntry
{
    std::size_t trx_id = 0;
    std::size_t cluster_id = 0;
    double delay_s = 0.0;
    double azimuth_rad = 0.0;
    double power_db = 0.0;
    std::size_t n_members = 0;
};

struct RoughnessEntry
{
    std::size_t trx_id = 0;
    std::size_t cluster_id = 0;
    RoughnessIndicators indicators;
    // 1 = roughest.
    std::size_t rank = 0;
};

struct StructureEntry
{
    std::size_t trx_id = 0;
    std::size_t cluster_id = 0;
    StructureClassification classification;
};

struct MaterialEntry
{
    std::size_t trx_id = 0;
    std::size_t cluster_id = 0;
    std::vector<MaterialLikelihood> ranked;
};

struct EnvironmentReport
{
    std::vector<ReflectorEntry> level1;
    std::vector<RoughnessEntry> level2;
    std::vector<StructureEntry> level3;
    std::vector<MaterialEntry> level4;
    std::size_t n_fragments = 0;

    std::size_t reflector_count() const { return level1.size(); }
};

// Clusters must be tagged (split_specular_diffuse). Levels 2-4 are filled for
// the reflectors whose data meet each operation's preconditions.
EnvironmentReport build_environment_report(const std::vector<ClusterRecord> &clusters,
                                           const std::vector<MaterialModel> &material_db,
                                           const ReportOptions &opts = {});

std::string report_to_json(const EnvironmentReport &report);
std::string report_to_text(const EnvironmentReport &report);

} // namespace thz

#endif
