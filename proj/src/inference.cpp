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

#include "thzsense/inference.hpp"

#include "thzsense/characterization.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace thz
{

namespace
{

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t distinct_azimuths(std::span<const geometry::SignatureSample> pts)
{
    std::vector<double> az;
    az.reserve(pts.size());
    for (const auto &p : pts)
        az.push_back(p.azimuth_rad);
    std::sort(az.begin(), az.end());
    return static_cast<std::size_t>(
        std::unique(az.begin(), az.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }) - az.begin());
}

const TaggedMpc *reference_member(const ClusterRecord &c)
{
    const TaggedMpc *best = nullptr;
    for (const auto &m : c.members)
        if (m.tag == MpcTag::specular && (!best || m.loss_db < best->loss_db))
            best = &m;
    if (best)
        return best;
    for (const auto &m : c.members)
        if (!best || m.loss_db < best->loss_db)
            best = &m;
    return best;
}

} // namespace

// ---- roughness ----------------------------------------------------------

LambertianFit fit_lambertian(std::span<const TaggedMpc> diffuse, double specular_azimuth_rad,
                             double reference_loss_db)
{
    std::map<long, double> bins;
    for (const auto &m : diffuse)
    {
        const long key = std::lround(rad2deg(wrap_2pi(m.mpc.azimuth_rad))) % 360;
        bins[key] += std::pow(10.0, (reference_loss_db - m.loss_db) / 10.0);
    }
    if (bins.size() < 2)
        throw DataError("fit_lambertian: diffuse MPCs occupy fewer than two azimuth bins");

    std::vector<double> x, y;
    for (const auto &[key, p] : bins)
    {
        const double c = std::cos(wrap_pi(specular_azimuth_rad - deg2rad(static_cast<double>(key))));
        x.push_back(c * c);
        y.push_back(10.0 * std::log10(p));
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 1e-15))
        throw DataError("fit_lambertian: bins carry no spread in cos^2 of the offset angle");

    LambertianFit fit;
    fit.slope_db = sxy / sxx;
    fit.intercept_db = my - fit.slope_db * mx;
    fit.n_points = x.size();
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double r = y[i] - (fit.slope_db * x[i] + fit.intercept_db);
        ss += r * r;
    }
    fit.rms_residual_db = std::sqrt(ss / n);
    return fit;
}

RoughnessIndicators roughness_indicators(const ClusterRecord &cluster)
{
    ClusterRecord diffuse;
    for (const auto &m : cluster.members)
        if (m.tag == MpcTag::diffuse)
            diffuse.members.push_back(m);
    if (diffuse.members.size() < 2)
        throw DataError("roughness_indicators: cluster has fewer than two diffuse MPCs");
    const TaggedMpc *ref = reference_member(cluster);

    RoughnessIndicators out;
    out.n_diffuse = diffuse.members.size();
    out.angular_span_deg = rad2deg(cluster_metrics(diffuse).angular_width_rad);
    out.lambertian = fit_lambertian(diffuse.members, ref->mpc.azimuth_rad, ref->loss_db);
    return out;
}

bool rougher_than(const RoughnessIndicators &a, const RoughnessIndicators &b)
{
    int votes = 0;
    votes += a.n_diffuse > b.n_diffuse ? 1 : 0;
    votes += a.angular_span_deg > b.angular_span_deg ? 1 : 0;
    votes += a.lambertian.slope_db < b.lambertian.slope_db ? 1 : 0;
    return votes >= 2;
}

// ---- structure ----------------------------------------------------------

StructureClassification classify_structure(std::span<const geometry::SignatureSample> points)
{
    if (points.size() < 4)
        throw DataError("classify_structure: need at least 4 diffuse points");
    if (distinct_azimuths(points) < 3)
        throw DataError("classify_structure: points must span at least 3 distinct azimuths");

    constexpr double kFloorVar = 1e-30; // (1 fs)^2
    const auto n = static_cast<double>(points.size());
    StructureClassification out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < geometry::kAllKinds.size(); ++i)
    {
        const auto kind = geometry::kAllKinds[i];
        geometry::TemplateFit fit = geometry::fit_structure_template(points, kind);
        const double var = std::max(fit.rms_residual_s * fit.rms_residual_s, kFloorVar);
        out.fits[i] = fit;
        out.bic[i] = n * std::log(var) + geometry::template_param_count(kind) * std::log(n);
        if (out.bic[i] < out.bic[best])
            best = i;
    }
    out.kind = geometry::kAllKinds[best];
    out.best = out.fits[best];
    return out;
}

std::vector<geometry::SignatureSample> diffuse_points(const ClusterRecord &cluster)
{
    std::vector<geometry::SignatureSample> pts;
    for (const auto &m : cluster.members)
        if (m.tag == MpcTag::diffuse)
            pts.push_back({m.mpc.azimuth_rad, m.mpc.delay_s});
    return pts;
}

// ---- material -----------------------------------------------------------

std::vector<double> softmax_posteriors(std::span<const double> ll)
{
    std::vector<double> out(ll.size(), 0.0);
    if (ll.empty())
        return out;
    const double mx = *std::max_element(ll.begin(), ll.end());
    if (!std::isfinite(mx))
    {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(ll.size()));
        return out;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < ll.size(); ++i)
        sum += out[i] = std::exp(ll[i] - mx);
    for (auto &p : out)
        p /= sum;
    return out;
}

std::vector<MaterialLikelihood> classify_material(const ClusterRecord &cluster,
                                                  const std::vector<MaterialModel> &material_db,
                                                  DiffuseEvidence evidence)
{
    if (cluster.members.empty())
        throw DataError("classify_material: empty cluster");
    if (material_db.empty())
        throw DataError("classify_material: empty material database");

    std::size_t n_diffuse = 0;
    for (const auto &m : cluster.members)
        n_diffuse += m.tag == MpcTag::diffuse ? 1 : 0;
    const double w = evidence == DiffuseEvidence::pooled && n_diffuse > 0 ? 1.0 / static_cast<double>(n_diffuse) : 1.0;

    std::vector<double> ll;
    for (const auto &mat : material_db)
    {
        double spec = 0.0, diff = 0.0;
        for (const auto &m : cluster.members)
            if (m.tag == MpcTag::specular)
                spec += mat.specular_loss.logpdf(m.loss_db);
            else if (!(m.loss_db > 0.0))
                diff = kNegInf;
            else
            {
                diff += mat.diffuse_loss.logpdf(m.loss_db);
                // Only losses below the one that would put the path at the floor are observable.
                if (std::isfinite(cluster.detection_floor_db) && std::abs(m.mpc.amplitude) > 0.0)
                {
                    const double cap = 20.0 * std::log10(std::abs(m.mpc.amplitude)) + m.loss_db -
                                       cluster.detection_floor_db;
                    diff -= mat.diffuse_loss.log_cdf(cap);
                }
            }
        const double s = spec + w * diff;
        ll.push_back(std::isnan(s) ? kNegInf : s);
    }
    const auto post = softmax_posteriors(ll);
    std::vector<MaterialLikelihood> out;
    for (std::size_t i = 0; i < material_db.size(); ++i)
        out.push_back({material_db[i].name, ll[i], post[i]});
    std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
        if (a.log_likelihood != b.log_likelihood)
            return a.log_likelihood > b.log_likelihood;
        return a.material < b.material;
    });
    return out;
}

// ---- report -------------------------------------------------------------

EnvironmentReport build_environment_report(const std::vector<ClusterRecord> &clusters,
                                           const std::vector<MaterialModel> &material_db,
                                           const ReportOptions &opts)
{
    std::vector<const ClusterRecord *> order;
    for (const auto &c : clusters)
        order.push_back(&c);
    std::stable_sort(order.begin(), order.end(), [](const ClusterRecord *a, const ClusterRecord *b) {
        return a->trx_id != b->trx_id ? a->trx_id < b->trx_id : a->id < b->id;
    });

    EnvironmentReport rep;
    for (const ClusterRecord *c : order)
    {
        if (c->members.size() < std::max<std::size_t>(opts.min_reflector_members, 1))
        {
            ++rep.n_fragments;
            continue;
        }
        double p = 0.0;
        for (const auto &m : c->members)
            p += std::norm(m.mpc.amplitude);
        ClusterRecord tmp = *c;
        update_centroid(tmp);
        rep.level1.push_back({c->trx_id, c->id, tmp.centroid_delay_s, tmp.centroid_azimuth_rad,
                              p > 0.0 ? 10.0 * std::log10(p) : kNegInf, c->members.size()});

        try
        {
            rep.level2.push_back({c->trx_id, c->id, roughness_indicators(*c), 0});
        }
        catch (const DataError &)
        {
        }

        const auto pts = diffuse_points(*c);
        if (distinct_azimuths(pts) >= std::max<std::size_t>(opts.min_structure_points, 4))
            rep.level3.push_back({c->trx_id, c->id, classify_structure(pts)});

        if (!material_db.empty())
            rep.level4.push_back({c->trx_id, c->id, classify_material(*c, material_db, opts.evidence)});
    }

    // Roughness ranking by pairwise wins, ties in cluster order.
    std::vector<std::size_t> wins(rep.level2.size(), 0), idx(rep.level2.size());
    for (std::size_t i = 0; i < rep.level2.size(); ++i)
    {
        idx[i] = i;
        for (std::size_t j = 0; j < rep.level2.size(); ++j)
            if (i != j && rougher_than(rep.level2[i].indicators, rep.level2[j].indicators))
                ++wins[i];
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return wins[a] > wins[b]; });
    for (std::size_t r = 0; r < idx.size(); ++r)
        rep.level2[idx[r]].rank = r + 1;
    return rep;
}

namespace
{

using ojson = nlohmann::ordered_json;

ojson fit_json(const geometry::TemplateFit &f)
{
    ojson j;
    j["kind"] = geometry::to_string(f.kind);
    j["distance_m"] = f.params.distance_m;
    j["b_m"] = f.params.b_m;
    j["radius_m"] = f.params.radius_m;
    j["azimuth_deg"] = rad2deg(f.params.azimuth_rad);
    j["rms_residual_ps"] = f.rms_residual_s * 1e12;
    j["n_points"] = f.n_points;
    return j;
}

} // namespace

std::string report_to_json(const EnvironmentReport &r)
{
    ojson j;
    j["reflector_count"] = r.level1.size();
    j["fragments"] = r.n_fragments;

    ojson l1 = ojson::array();
    for (const auto &e : r.level1)
        l1.push_back({{"trx", e.trx_id},
                      {"cluster", e.cluster_id},
                      {"delay_ns", e.delay_s * 1e9},
                      {"azimuth_deg", rad2deg(e.azimuth_rad)},
                      {"power_db", e.power_db},
                      {"members", e.n_members}});
    j["level1_reflectors"] = l1;

    ojson l2 = ojson::array();
    for (const auto &e : r.level2)
        l2.push_back({{"trx", e.trx_id},
                      {"cluster", e.cluster_id},
                      {"rank", e.rank},
                      {"n_diffuse", e.indicators.n_diffuse},
                      {"angular_span_deg", e.indicators.angular_span_deg},
                      {"lambertian_slope_db", e.indicators.lambertian.slope_db},
                      {"lambertian_intercept_db", e.indicators.lambertian.intercept_db},
                      {"lambertian_rms_db", e.indicators.lambertian.rms_residual_db},
                      {"lambertian_points", e.indicators.lambertian.n_points}});
    j["level2_roughness"] = l2;

    ojson l3 = ojson::array();
    for (const auto &e : r.level3)
    {
        ojson cands = ojson::array();
        for (std::size_t i = 0; i < e.classification.fits.size(); ++i)
        {
            ojson f = fit_json(e.classification.fits[i]);
            f["bic"] = e.classification.bic[i];
            cands.push_back(f);
        }
        l3.push_back({{"trx", e.trx_id},
                      {"cluster", e.cluster_id},
                      {"structure", geometry::to_string(e.classification.kind)},
                      {"fit", fit_json(e.classification.best)},
                      {"candidates", cands}});
    }
    j["level3_structure"] = l3;

    ojson l4 = ojson::array();
    for (const auto &e : r.level4)
    {
        ojson ranked = ojson::array();
        for (const auto &m : e.ranked)
            ranked.push_back({{"material", m.material}, {"log_likelihood", m.log_likelihood}, {"posterior", m.posterior}});
        l4.push_back({{"trx", e.trx_id}, {"cluster", e.cluster_id}, {"ranked", ranked}});
    }
    j["level4_material"] = l4;
    return j.dump(2) + "\n";
}

std::string report_to_text(const EnvironmentReport &r)
{
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "Level 1  reflector quantity & location: %zu reflector(s), %zu fragment(s)\n",
                  r.level1.size(), r.n_fragments);
    os << buf;
    for (const auto &e : r.level1)
    {
        std::snprintf(buf, sizeof buf, "  trx %zu cluster %zu: delay %.3f ns, azimuth %.2f deg, power %.2f dB, %zu MPCs\n",
                      e.trx_id, e.cluster_id, e.delay_s * 1e9, rad2deg(e.azimuth_rad), e.power_db, e.n_members);
        os << buf;
    }
    os << "Level 2  surface roughness:\n";
    for (const auto &e : r.level2)
    {
        std::snprintf(buf, sizeof buf,
                      "  trx %zu cluster %zu: rank %zu, %zu diffuse MPCs, span %.1f deg, p(dtheta) = %.2f cos^2 %+.2f dB\n",
                      e.trx_id, e.cluster_id, e.rank, e.indicators.n_diffuse, e.indicators.angular_span_deg,
                      e.indicators.lambertian.slope_db, e.indicators.lambertian.intercept_db);
        os << buf;
    }
    os << "Level 3  structure:\n";
    for (const auto &e : r.level3)
    {
        const auto &f = e.classification.best;
        std::snprintf(buf, sizeof buf, "  trx %zu cluster %zu: %s (d %.3f m, b %.3f m, R %.3f m, az %.2f deg, rms %.2f ps)\n",
                      e.trx_id, e.cluster_id, geometry::to_string(e.classification.kind), f.params.distance_m,
                      f.params.b_m, f.params.radius_m, rad2deg(f.params.azimuth_rad), f.rms_residual_s * 1e12);
        os << buf;
    }
    os << "Level 4  material type:\n";
    for (const auto &e : r.level4)
    {
        std::snprintf(buf, sizeof buf, "  trx %zu cluster %zu:", e.trx_id, e.cluster_id);
        os << buf;
        for (const auto &m : e.ranked)
        {
            std::snprintf(buf, sizeof buf, " %s %.3f", m.material.c_str(), m.posterior);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace thz
