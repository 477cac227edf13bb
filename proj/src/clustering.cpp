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

#include "thzsense/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace thz
{

StructuringElement StructuringElement::rectangle(int delay_extent, int angle_extent)
{
    if (delay_extent < 1 || angle_extent < 1 || delay_extent % 2 == 0 || angle_extent % 2 == 0)
        throw std::invalid_argument("structuring element: extents must be odd and >= 1");
    StructuringElement k;
    for (int d = -delay_extent / 2; d <= delay_extent / 2; ++d)
        for (int a = -angle_extent / 2; a <= angle_extent / 2; ++a)
            k.offsets.emplace_back(d, a);
    return k;
}

void StructuringElement::validate() const
{
    if (offsets.empty())
        throw std::invalid_argument("structuring element: empty");
    if (std::find(offsets.begin(), offsets.end(), std::pair<int, int>{0, 0}) == offsets.end())
        throw std::invalid_argument("structuring element: must contain (0, 0)");
}

bool StructuringElement::symmetric() const
{
    return std::all_of(offsets.begin(), offsets.end(), [&](const auto &o) {
        return std::find(offsets.begin(), offsets.end(), std::pair<int, int>{-o.first, -o.second}) != offsets.end();
    });
}

BinaryMask binarize_padp(const PadpGrid &padp, double noise_floor_db, double margin_db)
{
    if (!(margin_db >= 0.0))
        throw std::invalid_argument("binarize_padp: margin must be >= 0");
    const double t = noise_floor_db + margin_db;
    BinaryMask out(padp.values_db.rows(), padp.values_db.cols(), 0);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = padp.values_db.data()[i] > t ? 1 : 0;
    return out;
}

namespace
{

std::size_t wrap_index(long i, std::size_t n)
{
    const long m = static_cast<long>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

} // namespace

BinaryMask dilate(const BinaryMask &mask, const StructuringElement &k)
{
    k.validate();
    const std::size_t nd = mask.rows(), na = mask.cols();
    BinaryMask out(nd, na, 0);
    for (std::size_t d = 0; d < nd; ++d)
        for (std::size_t a = 0; a < na; ++a)
        {
            if (!mask(d, a))
                continue;
            for (const auto &[dd, da] : k.offsets)
            {
                const long z = static_cast<long>(d) + dd;
                if (z < 0 || z >= static_cast<long>(nd))
                    continue;
                out(static_cast<std::size_t>(z), wrap_index(static_cast<long>(a) + da, na)) = 1;
            }
        }
    return out;
}

BinaryMask erode(const BinaryMask &mask, const StructuringElement &k)
{
    k.validate();
    const std::size_t nd = mask.rows(), na = mask.cols();
    BinaryMask out(nd, na, 0);
    for (std::size_t d = 0; d < nd; ++d)
        for (std::size_t a = 0; a < na; ++a)
        {
            bool inside = true;
            for (const auto &[dd, da] : k.offsets)
            {
                const long z = static_cast<long>(d) + dd;
                if (z < 0 || z >= static_cast<long>(nd))
                    continue;
                if (!mask(static_cast<std::size_t>(z), wrap_index(static_cast<long>(a) + da, na)))
                {
                    inside = false;
                    break;
                }
            }
            out(d, a) = inside ? 1 : 0;
        }
    return out;
}

BinaryMask morph_close(const BinaryMask &mask, const StructuringElement &k)
{
    return erode(dilate(mask, k), k);
}

namespace
{

struct DisjointSet
{
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x)
    {
        while (parent[x] != x)
        {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

LabeledRegions label_regions(const BinaryMask &mask, int connectivity, std::size_t n_min)
{
    if (connectivity != 4 && connectivity != 8)
        throw std::invalid_argument("label_regions: connectivity must be 4 or 8");
    if (n_min < 1)
        throw std::invalid_argument("label_regions: n_min must be >= 1");
    const std::size_t nd = mask.rows(), na = mask.cols();
    DisjointSet ds(nd * na);

    // Forward half-neighbourhood; the angle axis wraps.
    std::vector<std::pair<int, int>> nb = {{0, 1}, {1, 0}};
    if (connectivity == 8)
    {
        nb.emplace_back(1, 1);
        nb.emplace_back(1, -1);
    }
    for (std::size_t d = 0; d < nd; ++d)
        for (std::size_t a = 0; a < na; ++a)
        {
            if (!mask(d, a))
                continue;
            for (const auto &[dd, da] : nb)
            {
                const std::size_t z = d + static_cast<std::size_t>(dd);
                if (z >= nd)
                    continue;
                const std::size_t w = wrap_index(static_cast<long>(a) + da, na);
                if (mask(z, w))
                    ds.unite(d * na + a, z * na + w);
            }
        }

    std::vector<std::size_t> size(nd * na, 0);
    for (std::size_t i = 0; i < nd * na; ++i)
        if (mask.data()[i])
            ++size[ds.find(i)];

    LabeledRegions out;
    out.labels = Matrix<int>(nd, na, 0);
    std::vector<int> label_of(nd * na, 0);
    for (std::size_t i = 0; i < nd * na; ++i)
    {
        if (!mask.data()[i])
            continue;
        const std::size_t root = ds.find(i);
        if (size[root] < n_min)
            continue;
        if (label_of[root] == 0)
        {
            out.regions.emplace_back();
            label_of[root] = static_cast<int>(out.regions.size());
        }
        const int l = label_of[root];
        out.labels.data()[i] = l;
        out.regions[static_cast<std::size_t>(l - 1)].push_back({i / na, i % na});
    }
    return out;
}

std::optional<GridBin> mpc_grid_bin(const Mpc &mpc, const SounderConfig &config)
{
    const double tau = mpc.delay_s - 2.0 * config.arm_radius_m / kSpeedOfLight;
    const long k = std::lround(tau / config.delay_bin());
    if (k < 0 || k >= static_cast<long>(config.n_freq))
        return std::nullopt;
    const double rel = rad2deg(wrap_2pi(mpc.azimuth_rad - deg2rad(config.angle_start_deg))) / config.angle_step_deg;
    long a = std::lround(rel);
    if (config.full_circle())
        a = static_cast<long>(wrap_index(a, config.n_angles));
    else if (a >= static_cast<long>(config.n_angles))
        return std::nullopt;
    return GridBin{static_cast<std::size_t>(k), static_cast<std::size_t>(a)};
}

std::vector<ClusterRecord> assign_mpcs_to_clusters(const LabeledRegions &regions, std::span<const TaggedMpc> mpcs,
                                                   const SounderConfig &config, std::size_t trx_id,
                                                   const AssignOptions &opts)
{
    const std::size_t nd = regions.labels.rows(), na = regions.labels.cols();
    if (nd != config.n_freq || na != config.n_angles)
        throw std::invalid_argument("assign_mpcs_to_clusters: label grid does not match the sounder config");
    const bool wrap = config.full_circle();

    std::vector<ClusterRecord> by_label(regions.regions.size());
    for (const auto &m : mpcs)
    {
        const auto bin = mpc_grid_bin(m.mpc, config);
        if (!bin)
            continue;
        int label = regions.labels(bin->delay_bin, bin->angle_bin);
        if (label == 0)
        {
            // Nearest labelled bin by Chebyshev, then Euclidean distance, then raster order.
            long best_cheb = opts.radius_bins + 1, best_e2 = 0;
            const long r = opts.radius_bins;
            for (long dd = -r; dd <= r; ++dd)
                for (long da = -r; da <= r; ++da)
                {
                    const long z = static_cast<long>(bin->delay_bin) + dd;
                    long w = static_cast<long>(bin->angle_bin) + da;
                    if (z < 0 || z >= static_cast<long>(nd))
                        continue;
                    if (wrap)
                        w = static_cast<long>(wrap_index(w, na));
                    else if (w < 0 || w >= static_cast<long>(na))
                        continue;
                    const int l = regions.labels(static_cast<std::size_t>(z), static_cast<std::size_t>(w));
                    if (l == 0)
                        continue;
                    const long cheb = std::max(std::abs(dd), std::abs(da));
                    const long e2 = dd * dd + da * da;
                    if (cheb < best_cheb || (cheb == best_cheb && e2 < best_e2))
                    {
                        best_cheb = cheb;
                        best_e2 = e2;
                        label = l;
                    }
                }
        }
        if (label == 0)
            continue;
        by_label[static_cast<std::size_t>(label - 1)].members.push_back(m);
    }

    std::vector<ClusterRecord> out;
    for (std::size_t i = 0; i < by_label.size(); ++i)
    {
        if (by_label[i].members.empty())
            continue;
        ClusterRecord c = std::move(by_label[i]);
        c.id = i + 1;
        c.trx_id = trx_id;
        c.bins = regions.regions[i];
        update_centroid(c);
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace thz
