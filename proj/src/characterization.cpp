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

#include "thzsense/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace thz
{

double fspl(double fc_hz, double distance_m)
{
    if (!(fc_hz > 0.0) || !(distance_m > 0.0))
        throw std::invalid_argument("fspl: frequency and distance must be > 0");
    return 20.0 * std::log10(4.0 * kPi * fc_hz * distance_m / kSpeedOfLight);
}

double reflection_loss(const Mpc &mpc, double fc_hz)
{
    const double mag = std::abs(mpc.amplitude);
    if (!(mag > 0.0))
        throw std::invalid_argument("reflection_loss: zero path amplitude");
    if (!(mpc.delay_s > 0.0))
        throw std::invalid_argument("reflection_loss: delay must be > 0");
    return -20.0 * std::log10(mag) - fspl(fc_hz, mpc.delay_s * kSpeedOfLight);
}

std::vector<MpcTag> split_by_loss(std::span<const double> losses_db, const SplitOptions &opts)
{
    std::vector<MpcTag> tags(losses_db.size(), MpcTag::diffuse);
    if (losses_db.empty())
        return tags;
    const double lo = *std::min_element(losses_db.begin(), losses_db.end());
    if (!(lo < opts.cutoff_db))
        return tags;
    for (std::size_t i = 0; i < losses_db.size(); ++i)
        if (losses_db[i] <= lo + opts.margin_db)
            tags[i] = MpcTag::specular;
    return tags;
}

void split_specular_diffuse(ClusterRecord &cluster, double fc_hz, const SplitOptions &opts)
{
    std::vector<double> losses;
    losses.reserve(cluster.members.size());
    for (auto &m : cluster.members)
    {
        m.loss_db = reflection_loss(m.mpc, fc_hz);
        losses.push_back(m.loss_db);
    }
    const auto tags = split_by_loss(losses, opts);
    for (std::size_t i = 0; i < tags.size(); ++i)
        cluster.members[i].tag = tags[i];
    cluster.metrics.n_specular = static_cast<std::size_t>(std::count(tags.begin(), tags.end(), MpcTag::specular));
    cluster.metrics.n_diffuse = tags.size() - cluster.metrics.n_specular;
}

ClusterMetrics cluster_metrics(const ClusterRecord &cluster, SpreadConvention angle)
{
    ClusterMetrics out;
    const auto &mem = cluster.members;
    for (const auto &m : mem)
        (m.tag == MpcTag::specular ? out.n_specular : out.n_diffuse) += 1;
    if (mem.size() < 2)
        return out;

    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
    double wsum = 0.0, t1 = 0.0;
    cplx phasor{0.0, 0.0};
    std::vector<double> az;
    az.reserve(mem.size());
    for (const auto &m : mem)
    {
        const double p = std::norm(m.mpc.amplitude);
        tmin = std::min(tmin, m.mpc.delay_s);
        tmax = std::max(tmax, m.mpc.delay_s);
        wsum += p;
        t1 += p * m.mpc.delay_s;
        phasor += p * std::polar(1.0, m.mpc.azimuth_rad);
        az.push_back(wrap_2pi(m.mpc.azimuth_rad));
    }
    out.delay_depth_s = tmax - tmin;

    // Smallest enclosing arc = full circle minus the largest gap.
    std::sort(az.begin(), az.end());
    double gap = az.front() + kTwoPi - az.back();
    for (std::size_t i = 1; i < az.size(); ++i)
        gap = std::max(gap, az[i] - az[i - 1]);
    out.angular_width_rad = kTwoPi - gap;

    if (!(wsum > 0.0))
        return out;
    const double tmean = t1 / wsum;
    double t2 = 0.0;
    for (const auto &m : mem)
    {
        const double dt = m.mpc.delay_s - tmean;
        t2 += std::norm(m.mpc.amplitude) * dt * dt;
    }
    out.delay_spread_s = std::sqrt(t2 / wsum);

    if (angle == SpreadConvention::circular)
    {
        std::vector<double> phi, w;
        for (const auto &m : mem)
        {
            phi.push_back(m.mpc.azimuth_rad);
            w.push_back(std::norm(m.mpc.amplitude));
        }
        out.angular_spread_rad = circular_spread(phi, w);
    }
    else
    {
        const double mean = std::arg(phasor);
        double a2 = 0.0;
        for (const auto &m : mem)
        {
            const double d = wrap_pi(m.mpc.azimuth_rad - mean);
            a2 += std::norm(m.mpc.amplitude) * d * d;
        }
        out.angular_spread_rad = std::sqrt(a2 / wsum);
    }
    return out;
}

double circular_spread(std::span<const double> azimuth_rad, std::span<const double> weights)
{
    if (azimuth_rad.size() != weights.size())
        throw std::invalid_argument("circular_spread: azimuth and weight counts differ");
    double wsum = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        wsum += weights[i];
        for (std::size_t j = i + 1; j < weights.size(); ++j)
        {
            const double h = std::sin(0.5 * (azimuth_rad[i] - azimuth_rad[j]));
            pairs += weights[i] * weights[j] * h * h;
        }
    }
    if (!(wsum > 0.0))
        return 0.0;
    const double one_minus_r2 = std::min(4.0 * pairs / (wsum * wsum), 1.0);
    return std::sqrt(-std::log1p(-one_minus_r2));
}

double rms_surface_height(std::span<const double> heights_m)
{
    if (heights_m.empty())
        throw std::invalid_argument("rms_surface_height: empty height list");
    const double n = static_cast<double>(heights_m.size());
    const double mean = std::accumulate(heights_m.begin(), heights_m.end(), 0.0) / n;
    double s = 0.0;
    for (double h : heights_m)
        s += (h - mean) * (h - mean);
    return std::sqrt(s / n);
}

const char *to_string(DistributionFamily f)
{
    switch (f)
    {
    case DistributionFamily::normal:
        return "normal";
    case DistributionFamily::lognormal:
        return "lognormal";
    case DistributionFamily::weibull:
        return "weibull";
    }
    return "?";
}

namespace
{

std::pair<double, double> mean_and_mle_sigma(std::span<const double> x)
{
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double s = 0.0;
    for (double v : x)
        s += (v - mean) * (v - mean);
    return {mean, std::sqrt(s / n)};
}

WeibullParams weibull_mle(std::span<const double> x)
{
    // Profile score g(k) = sum x^k ln x / sum x^k - 1/k - mean(ln x), increasing in k.
    // Samples are normalized by their maximum, which leaves g unchanged.
    const double xmax = *std::max_element(x.begin(), x.end());
    std::vector<double> lx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        lx[i] = std::log(x[i] / xmax);
    const double mean_l = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());

    auto score = [&](double k, double *deriv) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (double l : lx)
        {
            const double w = std::exp(k * l);
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        const double m1 = s1 / s0;
        if (deriv)
            *deriv = s2 / s0 - m1 * m1 + 1.0 / (k * k);
        return m1 - 1.0 / k - mean_l;
    };

    double lo = 1e-3, hi = 1.0;
    while (score(hi, nullptr) < 0.0)
    {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6)
            throw NumericalError("fit_distribution: weibull shape diverged");
    }
    double k = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it)
    {
        double d = 0.0;
        const double g = score(k, &d);
        if (g > 0.0)
            hi = k;
        else
            lo = k;
        double next = k - g / d;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        const bool done = std::abs(next - k) <= 1e-8 * std::max(1.0, k);
        k = next;
        if (done)
            break;
    }
    double s = 0.0;
    for (double l : lx)
        s += std::exp(k * l);
    const double scale = xmax * std::pow(s / static_cast<double>(lx.size()), 1.0 / k);
    return {k, scale};
}

} // namespace

DistributionFit fit_distribution(std::span<const double> samples, DistributionFamily family)
{
    if (samples.size() < 3)
        throw DataError("fit_distribution: need at least 3 samples");
    for (double v : samples)
        if (!std::isfinite(v))
            throw DataError("fit_distribution: non-finite sample");
    if (family != DistributionFamily::normal)
        for (double v : samples)
            if (!(v > 0.0))
                throw DataError(std::string("fit_distribution: nonpositive sample for ") + to_string(family));

    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi)
        throw DataError("fit_distribution: zero variance");

    DistributionFit out;
    out.family = family;
    out.n = samples.size();
    double ll = 0.0;
    switch (family)
    {
    case DistributionFamily::normal:
    {
        const auto [mu, sigma] = mean_and_mle_sigma(samples);
        const NormalParams p{mu, sigma};
        for (double v : samples)
            ll += p.logpdf(v);
        out.params = p;
        break;
    }
    case DistributionFamily::lognormal:
    {
        std::vector<double> logs(samples.size());
        std::transform(samples.begin(), samples.end(), logs.begin(), [](double v) { return std::log(v); });
        const auto [mu, sigma] = mean_and_mle_sigma(logs);
        const LognormalParams p{mu, sigma};
        for (double v : samples)
            ll += p.logpdf(v);
        out.params = p;
        break;
    }
    case DistributionFamily::weibull:
    {
        const WeibullParams p = weibull_mle(samples);
        for (double v : samples)
            ll += p.logpdf(v);
        out.params = p;
        break;
    }
    }
    out.log_likelihood = ll;
    return out;
}

ClusterCountFit count_clusters(const std::vector<std::vector<ClusterRecord>> &clusters_per_trx)
{
    if (clusters_per_trx.size() < 3)
        throw DataError("count_clusters: need cluster lists for at least 3 TRx positions");
    ClusterCountFit out;
    for (const auto &c : clusters_per_trx)
        out.counts.push_back(static_cast<double>(c.size()));
    const auto fit = fit_distribution(out.counts, DistributionFamily::normal);
    out.normal = std::get<NormalParams>(fit.params);
    out.log_likelihood = fit.log_likelihood;
    return out;
}

} // namespace thz
