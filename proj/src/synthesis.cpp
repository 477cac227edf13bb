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

#include "thzsense/synthesis.hpp"

#include "thzsense/characterization.hpp"
#include "thzsense/detail/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <tuple>

namespace thz
{

void Scene::validate() const
{
    if (reflectors.empty())
        throw DataError("scene: at least one reflector required");
    if (trx_positions.empty())
        throw DataError("scene: at least one trx position required");
    config.validate();
    for (const auto &m : material_db)
        m.validate();
    for (const auto &r : reflectors)
    {
        r.validate();
        find_material(material_db, r.material);
    }
}

double antenna_gain(const AntennaModel &antenna, double offset_rad)
{
    if (antenna.isotropic)
        return 1.0;
    const double psi = rad2deg(wrap_pi(offset_rad));
    const double h = antenna.hpbw_deg;
    const double g0 = std::pow(10.0, antenna.peak_gain_dbi / 10.0);
    const double main = g0 * std::exp(-4.0 * std::numbers::ln2 * psi * psi / (h * h));
    return std::max(main, g0 * std::pow(10.0, antenna.sidelobe_floor_dbr / 10.0));
}

double antenna_gain_dbi(const AntennaModel &antenna, double offset_rad)
{
    return 10.0 * std::log10(antenna_gain(antenna, offset_rad));
}

namespace
{

cplx path_amplitude(double fc, double delay_s, double loss_db, double phase)
{
    const double mag_db = -(fspl(fc, delay_s * kSpeedOfLight) + loss_db);
    return std::polar(std::pow(10.0, mag_db / 20.0), phase);
}

// Nearest hit of the ray among all reflectors.
bool unoccluded(const Scene &scene, std::size_t own, geometry::Point2 p, double az, double range)
{
    for (std::size_t j = 0; j < scene.reflectors.size(); ++j)
    {
        if (j == own)
            continue;
        const auto hit = geometry::cast_ray(scene.reflectors[j], p, az);
        if (hit && hit->range_m < range - 1e-12)
            return false;
    }
    return true;
}

// Direction of the closest surface point, by a fine ray scan.
std::optional<double> closest_direction(const geometry::Reflector &r, geometry::Point2 p)
{
    std::optional<double> best_az;
    double best = std::numeric_limits<double>::infinity();
    constexpr int kRays = 1440;
    for (int k = 0; k < kRays; ++k)
    {
        const double az = kTwoPi * k / kRays;
        const auto hit = geometry::cast_ray(r, p, az);
        if (hit && hit->range_m < best)
        {
            best = hit->range_m;
            best_az = az;
        }
    }
    return best_az;
}

} // namespace

std::vector<TaggedMpc> scene_to_mpcs(const Scene &scene, std::size_t trx_id, std::uint64_t seed,
                                     const SynthesisOptions &opts)
{
    if (trx_id >= scene.trx_positions.size())
        throw std::out_of_range("scene_to_mpcs: trx_id " + std::to_string(trx_id) + " out of range");
    const geometry::Point2 p = scene.trx_positions[trx_id];
    const double fc = scene.config.center_freq();
    std::vector<TaggedMpc> out;

    for (std::size_t i = 0; i < scene.reflectors.size(); ++i)
    {
        const auto &r = scene.reflectors[i];
        const MaterialModel &mat = find_material(scene.material_db, r.material);
        std::mt19937_64 rng(derive_seed(seed, trx_id, i));
        std::uniform_real_distribution<double> phase(0.0, kTwoPi);
        std::normal_distribution<double> spec_draw(mat.specular_loss.mu, mat.specular_loss.sigma);
        std::weibull_distribution<double> diff_draw(mat.diffuse_loss.shape, mat.diffuse_loss.scale);
        const double median = mat.diffuse_loss.median();

        const double spec_loss = std::max(0.0, spec_draw(rng));
        const double spec_phase = phase(rng);

        std::optional<double> ref_az;
        if (const auto sp = geometry::specular_reflection(r, p))
        {
            const double range = 0.5 * sp->delay_s * kSpeedOfLight;
            if (unoccluded(scene, i, p, sp->azimuth_rad, range))
            {
                TaggedMpc m;
                m.mpc = {path_amplitude(fc, sp->delay_s, spec_loss, spec_phase), sp->delay_s, sp->azimuth_rad};
                m.tag = MpcTag::specular;
                m.source_reflector = i;
                m.loss_db = spec_loss;
                out.push_back(m);
            }
            ref_az = sp->azimuth_rad;
        }
        if (!opts.include_diffuse)
            continue;
        if (!ref_az)
            ref_az = closest_direction(r, p);
        if (!ref_az)
            continue;

        const auto n = static_cast<int>(std::lround(mat.diffuse_span_deg));
        for (int k = 0; k < n; ++k)
        {
            const double jitter = opts.jitter_scale * (diff_draw(rng) - median);
            const double ph = phase(rng);
            const double az = wrap_2pi(*ref_az + deg2rad(-0.5 * n + k + 0.5));
            const auto hit = geometry::cast_ray(r, p, az);
            if (!hit || !unoccluded(scene, i, p, az, hit->range_m))
                continue;
            const double delay = 2.0 * hit->range_m / kSpeedOfLight;
            const double loss = spec_loss - mat.lambertian_db(az - hit->normal_azimuth_rad) + jitter;
            TaggedMpc m;
            m.mpc = {path_amplitude(fc, delay, loss, ph), delay, az};
            m.tag = MpcTag::diffuse;
            m.source_reflector = i;
            m.loss_db = loss;
            out.push_back(m);
        }
    }
    return out;
}

std::vector<Mpc> untagged(std::span<const TaggedMpc> mpcs)
{
    std::vector<Mpc> out;
    out.reserve(mpcs.size());
    for (const auto &m : mpcs)
        out.push_back(m.mpc);
    return out;
}

CfrTensor synthesize_cfr(std::span<const Mpc> mpcs, const SounderConfig &config, unsigned threads)
{
    config.validate();
    const double tmax = config.max_delay();
    for (const auto &m : mpcs)
        if (!(m.delay_s >= 0.0) || !(m.delay_s < tmax))
            throw NumericalError("synthesize_cfr: delay " + std::to_string(m.delay_s * 1e9) +
                                 " ns aliases (unambiguous window " + std::to_string(tmax * 1e9) + " ns)");

    CfrTensor out;
    out.config = config;
    out.values = Matrix<cplx>(config.n_angles, config.n_freq);
    const double f0 = config.f_start, df = config.freq_step();
    const double two_r_c = 2.0 * config.arm_radius_m / kSpeedOfLight;
    const std::size_t nf = config.n_freq;
    constexpr std::size_t kAnchor = 128;

    detail::parallel_for(config.n_angles, threads, [&](std::size_t n) {
        const double theta = config.angle_rad(n);
        cplx *row = out.values.row(n);
        for (const auto &m : mpcs)
        {
            const double psi = m.azimuth_rad - theta;
            const double tau = m.delay_s - two_r_c * std::cos(psi);
            const cplx a = m.amplitude * antenna_gain(config.antenna, psi);
            const cplx w = std::polar(1.0, -kTwoPi * df * tau);
            for (std::size_t k0 = 0; k0 < nf; k0 += kAnchor)
            {
                cplx z = a * std::polar(1.0, -kTwoPi * std::fmod((f0 + static_cast<double>(k0) * df) * tau, 1.0));
                const std::size_t k1 = std::min(nf, k0 + kAnchor);
                for (std::size_t k = k0; k < k1; ++k)
                {
                    row[k] += z;
                    z *= w;
                }
            }
        }
    });
    return out;
}

CfrTensor synthesize_cfr(std::span<const TaggedMpc> mpcs, const SounderConfig &config, unsigned threads)
{
    const auto plain = untagged(mpcs);
    return synthesize_cfr(std::span<const Mpc>(plain), config, threads);
}

double noise_variance_for_floor(double floor_db, std::size_t n_freq)
{
    // |h|^2 of one IDFT bin is exponential with mean sigma^2 / N; its median is ln2 times that.
    return static_cast<double>(n_freq) * std::pow(10.0, floor_db / 10.0) / std::numbers::ln2;
}

CfrTensor add_noise(const CfrTensor &cfr, double floor_db, std::uint64_t seed)
{
    CfrTensor out = cfr;
    if (std::isinf(floor_db) && floor_db < 0.0)
        return out;
    const double sigma = std::sqrt(0.5 * noise_variance_for_floor(floor_db, cfr.values.cols()));
    for (std::size_t n = 0; n < out.values.rows(); ++n)
    {
        std::mt19937_64 rng(derive_seed(seed, 0x6e6f697365ULL, n));
        std::normal_distribution<double> g(0.0, sigma);
        cplx *row = out.values.row(n);
        for (std::size_t k = 0; k < out.values.cols(); ++k)
        {
            const double re = g(rng);
            const double im = g(rng);
            row[k] += cplx(re, im);
        }
    }
    return out;
}

// ---- stochastic generator -----------------------------------------------

namespace
{

double clamped_count_mean(double loc, double sigma)
{
    const NormalParams n{loc, sigma};
    double mean = n.cdf(1.5);
    const auto kmax = static_cast<long>(std::ceil(loc + 12.0 * sigma));
    for (long k = 2; k <= kmax; ++k)
        mean += static_cast<double>(k) * (n.cdf(k + 0.5) - n.cdf(k - 0.5));
    return mean;
}

struct MemberDraw
{
    double z_delay = 0.0;
    double z_angle = 0.0;
    double loss = 0.0;
    double phase = 0.0;
};

double weighted_rms(const std::vector<double> &x, const std::vector<double> &w)
{
    double sw = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sw += w[i];
        s1 += w[i] * x[i];
    }
    const double m = s1 / sw;
    for (std::size_t i = 0; i < x.size(); ++i)
        s2 += w[i] * (x[i] - m) * (x[i] - m);
    return std::sqrt(s2 / sw);
}

} // namespace

double calibrated_count_location(const NormalParams &count)
{
    count.validate();
    thread_local NormalParams cached_for{0.0, -1.0};
    thread_local double cached = 0.0;
    if (cached_for.mu == count.mu && cached_for.sigma == count.sigma)
        return cached;
    double lo = count.mu - 10.0 * count.sigma - 2.0, hi = count.mu + 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        (clamped_count_mean(mid, count.sigma) < count.mu ? lo : hi) = mid;
    }
    cached_for = count;
    cached = 0.5 * (lo + hi);
    return cached;
}

std::vector<StochasticCluster> draw_stochastic_clusters(const ScenarioStats &stats,
                                                        const std::vector<MaterialModel> &material_db,
                                                        const SounderConfig &config, std::uint64_t seed)
{
    stats.validate();
    config.validate();
    if (material_db.empty())
        throw DataError("draw_stochastic_clusters: empty material database");

    std::mt19937_64 rng(derive_seed(seed, 0x73746f63ULL));
    std::normal_distribution<double> count_draw(calibrated_count_location(stats.cluster_count),
                                                stats.cluster_count.sigma);
    const auto n_clusters = static_cast<std::size_t>(std::max(1L, std::lround(count_draw(rng))));

    const double fc = config.center_freq();
    const double tmax = config.max_delay();
    const double margin = std::min(15e-9, 0.25 * tmax);
    std::vector<StochasticCluster> out;
    out.reserve(n_clusters);

    for (std::size_t c = 0; c < n_clusters; ++c)
    {
        std::mt19937_64 r(derive_seed(seed, 0x636c7573ULL, c));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::normal_distribution<double> z(0.0, 1.0);
        auto lognormal = [&](const LognormalParams &p) { return std::exp(p.mu_log + p.sigma_log * z(r)); };

        const MaterialModel &mat =
            material_db[std::min(material_db.size() - 1, static_cast<std::size_t>(u01(r) * material_db.size()))];
        const double tau_c = margin + u01(r) * (tmax - 2.0 * margin);
        const double phi_c = kTwoPi * u01(r);
        const double ds = lognormal(stats.delay_spread_log);
        const double as = deg2rad(lognormal(stats.angular_spread_log));
        const double width_deg = lognormal(stats.angular_width_log);
        const auto n_diffuse = static_cast<std::size_t>(std::max(1L, std::lround(width_deg)));

        std::normal_distribution<double> spec(mat.specular_loss.mu, mat.specular_loss.sigma);
        std::weibull_distribution<double> diff(mat.diffuse_loss.shape, mat.diffuse_loss.scale);
        std::vector<MemberDraw> draws(n_diffuse + 1);
        for (std::size_t m = 0; m < draws.size(); ++m)
        {
            draws[m].z_delay = z(r);
            draws[m].z_angle = z(r);
            draws[m].loss = m == 0 ? std::max(0.0, spec(r)) : diff(r);
            draws[m].phase = kTwoPi * u01(r);
        }

        // Powers depend on delay through FSPL, so the delay scale is a fixed point.
        const std::size_t nm = draws.size();
        std::vector<double> delays(nm), w(nm), az(nm);
        double centre = tau_c;
        auto place = [&](double s) {
            for (std::size_t m = 0; m < nm; ++m)
            {
                delays[m] = centre + s * draws[m].z_delay;
                const double d = std::max(delays[m], 1e-12) * kSpeedOfLight;
                w[m] = std::pow(10.0, -(fspl(fc, d) + draws[m].loss) / 10.0);
            }
        };
        auto fit_delays = [&]() {
            double s = ds;
            for (int it = 0; it < 100; ++it)
            {
                place(s);
                const double cur = weighted_rms(delays, w);
                if (!(cur > 0.0))
                    return false;
                const double next = s * ds / cur;
                const bool done = std::abs(next - s) <= 1e-11 * s;
                s = next;
                if (done)
                {
                    place(s);
                    return std::isfinite(s);
                }
            }
            return false;
        };
        auto fit_angles = [&]() {
            double sa = as;
            for (int it = 0; it < 100; ++it)
            {
                for (std::size_t m = 0; m < nm; ++m)
                    az[m] = phi_c + sa * draws[m].z_angle;
                const double cur = circular_spread(az, w);
                if (!(cur > 0.0))
                    return false;
                const double next = sa * as / cur;
                // Past half a turn the circular spread no longer grows with the scale.
                if (!(next < kPi))
                    return false;
                // ln R near 1 limits the attainable relative precision to ~1e-12.
                const bool done = std::abs(next - sa) <= 1e-11 * sa;
                sa = next;
                if (done)
                {
                    for (std::size_t m = 0; m < nm; ++m)
                        az[m] = phi_c + sa * draws[m].z_angle;
                    return true;
                }
            }
            return false;
        };
        // A dominant specular forces wide offsets: slide the cluster back into
        // the delay window, and redraw the offsets when it cannot fit.
        const double guard = 0.01 * tmax;
        bool placed = false;
        std::optional<std::pair<std::vector<double>, std::vector<double>>> partial;
        for (int attempt = 0; attempt < 16 && !placed; ++attempt)
        {
            if (attempt > 0)
                for (auto &d : draws)
                {
                    d.z_delay = z(r);
                    d.z_angle = z(r);
                }
            centre = tau_c;
            bool inside = false;
            for (int shift = 0; shift < 8 && !inside; ++shift)
            {
                if (!fit_delays())
                    break;
                const auto [lo, hi] = std::minmax_element(delays.begin(), delays.end());
                if (*hi - *lo > tmax - 2.0 * guard)
                    break;
                inside = *lo >= guard && *hi <= tmax - guard;
                if (*lo < guard)
                    centre += guard - *lo;
                else if (*hi > tmax - guard)
                    centre -= *hi - (tmax - guard);
            }
            placed = inside && fit_angles();
            if (inside && !placed && !partial)
            {
                // Delays fit but the angular target is out of reach: keep the widest spread.
                for (std::size_t m = 0; m < nm; ++m)
                    az[m] = phi_c + kPi / 2.0 * draws[m].z_angle;
                partial.emplace(delays, az);
            }
        }
        if (!placed && partial)
            std::tie(delays, az) = *partial;
        else if (!placed)
        {
            // Unattainable target: fall back to the unweighted scales.
            centre = tau_c;
            place(ds);
            for (std::size_t m = 0; m < nm; ++m)
                az[m] = phi_c + as * draws[m].z_angle;
        }

        StochasticCluster sc;
        sc.delay_spread_s = ds;
        sc.angular_spread_rad = as;
        sc.material = mat.name;
        sc.record.id = c;
        sc.record.material = mat.name;
        for (std::size_t m = 0; m < nm; ++m)
        {
            if (!(delays[m] > 0.0) || !(delays[m] < tmax))
                continue;
            TaggedMpc t;
            t.mpc = {path_amplitude(fc, delays[m], draws[m].loss, draws[m].phase), delays[m], wrap_2pi(az[m])};
            t.tag = m == 0 ? MpcTag::specular : MpcTag::diffuse;
            t.source_reflector = c;
            t.loss_db = draws[m].loss;
            sc.record.members.push_back(t);
        }
        update_centroid(sc.record);
        sc.record.metrics = cluster_metrics(sc.record);
        out.push_back(std::move(sc));
    }
    return out;
}

} // namespace thz
