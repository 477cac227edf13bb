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

#include "thzsense/estimation.hpp"

#include "thzsense/detail/fft.hpp"
#include "thzsense/detail/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace thz
{

void EstimatorOptions::validate() const
{
    if (max_paths == 0)
        throw std::invalid_argument("EstimatorOptions: max_paths must be positive");
    if (!(dynamic_range_db > 0.0))
        throw std::invalid_argument("EstimatorOptions: dynamic_range_db must be positive");
    if (grid_refine_levels < 0 || polish_rounds < 0 || refine_sweeps < 0)
        throw std::invalid_argument("EstimatorOptions: negative iteration count");
    if (!(detection_margin_db >= 0.0))
        throw std::invalid_argument("EstimatorOptions: detection_margin_db must be non-negative");
    if (!(convergence_tol >= 0.0))
        throw std::invalid_argument("EstimatorOptions: convergence_tol must be non-negative");
}

namespace
{

constexpr std::size_t kAnchor = 128;

// sum_k row[k] e^{+j 2 pi f_k tau}
cplx steer_sum(const cplx *row, std::size_t nf, double f0, double df, double tau)
{
    const cplx w = std::polar(1.0, kTwoPi * df * tau);
    cplx acc{0.0, 0.0};
    for (std::size_t k0 = 0; k0 < nf; k0 += kAnchor)
    {
        cplx z = std::polar(1.0, kTwoPi * std::fmod((f0 + static_cast<double>(k0) * df) * tau, 1.0));
        const std::size_t k1 = std::min(nf, k0 + kAnchor);
        cplx part{0.0, 0.0};
        for (std::size_t k = k0; k < k1; ++k)
        {
            part += row[k] * z;
            z *= w;
        }
        acc += part;
    }
    return acc;
}

// row[k] -= a e^{-j 2 pi f_k tau}
void steer_subtract(cplx *row, std::size_t nf, double f0, double df, double tau, cplx a)
{
    const cplx w = std::polar(1.0, -kTwoPi * df * tau);
    for (std::size_t k0 = 0; k0 < nf; k0 += kAnchor)
    {
        cplx z = a * std::polar(1.0, -kTwoPi * std::fmod((f0 + static_cast<double>(k0) * df) * tau, 1.0));
        const std::size_t k1 = std::min(nf, k0 + kAnchor);
        for (std::size_t k = k0; k < k1; ++k)
        {
            row[k] -= z;
            z *= w;
        }
    }
}

class Correlator
{
  public:
    Correlator(const SounderConfig &cfg, unsigned threads) : cfg_(cfg), threads_(threads)
    {
        thetas_.resize(cfg.n_angles);
        for (std::size_t n = 0; n < cfg.n_angles; ++n)
            thetas_[n] = cfg.angle_rad(n);
        two_r_c_ = 2.0 * cfg.arm_radius_m / kSpeedOfLight;
        // Main lobe half width: where the Gaussian lobe meets the floor, plus two steps.
        const auto &ant = cfg.antenna;
        if (ant.isotropic)
            half_window_ = kPi;
        else
        {
            const double hw = 0.5 * ant.hpbw_deg * std::sqrt(-ant.sidelobe_floor_dbr / 3.0103);
            half_window_ = deg2rad(hw + 2.0 * std::abs(cfg.angle_step_deg));
        }
        partial_.resize(cfg.n_angles);
    }

    // Correlation and steering norm. windowed restricts to the main lobe.
    std::pair<cplx, double> correlate(const Matrix<cplx> &r, double tau, double phi, bool windowed) const
    {
        const std::size_t na = cfg_.n_angles, nf = cfg_.n_freq;
        const double f0 = cfg_.f_start, df = cfg_.freq_step();
        detail::parallel_for(na, threads_, [&](std::size_t n) {
            const double psi = wrap_pi(phi - thetas_[n]);
            if (windowed && std::abs(psi) > half_window_)
            {
                partial_[n] = {cplx{0.0, 0.0}, 0.0};
                return;
            }
            const double g = antenna_gain(cfg_.antenna, psi);
            const double te = tau - two_r_c_ * std::cos(psi);
            partial_[n] = {g * steer_sum(r.row(n), nf, f0, df, te), g * g};
        });
        cplx c{0.0, 0.0};
        double g2 = 0.0;
        for (const auto &[pc, pg] : partial_)
        {
            c += pc;
            g2 += pg;
        }
        return {c, g2 * static_cast<double>(nf)};
    }

    double power(const Matrix<cplx> &r, double tau, double phi, bool windowed) const
    {
        const auto [c, norm] = correlate(r, tau, phi, windowed);
        return norm > 0.0 ? std::norm(c) / norm : 0.0;
    }

    void subtract(Matrix<cplx> &r, const Mpc &m) const
    {
        const double f0 = cfg_.f_start, df = cfg_.freq_step();
        detail::parallel_for(cfg_.n_angles, threads_, [&](std::size_t n) {
            const double psi = m.azimuth_rad - thetas_[n];
            const double te = m.delay_s - two_r_c_ * std::cos(psi);
            steer_subtract(r.row(n), cfg_.n_freq, f0, df, te, m.amplitude * antenna_gain(cfg_.antenna, psi));
        });
    }

    void add(Matrix<cplx> &r, const Mpc &m) const
    {
        Mpc neg = m;
        neg.amplitude = -m.amplitude;
        subtract(r, neg);
    }

  private:
    const SounderConfig &cfg_;
    unsigned threads_;
    std::vector<double> thetas_;
    double two_r_c_ = 0.0;
    double half_window_ = kPi;
    mutable std::vector<std::pair<cplx, double>> partial_;
};

double energy(const Matrix<cplx> &r)
{
    double e = 0.0;
    for (const auto &v : r.data())
        e += std::norm(v);
    return e;
}

double to_db(double p) { return p > 0.0 ? 10.0 * std::log10(p) : -std::numeric_limits<double>::infinity(); }

double wrap_delay(double tau, double tmax)
{
    tau = std::fmod(tau, tmax);
    return tau < 0.0 ? tau + tmax : tau;
}

struct Point
{
    double tau;
    double phi;
    double p;
};

// Local search on the windowed objective starting from a grid point.
Point refine(const Correlator &corr, const Matrix<cplx> &r, const SounderConfig &cfg, Point cur, double dt,
             double dp, int levels, int polish_rounds, bool climb)
{
    auto eval = [&](double t, double p) { return corr.power(r, t, p, true); };
    auto grid_step = [&](double st, double sp) {
        Point best = cur;
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
            {
                if (i == 0 && j == 0)
                    continue;
                const double t = cur.tau + i * st, p = cur.phi + j * sp;
                const double v = eval(t, p);
                if (v > best.p)
                    best = {t, p, v};
            }
        const bool moved = best.tau != cur.tau || best.phi != cur.phi;
        cur = best;
        return moved;
    };

    if (climb)
        for (int it = 0; it < 8 && grid_step(dt, dp); ++it)
        {
        }
    for (int l = 0; l < levels; ++l)
    {
        dt *= 0.5;
        dp *= 0.5;
        grid_step(dt, dp);
    }
    // Separable parabolic polish.
    for (int round = 0; round < polish_rounds; ++round)
    {
        for (int axis = 0; axis < 2; ++axis)
        {
            const double h = axis == 0 ? dt : dp;
            const double vm = axis == 0 ? eval(cur.tau - h, cur.phi) : eval(cur.tau, cur.phi - h);
            const double vp = axis == 0 ? eval(cur.tau + h, cur.phi) : eval(cur.tau, cur.phi + h);
            const double den = vm - 2.0 * cur.p + vp;
            double off = 0.0;
            if (den < 0.0)
                off = std::clamp(0.5 * h * (vm - vp) / den, -h, h);
            else if (std::max(vm, vp) > cur.p)
                off = vm > vp ? -h : h;
            if (off == 0.0)
                continue;
            const double t = axis == 0 ? cur.tau + off : cur.tau;
            const double p = axis == 0 ? cur.phi : cur.phi + off;
            const double v = eval(t, p);
            if (v > cur.p)
                cur = {t, p, v};
        }
        dt *= 0.25;
        dp *= 0.25;
    }
    cur.phi = wrap_2pi(cur.phi);
    cur.tau = wrap_delay(cur.tau, cfg.max_delay());
    return cur;
}

// Zero-padded IDFT length for the coarse map.
std::size_t coarse_length(std::size_t n_freq)
{
    std::size_t m = 1;
    while (m < n_freq)
        m <<= 1;
    return m;
}

// Noncoherent main-lobe map over (angle step, padded delay bin), indexed [angle][delay].
Matrix<double> coarse_map(const Matrix<cplx> &r, const SounderConfig &cfg, const std::vector<double> &weights)
{
    const std::size_t na = cfg.n_angles, nf = cfg.n_freq, nd = coarse_length(nf);
    Matrix<cplx> cir(na, nd);
    for (std::size_t n = 0; n < na; ++n)
        std::copy_n(r.row(n), nf, cir.row(n));
    detail::fft_rows(cir, +1);
    Matrix<double> pw(na, nd);
    for (std::size_t i = 0; i < pw.size(); ++i)
        pw.data()[i] = std::norm(cir.data()[i]);
    const bool wrap = cfg.full_circle();
    const auto half = static_cast<long>(weights.size() / 2);
    const auto nal = static_cast<long>(na);
    Matrix<double> map(na, nd);
    for (long m = 0; m < nal; ++m)
    {
        double *dst = map.row(static_cast<std::size_t>(m));
        for (long d = -half; d <= half; ++d)
        {
            long idx = m + d;
            if (wrap)
                idx = ((idx % nal) + nal) % nal;
            else if (idx < 0 || idx >= nal)
                continue;
            const double w = weights[static_cast<std::size_t>(d + half)];
            const double *src = pw.row(static_cast<std::size_t>(idx));
            for (std::size_t k = 0; k < nd; ++k)
                dst[k] += w * src[k];
        }
    }
    return map;
}

std::vector<double> lobe_weights(const SounderConfig &cfg)
{
    const double step = deg2rad(std::abs(cfg.angle_step_deg));
    if (cfg.antenna.isotropic)
        return {1.0};
    const double hw = deg2rad(0.5 * cfg.antenna.hpbw_deg * std::sqrt(-cfg.antenna.sidelobe_floor_dbr / 3.0103));
    const auto half = static_cast<long>(std::min<double>(std::floor(hw / step), static_cast<double>(cfg.n_angles / 2)));
    std::vector<double> w;
    for (long d = -half; d <= half; ++d)
    {
        const double g = antenna_gain(cfg.antenna, static_cast<double>(d) * step);
        w.push_back(g * g);
    }
    return w;
}

double median(std::vector<double> v)
{
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

} // namespace

Matrix<double> beamform_spectrum(const CfrTensor &cfr, std::span<const double> delay_grid,
                                 std::span<const double> angle_grid, unsigned threads)
{
    if (delay_grid.empty() || angle_grid.empty())
        throw std::invalid_argument("beamform_spectrum: empty search grid");
    cfr.config.validate();
    if (cfr.values.rows() != cfr.config.n_angles || cfr.values.cols() != cfr.config.n_freq)
        throw std::invalid_argument("beamform_spectrum: tensor shape does not match its config");
    const Correlator corr(cfr.config, threads);
    Matrix<double> out(delay_grid.size(), angle_grid.size());
    for (std::size_t i = 0; i < delay_grid.size(); ++i)
        for (std::size_t j = 0; j < angle_grid.size(); ++j)
            out(i, j) = corr.power(cfr.values, delay_grid[i], angle_grid[j], false);
    return out;
}

std::vector<PathEstimate> estimate_paths(const CfrTensor &cfr, const EstimatorOptions &opts)
{
    opts.validate();
    const SounderConfig &cfg = cfr.config;
    cfg.validate();
    if (cfr.values.rows() != cfg.n_angles || cfr.values.cols() != cfg.n_freq)
        throw std::invalid_argument("estimate_paths: tensor shape does not match its config");

    const Correlator corr(cfg, opts.threads);
    const auto weights = lobe_weights(cfg);
    const double bin = cfg.delay_bin(), step = deg2rad(cfg.angle_step_deg);
    const double coarse_bin = 1.0 / (static_cast<double>(coarse_length(cfg.n_freq)) * cfg.freq_step());
    const double two_r_c = 2.0 * cfg.arm_radius_m / kSpeedOfLight;
    const double tmax = cfg.max_delay();

    Matrix<cplx> residual = cfr.values;
    std::vector<Mpc> found;
    double threshold = 0.0, first_peak = 0.0, strongest = 0.0;

    while (found.size() < opts.max_paths)
    {
        const Matrix<double> map = coarse_map(residual, cfg, weights);
        if (found.empty())
        {
            threshold = median(map.data()) * std::pow(10.0, opts.detection_margin_db / 10.0);
        }
        const auto it = std::max_element(map.data().begin(), map.data().end());
        const double peak = *it;
        if (!(peak > threshold) || peak <= 0.0)
            break;
        if (!found.empty() && peak < first_peak * std::pow(10.0, -opts.dynamic_range_db / 10.0))
            break;
        if (found.empty())
            first_peak = peak;
        const auto idx = static_cast<std::size_t>(it - map.data().begin());
        const std::size_t m = idx / map.cols(), k = idx % map.cols();

        Point start{wrap_delay(static_cast<double>(k) * coarse_bin + two_r_c, tmax), cfg.angle_rad(m), 0.0};
        start.p = corr.power(residual, start.tau, start.phi, true);
        const Point best = refine(corr, residual, cfg, start, bin, step, opts.grid_refine_levels, opts.polish_rounds, true);

        const auto [c, norm] = corr.correlate(residual, best.tau, best.phi, false);
        Mpc mpc;
        mpc.amplitude = c / norm;
        mpc.delay_s = best.tau;
        mpc.azimuth_rad = best.phi;
        const double pa = std::norm(mpc.amplitude);
        strongest = std::max(strongest, pa);
        if (pa < strongest * std::pow(10.0, -opts.dynamic_range_db / 10.0))
            break;
        corr.subtract(residual, mpc);
        found.push_back(mpc);
    }

    for (int sweep = 0; sweep < opts.refine_sweeps && !found.empty(); ++sweep)
    {
        double max_change = 0.0;
        for (auto &mpc : found)
        {
            corr.add(residual, mpc);
            Point cur{mpc.delay_s, mpc.azimuth_rad, corr.power(residual, mpc.delay_s, mpc.azimuth_rad, true)};
            const Point best = refine(corr, residual, cfg, cur, 0.5 * bin, 0.5 * step, 1, opts.polish_rounds, false);
            const auto [c_old, n_old] = corr.correlate(residual, mpc.delay_s, mpc.azimuth_rad, false);
            const auto [c_new, n_new] = corr.correlate(residual, best.tau, best.phi, false);
            Mpc next = mpc;
            if (std::norm(c_new) / n_new > std::norm(c_old) / n_old)
            {
                next.amplitude = c_new / n_new;
                next.delay_s = best.tau;
                next.azimuth_rad = best.phi;
            }
            else
                next.amplitude = c_old / n_old;
            max_change = std::max(max_change, std::abs(next.amplitude - mpc.amplitude) / std::abs(mpc.amplitude));
            mpc = next;
            corr.subtract(residual, mpc);
        }
        if (max_change <= opts.convergence_tol)
            break;
    }

    // Residual energy after each path, in detection order, recomputed from the final estimates.
    std::vector<PathEstimate> out;
    out.reserve(found.size());
    Matrix<cplx> r = cfr.values;
    for (const auto &mpc : found)
    {
        corr.subtract(r, mpc);
        out.push_back({mpc, to_db(energy(r))});
    }
    std::stable_sort(out.begin(), out.end(), [](const PathEstimate &a, const PathEstimate &b) {
        return std::abs(a.mpc.amplitude) > std::abs(b.mpc.amplitude);
    });
    return out;
}

MpcSet to_mpc_set(const std::vector<PathEstimate> &estimates, std::size_t trx_id)
{
    MpcSet s;
    s.trx_id = trx_id;
    for (const auto &e : estimates)
        s.paths.push_back(e.mpc);
    return s;
}

} // namespace thz
