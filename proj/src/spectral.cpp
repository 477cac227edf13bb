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

#include "thzsense/spectral.hpp"

#include "thzsense/detail/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>

namespace thz
{

namespace
{

// FFTW planning is not thread-safe.
std::mutex &plan_mutex()
{
    static std::mutex m;
    return m;
}

std::vector<double> window_weights(Window w, std::size_t n)
{
    std::vector<double> out(n, 1.0);
    if (w == Window::hann && n > 1)
        for (std::size_t k = 0; k < n; ++k)
            out[k] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n - 1)));
    return out;
}

} // namespace

namespace detail
{

void fft_rows(Matrix<cplx> &m, int sign)
{
    if (m.empty())
        return;
    const int n = static_cast<int>(m.cols());
    auto *data = reinterpret_cast<fftw_complex *>(m.data().data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_many_dft(1, &n, static_cast<int>(m.rows()), data, nullptr, 1, n, data, nullptr, 1, n, sign,
                                  FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
}

} // namespace detail

Window parse_window(const std::string &s)
{
    if (s == "rectangular" || s == "rect")
        return Window::rectangular;
    if (s == "hann")
        return Window::hann;
    throw std::invalid_argument("unknown window '" + s + "' (expected rectangular or hann)");
}

CirTensor cfr_to_cir(const CfrTensor &cfr, Window window)
{
    CirTensor out;
    out.config = cfr.config;
    out.trx_id = cfr.trx_id;
    out.window = window;
    out.values = cfr.values;
    const std::size_t nf = cfr.values.cols();
    const auto w = window_weights(window, nf);
    const double inv_n = 1.0 / static_cast<double>(nf);
    for (std::size_t r = 0; r < out.values.rows(); ++r)
    {
        cplx *row = out.values.row(r);
        for (std::size_t k = 0; k < nf; ++k)
            row[k] *= w[k];
    }
    detail::fft_rows(out.values, FFTW_BACKWARD);
    for (auto &v : out.values.data())
        v *= inv_n;
    out.delay_axis.resize(nf);
    for (std::size_t k = 0; k < nf; ++k)
        out.delay_axis[k] = static_cast<double>(k) * cfr.config.delay_bin();
    return out;
}

CfrTensor cir_to_cfr(const CirTensor &cir)
{
    CfrTensor out;
    out.config = cir.config;
    out.trx_id = cir.trx_id;
    out.values = cir.values;
    detail::fft_rows(out.values, FFTW_FORWARD);
    return out;
}

PadpGrid cir_to_padp(const CirTensor &cir)
{
    PadpGrid out;
    const std::size_t na = cir.values.rows(), nd = cir.values.cols();
    out.values_db = Matrix<double>(nd, na);
    for (std::size_t a = 0; a < na; ++a)
    {
        const cplx *row = cir.values.row(a);
        for (std::size_t k = 0; k < nd; ++k)
        {
            const double mag = std::abs(row[k]);
            out.values_db(k, a) = mag > 0.0 ? std::max(20.0 * std::log10(mag), kPadpSentinelDb) : kPadpSentinelDb;
        }
    }
    out.delay_axis = cir.delay_axis;
    out.angle_axis.resize(na);
    for (std::size_t a = 0; a < na; ++a)
        out.angle_axis[a] = cir.config.angle_rad(a);
    return out;
}

double estimate_noise_floor(const PadpGrid &padp)
{
    std::vector<double> v;
    v.reserve(padp.values_db.size());
    for (double x : padp.values_db.data())
        if (x > kPadpSentinelDb)
            v.push_back(x);
    if (v.empty())
        throw DataError("estimate_noise_floor: every bin is a sentinel");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    if (v.size() % 2 == 1)
        return v[mid];
    const double upper = v[mid];
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
    return 0.5 * (lower + upper);
}

void write_padp_csv(std::ostream &os, const PadpGrid &padp)
{
    char buf[64];
    os << "delay_ns";
    for (double a : padp.angle_axis)
    {
        std::snprintf(buf, sizeof buf, ",%.6f", rad2deg(a));
        os << buf;
    }
    os << '\n';
    for (std::size_t k = 0; k < padp.values_db.rows(); ++k)
    {
        std::snprintf(buf, sizeof buf, "%.6f", padp.delay_axis[k] * 1e9);
        os << buf;
        for (std::size_t a = 0; a < padp.values_db.cols(); ++a)
        {
            std::snprintf(buf, sizeof buf, ",%.4f", padp.values_db(k, a));
            os << buf;
        }
        os << '\n';
    }
}

} // namespace thz
