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

#ifndef THZSENSE_SPECTRAL_HPP
#define THZSENSE_SPECTRAL_HPP

#include "thzsense/core.hpp"
#include "thzsense/synthesis.hpp"

#include <ostream>
#include <vector>

namespace thz
{

enum class Window
{
    rectangular,
    hann
};

Window parse_window(const std::string &s);

// Per-angle channel impulse response h(tau_k, theta_n).
struct CirTensor
{
    Matrix<cplx> values; // n_angles x n_delay_bins
    std::vector<double> delay_axis;
    SounderConfig config;
    std::size_t trx_id = 0;
    Window window = Window::rectangular;
};

// Power-angle-delay profile in dB; rows are delay bins, columns angles.
struct PadpGrid
{
    Matrix<double> values_db; // n_delay_bins x n_angles
    std::vector<double> delay_axis;
    std::vector<double> angle_axis; // radians
};

// Level written for |h| = 0.
inline constexpr double kPadpSentinelDb = -400.0;

// h[k] = (1/N) sum_n w[n] H[n] e^{+j 2 pi n k / N}; delay_axis[k] = k / (N df).
CirTensor cfr_to_cir(const CfrTensor &cfr, Window window = Window::rectangular);

// Forward DFT back to the (windowed) CFR.
CfrTensor cir_to_cfr(const CirTensor &cir);

// 20 log10|h|, zero magnitudes clipped to the sentinel.
PadpGrid cir_to_padp(const CirTensor &cir);

// Median of all non-sentinel bins. Throws DataError if every bin is a sentinel.
double estimate_noise_floor(const PadpGrid &padp);

// Heatmap CSV: header "delay_ns,<angle_deg>...", one row per delay bin.
void write_padp_csv(std::ostream &os, const PadpGrid &padp);

} // namespace thz

#endif
