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

#ifndef THZSENSE_DETAIL_FFT_HPP
#define THZSENSE_DETAIL_FFT_HPP

#include "thzsense/core.hpp"

namespace thz::detail
{

// Unnormalized in-place DFT of every row. sign = -1 forward, +1 backward.
void fft_rows(Matrix<cplx> &m, int sign);

} // namespace thz::detail

#endif
