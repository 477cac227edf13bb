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

#ifndef THZSENSE_DETAIL_NELDER_MEAD_HPP
#define THZSENSE_DETAIL_NELDER_MEAD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace thz::detail
{

struct SimplexResult
{
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
// Terminates when the simplex diameter drops below x_tol in every
// coordinate, when the value spread drops below f_tol (if positive), or
// after max_iter steps.
template <typename F>
SimplexResult nelder_mead(F &&f, std::vector<double> x0, const std::vector<double> &step, double x_tol = 1e-12,
                          double f_tol = 0.0, std::size_t max_iter = 4000)
{
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i)
        pts[i + 1][i] += step[i];
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        vals[i] = f(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter)
    {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        if (f_tol > 0.0 && std::abs(vals[worst] - vals[best]) <= f_tol)
            break;
        bool small = true;
        for (std::size_t d = 0; d < n && small; ++d)
            for (std::size_t i = 0; i <= n; ++i)
                if (std::abs(pts[i][d] - pts[best][d]) > x_tol)
                {
                    small = false;
                    break;
                }
        if (small)
            break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t d = 0; d < n; ++d)
                    centroid[d] += pts[i][d] / static_cast<double>(n);

        for (std::size_t d = 0; d < n; ++d)
            trial[d] = centroid[d] + (centroid[d] - pts[worst][d]);
        const double fr = f(trial);
        if (fr < vals[best])
        {
            for (std::size_t d = 0; d < n; ++d)
                trial2[d] = centroid[d] + 2.0 * (centroid[d] - pts[worst][d]);
            const double fe = f(trial2);
            if (fe < fr)
            {
                pts[worst] = trial2;
                vals[worst] = fe;
            }
            else
            {
                pts[worst] = trial;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second])
        {
            pts[worst] = trial;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        for (std::size_t d = 0; d < n; ++d)
            trial2[d] = outside ? centroid[d] + 0.5 * (trial[d] - centroid[d])
                                : centroid[d] + 0.5 * (pts[worst][d] - centroid[d]);
        const double fc = f(trial2);
        if (fc < (outside ? fr : vals[worst]))
        {
            pts[worst] = trial2;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i)
        {
            if (i == best)
                continue;
            for (std::size_t d = 0; d < n; ++d)
                pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
            vals[i] = f(pts[i]);
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    const std::size_t b = static_cast<std::size_t>(it - vals.begin());
    return {pts[b], vals[b], iter};
}

} // namespace thz::detail

#endif
