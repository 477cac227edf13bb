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

#include "thzsense/geometry.hpp"

#include "thzsense/detail/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace thz::geometry
{

const char *to_string(ReflectorKind kind)
{
    switch (kind)
    {
    case ReflectorKind::flat_wall:
        return "flat";
    case ReflectorKind::concave_corner:
        return "concave";
    case ReflectorKind::convex_corner:
        return "convex";
    case ReflectorKind::cylinder:
        return "cylinder";
    }
    return "?";
}

ReflectorKind parse_reflector_kind(const std::string &s)
{
    if (s == "flat" || s == "flat_wall")
        return ReflectorKind::flat_wall;
    if (s == "concave" || s == "concave_corner")
        return ReflectorKind::concave_corner;
    if (s == "convex" || s == "convex_corner")
        return ReflectorKind::convex_corner;
    if (s == "cylinder")
        return ReflectorKind::cylinder;
    throw DataError("unknown reflector kind '" + s + "'");
}

int template_param_count(ReflectorKind kind)
{
    return kind == ReflectorKind::flat_wall ? 2 : 3;
}

void Reflector::validate() const
{
    if (!(distance_m > 0.0))
        throw std::invalid_argument("reflector: distance must be > 0");
    switch (kind)
    {
    case ReflectorKind::flat_wall:
        if (!(span_deg > 0.0) || span_deg >= 180.0)
            throw std::invalid_argument("reflector: flat wall span must be in (0, 180) degrees");
        break;
    case ReflectorKind::concave_corner:
    case ReflectorKind::convex_corner:
        if (!(b_m > 0.0))
            throw std::invalid_argument("reflector: corner arm distance b must be > 0");
        if (!(arm_length_m > 0.0))
            throw std::invalid_argument("reflector: corner arm length must be > 0");
        break;
    case ReflectorKind::cylinder:
        if (!(radius_m > 0.0))
            throw std::invalid_argument("reflector: cylinder radius must be > 0");
        if (!(radius_m < distance_m))
            throw std::invalid_argument("reflector: cylinder requires R < D (TRx outside the pillar)");
        break;
    }
}

namespace
{

constexpr double kEps = 1e-12;

Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 a) { return std::hypot(a.x, a.y); }
Point2 unit(double rad) { return {std::cos(rad), std::sin(rad)}; }

struct Segment
{
    Point2 a, b;
};

struct Circle
{
    Point2 c;
    double r = 0.0;
};

struct Surfaces
{
    std::vector<Segment> segments;
    std::vector<Circle> circles;
};

Surfaces surfaces_of(const Reflector &r)
{
    Surfaces s;
    const double az = deg2rad(r.azimuth_deg);
    switch (r.kind)
    {
    case ReflectorKind::flat_wall:
    {
        const Point2 n = unit(az), t{-n.y, n.x};
        const Point2 foot = r.distance_m * n;
        const double half = r.distance_m * std::tan(0.5 * deg2rad(r.span_deg));
        s.segments.push_back({foot - half * t, foot + half * t});
        break;
    }
    case ReflectorKind::concave_corner:
    case ReflectorKind::convex_corner:
    {
        const double beta = std::atan2(r.b_m, r.distance_m);
        const Point2 n1 = unit(az - beta), n2 = unit(az - beta + 0.5 * kPi);
        const Point2 apex = r.distance_m * n1 + r.b_m * n2;
        const double sign = r.kind == ReflectorKind::concave_corner ? -1.0 : 1.0;
        s.segments.push_back({apex, apex + (sign * r.arm_length_m) * n2}); // on the line n1.p = d
        s.segments.push_back({apex, apex + (sign * r.arm_length_m) * n1}); // on the line n2.p = b
        break;
    }
    case ReflectorKind::cylinder:
        s.circles.push_back({r.distance_m * unit(az), r.radius_m});
        break;
    }
    return s;
}

// Signed unit normal of the segment's supporting line pointing away from the observer.
Point2 away_normal(const Segment &seg, Point2 o)
{
    const Point2 d = seg.b - seg.a;
    Point2 n{-d.y / norm(d), d.x / norm(d)};
    if (dot(n, seg.a - o) < 0.0)
        n = -1.0 * n;
    return n;
}

} // namespace

std::optional<RayHit> cast_ray(const Reflector &r, Point2 trx, double azimuth_rad)
{
    const Surfaces s = surfaces_of(r);
    const Point2 u = unit(azimuth_rad);
    std::optional<RayHit> best;
    for (const auto &seg : s.segments)
    {
        const Point2 e = seg.b - seg.a;
        const double den = cross(u, e);
        if (std::abs(den) < kEps)
            continue;
        const Point2 w = seg.a - trx;
        const double t = cross(w, e) / den;
        const double sp = cross(w, u) / den;
        if (t <= kEps || sp < -1e-12 || sp > 1.0 + 1e-12)
            continue;
        if (!best || t < best->range_m)
        {
            const Point2 n = away_normal(seg, trx);
            best = RayHit{t, wrap_2pi(std::atan2(n.y, n.x))};
        }
    }
    for (const auto &c : s.circles)
    {
        const Point2 w = c.c - trx;
        const double proj = dot(w, u);
        const double disc = proj * proj - (dot(w, w) - c.r * c.r);
        if (disc < 0.0)
            continue;
        const double t = proj - std::sqrt(disc);
        if (t <= kEps)
            continue;
        if (!best || t < best->range_m)
            best = RayHit{t, wrap_2pi(std::atan2(w.y, w.x))};
    }
    return best;
}

std::vector<SpecularPoint> specular_points(const Reflector &r, Point2 trx)
{
    std::vector<SpecularPoint> out;
    const Surfaces s = surfaces_of(r);
    for (const auto &seg : s.segments)
    {
        const Point2 e = seg.b - seg.a;
        const double len2 = dot(e, e);
        const double sp = dot(trx - seg.a, e) / len2;
        if (sp < 0.0 || sp > 1.0)
            continue;
        const Point2 foot = seg.a + sp * e;
        const Point2 v = foot - trx;
        const double dist = norm(v);
        if (dist <= kEps)
            continue;
        // The foot must be the first surface the ray meets.
        const double az = wrap_2pi(std::atan2(v.y, v.x));
        const auto hit = cast_ray(r, trx, az);
        if (!hit || hit->range_m < dist - 1e-9)
            continue;
        out.push_back({2.0 * dist / kSpeedOfLight, az});
    }
    for (const auto &c : s.circles)
    {
        const Point2 v = c.c - trx;
        const double dist = norm(v) - c.r;
        if (dist > 0.0)
            out.push_back({2.0 * dist / kSpeedOfLight, wrap_2pi(std::atan2(v.y, v.x))});
    }
    std::sort(out.begin(), out.end(), [](const SpecularPoint &a, const SpecularPoint &b) { return a.delay_s < b.delay_s; });
    return out;
}

std::optional<SpecularPoint> specular_reflection(const Reflector &r, Point2 trx)
{
    auto pts = specular_points(r, trx);
    if (pts.empty())
        return std::nullopt;
    return pts.front();
}

double nearest_distance(const Reflector &r, Point2 trx)
{
    const Surfaces s = surfaces_of(r);
    double best = std::numeric_limits<double>::infinity();
    for (const auto &seg : s.segments)
    {
        const Point2 e = seg.b - seg.a;
        const double sp = std::clamp(dot(trx - seg.a, e) / dot(e, e), 0.0, 1.0);
        best = std::min(best, norm(seg.a + sp * e - trx));
    }
    for (const auto &c : s.circles)
        best = std::min(best, norm(c.c - trx) - c.r);
    return best;
}

// ---- analytic templates -------------------------------------------------

namespace
{

// Unit-range template factor x such that delay = 2 * scale * x / c; nullopt
// where undefined. For corners scale is the apex distance, beta the angle
// between the first arm normal and the apex direction.
std::optional<double> corner_factor(bool concave, double beta, double rel)
{
    // rel: azimuth relative to the first arm normal, in (-pi, pi].
    constexpr double kMinCos = 0.0871557427476582; // cos(85 deg)
    const bool first_arm = concave ? rel <= beta : rel >= beta;
    if (first_arm)
    {
        const double c = std::cos(rel);
        if (c < kMinCos)
            return std::nullopt;
        return std::cos(beta) / c;
    }
    const double sn = std::sin(rel);
    if (sn < kMinCos)
        return std::nullopt;
    return std::sin(beta) / sn;
}

std::optional<double> cylinder_factor(double q, double rel)
{
    const double sn = std::sin(rel), cs = std::cos(rel);
    const double disc = q * q - sn * sn;
    if (disc < 0.0 || cs <= 0.0)
        return std::nullopt;
    return cs - std::sqrt(disc);
}

} // namespace

std::optional<double> template_delay(ReflectorKind kind, const StructureParams &p, double azimuth_rad)
{
    switch (kind)
    {
    case ReflectorKind::flat_wall:
    {
        const double c = std::cos(wrap_pi(azimuth_rad - p.azimuth_rad));
        if (c < 0.0871557427476582)
            return std::nullopt;
        return 2.0 * p.distance_m / (kSpeedOfLight * c);
    }
    case ReflectorKind::concave_corner:
    case ReflectorKind::convex_corner:
    {
        const double beta = std::atan2(p.b_m, p.distance_m);
        const double rho = std::hypot(p.distance_m, p.b_m);
        const double rel = wrap_pi(azimuth_rad - (p.azimuth_rad - beta));
        const auto x = corner_factor(kind == ReflectorKind::concave_corner, beta, rel);
        if (!x)
            return std::nullopt;
        return 2.0 * rho * *x / kSpeedOfLight;
    }
    case ReflectorKind::cylinder:
    {
        const auto x = cylinder_factor(p.radius_m / p.distance_m, wrap_pi(azimuth_rad - p.azimuth_rad));
        if (!x)
            return std::nullopt;
        return 2.0 * p.distance_m * *x / kSpeedOfLight;
    }
    }
    return std::nullopt;
}

SignatureCurve signature_flat(double d_m, double normal_rad, double span_rad, double step_rad)
{
    if (!(d_m > 0.0))
        throw std::invalid_argument("signature_flat: d must be > 0");
    if (!(span_rad > 0.0) || span_rad >= kPi)
        throw std::invalid_argument("signature_flat: span must be in (0, 180) degrees (secant singularity)");
    if (!(step_rad > 0.0))
        throw std::invalid_argument("signature_flat: step must be > 0");
    SignatureCurve curve{{}, ReflectorKind::flat_wall};
    const auto k_max = static_cast<long>(std::floor(0.5 * span_rad / step_rad + 1e-9));
    for (long k = -k_max; k <= k_max; ++k)
    {
        const double dt = static_cast<double>(k) * step_rad;
        curve.samples.push_back({wrap_2pi(normal_rad + dt), 2.0 * d_m / (kSpeedOfLight * std::cos(dt))});
    }
    return curve;
}

SignatureCurve signature_corner(double d_m, double b_m, double apex_rad, bool concave, double step_rad,
                                double half_width_rad)
{
    if (!(d_m > 0.0) || !(b_m > 0.0))
        throw std::invalid_argument("signature_corner: degenerate arm (d and b must be > 0)");
    if (!(step_rad > 0.0))
        throw std::invalid_argument("signature_corner: step must be > 0");
    SignatureCurve curve{{}, concave ? ReflectorKind::concave_corner : ReflectorKind::convex_corner};
    const StructureParams p{d_m, b_m, 0.0, apex_rad};
    const auto k_max = static_cast<long>(std::floor(half_width_rad / step_rad + 1e-9));
    for (long k = -k_max; k <= k_max; ++k)
    {
        const double az = apex_rad + static_cast<double>(k) * step_rad;
        if (auto tau = template_delay(curve.kind, p, az))
            curve.samples.push_back({wrap_2pi(az), *tau});
    }
    return curve;
}

SignatureCurve signature_cylinder(double center_distance_m, double radius_m, double center_rad, double step_rad)
{
    if (!(radius_m > 0.0) || !(radius_m < center_distance_m))
        throw std::invalid_argument("signature_cylinder: require 0 < R < D");
    if (!(step_rad > 0.0))
        throw std::invalid_argument("signature_cylinder: step must be > 0");
    SignatureCurve curve{{}, ReflectorKind::cylinder};
    const double edge = std::asin(radius_m / center_distance_m);
    const auto k_max = static_cast<long>(std::floor(edge / step_rad + 1e-12));
    const StructureParams p{center_distance_m, 0.0, radius_m, center_rad};
    for (long k = -k_max; k <= k_max; ++k)
    {
        const double az = center_rad + static_cast<double>(k) * step_rad;
        if (auto tau = template_delay(ReflectorKind::cylinder, p, az))
            curve.samples.push_back({wrap_2pi(az), *tau});
    }
    return curve;
}

std::string signature_to_csv(const SignatureCurve &curve)
{
    std::ostringstream os;
    os << "azimuth_deg,delay_ns\n";
    char buf[96];
    for (const auto &s : curve.samples)
    {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", rad2deg(s.azimuth_rad), s.delay_s * 1e9);
        os << buf;
    }
    return os.str();
}

// ---- template fitting ---------------------------------------------------

namespace
{

// Penalty per point where the template is undefined: (1 ns)^2.
constexpr double kMissPenalty = 1e-18;

struct Unwrapped
{
    std::vector<double> az; // continuous, centered on the circular mean
    std::vector<double> delay;
    double lo = 0.0, hi = 0.0;
    double second_lo = 0.0, second_hi = 0.0;
};

Unwrapped unwrap_points(std::span<const SignatureSample> pts)
{
    cplx m{0.0, 0.0};
    for (const auto &p : pts)
        m += std::polar(1.0, p.azimuth_rad);
    const double center = std::arg(m);
    Unwrapped u;
    for (const auto &p : pts)
    {
        u.az.push_back(center + wrap_pi(p.azimuth_rad - center));
        u.delay.push_back(p.delay_s);
    }
    std::vector<double> sorted = u.az;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 sorted.end());
    u.lo = sorted.front();
    u.hi = sorted.back();
    u.second_lo = sorted.size() > 1 ? sorted[1] : sorted.front();
    u.second_hi = sorted.size() > 1 ? sorted[sorted.size() - 2] : sorted.back();
    return u;
}

// Least-squares scale for delay = (2/c) * scale * x_i and the residual sum of squares.
struct ScaledFit
{
    double scale = 0.0;
    double rss = 0.0;
};

template <typename FactorFn>
ScaledFit fit_scale(const Unwrapped &u, FactorFn &&factor)
{
    double sxy = 0.0, sxx = 0.0;
    std::size_t misses = 0;
    std::vector<double> xs(u.az.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < u.az.size(); ++i)
    {
        const std::optional<double> x = factor(u.az[i]);
        if (!x || !std::isfinite(*x) || *x <= 0.0)
        {
            ++misses;
            continue;
        }
        xs[i] = 2.0 * *x / kSpeedOfLight;
        sxy += xs[i] * u.delay[i];
        sxx += xs[i] * xs[i];
    }
    ScaledFit f;
    if (sxx <= 0.0)
    {
        f.rss = kMissPenalty * static_cast<double>(u.az.size()) * 1e3;
        return f;
    }
    f.scale = std::max(sxy / sxx, 0.0);
    for (std::size_t i = 0; i < u.az.size(); ++i)
        if (!std::isnan(xs[i]))
        {
            const double r = u.delay[i] - f.scale * xs[i];
            f.rss += r * r;
        }
    f.rss += kMissPenalty * static_cast<double>(misses);
    return f;
}

struct Candidate
{
    std::vector<double> x;
    double rss = std::numeric_limits<double>::infinity();
};

} // namespace

TemplateFit fit_structure_template(std::span<const SignatureSample> points, ReflectorKind kind)
{
    if (points.size() < 4)
        throw std::invalid_argument("fit_structure_template: too few points (need >= 4)");
    const Unwrapped u = unwrap_points(points);
    {
        std::vector<double> distinct = u.az;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end(),
                                   [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                       distinct.end());
        if (distinct.size() < 3)
            throw std::invalid_argument("fit_structure_template: points must span >= 3 distinct azimuths");
    }

    TemplateFit out;
    out.kind = kind;
    out.n_points = points.size();

    // Each kind reduces to a low-dimensional search with the range scale in closed form.
    std::function<ScaledFit(const std::vector<double> &)> objective;
    std::vector<std::vector<double>> grid;
    std::vector<double> step;

    const double span = u.hi - u.lo;
    switch (kind)
    {
    case ReflectorKind::flat_wall:
    {
        objective = [&u](const std::vector<double> &x) {
            const double normal = x[0];
            return fit_scale(u, [normal](double az) -> std::optional<double> {
                const double c = std::cos(az - normal);
                if (c < 0.0871557427476582)
                    return std::nullopt;
                return 1.0 / c;
            });
        };
        for (double a = u.lo - deg2rad(60.0); a <= u.hi + deg2rad(60.0); a += deg2rad(0.5))
            grid.push_back({a});
        step = {deg2rad(0.5)};
        break;
    }
    case ReflectorKind::concave_corner:
    case ReflectorKind::convex_corner:
    {
        const bool concave = kind == ReflectorKind::concave_corner;
        const double lo = u.second_lo, hi = u.second_hi;
        objective = [&u, concave, lo, hi](const std::vector<double> &x) {
            const double apex = x[0], beta = x[1];
            if (apex <= lo || apex >= hi || beta <= deg2rad(1.0) || beta >= deg2rad(89.0))
                return ScaledFit{0.0, std::numeric_limits<double>::infinity()};
            return fit_scale(u, [=](double az) { return corner_factor(concave, beta, wrap_pi(az - (apex - beta))); });
        };
        const double da = std::max(span / 60.0, deg2rad(0.25));
        for (double a = lo + 0.5 * da; a < hi; a += da)
            for (double b = deg2rad(3.0); b < deg2rad(88.0); b += deg2rad(3.0))
                grid.push_back({a, b});
        step = {da, deg2rad(3.0)};
        break;
    }
    case ReflectorKind::cylinder:
    {
        objective = [&u](const std::vector<double> &x) {
            const double center = x[0], q = x[1];
            if (q <= 0.02 || q >= 0.95)
                return ScaledFit{0.0, std::numeric_limits<double>::infinity()};
            return fit_scale(u, [=](double az) { return cylinder_factor(q, az - center); });
        };
        const double mid = 0.5 * (u.lo + u.hi);
        for (double a = mid - deg2rad(10.0); a <= mid + deg2rad(10.0); a += deg2rad(0.5))
            for (double q = 0.03; q < 0.95; q += 0.02)
                grid.push_back({a, q});
        step = {deg2rad(0.5), 0.02};
        break;
    }
    }

    // Coarse search keeps the few best seeds, each refined by Nelder-Mead.
    std::vector<Candidate> seeds;
    for (const auto &g : grid)
    {
        const double rss = objective(g).rss;
        if (!std::isfinite(rss))
            continue;
        seeds.push_back({g, rss});
    }
    if (seeds.empty())
        throw NumericalError(std::string("fit_structure_template: no admissible ") + to_string(kind) + " template");
    const std::size_t keep = std::min<std::size_t>(4, seeds.size());
    std::partial_sort(seeds.begin(), seeds.begin() + static_cast<long>(keep), seeds.end(),
                      [](const Candidate &a, const Candidate &b) { return a.rss < b.rss; });

    Candidate best;
    for (std::size_t s = 0; s < keep; ++s)
    {
        auto f = [&](const std::vector<double> &x) { return objective(x).rss; };
        auto r = detail::nelder_mead(f, seeds[s].x, step, 1e-13, 0.0, 6000);
        // Restart once from the optimum to escape premature collapse.
        std::vector<double> small(step.size());
        for (std::size_t i = 0; i < step.size(); ++i)
            small[i] = 0.05 * step[i];
        auto r2 = detail::nelder_mead(f, r.x, small, 1e-14, 0.0, 6000);
        if (r2.value < r.value)
            r = r2;
        if (r.value < best.rss)
            best = {r.x, r.value};
    }

    const ScaledFit sf = objective(best.x);
    out.rms_residual_s = std::sqrt(sf.rss / static_cast<double>(points.size()));
    switch (kind)
    {
    case ReflectorKind::flat_wall:
        out.params.distance_m = sf.scale;
        out.params.azimuth_rad = wrap_2pi(best.x[0]);
        break;
    case ReflectorKind::concave_corner:
    case ReflectorKind::convex_corner:
        out.params.distance_m = sf.scale * std::cos(best.x[1]);
        out.params.b_m = sf.scale * std::sin(best.x[1]);
        out.params.azimuth_rad = wrap_2pi(best.x[0]);
        break;
    case ReflectorKind::cylinder:
        out.params.distance_m = sf.scale;
        out.params.radius_m = sf.scale * best.x[1];
        out.params.azimuth_rad = wrap_2pi(best.x[0]);
        break;
    }
    return out;
}

} // namespace thz::geometry
