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

#ifndef THZSENSE_GEOMETRY_HPP
#define THZSENSE_GEOMETRY_HPP

#include "thzsense/core.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Reflector primitives and their monostatic delay-angle signatures.
//
// Azimuths are counterclockwise from +x of the scene frame. Reflector
// parameters are expressed relative to the scene origin; a TRx at the origin
// sees exactly the analytic templates below. Corners have a right angle
// between their arms; d and b are the perpendicular distances from the
// origin to the lines carrying the two arms, so the apex sits at
// sqrt(d^2 + b^2).

namespace thz::geometry
{

enum class ReflectorKind
{
    flat_wall,
    concave_corner,
    convex_corner,
    cylinder
};

const char *to_string(ReflectorKind kind);
ReflectorKind parse_reflector_kind(const std::string &s);

// Number of free template parameters, used for model-order penalties.
int template_param_count(ReflectorKind kind);

inline constexpr std::array<ReflectorKind, 4> kAllKinds = {ReflectorKind::flat_wall, ReflectorKind::cylinder,
                                                           ReflectorKind::concave_corner, ReflectorKind::convex_corner};

struct Point2
{
    double x = 0.0;
    double y = 0.0;
};

struct Reflector
{
    ReflectorKind kind = ReflectorKind::flat_wall;
    // flat: perpendicular distance; corners: distance to the first arm line;
    // cylinder: distance from origin to the pillar center.
    double distance_m = 1.2;
    // corners only: distance to the second arm line.
    double b_m = 1.0;
    // flat: wall normal; corners: apex; cylinder: pillar center.
    double azimuth_deg = 90.0;
    // flat only: angular extent of the wall seen from the origin.
    double span_deg = 120.0;
    // corners only: arm length measured from the apex.
    double arm_length_m = 2.0;
    // cylinder only.
    double radius_m = 0.5;
    std::string material = "cement";

    void validate() const;
    bool operator==(const Reflector &) const = default;
};

struct SignatureSample
{
    double azimuth_rad = 0.0;
    double delay_s = 0.0;
};

struct SignatureCurve
{
    std::vector<SignatureSample> samples;
    ReflectorKind kind = ReflectorKind::flat_wall;
};

// Secant law tau = 2 d / (c cos dtheta) for |dtheta| <= span / 2.
SignatureCurve signature_flat(double d_m, double normal_rad, double span_rad, double step_rad);

// Two secant pieces meeting at the apex; samples apex +/- half_width clipped
// to where both arms are visible.
SignatureCurve signature_corner(double d_m, double b_m, double apex_rad, bool concave, double step_rad,
                                double half_width_rad = deg2rad(40.0));

// tau = 2 (D cos dtheta - sqrt(R^2 - D^2 sin^2 dtheta)) / c for |sin dtheta| <= R / D.
SignatureCurve signature_cylinder(double center_distance_m, double radius_m, double center_rad, double step_rad);

// Round-trip delay/azimuth of the normal-incidence point for a TRx at
// `trx`, or nullopt when no such point lies on the reflector. Corners
// report the nearer visible arm foot.
struct SpecularPoint
{
    double delay_s = 0.0;
    double azimuth_rad = 0.0;
};
std::optional<SpecularPoint> specular_reflection(const Reflector &r, Point2 trx = {});

// All normal-incidence points (a concave corner may expose both feet).
std::vector<SpecularPoint> specular_points(const Reflector &r, Point2 trx = {});

// First intersection of the ray from `trx` along `azimuth_rad` with the
// reflector. `normal_azimuth_rad` is the direction from the TRx along which
// the hit surface would be seen at normal incidence (the specular direction
// for Lambertian offsets).
struct RayHit
{
    double range_m = 0.0;
    double normal_azimuth_rad = 0.0;
};
std::optional<RayHit> cast_ray(const Reflector &r, Point2 trx, double azimuth_rad);

// Nearest distance from `trx` to any surface of the reflector.
double nearest_distance(const Reflector &r, Point2 trx = {});

// ---- template fitting ---------------------------------------------------

struct StructureParams
{
    // flat: d; corners: d (first arm); cylinder: center distance D.
    double distance_m = 0.0;
    // corners: second arm distance.
    double b_m = 0.0;
    // cylinder: radius.
    double radius_m = 0.0;
    // flat: normal; corners: apex; cylinder: center.
    double azimuth_rad = 0.0;
};

struct TemplateFit
{
    ReflectorKind kind = ReflectorKind::flat_wall;
    StructureParams params;
    double rms_residual_s = 0.0;
    std::size_t n_points = 0;
};

// Template delay at one azimuth; nullopt where the template is undefined.
std::optional<double> template_delay(ReflectorKind kind, const StructureParams &p, double azimuth_rad);

// Grid search then Nelder-Mead refinement of the RMS delay residual.
// Corner apexes are constrained to lie inside the observed azimuth range
// with at least two points on each arm. Throws std::invalid_argument for
// fewer than 4 points or fewer than 3 distinct azimuths.
TemplateFit fit_structure_template(std::span<const SignatureSample> points, ReflectorKind kind);

// Two-column CSV (azimuth_deg, delay_ns).
std::string signature_to_csv(const SignatureCurve &curve);

} // namespace thz::geometry

#endif
