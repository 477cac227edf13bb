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

#ifndef THZSENSE_CORE_HPP
#define THZSENSE_CORE_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thz
{

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle to [0, 2*pi).
double wrap_2pi(double rad);

// Wraps an angle to [-pi, pi).
double wrap_pi(double rad);

// ---- errors -------------------------------------------------------------

// Malformed input data (files, scenes, degenerate samples). CLI exit code 2.
class DataError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Numerical failure (non-convergence, aliasing). CLI exit code 3.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// ---- dense row-major matrix ---------------------------------------------

template <typename T>
class Matrix
{
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T *row(std::size_t r) { return data_.data() + r * cols_; }
    const T *row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<T> &data() { return data_; }
    const std::vector<T> &data() const { return data_; }

    bool operator==(const Matrix &) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

// ---- sounder ------------------------------------------------------------

struct AntennaModel
{
    double peak_gain_dbi = 25.5;
    double hpbw_deg = 8.0;
    double sidelobe_floor_dbr = -30.0;
    // Unit gain in every direction; the other fields are ignored.
    bool isotropic = false;

    void validate() const;
    bool operator==(const AntennaModel &) const = default;
};

// Frequency/angle sampling of a rotation-scanned VNA measurement.
// Defaults reproduce the 290-310 GHz, 2001-point, 1 degree campaign setup.
struct SounderConfig
{
    double f_start = 290e9;
    double f_stop = 310e9;
    std::size_t n_freq = 2001;
    double angle_start_deg = 0.0;
    double angle_step_deg = 1.0;
    std::size_t n_angles = 360;
    double arm_radius_m = 0.2;
    double noise_floor_db = -90.0;
    AntennaModel antenna;

    void validate() const;

    double bandwidth() const { return f_stop - f_start; }
    double freq_step() const { return bandwidth() / static_cast<double>(n_freq - 1); }
    double center_freq() const { return 0.5 * (f_start + f_stop); }
    double freq(std::size_t k) const { return f_start + static_cast<double>(k) * freq_step(); }

    // Spacing of the IDFT delay grid, 1 / (n_freq * df).
    double delay_bin() const { return 1.0 / (static_cast<double>(n_freq) * freq_step()); }
    // Nominal resolution 1 / B.
    double delay_resolution() const { return 1.0 / bandwidth(); }
    // Unambiguous delay window 1 / df = (n_freq - 1) / B.
    double max_delay() const { return 1.0 / freq_step(); }

    double angle_rad(std::size_t n) const { return wrap_2pi(deg2rad(angle_start_deg + static_cast<double>(n) * angle_step_deg)); }
    bool full_circle() const;

    bool operator==(const SounderConfig &) const = default;
};

// ---- multipath ----------------------------------------------------------

struct Mpc
{
    cplx amplitude{0.0, 0.0};
    double delay_s = 0.0;
    double azimuth_rad = 0.0;

    double power_db() const;
};

struct MpcSet
{
    std::vector<Mpc> paths;
    std::size_t trx_id = 0;
};

enum class MpcTag
{
    specular,
    diffuse
};

const char *to_string(MpcTag tag);
MpcTag parse_tag(const std::string &s);

struct TaggedMpc
{
    Mpc mpc;
    MpcTag tag = MpcTag::diffuse;
    std::size_t source_reflector = 0;
    double loss_db = 0.0;
};

// ---- distributions ------------------------------------------------------

struct NormalParams
{
    double mu = 0.0;
    double sigma = 1.0;

    void validate() const;
    double logpdf(double x) const;
    double cdf(double x) const;
};

struct WeibullParams
{
    double shape = 1.0;
    double scale = 1.0;

    void validate() const;
    double logpdf(double x) const;
    double quantile(double p) const;
    // log P(X <= x); -inf for x <= 0.
    double log_cdf(double x) const;
    double median() const { return quantile(0.5); }
    double mean() const;

    // Shape/scale such that the 2.5 % and 97.5 % quantiles hit [lo, hi].
    static WeibullParams from_quantile_range(double lo, double hi);
};

struct LognormalParams
{
    double mu_log = 0.0;
    double sigma_log = 1.0;

    void validate() const;
    double logpdf(double x) const;
    double mean() const;

    static LognormalParams from_mean(double mean, double sigma_log);
};

// ---- materials ----------------------------------------------------------

struct MaterialModel
{
    std::string name;
    NormalParams specular_loss;
    WeibullParams diffuse_loss;
    double lambertian_slope_db = 0.0;
    double lambertian_intercept_db = 0.0;
    int roughness_rank = 1;
    double diffuse_span_deg = 90.0;
    // False when the Lambertian parameters and span are placeholders.
    bool lambertian_measured = true;

    void validate() const;
    double lambertian_db(double delta_theta_rad) const;
};

std::vector<MaterialModel> default_material_db();

// Throws DataError naming the label when absent.
const MaterialModel &find_material(const std::vector<MaterialModel> &db, const std::string &name);

// ---- scenario statistics ------------------------------------------------

enum class ScenarioCase
{
    scenario1,
    scenario2,
    trx37_45,
    trx46_57
};

ScenarioCase parse_scenario_case(const std::string &s);
const char *to_string(ScenarioCase c);

struct ScenarioStats
{
    NormalParams cluster_count;
    LognormalParams delay_depth_log;   // seconds
    LognormalParams angular_width_log; // degrees
    LognormalParams delay_spread_log;  // seconds
    LognormalParams angular_spread_log; // degrees

    void validate() const;
};

inline constexpr double kDefaultLogSigma = 0.5;

ScenarioStats default_scenario_stats(ScenarioCase c);

// ---- clusters -----------------------------------------------------------

struct ClusterMetrics
{
    double delay_depth_s = 0.0;
    double angular_width_rad = 0.0;
    double delay_spread_s = 0.0;
    double angular_spread_rad = 0.0;
    std::size_t n_specular = 0;
    std::size_t n_diffuse = 0;
};

struct GridBin
{
    std::size_t delay_bin = 0;
    std::size_t angle_bin = 0;
    bool operator==(const GridBin &) const = default;
};

struct ClusterRecord
{
    std::size_t id = 0;
    std::size_t trx_id = 0;
    std::vector<GridBin> bins;
    std::vector<TaggedMpc> members;
    double centroid_delay_s = 0.0;
    double centroid_azimuth_rad = 0.0;
    ClusterMetrics metrics;
    // Amplitude (dB) below which paths could not have been observed; -inf when unknown.
    double detection_floor_db = -std::numeric_limits<double>::infinity();
    std::optional<std::string> structure;
    std::optional<std::string> material;
};

// Power-weighted (|alpha|^2) centroid; circular mean for azimuth.
void update_centroid(ClusterRecord &cluster);

// ---- rng helpers --------------------------------------------------------

// Mixes a base seed with stream identifiers (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

} // namespace thz

#endif
