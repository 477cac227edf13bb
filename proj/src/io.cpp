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

#include "thzsense/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace thz::io
{

namespace
{

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

[[noreturn]] void fail_line(std::size_t line, const std::string &msg)
{
    throw DataError("line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string &v, std::size_t line, const std::string &key)
{
    double out = 0.0;
    const auto *first = v.data(), *last = v.data() + v.size();
    if (!v.empty() && *first == '+')
        ++first;
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last)
        fail_line(line, "'" + key + "' expects a number, got '" + v + "'");
    return out;
}

std::size_t parse_count(const std::string &v, std::size_t line, const std::string &key)
{
    std::size_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        fail_line(line, "'" + key + "' expects a non-negative integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string &v, std::size_t line, const std::string &key)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    fail_line(line, "'" + key + "' expects true or false, got '" + v + "'");
}

using Setter = std::function<void(const std::string &value, std::size_t line, const std::string &key)>;

std::map<std::string, Setter> config_keys(SounderConfig &c)
{
    auto num = [](double &dst) {
        return [&dst](const std::string &v, std::size_t l, const std::string &k) { dst = parse_double(v, l, k); };
    };
    auto cnt = [](std::size_t &dst) {
        return [&dst](const std::string &v, std::size_t l, const std::string &k) { dst = parse_count(v, l, k); };
    };
    return {
        {"f_start_hz", num(c.f_start)},
        {"f_stop_hz", num(c.f_stop)},
        {"n_freq", cnt(c.n_freq)},
        {"angle_start_deg", num(c.angle_start_deg)},
        {"angle_step_deg", num(c.angle_step_deg)},
        {"n_angles", cnt(c.n_angles)},
        {"arm_radius_m", num(c.arm_radius_m)},
        {"noise_floor_db", num(c.noise_floor_db)},
        {"antenna_peak_gain_dbi", num(c.antenna.peak_gain_dbi)},
        {"antenna_hpbw_deg", num(c.antenna.hpbw_deg)},
        {"antenna_sidelobe_floor_dbr", num(c.antenna.sidelobe_floor_dbr)},
        {"antenna_isotropic",
         [&c](const std::string &v, std::size_t l, const std::string &k) { c.antenna.isotropic = parse_bool(v, l, k); }},
    };
}

std::map<std::string, Setter> material_keys(MaterialModel &m)
{
    auto num = [](double &dst) {
        return [&dst](const std::string &v, std::size_t l, const std::string &k) { dst = parse_double(v, l, k); };
    };
    return {
        {"specular_mu_db", num(m.specular_loss.mu)},
        {"specular_sigma_db", num(m.specular_loss.sigma)},
        {"diffuse_shape", num(m.diffuse_loss.shape)},
        {"diffuse_scale_db", num(m.diffuse_loss.scale)},
        {"lambertian_slope_db", num(m.lambertian_slope_db)},
        {"lambertian_intercept_db", num(m.lambertian_intercept_db)},
        {"roughness_rank",
         [&m](const std::string &v, std::size_t l, const std::string &k) {
             m.roughness_rank = static_cast<int>(parse_count(v, l, k));
         }},
        {"diffuse_span_deg", num(m.diffuse_span_deg)},
        {"lambertian_measured",
         [&m](const std::string &v, std::size_t l, const std::string &k) { m.lambertian_measured = parse_bool(v, l, k); }},
    };
}

std::map<std::string, Setter> reflector_keys(geometry::Reflector &r)
{
    auto num = [](double &dst) {
        return [&dst](const std::string &v, std::size_t l, const std::string &k) { dst = parse_double(v, l, k); };
    };
    return {
        {"kind",
         [&r](const std::string &v, std::size_t l, const std::string &) {
             try
             {
                 r.kind = geometry::parse_reflector_kind(v);
             }
             catch (const std::exception &e)
             {
                 fail_line(l, e.what());
             }
         }},
        {"distance_m", num(r.distance_m)},
        {"b_m", num(r.b_m)},
        {"azimuth_deg", num(r.azimuth_deg)},
        {"span_deg", num(r.span_deg)},
        {"arm_length_m", num(r.arm_length_m)},
        {"radius_m", num(r.radius_m)},
        {"material", [&r](const std::string &v, std::size_t, const std::string &) { r.material = v; }},
    };
}

std::map<std::string, Setter> trx_keys(geometry::Point2 &p)
{
    return {
        {"x_m", [&p](const std::string &v, std::size_t l, const std::string &k) { p.x = parse_double(v, l, k); }},
        {"y_m", [&p](const std::string &v, std::size_t l, const std::string &k) { p.y = parse_double(v, l, k); }},
    };
}

enum class Section
{
    none,
    config,
    material,
    reflector,
    trx
};

} // namespace

// ---- scene --------------------------------------------------------------

Scene parse_scene(const std::string &text)
{
    Scene scene;
    scene.reflectors.clear();
    scene.trx_positions.clear();

    Section section = Section::none;
    std::size_t section_line = 0;
    std::size_t config_line = 0;
    std::map<std::string, Setter> setters;
    std::vector<std::size_t> reflector_lines;
    // Materials are resolved after all sections so they may follow their use.
    struct PendingMaterial
    {
        MaterialModel model;
        std::size_t line;
        bool is_new;
        std::vector<std::string> keys;
    };
    std::vector<PendingMaterial> materials;

    auto bind = [&]() {
        switch (section)
        {
        case Section::config:
            setters = config_keys(scene.config);
            break;
        case Section::material:
            setters = material_keys(materials.back().model);
            break;
        case Section::reflector:
            setters = reflector_keys(scene.reflectors.back());
            break;
        case Section::trx:
            setters = trx_keys(scene.trx_positions.back());
            break;
        case Section::none:
            setters.clear();
            break;
        }
    };

    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        std::string s = raw;
        if (const auto hash = s.find('#'); hash != std::string::npos)
            s.erase(hash);
        s = trim(s);
        if (s.empty())
            continue;
        if (s.front() == '[')
        {
            if (s.back() != ']')
                fail_line(line, "unterminated section header '" + s + "'");
            const std::string head = trim(s.substr(1, s.size() - 2));
            section_line = line;
            if (head == "config")
            {
                if (config_line != 0)
                    fail_line(line, "duplicate [config] section (first at line " + std::to_string(config_line) + ")");
                config_line = line;
                section = Section::config;
            }
            else if (head == "reflector")
            {
                scene.reflectors.emplace_back();
                reflector_lines.push_back(line);
                section = Section::reflector;
            }
            else if (head == "trx")
            {
                scene.trx_positions.emplace_back();
                section = Section::trx;
            }
            else if (head.rfind("material", 0) == 0 && head.size() > 8 && (head[8] == ' ' || head[8] == '\t'))
            {
                const std::string name = trim(head.substr(8));
                for (const auto &m : materials)
                    if (m.model.name == name)
                        fail_line(line, "duplicate material section '" + name + "'");
                PendingMaterial pm{{}, line, true, {}};
                for (const auto &m : scene.material_db)
                    if (m.name == name)
                    {
                        pm.model = m;
                        pm.is_new = false;
                    }
                pm.model.name = name;
                materials.push_back(std::move(pm));
                section = Section::material;
            }
            else
                fail_line(line, "unknown section '[" + head + "]'");
            bind();
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            fail_line(line, "expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (section == Section::none)
            fail_line(line, "key '" + key + "' outside of any section");
        const auto it = setters.find(key);
        if (it == setters.end())
            fail_line(line, "unknown key '" + key + "'");
        if (value.empty())
            fail_line(line, "key '" + key + "' has no value");
        it->second(value, line, key);
        if (section == Section::material)
            materials.back().keys.push_back(key);
    }
    (void)section_line;

    for (auto &pm : materials)
    {
        if (pm.is_new)
            for (const char *req : {"specular_mu_db", "specular_sigma_db", "diffuse_shape", "diffuse_scale_db"})
                if (std::find(pm.keys.begin(), pm.keys.end(), req) == pm.keys.end())
                    fail_line(pm.line, "new material '" + pm.model.name + "' must set '" + req + "'");
        try
        {
            pm.model.validate();
        }
        catch (const std::exception &e)
        {
            fail_line(pm.line, "material '" + pm.model.name + "': " + e.what());
        }
        auto it = std::find_if(scene.material_db.begin(), scene.material_db.end(),
                               [&](const MaterialModel &m) { return m.name == pm.model.name; });
        if (it != scene.material_db.end())
            *it = pm.model;
        else
            scene.material_db.push_back(pm.model);
    }

    try
    {
        scene.config.validate();
    }
    catch (const std::exception &e)
    {
        fail_line(config_line, std::string("config: ") + e.what());
    }
    for (std::size_t i = 0; i < scene.reflectors.size(); ++i)
    {
        const auto &r = scene.reflectors[i];
        const bool known = std::any_of(scene.material_db.begin(), scene.material_db.end(),
                                       [&](const MaterialModel &m) { return m.name == r.material; });
        if (!known)
            fail_line(reflector_lines[i], "unknown material '" + r.material + "'");
        try
        {
            r.validate();
        }
        catch (const std::exception &e)
        {
            fail_line(reflector_lines[i], e.what());
        }
    }
    if (scene.reflectors.empty())
        throw DataError("scene: no [reflector] sections");
    if (scene.trx_positions.empty())
        throw DataError("scene: no [trx] sections");
    return scene;
}

Scene load_scene(const std::filesystem::path &path) { return parse_scene(read_text(path)); }

std::string serialize_scene(const Scene &scene)
{
    std::ostringstream os;
    const auto &c = scene.config;
    os << "[config]\n"
       << "f_start_hz = " << fmt(c.f_start) << "\n"
       << "f_stop_hz = " << fmt(c.f_stop) << "\n"
       << "n_freq = " << c.n_freq << "\n"
       << "angle_start_deg = " << fmt(c.angle_start_deg) << "\n"
       << "angle_step_deg = " << fmt(c.angle_step_deg) << "\n"
       << "n_angles = " << c.n_angles << "\n"
       << "arm_radius_m = " << fmt(c.arm_radius_m) << "\n"
       << "noise_floor_db = " << fmt(c.noise_floor_db) << "\n"
       << "antenna_peak_gain_dbi = " << fmt(c.antenna.peak_gain_dbi) << "\n"
       << "antenna_hpbw_deg = " << fmt(c.antenna.hpbw_deg) << "\n"
       << "antenna_sidelobe_floor_dbr = " << fmt(c.antenna.sidelobe_floor_dbr) << "\n"
       << "antenna_isotropic = " << (c.antenna.isotropic ? "true" : "false") << "\n";
    for (const auto &m : scene.material_db)
        os << "\n[material " << m.name << "]\n"
           << "specular_mu_db = " << fmt(m.specular_loss.mu) << "\n"
           << "specular_sigma_db = " << fmt(m.specular_loss.sigma) << "\n"
           << "diffuse_shape = " << fmt(m.diffuse_loss.shape) << "\n"
           << "diffuse_scale_db = " << fmt(m.diffuse_loss.scale) << "\n"
           << "lambertian_slope_db = " << fmt(m.lambertian_slope_db) << "\n"
           << "lambertian_intercept_db = " << fmt(m.lambertian_intercept_db) << "\n"
           << "roughness_rank = " << m.roughness_rank << "\n"
           << "diffuse_span_deg = " << fmt(m.diffuse_span_deg) << "\n"
           << "lambertian_measured = " << (m.lambertian_measured ? "true" : "false") << "\n";
    for (const auto &r : scene.reflectors)
        os << "\n[reflector]\n"
           << "kind = " << geometry::to_string(r.kind) << "\n"
           << "distance_m = " << fmt(r.distance_m) << "\n"
           << "b_m = " << fmt(r.b_m) << "\n"
           << "azimuth_deg = " << fmt(r.azimuth_deg) << "\n"
           << "span_deg = " << fmt(r.span_deg) << "\n"
           << "arm_length_m = " << fmt(r.arm_length_m) << "\n"
           << "radius_m = " << fmt(r.radius_m) << "\n"
           << "material = " << r.material << "\n";
    for (const auto &p : scene.trx_positions)
        os << "\n[trx]\n"
           << "x_m = " << fmt(p.x) << "\n"
           << "y_m = " << fmt(p.y) << "\n";
    return os.str();
}

// ---- CFR ----------------------------------------------------------------

namespace
{

template <typename T>
void put_le(std::ostream &os, T v)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U u = std::bit_cast<U>(v);
    char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i)
        b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    os.write(b, sizeof(U));
}

template <typename T>
T get_le(const unsigned char *p)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
        u |= static_cast<U>(p[i]) << (8 * i);
    return std::bit_cast<T>(u);
}

constexpr std::size_t kHeaderBytes = 7 + 1 + 4 + 4 + 8 * 4;

} // namespace

void write_cfr(std::ostream &os, const CfrTensor &cfr)
{
    const auto &c = cfr.config;
    if (cfr.values.rows() != c.n_angles || cfr.values.cols() != c.n_freq)
        throw std::invalid_argument("write_cfr: tensor shape does not match its config");
    os.write(kCfrMagic, 7);
    os.put(static_cast<char>(kCfrVersion));
    put_le(os, static_cast<std::uint32_t>(c.n_freq));
    put_le(os, static_cast<std::uint32_t>(c.n_angles));
    put_le(os, c.f_start);
    put_le(os, c.f_stop);
    put_le(os, c.arm_radius_m);
    put_le(os, c.angle_step_deg);
    for (const auto &v : cfr.values.data())
    {
        put_le(os, static_cast<float>(v.real()));
        put_le(os, static_cast<float>(v.imag()));
    }
    if (!os)
        throw DataError("write_cfr: write failed");
}

CfrTensor read_cfr(std::istream &is)
{
    const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
    if (bytes.size() < 8 || std::memcmp(p, kCfrMagic, 7) != 0 || p[7] != kCfrVersion)
        throw DataError("read_cfr: unsupported version/magic");
    if (bytes.size() < kHeaderBytes)
        throw DataError("read_cfr: truncated header");
    CfrTensor out;
    auto &c = out.config;
    c.n_freq = get_le<std::uint32_t>(p + 8);
    c.n_angles = get_le<std::uint32_t>(p + 12);
    c.f_start = get_le<double>(p + 16);
    c.f_stop = get_le<double>(p + 24);
    c.arm_radius_m = get_le<double>(p + 32);
    c.angle_step_deg = get_le<double>(p + 40);
    const std::size_t expect = c.n_freq * c.n_angles * 8;
    if (bytes.size() - kHeaderBytes != expect)
        throw DataError("read_cfr: payload length mismatch (expected " + std::to_string(expect) + " bytes, found " +
                        std::to_string(bytes.size() - kHeaderBytes) + ")");
    try
    {
        c.validate();
    }
    catch (const std::exception &e)
    {
        throw DataError(std::string("read_cfr: invalid header: ") + e.what());
    }
    out.values = Matrix<cplx>(c.n_angles, c.n_freq);
    const unsigned char *q = p + kHeaderBytes;
    for (auto &v : out.values.data())
    {
        v = cplx(get_le<float>(q), get_le<float>(q + 4));
        q += 8;
    }
    return out;
}

void write_cfr(const std::filesystem::path &path, const CfrTensor &cfr)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw DataError("cannot open '" + path.string() + "' for writing");
    write_cfr(os, cfr);
}

CfrTensor read_cfr(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DataError("cannot open '" + path.string() + "'");
    return read_cfr(is);
}

// ---- CSV ----------------------------------------------------------------

namespace
{

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ','))
        out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

struct Csv
{
    std::map<std::string, std::size_t> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;

    bool has(const std::string &c) const { return columns.count(c) != 0; }

    const std::string &cell(std::size_t r, const std::string &c) const
    {
        const auto it = columns.find(c);
        if (it == columns.end())
            throw DataError("csv: missing column '" + c + "'");
        return rows[r][it->second];
    }
    double num(std::size_t r, const std::string &c) const { return parse_double(cell(r, c), lines[r], c); }
    std::size_t count(std::size_t r, const std::string &c) const { return parse_count(cell(r, c), lines[r], c); }
};

Csv read_csv(std::istream &is)
{
    Csv csv;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line))
    {
        ++n;
        line = trim(line);
        if (line.empty())
            continue;
        auto cells = split(line);
        if (csv.columns.empty())
        {
            for (std::size_t i = 0; i < cells.size(); ++i)
                csv.columns[cells[i]] = i;
            continue;
        }
        if (cells.size() != csv.columns.size())
            fail_line(n, "expected " + std::to_string(csv.columns.size()) + " fields, got " +
                             std::to_string(cells.size()));
        csv.rows.push_back(std::move(cells));
        csv.lines.push_back(n);
    }
    if (csv.columns.empty())
        throw DataError("csv: empty input");
    return csv;
}

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string mpc_fields(const Mpc &m)
{
    return g17(20.0 * std::log10(std::abs(m.amplitude))) + "," + g17(rad2deg(std::arg(m.amplitude))) + "," +
           g17(m.delay_s * 1e9) + "," + g17(rad2deg(m.azimuth_rad));
}

Mpc mpc_from(const Csv &csv, std::size_t r)
{
    Mpc m;
    m.amplitude = std::polar(std::pow(10.0, csv.num(r, "amplitude_db") / 20.0), deg2rad(csv.num(r, "phase_deg")));
    m.delay_s = csv.num(r, "delay_ns") * 1e-9;
    m.azimuth_rad = wrap_2pi(deg2rad(csv.num(r, "azimuth_deg")));
    return m;
}

TaggedMpc tagged_from(const Csv &csv, std::size_t r)
{
    TaggedMpc t;
    t.mpc = mpc_from(csv, r);
    if (csv.has("tag"))
    {
        try
        {
            t.tag = parse_tag(csv.cell(r, "tag"));
        }
        catch (const std::exception &e)
        {
            fail_line(csv.lines[r], e.what());
        }
    }
    if (csv.has("loss_db"))
        t.loss_db = csv.num(r, "loss_db");
    if (csv.has("reflector"))
        t.source_reflector = csv.count(r, "reflector");
    return t;
}

} // namespace

void write_mpc_csv(std::ostream &os, const std::vector<PathEstimate> &estimates, std::size_t trx_id)
{
    os << "trx,amplitude_db,phase_deg,delay_ns,azimuth_deg\n";
    for (const auto &e : estimates)
        os << trx_id << "," << mpc_fields(e.mpc) << "\n";
}

void write_truth_csv(std::ostream &os, const std::vector<TaggedMpc> &mpcs, std::size_t trx_id)
{
    for (const auto &t : mpcs)
        os << trx_id << "," << t.source_reflector << "," << to_string(t.tag) << "," << g17(t.loss_db) << ","
           << mpc_fields(t.mpc) << "\n";
}

std::vector<TaggedMpc> read_mpc_csv(std::istream &is, std::vector<std::size_t> *trx_ids)
{
    const Csv csv = read_csv(is);
    std::vector<TaggedMpc> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        out.push_back(tagged_from(csv, r));
        if (trx_ids)
            trx_ids->push_back(csv.has("trx") ? csv.count(r, "trx") : 0);
    }
    return out;
}

PadpGrid read_padp_csv(std::istream &is)
{
    const Csv csv = read_csv(is);
    std::vector<std::pair<std::size_t, std::string>> cols;
    for (const auto &[name, idx] : csv.columns)
        cols.emplace_back(idx, name);
    std::sort(cols.begin(), cols.end());
    if (cols.size() < 2 || cols.front().second != "delay_ns")
        throw DataError("padp csv: first column must be delay_ns followed by angle columns");
    PadpGrid g;
    for (std::size_t i = 1; i < cols.size(); ++i)
        g.angle_axis.push_back(deg2rad(parse_double(cols[i].second, 1, "angle header")));
    g.values_db = Matrix<double>(csv.rows.size(), cols.size() - 1);
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        g.delay_axis.push_back(parse_double(csv.rows[r][0], csv.lines[r], "delay_ns") * 1e-9);
        for (std::size_t a = 1; a < cols.size(); ++a)
            g.values_db(r, a - 1) = parse_double(csv.rows[r][a], csv.lines[r], "padp value");
    }
    return g;
}

void write_regions_csv(std::ostream &os, const LabeledRegions &regions)
{
    os << "label,delay_bin,angle_bin\n";
    for (std::size_t i = 0; i < regions.regions.size(); ++i)
        for (const auto &b : regions.regions[i])
            os << (i + 1) << "," << b.delay_bin << "," << b.angle_bin << "\n";
}

LabeledRegions read_regions_csv(std::istream &is, std::size_t n_delay, std::size_t n_angles)
{
    const Csv csv = read_csv(is);
    LabeledRegions out;
    out.labels = Matrix<int>(n_delay, n_angles, 0);
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        const std::size_t label = csv.count(r, "label");
        const std::size_t d = csv.count(r, "delay_bin"), a = csv.count(r, "angle_bin");
        if (label == 0)
            fail_line(csv.lines[r], "labels start at 1");
        if (d >= n_delay || a >= n_angles)
            fail_line(csv.lines[r], "bin outside the " + std::to_string(n_delay) + " x " + std::to_string(n_angles) +
                                        " grid");
        if (out.regions.size() < label)
            out.regions.resize(label);
        out.regions[label - 1].push_back({d, a});
        out.labels(d, a) = static_cast<int>(label);
    }
    return out;
}

void write_metrics_csv(std::ostream &os, const std::vector<ClusterRecord> &clusters)
{
    os << "trx,cluster,n_members,n_specular,n_diffuse,centroid_delay_ns,centroid_azimuth_deg,delay_depth_ns,"
          "angular_width_deg,delay_spread_ns,angular_spread_deg\n";
    for (const auto &c : clusters)
    {
        const auto &m = c.metrics;
        os << c.trx_id << "," << c.id << "," << c.members.size() << "," << m.n_specular << "," << m.n_diffuse << ","
           << g17(c.centroid_delay_s * 1e9) << "," << g17(rad2deg(c.centroid_azimuth_rad)) << ","
           << g17(m.delay_depth_s * 1e9) << "," << g17(rad2deg(m.angular_width_rad)) << ","
           << g17(m.delay_spread_s * 1e9) << "," << g17(rad2deg(m.angular_spread_rad)) << "\n";
    }
}

void write_members_csv(std::ostream &os, const std::vector<ClusterRecord> &clusters)
{
    os << "trx,cluster,reflector,tag,loss_db,amplitude_db,phase_deg,delay_ns,azimuth_deg\n";
    for (const auto &c : clusters)
        for (const auto &t : c.members)
            os << c.trx_id << "," << c.id << "," << t.source_reflector << "," << to_string(t.tag) << ","
               << g17(t.loss_db) << "," << mpc_fields(t.mpc) << "\n";
}

std::vector<ClusterRecord> read_members_csv(std::istream &is)
{
    const Csv csv = read_csv(is);
    std::map<std::pair<std::size_t, std::size_t>, ClusterRecord> byid;
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        const auto key = std::make_pair(csv.count(r, "trx"), csv.count(r, "cluster"));
        auto &c = byid[key];
        c.trx_id = key.first;
        c.id = key.second;
        c.members.push_back(tagged_from(csv, r));
    }
    std::vector<ClusterRecord> out;
    for (auto &[key, c] : byid)
    {
        update_centroid(c);
        out.push_back(std::move(c));
    }
    return out;
}

std::string read_text(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DataError("cannot open '" + path.string() + "'");
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text))
        throw DataError("cannot write '" + path.string() + "'");
}

} // namespace thz::io
