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

#include "thzsense/cli.hpp"

#include "thzsense/io.hpp"
#include "thzsense/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

namespace thz::cli
{

namespace fs = std::filesystem;

namespace
{

// Files produced by a command; written only after the whole command succeeded.
struct Outputs
{
    std::ostringstream stdout_text;
    std::vector<std::pair<fs::path, std::string>> files;
    std::vector<std::pair<fs::path, CfrTensor>> cfrs;

    void text(const fs::path &p, std::string s) { files.emplace_back(p, std::move(s)); }

    // "-" or empty means stdout.
    void text_or_stdout(const std::string &path, const std::string &s)
    {
        if (path.empty() || path == "-")
            stdout_text << s;
        else
            text(path, s);
    }

    void commit(std::ostream &out) const
    {
        for (const auto &[p, s] : files)
            if (p.has_parent_path())
                fs::create_directories(p.parent_path());
        for (const auto &[p, t] : cfrs)
            if (p.has_parent_path())
                fs::create_directories(p.parent_path());
        for (const auto &[p, t] : cfrs)
            io::write_cfr(p, t);
        for (const auto &[p, s] : files)
            io::write_text(p, s);
        out << stdout_text.str();
    }
};

std::string trx_name(std::size_t t, const char *ext)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "trx%03zu%s", t, ext);
    return buf;
}

std::string fmt(const char *f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string read_file(const std::string &path) { return io::read_text(path); }

std::istringstream open_text(const std::string &path) { return std::istringstream(read_file(path)); }

std::vector<MaterialModel> material_db_from(const std::string &scene_path)
{
    return scene_path.empty() ? default_material_db() : io::load_scene(scene_path).material_db;
}

std::string fit_lines(const std::string &label, const std::vector<double> &samples)
{
    std::string s;
    for (auto family : {DistributionFamily::normal, DistributionFamily::lognormal, DistributionFamily::weibull})
    {
        s += label + " " + to_string(family) + ": ";
        try
        {
            const auto f = fit_distribution(samples, family);
            std::visit(
                [&](const auto &p) {
                    using P = std::decay_t<decltype(p)>;
                    if constexpr (std::is_same_v<P, NormalParams>)
                        s += "mu=" + fmt("%.4f", p.mu) + " sigma=" + fmt("%.4f", p.sigma);
                    else if constexpr (std::is_same_v<P, LognormalParams>)
                        s += "mu_log=" + fmt("%.4f", p.mu_log) + " sigma_log=" + fmt("%.4f", p.sigma_log);
                    else
                        s += "shape=" + fmt("%.4f", p.shape) + " scale=" + fmt("%.4f", p.scale);
                },
                f.params);
            s += " loglik=" + fmt("%.4f", f.log_likelihood) + " n=" + std::to_string(f.n) + "\n";
        }
        catch (const DataError &e)
        {
            s += std::string("not fitted (") + e.what() + ")\n";
        }
    }
    return s;
}

std::string distribution_report(const std::vector<ClusterRecord> &clusters)
{
    std::vector<double> spec, diff, tau_rms, phi_rms;
    for (const auto &c : clusters)
    {
        for (const auto &m : c.members)
            (m.tag == MpcTag::specular ? spec : diff).push_back(m.loss_db);
        if (c.members.size() > 1)
        {
            tau_rms.push_back(c.metrics.delay_spread_s * 1e9);
            phi_rms.push_back(rad2deg(c.metrics.angular_spread_rad));
        }
    }
    return fit_lines("specular_loss_db", spec) + fit_lines("diffuse_loss_db", diff) +
           fit_lines("delay_spread_ns", tau_rms) + fit_lines("angular_spread_deg", phi_rms);
}

void add_threads(CLI::App *cmd, unsigned &threads)
{
    cmd->add_option("--threads", threads, "Worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 256u));
}

} // namespace

int run_command(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"thzsense: terahertz monostatic sensing channel toolkit", "thzsense"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    Outputs outputs;
    std::function<void()> action;

    std::string scene_path, in_path, out_path, cfr_path, mpcs_path, regions_path, format = "json", window = "rect",
                                                                                  scenario = "scenario1";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::size_t max_paths = 400, n_trx = 1, trx_id = 0;
    double margin_db = 10.0, dynamic_range_db = 40.0;
    std::optional<double> floor_db;
    int element_delay = 3, element_angle = 3, connectivity = 8;
    std::size_t n_min = 4;
    bool no_diffuse = false;

    // synth
    auto *synth = app.add_subcommand("synth", "Synthesize noisy CFR files and ground-truth MPCs from a scene");
    synth->add_option("--scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
    synth->add_option("--seed", seed, "Random seed")->required();
    synth->add_option("--out", out_path, "Output directory")->required();
    synth->add_flag("--no-diffuse", no_diffuse, "Specular MPCs only");
    add_threads(synth, threads);
    synth->callback([&]() {
        action = [&]() {
            const Scene scene = io::load_scene(scene_path);
            SynthesisOptions so;
            so.include_diffuse = !no_diffuse;
            std::ostringstream truth;
            truth << "trx,reflector,tag,loss_db,amplitude_db,phase_deg,delay_ns,azimuth_deg\n";
            for (std::size_t t = 0; t < scene.trx_positions.size(); ++t)
            {
                auto mpcs = scene_to_mpcs(scene, t, seed, so);
                CfrTensor cfr = synthesize_cfr(std::span<const TaggedMpc>(mpcs), scene.config, threads);
                cfr = add_noise(cfr, scene.config.noise_floor_db, derive_seed(seed, 0x747278ULL, t));
                cfr.trx_id = t;
                io::write_truth_csv(truth, mpcs, t);
                const fs::path p = fs::path(out_path) / trx_name(t, ".cfr");
                outputs.cfrs.emplace_back(p, std::move(cfr));
                outputs.stdout_text << "trx " << t << ": " << mpcs.size() << " MPCs -> " << p.string() << "\n";
            }
            outputs.text(fs::path(out_path) / "truth.csv", truth.str());
        };
    });

    // padp
    auto *padp = app.add_subcommand("padp", "Convert a CFR file to a power-angular-delay profile CSV");
    padp->add_option("--in", in_path, "CFR file")->required()->check(CLI::ExistingFile);
    padp->add_option("--out", out_path, "Output CSV (default stdout)");
    padp->add_option("--window", window, "Frequency window: rect or hann");
    padp->callback([&]() {
        action = [&]() {
            const auto p = cir_to_padp(cfr_to_cir(io::read_cfr(fs::path(in_path)), parse_window(window)));
            std::ostringstream os;
            write_padp_csv(os, p);
            outputs.text_or_stdout(out_path, os.str());
        };
    });

    // cluster
    auto *cluster = app.add_subcommand("cluster", "Binarize, close and label a PADP CSV into regions");
    cluster->add_option("--in", in_path, "PADP CSV")->required()->check(CLI::ExistingFile);
    cluster->add_option("--out", out_path, "Output regions CSV (default stdout)");
    cluster->add_option("--floor-db", floor_db, "Noise floor (default: PADP median)");
    cluster->add_option("--margin-db", margin_db, "Threshold above the floor");
    cluster->add_option("--element-delay", element_delay, "Structuring element delay extent (bins)")
        ->check(CLI::PositiveNumber);
    cluster->add_option("--element-angle", element_angle, "Structuring element angle extent (bins)")
        ->check(CLI::PositiveNumber);
    cluster->add_option("--connectivity", connectivity, "4 or 8")->check(CLI::IsMember({4, 8}));
    cluster->add_option("--n-min", n_min, "Smallest region kept (bins)");
    cluster->callback([&]() {
        action = [&]() {
            auto in = open_text(in_path);
            const PadpGrid p = io::read_padp_csv(in);
            const double f = floor_db ? *floor_db : estimate_noise_floor(p);
            const auto mask = morph_close(binarize_padp(p, f, margin_db),
                                          StructuringElement::rectangle(element_delay, element_angle));
            std::ostringstream os;
            io::write_regions_csv(os, label_regions(mask, connectivity, n_min));
            outputs.text_or_stdout(out_path, os.str());
        };
    });

    // estimate
    auto *estimate = app.add_subcommand("estimate", "Estimate discrete MPCs from a CFR file");
    estimate->add_option("--in", in_path, "CFR file")->required()->check(CLI::ExistingFile);
    estimate->add_option("--out", out_path, "Output MPC CSV (default stdout)");
    estimate->add_option("--max-paths", max_paths, "Path budget");
    estimate->add_option("--dynamic-range-db", dynamic_range_db, "Stop below the strongest path by this much");
    estimate->add_option("--trx", trx_id, "TRx index written to the CSV");
    add_threads(estimate, threads);
    estimate->callback([&]() {
        action = [&]() {
            EstimatorOptions eo;
            eo.max_paths = max_paths;
            eo.dynamic_range_db = dynamic_range_db;
            eo.threads = threads;
            std::ostringstream os;
            io::write_mpc_csv(os, estimate_paths(io::read_cfr(fs::path(in_path)), eo), trx_id);
            outputs.text_or_stdout(out_path, os.str());
        };
    });

    // characterize
    auto *characterize =
        app.add_subcommand("characterize", "Assign estimated MPCs to regions, tag them and compute cluster metrics");
    characterize->add_option("--cfr", cfr_path, "CFR file providing the sounder grid")
        ->required()
        ->check(CLI::ExistingFile);
    characterize->add_option("--mpcs", mpcs_path, "MPC CSV from estimate")->required()->check(CLI::ExistingFile);
    characterize->add_option("--regions", regions_path, "Regions CSV from cluster")
        ->required()
        ->check(CLI::ExistingFile);
    characterize->add_option("--out", out_path, "Output directory for members.csv and metrics.csv")->required();
    characterize->callback([&]() {
        action = [&]() {
            const CfrTensor cfr = io::read_cfr(fs::path(cfr_path));
            const auto &cfg = cfr.config;
            auto min = open_text(mpcs_path);
            std::vector<std::size_t> ids;
            const auto mpcs = io::read_mpc_csv(min, &ids);
            const std::size_t trx = ids.empty() ? 0 : ids.front();
            auto rin = open_text(regions_path);
            const auto regions = io::read_regions_csv(rin, cfg.n_freq, cfg.n_angles);
            auto clusters = assign_mpcs_to_clusters(regions, mpcs, cfg, trx);
            double floor = std::numeric_limits<double>::infinity();
            for (const auto &m : mpcs)
                floor = std::min(floor, m.mpc.power_db());
            for (auto &c : clusters)
            {
                c.detection_floor_db = floor;
                split_specular_diffuse(c, cfg.center_freq());
                c.metrics = cluster_metrics(c);
            }
            std::ostringstream members, metrics;
            io::write_members_csv(members, clusters);
            io::write_metrics_csv(metrics, clusters);
            outputs.text(fs::path(out_path) / "members.csv", members.str());
            outputs.text(fs::path(out_path) / "metrics.csv", metrics.str());
            outputs.stdout_text << clusters.size() << " clusters\n" << distribution_report(clusters);
        };
    });

    // infer
    auto *infer = app.add_subcommand("infer", "Build the four-level environment report from cluster members");
    infer->add_option("--members", in_path, "members.csv from characterize or genstoch")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--scene", scene_path, "Scene file whose material database is used")
        ->check(CLI::ExistingFile);
    infer->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
    infer->add_option("--out", out_path, "Output file (default stdout)");
    infer->add_option("--detection-floor-db", floor_db, "Weakest observable path power, for truncated loss likelihoods");
    infer->callback([&]() {
        action = [&]() {
            auto in = open_text(in_path);
            auto clusters = io::read_members_csv(in);
            for (auto &c : clusters)
            {
                c.metrics = cluster_metrics(c);
                if (floor_db)
                    c.detection_floor_db = *floor_db;
            }
            const auto rep = build_environment_report(clusters, material_db_from(scene_path));
            outputs.text_or_stdout(out_path, format == "json" ? report_to_json(rep) : report_to_text(rep));
        };
    });

    // genstoch
    auto *genstoch = app.add_subcommand("genstoch", "Draw synthetic clusters from scenario statistics");
    genstoch->add_option("--scenario", scenario, "scenario1, scenario2, trx37_45 or trx46_57");
    genstoch->add_option("--seed", seed, "Random seed")->required();
    genstoch->add_option("--n-trx", n_trx, "Number of TRx positions")->check(CLI::PositiveNumber);
    genstoch->add_option("--scene", scene_path, "Scene file providing sounder config and materials")
        ->check(CLI::ExistingFile);
    genstoch->add_option("--out", out_path, "Output directory")->required();
    genstoch->callback([&]() {
        action = [&]() {
            const ScenarioStats stats = default_scenario_stats(parse_scenario_case(scenario));
            Scene scene;
            if (!scene_path.empty())
                scene = io::load_scene(scene_path);
            std::vector<ClusterRecord> all;
            std::ostringstream labels;
            labels << "trx,cluster,material\n";
            for (std::size_t t = 0; t < n_trx; ++t)
            {
                auto drawn = draw_stochastic_clusters(stats, scene.material_db, scene.config, derive_seed(seed, t));
                for (auto &sc : drawn)
                {
                    sc.record.trx_id = t;
                    labels << t << "," << sc.record.id << "," << sc.material << "\n";
                    all.push_back(std::move(sc.record));
                }
            }
            std::ostringstream members, metrics;
            io::write_members_csv(members, all);
            io::write_metrics_csv(metrics, all);
            outputs.text(fs::path(out_path) / "members.csv", members.str());
            outputs.text(fs::path(out_path) / "metrics.csv", metrics.str());
            outputs.text(fs::path(out_path) / "materials.csv", labels.str());
            outputs.stdout_text << all.size() << " clusters over " << n_trx << " TRx positions\n";
        };
    });

    // report
    auto *report = app.add_subcommand("report", "Simulate, analyze and report a scene end to end");
    report->add_option("--scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
    report->add_option("--seed", seed, "Random seed")->required();
    report->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
    report->add_option("--out", out_path, "Output directory (default: report on stdout)");
    report->add_option("--max-paths", max_paths, "Estimator path budget per TRx");
    add_threads(report, threads);
    report->callback([&]() {
        action = [&]() {
            const Scene scene = io::load_scene(scene_path);
            PipelineOptions po;
            po.estimator.max_paths = max_paths;
            po.threads = threads;
            std::vector<TrxAnalysis> analyses;
            const auto rep = run_scene_report(scene, seed, po, &analyses);
            const std::string body = format == "json" ? report_to_json(rep) : report_to_text(rep);
            if (out_path.empty())
            {
                outputs.stdout_text << body;
                return;
            }
            const fs::path dir(out_path);
            outputs.text(dir / "report.json", report_to_json(rep));
            outputs.text(dir / "report.txt", report_to_text(rep));
            std::vector<ClusterRecord> all;
            for (const auto &a : analyses)
            {
                std::ostringstream mp;
                io::write_mpc_csv(mp, a.estimates, a.trx_id);
                outputs.text(dir / trx_name(a.trx_id, "_mpcs.csv"), mp.str());
                all.insert(all.end(), a.clusters.begin(), a.clusters.end());
                outputs.stdout_text << "trx " << a.trx_id << ": " << a.estimates.size() << " paths, "
                                    << a.clusters.size() << " clusters\n";
            }
            std::ostringstream members, metrics;
            io::write_members_csv(members, all);
            io::write_metrics_csv(metrics, all);
            outputs.text(dir / "members.csv", members.str());
            outputs.text(dir / "metrics.csv", metrics.str());
            outputs.stdout_text << "reflectors: " << rep.reflector_count() << "\n";
        };
    });

    if (!args.empty() && !args.front().empty() && args.front().front() != '-' &&
        app.get_subcommand_no_throw(args.front()) == nullptr)
    {
        err << "unknown subcommand '" << args.front() << "'\n" << app.help();
        return kExitUsage;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        if (code == 0)
            return kExitOk;
        if (e.get_name() == "RequiredError" && app.get_subcommands().empty())
            err << app.help();
        return kExitUsage;
    }

    try
    {
        action();
        outputs.commit(out);
        return kExitOk;
    }
    catch (const NumericalError &e)
    {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    catch (const DataError &e)
    {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    catch (const fs::filesystem_error &e)
    {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    catch (const std::invalid_argument &e)
    {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

} // namespace thz::cli
