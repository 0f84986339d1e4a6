// SPDX-License-Identifier: Apache-2.0
//
// fimsim: beamforming and surface-shape optimization for flexible metasurface arrays
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

// Command-line driver for the FIM experiments.
//
//   fimsim run <config.json> [--out DIR] [--trials N] [--seed S] [--workers W]
//   fimsim sweep-gamma [config.json] [...]   SINR target 0..15 dB in 1 dB steps
//   fimsim sweep-paths [config.json] [...]   L in {2, 4, 8, 16}
//   fimsim sweep-zeta  [config.json] [...]   morphing range in {0, 0.25, 0.5, 0.75, 1} wavelengths
//   fimsim converge    [config.json] [...]   per-iteration traces at L = 4
//   fimsim config      [config.json]         print the fully resolved configuration

#include "fim/experiment.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>
#include <optional>

namespace {

struct Overrides
{
    std::string config_path;
    std::string out_dir = "results";
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
};

void add_common(CLI::App *cmd, Overrides &o, bool config_required)
{
    auto *opt = cmd->add_option("config", o.config_path, "Experiment configuration (JSON)");
    if (config_required)
        opt->required()->check(CLI::ExistingFile);
    else
        opt->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", o.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("-n,--trials", o.trials, "Monte Carlo trials per sweep point")->check(CLI::PositiveNumber);
    cmd->add_option("-s,--seed", o.seed, "Base random seed");
    cmd->add_option("-w,--workers", o.workers, "Worker threads (0 = all cores)")->capture_default_str();
}

fim::ExperimentConfig resolve(const Overrides &o)
{
    fim::ExperimentConfig c = o.config_path.empty() ? fim::ExperimentConfig{} : fim::load_config(o.config_path);
    if (o.trials)
        c.trials = *o.trials;
    if (o.seed)
        c.seed = *o.seed;
    return c;
}

void report_error(const std::string &kind, const std::string &message, const std::string &field = {})
{
    fim::json j{{"error", kind}, {"message", message}};
    if (!field.empty())
        j["field"] = field;
    std::cerr << j.dump() << '\n';
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Beamforming and surface-shape optimization for flexible intelligent metasurfaces"};
    app.require_subcommand(1);

    Overrides o;
    std::string preset;
    struct Preset
    {
        const char *name;
        const char *help;
        bool config_required;
    };
    const Preset presets[] = {{"run", "Run the experiment described by a config file", true},
                              {"sweep-gamma", "Transmit power versus SINR target", false},
                              {"sweep-paths", "Transmit power versus number of paths", false},
                              {"sweep-zeta", "Transmit power versus morphing range", false},
                              {"converge", "Per-iteration power and shape traces", false}};
    std::string show_path;
    CLI::App *show = app.add_subcommand("config", "Print the fully resolved configuration as JSON");
    show->add_option("config", show_path, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
    show->callback([&preset] { preset = "config"; });

    for (const Preset &p : presets)
    {
        CLI::App *cmd = app.add_subcommand(p.name, p.help);
        add_common(cmd, o, p.config_required);
        cmd->callback([&preset, name = std::string(p.name)] { preset = name; });
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        report_error("usage", e.what());
        return 2;
    }

    try
    {
        if (preset == "config")
        {
            const fim::ExperimentConfig c = show_path.empty() ? fim::ExperimentConfig{} : fim::load_config(show_path);
            std::cout << fim::to_json(c).dump(2) << '\n';
            return 0;
        }
        fim::ExperimentConfig c = resolve(o);
        if (preset == "sweep-gamma")
        {
            c.sweep_axis = fim::SweepAxis::sinr_target_db;
            c.sweep_values.clear();
            for (int g = 0; g <= 15; ++g)
                c.sweep_values.push_back(g);
        }
        else if (preset == "sweep-paths")
        {
            c.sweep_axis = fim::SweepAxis::path_count;
            c.sweep_values = {2, 4, 8, 16};
        }
        else if (preset == "sweep-zeta")
        {
            c.sweep_axis = fim::SweepAxis::morphing_range;
            c.sweep_values = {0.0, 0.25, 0.5, 0.75, 1.0};
        }
        else if (preset == "converge")
        {
            c.sweep_axis = fim::SweepAxis::none;
            c.sweep_values.clear();
            c.channel.paths = 4;
        }
        c.validate();

        const auto t0 = std::chrono::steady_clock::now();
        const fim::SweepResult r = fim::run_experiment(c, o.workers);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto files = fim::emit_results(r, o.out_dir);

        for (const auto &p : r.points)
            if (c.sweep_axis != fim::SweepAxis::none)
                std::printf("%-8g %-11s %9.3f dBm  (ok %d, failed %d)\n", p.sweep_value,
                            c.schemes[static_cast<size_t>(p.scheme)].name().c_str(), p.mean_power_dbm, p.trials_ok,
                            p.trials_failed);
            else
                std::printf("%-11s %9.3f dBm  (ok %d, failed %d)\n",
                            c.schemes[static_cast<size_t>(p.scheme)].name().c_str(), p.mean_power_dbm, p.trials_ok,
                            p.trials_failed);
        for (const auto &f : files)
            std::printf("wrote %s\n", f.string().c_str());
        std::printf("%.2f s\n", secs);
    }
    catch (const fim::ConfigError &e)
    {
        report_error("config", e.what(), e.field());
        return 1;
    }
    catch (const std::exception &e)
    {
        report_error("runtime", e.what());
        return 1;
    }
    return 0;
}
