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

#ifndef FIM_EXPERIMENT_HPP
#define FIM_EXPERIMENT_HPP

#include "fim/alternating.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fim {

// ---------- configuration ----------

// Invalid experiment configuration; `field` is the dotted path of the offending key.
class ConfigError : public std::invalid_argument
{
public:
    ConfigError(std::string field, const std::string &message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field))
    {
    }

    const std::string &field() const { return field_; }

private:
    std::string field_;
};

enum class SweepAxis
{
    none, // convergence traces at a single operating point
    sinr_target_db,
    path_count,
    morphing_range // in wavelengths
};

struct Scheme
{
    BeamformerKind beamformer = BeamformerKind::mmse;
    bool fim = false;

    std::string name() const { return std::string(to_string(beamformer)) + (fim ? "-fim" : "-rigid"); }
    bool operator==(const Scheme &) const = default;
};

inline std::vector<Scheme> all_schemes()
{
    return {{BeamformerKind::mmse, false}, {BeamformerKind::mmse, true}, {BeamformerKind::zf, false},
            {BeamformerKind::zf, true}};
}

struct ArrayConfig
{
    int n_x = 2;
    int n_z = 2;
    double spacing_x = 0.5; // wavelengths
    double spacing_z = 0.5; // wavelengths
};

struct ChannelConfig
{
    int paths = 8;
    double path_loss_exponent = 2.2;
    double reference_distance_m = 1.0;
    AngleLayout angle_layout = AngleLayout::per_user;
};

struct ExperimentConfig
{
    double carrier_frequency_hz = 28e9;
    double bandwidth_hz = 100e6;
    double noise_density_dbm_per_hz = -174.0;
    ArrayConfig array;
    ScenarioGeometry scenario;
    ChannelConfig channel;
    double sinr_target_db = 5.0;
    double morphing_range_wavelengths = 1.0;
    SweepAxis sweep_axis = SweepAxis::none;
    std::vector<double> sweep_values;
    std::vector<Scheme> schemes = all_schemes();
    int trials = 100;
    std::uint64_t seed = 1;
    AoConfig optimizer;

    double wavelength() const { return wavelength_from_frequency(carrier_frequency_hz); }

    void validate() const;
};

inline const char *to_string(SweepAxis a)
{
    switch (a)
    {
    case SweepAxis::sinr_target_db: return "sinr_target_db";
    case SweepAxis::path_count: return "path_count";
    case SweepAxis::morphing_range: return "morphing_range";
    default: return "none";
    }
}

inline const char *to_string(AngleLayout a) { return a == AngleLayout::shared ? "shared" : "per_user"; }

inline void ExperimentConfig::validate() const
{
    auto positive = [](double v, const char *field) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(field, "must be a positive number");
    };
    positive(carrier_frequency_hz, "carrier_frequency_hz");
    positive(bandwidth_hz, "bandwidth_hz");
    if (!std::isfinite(noise_density_dbm_per_hz))
        throw ConfigError("noise_density_dbm_per_hz", "must be finite");
    if (array.n_x < 1)
        throw ConfigError("array.n_x", "must be at least 1");
    if (array.n_z < 1)
        throw ConfigError("array.n_z", "must be at least 1");
    positive(array.spacing_x, "array.spacing_x");
    positive(array.spacing_z, "array.spacing_z");
    positive(scenario.bs_height, "scenario.bs_height_m");
    if (!(scenario.user_region_radius >= 0.0))
        throw ConfigError("scenario.region_radius_m", "must be non-negative");
    positive(scenario.region_center_distance, "scenario.region_center_distance_m");
    if (scenario.user_count < 1)
        throw ConfigError("scenario.users", "must be at least 1");
    if (channel.paths < 1)
        throw ConfigError("channel.paths", "must be at least 1");
    positive(channel.reference_distance_m, "channel.reference_distance_m");
    if (!std::isfinite(channel.path_loss_exponent))
        throw ConfigError("channel.path_loss_exponent", "must be finite");
    if (scenario.bs_height < channel.reference_distance_m)
        throw ConfigError("scenario.bs_height_m", "must not be below channel.reference_distance_m");
    if (!std::isfinite(sinr_target_db))
        throw ConfigError("sinr_target_db", "must be finite");
    if (!(morphing_range_wavelengths >= 0.0))
        throw ConfigError("morphing_range_wavelengths", "must be non-negative");
    if (sweep_axis == SweepAxis::none && !sweep_values.empty())
        throw ConfigError("sweep.values", "must be empty when sweep.axis is none");
    if (sweep_axis != SweepAxis::none && sweep_values.empty())
        throw ConfigError("sweep.values", "must list at least one value");
    for (double v : sweep_values)
    {
        if (!std::isfinite(v))
            throw ConfigError("sweep.values", "must be finite");
        if (sweep_axis == SweepAxis::path_count && (v < 1.0 || v != std::floor(v)))
            throw ConfigError("sweep.values", "path counts must be positive integers");
        if (sweep_axis == SweepAxis::morphing_range && v < 0.0)
            throw ConfigError("sweep.values", "morphing ranges must be non-negative");
    }
    if (schemes.empty())
        throw ConfigError("schemes", "must name at least one scheme");
    if (trials < 1)
        throw ConfigError("trials", "must be at least 1");
    if (optimizer.max_outer_iters < 1)
        throw ConfigError("optimizer.max_outer_iters", "must be at least 1");
    try
    {
        optimizer.morph.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError("optimizer.morph", e.what());
    }
}

// ---------- JSON mapping ----------

using json = nlohmann::ordered_json;

namespace detail {

class ObjectReader
{
public:
    ObjectReader(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T, typename Fn> void read(const std::string &key, T &out, Fn &&convert)
    {
        seen_.push_back(key);
        auto it = j_.find(key);
        if (it == j_.end())
            return;
        try
        {
            out = convert(*it);
        }
        catch (const ConfigError &)
        {
            throw;
        }
        catch (const std::exception &e)
        {
            throw ConfigError(field(key), e.what());
        }
    }

    void number(const std::string &key, double &out)
    {
        read(key, out, [&](const json &v) {
            if (!v.is_number())
                throw ConfigError(field(key), "expected a number");
            return v.get<double>();
        });
    }

    void integer(const std::string &key, int &out)
    {
        read(key, out, [&](const json &v) {
            if (!v.is_number_integer())
                throw ConfigError(field(key), "expected an integer");
            return v.get<int>();
        });
    }

    void boolean(const std::string &key, bool &out)
    {
        read(key, out, [&](const json &v) {
            if (!v.is_boolean())
                throw ConfigError(field(key), "expected true or false");
            return v.get<bool>();
        });
    }

    const json *object(const std::string &key)
    {
        seen_.push_back(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw ConfigError(field(it.key()), "unknown key");
    }

private:
    const json &j_;
    std::string path_;
    std::vector<std::string> seen_;
};

inline SweepAxis parse_axis(const std::string &s)
{
    for (SweepAxis a : {SweepAxis::none, SweepAxis::sinr_target_db, SweepAxis::path_count, SweepAxis::morphing_range})
        if (s == to_string(a))
            return a;
    throw ConfigError("sweep.axis", "unknown axis '" + s + "' (none, sinr_target_db, path_count, morphing_range)");
}

inline Scheme parse_scheme(const std::string &s)
{
    for (const Scheme &sc : all_schemes())
        if (s == sc.name())
            return sc;
    throw ConfigError("schemes", "unknown scheme '" + s + "' (mmse-rigid, mmse-fim, zf-rigid, zf-fim)");
}

} // namespace detail

inline json to_json(const ExperimentConfig &c)
{
    const MorphConfig &m = c.optimizer.morph;
    json schemes = json::array();
    for (const Scheme &s : c.schemes)
        schemes.push_back(s.name());
    return json{
        {"carrier_frequency_hz", c.carrier_frequency_hz},
        {"bandwidth_hz", c.bandwidth_hz},
        {"noise_density_dbm_per_hz", c.noise_density_dbm_per_hz},
        {"array",
         {{"n_x", c.array.n_x}, {"n_z", c.array.n_z}, {"spacing_x", c.array.spacing_x}, {"spacing_z", c.array.spacing_z}}},
        {"scenario",
         {{"bs_height_m", c.scenario.bs_height},
          {"region_radius_m", c.scenario.user_region_radius},
          {"region_center_distance_m", c.scenario.region_center_distance},
          {"users", c.scenario.user_count}}},
        {"channel",
         {{"paths", c.channel.paths},
          {"path_loss_exponent", c.channel.path_loss_exponent},
          {"reference_distance_m", c.channel.reference_distance_m},
          {"angle_layout", to_string(c.channel.angle_layout)}}},
        {"sinr_target_db", c.sinr_target_db},
        {"morphing_range_wavelengths", c.morphing_range_wavelengths},
        {"sweep", {{"axis", to_string(c.sweep_axis)}, {"values", c.sweep_values}}},
        {"schemes", schemes},
        {"trials", c.trials},
        {"seed", c.seed},
        {"optimizer",
         {{"max_outer_iters", c.optimizer.max_outer_iters},
          {"convergence_db", c.optimizer.convergence_db},
          {"shape_update", to_string(c.optimizer.shape_update)},
          {"fp_tol", c.optimizer.mmse.fp_tol},
          {"fp_max_iter", c.optimizer.mmse.fp_max_iter},
          {"morph",
           {{"initial_step_wavelengths", m.initial_step_wavelengths},
            {"backtrack_factor", m.backtrack_factor},
            {"armijo_constant", m.armijo_constant},
            {"max_backtracks", m.max_backtracks},
            {"max_ascent_iters", m.max_ascent_iters},
            {"max_expansions", m.max_expansions},
            {"grad_tol", m.grad_tol}}}}},
    };
}

// Accepts either a config object or a results sidecar (whose "config" member is used).
// Missing keys keep their defaults; unknown keys and type errors are rejected with the field path.
inline ExperimentConfig config_from_json(const json &root)
{
    const json &j = (root.is_object() && root.contains("config") && root.contains("records")) ? root["config"] : root;
    ExperimentConfig c;
    detail::ObjectReader r(j, "");
    r.number("carrier_frequency_hz", c.carrier_frequency_hz);
    r.number("bandwidth_hz", c.bandwidth_hz);
    r.number("noise_density_dbm_per_hz", c.noise_density_dbm_per_hz);
    if (const json *a = r.object("array"))
    {
        detail::ObjectReader ar(*a, "array");
        ar.integer("n_x", c.array.n_x);
        ar.integer("n_z", c.array.n_z);
        ar.number("spacing_x", c.array.spacing_x);
        ar.number("spacing_z", c.array.spacing_z);
        ar.finish();
    }
    if (const json *s = r.object("scenario"))
    {
        detail::ObjectReader sr(*s, "scenario");
        sr.number("bs_height_m", c.scenario.bs_height);
        sr.number("region_radius_m", c.scenario.user_region_radius);
        sr.number("region_center_distance_m", c.scenario.region_center_distance);
        sr.integer("users", c.scenario.user_count);
        sr.finish();
    }
    if (const json *ch = r.object("channel"))
    {
        detail::ObjectReader cr(*ch, "channel");
        cr.integer("paths", c.channel.paths);
        cr.number("path_loss_exponent", c.channel.path_loss_exponent);
        cr.number("reference_distance_m", c.channel.reference_distance_m);
        cr.read("angle_layout", c.channel.angle_layout, [&](const json &v) {
            const auto s = v.get<std::string>();
            if (s == "per_user")
                return AngleLayout::per_user;
            if (s == "shared")
                return AngleLayout::shared;
            throw ConfigError("channel.angle_layout", "expected 'per_user' or 'shared'");
        });
        cr.finish();
    }
    r.number("sinr_target_db", c.sinr_target_db);
    r.number("morphing_range_wavelengths", c.morphing_range_wavelengths);
    if (const json *sw = r.object("sweep"))
    {
        detail::ObjectReader swr(*sw, "sweep");
        swr.read("axis", c.sweep_axis, [](const json &v) { return detail::parse_axis(v.get<std::string>()); });
        swr.read("values", c.sweep_values, [](const json &v) { return v.get<std::vector<double>>(); });
        swr.finish();
    }
    r.read("schemes", c.schemes, [](const json &v) {
        std::vector<Scheme> out;
        for (const auto &s : v)
            out.push_back(detail::parse_scheme(s.get<std::string>()));
        return out;
    });
    r.integer("trials", c.trials);
    r.read("seed", c.seed, [](const json &v) {
        if (!v.is_number_unsigned())
            throw ConfigError("seed", "expected a non-negative integer");
        return v.get<std::uint64_t>();
    });
    if (const json *o = r.object("optimizer"))
    {
        detail::ObjectReader orr(*o, "optimizer");
        orr.integer("max_outer_iters", c.optimizer.max_outer_iters);
        orr.number("convergence_db", c.optimizer.convergence_db);
        orr.read("shape_update", c.optimizer.shape_update, [](const json &v) {
            const auto s = v.get<std::string>();
            if (s == "power_descent")
                return ShapeUpdate::power_descent;
            if (s == "margin_ascent")
                return ShapeUpdate::margin_ascent;
            throw ConfigError("optimizer.shape_update", "expected 'power_descent' or 'margin_ascent'");
        });
        orr.number("fp_tol", c.optimizer.mmse.fp_tol);
        orr.integer("fp_max_iter", c.optimizer.mmse.fp_max_iter);
        if (const json *m = orr.object("morph"))
        {
            detail::ObjectReader mr(*m, "optimizer.morph");
            MorphConfig &mc = c.optimizer.morph;
            mr.number("initial_step_wavelengths", mc.initial_step_wavelengths);
            mr.number("backtrack_factor", mc.backtrack_factor);
            mr.number("armijo_constant", mc.armijo_constant);
            mr.integer("max_backtracks", mc.max_backtracks);
            mr.integer("max_ascent_iters", mc.max_ascent_iters);
            mr.integer("max_expansions", mc.max_expansions);
            mr.number("grad_tol", mc.grad_tol);
            mr.finish();
        }
        orr.finish();
    }
    r.finish();
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file " + path.string());
    json j;
    try
    {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

// ---------- running ----------

struct TrialRecord
{
    int point = 0;
    int trial = 0;
    int scheme = 0;
    bool ok = false;
    double power_w = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    std::string error;
    std::vector<OuterIteration> trace; // convergence runs only
};

struct SweepPoint
{
    double sweep_value = 0.0;
    int scheme = 0;
    double mean_power_dbm = std::numeric_limits<double>::quiet_NaN();
    double std_power_dbm = std::numeric_limits<double>::quiet_NaN();
    int trials_ok = 0;
    int trials_failed = 0;
};

struct SweepResult
{
    ExperimentConfig config;
    std::vector<SweepPoint> points;   // sweep point major, scheme minor
    std::vector<TrialRecord> records; // point major, then trial, then scheme

    const SweepPoint &at(int point, int scheme) const
    {
        return points[static_cast<size_t>(point) * config.schemes.size() + static_cast<size_t>(scheme)];
    }
};

// The operating point of one sweep value.
struct ResolvedPoint
{
    double sinr_target_db;
    int paths;
    double morphing_range_wavelengths;
};

inline ResolvedPoint resolve_point(const ExperimentConfig &c, double v)
{
    ResolvedPoint p{c.sinr_target_db, c.channel.paths, c.morphing_range_wavelengths};
    switch (c.sweep_axis)
    {
    case SweepAxis::sinr_target_db: p.sinr_target_db = v; break;
    case SweepAxis::path_count: p.paths = static_cast<int>(v); break;
    case SweepAxis::morphing_range: p.morphing_range_wavelengths = v; break;
    default: break;
    }
    return p;
}

// Runs every scheme of one (sweep point, trial) on the same channel realization. The realization
// depends only on seed + trial (and on the path count), so it is also shared across sweep points.
inline std::vector<TrialRecord> run_trial(const ExperimentConfig &c, int point, int trial)
{
    const double v = c.sweep_axis == SweepAxis::none ? 0.0 : c.sweep_values[static_cast<size_t>(point)];
    const ResolvedPoint rp = resolve_point(c, v);
    const double lambda = c.wavelength();
    const FimGeometry geom(c.array.n_x, c.array.n_z, c.array.spacing_x * lambda, c.array.spacing_z * lambda, lambda);

    Rng rng(c.seed + static_cast<std::uint64_t>(trial));
    const auto distances = sample_user_positions(rng, c.scenario);
    const LinkBudget link =
        make_link_budget(distances, c.channel.reference_distance_m, c.channel.path_loss_exponent, lambda,
                         noise_power(c.noise_density_dbm_per_hz, c.bandwidth_hz));
    const ScatteringEnvironment env = sample_environment(rng, rp.paths, link, c.channel.angle_layout);
    const std::vector<double> targets(static_cast<size_t>(c.scenario.user_count), db_to_linear(rp.sinr_target_db));

    std::vector<TrialRecord> out;
    for (size_t s = 0; s < c.schemes.size(); ++s)
    {
        TrialRecord rec;
        rec.point = point;
        rec.trial = trial;
        rec.scheme = static_cast<int>(s);
        AoConfig ao = c.optimizer;
        ao.beamformer = c.schemes[s].beamformer;
        ao.morph_enabled = c.schemes[s].fim;
        try
        {
            OptimizationTrace t = optimize(env, geom, link, targets, rp.morphing_range_wavelengths * lambda, ao);
            rec.ok = true;
            rec.power_w = t.final_power();
            rec.iterations = t.iterations_used();
            rec.converged = t.converged;
            if (c.sweep_axis == SweepAxis::none)
                rec.trace = std::move(t.iterations);
        }
        catch (const std::exception &e)
        {
            rec.error = e.what();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// Trials are spread over `workers` threads (0 = hardware concurrency) and reduced in trial order,
// so the result does not depend on the worker count.
inline SweepResult run_experiment(const ExperimentConfig &config, unsigned workers = 1)
{
    config.validate();
    const int n_points = config.sweep_axis == SweepAxis::none ? 1 : static_cast<int>(config.sweep_values.size());
    const int n_units = n_points * config.trials;

    std::vector<std::vector<TrialRecord>> slots(static_cast<size_t>(n_units));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int u = next++; u < n_units; u = next++)
            slots[static_cast<size_t>(u)] = run_trial(config, u / config.trials, u % config.trials);
    };
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n_units));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w)
            pool.emplace_back(work);
        work();
    }

    SweepResult res;
    res.config = config;
    for (auto &slot : slots)
        for (auto &rec : slot)
            res.records.push_back(std::move(rec));

    const size_t n_schemes = config.schemes.size();
    for (int p = 0; p < n_points; ++p)
        for (size_t s = 0; s < n_schemes; ++s)
        {
            SweepPoint sp;
            sp.sweep_value = config.sweep_axis == SweepAxis::none ? 0.0 : config.sweep_values[static_cast<size_t>(p)];
            sp.scheme = static_cast<int>(s);
            std::vector<double> dbm;
            for (int t = 0; t < config.trials; ++t)
            {
                const TrialRecord &r =
                    res.records[(static_cast<size_t>(p) * static_cast<size_t>(config.trials) + static_cast<size_t>(t)) *
                                    n_schemes +
                                s];
                if (r.ok)
                    dbm.push_back(transmit_power_dbm(r.power_w));
                else
                    ++sp.trials_failed;
            }
            sp.trials_ok = static_cast<int>(dbm.size());
            if (!dbm.empty())
            {
                double sum = 0.0;
                for (double x : dbm)
                    sum += x;
                sp.mean_power_dbm = sum / static_cast<double>(dbm.size());
            }
            if (dbm.size() > 1)
            {
                double ss = 0.0;
                for (double x : dbm)
                    ss += (x - sp.mean_power_dbm) * (x - sp.mean_power_dbm);
                sp.std_power_dbm = std::sqrt(ss / static_cast<double>(dbm.size() - 1));
            }
            res.points.push_back(sp);
        }
    return res;
}

// ---------- output ----------

namespace detail {

inline std::string fmt_double(const char *format, double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

inline void write_file(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out)
        throw std::runtime_error("write to " + path.string() + " failed");
}

} // namespace detail

inline std::string results_csv(const SweepResult &r)
{
    std::ostringstream os;
    os << "sweep_value,scheme,mean_power_dbm,std_power_dbm,trials_ok,trials_failed\n";
    for (const SweepPoint &p : r.points)
        os << detail::fmt_double("%.6g", p.sweep_value) << ',' << r.config.schemes[static_cast<size_t>(p.scheme)].name()
           << ',' << detail::fmt_double("%.6f", p.mean_power_dbm) << ',' << detail::fmt_double("%.6f", p.std_power_dbm)
           << ',' << p.trials_ok << ',' << p.trials_failed << '\n';
    return os.str();
}

// One file per scheme: trial,iteration,power_dbm,y_1..y_N with displacements in meters.
inline std::string convergence_csv(const SweepResult &r, int scheme)
{
    const int N = r.config.array.n_x * r.config.array.n_z;
    std::ostringstream os;
    os << "trial,iteration,power_dbm";
    for (int n = 1; n <= N; ++n)
        os << ",y_" << n;
    os << '\n';
    for (const TrialRecord &rec : r.records)
    {
        if (rec.scheme != scheme || !rec.ok)
            continue;
        for (size_t i = 0; i < rec.trace.size(); ++i)
        {
            const OuterIteration &it = rec.trace[i];
            os << rec.trial << ',' << i << ',' << detail::fmt_double("%.6f", transmit_power_dbm(it.power));
            for (Eigen::Index n = 0; n < it.shape.size(); ++n)
                os << ',' << detail::fmt_double("%.9e", it.shape[n]);
            os << '\n';
        }
    }
    return os.str();
}

inline json results_json(const SweepResult &r)
{
    json records = json::array();
    for (const TrialRecord &rec : r.records)
    {
        json j{{"sweep_value", r.config.sweep_axis == SweepAxis::none
                                   ? 0.0
                                   : r.config.sweep_values[static_cast<size_t>(rec.point)]},
               {"trial", rec.trial},
               {"scheme", r.config.schemes[static_cast<size_t>(rec.scheme)].name()},
               {"ok", rec.ok}};
        if (rec.ok)
        {
            j["power_w"] = rec.power_w;
            j["iterations"] = rec.iterations;
            j["converged"] = rec.converged;
        }
        else
            j["error"] = rec.error;
        records.push_back(std::move(j));
    }
    return json{{"config", to_json(r.config)}, {"records", std::move(records)}};
}

// Sweep runs write results.csv and results.json; convergence runs write convergence_<scheme>.csv.
// Returns the paths written.
inline std::vector<std::filesystem::path> emit_results(const SweepResult &r, const std::filesystem::path &dir)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    if (r.config.sweep_axis == SweepAxis::none)
    {
        for (size_t s = 0; s < r.config.schemes.size(); ++s)
        {
            written.push_back(dir / ("convergence_" + r.config.schemes[s].name() + ".csv"));
            detail::write_file(written.back(), convergence_csv(r, static_cast<int>(s)));
        }
        return written;
    }
    written.push_back(dir / "results.csv");
    detail::write_file(written.back(), results_csv(r));
    written.push_back(dir / "results.json");
    detail::write_file(written.back(), results_json(r).dump(2) + "\n");
    return written;
}

} // namespace fim

#endif
