// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#include "posw/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

namespace posw {

std::string_view to_string(Experiment e)
{
    switch (e) {
    case Experiment::SeSweep: return "se_sweep";
    case Experiment::EeSweep: return "ee_sweep";
    case Experiment::BeamPattern: return "beampattern";
    case Experiment::Estimation: return "estimation";
    }
    return "unknown";
}

Experiment parse_experiment(std::string_view name)
{
    for (auto e : {Experiment::SeSweep, Experiment::EeSweep, Experiment::BeamPattern, Experiment::Estimation})
        if (to_string(e) == name)
            return e;
    throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

OutputFormat parse_output_format(std::string_view name)
{
    if (name == "csv")
        return OutputFormat::Csv;
    if (name == "json")
        return OutputFormat::Json;
    throw ConfigError("unknown output format '" + std::string(name) + "' (expected csv or json)");
}

std::string resolution_label(const Resolution& r)
{
    return r ? std::to_string(*r) : std::string("infinite");
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ConfigError(what);
}

bool is_power_of_two(int n)
{
    return n > 0 && (n & (n - 1)) == 0;
}

bool is_discrete(DesignMethod m)
{
    return m != DesignMethod::FullDigital && m != DesignMethod::PeAltMin;
}

} // namespace

void ExperimentConfig::validate() const
{
    require(trials >= 1, "trials must be >= 1");
    require(threads >= 1, "threads must be >= 1");
    require(outer_iters >= 1, "outer_iters must be >= 1");
    for (const auto& r : resolutions)
        require(!r || *r >= 2, "phase resolutions must be >= 2 or \"infinite\"");

    try {
        channel.validate();
        power.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const bool needs_finite_snr = experiment == Experiment::SeSweep || experiment == Experiment::EeSweep;
    if (experiment != Experiment::BeamPattern) {
        require(!snr_db.empty(), "snr_db must not be empty");
        for (double s : snr_db) {
            require(!std::isnan(s), "snr_db entries must be numbers");
            require(!needs_finite_snr || std::isfinite(s), "snr_db entries must be finite for this experiment");
            require(s != -std::numeric_limits<double>::infinity(), "snr_db must not be -inf");
        }
    }

    switch (experiment) {
    case Experiment::SeSweep: {
        require(num_tx_antennas >= 1 && num_rx_antennas >= 1, "antenna counts must be >= 1");
        require(num_streams >= 1, "n_s must be >= 1");
        require(num_streams <= num_rf_tx && num_streams <= num_rf_rx, "need n_s <= n_rf_tx and n_s <= n_rf_rx");
        require(num_rf_tx <= num_tx_antennas && num_rf_rx <= num_rx_antennas, "need n_rf <= number of antennas");
        require(!methods.empty(), "methods must not be empty");
        for (auto m : methods) {
            if (!is_discrete(m))
                continue;
            const bool any_finite = std::any_of(resolutions.begin(), resolutions.end(), [](auto& r) { return r.has_value(); });
            require(any_finite, "method '" + std::string(to_string(m)) + "' needs a finite phase resolution");
            if (m == DesignMethod::Exhaustive)
                require(std::max(num_tx_antennas, num_rx_antennas) <= kExhaustiveMaxAntennas,
                        "exhaustive search is limited to 10 antennas");
        }
        break;
    }
    case Experiment::EeSweep: {
        require(num_tx_antennas >= 1 && num_rx_antennas >= 1, "antenna counts must be >= 1");
        require(!rf_chains.empty(), "rf_chains must not be empty");
        for (int n : rf_chains)
            require(n >= 1 && n <= std::min(num_tx_antennas, num_rx_antennas),
                    "rf_chains entries must be in [1, min(n_t, n_r)]");
        require(is_discrete(pos_sw_method), "pos_sw_method must be a discrete-phase method");
        require(pos_sw_method != DesignMethod::Exhaustive ||
                    std::max(num_tx_antennas, num_rx_antennas) <= kExhaustiveMaxAntennas,
                "exhaustive search is limited to 10 antennas");
        break;
    }
    case Experiment::BeamPattern: {
        require(!dods_deg.empty(), "beampattern.dods_deg must not be empty");
        require(!pattern_antennas.empty(), "beampattern.antennas must not be empty");
        for (int n : pattern_antennas)
            require(n >= 1, "beampattern.antennas entries must be >= 1");
        require(!resolutions.empty(), "resolutions must not be empty");
        require(pattern_step_deg > 0.0 && pattern_max_deg >= pattern_min_deg, "bad beampattern angle grid");
        break;
    }
    case Experiment::Estimation: {
        const auto& e = estimation;
        require(e.num_tx_antennas >= 1 && e.num_rx_antennas >= 1, "estimation antenna counts must be >= 1");
        require(e.num_tx_beams >= 1 && e.num_rx_beams >= 1, "estimation beam counts must be >= 1");
        require(e.grid_size >= std::max(e.num_tx_antennas, e.num_rx_antennas),
                "estimation.grid must be >= max(n_t, n_r)");
        require(e.sparsity >= 1 && e.sparsity <= e.num_tx_beams * e.num_rx_beams,
                "estimation.sparsity must be in [1, number of measurements]");
        require(e.residual_tol >= 0.0, "estimation.residual_tol must be >= 0");
        require(!e.kinds.empty(), "estimation.kinds must not be empty");
        require(!e.on_grid || (e.on_grid_paths >= 1 && e.on_grid_paths <= e.grid_size * e.grid_size),
                "estimation.paths out of range");
        for (auto k : e.kinds) {
            if (k != TrainingKind::Deterministic)
                continue;
            require(is_power_of_two(e.num_tx_antennas) && is_power_of_two(e.num_rx_antennas),
                    "deterministic training needs power-of-two antenna counts");
            require(e.num_tx_beams <= e.num_tx_antennas && e.num_rx_beams <= e.num_rx_antennas,
                    "deterministic training needs beams <= antennas");
        }
        break;
    }
    }
}

// ---------------------------------------------------------------------------
// JSON parsing

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    require(obj.is_object(), where + " must be an object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](auto k) { return k == item.key(); });
        require(known, "unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
T get_as(const json& j, const std::string& name)
{
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + name + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& prefix = "")
{
    if (obj.contains(key))
        out = get_as<T>(obj.at(key), prefix + key);
}

double parse_snr(const json& v)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinite"))
        return std::numeric_limits<double>::infinity();
    throw ConfigError("snr_db entries must be numbers or \"inf\"");
}

Resolution parse_resolution(const json& v)
{
    if (v.is_number_integer())
        return v.get<int>();
    if (v.is_string() && (v.get<std::string>() == "infinite" || v.get<std::string>() == "inf"))
        return std::nullopt;
    throw ConfigError("resolutions entries must be integers or \"infinite\"");
}

template <typename T, typename F>
std::vector<T> read_list(const json& v, const std::string& name, F&& parse_one)
{
    require(v.is_array(), name + " must be an array");
    std::vector<T> out;
    for (const auto& item : v)
        out.push_back(parse_one(item));
    return out;
}

} // namespace

ExperimentConfig config_from_json(const json& j, Experiment experiment)
{
    ExperimentConfig c;
    c.experiment = experiment;
    switch (experiment) {
    case Experiment::SeSweep: c.snr_db = {-10.0, -5.0, 0.0, 5.0, 10.0}; break;
    case Experiment::EeSweep: c.snr_db = {0.0}; break;
    case Experiment::BeamPattern: c.snr_db = {}; break;
    case Experiment::Estimation:
        c.snr_db = {10.0, 20.0, std::numeric_limits<double>::infinity()};
        c.trials = 200;
        break;
    }
    if (j.is_null())
        return c;

    check_keys(j,
               {"experiment", "n_t", "n_r", "n_rf_tx", "n_rf_rx", "n_s", "snr_db", "rf_chains", "resolutions",
                "methods", "pos_sw_method", "shared_se", "outer_iters", "trials", "seed", "threads", "channel",
                "power", "beampattern", "estimation", "output", "format"},
               "config");

    if (j.contains("experiment")) {
        const auto named = parse_experiment(get_as<std::string>(j.at("experiment"), "experiment"));
        require(named == experiment, "config is for experiment '" + std::string(to_string(named)) +
                                         "' but '" + std::string(to_string(experiment)) + "' was requested");
    }

    read(j, "n_t", c.num_tx_antennas);
    read(j, "n_r", c.num_rx_antennas);
    read(j, "n_rf_tx", c.num_rf_tx);
    read(j, "n_rf_rx", c.num_rf_rx);
    read(j, "n_s", c.num_streams);
    read(j, "outer_iters", c.outer_iters);
    read(j, "trials", c.trials);
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    read(j, "shared_se", c.shared_se);
    read(j, "output", c.output);
    read(j, "rf_chains", c.rf_chains);

    if (j.contains("snr_db"))
        c.snr_db = read_list<double>(j.at("snr_db"), "snr_db", parse_snr);
    if (j.contains("resolutions"))
        c.resolutions = read_list<Resolution>(j.at("resolutions"), "resolutions", parse_resolution);
    if (j.contains("methods"))
        c.methods = read_list<DesignMethod>(j.at("methods"), "methods", [](const json& v) {
            return parse_design_method(get_as<std::string>(v, "methods"));
        });
    if (j.contains("pos_sw_method"))
        c.pos_sw_method = parse_design_method(get_as<std::string>(j.at("pos_sw_method"), "pos_sw_method"));
    if (j.contains("format"))
        c.format = parse_output_format(get_as<std::string>(j.at("format"), "format"));

    if (j.contains("channel")) {
        const auto& ch = j.at("channel");
        check_keys(ch, {"clusters", "rays", "angle_spread_deg", "aoa_sector_width_deg", "aoa_sector_center_deg"},
                   "channel");
        read(ch, "clusters", c.channel.num_clusters, "channel.");
        read(ch, "rays", c.channel.rays_per_cluster, "channel.");
        double deg = rad_to_deg(c.channel.angle_spread);
        read(ch, "angle_spread_deg", deg, "channel.");
        c.channel.angle_spread = deg_to_rad(deg);
        deg = rad_to_deg(c.channel.aoa_sector_width);
        read(ch, "aoa_sector_width_deg", deg, "channel.");
        c.channel.aoa_sector_width = deg_to_rad(deg);
        deg = rad_to_deg(c.channel.aoa_sector_center);
        read(ch, "aoa_sector_center_deg", deg, "channel.");
        c.channel.aoa_sector_center = deg_to_rad(deg);
    }

    if (j.contains("power")) {
        const auto& p = j.at("power");
        check_keys(p, {"p_bb", "p_rf", "p_ps", "p_sw", "p_tx", "p_pos"}, "power");
        read(p, "p_bb", c.power.p_baseband, "power.");
        read(p, "p_rf", c.power.p_rf_chain, "power.");
        read(p, "p_ps", c.power.p_phase_shifter, "power.");
        read(p, "p_sw", c.power.p_switch, "power.");
        read(p, "p_tx", c.power.p_transmit, "power.");
        read(p, "p_pos", c.power.p_pos, "power.");
    }

    if (j.contains("beampattern")) {
        const auto& b = j.at("beampattern");
        check_keys(b, {"dods_deg", "antennas", "min_deg", "max_deg", "step_deg"}, "beampattern");
        read(b, "dods_deg", c.dods_deg, "beampattern.");
        read(b, "antennas", c.pattern_antennas, "beampattern.");
        read(b, "min_deg", c.pattern_min_deg, "beampattern.");
        read(b, "max_deg", c.pattern_max_deg, "beampattern.");
        read(b, "step_deg", c.pattern_step_deg, "beampattern.");
    }

    if (j.contains("estimation")) {
        const auto& e = j.at("estimation");
        check_keys(e,
                   {"n_t", "n_r", "beams_tx", "beams_rx", "grid", "sparsity", "residual_tol", "kinds", "channel",
                    "paths"},
                   "estimation");
        auto& s = c.estimation;
        read(e, "n_t", s.num_tx_antennas, "estimation.");
        read(e, "n_r", s.num_rx_antennas, "estimation.");
        read(e, "beams_tx", s.num_tx_beams, "estimation.");
        read(e, "beams_rx", s.num_rx_beams, "estimation.");
        read(e, "grid", s.grid_size, "estimation.");
        read(e, "sparsity", s.sparsity, "estimation.");
        read(e, "residual_tol", s.residual_tol, "estimation.");
        read(e, "paths", s.on_grid_paths, "estimation.");
        if (e.contains("kinds"))
            s.kinds = read_list<TrainingKind>(e.at("kinds"), "estimation.kinds", [](const json& v) {
                return parse_training_kind(get_as<std::string>(v, "estimation.kinds"));
            });
        if (e.contains("channel")) {
            const auto kind = get_as<std::string>(e.at("channel"), "estimation.channel");
            require(kind == "on_grid" || kind == "clustered", "estimation.channel must be on_grid or clustered");
            s.on_grid = kind == "on_grid";
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Monte Carlo plumbing

namespace {

// Runs body(t) for t in [0, n). Each t writes only its own output slot, so the
// result does not depend on the number of threads.
void parallel_trials(int n, int threads, const std::function<void(int)>& body)
{
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int t = 0; t < n; ++t)
            body(t);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (int t = w; t < n; t += threads) {
                try {
                    body(t);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
};

Summary summarize(const std::vector<double>& xs)
{
    Summary s;
    if (xs.empty())
        return s;
    for (double x : xs)
        s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs)
            acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return s;
}

Cell resolution_cell(const Resolution& r)
{
    return r ? Cell(static_cast<std::int64_t>(*r)) : Cell(std::string("infinite"));
}

DesignRequest make_request(DesignMethod method, const Resolution& r, int nrf_tx, int nrf_rx, int ns, int outer)
{
    DesignRequest req;
    req.method = method;
    if (r)
        req.alphabet = PhaseAlphabet(*r);
    req.num_rf_tx = nrf_tx;
    req.num_rf_rx = nrf_rx;
    req.num_streams = ns;
    req.outer_iters = outer;
    return req;
}

double evaluate_se(const CMatrix& h, const HybridDesign& d, double snr_db, int ns)
{
    return spectral_efficiency(h, d.tx.effective(), d.rx.effective(), db_to_linear(snr_db), ns);
}

} // namespace

// ---------------------------------------------------------------------------
// Experiments

Table run_se_sweep(const ExperimentConfig& config)
{
    ExperimentConfig c = config;
    c.experiment = Experiment::SeSweep;
    c.validate();

    struct Variant {
        DesignMethod method;
        Resolution resolution;
    };
    std::vector<Variant> variants;
    for (auto m : c.methods) {
        if (!is_discrete(m)) {
            variants.push_back({m, std::nullopt});
            continue;
        }
        for (const auto& r : c.resolutions) {
            if (!r)
                continue;
            if (m == DesignMethod::BinaryRank1 && *r != 2)
                continue;
            variants.push_back({m, r});
        }
    }

    const ArrayGeometry tx(c.num_tx_antennas), rx(c.num_rx_antennas);
    const std::size_t nv = variants.size(), ns = c.snr_db.size();
    // se[t][v * ns + s]
    std::vector<std::vector<double>> se(static_cast<std::size_t>(c.trials), std::vector<double>(nv * ns));

    parallel_trials(c.trials, c.threads, [&](int t) {
        Rng rng = trial_stream(c.seed, static_cast<std::uint64_t>(t));
        const auto channel = sample_channel(tx, rx, c.channel, rng);
        const auto svd = svd_full_digital(channel.matrix, c.num_streams);
        auto& out = se[static_cast<std::size_t>(t)];
        for (std::size_t v = 0; v < nv; ++v) {
            const auto req = make_request(variants[v].method, variants[v].resolution, c.num_rf_tx, c.num_rf_rx,
                                          c.num_streams, c.outer_iters);
            const auto design = design_hybrid(svd, req);
            for (std::size_t s = 0; s < ns; ++s)
                out[v * ns + s] = evaluate_se(channel.matrix, design, c.snr_db[s], c.num_streams);
        }
    });

    Table table({"snr_db", "method", "resolution", "mean_se", "std_se", "trials"});
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t v = 0; v < nv; ++v) {
            std::vector<double> xs;
            xs.reserve(se.size());
            for (const auto& row : se)
                xs.push_back(row[v * ns + s]);
            const auto sum = summarize(xs);
            table.add_row({c.snr_db[s], std::string(to_string(variants[v].method)),
                           resolution_cell(variants[v].resolution), sum.mean, sum.stddev,
                           static_cast<std::int64_t>(c.trials)});
        }
    return table;
}

Table run_ee_sweep(const ExperimentConfig& config)
{
    ExperimentConfig c = config;
    c.experiment = Experiment::EeSweep;
    c.validate();

    std::vector<int> finite;
    for (const auto& r : c.resolutions)
        if (r)
            finite.push_back(*r);
    if (c.pos_sw_method == DesignMethod::BinaryRank1)
        finite.erase(std::remove_if(finite.begin(), finite.end(), [](int r) { return r != 2; }), finite.end());
    if (finite.empty())
        throw ConfigError("ee_sweep needs at least one usable finite phase resolution for the POS-SW rows");

    const ArrayGeometry tx(c.num_tx_antennas), rx(c.num_rx_antennas);
    const int max_streams = *std::max_element(c.rf_chains.begin(), c.rf_chains.end());
    const std::size_t nrf = c.rf_chains.size(), ns = c.snr_db.size();
    const std::size_t narch = 2 + finite.size(); // full digital, PS hybrid, POS-SW per resolution

    // se[t][(i * narch + a) * ns + s]
    std::vector<std::vector<double>> se(static_cast<std::size_t>(c.trials), std::vector<double>(nrf * narch * ns));

    parallel_trials(c.trials, c.threads, [&](int t) {
        Rng rng = trial_stream(c.seed, static_cast<std::uint64_t>(t));
        const auto channel = sample_channel(tx, rx, c.channel, rng);
        const auto svd = svd_full_digital(channel.matrix, max_streams);
        auto& out = se[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i < nrf; ++i) {
            const int n = c.rf_chains[i];
            auto slot = [&](std::size_t a, std::size_t s) -> double& { return out[(i * narch + a) * ns + s]; };

            const auto fd = design_hybrid(svd, make_request(DesignMethod::FullDigital, std::nullopt, n, n, n, 1));
            for (std::size_t s = 0; s < ns; ++s)
                slot(0, s) = evaluate_se(channel.matrix, fd, c.snr_db[s], n);

            if (c.shared_se) {
                for (std::size_t a = 1; a < narch; ++a)
                    for (std::size_t s = 0; s < ns; ++s)
                        slot(a, s) = slot(0, s);
                continue;
            }

            const auto ps = design_hybrid(svd, make_request(DesignMethod::PeAltMin, std::nullopt, n, n, n, 1));
            for (std::size_t s = 0; s < ns; ++s)
                slot(1, s) = evaluate_se(channel.matrix, ps, c.snr_db[s], n);

            for (std::size_t r = 0; r < finite.size(); ++r) {
                const auto pos = design_hybrid(svd, make_request(c.pos_sw_method, finite[r], n, n, n, c.outer_iters));
                for (std::size_t s = 0; s < ns; ++s)
                    slot(2 + r, s) = evaluate_se(channel.matrix, pos, c.snr_db[s], n);
            }
        }
    });

    Table table({"n_rf", "snr_db", "architecture", "resolution", "mean_se", "power_mw", "ee", "trials"});
    for (std::size_t i = 0; i < nrf; ++i) {
        const int n = c.rf_chains[i];
        for (std::size_t s = 0; s < ns; ++s)
            for (std::size_t a = 0; a < narch; ++a) {
                std::vector<double> xs;
                xs.reserve(se.size());
                for (const auto& row : se)
                    xs.push_back(row[(i * narch + a) * ns + s]);
                const double mean_se = summarize(xs).mean;

                Architecture arch = a == 0   ? Architecture::full_digital(c.num_tx_antennas)
                                    : a == 1 ? Architecture::ps_hybrid(c.num_tx_antennas, n)
                                             : Architecture::pos_sw_hybrid(c.num_tx_antennas, n);
                const Resolution res = a < 2 ? Resolution{} : Resolution{finite[a - 2]};
                table.add_row({static_cast<std::int64_t>(n), c.snr_db[s], std::string(to_string(arch.kind)),
                               resolution_cell(res), mean_se, total_power(arch, c.power),
                               energy_efficiency(mean_se, arch, c.power), static_cast<std::int64_t>(c.trials)});
            }
    }
    return table;
}

Table run_beampattern(const ExperimentConfig& config)
{
    ExperimentConfig c = config;
    c.experiment = Experiment::BeamPattern;
    c.validate();

    // Grid points are built from integer steps in degrees so that the DoD
    // itself lands exactly on the grid whenever it is a multiple of the step.
    const auto npts =
        static_cast<long>(std::llround((c.pattern_max_deg - c.pattern_min_deg) / c.pattern_step_deg)) + 1;
    std::vector<double> grid_deg(static_cast<std::size_t>(npts));
    std::vector<double> grid_rad(static_cast<std::size_t>(npts));
    for (long i = 0; i < npts; ++i) {
        grid_deg[static_cast<std::size_t>(i)] = c.pattern_min_deg + static_cast<double>(i) * c.pattern_step_deg;
        grid_rad[static_cast<std::size_t>(i)] = deg_to_rad(grid_deg[static_cast<std::size_t>(i)]);
    }

    Table table({"resolution", "dod_deg", "n_t", "angle_deg", "gain_db"});
    for (const auto& r : c.resolutions)
        for (double dod : c.dods_deg)
            for (int n : c.pattern_antennas) {
                const ArrayGeometry geom(n);
                const CVector target = array_response(geom, deg_to_rad(dod));
                const CVector weights =
                    r ? CVector(realize(quantize_phases(target, PhaseAlphabet(*r))).col(0)) : target;
                const auto pattern = beam_pattern(weights, geom, grid_rad);
                double peak = 0.0;
                for (const auto& p : pattern)
                    peak = std::max(peak, p.gain);
                for (std::size_t i = 0; i < pattern.size(); ++i) {
                    const double rel = pattern[i].gain / peak;
                    const double db = rel > 0.0 ? std::max(10.0 * std::log10(rel), kPatternFloorDb) : kPatternFloorDb;
                    table.add_row({resolution_cell(r), dod, static_cast<std::int64_t>(n), grid_deg[i], db});
                }
            }
    return table;
}

Table run_estimation(const ExperimentConfig& config)
{
    ExperimentConfig c = config;
    c.experiment = Experiment::Estimation;
    c.validate();
    const auto& e = c.estimation;

    const auto dictionary = make_dictionary(e.num_tx_antennas, e.num_rx_antennas, e.grid_size);
    const TrainingDims dims{e.num_tx_antennas, e.num_tx_beams, e.num_rx_antennas, e.num_rx_beams};
    const ArrayGeometry tx(e.num_tx_antennas), rx(e.num_rx_antennas);
    const std::size_t nk = e.kinds.size(), ns = c.snr_db.size();

    struct Outcome {
        double nmse = 0.0;
        double recovered = 0.0;
        double coherence = 0.0;
    };
    // outcome[t][k * ns + s]
    std::vector<std::vector<Outcome>> outcome(static_cast<std::size_t>(c.trials), std::vector<Outcome>(nk * ns));

    parallel_trials(c.trials, c.threads, [&](int t) {
        const auto trial = static_cast<std::uint64_t>(t);
        Rng channel_rng = trial_stream(c.seed, trial, 0);
        CMatrix h;
        std::vector<GridPoint> truth;
        if (e.on_grid) {
            auto g = sample_on_grid_channel(dictionary, e.on_grid_paths, channel_rng);
            h = std::move(g.matrix);
            truth = std::move(g.support);
        } else {
            h = sample_channel(tx, rx, c.channel, channel_rng).matrix;
        }

        auto& out = outcome[static_cast<std::size_t>(t)];
        for (std::size_t k = 0; k < nk; ++k) {
            Rng training_rng = trial_stream(c.seed, trial, 1 + k);
            const auto training = generate_training(e.kinds[k], dims, training_rng);
            const CMatrix sensing = build_sensing_matrix(training, dictionary);
            const double coherence = mutual_coherence(training.tx);
            for (std::size_t s = 0; s < ns; ++s) {
                Rng noise_rng = trial_stream(c.seed, trial, 1000 + k * ns + s);
                const double snr = std::isinf(c.snr_db[s]) ? std::numeric_limits<double>::infinity()
                                                           : db_to_linear(c.snr_db[s]);
                const CVector y = measure(h, training, snr, noise_rng);
                const auto est = estimate_channel(y, sensing, dictionary, e.sparsity, e.residual_tol);

                Outcome o;
                o.nmse = nmse(h, est.reconstructed);
                o.coherence = coherence;
                if (e.on_grid) {
                    auto found = est.support;
                    std::sort(found.begin(), found.end());
                    o.recovered = found == truth ? 1.0 : 0.0;
                } else {
                    o.recovered = std::numeric_limits<double>::quiet_NaN();
                }
                out[k * ns + s] = o;
            }
        }
    });

    Table table({"snr_db", "kind", "nmse_mean", "nmse_std", "support_recovery", "coherence_mean", "trials"});
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t k = 0; k < nk; ++k) {
            std::vector<double> err, rec, coh;
            for (const auto& row : outcome) {
                const auto& o = row[k * ns + s];
                err.push_back(o.nmse);
                rec.push_back(o.recovered);
                coh.push_back(o.coherence);
            }
            const auto err_sum = summarize(err);
            table.add_row({c.snr_db[s], std::string(to_string(e.kinds[k])), err_sum.mean, err_sum.stddev,
                           summarize(rec).mean, summarize(coh).mean, static_cast<std::int64_t>(c.trials)});
        }
    return table;
}

Table run_experiment(const ExperimentConfig& config)
{
    switch (config.experiment) {
    case Experiment::SeSweep: return run_se_sweep(config);
    case Experiment::EeSweep: return run_ee_sweep(config);
    case Experiment::BeamPattern: return run_beampattern(config);
    case Experiment::Estimation: return run_estimation(config);
    }
    throw ConfigError("unknown experiment");
}

std::string render(const Table& table, OutputFormat format)
{
    if (format == OutputFormat::Json)
        return to_json(table).dump(2) + "\n";
    return to_csv(table);
}

} // namespace posw
