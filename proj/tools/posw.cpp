// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "posw/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<int> trials;
    std::optional<int> threads;
};

nlohmann::json load_config(const std::string& path)
{
    if (path.empty())
        return nullptr;
    std::ifstream in(path);
    if (!in)
        throw posw::ConfigError("cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw posw::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

int run(posw::Experiment experiment, const Options& opts)
{
    auto config = posw::config_from_json(load_config(opts.config_path), experiment);
    if (opts.seed)
        config.seed = *opts.seed;
    if (opts.out)
        config.output = *opts.out;
    if (opts.format)
        config.format = posw::parse_output_format(*opts.format);
    if (opts.trials)
        config.trials = *opts.trials;
    if (opts.threads)
        config.threads = *opts.threads;
    config.validate();

    const std::string text = posw::render(posw::run_experiment(config), config.format);
    if (config.output.empty() || config.output == "-") {
        std::cout << text;
        std::cout.flush();
    } else {
        std::ofstream out(config.output, std::ios::binary);
        if (!out)
            throw posw::ConfigError("cannot open output file '" + config.output + "'");
        out << text;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-phase (POS-SW) hybrid beamforming experiments"};
    app.require_subcommand(1);

    Options opts;
    const std::pair<const char*, posw::Experiment> commands[] = {
        {"se-sweep", posw::Experiment::SeSweep},
        {"ee-sweep", posw::Experiment::EeSweep},
        {"beampattern", posw::Experiment::BeamPattern},
        {"estimate", posw::Experiment::Estimation},
    };
    const char* descriptions[] = {
        "Spectral efficiency versus SNR",
        "Energy efficiency versus number of RF chains",
        "Beam patterns of quantized steering vectors",
        "Compressed-sensing channel estimation NMSE",
    };

    std::optional<posw::Experiment> selected;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto* sub = app.add_subcommand(commands[i].first, descriptions[i]);
        sub->add_option("--config", opts.config_path, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--seed", opts.seed, "Master RNG seed");
        sub->add_option("--out", opts.out, "Output path (default: stdout)");
        sub->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--trials", opts.trials, "Override the Monte Carlo trial count");
        sub->add_option("--threads", opts.threads, "Worker threads");
        const auto experiment = commands[i].second;
        sub->callback([&selected, experiment] { selected = experiment; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        return run(*selected, opts);
    } catch (const posw::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const posw::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
