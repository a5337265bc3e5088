// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "posw/beamforming.hpp"
#include "posw/channel.hpp"
#include "posw/estimation.hpp"
#include "posw/metrics.hpp"
#include "posw/table.hpp"

namespace posw {

enum class Experiment { SeSweep, EeSweep, BeamPattern, Estimation };
enum class OutputFormat { Csv, Json };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);
OutputFormat parse_output_format(std::string_view name);

/// Phase resolution; empty means infinite (unquantized) phases.
using Resolution = std::optional<int>;

std::string resolution_label(const Resolution& r);

struct EstimationSettings {
    int num_tx_antennas = 16;
    int num_rx_antennas = 16;
    int num_tx_beams = 16;
    int num_rx_beams = 16;
    int grid_size = 32;
    int sparsity = 3;
    double residual_tol = 1e-9;
    std::vector<TrainingKind> kinds{TrainingKind::PseudoRandomBinary, TrainingKind::PseudoRandomQuaternary,
                                    TrainingKind::Deterministic};
    bool on_grid = true; // false: clustered channel from the channel settings
    int on_grid_paths = 3;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::SeSweep;

    int num_tx_antennas = 64;
    int num_rx_antennas = 64;
    int num_rf_tx = 6;
    int num_rf_rx = 6;
    int num_streams = 6;

    std::vector<double> snr_db{-10.0, -5.0, 0.0, 5.0, 10.0}; // +inf allowed for estimation
    std::vector<int> rf_chains{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<Resolution> resolutions{2, 4, 8, std::nullopt};
    std::vector<DesignMethod> methods{DesignMethod::FullDigital, DesignMethod::PeAltMin, DesignMethod::PhaseMatching};
    DesignMethod pos_sw_method = DesignMethod::PhaseMatching; // used by the EE sweep
    bool shared_se = false; // EE sweep: score every architecture with the full-digital SE
    int outer_iters = 3;

    int trials = 500;
    std::uint64_t seed = 1;
    int threads = 1;

    ChannelConfig channel;
    PowerModel power;

    std::vector<double> dods_deg{15.0, 45.0, 75.0};
    std::vector<int> pattern_antennas{16, 64};
    double pattern_min_deg = 0.0;
    double pattern_max_deg = 90.0;
    double pattern_step_deg = 0.1;

    EstimationSettings estimation;

    std::string output; // empty: stdout
    OutputFormat format = OutputFormat::Csv;

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
};

/// Builds a config from JSON. Missing keys keep their defaults; the default
/// SNR list depends on the experiment. Throws ConfigError on bad input.
ExperimentConfig config_from_json(const nlohmann::json& j, Experiment experiment);

/// Columns: snr_db, method, resolution, mean_se, std_se, trials.
Table run_se_sweep(const ExperimentConfig& config);

/// Columns: n_rf, snr_db, architecture, resolution, mean_se, power_mw, ee, trials.
Table run_ee_sweep(const ExperimentConfig& config);

/// Columns: resolution, dod_deg, n_t, angle_deg, gain_db.
Table run_beampattern(const ExperimentConfig& config);

/// Columns: snr_db, kind, nmse_mean, nmse_std, support_recovery, coherence_mean, trials.
Table run_estimation(const ExperimentConfig& config);

Table run_experiment(const ExperimentConfig& config);

std::string render(const Table& table, OutputFormat format);

/// Floor applied to beam-pattern gains in dB so that exact nulls stay finite.
inline constexpr double kPatternFloorDb = -300.0;

} // namespace posw
