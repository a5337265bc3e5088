// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "posw/channel.hpp"
#include "posw/common.hpp"

namespace posw {

/// Achievable rate log2 det(I + (snr/N_s) Rn^-1 W^H H F F^H H^H W) with
/// Rn = W^H W (unit noise variance, snr = P / sigma^2).
/// Throws std::invalid_argument if ||F||_F^2 deviates from N_s by more than
/// 1e-6 and NumericalError("singular combiner") if W is rank deficient.
double spectral_efficiency(const CMatrix& channel, const CMatrix& precoder, const CMatrix& combiner,
                           double snr_linear, int num_streams);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Transmitter power budget, all values in mW.
struct PowerModel {
    double p_baseband = 200.0;
    double p_rf_chain = 300.0;
    double p_phase_shifter = 40.0;
    double p_switch = 5.0;
    double p_transmit = 500.0;
    double p_pos = 0.0;

    void validate() const;
};

enum class ArchitectureKind { FullDigital, PsHybrid, PosSwHybrid };

std::string_view to_string(ArchitectureKind kind);

struct Architecture {
    ArchitectureKind kind = ArchitectureKind::PosSwHybrid;
    int num_antennas = 1;
    int num_rf_chains = 1;

    static Architecture full_digital(int num_antennas);
    static Architecture ps_hybrid(int num_antennas, int num_rf_chains);
    static Architecture pos_sw_hybrid(int num_antennas, int num_rf_chains);

    void validate() const;
};

/// Total transmitter power in mW (beamforming hardware plus radiated power).
double total_power(const Architecture& arch, const PowerModel& model);

/// Spectral efficiency per Watt of transmitter power.
double energy_efficiency(double se, const Architecture& arch, const PowerModel& model);

struct PatternSample {
    double angle = 0.0; // radians
    double gain = 0.0;  // |a(angle)^H f|^2 / ||f||^2, in [0, 1]
};

std::vector<PatternSample> beam_pattern(const CVector& weights, const ArrayGeometry& geometry,
                                        const std::vector<double>& angles);

/// Angles from `first` to `last` inclusive, `step` apart (radians).
std::vector<double> angle_grid(double first, double last, double step);

} // namespace posw
