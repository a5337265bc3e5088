// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <vector>

#include "posw/common.hpp"
#include "posw/rng.hpp"

namespace posw {

/// Uniform linear array. Spacing is in wavelengths.
struct ArrayGeometry {
    int num_antennas = 1;
    double element_spacing = 0.5;

    ArrayGeometry() = default;
    explicit ArrayGeometry(int n, double spacing = 0.5);
};

/// Parameters of the clustered narrowband channel. Angles in radians.
struct ChannelConfig {
    int num_clusters = 10;
    int rays_per_cluster = 5;
    double angle_spread = deg_to_rad(0.5);
    double aod_mean_low = 0.0;
    double aod_mean_high = kTwoPi;
    double aoa_sector_width = kPi / 3.0;
    double aoa_sector_center = 0.0;

    void validate() const;
    int num_paths() const { return num_clusters * rays_per_cluster; }
};

struct Path {
    Complex gain;
    double aod = 0.0;
    double aoa = 0.0;
};

struct ChannelRealization {
    CMatrix matrix; // N_r x N_t
    std::vector<Path> paths;
    int num_clusters = 0;
    int rays_per_cluster = 0;
    std::vector<double> cluster_aod_means; // before wrapping
    std::vector<double> cluster_aoa_means;
};

/// ULA steering vector, element k = exp(j 2 pi d k sin(angle)) / sqrt(N).
CVector array_response(const ArrayGeometry& geometry, double angle);

/// Steering vector parameterized directly by the spatial frequency
/// psi = 2 d sin(angle), so element k = exp(j pi k psi) / sqrt(N).
CVector array_response_spatial(int num_antennas, double psi);

/// sqrt(N_t N_r / L), the normalization giving E||H||_F^2 = N_t N_r.
double channel_normalization(const ArrayGeometry& tx, const ArrayGeometry& rx, std::size_t num_paths);

/// Sum of rank-1 path terms scaled by `normalization`. Throws on an empty list.
CMatrix channel_from_paths(const std::vector<Path>& paths, const ArrayGeometry& tx,
                           const ArrayGeometry& rx, double normalization);

ChannelRealization sample_channel(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                  const ChannelConfig& config, Rng& rng);

/// Wrap an angle into [0, 2 pi).
double wrap_angle(double angle);

} // namespace posw
