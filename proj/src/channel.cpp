// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#include "posw/channel.hpp"

#include <cmath>

namespace posw {

ArrayGeometry::ArrayGeometry(int n, double spacing)
    : num_antennas(n), element_spacing(spacing)
{
    if (num_antennas < 1)
        throw std::invalid_argument("ArrayGeometry: num_antennas must be >= 1");
    if (!(element_spacing > 0.0))
        throw std::invalid_argument("ArrayGeometry: element_spacing must be > 0");
}

void ChannelConfig::validate() const
{
    if (num_clusters < 1 || rays_per_cluster < 1)
        throw std::invalid_argument("ChannelConfig: cluster and ray counts must be >= 1");
    if (!(angle_spread > 0.0))
        throw std::invalid_argument("ChannelConfig: angle_spread must be > 0");
    if (!(aoa_sector_width > 0.0) || aoa_sector_width > kTwoPi)
        throw std::invalid_argument("ChannelConfig: aoa_sector_width must be in (0, 2pi]");
    if (!(aod_mean_high > aod_mean_low))
        throw std::invalid_argument("ChannelConfig: empty AoD mean interval");
}

double wrap_angle(double angle)
{
    double w = std::fmod(angle, kTwoPi);
    if (w < 0.0)
        w += kTwoPi;
    // fmod of a tiny negative number plus 2pi can round up to exactly 2pi
    if (w >= kTwoPi)
        w = 0.0;
    return w;
}

CVector array_response_spatial(int num_antennas, double psi)
{
    CVector a(num_antennas);
    const double amp = 1.0 / std::sqrt(static_cast<double>(num_antennas));
    for (int k = 0; k < num_antennas; ++k)
        a(k) = std::polar(amp, kPi * k * psi);
    return a;
}

CVector array_response(const ArrayGeometry& geometry, double angle)
{
    return array_response_spatial(geometry.num_antennas, 2.0 * geometry.element_spacing * std::sin(angle));
}

double channel_normalization(const ArrayGeometry& tx, const ArrayGeometry& rx, std::size_t num_paths)
{
    return std::sqrt(static_cast<double>(tx.num_antennas) * rx.num_antennas / static_cast<double>(num_paths));
}

CMatrix channel_from_paths(const std::vector<Path>& paths, const ArrayGeometry& tx,
                           const ArrayGeometry& rx, double normalization)
{
    if (paths.empty())
        throw std::invalid_argument("no paths");

    CMatrix h = CMatrix::Zero(rx.num_antennas, tx.num_antennas);
    for (const auto& p : paths) {
        const CVector ar = array_response(rx, p.aoa);
        const CVector at = array_response(tx, p.aod);
        h.noalias() += p.gain * ar * at.adjoint();
    }
    h *= normalization;
    return h;
}

namespace {

// Inverse-CDF Laplacian draw with scale `spread`.
double laplacian_offset(Rng& rng, double spread)
{
    std::uniform_real_distribution<double> uniform(-0.5, 0.5);
    double u = 0.0;
    do {
        u = uniform(rng);
    } while (1.0 - 2.0 * std::abs(u) <= 0.0);
    const double sgn = (u > 0.0) - (u < 0.0);
    return -spread * sgn * std::log(1.0 - 2.0 * std::abs(u));
}

} // namespace

ChannelRealization sample_channel(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                  const ChannelConfig& config, Rng& rng)
{
    config.validate();

    std::uniform_real_distribution<double> aod_mean(config.aod_mean_low, config.aod_mean_high);
    std::uniform_real_distribution<double> aoa_mean(config.aoa_sector_center - config.aoa_sector_width / 2.0,
                                                    config.aoa_sector_center + config.aoa_sector_width / 2.0);

    ChannelRealization out;
    out.num_clusters = config.num_clusters;
    out.rays_per_cluster = config.rays_per_cluster;
    out.paths.reserve(static_cast<std::size_t>(config.num_paths()));

    for (int c = 0; c < config.num_clusters; ++c) {
        const double aod_c = aod_mean(rng);
        const double aoa_c = aoa_mean(rng);
        out.cluster_aod_means.push_back(aod_c);
        out.cluster_aoa_means.push_back(aoa_c);
        for (int r = 0; r < config.rays_per_cluster; ++r) {
            Path p;
            p.aod = wrap_angle(aod_c + laplacian_offset(rng, config.angle_spread));
            p.aoa = wrap_angle(aoa_c + laplacian_offset(rng, config.angle_spread));
            p.gain = complex_gaussian(rng);
            out.paths.push_back(p);
        }
    }

    out.matrix = channel_from_paths(out.paths, tx, rx, channel_normalization(tx, rx, out.paths.size()));
    return out;
}

} // namespace posw
