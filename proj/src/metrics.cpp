// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#include "posw/metrics.hpp"

#include <cmath>

namespace posw {

double spectral_efficiency(const CMatrix& channel, const CMatrix& precoder, const CMatrix& combiner,
                           double snr_linear, int num_streams)
{
    if (channel.rows() != combiner.rows() || channel.cols() != precoder.rows())
        throw std::invalid_argument("spectral_efficiency: dimension mismatch");
    if (num_streams < 1)
        throw std::invalid_argument("spectral_efficiency: num_streams must be >= 1");
    if (!(snr_linear >= 0.0))
        throw std::invalid_argument("spectral_efficiency: snr must be >= 0");
    if (std::abs(precoder.squaredNorm() - num_streams) > 1e-6)
        throw std::invalid_argument("spectral_efficiency: precoder violates ||F||_F^2 = N_s");

    const CMatrix noise_cov = combiner.adjoint() * combiner;
    Eigen::LLT<CMatrix> noise_llt(noise_cov);
    if (noise_llt.info() != Eigen::Success)
        throw NumericalError("singular combiner");
    const RVector ldiag = noise_llt.matrixL().toDenseMatrix().diagonal().real();
    if (!(ldiag.minCoeff() > 1e-10 * ldiag.maxCoeff()))
        throw NumericalError("singular combiner");

    // Whitened effective channel L^-1 W^H H F; the determinant is taken over
    // the smaller of its two Gram matrices.
    const CMatrix effective = noise_llt.matrixL().solve(combiner.adjoint() * channel * precoder);
    const double scale = snr_linear / num_streams;
    const CMatrix gram = effective.rows() <= effective.cols() ? CMatrix(effective * effective.adjoint())
                                                              : CMatrix(effective.adjoint() * effective);
    const CMatrix m = CMatrix::Identity(gram.rows(), gram.cols()) + scale * gram;

    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericalError("spectral_efficiency: non-positive determinant");
    const RVector diag = llt.matrixL().toDenseMatrix().diagonal().real();
    double log2det = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        log2det += 2.0 * std::log2(diag(i));
    return std::max(log2det, 0.0);
}

void PowerModel::validate() const
{
    for (double p : {p_baseband, p_rf_chain, p_phase_shifter, p_switch, p_transmit, p_pos})
        if (!(p >= 0.0))
            throw std::invalid_argument("PowerModel: power values must be >= 0");
}

std::string_view to_string(ArchitectureKind kind)
{
    switch (kind) {
    case ArchitectureKind::FullDigital: return "full_digital";
    case ArchitectureKind::PsHybrid: return "ps_hybrid";
    case ArchitectureKind::PosSwHybrid: return "pos_sw_hybrid";
    }
    return "unknown";
}

Architecture Architecture::full_digital(int num_antennas)
{
    return {ArchitectureKind::FullDigital, num_antennas, num_antennas};
}

Architecture Architecture::ps_hybrid(int num_antennas, int num_rf_chains)
{
    return {ArchitectureKind::PsHybrid, num_antennas, num_rf_chains};
}

Architecture Architecture::pos_sw_hybrid(int num_antennas, int num_rf_chains)
{
    return {ArchitectureKind::PosSwHybrid, num_antennas, num_rf_chains};
}

void Architecture::validate() const
{
    if (num_antennas < 1 || num_rf_chains < 1)
        throw std::invalid_argument("Architecture: counts must be >= 1");
    if (num_rf_chains > num_antennas)
        throw std::invalid_argument("Architecture: num_rf_chains must be <= num_antennas");
    if (kind == ArchitectureKind::FullDigital && num_rf_chains != num_antennas)
        throw std::invalid_argument("Architecture: full digital needs one RF chain per antenna");
}

double total_power(const Architecture& arch, const PowerModel& model)
{
    arch.validate();
    const double nt = arch.num_antennas;
    const double nrf = arch.num_rf_chains;
    switch (arch.kind) {
    case ArchitectureKind::FullDigital:
        return model.p_baseband + nt * model.p_rf_chain + model.p_transmit;
    case ArchitectureKind::PsHybrid:
        return model.p_baseband + nrf * model.p_rf_chain + nt * nrf * model.p_phase_shifter + model.p_transmit;
    case ArchitectureKind::PosSwHybrid:
        return model.p_baseband + nrf * model.p_rf_chain + nrf * model.p_pos + nt * nrf * model.p_switch +
               model.p_transmit;
    }
    throw std::invalid_argument("total_power: unknown architecture");
}

double energy_efficiency(double se, const Architecture& arch, const PowerModel& model)
{
    const double p = total_power(arch, model);
    if (!(p > 0.0))
        throw std::invalid_argument("energy_efficiency: total power is zero");
    return se / (p / 1000.0);
}

std::vector<PatternSample> beam_pattern(const CVector& weights, const ArrayGeometry& geometry,
                                        const std::vector<double>& angles)
{
    if (weights.size() != geometry.num_antennas)
        throw std::invalid_argument("beam_pattern: weight length does not match the array");
    const double energy = weights.squaredNorm();
    if (!(energy > 0.0))
        throw std::invalid_argument("beam_pattern: zero weight vector");
    if (angles.empty())
        throw std::invalid_argument("beam_pattern: empty angle grid");

    std::vector<PatternSample> out;
    out.reserve(angles.size());
    for (double theta : angles) {
        const double g = std::norm(array_response(geometry, theta).dot(weights)) / energy;
        out.push_back({theta, std::min(g, 1.0)});
    }
    return out;
}

std::vector<double> angle_grid(double first, double last, double step)
{
    if (!(step > 0.0) || last < first)
        throw std::invalid_argument("angle_grid: bad range");
    const auto n = static_cast<std::size_t>(std::llround((last - first) / step)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = first + static_cast<double>(i) * step;
    return grid;
}

} // namespace posw
