// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "posw/common.hpp"
#include "posw/rng.hpp"

namespace posw {

enum class TrainingKind { PseudoRandomBinary, PseudoRandomQuaternary, Deterministic };

std::string_view to_string(TrainingKind kind);
TrainingKind parse_training_kind(std::string_view name);

struct TrainingDims {
    int num_tx_antennas = 16;
    int num_tx_beams = 16; // M_t
    int num_rx_antennas = 16;
    int num_rx_beams = 16; // M_r
    int max_beams = 4096;
};

/// Training precoders (columns of `tx`) and combiners (columns of `rx`).
/// Every column has unit norm and entries from {+-1} or {+-1, +-j} scaled
/// by 1/sqrt(N_ant).
struct TrainingDesign {
    CMatrix tx; // N_t x M_t
    CMatrix rx; // N_r x M_r
    TrainingKind kind = TrainingKind::PseudoRandomBinary;
};

/// Deterministic designs use rows of a Sylvester-Hadamard matrix and need a
/// power-of-two antenna count and at most N_ant beams; they consume no
/// randomness.
TrainingDesign generate_training(TrainingKind kind, const TrainingDims& dims, Rng& rng);

/// Sylvester-Hadamard +-1 matrix of order n (n must be a power of two).
Eigen::MatrixXd sylvester_hadamard(int n);

/// max_{i != j} |<c_i, c_j>| / (||c_i|| ||c_j||).
double mutual_coherence(const CMatrix& matrix);

/// Steering-vector dictionaries on a grid uniform in spatial frequency
/// psi_g = -1 + 2 g / G, g = 0..G-1 (half-wavelength ULA, psi = sin(angle)).
struct AngleDictionary {
    int grid_size = 0;
    std::vector<double> tx_grid; // spatial frequencies
    std::vector<double> rx_grid;
    CMatrix tx_atoms; // N_t x G
    CMatrix rx_atoms; // N_r x G

    double tx_angle(int g) const;
    double rx_angle(int g) const;
};

AngleDictionary make_dictionary(int num_tx_antennas, int num_rx_antennas, int grid_size);

/// Measurements y[m_r * M_t + m_t] = w_{m_r}^H H f_{m_t} + n with
/// n ~ CN(0, 1/snr). An infinite snr gives noiseless measurements.
CVector measure(const CMatrix& channel, const TrainingDesign& training, double snr_linear, Rng& rng);

/// Linear operator from grid coefficients to measurements. Rows ordered as
/// in measure(); column g_r + G * g_t holds the atom pair (g_t, g_r).
CMatrix build_sensing_matrix(const TrainingDesign& training, const AngleDictionary& dictionary);

struct SparseSolution {
    std::vector<int> atoms; // selected column indices, in selection order
    CVector coefficients;
    std::vector<double> residual_norms; // ||y||, then after each selection
};

/// Orthogonal matching pursuit. Stops after `max_sparsity` atoms or when
/// ||r|| <= residual_tol * ||y||.
SparseSolution omp(const CVector& y, const CMatrix& sensing, int max_sparsity, double residual_tol = 1e-9);

struct GridPoint {
    int tx = 0;
    int rx = 0;
    bool operator==(const GridPoint&) const = default;
    auto operator<=>(const GridPoint&) const = default;
};

struct SparseEstimate {
    std::vector<GridPoint> support;
    std::vector<Complex> coefficients;
    CMatrix reconstructed; // N_r x N_t
    std::vector<double> residual_norms;
};

SparseEstimate estimate_channel(const CVector& measurements, const TrainingDesign& training,
                                const AngleDictionary& dictionary, int max_sparsity, double residual_tol = 1e-9);

/// Same pipeline with a sensing matrix built once by the caller.
SparseEstimate estimate_channel(const CVector& measurements, const CMatrix& sensing,
                                const AngleDictionary& dictionary, int max_sparsity, double residual_tol = 1e-9);

/// ||H_true - H_est||_F^2 / ||H_true||_F^2.
double nmse(const CMatrix& truth, const CMatrix& estimate);

struct OnGridChannel {
    CMatrix matrix;
    std::vector<GridPoint> support; // sorted
    std::vector<Complex> gains;
};

/// Channel made of `num_paths` distinct dictionary atom pairs with CN(0,1)
/// gains, scaled so that E||H||_F^2 = N_t N_r.
OnGridChannel sample_on_grid_channel(const AngleDictionary& dictionary, int num_paths, Rng& rng);

} // namespace posw
