// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#include "posw/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "posw/channel.hpp"

namespace posw {

std::string_view to_string(TrainingKind kind)
{
    switch (kind) {
    case TrainingKind::PseudoRandomBinary: return "binary";
    case TrainingKind::PseudoRandomQuaternary: return "quaternary";
    case TrainingKind::Deterministic: return "deterministic";
    }
    return "unknown";
}

TrainingKind parse_training_kind(std::string_view name)
{
    for (auto k : {TrainingKind::PseudoRandomBinary, TrainingKind::PseudoRandomQuaternary, TrainingKind::Deterministic})
        if (to_string(k) == name)
            return k;
    throw ConfigError("unknown training kind '" + std::string(name) + "'");
}

Eigen::MatrixXd sylvester_hadamard(int n)
{
    if (n < 1 || (n & (n - 1)) != 0)
        throw std::invalid_argument("deterministic construction unavailable");
    Eigen::MatrixXd h(1, 1);
    h(0, 0) = 1.0;
    while (h.rows() < n) {
        const auto k = h.rows();
        Eigen::MatrixXd next(2 * k, 2 * k);
        next << h, h, h, -h;
        h = std::move(next);
    }
    return h;
}

namespace {

CMatrix training_side(TrainingKind kind, int num_antennas, int num_beams, int max_beams, Rng& rng)
{
    if (num_antennas < 1 || num_beams < 1)
        throw std::invalid_argument("generate_training: antenna and beam counts must be >= 1");
    if (num_beams > max_beams)
        throw std::invalid_argument("generate_training: too many training beams");

    const double amp = 1.0 / std::sqrt(static_cast<double>(num_antennas));
    CMatrix out(num_antennas, num_beams);
    switch (kind) {
    case TrainingKind::PseudoRandomBinary: {
        std::bernoulli_distribution coin(0.5);
        for (int j = 0; j < num_beams; ++j)
            for (int i = 0; i < num_antennas; ++i)
                out(i, j) = Complex(coin(rng) ? -amp : amp, 0.0);
        break;
    }
    case TrainingKind::PseudoRandomQuaternary: {
        static const Complex symbols[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
        std::uniform_int_distribution<int> pick(0, 3);
        for (int j = 0; j < num_beams; ++j)
            for (int i = 0; i < num_antennas; ++i)
                out(i, j) = amp * symbols[pick(rng)];
        break;
    }
    case TrainingKind::Deterministic: {
        const Eigen::MatrixXd h = sylvester_hadamard(num_antennas);
        if (num_beams > num_antennas)
            throw std::invalid_argument("deterministic construction unavailable: more beams than antennas");
        for (int j = 0; j < num_beams; ++j)
            for (int i = 0; i < num_antennas; ++i)
                out(i, j) = Complex(amp * h(j, i), 0.0);
        break;
    }
    }
    return out;
}

} // namespace

TrainingDesign generate_training(TrainingKind kind, const TrainingDims& dims, Rng& rng)
{
    TrainingDesign out;
    out.kind = kind;
    out.tx = training_side(kind, dims.num_tx_antennas, dims.num_tx_beams, dims.max_beams, rng);
    out.rx = training_side(kind, dims.num_rx_antennas, dims.num_rx_beams, dims.max_beams, rng);
    return out;
}

double mutual_coherence(const CMatrix& matrix)
{
    if (matrix.cols() < 2)
        throw std::invalid_argument("mutual_coherence: need at least two columns");
    const RVector norms = matrix.colwise().norm().transpose();
    if (!(norms.minCoeff() > 0.0))
        throw std::invalid_argument("mutual_coherence: zero column");

    const CMatrix gram = matrix.adjoint() * matrix;
    double best = 0.0;
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            best = std::max(best, std::abs(gram(i, j)) / (norms(i) * norms(j)));
    return std::min(best, 1.0);
}

double AngleDictionary::tx_angle(int g) const
{
    return std::asin(tx_grid.at(static_cast<std::size_t>(g)));
}

double AngleDictionary::rx_angle(int g) const
{
    return std::asin(rx_grid.at(static_cast<std::size_t>(g)));
}

AngleDictionary make_dictionary(int num_tx_antennas, int num_rx_antennas, int grid_size)
{
    if (num_tx_antennas < 1 || num_rx_antennas < 1)
        throw std::invalid_argument("make_dictionary: antenna counts must be >= 1");
    if (grid_size < std::max(num_tx_antennas, num_rx_antennas))
        throw std::invalid_argument("make_dictionary: grid_size must be >= max(N_t, N_r)");

    AngleDictionary d;
    d.grid_size = grid_size;
    d.tx_atoms.resize(num_tx_antennas, grid_size);
    d.rx_atoms.resize(num_rx_antennas, grid_size);
    for (int g = 0; g < grid_size; ++g) {
        const double psi = -1.0 + 2.0 * g / grid_size;
        d.tx_grid.push_back(psi);
        d.rx_grid.push_back(psi);
        d.tx_atoms.col(g) = array_response_spatial(num_tx_antennas, psi);
        d.rx_atoms.col(g) = array_response_spatial(num_rx_antennas, psi);
    }
    return d;
}

CVector measure(const CMatrix& channel, const TrainingDesign& training, double snr_linear, Rng& rng)
{
    if (channel.rows() != training.rx.rows() || channel.cols() != training.tx.rows())
        throw std::invalid_argument("measure: dimension mismatch");
    if (!(snr_linear > 0.0))
        throw std::invalid_argument("measure: snr must be > 0");

    const CMatrix clean = training.rx.adjoint() * channel * training.tx; // M_r x M_t
    const auto mt = clean.cols();
    CVector y(clean.size());
    const bool noisy = std::isfinite(snr_linear);
    const double noise_var = noisy ? 1.0 / snr_linear : 0.0;
    for (Eigen::Index r = 0; r < clean.rows(); ++r)
        for (Eigen::Index t = 0; t < mt; ++t) {
            Complex v = clean(r, t);
            if (noisy)
                v += complex_gaussian(rng, noise_var);
            y(r * mt + t) = v;
        }
    return y;
}

CMatrix build_sensing_matrix(const TrainingDesign& training, const AngleDictionary& dictionary)
{
    if (training.tx.rows() != dictionary.tx_atoms.rows() || training.rx.rows() != dictionary.rx_atoms.rows())
        throw std::invalid_argument("build_sensing_matrix: dimension mismatch");

    const CMatrix rx_proj = training.rx.adjoint() * dictionary.rx_atoms; // M_r x G
    const CMatrix tx_proj = dictionary.tx_atoms.adjoint() * training.tx; // G x M_t
    const auto mr = rx_proj.rows();
    const auto mt = tx_proj.cols();
    const auto gr = rx_proj.cols();
    const auto gt = tx_proj.rows();

    CMatrix a(mr * mt, gr * gt);
    for (Eigen::Index g_t = 0; g_t < gt; ++g_t)
        for (Eigen::Index g_r = 0; g_r < gr; ++g_r) {
            auto col = a.col(g_r + gr * g_t);
            for (Eigen::Index m_r = 0; m_r < mr; ++m_r)
                for (Eigen::Index m_t = 0; m_t < mt; ++m_t)
                    col(m_r * mt + m_t) = rx_proj(m_r, g_r) * tx_proj(g_t, m_t);
        }
    return a;
}

SparseSolution omp(const CVector& y, const CMatrix& sensing, int max_sparsity, double residual_tol)
{
    if (y.size() != sensing.rows())
        throw std::invalid_argument("omp: measurement length does not match the sensing matrix");
    if (max_sparsity < 1)
        throw std::invalid_argument("omp: max_sparsity must be >= 1");
    if (max_sparsity > sensing.rows())
        throw std::invalid_argument("omp: max_sparsity exceeds the number of measurements");

    SparseSolution out;
    const double y_norm = y.norm();
    out.residual_norms.push_back(y_norm);
    if (y_norm == 0.0)
        return out;

    const RVector col_norms = sensing.colwise().norm().transpose();
    std::vector<bool> used(static_cast<std::size_t>(sensing.cols()), false);
    CVector residual = y;
    CMatrix selected(sensing.rows(), 0);

    while (static_cast<int>(out.atoms.size()) < max_sparsity && residual.norm() > residual_tol * y_norm) {
        const CVector corr = sensing.adjoint() * residual;
        Eigen::Index best = -1;
        double best_score = 0.0;
        for (Eigen::Index j = 0; j < corr.size(); ++j) {
            if (used[static_cast<std::size_t>(j)] || col_norms(j) == 0.0)
                continue;
            const double score = std::abs(corr(j)) / col_norms(j);
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        if (best < 0)
            break; // residual orthogonal to every unused atom

        used[static_cast<std::size_t>(best)] = true;
        out.atoms.push_back(static_cast<int>(best));
        selected.conservativeResize(Eigen::NoChange, selected.cols() + 1);
        selected.col(selected.cols() - 1) = sensing.col(best);

        out.coefficients = selected.colPivHouseholderQr().solve(y);
        residual = y - selected * out.coefficients;
        out.residual_norms.push_back(residual.norm());
    }
    return out;
}

SparseEstimate estimate_channel(const CVector& measurements, const CMatrix& sensing,
                                const AngleDictionary& dictionary, int max_sparsity, double residual_tol)
{
    const SparseSolution sol = omp(measurements, sensing, max_sparsity, residual_tol);
    const int g = dictionary.grid_size;

    SparseEstimate out;
    out.residual_norms = sol.residual_norms;
    out.reconstructed = CMatrix::Zero(dictionary.rx_atoms.rows(), dictionary.tx_atoms.rows());
    for (std::size_t i = 0; i < sol.atoms.size(); ++i) {
        const GridPoint p{sol.atoms[i] / g, sol.atoms[i] % g};
        const Complex c = sol.coefficients(static_cast<Eigen::Index>(i));
        out.support.push_back(p);
        out.coefficients.push_back(c);
        out.reconstructed.noalias() += c * dictionary.rx_atoms.col(p.rx) * dictionary.tx_atoms.col(p.tx).adjoint();
    }
    return out;
}

SparseEstimate estimate_channel(const CVector& measurements, const TrainingDesign& training,
                                const AngleDictionary& dictionary, int max_sparsity, double residual_tol)
{
    return estimate_channel(measurements, build_sensing_matrix(training, dictionary), dictionary, max_sparsity,
                            residual_tol);
}

double nmse(const CMatrix& truth, const CMatrix& estimate)
{
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
        throw std::invalid_argument("nmse: shape mismatch");
    const double ref = truth.squaredNorm();
    if (!(ref > 0.0))
        throw std::invalid_argument("nmse: zero true channel");
    return (truth - estimate).squaredNorm() / ref;
}

OnGridChannel sample_on_grid_channel(const AngleDictionary& dictionary, int num_paths, Rng& rng)
{
    const int g = dictionary.grid_size;
    if (num_paths < 1 || static_cast<long long>(num_paths) > static_cast<long long>(g) * g)
        throw std::invalid_argument("sample_on_grid_channel: bad path count");

    std::uniform_int_distribution<int> pick(0, g - 1);
    std::set<GridPoint> support;
    while (static_cast<int>(support.size()) < num_paths)
        support.insert(GridPoint{pick(rng), pick(rng)});

    const auto nt = dictionary.tx_atoms.rows();
    const auto nr = dictionary.rx_atoms.rows();
    const double norm = std::sqrt(static_cast<double>(nt * nr) / num_paths);

    OnGridChannel out;
    out.matrix = CMatrix::Zero(nr, nt);
    for (const auto& p : support) {
        const Complex gain = complex_gaussian(rng);
        out.support.push_back(p);
        out.gains.push_back(gain);
        out.matrix.noalias() += (norm * gain) * dictionary.rx_atoms.col(p.rx) * dictionary.tx_atoms.col(p.tx).adjoint();
    }
    return out;
}

} // namespace posw
