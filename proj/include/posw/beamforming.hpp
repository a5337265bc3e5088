// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "posw/common.hpp"

namespace posw {

/// The N phases {2 pi k / N : k = 0..N-1} produced by a phase over-sampler.
class PhaseAlphabet {
public:
    explicit PhaseAlphabet(int resolution);

    int resolution() const { return resolution_; }
    double phase(int index) const;
    const Complex& phasor(int index) const { return phasors_[static_cast<std::size_t>(index)]; }

    /// Index of the alphabet phase closest (in angular distance) to `angle`.
    /// Exact ties go to the smaller index.
    int nearest(double angle) const;

    /// Same as nearest(arg(z)); a zero entry maps to index 0.
    int nearest(const Complex& z) const;

    bool operator==(const PhaseAlphabet& other) const { return resolution_ == other.resolution_; }

private:
    int resolution_;
    std::vector<Complex> phasors_;
};

/// Switch-network analog beamformer: every entry is (1/sqrt(M)) exp(j phase)
/// with the phase taken from the alphabet by index.
struct AnalogBeamformer {
    IndexMatrix phase_indices; // num_antennas x num_rf_chains
    PhaseAlphabet alphabet{2};

    int num_antennas() const { return static_cast<int>(phase_indices.rows()); }
    int num_rf_chains() const { return static_cast<int>(phase_indices.cols()); }
    double amplitude() const;

    /// Throws std::invalid_argument if any index is outside [0, N).
    void validate() const;
};

CMatrix realize(const AnalogBeamformer& analog);

struct HybridBeamformer {
    AnalogBeamformer analog;
    CMatrix digital; // num_rf_chains x num_streams

    CMatrix effective() const { return realize(analog) * digital; }
};

/// Convergence record of the alternating / coordinate-descent designs.
/// objective_history holds ||F_opt - A D||_F after every update stage, in order.
struct FactorizationDiagnostics {
    std::vector<double> objective_history;
    int iterations = 0;
    bool regularized = false;   // a least-squares system was ill-conditioned
    bool fallback_used = false; // pe_altmin replaced a non-improving phase extraction step

    double initial_objective() const { return objective_history.empty() ? 0.0 : objective_history.front(); }
    double final_objective() const { return objective_history.empty() ? 0.0 : objective_history.back(); }
    /// True if the history never increases by more than `rel_tol` (relative to its first value).
    bool monotone(double rel_tol = 1e-12) const;
};

/// How to scale the digital part once the factorization is done.
enum class PowerScaling {
    TotalPower, // ||A D||_F^2 = number of columns of the target (precoders)
    None,       // plain least squares (combiners)
};

struct SvdBeamformers {
    CMatrix precoder; // top right singular vectors, N_t x N_s
    CMatrix combiner; // top left singular vectors, N_r x N_s
    RVector singular_values; // all of them, descending
};

/// Optimal unconstrained beamformers with equal power per stream.
SvdBeamformers svd_full_digital(const CMatrix& channel, int num_streams);

/// Elementwise nearest-phase quantization of `target`.
AnalogBeamformer quantize_phases(const CMatrix& target, const PhaseAlphabet& alphabet);

struct ContinuousHybrid {
    CMatrix analog;  // constant modulus 1/sqrt(M), arbitrary phases
    CMatrix digital;
    FactorizationDiagnostics diagnostics;

    CMatrix effective() const { return analog * digital; }
};

/// Phase-extraction alternating minimization for an infinite-resolution
/// analog stage. When the extracted phases would increase the residual the
/// step is replaced by one exact per-element phase sweep, so the recorded
/// objective never increases.
ContinuousHybrid pe_altmin(const CMatrix& f_opt, int num_rf_chains, int max_iters = 100, double tol = 1e-9,
                           PowerScaling scaling = PowerScaling::TotalPower);

struct PhaseMatchingResult {
    HybridBeamformer beamformer;
    FactorizationDiagnostics diagnostics;
};

/// Cyclic per-element discrete phase updates alternating with a
/// least-squares refit of the digital stage.
PhaseMatchingResult phase_matching(const CMatrix& f_opt, const PhaseAlphabet& alphabet, int num_rf_chains,
                                   int outer_iters = 3, PowerScaling scaling = PowerScaling::TotalPower);

inline constexpr int kBinaryRank1Candidates = 32;

/// Binary (N = 2) analog column chosen from sign patterns of rotated copies
/// of the target: b_i = sign(Re(exp(j i pi / C) target)) / sqrt(M).
AnalogBeamformer binary_rank1_design(const CVector& target, int num_candidates = kBinaryRank1Candidates);

struct ExhaustiveResult {
    AnalogBeamformer column;
    double objective = 0.0; // |target^H b|
};

inline constexpr int kExhaustiveMaxAntennas = 10;
inline constexpr double kExhaustiveMaxCandidates = 1e7;

/// Global maximizer of |target^H b| over alphabet-constrained columns b.
/// The objective is invariant to a common rotation of all phases, so the
/// returned column is the lexicographically smallest index vector among the
/// maximizers (its first index is always 0).
ExhaustiveResult exhaustive_analog_search(const CVector& target, const PhaseAlphabet& alphabet);

/// |target^H realize(column)| for a single-column analog beamformer.
double analog_correlation(const CVector& target, const AnalogBeamformer& column);

enum class DesignMethod {
    FullDigital,
    PeAltMin,
    Quantize,
    PhaseMatching,
    BinaryRank1,
    Exhaustive,
};

std::string_view to_string(DesignMethod method);
DesignMethod parse_design_method(std::string_view name);

/// A designed precoder or combiner. For discrete-phase designs `discrete`
/// holds the index form of `analog`.
struct DesignedBeamformer {
    CMatrix analog;
    CMatrix digital;
    std::optional<AnalogBeamformer> discrete;
    FactorizationDiagnostics diagnostics;

    CMatrix effective() const { return analog * digital; }
};

struct HybridDesign {
    DesignedBeamformer tx;
    DesignedBeamformer rx;
};

struct DesignRequest {
    DesignMethod method = DesignMethod::PhaseMatching;
    std::optional<PhaseAlphabet> alphabet; // empty means infinite resolution
    int num_rf_tx = 1;
    int num_rf_rx = 1;
    int num_streams = 1;
    int outer_iters = 3;
    int altmin_max_iters = 100;
    double altmin_tol = 1e-9;
};

HybridDesign design_hybrid(const CMatrix& channel, const DesignRequest& request);

/// Same as design_hybrid but reuses an SVD computed by the caller.
HybridDesign design_hybrid(const SvdBeamformers& svd, const DesignRequest& request);

/// Precoder power: ||F||_F^2.
double precoder_power(const CMatrix& f);

} // namespace posw
