// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#include "posw/beamforming.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace posw {

// ---------------------------------------------------------------------------
// PhaseAlphabet / AnalogBeamformer

PhaseAlphabet::PhaseAlphabet(int resolution)
    : resolution_(resolution)
{
    if (resolution_ < 2)
        throw std::invalid_argument("PhaseAlphabet: resolution must be >= 2");
    phasors_.reserve(static_cast<std::size_t>(resolution_));
    for (int k = 0; k < resolution_; ++k)
        phasors_.push_back(std::polar(1.0, phase(k)));
}

double PhaseAlphabet::phase(int index) const
{
    return kTwoPi * index / resolution_;
}

int PhaseAlphabet::nearest(double angle) const
{
    double theta = std::fmod(angle, kTwoPi);
    if (theta < 0.0)
        theta += kTwoPi;

    const double x = theta * resolution_ / kTwoPi;
    const double lo_f = std::floor(x);
    const double frac = x - lo_f;
    const int lo = static_cast<int>(lo_f) % resolution_;
    const int hi = (lo + 1) % resolution_;
    if (frac < 0.5)
        return lo;
    if (frac > 0.5)
        return hi;
    return std::min(lo, hi);
}

int PhaseAlphabet::nearest(const Complex& z) const
{
    if (z == Complex(0.0, 0.0))
        return 0;
    return nearest(std::arg(z));
}

double AnalogBeamformer::amplitude() const
{
    return 1.0 / std::sqrt(static_cast<double>(num_antennas()));
}

void AnalogBeamformer::validate() const
{
    const int n = alphabet.resolution();
    for (Eigen::Index i = 0; i < phase_indices.size(); ++i) {
        const int k = phase_indices.data()[i];
        if (k < 0 || k >= n)
            throw std::invalid_argument("AnalogBeamformer: phase index out of range");
    }
}

CMatrix realize(const AnalogBeamformer& analog)
{
    analog.validate();
    const double amp = analog.amplitude();
    CMatrix out(analog.num_antennas(), analog.num_rf_chains());
    for (int k = 0; k < analog.num_rf_chains(); ++k)
        for (int m = 0; m < analog.num_antennas(); ++m)
            out(m, k) = amp * analog.alphabet.phasor(analog.phase_indices(m, k));
    return out;
}

bool FactorizationDiagnostics::monotone(double rel_tol) const
{
    if (objective_history.empty())
        return true;
    const double slack = rel_tol * std::max(objective_history.front(), 1.0);
    for (std::size_t i = 1; i < objective_history.size(); ++i)
        if (objective_history[i] > objective_history[i - 1] + slack)
            return false;
    return true;
}

double precoder_power(const CMatrix& f)
{
    return f.squaredNorm();
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

// argmin_D ||B - A D||_F. Normal equations when well conditioned, otherwise a
// rank-revealing decomposition (minimum-norm solution).
CMatrix least_squares(const CMatrix& a, const CMatrix& b, bool& regularized)
{
    const CMatrix gram = a.adjoint() * a;
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() == Eigen::Success) {
        const RVector diag = llt.matrixL().toDenseMatrix().diagonal().real();
        const double lo = diag.minCoeff();
        const double hi = diag.maxCoeff();
        if (lo > 1e-7 * hi)
            return llt.solve(a.adjoint() * b);
    }
    regularized = true;
    return a.completeOrthogonalDecomposition().solve(b);
}

// Unit-modulus phasor of z scaled by amp; zero maps to amp (phase 0).
Complex phase_only(const Complex& z, double amp)
{
    const double mag = std::abs(z);
    return mag > 0.0 ? z * (amp / mag) : Complex(amp, 0.0);
}

// Columns used to seed the analog stage: the target itself, padded with DFT
// columns when there are more RF chains than target columns.
CMatrix seed_target(const CMatrix& f_opt, int num_rf_chains)
{
    const auto m = f_opt.rows();
    const auto ns = f_opt.cols();
    CMatrix seed(m, num_rf_chains);
    const auto used = std::min<Eigen::Index>(ns, num_rf_chains);
    seed.leftCols(used) = f_opt.leftCols(used);
    for (Eigen::Index k = used; k < num_rf_chains; ++k)
        for (Eigen::Index r = 0; r < m; ++r)
            seed(r, k) = std::polar(1.0, kTwoPi * static_cast<double>(r * k) / static_cast<double>(m));
    return seed;
}

// Rotates each column by a common phase so that its entries sit as close as
// possible to the N-point phase lattice: theta = arg(sum |z|^2 (z/|z|)^N) / N.
CMatrix align_to_lattice(CMatrix seed, int resolution)
{
    for (Eigen::Index k = 0; k < seed.cols(); ++k) {
        Complex s(0.0, 0.0);
        for (Eigen::Index m = 0; m < seed.rows(); ++m) {
            const double r = std::abs(seed(m, k));
            if (r > 0.0)
                s += r * r * std::pow(seed(m, k) / r, resolution);
        }
        if (std::abs(s) > 0.0)
            seed.col(k) *= std::polar(1.0, -std::arg(s) / resolution);
    }
    return seed;
}

void check_factorization_args(const CMatrix& f_opt, int num_rf_chains, const char* who)
{
    if (f_opt.size() == 0)
        throw std::invalid_argument(std::string(who) + ": empty target");
    if (num_rf_chains < f_opt.cols())
        throw std::invalid_argument(std::string(who) + ": num_rf_chains must be >= num_streams");
    if (num_rf_chains > f_opt.rows())
        throw std::invalid_argument(std::string(who) + ": num_rf_chains must be <= num_antennas");
}

void scale_for_power(const CMatrix& analog, CMatrix& digital, Eigen::Index num_streams)
{
    const double norm = (analog * digital).norm();
    if (norm > 0.0)
        digital *= std::sqrt(static_cast<double>(num_streams)) / norm;
}

// One exact sweep of per-element phase updates over a continuous-phase
// analog matrix. `residual` tracks F_opt - A D and is kept consistent.
void continuous_phase_sweep(CMatrix& analog, const CMatrix& digital, CMatrix& residual, double amp)
{
    for (Eigen::Index k = 0; k < analog.cols(); ++k) {
        const auto drow = digital.row(k);
        for (Eigen::Index m = 0; m < analog.rows(); ++m) {
            residual.row(m) += analog(m, k) * drow;
            // Eigen's dot conjugates its left operand, so c = sum_j r_j conj(d_j).
            const Complex c = std::conj(residual.row(m).dot(drow));
            if (std::abs(c) > 0.0)
                analog(m, k) = c * (amp / std::abs(c));
            residual.row(m) -= analog(m, k) * drow;
        }
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Full digital

SvdBeamformers svd_full_digital(const CMatrix& channel, int num_streams)
{
    if (num_streams < 1 || num_streams > std::min(channel.rows(), channel.cols()))
        throw std::invalid_argument("svd_full_digital: num_streams must be in [1, min(N_t, N_r)]");

    Eigen::BDCSVD<CMatrix> svd(channel, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(0) > 0.0))
        throw NumericalError("rank-deficient channel");

    SvdBeamformers out;
    out.precoder = svd.matrixV().leftCols(num_streams);
    out.combiner = svd.matrixU().leftCols(num_streams);
    out.singular_values = sv;
    return out;
}

// ---------------------------------------------------------------------------
// Direct quantization

AnalogBeamformer quantize_phases(const CMatrix& target, const PhaseAlphabet& alphabet)
{
    AnalogBeamformer out;
    out.alphabet = alphabet;
    out.phase_indices.resize(target.rows(), target.cols());
    for (Eigen::Index k = 0; k < target.cols(); ++k)
        for (Eigen::Index m = 0; m < target.rows(); ++m)
            out.phase_indices(m, k) = alphabet.nearest(target(m, k));
    return out;
}

// ---------------------------------------------------------------------------
// PE-AltMin

ContinuousHybrid pe_altmin(const CMatrix& f_opt, int num_rf_chains, int max_iters, double tol, PowerScaling scaling)
{
    check_factorization_args(f_opt, num_rf_chains, "pe_altmin");
    const double amp = 1.0 / std::sqrt(static_cast<double>(f_opt.rows()));

    ContinuousHybrid out;
    auto& diag = out.diagnostics;
    const CMatrix seed = seed_target(f_opt, num_rf_chains);
    out.analog = seed.unaryExpr([amp](const Complex& z) { return phase_only(z, amp); });
    out.digital = least_squares(out.analog, f_opt, diag.regularized);

    CMatrix residual = f_opt - out.analog * out.digital;
    double objective = residual.norm();
    diag.objective_history.push_back(objective);

    for (int it = 0; it < max_iters; ++it) {
        // (b) analog: phases of F_opt D^H
        const CMatrix extracted =
            (f_opt * out.digital.adjoint()).unaryExpr([amp](const Complex& z) { return phase_only(z, amp); });
        const CMatrix candidate_residual = f_opt - extracted * out.digital;
        const double candidate = candidate_residual.norm();
        if (candidate <= objective) {
            out.analog = extracted;
            residual = candidate_residual;
        } else {
            diag.fallback_used = true;
            continuous_phase_sweep(out.analog, out.digital, residual, amp);
            residual = f_opt - out.analog * out.digital;
        }
        diag.objective_history.push_back(residual.norm());

        // (a) digital: least squares
        out.digital = least_squares(out.analog, f_opt, diag.regularized);
        residual = f_opt - out.analog * out.digital;
        const double next = residual.norm();
        diag.objective_history.push_back(next);
        diag.iterations = it + 1;

        const bool converged = objective - next < tol;
        objective = next;
        if (converged)
            break;
    }

    if (scaling == PowerScaling::TotalPower)
        scale_for_power(out.analog, out.digital, f_opt.cols());
    return out;
}

// ---------------------------------------------------------------------------
// Phase matching

PhaseMatchingResult phase_matching(const CMatrix& f_opt, const PhaseAlphabet& alphabet, int num_rf_chains,
                                   int outer_iters, PowerScaling scaling)
{
    check_factorization_args(f_opt, num_rf_chains, "phase_matching");
    if (outer_iters < 0)
        throw std::invalid_argument("phase_matching: outer_iters must be >= 0");

    PhaseMatchingResult out;
    auto& diag = out.diagnostics;
    // warm start: quantized phases of the lattice-aligned target
    AnalogBeamformer analog =
        quantize_phases(align_to_lattice(seed_target(f_opt, num_rf_chains), alphabet.resolution()), alphabet);
    const double amp = analog.amplitude();

    CMatrix a = realize(analog);
    CMatrix d = least_squares(a, f_opt, diag.regularized);
    CMatrix residual = f_opt - a * d;
    diag.objective_history.push_back(residual.norm());

    for (int it = 0; it < outer_iters; ++it) {
        bool changed = false;
        for (int k = 0; k < num_rf_chains; ++k) {
            const auto drow = d.row(k);
            for (Eigen::Index m = 0; m < a.rows(); ++m) {
                // Residual of row m with entry (m, k) removed; the best phase
                // maximizes Re(conj(a) c) with c = r' d_k^H.
                residual.row(m) += a(m, k) * drow;
                const Complex c = std::conj(residual.row(m).dot(drow));
                const int current = analog.phase_indices(m, k);
                int best = alphabet.nearest(c);
                if (best != current) {
                    const double gain_best = std::real(std::conj(alphabet.phasor(best)) * c);
                    const double gain_now = std::real(std::conj(alphabet.phasor(current)) * c);
                    if (gain_best > gain_now) {
                        analog.phase_indices(m, k) = best;
                        a(m, k) = amp * alphabet.phasor(best);
                        changed = true;
                    }
                }
                residual.row(m) -= a(m, k) * drow;
            }
        }
        diag.objective_history.push_back(residual.norm());

        d = least_squares(a, f_opt, diag.regularized);
        residual = f_opt - a * d;
        diag.objective_history.push_back(residual.norm());
        diag.iterations = it + 1;
        if (!changed)
            break;
    }

    if (scaling == PowerScaling::TotalPower)
        scale_for_power(a, d, f_opt.cols());
    out.beamformer.analog = std::move(analog);
    out.beamformer.digital = std::move(d);
    return out;
}

// ---------------------------------------------------------------------------
// Binary rank-1 candidate set

AnalogBeamformer binary_rank1_design(const CVector& target, int num_candidates)
{
    if (target.size() == 0 || target.norm() == 0.0)
        throw std::invalid_argument("zero target");
    if (num_candidates < 1)
        throw std::invalid_argument("binary_rank1_design: num_candidates must be >= 1");

    const auto m = target.size();
    const double amp = 1.0 / std::sqrt(static_cast<double>(m));

    AnalogBeamformer best;
    best.alphabet = PhaseAlphabet(2);
    best.phase_indices.resize(m, 1);
    double best_obj = -1.0;

    IndexMatrix signs(m, 1);
    for (int i = 0; i < num_candidates; ++i) {
        const Complex rot = std::polar(1.0, i * kPi / num_candidates);
        Complex corr(0.0, 0.0);
        for (Eigen::Index r = 0; r < m; ++r) {
            const bool negative = std::real(rot * target(r)) < 0.0;
            signs(r, 0) = negative ? 1 : 0;
            corr += std::conj(target(r)) * (negative ? -amp : amp);
        }
        const double obj = std::abs(corr);
        if (obj > best_obj) {
            best_obj = obj;
            best.phase_indices = signs;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

double analog_correlation(const CVector& target, const AnalogBeamformer& column)
{
    if (column.num_rf_chains() != 1 || column.num_antennas() != target.size())
        throw std::invalid_argument("analog_correlation: shape mismatch");
    return std::abs(target.dot(realize(column).col(0)));
}

namespace {

struct ExhaustiveSearch {
    const CVector& target;
    const PhaseAlphabet& alphabet;
    double amp;
    std::vector<int> indices;
    std::vector<int> best_indices;
    double best = -1.0;

    // Depth-first enumeration in lexicographic order; `partial` is the
    // correlation contributed by entries [0, depth).
    void visit(Eigen::Index depth, Complex partial)
    {
        if (depth == target.size()) {
            const double obj = std::abs(partial);
            if (obj > best) {
                best = obj;
                best_indices = indices;
            }
            return;
        }
        const Complex t = std::conj(target(depth)) * amp;
        const int last = depth == 0 ? 1 : alphabet.resolution();
        for (int k = 0; k < last; ++k) {
            indices[static_cast<std::size_t>(depth)] = k;
            visit(depth + 1, partial + t * alphabet.phasor(k));
        }
    }
};

} // namespace

ExhaustiveResult exhaustive_analog_search(const CVector& target, const PhaseAlphabet& alphabet)
{
    const auto m = target.size();
    if (m < 1)
        throw std::invalid_argument("exhaustive_analog_search: empty target");
    if (m > kExhaustiveMaxAntennas || std::pow(static_cast<double>(alphabet.resolution()), static_cast<double>(m)) >
                                          kExhaustiveMaxCandidates)
        throw std::invalid_argument("search space too large");

    // Fixing the first index to 0 loses nothing: rotating every phase by a
    // common alphabet step leaves |target^H b| unchanged.
    ExhaustiveSearch search{target, alphabet, 1.0 / std::sqrt(static_cast<double>(m)),
                            std::vector<int>(static_cast<std::size_t>(m), 0), {}, -1.0};
    search.visit(0, Complex(0.0, 0.0));

    ExhaustiveResult out;
    out.column.alphabet = alphabet;
    out.column.phase_indices.resize(m, 1);
    for (Eigen::Index r = 0; r < m; ++r)
        out.column.phase_indices(r, 0) = search.best_indices[static_cast<std::size_t>(r)];
    out.objective = search.best;
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end design

std::string_view to_string(DesignMethod method)
{
    switch (method) {
    case DesignMethod::FullDigital: return "full_digital";
    case DesignMethod::PeAltMin: return "pe_altmin";
    case DesignMethod::Quantize: return "quantize";
    case DesignMethod::PhaseMatching: return "phase_matching";
    case DesignMethod::BinaryRank1: return "binary_rank1";
    case DesignMethod::Exhaustive: return "exhaustive";
    }
    return "unknown";
}

DesignMethod parse_design_method(std::string_view name)
{
    for (auto m : {DesignMethod::FullDigital, DesignMethod::PeAltMin, DesignMethod::Quantize,
                   DesignMethod::PhaseMatching, DesignMethod::BinaryRank1, DesignMethod::Exhaustive})
        if (to_string(m) == name)
            return m;
    throw ConfigError("unknown design method '" + std::string(name) + "'");
}

namespace {

DesignedBeamformer from_discrete(AnalogBeamformer analog, const CMatrix& target, PowerScaling scaling)
{
    DesignedBeamformer out;
    out.analog = realize(analog);
    out.digital = least_squares(out.analog, target, out.diagnostics.regularized);
    out.diagnostics.objective_history.push_back((target - out.analog * out.digital).norm());
    if (scaling == PowerScaling::TotalPower)
        scale_for_power(out.analog, out.digital, target.cols());
    out.discrete = std::move(analog);
    return out;
}

// Column-by-column discrete design; extra RF chains are seeded with quantized
// DFT columns as in the iterative designs.
template <typename ColumnDesign>
DesignedBeamformer columnwise(const CMatrix& target, int num_rf, const PhaseAlphabet& alphabet, PowerScaling scaling,
                              ColumnDesign design_column)
{
    check_factorization_args(target, num_rf, "design_hybrid");
    AnalogBeamformer analog = quantize_phases(seed_target(target, num_rf), alphabet);
    for (Eigen::Index k = 0; k < target.cols(); ++k)
        analog.phase_indices.col(k) = design_column(CVector(target.col(k))).phase_indices.col(0);
    return from_discrete(std::move(analog), target, scaling);
}

DesignedBeamformer design_side(const CMatrix& target, int num_rf, const DesignRequest& req, PowerScaling scaling)
{
    auto require_alphabet = [&]() -> const PhaseAlphabet& {
        if (!req.alphabet)
            throw std::invalid_argument(std::string("design_hybrid: method '") + std::string(to_string(req.method)) +
                                        "' needs a finite phase alphabet");
        return *req.alphabet;
    };

    switch (req.method) {
    case DesignMethod::FullDigital: {
        DesignedBeamformer out;
        out.analog = CMatrix::Identity(target.rows(), target.rows());
        out.digital = target;
        return out;
    }
    case DesignMethod::PeAltMin: {
        auto r = pe_altmin(target, num_rf, req.altmin_max_iters, req.altmin_tol, scaling);
        DesignedBeamformer out;
        out.analog = std::move(r.analog);
        out.digital = std::move(r.digital);
        out.diagnostics = std::move(r.diagnostics);
        return out;
    }
    case DesignMethod::Quantize: {
        const auto& alphabet = require_alphabet();
        auto r = pe_altmin(target, num_rf, req.altmin_max_iters, req.altmin_tol, PowerScaling::None);
        return from_discrete(quantize_phases(r.analog, alphabet), target, scaling);
    }
    case DesignMethod::PhaseMatching: {
        const auto& alphabet = require_alphabet();
        auto r = phase_matching(target, alphabet, num_rf, req.outer_iters, scaling);
        DesignedBeamformer out;
        out.analog = realize(r.beamformer.analog);
        out.digital = std::move(r.beamformer.digital);
        out.discrete = std::move(r.beamformer.analog);
        out.diagnostics = std::move(r.diagnostics);
        return out;
    }
    case DesignMethod::BinaryRank1: {
        const auto& alphabet = require_alphabet();
        if (alphabet.resolution() != 2)
            throw std::invalid_argument("design_hybrid: binary_rank1 requires resolution 2");
        return columnwise(target, num_rf, alphabet, scaling, [](const CVector& t) { return binary_rank1_design(t); });
    }
    case DesignMethod::Exhaustive: {
        const auto& alphabet = require_alphabet();
        return columnwise(target, num_rf, alphabet, scaling,
                          [&](const CVector& t) { return exhaustive_analog_search(t, alphabet).column; });
    }
    }
    throw std::invalid_argument("design_hybrid: unknown method");
}

} // namespace

HybridDesign design_hybrid(const SvdBeamformers& svd, const DesignRequest& request)
{
    const auto nt = svd.precoder.rows();
    const auto nr = svd.combiner.rows();
    if (request.num_streams < 1 || request.num_streams > svd.precoder.cols())
        throw std::invalid_argument("design_hybrid: num_streams out of range");
    if (request.method != DesignMethod::FullDigital) {
        if (request.num_rf_tx < request.num_streams || request.num_rf_rx < request.num_streams)
            throw std::invalid_argument("design_hybrid: num_streams must be <= num_rf");
        if (request.num_rf_tx > nt || request.num_rf_rx > nr)
            throw std::invalid_argument("design_hybrid: num_rf must be <= num_antennas");
    }

    const CMatrix f_opt = svd.precoder.leftCols(request.num_streams);
    const CMatrix w_opt = svd.combiner.leftCols(request.num_streams);

    HybridDesign out;
    out.tx = design_side(f_opt, request.num_rf_tx, request, PowerScaling::TotalPower);
    out.rx = design_side(w_opt, request.num_rf_rx, request, PowerScaling::None);
    return out;
}

HybridDesign design_hybrid(const CMatrix& channel, const DesignRequest& request)
{
    return design_hybrid(svd_full_digital(channel, request.num_streams), request);
}

} // namespace posw
