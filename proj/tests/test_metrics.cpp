#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "posw/beamforming.hpp"
#include "posw/metrics.hpp"
#include "posw/rng.hpp"

using namespace posw;

namespace {

CMatrix random_matrix(int rows, int cols, Rng& rng)
{
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = complex_gaussian(rng);
    return m;
}

// Oracle: sum_i log2(1 + snr/ns * sigma_i^2) over the top ns singular values.
double svd_rate(const CMatrix& h, double snr, int ns)
{
    const RVector s = Eigen::JacobiSVD<CMatrix>(h).singularValues();
    double r = 0.0;
    for (int i = 0; i < ns; ++i)
        r += std::log2(1.0 + snr / ns * s(i) * s(i));
    return r;
}

// Oracle: log2 det via the eigenvalues of the generalized Hermitian problem
// (W^H H F F^H H^H W) x = lambda (W^H W) x.
double eigen_rate(const CMatrix& h, const CMatrix& f, const CMatrix& w, double snr, int ns)
{
    const CMatrix g = w.adjoint() * h * f;
    const CMatrix a = g * g.adjoint();
    const CMatrix b = w.adjoint() * w;
    Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> es(a, b);
    double r = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        r += std::log2(1.0 + snr / ns * std::max(es.eigenvalues()(i), 0.0));
    return r;
}

} // namespace

TEST_CASE("spectral_efficiency: scalar channel")
{
    const CMatrix one = CMatrix::Ones(1, 1);
    CHECK(spectral_efficiency(one, one, one, 1.0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spectral_efficiency(one, one, one, 3.0, 1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("spectral_efficiency: zero channel gives zero rate")
{
    const CMatrix f = CMatrix::Identity(4, 2);
    CHECK(spectral_efficiency(CMatrix::Zero(4, 4), f, f, 10.0, 2) == 0.0);
}

TEST_CASE("spectral_efficiency: SVD beamformers reach the eigen-mode rate")
{
    Rng rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        const int nt = 4 + trial % 5, nr = 3 + trial % 4;
        const int ns = 1 + trial % std::min(nt, nr);
        const CMatrix h = random_matrix(nr, nt, rng);
        const auto s = svd_full_digital(h, ns);
        const double snr = db_to_linear(-10.0 + trial);
        CHECK(std::abs(spectral_efficiency(h, s.precoder, s.combiner, snr, ns) - svd_rate(h, snr, ns)) < 1e-9);
    }
}

TEST_CASE("spectral_efficiency: matches the generalized eigenvalue oracle for arbitrary W")
{
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const int ns = 1 + trial % 3;
        const CMatrix h = random_matrix(8, 8, rng);
        CMatrix f = random_matrix(8, ns, rng);
        f *= std::sqrt(double(ns)) / f.norm();
        const CMatrix w = random_matrix(8, ns, rng);
        const double got = spectral_efficiency(h, f, w, 4.0, ns);
        CHECK(std::abs(got - eigen_rate(h, f, w, 4.0, ns)) < 1e-9);
    }
}

TEST_CASE("spectral_efficiency: invariant to invertible mixing of the combiner")
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix h = random_matrix(6, 6, rng);
        CMatrix f = random_matrix(6, 3, rng);
        f *= std::sqrt(3.0) / f.norm();
        const CMatrix w = random_matrix(6, 3, rng);
        const CMatrix mix = random_matrix(3, 3, rng) + 3.0 * CMatrix::Identity(3, 3);
        CHECK(std::abs(spectral_efficiency(h, f, w, 2.0, 3) - spectral_efficiency(h, f, w * mix, 2.0, 3)) < 1e-9);
    }
}

TEST_CASE("spectral_efficiency: non-decreasing in SNR")
{
    Rng rng(4);
    const CMatrix h = random_matrix(8, 8, rng);
    const auto s = svd_full_digital(h, 3);
    double prev = -1.0;
    for (double db = -30.0; db <= 30.0; db += 2.5) {
        const double r = spectral_efficiency(h, s.precoder, s.combiner, db_to_linear(db), 3);
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("spectral_efficiency: errors")
{
    const CMatrix h = CMatrix::Identity(4, 4);
    const CMatrix f = CMatrix::Identity(4, 2);
    CMatrix w = CMatrix::Identity(4, 2);
    w.col(1) = w.col(0);
    CHECK_THROWS_WITH_AS(spectral_efficiency(h, f, w, 1.0, 2), "singular combiner", NumericalError);
    CHECK_THROWS_AS(spectral_efficiency(h, 2.0 * f, f, 1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(spectral_efficiency(h, f, CMatrix::Identity(3, 2), 1.0, 2), std::invalid_argument);
}

TEST_CASE("db conversions")
{
    CHECK(db_to_linear(0.0) == 1.0);
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    CHECK(linear_to_db(100.0) == doctest::Approx(20.0));
}

TEST_CASE("total_power: default model at 64 antennas, 6 RF chains")
{
    const PowerModel m;
    CHECK(total_power(Architecture::full_digital(64), m) == 19900.0);
    CHECK(total_power(Architecture::ps_hybrid(64, 6), m) == 17860.0);
    CHECK(total_power(Architecture::pos_sw_hybrid(64, 6), m) == 4420.0);
}

TEST_CASE("total_power: POS-SW is cheaper than PS hybrid for every RF count")
{
    const PowerModel m;
    for (int n = 1; n <= 64; ++n)
        CHECK(total_power(Architecture::pos_sw_hybrid(64, n), m) < total_power(Architecture::ps_hybrid(64, n), m));
}

TEST_CASE("energy_efficiency: examples")
{
    const PowerModel m;
    CHECK(energy_efficiency(44.2, Architecture::pos_sw_hybrid(64, 6), m) == doctest::Approx(10.0));
    CHECK(energy_efficiency(0.0, Architecture::full_digital(64), m) == 0.0);
    PowerModel zero{0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(energy_efficiency(1.0, Architecture::pos_sw_hybrid(4, 1), zero), std::invalid_argument);
    CHECK_THROWS_AS(Architecture::ps_hybrid(4, 5).validate(), std::invalid_argument);
}

TEST_CASE("beam_pattern: unit gain at the steering angle")
{
    const ArrayGeometry g(16);
    const double theta = 0.4;
    const auto p = beam_pattern(array_response(g, theta), g, {theta, -theta});
    CHECK(p[0].gain == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[1].gain < 1.0);
}

TEST_CASE("beam_pattern: two-element broadside null at endfire")
{
    const ArrayGeometry g(2);
    const CVector w = CVector::Constant(2, Complex(1.0 / std::sqrt(2.0), 0.0));
    const auto p = beam_pattern(w, g, {kPi / 2.0});
    CHECK(p[0].gain < 1e-30);
}

TEST_CASE("beam_pattern: quantized beam still peaks near its direction")
{
    const ArrayGeometry g(64);
    const double dod = deg_to_rad(45.0);
    const auto weights = realize(quantize_phases(CMatrix(array_response(g, dod)), PhaseAlphabet(8)));
    const auto p = beam_pattern(weights.col(0), g, angle_grid(0.0, kPi / 2.0, deg_to_rad(0.1)));
    const auto peak = std::max_element(p.begin(), p.end(),
                                       [](const PatternSample& a, const PatternSample& b) { return a.gain < b.gain; });
    CHECK(std::abs(rad_to_deg(peak->angle) - 45.0) <= 2.0);
    for (const auto& s : p) {
        CHECK(s.gain >= 0.0);
        CHECK(s.gain <= 1.0);
    }
}

TEST_CASE("beam_pattern and angle_grid: errors and sizes")
{
    const ArrayGeometry g(4);
    CHECK_THROWS_AS(beam_pattern(CVector::Zero(4), g, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(beam_pattern(CVector::Ones(3), g, {0.0}), std::invalid_argument);
    CHECK(angle_grid(0.0, 90.0, 0.1).size() == 901);
    CHECK_THROWS_AS(angle_grid(1.0, 0.0, 0.1), std::invalid_argument);
}
