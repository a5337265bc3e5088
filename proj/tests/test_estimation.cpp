#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "posw/channel.hpp"
#include "posw/estimation.hpp"

using namespace posw;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMatrix random_matrix(int rows, int cols, Rng& rng)
{
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = complex_gaussian(rng);
    return m;
}

// Oracle: every pair of columns, inner products computed entry by entry.
double coherence_oracle(const CMatrix& a)
{
    double best = 0.0;
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (i == j)
                continue;
            Complex ip(0.0, 0.0);
            double ni = 0.0, nj = 0.0;
            for (Eigen::Index k = 0; k < a.rows(); ++k) {
                ip += std::conj(a(k, i)) * a(k, j);
                ni += std::norm(a(k, i));
                nj += std::norm(a(k, j));
            }
            best = std::max(best, std::abs(ip) / std::sqrt(ni * nj));
        }
    return best;
}

TrainingDims dims(int nt, int mt, int nr, int mr)
{
    TrainingDims d;
    d.num_tx_antennas = nt;
    d.num_tx_beams = mt;
    d.num_rx_antennas = nr;
    d.num_rx_beams = mr;
    return d;
}

} // namespace

TEST_CASE("generate_training: binary entries are exactly +-1/sqrt(N)")
{
    Rng rng(1);
    const auto t = generate_training(TrainingKind::PseudoRandomBinary, dims(64, 32, 64, 32), rng);
    CHECK(t.tx.rows() == 64);
    CHECK(t.tx.cols() == 32);
    for (Eigen::Index i = 0; i < t.tx.size(); ++i) {
        const Complex z = t.tx.data()[i];
        CHECK(z.imag() == 0.0);
        CHECK(std::abs(z.real()) == 0.125);
    }
    for (Eigen::Index j = 0; j < t.rx.cols(); ++j)
        CHECK(std::abs(t.rx.col(j).norm() - 1.0) < 1e-14);
}

TEST_CASE("generate_training: quaternary entries lie on multiples of pi/2")
{
    Rng rng(2);
    const auto t = generate_training(TrainingKind::PseudoRandomQuaternary, dims(16, 16, 8, 4), rng);
    std::set<std::pair<double, double>> seen;
    for (Eigen::Index i = 0; i < t.tx.size(); ++i) {
        const Complex z = t.tx.data()[i] * 4.0;
        const bool on_axis = (std::abs(z.real()) == 1.0 && z.imag() == 0.0) ||
                             (z.real() == 0.0 && std::abs(z.imag()) == 1.0);
        CHECK(on_axis);
        seen.insert({z.real(), z.imag()});
    }
    CHECK(seen.size() == 4);
}

TEST_CASE("generate_training: deterministic Hadamard design")
{
    Rng rng(3);
    const auto t = generate_training(TrainingKind::Deterministic, dims(4, 4, 4, 4), rng);
    CHECK(mutual_coherence(t.tx) == 0.0);
    CHECK((t.tx.adjoint() * t.tx - CMatrix::Identity(4, 4)).norm() < 1e-15);

    // no randomness is consumed
    Rng a(3), b(3);
    generate_training(TrainingKind::Deterministic, dims(8, 4, 8, 4), a);
    CHECK(a() == b());

    CHECK_THROWS_WITH_AS(generate_training(TrainingKind::Deterministic, dims(6, 4, 8, 4), rng),
                         "deterministic construction unavailable", std::invalid_argument);
    CHECK_THROWS_AS(generate_training(TrainingKind::Deterministic, dims(8, 16, 8, 4), rng), std::invalid_argument);
}

TEST_CASE("sylvester_hadamard: H H^T = n I")
{
    for (int n : {1, 2, 4, 8, 16, 64}) {
        const Eigen::MatrixXd h = sylvester_hadamard(n);
        CHECK((h * h.transpose() - n * Eigen::MatrixXd::Identity(n, n)).norm() == 0.0);
    }
    CHECK_THROWS_AS(sylvester_hadamard(12), std::invalid_argument);
}

TEST_CASE("generate_training: deterministic coherence never exceeds random at 64x32")
{
    Rng none(0);
    const double det = mutual_coherence(generate_training(TrainingKind::Deterministic, dims(64, 32, 64, 32), none).tx);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = trial_stream(31, seed);
        const auto bin = generate_training(TrainingKind::PseudoRandomBinary, dims(64, 32, 64, 32), rng);
        const auto quat = generate_training(TrainingKind::PseudoRandomQuaternary, dims(64, 32, 64, 32), rng);
        CHECK(det <= mutual_coherence(bin.tx));
        CHECK(det <= mutual_coherence(quat.tx));
    }
}

TEST_CASE("mutual_coherence: examples and oracle")
{
    CHECK(mutual_coherence(CMatrix::Identity(4, 4)) == 0.0);
    CMatrix dup(3, 2);
    dup << 1.0, 1.0, 2.0, 2.0, 0.5, 0.5;
    CHECK(mutual_coherence(dup) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mutual_coherence(CMatrix::Ones(3, 1)), std::invalid_argument);
    CHECK_THROWS_AS(mutual_coherence(CMatrix::Zero(3, 3)), std::invalid_argument);

    Rng rng(5);
    const CMatrix a = random_matrix(64, 128, rng);
    const double mu = mutual_coherence(a);
    CHECK(mu >= 0.0);
    CHECK(mu <= 1.0);
    CHECK(std::abs(mu - coherence_oracle(a)) < 1e-12);
}

TEST_CASE("make_dictionary: grid and atoms")
{
    const auto d = make_dictionary(4, 8, 8);
    CHECK(d.grid_size == 8);
    CHECK(d.tx_grid.front() == -1.0);
    CHECK(d.tx_grid[4] == 0.0);
    CHECK(d.tx_atoms.cols() == 8);
    CHECK(d.rx_atoms.rows() == 8);
    CHECK(d.tx_angle(4) == 0.0);
    for (int g = 0; g < 8; ++g)
        CHECK((d.tx_atoms.col(g) - array_response_spatial(4, d.tx_grid[static_cast<std::size_t>(g)])).norm() < 1e-15);
    CHECK_THROWS_AS(make_dictionary(16, 4, 8), std::invalid_argument);
}

TEST_CASE("measure: noiseless examples and reproducible noise")
{
    TrainingDesign one;
    one.tx = CMatrix::Ones(1, 1);
    one.rx = CMatrix::Ones(1, 1);
    Rng rng(0);
    CMatrix h(1, 1);
    h << Complex(2.0, -1.0);
    CHECK(measure(h, one, kInf, rng)(0) == Complex(2.0, -1.0));
    CHECK(measure(CMatrix::Zero(1, 1), one, kInf, rng)(0) == Complex(0.0, 0.0));

    Rng t(9);
    const auto tr = generate_training(TrainingKind::PseudoRandomBinary, dims(8, 4, 8, 3), t);
    const CMatrix hh = random_matrix(8, 8, t);
    Rng a(100), b(100);
    const CVector ya = measure(hh, tr, 10.0, a);
    const CVector yb = measure(hh, tr, 10.0, b);
    CHECK(ya == yb);
    CHECK(ya.size() == 12);
    const CVector clean = measure(hh, tr, kInf, a);
    CHECK((ya - clean).norm() > 0.0);
    CHECK(std::abs(clean(1 * 4 + 2) - tr.rx.col(1).dot(hh * tr.tx.col(2))) < 1e-12);
    CHECK_THROWS_AS(measure(hh, tr, 0.0, a), std::invalid_argument);
}

TEST_CASE("measure: noise variance is 1/snr")
{
    TrainingDesign one;
    one.tx = CMatrix::Ones(1, 1);
    one.rx = CMatrix::Ones(1, 1);
    Rng rng(44);
    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        acc += std::norm(measure(CMatrix::Zero(1, 1), one, 4.0, rng)(0));
    CHECK(acc / n == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("build_sensing_matrix: scalar case")
{
    TrainingDesign one;
    one.tx = CMatrix::Ones(1, 1);
    one.rx = CMatrix::Ones(1, 1);
    const auto d = make_dictionary(1, 1, 1);
    const CMatrix a = build_sensing_matrix(one, d);
    CHECK(a.rows() == 1);
    CHECK(a.cols() == 1);
    CHECK(std::abs(a(0, 0) - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("build_sensing_matrix: columns are measurements of single atom pairs")
{
    Rng rng(12);
    const auto tr = generate_training(TrainingKind::PseudoRandomQuaternary, dims(8, 5, 6, 4), rng);
    const auto d = make_dictionary(8, 6, 10);
    const CMatrix a = build_sensing_matrix(tr, d);
    REQUIRE(a.rows() == 20);
    REQUIRE(a.cols() == 100);
    for (int gt = 0; gt < 10; ++gt)
        for (int gr = 0; gr < 10; ++gr) {
            const CMatrix h = d.rx_atoms.col(gr) * d.tx_atoms.col(gt).adjoint();
            const CVector oracle = measure(h, tr, kInf, rng);
            CHECK((a.col(gr + 10 * gt) - oracle).cwiseAbs().maxCoeff() < 1e-12);
        }
}

TEST_CASE("build_sensing_matrix: orthonormal training gives columns of norm <= 1")
{
    Rng none(0);
    const auto tr = generate_training(TrainingKind::Deterministic, dims(8, 8, 8, 8), none);
    const auto d = make_dictionary(8, 8, 24);
    const CMatrix a = build_sensing_matrix(tr, d);
    CHECK(a.colwise().norm().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("omp: examples")
{
    const CMatrix a = CMatrix::Identity(4, 4);
    const CVector y = 3.0 * a.col(2);
    const auto s = omp(y, a, 1);
    REQUIRE(s.atoms.size() == 1);
    CHECK(s.atoms[0] == 2);
    CHECK(std::abs(s.coefficients(0) - Complex(3.0, 0.0)) < 1e-14);

    const auto z = omp(CVector::Zero(4), a, 2);
    CHECK(z.atoms.empty());

    CHECK_THROWS_AS(omp(y, a, 5), std::invalid_argument);
    CHECK_THROWS_AS(omp(y, a, 0), std::invalid_argument);
}

TEST_CASE("omp: residual never increases and atoms never repeat")
{
    for (int trial = 0; trial < 30; ++trial) {
        Rng rng = trial_stream(13, static_cast<std::uint64_t>(trial));
        const CMatrix a = random_matrix(20, 50, rng);
        const CVector y = random_matrix(20, 1, rng);
        const auto s = omp(y, a, 10, 0.0);
        CHECK(s.atoms.size() == 10);
        CHECK(std::set<int>(s.atoms.begin(), s.atoms.end()).size() == s.atoms.size());
        for (std::size_t i = 1; i < s.residual_norms.size(); ++i)
            CHECK(s.residual_norms[i] <= s.residual_norms[i - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("omp: exact recovery with an orthogonal dictionary")
{
    // G = N gives an orthonormal DFT grid; with enough Hadamard beams the
    // sensing matrix has orthogonal columns and OMP recovers any support.
    const auto d = make_dictionary(4, 4, 4);
    Rng none(0);
    const auto tr = generate_training(TrainingKind::Deterministic, dims(4, 4, 4, 4), none);
    const CMatrix a = build_sensing_matrix(tr, d);
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng = trial_stream(14, static_cast<std::uint64_t>(trial));
        const int k = 1 + trial % 4;
        const auto ch = sample_on_grid_channel(d, k, rng);
        const auto est = estimate_channel(measure(ch.matrix, tr, kInf, rng), a, d, k);
        std::vector<GridPoint> got = est.support;
        std::sort(got.begin(), got.end());
        CHECK(got == ch.support);
        CHECK(nmse(ch.matrix, est.reconstructed) < 1e-20);
    }
}

TEST_CASE("estimate_channel: noiseless single on-grid path")
{
    const auto d = make_dictionary(16, 16, 32);
    Rng rng(15);
    const auto tr = generate_training(TrainingKind::PseudoRandomBinary, dims(16, 16, 16, 16), rng);
    const auto ch = sample_on_grid_channel(d, 1, rng);
    const auto est = estimate_channel(measure(ch.matrix, tr, kInf, rng), tr, d, 1);
    REQUIRE(est.support.size() == 1);
    CHECK(est.support[0] == ch.support[0]);
    CHECK(nmse(ch.matrix, est.reconstructed) <= 1e-20);
}

TEST_CASE("estimate_channel: off-grid path leaves a residual error")
{
    const auto d = make_dictionary(16, 16, 32);
    Rng rng(16);
    const auto tr = generate_training(TrainingKind::Deterministic, dims(16, 16, 16, 16), rng);
    const double psi = d.tx_grid[5] + 1.0 / 32.0;
    const CMatrix h = 16.0 * array_response_spatial(16, psi) * array_response_spatial(16, psi).adjoint();
    const auto est = estimate_channel(measure(h, tr, kInf, rng), tr, d, 1);
    CHECK(nmse(h, est.reconstructed) > 0.0);
}

TEST_CASE("estimate_channel: clustered channel at 20 dB")
{
    // regression bound: NMSE <= 10 / snr with K = 50 atoms
    const ArrayGeometry g(16);
    const auto d = make_dictionary(16, 16, 32);
    for (auto kind : {TrainingKind::PseudoRandomBinary, TrainingKind::PseudoRandomQuaternary,
                      TrainingKind::Deterministic}) {
        double acc = 0.0;
        const int trials = 20;
        for (int t = 0; t < trials; ++t) {
            Rng rng = trial_stream(17, static_cast<std::uint64_t>(t));
            const auto ch = sample_channel(g, g, ChannelConfig{}, rng);
            const auto tr = generate_training(kind, dims(16, 16, 16, 16), rng);
            const auto est = estimate_channel(measure(ch.matrix, tr, 100.0, rng), tr, d, 50);
            acc += nmse(ch.matrix, est.reconstructed);
        }
        INFO("kind " << to_string(kind));
        CHECK(acc / trials <= 0.1);
    }
}

TEST_CASE("nmse: examples")
{
    const CMatrix h = CMatrix::Identity(3, 3);
    CHECK(nmse(h, h) == 0.0);
    CHECK(nmse(h, CMatrix::Zero(3, 3)) == 1.0);
    CHECK(nmse(h, 2.0 * h) == 1.0);
    CHECK_THROWS_WITH_AS(nmse(CMatrix::Zero(3, 3), h), "nmse: zero true channel", std::invalid_argument);
}

TEST_CASE("sample_on_grid_channel: distinct support and scaling")
{
    const auto d = make_dictionary(8, 8, 16);
    double acc = 0.0;
    const int n = 2000;
    for (int t = 0; t < n; ++t) {
        Rng rng = trial_stream(18, static_cast<std::uint64_t>(t));
        const auto ch = sample_on_grid_channel(d, 3, rng);
        CHECK(std::set<GridPoint>(ch.support.begin(), ch.support.end()).size() == 3);
        CHECK(std::is_sorted(ch.support.begin(), ch.support.end()));
        acc += ch.matrix.squaredNorm();
    }
    // off-grid-pair cross terms average out, so E||H||^2 is close to N_t N_r
    CHECK(acc / n == doctest::Approx(64.0).epsilon(0.1));
}

TEST_CASE("training kind names")
{
    CHECK(parse_training_kind("binary") == TrainingKind::PseudoRandomBinary);
    CHECK(parse_training_kind("quaternary") == TrainingKind::PseudoRandomQuaternary);
    CHECK(parse_training_kind("deterministic") == TrainingKind::Deterministic);
    CHECK(to_string(TrainingKind::Deterministic) == "deterministic");
    CHECK_THROWS_AS(parse_training_kind("gauss"), ConfigError);
}
