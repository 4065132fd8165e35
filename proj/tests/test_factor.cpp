#include <doctest.h>

#include <cmath>
#include <random>

#include "semfactor/factor.hpp"
#include "semfactor/io_util.hpp"
#include "test_helpers.hpp"

using namespace semfactor;
using namespace semfactor::factor;
using linalg::Mat;
using similarity::SimilarityMatrix;

TEST_SUITE_BEGIN("factor");

namespace {

SimilarityMatrix one_factor_sim() {
    // lambda = (0.8, 0.7, 0.6): off-diagonals 0.56, 0.48, 0.42.
    SimilarityMatrix sim;
    sim.labels = {"p", "q", "r"};
    sim.values = Mat(3, 3);
    const double l[3] = {0.8, 0.7, 0.6};
    for (int i = 0; i < 3; ++i) {
        sim.values(i, i) = 1.0;
        for (int j = i + 1; j < 3; ++j) {
            sim.values(i, j) = l[i] * l[j];
            sim.values(j, i) = l[i] * l[j];
        }
    }
    return sim;
}

SimilarityMatrix identity_sim(std::size_t n) {
    SimilarityMatrix sim;
    sim.values = Mat::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        sim.labels.push_back("u" + std::to_string(i));
    return sim;
}

Mat perfect_two_block() {
    Mat lambda(4, 2);
    lambda(0, 0) = 0.8;
    lambda(1, 0) = 0.7;
    lambda(2, 1) = 0.8;
    lambda(3, 1) = 0.7;
    return lambda;
}

}  // namespace

TEST_CASE("minres recovers a known one-factor model") {
    const auto sim = one_factor_sim();
    const auto fit = minres_extract(sim, 1);
    CHECK(fit.converged);
    CHECK(fit.discrepancy < 1e-10);
    const double expected[3] = {0.8, 0.7, 0.6};
    for (int i = 0; i < 3; ++i) {
        CHECK(std::fabs(fit.loadings(i, 0)) ==
              doctest::Approx(expected[i]).epsilon(1e-3));
        CHECK(fit.uniquenesses[i] ==
              doctest::Approx(1.0 - expected[i] * expected[i]).epsilon(1e-3));
        CHECK(fit.uniquenesses[i] + fit.loadings(i, 0) * fit.loadings(i, 0) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("minres on an identity matrix finds no common variance") {
    const auto fit = minres_extract(identity_sim(4), 1);
    CHECK(fit.discrepancy < 1e-12);
    for (int i = 0; i < 4; ++i)
        CHECK(std::fabs(fit.loadings(i, 0)) < 1e-4);
}

TEST_CASE("minres rejects out-of-range factor counts") {
    const auto sim = identity_sim(4);
    CHECK_THROWS_AS((void)minres_extract(sim, 0), Error);
    CHECK_THROWS_AS((void)minres_extract(sim, 4), Error);
    CHECK_NOTHROW((void)minres_extract(sim, 3));
}

TEST_CASE("varimax leaves perfect simple structure alone") {
    const Mat lambda = perfect_two_block();
    const auto rot = varimax(lambda);
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t expect = i < 2 ? 0 : 1;
        std::size_t argmax =
            std::fabs(rot.loadings(i, 0)) >= std::fabs(rot.loadings(i, 1)) ? 0
                                                                           : 1;
        CHECK(argmax == expect);
        CHECK(std::fabs(rot.loadings(i, expect)) ==
              doctest::Approx(lambda(i, expect)).epsilon(1e-8));
    }
}

TEST_CASE("varimax undoes a 45-degree mix") {
    const Mat lambda = perfect_two_block();
    const double c = std::cos(0.25 * 3.14159265358979323846);
    Mat mixed(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        mixed(i, 0) = c * lambda(i, 0) + c * lambda(i, 1);
        mixed(i, 1) = -c * lambda(i, 0) + c * lambda(i, 1);
    }
    auto argmax_col = [](const Mat& l, std::size_t row) {
        return std::fabs(l(row, 0)) >= std::fabs(l(row, 1)) ? 0u : 1u;
    };
    for (bool kaiser : {true, false}) {
        VarimaxOptions opt;
        opt.kaiser_normalize = kaiser;
        const auto rot = varimax(mixed, opt);
        // rows {0,1} regroup on one column, rows {2,3} on the other
        CHECK(argmax_col(rot.loadings, 0) == argmax_col(rot.loadings, 1));
        CHECK(argmax_col(rot.loadings, 2) == argmax_col(rot.loadings, 3));
        CHECK(argmax_col(rot.loadings, 0) != argmax_col(rot.loadings, 2));
    }
}

TEST_CASE("varimax criterion never decreases and T stays orthogonal") {
    auto gen = test_helpers::rng(51);
    for (int seed = 0; seed < 25; ++seed) {
        const Mat lambda = test_helpers::random_matrix(gen, 20, 3, 0.4);
        for (bool kaiser : {false, true}) {
            VarimaxOptions opt;
            opt.kaiser_normalize = kaiser;
            const auto rot = varimax(lambda, opt);

            // criterion compared on the scale the sweeps optimize
            Mat before = lambda;
            if (kaiser) {
                for (std::size_t i = 0; i < before.rows; ++i) {
                    double h2 = 0.0;
                    for (std::size_t k = 0; k < before.cols; ++k)
                        h2 += before(i, k) * before(i, k);
                    if (h2 >= 1e-12)
                        for (std::size_t k = 0; k < before.cols; ++k)
                            before(i, k) /= std::sqrt(h2);
                }
            }
            CHECK(rot.criterion >= varimax_criterion(before) - 1e-12);
            if (!kaiser)
                CHECK(varimax_criterion(rot.loadings) >=
                      varimax_criterion(lambda) - 1e-12);

            // T^T T = I
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) {
                    double v = 0.0;
                    for (std::size_t k = 0; k < 3; ++k)
                        v += rot.rotation(k, i) * rot.rotation(k, j);
                    CHECK(std::fabs(v - (i == j ? 1.0 : 0.0)) < 1e-10);
                }

            // rotated = input * T
            const Mat product = linalg::matmul(lambda, rot.rotation);
            for (std::size_t i = 0; i < product.a.size(); ++i)
                CHECK(std::fabs(product.a[i] - rot.loadings.a[i]) < 1e-10);
        }
    }
}

TEST_CASE("varimax m=1 and error paths") {
    Mat single(3, 1);
    single(0, 0) = 0.5;
    single(1, 0) = -0.25;
    single(2, 0) = 0.1;
    const auto rot = varimax(single);
    CHECK(rot.criterion == 0.0);
    CHECK(rot.rotation(0, 0) == 1.0);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(rot.loadings(i, 0) == single(i, 0));

    Mat bad(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)varimax(bad), Error);
}

TEST_CASE("canonicalize sign and order rules") {
    Mat a(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = 0.5;
    const Mat canon = canonicalize(a);
    CHECK(canon(0, 0) == 1.0);
    CHECK(canon(1, 1) == 0.5);
    CHECK(canon(0, 1) == 0.0);

    Mat b(2, 2);  // column SSQs 0.2 and 0.9 -> swap
    b(0, 0) = std::sqrt(0.2);
    b(1, 1) = std::sqrt(0.9);
    const Mat swapped = canonicalize(b);
    CHECK(swapped(1, 0) == doctest::Approx(std::sqrt(0.9)));
    CHECK(swapped(0, 1) == doctest::Approx(std::sqrt(0.2)));
}

TEST_CASE("canonicalize is idempotent and preserves LL'") {
    auto gen = test_helpers::rng(52);
    for (int seed = 0; seed < 10; ++seed) {
        const Mat lambda = test_helpers::random_matrix(gen, 9, 4, 0.6);
        const Mat once = canonicalize(lambda);
        const Mat twice = canonicalize(once);
        for (std::size_t i = 0; i < once.a.size(); ++i)
            CHECK(once.a[i] == twice.a[i]);

        for (std::size_t i = 0; i < 9; ++i)
            for (std::size_t j = 0; j < 9; ++j) {
                double before = 0.0, after = 0.0;
                for (std::size_t k = 0; k < 4; ++k) {
                    before += lambda(i, k) * lambda(j, k);
                    after += once(i, k) * once(j, k);
                }
                CHECK(before == doctest::Approx(after).epsilon(1e-12));
            }
    }
}

TEST_CASE("fit_indices rmsr cases") {
    const auto sim = one_factor_sim();
    const auto fit = minres_extract(sim, 1);
    const auto indices = fit_indices(sim, fit.loadings, fit.uniquenesses);
    CHECK(indices.rmsr < 1e-6);
    CHECK_FALSE(indices.chi_square.has_value());

    const auto eye = identity_sim(4);
    Mat zero(4, 1);
    std::vector<double> ones(4, 1.0);
    CHECK(fit_indices(eye, zero, ones).rmsr == 0.0);
}

TEST_CASE("chi-square matches a hand-computed 3x3 oracle") {
    // S and the model C = LL' + diag(psi) differ, so f_ML > 0. The oracle
    // evaluates ln det and the inverse by cofactors, independent of the
    // production Cholesky path.
    SimilarityMatrix sim;
    sim.labels = {"a", "b", "c"};
    sim.values = Mat::identity(3);
    sim.values(0, 1) = sim.values(1, 0) = 0.3;
    sim.values(0, 2) = sim.values(2, 0) = 0.2;
    sim.values(1, 2) = sim.values(2, 1) = 0.1;

    Mat lambda(3, 1);
    lambda(0, 0) = 0.5;
    lambda(1, 0) = 0.4;
    lambda(2, 0) = 0.3;
    std::vector<double> psi{0.75, 0.84, 0.91};

    auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    double s[3][3], c[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            s[i][j] = sim.values(i, j);
            c[i][j] = lambda(i, 0) * lambda(j, 0) + (i == j ? psi[i] : 0.0);
        }
    const double det_c = det3(c);
    const double det_s = det3(s);
    // inverse of c by cofactors, then trace(S C^-1)
    double inv[3][3];
    inv[0][0] = (c[1][1] * c[2][2] - c[1][2] * c[2][1]) / det_c;
    inv[0][1] = (c[0][2] * c[2][1] - c[0][1] * c[2][2]) / det_c;
    inv[0][2] = (c[0][1] * c[1][2] - c[0][2] * c[1][1]) / det_c;
    inv[1][0] = (c[1][2] * c[2][0] - c[1][0] * c[2][2]) / det_c;
    inv[1][1] = (c[0][0] * c[2][2] - c[0][2] * c[2][0]) / det_c;
    inv[1][2] = (c[0][2] * c[1][0] - c[0][0] * c[1][2]) / det_c;
    inv[2][0] = (c[1][0] * c[2][1] - c[1][1] * c[2][0]) / det_c;
    inv[2][1] = (c[0][1] * c[2][0] - c[0][0] * c[2][1]) / det_c;
    inv[2][2] = (c[0][0] * c[1][1] - c[0][1] * c[1][0]) / det_c;
    double trace = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) trace += s[i][k] * inv[k][i];
    const double f_ml = std::log(det_c) - std::log(det_s) + trace - 3.0;
    const long long n_pseudo = 500;
    const double expected_stat =
        (static_cast<double>(n_pseudo) - 1.0 - (2.0 * 3 + 5.0) / 6.0 -
         2.0 * 1 / 3.0) *
        f_ml;

    const auto indices = fit_indices(sim, lambda, psi, n_pseudo);
    REQUIRE(indices.chi_square.has_value());
    CHECK(indices.chi_square->statistic ==
          doctest::Approx(expected_stat).epsilon(1e-10));
    CHECK(indices.chi_square->df == ((3 - 1) * (3 - 1) - 3 - 1) / 2);
}

TEST_CASE("chi-square is omitted with a note for singular input") {
    SimilarityMatrix sim;
    sim.labels = {"a", "b", "c"};
    sim.values = Mat(3, 3);
    for (auto& v : sim.values.a) v = 1.0;  // rank one, singular
    Mat lambda(3, 1);
    lambda(0, 0) = lambda(1, 0) = lambda(2, 0) = 1.0;
    std::vector<double> psi{0.001, 0.001, 0.001};
    const auto indices = fit_indices(sim, lambda, psi, 100);
    CHECK_FALSE(indices.chi_square.has_value());
    CHECK(indices.chi_square_note.find("singular") != std::string::npos);
    CHECK(indices.rmsr >= 0.0);
}

TEST_CASE("fit_model recovers a two-factor block design") {
    auto gen = test_helpers::rng(53);
    const auto model = test_helpers::simple_structure_model(gen, 6, 2);
    const auto sol = fit_model(model.sim, 2);
    std::string why;
    CHECK_MESSAGE(test_helpers::recovers_design(model, sol.loadings, 1e-2, &why),
                  why);
    CHECK(sol.discrepancy < 1e-8);
    CHECK(sol.converged);
    // canonical order: column SSQs descending
    for (std::size_t k = 1; k < sol.column_ssq.size(); ++k)
        CHECK(sol.column_ssq[k - 1] >= sol.column_ssq[k] - 1e-12);
}

TEST_CASE("fit_model with m=1 equals plain extraction") {
    const auto sim = one_factor_sim();
    const auto direct = minres_extract(sim, 1);
    const auto sol = fit_model(sim, 1);
    for (int i = 0; i < 3; ++i)
        CHECK(std::fabs(sol.loadings(i, 0)) ==
              doctest::Approx(std::fabs(direct.loadings(i, 0))).epsilon(1e-12));
    CHECK(sol.rotation_criterion == 0.0);
}

TEST_CASE("rmsr is invariant under rotation") {
    auto gen = test_helpers::rng(54);
    for (int seed = 0; seed < 5; ++seed) {
        const auto model = test_helpers::simple_structure_model(gen, 12, 3);
        const auto raw = minres_extract(model.sim, 3);
        const auto rot = varimax(raw.loadings);
        const double before =
            fit_indices(model.sim, raw.loadings, raw.uniquenesses).rmsr;
        const double after =
            fit_indices(model.sim, rot.loadings, raw.uniquenesses).rmsr;
        CHECK(std::fabs(before - after) < 1e-12);
    }
}

TEST_CASE("recovery property over random synthetic models") {
    auto gen = test_helpers::rng(55);
    std::uniform_int_distribution<std::size_t> n_dist(8, 24);
    for (int seed = 0; seed < 20; ++seed) {
        const std::size_t n = n_dist(gen);
        const int max_m = std::min<int>(4, static_cast<int>(n / 3));
        std::uniform_int_distribution<int> m_dist(1, max_m);
        const int m = m_dist(gen);
        const auto model = test_helpers::simple_structure_model(gen, n, m);
        const auto sol = fit_model(model.sim, m);
        std::string why;
        CHECK_MESSAGE(
            test_helpers::recovers_design(model, sol.loadings, 1e-2, &why),
            "n=", n, " m=", m, " seed=", seed, ": ", why);
        CHECK(sol.discrepancy < 1e-8);
    }
}

TEST_CASE("communalities respect the unit bound on well-posed inputs") {
    // Gram matrices with enough headroom (dim comparable to n) and true
    // factor models; degenerate low-dim Gram matrices are the Heywood case
    // covered below.
    auto gen = test_helpers::rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<std::size_t> n_dist(30, 50);
        const std::size_t n = n_dist(gen);
        const std::size_t dim = n / 2 + 10 * (trial % 3);
        std::vector<std::string> vocab;
        for (std::size_t i = 0; i < n; ++i)
            vocab.push_back("g" + std::to_string(i));
        const auto sim = similarity::similarity_matrix(
            test_helpers::make_space(
                vocab, test_helpers::random_matrix(gen, n, dim)),
            vocab);
        std::uniform_int_distribution<int> m_dist(1, 4);
        const int m = m_dist(gen);
        const auto sol = fit_model(sim, m);
        CHECK(sol.heywood_rows == 0);
        for (std::size_t i = 0; i < n; ++i) {
            double communality = 0.0;
            for (int k = 0; k < m; ++k)
                communality += sol.loadings(i, static_cast<std::size_t>(k)) *
                               sol.loadings(i, static_cast<std::size_t>(k));
            CHECK(communality <= 1.0 + 1e-6);
            CHECK(sol.uniquenesses[i] >= 0.001);
            CHECK(sol.uniquenesses[i] <= 1.0);
        }
    }
}

TEST_CASE("degenerate Gram input is flagged as a Heywood condition") {
    // 24 unit vectors in 3 dimensions: spuriously high cosines force some
    // uniquenesses onto the lower bound, and those rows may exceed unit
    // communality. The solution reports it instead of distorting the fit.
    auto gen = test_helpers::rng(60);
    const std::size_t n = 24;
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < n; ++i) vocab.push_back("d" + std::to_string(i));
    const auto sim = similarity::similarity_matrix(
        test_helpers::make_space(vocab, test_helpers::random_matrix(gen, n, 3)),
        vocab);
    const auto sol = fit_model(sim, 3);
    if (sol.heywood_rows > 0) {
        const double min_psi =
            *std::min_element(sol.uniquenesses.begin(), sol.uniquenesses.end());
        CHECK(min_psi == doctest::Approx(0.001));
    }
    // bounds hold regardless
    for (double psi : sol.uniquenesses) {
        CHECK(psi >= 0.001);
        CHECK(psi <= 1.0);
    }
}

TEST_CASE("rmsr does not increase across an m sweep (empirical)") {
    auto gen = test_helpers::rng(58);
    auto model = test_helpers::simple_structure_model(gen, 15, 3);
    // perturb the off-diagonals so every m leaves genuine misfit
    std::normal_distribution<double> noise(0.0, 0.02);
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = i + 1; j < 15; ++j) {
            const double e = noise(gen);
            model.sim.values(i, j) += e;
            model.sim.values(j, i) += e;
        }
    double previous = std::numeric_limits<double>::infinity();
    for (int m = 2; m <= 5; ++m) {
        const auto sol = fit_model(model.sim, m);
        CHECK(sol.rmsr <= previous + 1e-9);
        previous = sol.rmsr;
    }
    CHECK(previous > 1e-6);  // still above the optimizer's noise floor
}

TEST_CASE("fit_model is equivariant under label permutation") {
    auto gen = test_helpers::rng(56);
    const auto model = test_helpers::simple_structure_model(gen, 10, 2);
    const auto sol = fit_model(model.sim, 2);

    // permute rows/cols of the similarity matrix
    std::vector<std::size_t> perm(10);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    SimilarityMatrix shuffled;
    shuffled.values = Mat(10, 10);
    shuffled.labels.resize(10);
    for (std::size_t i = 0; i < 10; ++i) {
        shuffled.labels[i] = model.sim.labels[perm[i]];
        for (std::size_t j = 0; j < 10; ++j)
            shuffled.values(i, j) = model.sim.values(perm[i], perm[j]);
    }
    const auto sol2 = fit_model(shuffled, 2);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(std::fabs(std::fabs(sol2.loadings(i, k)) -
                            std::fabs(sol.loadings(perm[i], k))) < 1e-6);
}

TEST_CASE("loading_correlations diagonal and sign flips") {
    auto gen = test_helpers::rng(57);
    const auto model = test_helpers::simple_structure_model(gen, 8, 2);
    const auto sol = fit_model(model.sim, 2);

    std::vector<std::pair<std::string, std::string>> on;
    for (const auto& l : sol.labels) on.emplace_back(l, l);

    const auto self = loading_correlations(sol, sol, on);
    CHECK(self(0, 0) == doctest::Approx(1.0));
    CHECK(self(1, 1) == doctest::Approx(1.0));

    auto flipped = sol;
    for (std::size_t i = 0; i < 8; ++i) flipped.loadings(i, 0) *= -1.0;
    const auto anti = loading_correlations(sol, flipped, on);
    CHECK(anti(0, 0) == doctest::Approx(-1.0));

    CHECK_THROWS_AS(
        (void)loading_correlations(sol, sol, {{"v0", "v0"}, {"v1", "v1"}}),
        Error);

    auto constant = sol;
    for (std::size_t i = 0; i < 8; ++i) constant.loadings(i, 1) = 0.25;
    CHECK_THROWS_AS((void)loading_correlations(sol, constant, on), Error);
}

TEST_SUITE_END();
