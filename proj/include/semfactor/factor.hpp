#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semfactor/linalg.hpp"
#include "semfactor/similarity.hpp"

namespace semfactor::factor {

struct MinresOptions {
    double tol = 1e-9;
    int max_iter = 1000;
};

struct MinresResult {
    linalg::Mat loadings;               // n x m, unrotated
    std::vector<double> uniquenesses;   // psi, in [0.001, 1]
    double discrepancy = 0.0;           // sum_{i<j} (s_ij - (LL')_ij)^2
    bool converged = false;
    int iterations = 0;
};

/// Minimum-residual extraction. Minimizes the squared residual between the
/// similarity matrix and the rank-m model LL' + diag(psi) over psi in
/// [0.001, 1]; L is rebuilt from the top-m eigenpairs of S - diag(psi) at
/// every evaluation (negative retained eigenvalues clamped to zero).
/// Optimizer: box-projected L-BFGS with the analytic gradient
/// d/dpsi_i ||S - diag(psi) - LL'||_F^2 = -2 (S - diag(psi) - LL')_ii,
/// started from psi_i = 1 - SMC_i when S is invertible, else 0.5.
MinresResult minres_extract(const similarity::SimilarityMatrix& sim, int m,
                            const MinresOptions& options = {});

struct VarimaxOptions {
    bool kaiser_normalize = true;
    double tol = 1e-10;
    int max_iter = 1000;
};

struct VarimaxResult {
    linalg::Mat loadings;  // rotated = input * rotation
    linalg::Mat rotation;  // m x m orthogonal
    double criterion = 0.0;
    int iterations = 0;  // sweeps over all column pairs
};

/// Pairwise (Kaiser) varimax. criterion is
///   V = sum_k [ mean_i(l_ik^4) - (mean_i l_ik^2)^2 ]
/// evaluated on the working loadings: row-normalized by sqrt(communality)
/// when kaiser_normalize is set (rows with communality < 1e-12 pass through
/// unnormalized), raw otherwise. V never decreases across sweeps. For m = 1
/// the input is returned unchanged with rotation [1] and criterion 0.
VarimaxResult varimax(const linalg::Mat& loadings,
                      const VarimaxOptions& options = {});

/// Raw varimax criterion of a loading matrix (helper shared with tests).
double varimax_criterion(const linalg::Mat& loadings);

struct ChiSquare {
    double statistic = 0.0;
    long long df = 0;
};

struct FitIndices {
    double rmsr = 0.0;
    std::optional<ChiSquare> chi_square;
    std::string chi_square_note;  // why chi-square is absent, when it is
};

/// rmsr = sqrt( sum_{i<j} (s_ij - (LL')_ij)^2 / (n(n-1)/2) ).
/// The chi-square block needs a pseudo sample size (a similarity matrix has
/// no observation count): statistic = (N - 1 - (2n+5)/6 - 2m/3) * f_ML with
/// f_ML = ln det(C) - ln det(S) + tr(S C^-1) - n, C = LL' + diag(psi),
/// df = ((n-m)^2 - n - m)/2. Omitted with a note when C or S is singular.
FitIndices fit_indices(const similarity::SimilarityMatrix& sim,
                       const linalg::Mat& loadings,
                       const std::vector<double>& uniquenesses,
                       std::optional<long long> pseudo_n = std::nullopt);

/// Orders columns by decreasing sum of squares and flips each column so its
/// largest-magnitude entry (first index on ties) is nonnegative. Idempotent;
/// leaves LL' unchanged.
linalg::Mat canonicalize(const linalg::Mat& loadings);

struct FactorOptions {
    MinresOptions minres;
    VarimaxOptions varimax;
    std::optional<long long> pseudo_n;
};

/// Extraction + rotation + canonicalization + fit for one factor count.
/// The first canonical column is the scale of record for validation.
struct FactorSolution {
    std::vector<std::string> labels;
    int m = 0;
    linalg::Mat loadings;  // n x m, rotated and canonicalized
    std::vector<double> uniquenesses;
    double rmsr = 0.0;
    double discrepancy = 0.0;
    std::optional<ChiSquare> chi_square;
    std::string chi_square_note;
    double rotation_criterion = 0.0;
    bool converged = false;
    int extraction_iterations = 0;
    int rotation_iterations = 0;
    std::vector<double> column_ssq;      // after canonicalization
    std::vector<int> column_order;       // canonical column k came from this rotated column
    std::vector<int> column_signs;       // +1 / -1 flip applied per canonical column
    bool kaiser_normalized = true;
    // rows whose communality exceeds 1 + 1e-6: a Heywood condition, possible
    // when a uniqueness is pinned at its lower bound on degenerate input
    int heywood_rows = 0;
};

FactorSolution fit_model(const similarity::SimilarityMatrix& sim, int m,
                         const FactorOptions& options = {});

/// Pearson correlations between loading columns of two solutions over
/// label-matched rows. on[i] = (label in a, label in b) pairs; needs at
/// least 3 shared labels.
linalg::Mat loading_correlations(
    const FactorSolution& a, const FactorSolution& b,
    const std::vector<std::pair<std::string, std::string>>& on);

/// CSV: label,f1,...,fm,uniqueness (9 significant digits).
std::string loadings_csv(const FactorSolution& solution);

}  // namespace semfactor::factor
