#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace semfactor::linalg {

// Row-major dense matrix of doubles. Sized for this problem domain
// (concept sets of a few hundred, embedding dims around 300).
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const {
        return a[i * cols + j];
    }
    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }

    static Mat identity(std::size_t n);
};

Mat matmul(const Mat& x, const Mat& y);
Mat transpose(const Mat& x);
double frobenius_norm(const Mat& x);
double max_abs(const Mat& x);

struct EigenResult {
    std::vector<double> values;  // descending
    Mat vectors;                 // column k = eigenvector of values[k]
    int sweeps = 0;
};

// Cyclic Jacobi for symmetric matrices. Off-diagonal convergence threshold
// 1e-12 * ||A||_F, hard cap 100 sweeps; throws on non-convergence instead
// of returning a partial result. Eigenvector signs are normalized so the
// entry of largest magnitude (first such index on ties) is nonnegative.
EigenResult sym_eigen(const Mat& symmetric);

struct SvdResult {
    Mat u;                        // rows x rows(? see below) orthonormal cols
    std::vector<double> sigma;    // descending, >= 0
    Mat v;                        // cols x cols orthogonal
    int sweeps = 0;
};

// One-sided Jacobi SVD, A = U diag(sigma) V^T, for rows >= cols. U is
// rows x cols with orthonormal columns; columns belonging to (near-)zero
// singular values are completed deterministically from coordinate vectors
// so U is always full column rank. Throws on non-convergence.
SvdResult svd(const Mat& a);

// Lower Cholesky factor, or nullopt when the matrix is not positive
// definite to working precision.
std::optional<Mat> cholesky(const Mat& symmetric);

// log(det(A)) via an existing Cholesky factor.
double log_det_from_cholesky(const Mat& chol_lower);

// Solves A x = b in place given the Cholesky factor of A.
void cholesky_solve(const Mat& chol_lower, std::vector<double>& b);

// Sign of det(Q) for a (near-)orthogonal matrix, via LU with partial
// pivoting. Returns +1 or -1.
int det_sign(const Mat& q);

}  // namespace semfactor::linalg
