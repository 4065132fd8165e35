#include "semfactor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semfactor/io_util.hpp"
#include "semfactor/kernels.hpp"

namespace semfactor::linalg {

namespace {
constexpr int kMaxEigenSweeps = 100;
constexpr int kMaxSvdSweeps = 60;
}  // namespace

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat matmul(const Mat& x, const Mat& y) {
    if (x.cols != y.rows)
        throw Error(ErrorCode::Numeric, "matmul shape mismatch");
    const auto& k = kernels::active();
    Mat out(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double* dst = out.row(i);
        const double* xi = x.row(i);
        for (std::size_t p = 0; p < x.cols; ++p)
            k.axpy(xi[p], y.row(p), dst, y.cols);
    }
    return out;
}

Mat transpose(const Mat& x) {
    Mat out(x.cols, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
    return out;
}

double frobenius_norm(const Mat& x) {
    return std::sqrt(kernels::active().sumsq(x.a.data(), x.a.size()));
}

double max_abs(const Mat& x) {
    double m = 0.0;
    for (double v : x.a) m = std::max(m, std::fabs(v));
    return m;
}

namespace {

double off_diagonal_norm(const Mat& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = i + 1; j < a.cols; ++j)
            acc += a(i, j) * a(i, j);
    return std::sqrt(2.0 * acc);
}

// Flips each row of vt (an eigen/singular vector stored as a row) so its
// largest-magnitude entry is nonnegative; first index wins ties.
void normalize_vector_signs(Mat& vt) {
    for (std::size_t r = 0; r < vt.rows; ++r) {
        double* row = vt.row(r);
        std::size_t best = 0;
        double best_abs = -1.0;
        for (std::size_t j = 0; j < vt.cols; ++j) {
            const double v = std::fabs(row[j]);
            if (v > best_abs) {
                best_abs = v;
                best = j;
            }
        }
        if (row[best] < 0.0)
            for (std::size_t j = 0; j < vt.cols; ++j) row[j] = -row[j];
    }
}

}  // namespace

EigenResult sym_eigen(const Mat& input) {
    if (input.rows != input.cols)
        throw Error(ErrorCode::Numeric, "sym_eigen: matrix not square");
    const std::size_t n = input.rows;
    const auto& k = kernels::active();

    Mat a = input;
    Mat vt = Mat::identity(n);  // row r = eigenvector r (accumulated J^T)

    EigenResult result;
    if (n == 0) return result;

    const double norm = frobenius_norm(a);
    const double tol = 1e-12 * norm;
    const double skip = (norm > 0.0) ? tol / static_cast<double>(n * n) : 0.0;

    bool converged = (off_diagonal_norm(a) <= tol);
    int sweep = 0;
    while (!converged && sweep < kMaxEigenSweeps) {
        ++sweep;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) <= skip) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t =
                    (tau >= 0.0 ? 1.0 : -1.0) /
                    (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // A <- J^T A J with J the (p,q) plane rotation.
                k.rot(a.row(p), a.row(q), n, c, s);
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                k.rot(vt.row(p), vt.row(q), n, c, s);
            }
        }
        converged = (off_diagonal_norm(a) <= tol);
    }
    if (!converged)
        throw Error(ErrorCode::Numeric,
                    "sym_eigen: Jacobi sweeps did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a(x, x) > a(y, y);
    });

    normalize_vector_signs(vt);

    result.values.resize(n);
    result.vectors = Mat(n, n);
    for (std::size_t kcol = 0; kcol < n; ++kcol) {
        const std::size_t src = order[kcol];
        result.values[kcol] = a(src, src);
        for (std::size_t i = 0; i < n; ++i)
            result.vectors(i, kcol) = vt(src, i);
    }
    result.sweeps = sweep;
    return result;
}

SvdResult svd(const Mat& input) {
    if (input.rows < input.cols)
        throw Error(ErrorCode::Numeric, "svd: requires rows >= cols");
    const std::size_t m = input.rows;
    const std::size_t n = input.cols;
    const auto& k = kernels::active();

    // Work on A^T so the columns being orthogonalized are contiguous.
    Mat at = transpose(input);
    Mat vt = Mat::identity(n);

    SvdResult result;
    if (n == 0) {
        result.u = Mat(m, 0);
        result.v = Mat(0, 0);
        return result;
    }

    const double norm = frobenius_norm(at);
    const double eps = 1e-14;

    int sweep = 0;
    bool converged = (norm == 0.0);
    while (!converged && sweep < kMaxSvdSweeps) {
        ++sweep;
        std::size_t rotated = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double gamma, alpha, beta;
                k.dot3(at.row(i), at.row(j), m, &gamma, &alpha, &beta);
                if (std::fabs(gamma) <= eps * std::sqrt(alpha * beta) ||
                    gamma == 0.0)
                    continue;
                ++rotated;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t =
                    (zeta >= 0.0 ? 1.0 : -1.0) /
                    (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                // Columns (i, j) of A and V rotate identically.
                k.rot(at.row(i), at.row(j), m, c, s);
                k.rot(vt.row(i), vt.row(j), n, c, s);
            }
        }
        converged = (rotated == 0);
    }
    if (!converged)
        throw Error(ErrorCode::Numeric,
                    "svd: Jacobi sweeps did not converge");

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j)
        sigma[j] = std::sqrt(k.sumsq(at.row(j), m));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return sigma[x] > sigma[y];
    });

    result.sigma.resize(n);
    result.u = Mat(m, n);
    result.v = Mat(n, n);
    const double tiny = 1e-13 * std::max(norm, 1.0);
    std::vector<std::size_t> deficient;
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        result.sigma[col] = sigma[src];
        for (std::size_t i = 0; i < n; ++i)
            result.v(i, col) = vt(src, i);
        if (sigma[src] > tiny) {
            const double inv = 1.0 / sigma[src];
            for (std::size_t i = 0; i < m; ++i)
                result.u(i, col) = at(src, i) * inv;
        } else {
            deficient.push_back(col);
        }
    }

    // Complete U for zero singular values: Gram-Schmidt coordinate vectors
    // against the columns filled so far (unfilled columns are zero and
    // project to nothing). Deterministic by construction.
    std::size_t next_axis = 0;
    for (std::size_t col : deficient) {
        bool placed = false;
        while (next_axis < m && !placed) {
            std::vector<double> cand(m, 0.0);
            cand[next_axis++] = 1.0;
            for (std::size_t c = 0; c < n; ++c) {
                double proj = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    proj += cand[i] * result.u(i, c);
                for (std::size_t i = 0; i < m; ++i)
                    cand[i] -= proj * result.u(i, c);
            }
            const double nrm = std::sqrt(k.sumsq(cand.data(), m));
            if (nrm > 1e-8) {
                for (std::size_t i = 0; i < m; ++i)
                    result.u(i, col) = cand[i] / nrm;
                placed = true;
            }
        }
        if (!placed)
            throw Error(ErrorCode::Numeric,
                        "svd: failed to complete orthogonal basis");
    }

    result.sweeps = sweep;
    return result;
}

std::optional<Mat> cholesky(const Mat& s) {
    if (s.rows != s.cols) return std::nullopt;
    const std::size_t n = s.rows;
    const auto& k = kernels::active();
    Mat l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double acc = k.dot(l.row(i), l.row(j), j);
            if (i == j) {
                const double d = s(i, i) - acc;
                if (d <= 0.0 || !std::isfinite(d)) return std::nullopt;
                l(i, i) = std::sqrt(d);
            } else {
                l(i, j) = (s(i, j) - acc) / l(j, j);
            }
        }
    }
    return l;
}

double log_det_from_cholesky(const Mat& l) {
    double acc = 0.0;
    for (std::size_t i = 0; i < l.rows; ++i) acc += std::log(l(i, i));
    return 2.0 * acc;
}

void cholesky_solve(const Mat& l, std::vector<double>& b) {
    const std::size_t n = l.rows;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = b[i];
        for (std::size_t j = 0; j < i; ++j) acc -= l(i, j) * b[j];
        b[i] = acc / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= l(j, ii) * b[j];
        b[ii] = acc / l(ii, ii);
    }
}

int det_sign(const Mat& q) {
    if (q.rows != q.cols)
        throw Error(ErrorCode::Numeric, "det_sign: matrix not square");
    Mat lu = q;
    const std::size_t n = lu.rows;
    int sign = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(lu(r, col)) > std::fabs(lu(piv, col))) piv = r;
        if (lu(piv, col) == 0.0) return 0;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(lu(piv, j), lu(col, j));
            sign = -sign;
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = lu(r, col) / lu(col, col);
            for (std::size_t j = col; j < n; ++j) lu(r, j) -= f * lu(col, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (lu(i, i) < 0.0) sign = -sign;
    return sign;
}

}  // namespace semfactor::linalg
