#include "semfactor/factor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "semfactor/io_util.hpp"
#include "semfactor/kernels.hpp"
#include "semfactor/validation.hpp"

namespace semfactor::factor {

namespace {

constexpr double kPsiLower = 0.001;
constexpr double kPsiUpper = 1.0;

struct Evaluation {
    double full_objective = 0.0;  // ||S - diag(psi) - LL'||_F^2
    double discrepancy = 0.0;     // off-diagonal half-sum
    std::vector<double> gradient;
    linalg::Mat loadings;
};

linalg::Mat loadings_from_eigen(const linalg::EigenResult& eig, std::size_t n,
                                int m) {
    linalg::Mat loadings(n, static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double scale =
            std::sqrt(std::max(eig.values[static_cast<std::size_t>(k)], 0.0));
        for (std::size_t i = 0; i < n; ++i)
            loadings(i, static_cast<std::size_t>(k)) =
                eig.vectors(i, static_cast<std::size_t>(k)) * scale;
    }
    return loadings;
}

Evaluation evaluate(const similarity::SimilarityMatrix& sim,
                    const std::vector<double>& psi, int m) {
    const std::size_t n = sim.labels.size();
    const auto& k = kernels::active();

    linalg::Mat reduced = sim.values;
    for (std::size_t i = 0; i < n; ++i)
        reduced(i, i) = sim.values(i, i) - psi[i];

    const auto eig = linalg::sym_eigen(reduced);
    Evaluation ev;
    ev.loadings = loadings_from_eigen(eig, n, m);
    ev.gradient.resize(n);

    double full = 0.0;
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double model_ii =
            k.sumsq(ev.loadings.row(i), static_cast<std::size_t>(m));
        const double diag_res = reduced(i, i) - model_ii;
        full += diag_res * diag_res;
        ev.gradient[i] = -2.0 * diag_res;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r =
                reduced(i, j) - k.dot(ev.loadings.row(i), ev.loadings.row(j),
                                      static_cast<std::size_t>(m));
            off += r * r;
        }
    }
    ev.full_objective = full + 2.0 * off;
    ev.discrepancy = off;
    return ev;
}

std::vector<double> starting_psi(const similarity::SimilarityMatrix& sim) {
    const std::size_t n = sim.labels.size();
    std::vector<double> psi(n, 0.5);
    // psi_i = 1 - SMC_i = 1 / (S^-1)_ii when S is invertible.
    if (auto chol = linalg::cholesky(sim.values)) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> e(n, 0.0);
            e[i] = 1.0;
            linalg::cholesky_solve(*chol, e);
            if (e[i] > 0.0 && std::isfinite(e[i]))
                psi[i] = std::clamp(1.0 / e[i], kPsiLower, kPsiUpper);
        }
    }
    return psi;
}

}  // namespace

MinresResult minres_extract(const similarity::SimilarityMatrix& sim, int m,
                            const MinresOptions& options) {
    const std::size_t n = sim.labels.size();
    if (m < 1 || static_cast<std::size_t>(m) >= n)
        throw Error(ErrorCode::Args,
                    "minres_extract: factor count must satisfy 1 <= m <= n-1");

    std::vector<double> psi = starting_psi(sim);
    Evaluation ev = evaluate(sim, psi, m);

    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> history;
    constexpr std::size_t kMemory = 8;

    auto project = [](std::vector<double> x) {
        for (double& v : x) v = std::clamp(v, kPsiLower, kPsiUpper);
        return x;
    };
    auto projected_gradient_norm = [&](const std::vector<double>& x,
                                       const std::vector<double>& g) {
        double norm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const bool at_lower = x[i] <= kPsiLower + 1e-15 && g[i] > 0.0;
            const bool at_upper = x[i] >= kPsiUpper - 1e-15 && g[i] < 0.0;
            if (!at_lower && !at_upper) norm = std::max(norm, std::fabs(g[i]));
        }
        return norm;
    };

    MinresResult result;
    int iter = 0;
    bool converged = projected_gradient_norm(psi, ev.gradient) < 1e-12;

    while (!converged && iter < options.max_iter) {
        ++iter;
        // Two-loop recursion over the stored curvature pairs.
        std::vector<double> direction = ev.gradient;
        std::vector<double> alpha(history.size());
        for (std::size_t h = history.size(); h-- > 0;) {
            const auto& p = history[h];
            double a = 0.0;
            for (std::size_t i = 0; i < n; ++i) a += p.s[i] * direction[i];
            a *= p.rho;
            alpha[h] = a;
            for (std::size_t i = 0; i < n; ++i) direction[i] -= a * p.y[i];
        }
        if (!history.empty()) {
            const auto& last = history.back();
            double sy = 0.0, yy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sy += last.s[i] * last.y[i];
                yy += last.y[i] * last.y[i];
            }
            const double gamma = (yy > 0.0) ? sy / yy : 1.0;
            for (double& d : direction) d *= gamma;
        }
        for (std::size_t h = 0; h < history.size(); ++h) {
            const auto& p = history[h];
            double b = 0.0;
            for (std::size_t i = 0; i < n; ++i) b += p.y[i] * direction[i];
            b *= p.rho;
            for (std::size_t i = 0; i < n; ++i)
                direction[i] += (alpha[h] - b) * p.s[i];
        }
        for (double& d : direction) d = -d;

        double descent = 0.0;
        for (std::size_t i = 0; i < n; ++i) descent += direction[i] * ev.gradient[i];
        if (!(descent < 0.0)) {
            direction = ev.gradient;
            for (double& d : direction) d = -d;
        }

        // Backtracking line search along the box-projected path.
        double step = 1.0;
        bool accepted = false;
        std::vector<double> candidate;
        Evaluation cand_ev;
        for (int bt = 0; bt < 50; ++bt) {
            candidate.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                candidate[i] = psi[i] + step * direction[i];
            candidate = project(std::move(candidate));
            double step_dot_g = 0.0;
            double step_len = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = candidate[i] - psi[i];
                step_dot_g += d * ev.gradient[i];
                step_len = std::max(step_len, std::fabs(d));
            }
            if (step_len == 0.0) break;
            cand_ev = evaluate(sim, candidate, m);
            if (cand_ev.full_objective <=
                ev.full_objective + 1e-4 * step_dot_g) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // no step made progress; at a (possibly bound-constrained) optimum
            converged = projected_gradient_norm(psi, ev.gradient) < 1e-8;
            break;
        }

        Pair pair;
        pair.s.resize(n);
        pair.y.resize(n);
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pair.s[i] = candidate[i] - psi[i];
            pair.y[i] = cand_ev.gradient[i] - ev.gradient[i];
            sy += pair.s[i] * pair.y[i];
            ss += pair.s[i] * pair.s[i];
            yy += pair.y[i] * pair.y[i];
        }
        if (sy > 1e-12 * std::sqrt(ss * yy) && sy > 0.0) {
            pair.rho = 1.0 / sy;
            history.push_back(std::move(pair));
            if (history.size() > kMemory) history.pop_front();
        }

        const double improvement = ev.discrepancy - cand_ev.discrepancy;
        psi = std::move(candidate);
        ev = std::move(cand_ev);

        if (std::fabs(improvement) < options.tol ||
            projected_gradient_norm(psi, ev.gradient) < 1e-10) {
            converged = true;
        }
    }

    result.loadings = ev.loadings;
    result.uniquenesses = psi;
    result.discrepancy = ev.discrepancy;
    result.converged = converged;
    result.iterations = iter;
    return result;
}

double varimax_criterion(const linalg::Mat& loadings) {
    const std::size_t n = loadings.rows;
    const std::size_t m = loadings.cols;
    if (n == 0) return 0.0;
    double v = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        double s2 = 0.0, s4 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sq = loadings(i, k) * loadings(i, k);
            s2 += sq;
            s4 += sq * sq;
        }
        const double mean2 = s2 / static_cast<double>(n);
        v += s4 / static_cast<double>(n) - mean2 * mean2;
    }
    return v;
}

VarimaxResult varimax(const linalg::Mat& loadings,
                      const VarimaxOptions& options) {
    const std::size_t n = loadings.rows;
    const std::size_t m = loadings.cols;
    for (double v : loadings.a)
        if (!std::isfinite(v))
            throw Error(ErrorCode::Numeric, "varimax: non-finite loading");

    VarimaxResult result;
    if (m <= 1) {
        result.loadings = loadings;
        result.rotation = linalg::Mat::identity(m);
        result.criterion = 0.0;
        result.iterations = 0;
        return result;
    }

    linalg::Mat x = loadings;
    std::vector<double> row_scale(n, 1.0);
    if (options.kaiser_normalize) {
        for (std::size_t i = 0; i < n; ++i) {
            const double h2 =
                kernels::active().sumsq(x.row(i), m);
            if (h2 >= 1e-12) {
                row_scale[i] = std::sqrt(h2);
                for (std::size_t k = 0; k < m; ++k) x(i, k) /= row_scale[i];
            }
        }
    }

    linalg::Mat rotation = linalg::Mat::identity(m);
    double v_prev = varimax_criterion(x);
    int sweeps = 0;
    const double dn = static_cast<double>(n);

    while (sweeps < options.max_iter) {
        ++sweeps;
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double xp = x(i, p);
                    const double xq = x(i, q);
                    const double u = xp * xp - xq * xq;
                    const double w = 2.0 * xp * xq;
                    a += u;
                    b += w;
                    c += u * u - w * w;
                    d += 2.0 * u * w;
                }
                const double num = d - 2.0 * a * b / dn;
                const double den = c - (a * a - b * b) / dn;
                if (num == 0.0 && den == 0.0) continue;
                const double theta = 0.25 * std::atan2(num, den);
                if (std::fabs(theta) < 1e-14) continue;
                const double ct = std::cos(theta);
                const double st = std::sin(theta);
                for (std::size_t i = 0; i < n; ++i) {
                    const double xp = x(i, p);
                    const double xq = x(i, q);
                    x(i, p) = ct * xp + st * xq;
                    x(i, q) = -st * xp + ct * xq;
                }
                for (std::size_t i = 0; i < m; ++i) {
                    const double tp = rotation(i, p);
                    const double tq = rotation(i, q);
                    rotation(i, p) = ct * tp + st * tq;
                    rotation(i, q) = -st * tp + ct * tq;
                }
            }
        }
        const double v_new = varimax_criterion(x);
        if (v_new - v_prev <= options.tol * std::max(v_prev, 1e-300)) {
            v_prev = std::max(v_new, v_prev);
            break;
        }
        v_prev = v_new;
    }

    result.criterion = v_prev;
    if (options.kaiser_normalize)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < m; ++k) x(i, k) *= row_scale[i];
    result.loadings = std::move(x);
    result.rotation = std::move(rotation);
    result.iterations = sweeps;
    return result;
}

FitIndices fit_indices(const similarity::SimilarityMatrix& sim,
                       const linalg::Mat& loadings,
                       const std::vector<double>& uniquenesses,
                       std::optional<long long> pseudo_n) {
    const std::size_t n = sim.labels.size();
    const std::size_t m = loadings.cols;
    if (loadings.rows != n || uniquenesses.size() != n)
        throw Error(ErrorCode::Numeric, "fit_indices: shape mismatch");
    const auto& k = kernels::active();

    FitIndices out;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r =
                sim.values(i, j) - k.dot(loadings.row(i), loadings.row(j), m);
            acc += r * r;
        }
    const double pairs = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    out.rmsr = (pairs > 0.0) ? std::sqrt(acc / pairs) : 0.0;

    if (!pseudo_n) return out;

    linalg::Mat model(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double v = k.dot(loadings.row(i), loadings.row(j), m);
            if (i == j) v += uniquenesses[i];
            model(i, j) = v;
            model(j, i) = v;
        }
    }

    auto chol_model = linalg::cholesky(model);
    if (!chol_model) {
        out.chi_square_note = "model matrix is singular; chi-square omitted";
        return out;
    }
    auto chol_s = linalg::cholesky(sim.values);
    if (!chol_s) {
        out.chi_square_note =
            "similarity matrix is singular; chi-square omitted";
        return out;
    }

    // tr(S C^-1) via one solve per column of S.
    double trace = 0.0;
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = sim.values(i, j);
        linalg::cholesky_solve(*chol_model, col);
        trace += col[j];
    }

    const double f_ml = linalg::log_det_from_cholesky(*chol_model) -
                        linalg::log_det_from_cholesky(*chol_s) + trace -
                        static_cast<double>(n);
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    const double factor = static_cast<double>(*pseudo_n) - 1.0 -
                          (2.0 * nn + 5.0) / 6.0 - 2.0 * mm / 3.0;
    ChiSquare chi;
    chi.statistic = factor * f_ml;
    const long long nm = static_cast<long long>(n) - static_cast<long long>(m);
    chi.df = (nm * nm - static_cast<long long>(n) - static_cast<long long>(m)) / 2;
    out.chi_square = chi;
    return out;
}

namespace {

struct Canonicalization {
    linalg::Mat loadings;
    std::vector<int> order;
    std::vector<int> signs;
};

Canonicalization canonicalize_full(const linalg::Mat& loadings) {
    const std::size_t n = loadings.rows;
    const std::size_t m = loadings.cols;
    std::vector<double> ssq(m, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < n; ++i)
            ssq[k] += loadings(i, k) * loadings(i, k);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ssq[a] > ssq[b]; });

    Canonicalization out;
    out.loadings = linalg::Mat(n, m);
    out.order.resize(m);
    out.signs.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t src = order[k];
        out.order[k] = static_cast<int>(src);
        std::size_t best = 0;
        double best_abs = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = std::fabs(loadings(i, src));
            if (v > best_abs) {
                best_abs = v;
                best = i;
            }
        }
        const int sign = (loadings(best, src) < 0.0) ? -1 : 1;
        out.signs[k] = sign;
        for (std::size_t i = 0; i < n; ++i)
            out.loadings(i, k) = sign * loadings(i, src);
    }
    return out;
}

}  // namespace

linalg::Mat canonicalize(const linalg::Mat& loadings) {
    return canonicalize_full(loadings).loadings;
}

FactorSolution fit_model(const similarity::SimilarityMatrix& sim, int m,
                         const FactorOptions& options) {
    MinresResult extraction = minres_extract(sim, m, options.minres);
    VarimaxResult rotation = varimax(extraction.loadings, options.varimax);
    Canonicalization canon = canonicalize_full(rotation.loadings);
    FitIndices fit = fit_indices(sim, canon.loadings, extraction.uniquenesses,
                                 options.pseudo_n);

    FactorSolution solution;
    solution.labels = sim.labels;
    solution.m = m;
    solution.loadings = std::move(canon.loadings);
    solution.uniquenesses = std::move(extraction.uniquenesses);
    solution.rmsr = fit.rmsr;
    solution.discrepancy = extraction.discrepancy;
    solution.chi_square = fit.chi_square;
    solution.chi_square_note = fit.chi_square_note;
    solution.rotation_criterion = rotation.criterion;
    solution.converged = extraction.converged;
    solution.extraction_iterations = extraction.iterations;
    solution.rotation_iterations = rotation.iterations;
    solution.column_order = std::move(canon.order);
    solution.column_signs = std::move(canon.signs);
    solution.kaiser_normalized = options.varimax.kaiser_normalize;
    solution.column_ssq.assign(static_cast<std::size_t>(m), 0.0);
    for (std::size_t k = 0; k < static_cast<std::size_t>(m); ++k)
        for (std::size_t i = 0; i < solution.loadings.rows; ++i)
            solution.column_ssq[k] +=
                solution.loadings(i, k) * solution.loadings(i, k);
    for (std::size_t i = 0; i < solution.loadings.rows; ++i) {
        const double communality = kernels::active().sumsq(
            solution.loadings.row(i), static_cast<std::size_t>(m));
        if (communality > 1.0 + 1e-6) ++solution.heywood_rows;
    }
    return solution;
}

linalg::Mat loading_correlations(
    const FactorSolution& a, const FactorSolution& b,
    const std::vector<std::pair<std::string, std::string>>& on) {
    if (on.size() < 3)
        throw Error(ErrorCode::Numeric,
                    "loading_correlations: needs at least 3 shared labels");

    auto rows_of = [](const FactorSolution& s,
                      const std::vector<std::pair<std::string, std::string>>& pairs,
                      bool second) {
        std::vector<std::size_t> rows;
        rows.reserve(pairs.size());
        for (const auto& pr : pairs) {
            const std::string& label = second ? pr.second : pr.first;
            auto it = std::find(s.labels.begin(), s.labels.end(), label);
            if (it == s.labels.end())
                throw Error(ErrorCode::Numeric,
                            "loading_correlations: label '" + label +
                                "' not in solution");
            rows.push_back(static_cast<std::size_t>(it - s.labels.begin()));
        }
        return rows;
    };
    const auto rows_a = rows_of(a, on, false);
    const auto rows_b = rows_of(b, on, true);

    linalg::Mat out(static_cast<std::size_t>(a.m), static_cast<std::size_t>(b.m));
    std::vector<double> xa(on.size()), xb(on.size());
    for (int ka = 0; ka < a.m; ++ka) {
        for (std::size_t r = 0; r < on.size(); ++r)
            xa[r] = a.loadings(rows_a[r], static_cast<std::size_t>(ka));
        for (int kb = 0; kb < b.m; ++kb) {
            for (std::size_t r = 0; r < on.size(); ++r)
                xb[r] = b.loadings(rows_b[r], static_cast<std::size_t>(kb));
            out(static_cast<std::size_t>(ka), static_cast<std::size_t>(kb)) =
                validation::pearson(xa, xb);
        }
    }
    return out;
}

std::string loadings_csv(const FactorSolution& solution) {
    std::string out = "label";
    for (int k = 1; k <= solution.m; ++k) {
        out += ",f";
        out += std::to_string(k);
    }
    out += ",uniqueness\n";
    for (std::size_t i = 0; i < solution.labels.size(); ++i) {
        out += solution.labels[i];
        for (int k = 0; k < solution.m; ++k) {
            out += ',';
            out += format_sig9(solution.loadings(i, static_cast<std::size_t>(k)));
        }
        out += ',';
        out += format_sig9(solution.uniquenesses[i]);
        out += '\n';
    }
    return out;
}

}  // namespace semfactor::factor
