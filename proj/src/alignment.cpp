#include "semfactor/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "semfactor/io_util.hpp"
#include "semfactor/kernels.hpp"

namespace semfactor::alignment {

namespace {

// W = U V^T for the SVD factors of the cross-covariance.
linalg::Mat mul_u_vt(const linalg::Mat& u, const linalg::Mat& v) {
    const auto& k = kernels::active();
    const linalg::Mat vt = linalg::transpose(v);
    linalg::Mat w(u.rows, v.rows);
    for (std::size_t i = 0; i < u.rows; ++i)
        for (std::size_t p = 0; p < u.cols; ++p)
            k.axpy(u(i, p), vt.row(p), w.row(i), vt.cols);
    return w;
}

}  // namespace

linalg::Mat procrustes_map(const linalg::Mat& x, const linalg::Mat& y) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw Error(ErrorCode::Numeric, "procrustes_map: shape mismatch");
    const std::size_t dim = x.cols;
    const auto& k = kernels::active();

    // M = X^T Y accumulated row by row.
    linalg::Mat m(dim, dim);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        const double* yr = y.row(r);
        for (std::size_t i = 0; i < dim; ++i)
            k.axpy(xr[i], yr, m.row(i), dim);
    }

    const auto decomposition = linalg::svd(m);
    return mul_u_vt(decomposition.u, decomposition.v);
}

AlignmentResult procrustes_align(const embedding::EmbeddingSpace& from_space,
                                 const embedding::EmbeddingSpace& anchor_space,
                                 const AlignOptions& options) {
    if (from_space.dim() != anchor_space.dim())
        throw Error(ErrorCode::Numeric,
                    "procrustes_align: dimension mismatch (" +
                        std::to_string(from_space.dim()) + " vs " +
                        std::to_string(anchor_space.dim()) + ")");
    const std::size_t dim = from_space.dim();
    const auto& k = kernels::active();

    AlignmentResult result;
    result.from_label = from_space.source_label();
    result.anchor_label = anchor_space.source_label();

    // Shared vocabulary in from-space (= rank) order.
    std::vector<std::size_t> from_rows, anchor_rows;
    for (std::size_t i = 0; i < from_space.size(); ++i) {
        auto other = anchor_space.find(from_space.word(i));
        if (!other) continue;
        from_rows.push_back(i);
        anchor_rows.push_back(*other);
        result.shared_words.push_back(from_space.word(i));
        result.from_ranks.push_back(from_space.rank_at(i));
        result.anchor_ranks.push_back(anchor_space.rank_at(*other));
    }
    const std::size_t shared = result.shared_words.size();
    if (shared < 2)
        throw Error(ErrorCode::Empty,
                    "procrustes_align: fewer than 2 shared words between '" +
                        result.from_label + "' and '" + result.anchor_label +
                        "'");
    if (shared < dim)
        std::fprintf(stderr,
                     "warning: only %zu shared words for a %zu-dimensional "
                     "alignment; the map is underdetermined\n",
                     shared, dim);

    // Cross-covariance over (optionally unit-normalized) shared rows.
    linalg::Mat m(dim, dim);
    std::vector<double> xr(dim), yr(dim);
    for (std::size_t r = 0; r < shared; ++r) {
        const auto xs = from_space.row(from_rows[r]);
        const auto ys = anchor_space.row(anchor_rows[r]);
        std::copy(xs.begin(), xs.end(), xr.begin());
        std::copy(ys.begin(), ys.end(), yr.begin());
        if (options.normalize_rows) {
            const double nx = std::sqrt(k.sumsq(xr.data(), dim));
            const double ny = std::sqrt(k.sumsq(yr.data(), dim));
            if (nx > 0.0)
                for (double& v : xr) v /= nx;
            if (ny > 0.0)
                for (double& v : yr) v /= ny;
        }
        for (std::size_t i = 0; i < dim; ++i)
            k.axpy(xr[i], yr.data(), m.row(i), dim);
    }

    const auto decomposition = linalg::svd(m);
    result.map = mul_u_vt(decomposition.u, decomposition.v);
    result.map_det_sign = linalg::det_sign(result.map);

    // Per-word stability: cosine of (x W) with y.
    result.stability.resize(shared);
    std::vector<double> aligned(dim);
    double mean = 0.0;
    for (std::size_t r = 0; r < shared; ++r) {
        const auto xs = from_space.row(from_rows[r]);
        const auto ys = anchor_space.row(anchor_rows[r]);
        std::fill(aligned.begin(), aligned.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            k.axpy(xs[i], result.map.row(i), aligned.data(), dim);
        double zy, zz, yy;
        std::copy(ys.begin(), ys.end(), yr.begin());
        k.dot3(aligned.data(), yr.data(), dim, &zy, &zz, &yy);
        if (zz == 0.0 || yy == 0.0)
            throw Error(ErrorCode::Numeric,
                        "procrustes_align: zero vector for shared word '" +
                            result.shared_words[r] + "'");
        result.stability[r] =
            std::clamp(zy / (std::sqrt(zz) * std::sqrt(yy)), -1.0, 1.0);
        mean += result.stability[r];
    }
    result.mean_stability = mean / static_cast<double>(shared);
    return result;
}

StabilityTable stability_subset(const AlignmentResult& result,
                                const std::vector<std::string>& concepts) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(result.shared_words.size() * 2);
    for (std::size_t i = 0; i < result.shared_words.size(); ++i)
        index.emplace(result.shared_words[i], i);

    StabilityTable table;
    double sum = 0.0;
    for (const auto& label : concepts) {
        bool hit = false;
        for (const auto& cand : embedding::candidate_spellings(label)) {
            auto it = index.find(cand);
            if (it != index.end()) {
                table.found.push_back(cand);
                table.stability.push_back(result.stability[it->second]);
                sum += result.stability[it->second];
                hit = true;
                break;
            }
        }
        if (!hit) table.missing.push_back(label);
    }
    if (!table.found.empty())
        table.mean = sum / static_cast<double>(table.found.size());
    return table;
}

std::string stability_csv(const AlignmentResult& result) {
    std::string out = "token,from_rank,anchor_rank,stability\n";
    for (std::size_t i = 0; i < result.shared_words.size(); ++i) {
        out += result.shared_words[i];
        out += ',';
        out += std::to_string(result.from_ranks[i]);
        out += ',';
        out += std::to_string(result.anchor_ranks[i]);
        out += ',';
        out += format_sig9(result.stability[i]);
        out += '\n';
    }
    return out;
}

}  // namespace semfactor::alignment
