#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semfactor/embedding.hpp"
#include "semfactor/linalg.hpp"

namespace semfactor::alignment {

/// Orthogonal map of one embedding space onto another over the shared
/// vocabulary, with per-word stability scores (cosine of the aligned
/// from-vector with the anchor vector). Within-space cosines are untouched
/// by the map because it is a pure rotation/reflection.
struct AlignmentResult {
    std::vector<std::string> shared_words;  // ordered by from-space rank
    std::vector<std::int64_t> from_ranks;
    std::vector<std::int64_t> anchor_ranks;
    linalg::Mat map;  // dim x dim orthogonal W, applied as row-vector * W
    std::vector<double> stability;  // per shared word, in [-1, 1]
    double mean_stability = 0.0;
    int map_det_sign = 0;
    std::string from_label;
    std::string anchor_label;
};

struct AlignOptions {
    // Unit-normalize rows before accumulating the cross-covariance. Changes
    // W slightly, never the stability values (cosine is scale-free).
    bool normalize_rows = true;
};

/// W = U V^T from the SVD of X^T Y, minimizing ||X W - Y||_F over orthogonal
/// W, where X holds the from-space rows and Y the anchor rows over shared
/// words. Requires equal dims and at least 2 shared words; warns on stderr
/// when the shared vocabulary is smaller than the dimension.
AlignmentResult procrustes_align(const embedding::EmbeddingSpace& from_space,
                                 const embedding::EmbeddingSpace& anchor_space,
                                 const AlignOptions& options = {});

/// Double-precision Procrustes core: orthogonal W minimizing ||X W - Y||_F.
linalg::Mat procrustes_map(const linalg::Mat& x, const linalg::Mat& y);

struct StabilityTable {
    std::vector<std::string> found;    // resolved shared tokens, request order
    std::vector<double> stability;
    std::vector<std::string> missing;  // requested labels not in shared words
    std::optional<double> mean;        // absent when nothing was found
};

/// Stability restricted to a requested concept list. Labels are resolved
/// against the shared vocabulary under the usual candidate spellings.
StabilityTable stability_subset(const AlignmentResult& result,
                                const std::vector<std::string>& concepts);

/// CSV: token,from_rank,anchor_rank,stability.
std::string stability_csv(const AlignmentResult& result);

}  // namespace semfactor::alignment
