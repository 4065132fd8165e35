#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semfactor/embedding.hpp"
#include "semfactor/linalg.hpp"

namespace semfactor::similarity {

/// Symmetric unit-diagonal cosine-similarity matrix over a labeled concept
/// list. Values are label-keyed in serialized form; entries lie in [-1, 1]
/// and the matrix is a Gram matrix of unit vectors, so it is positive
/// semidefinite up to rounding.
struct SimilarityMatrix {
    std::vector<std::string> labels;
    linalg::Mat values;  // labels.size() x labels.size()
};

/// cos(u, v) = dot / (|u| |v|), accumulated in double and clamped to [-1, 1].
/// Throws when either vector has zero norm, naming the offending side.
double cosine(std::span<const double> u, std::span<const double> v);

/// Builds the concept x concept matrix. Each pair is computed once and
/// mirrored, the diagonal is forced to exactly 1.
SimilarityMatrix similarity_matrix(const embedding::EmbeddingSpace& space,
                                   const std::vector<std::string>& found);

/// Cosine of two vocabulary tokens (the heuristic probe).
double probe(const embedding::EmbeddingSpace& space, std::string_view concept_token,
             std::string_view context_word);

/// CSV: header row `label,<l1>,...,<ln>`, then one full row per label,
/// 9 significant digits.
std::string to_csv(const SimilarityMatrix& matrix);
SimilarityMatrix from_csv(const std::string& text);

}  // namespace semfactor::similarity
