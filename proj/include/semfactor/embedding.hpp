#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace semfactor::embedding {

/// In-memory slice of a pre-trained vector space. Immutable once built and
/// safe to share read-only across threads. Words keep the vocabulary rank
/// they had in the source file (rank 1 = first data line), so ranks stay
/// meaningful even for spaces built with keep_top / keep_list filters.
class EmbeddingSpace {
public:
    EmbeddingSpace(std::vector<std::string> words, std::vector<std::int64_t> ranks,
                   std::vector<double> matrix, std::size_t dim,
                   std::string source_label);

    std::size_t size() const { return words_.size(); }
    std::size_t dim() const { return dim_; }
    const std::string& source_label() const { return source_label_; }

    const std::string& word(std::size_t row) const { return words_[row]; }
    std::int64_t rank_at(std::size_t row) const { return ranks_[row]; }
    std::span<const double> row(std::size_t row) const {
        return {matrix_.data() + row * dim_, dim_};
    }

    std::optional<std::size_t> find(std::string_view token) const;
    bool contains(std::string_view token) const { return find(token).has_value(); }

    const std::vector<std::string>& words() const { return words_; }

private:
    std::vector<std::string> words_;
    std::vector<std::int64_t> ranks_;
    std::vector<double> matrix_;  // row-major, size() x dim()
    std::size_t dim_;
    std::string source_label_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct ParseOptions {
    std::optional<std::size_t> keep_top;
    std::optional<std::unordered_set<std::string>> keep_list;
    std::string source_label;
};

struct ParseStats {
    std::uint64_t malformed_lines = 0;   // wrong field count, bad number, wrong dim
    std::uint64_t duplicate_tokens = 0;  // token already seen; later line skipped
    std::uint64_t total_skipped() const { return malformed_lines + duplicate_tokens; }
};

struct ParseResult {
    EmbeddingSpace space;
    ParseStats stats;
};

/// Streams a fasttext-style text `.vec` file (header `count dim`, then one
/// `token v1 ... v_dim` line per word). Keeps the first keep_top well-formed
/// entries (all of them when absent), intersected with keep_list when given;
/// memory stays proportional to what is retained. Malformed lines and
/// duplicate tokens are counted and skipped. Throws when the file is
/// unreadable, the header is malformed, or nothing is retained.
ParseResult parse_vec_file(const std::filesystem::path& path,
                           const ParseOptions& options = {});

/// Serializes back to `.vec` text; vector entries are written with the
/// shortest decimal that reparses to the identical double.
void write_vec_file(const EmbeddingSpace& space,
                    const std::filesystem::path& path);

std::string to_vec_text(const EmbeddingSpace& space);

/// 1-based rank of token in the source vocabulary, or nullopt when absent.
std::optional<std::int64_t> frequency_rank(const EmbeddingSpace& space,
                                           std::string_view token);

struct ConceptSet {
    std::vector<std::string> labels;  // unique, non-empty
    std::string provenance;
};

/// One concept label per line, `#` comments and blank lines skipped.
ConceptSet load_concept_list(const std::filesystem::path& path);

/// Lookup candidates for a concept label: verbatim, then hyphenated, then
/// period-joined (compound occupations are printed inconsistently across
/// sources). Duplicates removed, order preserved.
std::vector<std::string> candidate_spellings(const std::string& label);

struct ConceptResolution {
    std::vector<std::string> found;    // resolved vocabulary tokens, in concept order
    std::vector<std::string> missing;  // concept labels with no candidate present
    // (concept label, resolved token) for every hit under a non-verbatim spelling
    std::vector<std::pair<std::string, std::string>> respelled;
};

/// Partitions concepts into those resolvable in the space (under the
/// candidate spellings, first hit wins) and those missing; order preserved.
ConceptResolution resolve_concepts(const EmbeddingSpace& space,
                                   const ConceptSet& concepts);

}  // namespace semfactor::embedding
