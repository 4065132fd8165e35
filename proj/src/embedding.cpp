#include "semfactor/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "semfactor/io_util.hpp"

namespace semfactor::embedding {

EmbeddingSpace::EmbeddingSpace(std::vector<std::string> words,
                               std::vector<std::int64_t> ranks,
                               std::vector<double> matrix, std::size_t dim,
                               std::string source_label)
    : words_(std::move(words)),
      ranks_(std::move(ranks)),
      matrix_(std::move(matrix)),
      dim_(dim),
      source_label_(std::move(source_label)) {
    index_.reserve(words_.size() * 2);
    for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

std::optional<std::size_t> EmbeddingSpace::find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

namespace {

// Splits on single spaces; empty fields (from doubled or trailing spaces)
// make the line malformed rather than being silently merged.
bool parse_vector_line(const std::string& line, std::size_t dim,
                       std::string& token, std::vector<double>& values) {
    values.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    const char* sep = static_cast<const char*>(memchr(p, ' ', line.size()));
    if (!sep || sep == p) return false;
    token.assign(p, sep);
    p = sep + 1;
    while (p < end) {
        const char* next = static_cast<const char*>(memchr(p, ' ', end - p));
        const char* field_end = next ? next : end;
        if (field_end == p) return false;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(p, field_end, v);
        if (ec != std::errc() || ptr != field_end || !std::isfinite(v))
            return false;
        values.push_back(v);
        p = next ? next + 1 : end;
        if (values.size() > dim) return false;
    }
    return values.size() == dim;
}

}  // namespace

ParseResult parse_vec_file(const std::filesystem::path& path,
                           const ParseOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open vector file " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::Format, "empty vector file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::uint64_t header_count = 0;
    std::uint64_t header_dim = 0;
    {
        const char* p = line.data();
        const char* end = p + line.size();
        auto r1 = std::from_chars(p, end, header_count);
        if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != ' ')
            throw Error(ErrorCode::Format,
                        "malformed header in " + path.string() +
                            " (expected 'count dim')");
        auto r2 = std::from_chars(r1.ptr + 1, end, header_dim);
        if (r2.ec != std::errc() || r2.ptr != end || header_count == 0 ||
            header_dim == 0)
            throw Error(ErrorCode::Format,
                        "malformed header in " + path.string() +
                            " (expected 'count dim')");
    }
    // The header count is advisory; the actual line count governs.
    const std::size_t dim = static_cast<std::size_t>(header_dim);
    const std::size_t keep_top =
        options.keep_top.value_or(std::numeric_limits<std::size_t>::max());
    if (options.keep_top && *options.keep_top == 0)
        throw Error(ErrorCode::Args, "keep_top must be positive");

    std::vector<std::string> words;
    std::vector<std::int64_t> ranks;
    std::vector<double> matrix;
    std::unordered_set<std::string> seen;
    ParseStats stats;

    std::string token;
    std::vector<double> values;
    values.reserve(dim);
    std::int64_t rank = 0;  // counts accepted (well-formed, first-seen) entries

    while (static_cast<std::size_t>(rank) < keep_top && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            ++stats.malformed_lines;
            continue;
        }
        if (!parse_vector_line(line, dim, token, values)) {
            ++stats.malformed_lines;
            continue;
        }
        if (!seen.insert(token).second) {
            ++stats.duplicate_tokens;
            continue;
        }
        ++rank;
        if (options.keep_list && !options.keep_list->count(token)) continue;
        words.push_back(token);
        ranks.push_back(rank);
        matrix.insert(matrix.end(), values.begin(), values.end());
    }

    if (words.empty())
        throw Error(ErrorCode::Empty,
                    "no vocabulary entries retained from " + path.string());

    std::string label = options.source_label.empty()
                            ? path.stem().string()
                            : options.source_label;
    return ParseResult{
        EmbeddingSpace(std::move(words), std::move(ranks), std::move(matrix),
                       dim, std::move(label)),
        stats};
}

std::string to_vec_text(const EmbeddingSpace& space) {
    std::string out;
    out.reserve(space.size() * (space.dim() * 10 + 16));
    out += std::to_string(space.size());
    out += ' ';
    out += std::to_string(space.dim());
    out += '\n';
    for (std::size_t i = 0; i < space.size(); ++i) {
        out += space.word(i);
        for (double v : space.row(i)) {
            out += ' ';
            out += format_shortest(v);
        }
        out += '\n';
    }
    return out;
}

void write_vec_file(const EmbeddingSpace& space,
                    const std::filesystem::path& path) {
    atomic_write_file(path, to_vec_text(space));
}

std::optional<std::int64_t> frequency_rank(const EmbeddingSpace& space,
                                           std::string_view token) {
    auto row = space.find(token);
    if (!row) return std::nullopt;
    return space.rank_at(*row);
}

ConceptSet load_concept_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open concept list " + path.string());
    ConceptSet set;
    set.provenance = path.string();
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t");
        std::string label = line.substr(first, last - first + 1);
        if (!seen.insert(label).second)
            throw Error(ErrorCode::Format,
                        "duplicate concept label '" + label + "' in " +
                            path.string());
        set.labels.push_back(std::move(label));
    }
    if (set.labels.empty())
        throw Error(ErrorCode::Empty, "concept list " + path.string() +
                                          " contains no labels");
    return set;
}

std::vector<std::string> candidate_spellings(const std::string& label) {
    auto with = [&](char sep) {
        std::string s = label;
        for (char& c : s)
            if (c == '-' || c == '.') c = sep;
        return s;
    };
    std::vector<std::string> out{label};
    for (std::string cand : {with('-'), with('.')})
        if (std::find(out.begin(), out.end(), cand) == out.end())
            out.push_back(std::move(cand));
    return out;
}

ConceptResolution resolve_concepts(const EmbeddingSpace& space,
                                   const ConceptSet& concepts) {
    ConceptResolution res;
    for (const auto& label : concepts.labels) {
        bool hit = false;
        for (const auto& cand : candidate_spellings(label)) {
            if (space.contains(cand)) {
                res.found.push_back(cand);
                if (cand != label) res.respelled.emplace_back(label, cand);
                hit = true;
                break;
            }
        }
        if (!hit) res.missing.push_back(label);
    }
    return res;
}

}  // namespace semfactor::embedding
