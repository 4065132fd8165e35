#include "semfactor/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "semfactor/io_util.hpp"
#include "semfactor/kernels.hpp"

namespace semfactor::similarity {

namespace {
double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }
}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw Error(ErrorCode::Numeric, "cosine: vector lengths differ");
    if (u.empty())
        throw Error(ErrorCode::Numeric, "cosine: empty vectors");
    double uv, uu, vv;
    kernels::active().dot3(u.data(), v.data(), u.size(), &uv, &uu, &vv);
    if (uu == 0.0)
        throw Error(ErrorCode::Numeric, "cosine: left vector has zero norm");
    if (vv == 0.0)
        throw Error(ErrorCode::Numeric, "cosine: right vector has zero norm");
    return clamp_unit(uv / (std::sqrt(uu) * std::sqrt(vv)));
}

SimilarityMatrix similarity_matrix(const embedding::EmbeddingSpace& space,
                                   const std::vector<std::string>& found) {
    if (found.empty())
        throw Error(ErrorCode::Empty, "similarity_matrix: no concepts given");
    const std::size_t n = found.size();
    const auto& k = kernels::active();

    std::vector<std::size_t> rows(n);
    std::vector<double> inv_norm(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = space.find(found[i]);
        if (!row)
            throw Error(ErrorCode::Empty, "similarity_matrix: label '" +
                                              found[i] +
                                              "' missing from space");
        rows[i] = *row;
        const double ss = k.sumsq(space.row(*row).data(), space.dim());
        if (ss == 0.0)
            throw Error(ErrorCode::Numeric, "similarity_matrix: '" + found[i] +
                                                "' has a zero vector");
        inv_norm[i] = 1.0 / std::sqrt(ss);
    }

    SimilarityMatrix out;
    out.labels = found;
    out.values = linalg::Mat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values(i, i) = 1.0;
        const double* ui = space.row(rows[i]).data();
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = k.dot(ui, space.row(rows[j]).data(), space.dim());
            // symmetric grouping keeps the value identical under label permutation
            const double c = clamp_unit(d * (inv_norm[i] * inv_norm[j]));
            out.values(i, j) = c;
            out.values(j, i) = c;
        }
    }
    return out;
}

double probe(const embedding::EmbeddingSpace& space, std::string_view concept_token,
             std::string_view context_word) {
    auto a = space.find(concept_token);
    if (!a)
        throw Error(ErrorCode::Empty, "probe: token '" +
                                          std::string(concept_token) +
                                          "' not in space");
    auto b = space.find(context_word);
    if (!b)
        throw Error(ErrorCode::Empty, "probe: token '" +
                                          std::string(context_word) +
                                          "' not in space");
    return cosine(space.row(*a), space.row(*b));
}

std::string to_csv(const SimilarityMatrix& matrix) {
    std::string out = "label";
    for (const auto& l : matrix.labels) {
        out += ',';
        out += l;
    }
    out += '\n';
    for (std::size_t i = 0; i < matrix.labels.size(); ++i) {
        out += matrix.labels[i];
        for (std::size_t j = 0; j < matrix.labels.size(); ++j) {
            out += ',';
            out += format_sig9(matrix.values(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

SimilarityMatrix from_csv(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t pos = text.find('\n', start);
        if (pos == std::string::npos) pos = text.size();
        if (pos > start) lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    if (lines.empty())
        throw Error(ErrorCode::Format, "similarity CSV: empty input");

    auto header = split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "label")
        throw Error(ErrorCode::Format,
                    "similarity CSV: expected 'label,...' header");
    SimilarityMatrix out;
    out.labels.assign(header.begin() + 1, header.end());
    const std::size_t n = out.labels.size();
    if (lines.size() != n + 1)
        throw Error(ErrorCode::Format, "similarity CSV: row count mismatch");
    out.values = linalg::Mat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        auto fields = split_csv_line(lines[i + 1]);
        if (fields.size() != n + 1 || fields[0] != out.labels[i])
            throw Error(ErrorCode::Format,
                        "similarity CSV: malformed row for label '" +
                            out.labels[i] + "'");
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            const auto& f = fields[j + 1];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw Error(ErrorCode::Format,
                            "similarity CSV: bad number '" + f + "'");
            out.values(i, j) = v;
        }
    }
    return out;
}

}  // namespace semfactor::similarity
