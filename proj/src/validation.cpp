#include "semfactor/validation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "semfactor/factor.hpp"
#include "semfactor/io_util.hpp"

namespace semfactor::validation {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw Error(ErrorCode::Numeric, "pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3)
        throw Error(ErrorCode::Numeric, "pearson: needs at least 3 points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error(ErrorCode::Numeric, "pearson: zero-variance input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pairwise_concordance(std::span<const double> a,
                            std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::Numeric, "pairwise_concordance: length mismatch");
    const std::size_t n = a.size();
    if (n < 2)
        throw Error(ErrorCode::Numeric,
                    "pairwise_concordance: needs at least 2 points");

    auto sign_of = [](double d) { return (d > 0.0) - (d < 0.0); };
    std::uint64_t concordant = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (sign_of(a[i] - a[j]) == sign_of(b[i] - b[j])) ++concordant;
    const std::uint64_t total =
        static_cast<std::uint64_t>(n) * (n - 1) / 2;
    return static_cast<double>(concordant) / static_cast<double>(total);
}

double partial_correlation(std::span<const double> x, std::span<const double> y,
                           std::span<const double> z) {
    if (x.size() != y.size() || x.size() != z.size())
        throw Error(ErrorCode::Numeric, "partial_correlation: length mismatch");
    if (x.size() < 4)
        throw Error(ErrorCode::Numeric,
                    "partial_correlation: needs at least 4 points");
    const double rxy = pearson(x, y);
    const double rxz = pearson(x, z);
    const double ryz = pearson(y, z);
    const double den = (1.0 - rxz * rxz) * (1.0 - ryz * ryz);
    if (den <= 0.0)
        throw Error(ErrorCode::Numeric,
                    "partial_correlation: covariate is collinear with an input");
    return std::clamp((rxy - rxz * ryz) / std::sqrt(den), -1.0, 1.0);
}

std::optional<double> ExternalScale::lookup(const std::string& label) const {
    const std::string key = match_key(label);
    for (const auto& [l, v] : entries)
        if (match_key(l) == key) return v;
    return std::nullopt;
}

std::string match_key(const std::string& label) {
    std::string key = label;
    for (char& c : key)
        if (c == '.') c = '-';
    return key;
}

ExternalScale parse_scale_csv(const std::string& text, const std::string& name) {
    ExternalScale scale;
    scale.name = name;
    std::istringstream in(text);
    std::string line;
    bool header_skipped = false;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_skipped) {
            header_skipped = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0)
            throw Error(ErrorCode::Format,
                        "scale CSV: expected 'label,score' but got '" + line +
                            "'");
        std::string label = line.substr(0, comma);
        const std::string field = line.substr(comma + 1);
        double score = 0.0;
        auto [ptr, ec] =
            std::from_chars(field.data(), field.data() + field.size(), score);
        if (ec != std::errc() || ptr != field.data() + field.size() ||
            !std::isfinite(score))
            throw Error(ErrorCode::Format,
                        "scale CSV: bad score '" + field + "' for label '" +
                            label + "'");
        if (!seen.insert(label).second)
            throw Error(ErrorCode::Format,
                        "scale CSV: duplicate label '" + label + "'");
        scale.entries.emplace_back(std::move(label), score);
    }
    if (scale.entries.empty())
        throw Error(ErrorCode::Empty, "scale CSV: no entries");
    return scale;
}

ExternalScale load_scale_csv(const std::filesystem::path& path,
                             const std::string& name) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open scale CSV " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scale_csv(buf.str(), name.empty() ? path.stem().string() : name);
}

ValidationReport build_report(const factor::FactorSolution& solution,
                              const ExternalScale& scale,
                              const std::map<std::string, double>* stability,
                              const std::map<std::string, double>* frequency) {
    std::unordered_map<std::string, double> scale_by_key;
    for (const auto& [label, score] : scale.entries)
        scale_by_key.emplace(match_key(label), score);

    ValidationReport report;
    std::vector<std::size_t> rows;
    std::vector<double> scale_scores;
    for (std::size_t i = 0; i < solution.labels.size(); ++i) {
        auto it = scale_by_key.find(match_key(solution.labels[i]));
        if (it == scale_by_key.end()) continue;
        report.matched_labels.push_back(solution.labels[i]);
        rows.push_back(i);
        scale_scores.push_back(it->second);
    }
    if (rows.size() < 3)
        throw Error(ErrorCode::Empty,
                    "build_report: fewer than 3 concepts matched scale '" +
                        scale.name + "'");

    std::vector<double> column(rows.size());
    for (int k = 0; k < solution.m; ++k) {
        for (std::size_t r = 0; r < rows.size(); ++r)
            column[r] = solution.loadings(rows[r], static_cast<std::size_t>(k));
        report.pearson_per_factor.push_back(pearson(column, scale_scores));
    }

    for (std::size_t r = 0; r < rows.size(); ++r) {
        column[r] = solution.loadings(rows[r], 0);
        report.scatter.emplace_back(report.matched_labels[r], column[r],
                                    scale_scores[r]);
    }
    report.concordance_first_factor = pairwise_concordance(column, scale_scores);

    if (stability && frequency) {
        std::vector<double> st, fr, sc;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const std::string key = match_key(report.matched_labels[r]);
            auto sit = stability->find(key);
            auto fit = frequency->find(key);
            if (sit == stability->end() || fit == frequency->end()) continue;
            st.push_back(sit->second);
            fr.push_back(fit->second);
            sc.push_back(scale_scores[r]);
        }
        if (st.size() >= 4) {
            report.stability_frequency_r = pearson(st, fr);
            report.stability_scale_r = pearson(st, sc);
            report.stability_scale_partial_r = partial_correlation(st, sc, fr);
        }
    }
    return report;
}

std::string scatter_csv(const ValidationReport& report) {
    std::string out = "label,osps,scale_score\n";
    for (const auto& [label, osps, score] : report.scatter) {
        out += label;
        out += ',';
        out += format_sig9(osps);
        out += ',';
        out += format_sig9(score);
        out += '\n';
    }
    return out;
}

}  // namespace semfactor::validation
