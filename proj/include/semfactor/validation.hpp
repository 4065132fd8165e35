#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semfactor::factor {
struct FactorSolution;
}

namespace semfactor::validation {

/// Sample Pearson correlation. Requires length >= 3 and nonzero variance on
/// both sides; result clamped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y);

/// Fraction of unordered index pairs ranked the same way by both vectors.
/// sign(a_i - a_j) must equal sign(b_i - b_j), so a pair tied in either
/// vector counts as concordant only when tied in both. Integer counting,
/// one division at the end.
double pairwise_concordance(std::span<const double> a, std::span<const double> b);

/// First-order partial correlation of x and y controlling for z:
/// (r_xy - r_xz r_yz) / sqrt((1 - r_xz^2)(1 - r_yz^2)).
double partial_correlation(std::span<const double> x, std::span<const double> y,
                           std::span<const double> z);

/// External reference scale (e.g. an occupational status index), label -> score.
struct ExternalScale {
    std::string name;
    std::vector<std::pair<std::string, double>> entries;  // unique labels

    std::optional<double> lookup(const std::string& label) const;
};

/// CSV with a header line, then `label,score` rows.
ExternalScale load_scale_csv(const std::filesystem::path& path,
                             const std::string& name);
ExternalScale parse_scale_csv(const std::string& text, const std::string& name);

struct ValidationReport {
    std::vector<std::string> matched_labels;
    std::vector<double> pearson_per_factor;
    double concordance_first_factor = 0.0;
    std::optional<double> stability_frequency_r;
    std::optional<double> stability_scale_r;
    std::optional<double> stability_scale_partial_r;
    // (label, first-factor loading, scale score) per matched label
    std::vector<std::tuple<std::string, double, double>> scatter;
};

/// Correlates every loading column with the scale over the matched labels,
/// computes first-factor pairwise concordance, and, when per-label stability
/// and a frequency covariate are supplied, the stability correlations and
/// the frequency-controlled partial correlation. Labels are joined with '.'
/// and '-' treated as the same separator; the stability and covariate maps
/// must be keyed by match_key(label).
ValidationReport build_report(
    const factor::FactorSolution& solution, const ExternalScale& scale,
    const std::map<std::string, double>* stability = nullptr,
    const std::map<std::string, double>* frequency_covariate = nullptr);

/// `label,osps,scale_score` rows for scatter plotting.
std::string scatter_csv(const ValidationReport& report);

/// Key under which labels are joined across sources ('.' folded to '-').
std::string match_key(const std::string& label);

}  // namespace semfactor::validation
