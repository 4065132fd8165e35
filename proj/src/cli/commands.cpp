#include "semfactor/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numeric>

#include <json.hpp>

#include "semfactor/alignment.hpp"
#include "semfactor/embedding.hpp"
#include "semfactor/factor.hpp"
#include "semfactor/fixtures.hpp"
#include "semfactor/io_util.hpp"
#include "semfactor/kernels.hpp"
#include "semfactor/similarity.hpp"
#include "semfactor/validation.hpp"

namespace semfactor::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

double jnum(double v) { return round_sig9(v); }

std::vector<int> factors_or_throw(const RunConfig& config) {
    if (config.factors.empty())
        throw Error(ErrorCode::Args, "at least one factor count is required");
    for (int m : config.factors)
        if (m < 1)
            throw Error(ErrorCode::Args, "factor counts must be >= 1");
    if (config.freq_covariate != "neglog" && config.freq_covariate != "rank")
        throw Error(ErrorCode::Args,
                    "freq-covariate must be 'neglog' or 'rank', got '" +
                        config.freq_covariate + "'");
    return config.factors;
}

embedding::ParseResult load_space(const RunConfig& config, bool second) {
    const std::string& raw = second ? config.vec_b : config.vec_a;
    if (raw.empty())
        throw Error(ErrorCode::Args, second
                        ? "missing --vec-b (second embedding path)"
                        : "missing --vec-a (embedding path)");
    embedding::ParseOptions opt;
    opt.keep_top = config.keep_top;
    opt.source_label = second ? config.label_b : config.label_a;
    return embedding::parse_vec_file(resolve_input_path(raw), opt);
}

embedding::ConceptSet load_concepts(const RunConfig& config) {
    if (config.concepts_path.empty()) return fixtures::occupations();
    return embedding::load_concept_list(resolve_input_path(config.concepts_path));
}

validation::ExternalScale load_scale(const RunConfig& config) {
    if (config.scale_path.empty()) return fixtures::isei_partial();
    return validation::load_scale_csv(resolve_input_path(config.scale_path), "");
}

factor::FactorOptions factor_options(const RunConfig& config) {
    factor::FactorOptions opt;
    opt.minres.tol = config.minres_tol;
    opt.minres.max_iter = config.minres_max_iter;
    opt.varimax.kaiser_normalize = config.kaiser;
    opt.varimax.tol = config.varimax_tol;
    opt.varimax.max_iter = config.varimax_max_iter;
    opt.pseudo_n = config.pseudo_n;
    return opt;
}

fs::path out_path(const RunConfig& config, const std::string& name) {
    return fs::path(config.out_dir) / name;
}

void emit(const json& summary) {
    std::printf("%s\n", summary.dump().c_str());
}

json vocab_json(const embedding::ParseResult& parsed) {
    return json{{"label", parsed.space.source_label()},
                {"count", parsed.space.size()},
                {"dim", parsed.space.dim()},
                {"skipped_malformed", parsed.stats.malformed_lines},
                {"skipped_duplicates", parsed.stats.duplicate_tokens}};
}

json resolution_json(const embedding::ConceptResolution& res) {
    json respelled = json::array();
    for (const auto& [label, token] : res.respelled)
        respelled.push_back(json{{"label", label}, {"token", token}});
    return json{{"found_count", res.found.size()},
                {"found", res.found},
                {"missing", res.missing},
                {"respelled", respelled}};
}

json fit_json(const factor::FactorSolution& sol) {
    json j{{"m", sol.m},
           {"rmsr", jnum(sol.rmsr)},
           {"discrepancy", jnum(sol.discrepancy)}};
    if (sol.chi_square) {
        j["chi_square"] = jnum(sol.chi_square->statistic);
        j["df"] = sol.chi_square->df;
    } else if (!sol.chi_square_note.empty()) {
        j["chi_square_note"] = sol.chi_square_note;
    }
    j["converged"] = sol.converged;
    j["iterations"] = json{{"extraction", sol.extraction_iterations},
                           {"rotation", sol.rotation_iterations}};
    j["rotation_criterion"] = jnum(sol.rotation_criterion);
    j["kaiser_normalized"] = sol.kaiser_normalized;
    if (sol.heywood_rows > 0) j["heywood_rows"] = sol.heywood_rows;
    json ssq = json::array();
    for (double v : sol.column_ssq) ssq.push_back(jnum(v));
    j["column_ssq"] = ssq;
    j["column_order"] = sol.column_order;
    j["column_signs"] = sol.column_signs;
    return j;
}

// Per-factor highest/lowest loading table, 15 rows a side.
std::string extremes_csv(const factor::FactorSolution& sol) {
    const std::size_t n = sol.labels.size();
    const std::size_t depth = std::min<std::size_t>(15, n);
    std::string out = "factor,position,high_label,high_loading,low_label,low_loading\n";
    std::vector<std::size_t> order(n);
    for (int k = 0; k < sol.m; ++k) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t col = static_cast<std::size_t>(k);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return sol.loadings(a, col) > sol.loadings(b, col);
                         });
        for (std::size_t r = 0; r < depth; ++r) {
            const std::size_t hi = order[r];
            const std::size_t lo = order[n - 1 - r];
            out += std::to_string(k + 1);
            out += ',';
            out += std::to_string(r + 1);
            out += ',';
            out += sol.labels[hi];
            out += ',';
            out += format_sig9(sol.loadings(hi, col));
            out += ',';
            out += sol.labels[lo];
            out += ',';
            out += format_sig9(sol.loadings(lo, col));
            out += '\n';
        }
    }
    return out;
}

void write_factor_files(const RunConfig& config, const std::string& label,
                        const factor::FactorSolution& sol) {
    const std::string stem = label + "_m" + std::to_string(sol.m);
    atomic_write_file(out_path(config, "loadings_" + stem + ".csv"),
                      factor::loadings_csv(sol));
    atomic_write_file(out_path(config, "fit_" + stem + ".json"),
                      fit_json(sol).dump(2) + "\n");
    atomic_write_file(out_path(config, "extremes_" + stem + ".csv"),
                      extremes_csv(sol));
}

json validation_json(const validation::ValidationReport& report,
                     const std::string& scale_name,
                     const RunConfig& config,
                     std::optional<double> alt_freq_r) {
    json pearsons = json::array();
    for (double r : report.pearson_per_factor) pearsons.push_back(jnum(r));
    json j{{"scale", scale_name},
           {"matched_count", report.matched_labels.size()},
           {"pearson_per_factor", pearsons},
           {"concordance_first_factor", jnum(report.concordance_first_factor)}};
    if (report.stability_frequency_r) {
        j["freq_covariate"] = config.freq_covariate;
        j["stability_frequency_r"] = jnum(*report.stability_frequency_r);
        const bool primary_neglog = config.freq_covariate == "neglog";
        j["stability_frequency_r_neglog"] =
            jnum(primary_neglog ? *report.stability_frequency_r
                                : alt_freq_r.value_or(0.0));
        j["stability_frequency_r_rank"] =
            jnum(primary_neglog ? alt_freq_r.value_or(0.0)
                                : *report.stability_frequency_r);
        j["stability_scale_r"] = jnum(*report.stability_scale_r);
        j["stability_scale_partial_r"] = jnum(*report.stability_scale_partial_r);
    }
    return j;
}

struct StabilityCovariates {
    std::map<std::string, double> stability;
    std::map<std::string, double> freq_neglog;
    std::map<std::string, double> freq_rank;
};

StabilityCovariates concept_covariates(
    const alignment::StabilityTable& table,
    const embedding::EmbeddingSpace& from_space) {
    StabilityCovariates cov;
    for (std::size_t i = 0; i < table.found.size(); ++i) {
        const std::string key = validation::match_key(table.found[i]);
        cov.stability[key] = table.stability[i];
        const auto rank = embedding::frequency_rank(from_space, table.found[i]);
        if (!rank) continue;
        cov.freq_neglog[key] = -std::log(static_cast<double>(*rank));
        cov.freq_rank[key] = static_cast<double>(*rank);
    }
    return cov;
}

// Runs build_report with the configured covariate and once more with the
// alternate transform so both correlations can be reported.
std::pair<validation::ValidationReport, std::optional<double>> validate_solution(
    const factor::FactorSolution& sol, const validation::ExternalScale& scale,
    const RunConfig& config, const StabilityCovariates* cov) {
    if (!cov)
        return {validation::build_report(sol, scale), std::nullopt};
    const bool neglog = config.freq_covariate == "neglog";
    const auto& primary = neglog ? cov->freq_neglog : cov->freq_rank;
    const auto& alt = neglog ? cov->freq_rank : cov->freq_neglog;
    auto report =
        validation::build_report(sol, scale, &cov->stability, &primary);
    std::optional<double> alt_r;
    if (report.stability_frequency_r) {
        auto alt_report =
            validation::build_report(sol, scale, &cov->stability, &alt);
        alt_r = alt_report.stability_frequency_r;
    }
    return {std::move(report), alt_r};
}

void write_validation_files(const RunConfig& config, const std::string& label,
                            int m, const validation::ValidationReport& report,
                            const json& vjson) {
    const std::string stem = label + "_m" + std::to_string(m);
    atomic_write_file(out_path(config, "validation_" + stem + ".json"),
                      vjson.dump(2) + "\n");
    atomic_write_file(out_path(config, "scatter_" + stem + ".csv"),
                      validation::scatter_csv(report));
}

std::string vocab_csv(const embedding::EmbeddingSpace& space) {
    std::string out = "token,rank\n";
    for (std::size_t i = 0; i < space.size(); ++i) {
        out += space.word(i);
        out += ',';
        out += std::to_string(space.rank_at(i));
        out += '\n';
    }
    return out;
}

json alignment_json(const alignment::AlignmentResult& aligned,
                    const alignment::StabilityTable& concepts) {
    json j{{"from", aligned.from_label},
           {"anchor", aligned.anchor_label},
           {"shared_count", aligned.shared_words.size()},
           {"mean_stability", jnum(aligned.mean_stability)},
           {"det_sign", aligned.map_det_sign}};
    json c{{"found_count", concepts.found.size()},
           {"missing", concepts.missing}};
    if (concepts.mean) c["mean_stability"] = jnum(*concepts.mean);
    j["concepts"] = c;
    return j;
}

std::string concept_stability_csv(const alignment::StabilityTable& table) {
    std::string out = "token,stability\n";
    for (std::size_t i = 0; i < table.found.size(); ++i) {
        out += table.found[i];
        out += ',';
        out += format_sig9(table.stability[i]);
        out += '\n';
    }
    return out;
}

}  // namespace

std::vector<int> parse_factor_list(const std::string& text) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find(',', start);
        if (pos == std::string::npos) pos = text.size();
        const std::string field = text.substr(start, pos - start);
        int value = 0;
        auto [ptr, ec] =
            std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc() || ptr != field.data() + field.size() ||
            value < 1)
            throw Error(ErrorCode::Args,
                        "bad factor count '" + field + "' in '" + text + "'");
        out.push_back(value);
        start = pos + 1;
        if (pos == text.size()) break;
    }
    if (out.empty())
        throw Error(ErrorCode::Args, "empty factor list");
    return out;
}

std::string resolve_input_path(const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute() || fs::exists(p)) return path;
    if (const char* base = std::getenv("SEMFACTOR_DATA_DIR")) {
        fs::path candidate = fs::path(base) / p;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;
}

void run_vocab(const RunConfig& config) {
    auto parsed = load_space(config, false);
    atomic_write_file(
        out_path(config, "vocab_" + parsed.space.source_label() + ".csv"),
        vocab_csv(parsed.space));

    json summary{{"command", "vocab"}};
    summary["vocab"] = vocab_json(parsed);
    json queries = json::array();
    for (const auto& token : config.tokens) {
        auto rank = embedding::frequency_rank(parsed.space, token);
        json q{{"token", token}};
        if (rank)
            q["rank"] = *rank;
        else
            q["rank"] = nullptr;
        queries.push_back(q);
    }
    if (!queries.empty()) summary["queries"] = queries;
    emit(summary);
}

void run_simmat(const RunConfig& config) {
    auto parsed = load_space(config, false);
    auto concepts = load_concepts(config);
    auto resolution = embedding::resolve_concepts(parsed.space, concepts);
    if (resolution.found.empty())
        throw Error(ErrorCode::Empty,
                    "no concepts resolved in '" + parsed.space.source_label() +
                        "'");

    auto matrix = similarity::similarity_matrix(parsed.space, resolution.found);
    const std::string label = parsed.space.source_label();
    atomic_write_file(out_path(config, "similarity_" + label + ".csv"),
                      similarity::to_csv(matrix));
    atomic_write_file(out_path(config, "resolution_" + label + ".json"),
                      resolution_json(resolution).dump(2) + "\n");

    json summary{{"command", "simmat"},
                 {"label", label},
                 {"n", matrix.labels.size()},
                 {"missing", resolution.missing}};
    if (!config.probes.empty()) {
        json probes = json::array();
        std::string csv = "concept,context,cosine\n";
        for (const auto& pair_text : config.probes) {
            const auto comma = pair_text.find(',');
            if (comma == std::string::npos || comma == 0 ||
                comma + 1 >= pair_text.size())
                throw Error(ErrorCode::Args, "probe must be 'concept,context': '" +
                                                 pair_text + "'");
            const std::string a = pair_text.substr(0, comma);
            const std::string b = pair_text.substr(comma + 1);
            const double value = similarity::probe(parsed.space, a, b);
            probes.push_back(
                json{{"concept", a}, {"context", b}, {"cosine", jnum(value)}});
            csv += a + ',' + b + ',' + format_sig9(value) + '\n';
        }
        atomic_write_file(out_path(config, "probes_" + label + ".csv"), csv);
        summary["probes"] = probes;
    }
    emit(summary);
}

void run_factor(const RunConfig& config) {
    const auto ms = factors_or_throw(config);
    auto parsed = load_space(config, false);
    auto concepts = load_concepts(config);
    auto resolution = embedding::resolve_concepts(parsed.space, concepts);
    if (resolution.found.empty())
        throw Error(ErrorCode::Empty, "no concepts resolved");
    auto matrix = similarity::similarity_matrix(parsed.space, resolution.found);
    const std::string label = parsed.space.source_label();

    json runs = json::array();
    for (int m : ms) {
        auto sol = factor::fit_model(matrix, m, factor_options(config));
        write_factor_files(config, label, sol);
        runs.push_back(json{{"m", m},
                            {"rmsr", jnum(sol.rmsr)},
                            {"discrepancy", jnum(sol.discrepancy)},
                            {"converged", sol.converged}});
    }
    emit(json{{"command", "factor"}, {"label", label}, {"runs", runs}});
}

void run_align(const RunConfig& config) {
    auto anchor = load_space(config, false);
    auto from = load_space(config, true);
    alignment::AlignOptions opt;
    opt.normalize_rows = config.normalize_rows;
    auto aligned = alignment::procrustes_align(from.space, anchor.space, opt);

    auto concepts = load_concepts(config);
    auto table = alignment::stability_subset(aligned, concepts.labels);

    atomic_write_file(out_path(config, "stability.csv"),
                      alignment::stability_csv(aligned));
    atomic_write_file(out_path(config, "concept_stability.csv"),
                      concept_stability_csv(table));
    const json ajson = alignment_json(aligned, table);
    atomic_write_file(out_path(config, "alignment.json"), ajson.dump(2) + "\n");

    json summary{{"command", "align"}};
    summary["alignment"] = ajson;
    emit(summary);
}

void run_validate(const RunConfig& config) {
    const auto ms = factors_or_throw(config);
    auto parsed = load_space(config, false);
    auto concepts = load_concepts(config);
    auto scale = load_scale(config);
    auto resolution = embedding::resolve_concepts(parsed.space, concepts);
    if (resolution.found.empty())
        throw Error(ErrorCode::Empty, "no concepts resolved");
    auto matrix = similarity::similarity_matrix(parsed.space, resolution.found);
    const std::string label = parsed.space.source_label();

    json runs = json::array();
    for (int m : ms) {
        auto sol = factor::fit_model(matrix, m, factor_options(config));
        auto [report, alt_r] = validate_solution(sol, scale, config, nullptr);
        json vjson = validation_json(report, scale.name, config, alt_r);
        vjson["m"] = m;
        write_validation_files(config, label, m, report, vjson);
        runs.push_back(vjson);
    }
    emit(json{{"command", "validate"}, {"label", label}, {"runs", runs}});
}

void run_report(const RunConfig& config) {
    const auto ms = factors_or_throw(config);
    const bool two = !config.vec_b.empty();
    auto concepts = load_concepts(config);
    auto scale = load_scale(config);

    json report{{"command", "report"}};
    report["config"] = json{{"keep_top", config.keep_top},
                            {"factors", ms},
                            {"kaiser", config.kaiser},
                            {"normalize_rows", config.normalize_rows},
                            {"freq_covariate", config.freq_covariate},
                            {"kernel", kernels::active().name}};

    struct Corpus {
        embedding::ParseResult parsed;
        embedding::ConceptResolution resolution;
        similarity::SimilarityMatrix matrix;
        std::vector<factor::FactorSolution> solutions;
    };
    std::vector<Corpus> corpora;
    for (int which = 0; which < (two ? 2 : 1); ++which) {
        Corpus c{load_space(config, which == 1), {}, {}, {}};
        c.resolution = embedding::resolve_concepts(c.parsed.space, concepts);
        if (c.resolution.found.empty())
            throw Error(ErrorCode::Empty,
                        "no concepts resolved in '" +
                            c.parsed.space.source_label() + "'");
        c.matrix =
            similarity::similarity_matrix(c.parsed.space, c.resolution.found);
        for (int m : ms)
            c.solutions.push_back(
                factor::fit_model(c.matrix, m, factor_options(config)));
        corpora.push_back(std::move(c));
    }
    if (two && corpora[0].parsed.space.source_label() ==
                   corpora[1].parsed.space.source_label())
        throw Error(ErrorCode::Args,
                    "labels must differ when two embeddings are given");

    // Alignment first so the from-corpus validation can use stability.
    std::optional<alignment::AlignmentResult> aligned;
    std::optional<alignment::StabilityTable> concept_stability;
    std::optional<StabilityCovariates> covariates;
    if (two) {
        alignment::AlignOptions opt;
        opt.normalize_rows = config.normalize_rows;
        aligned = alignment::procrustes_align(corpora[1].parsed.space,
                                              corpora[0].parsed.space, opt);
        concept_stability =
            alignment::stability_subset(*aligned, concepts.labels);
        covariates =
            concept_covariates(*concept_stability, corpora[1].parsed.space);
    }

    json corpora_json = json::array();
    for (std::size_t c = 0; c < corpora.size(); ++c) {
        const auto& corpus = corpora[c];
        const std::string label = corpus.parsed.space.source_label();
        atomic_write_file(out_path(config, "similarity_" + label + ".csv"),
                          similarity::to_csv(corpus.matrix));
        atomic_write_file(out_path(config, "resolution_" + label + ".json"),
                          resolution_json(corpus.resolution).dump(2) + "\n");

        json jcorpus{{"label", label}};
        jcorpus["vocab"] = vocab_json(corpus.parsed);
        jcorpus["concepts"] = resolution_json(corpus.resolution);
        json jfactors = json::array();
        for (const auto& sol : corpus.solutions) {
            write_factor_files(config, label, sol);
            json jf = fit_json(sol);
            const StabilityCovariates* cov =
                (c == 1 && covariates) ? &*covariates : nullptr;
            auto [vreport, alt_r] = validate_solution(sol, scale, config, cov);
            json vjson = validation_json(vreport, scale.name, config, alt_r);
            vjson["m"] = sol.m;
            write_validation_files(config, label, sol.m, vreport, vjson);
            jf["validation"] = vjson;
            jfactors.push_back(jf);
        }
        jcorpus["factors"] = jfactors;
        corpora_json.push_back(jcorpus);
    }
    report["corpora"] = corpora_json;

    if (two) {
        atomic_write_file(out_path(config, "stability.csv"),
                          alignment::stability_csv(*aligned));
        atomic_write_file(out_path(config, "concept_stability.csv"),
                          concept_stability_csv(*concept_stability));
        const json ajson = alignment_json(*aligned, *concept_stability);
        atomic_write_file(out_path(config, "alignment.json"),
                          ajson.dump(2) + "\n");
        report["alignment"] = ajson;

        // Cross-corpus loading correlations over shared resolved concepts.
        std::vector<std::pair<std::string, std::string>> on;
        for (const auto& la : corpora[0].matrix.labels) {
            const std::string key = validation::match_key(la);
            for (const auto& lb : corpora[1].matrix.labels)
                if (validation::match_key(lb) == key) {
                    on.emplace_back(la, lb);
                    break;
                }
        }
        if (on.size() >= 3) {
            json jcross = json::array();
            for (std::size_t s = 0; s < ms.size(); ++s) {
                const auto corr = factor::loading_correlations(
                    corpora[0].solutions[s], corpora[1].solutions[s], on);
                json matrix_json = json::array();
                for (std::size_t i = 0; i < corr.rows; ++i) {
                    json row = json::array();
                    for (std::size_t j = 0; j < corr.cols; ++j)
                        row.push_back(jnum(corr(i, j)));
                    matrix_json.push_back(row);
                }
                json diag = json::array();
                for (std::size_t i = 0;
                     i < std::min(corr.rows, corr.cols); ++i)
                    diag.push_back(jnum(corr(i, i)));
                jcross.push_back(json{{"m", ms[s]},
                                      {"shared_labels", on.size()},
                                      {"diagonal", diag},
                                      {"matrix", matrix_json}});
            }
            report["cross_corpus"] = jcross;
        } else {
            report["cross_corpus"] =
                json{{"note", "fewer than 3 shared resolved concepts"}};
        }
    }

    atomic_write_file(out_path(config, "report.json"), report.dump(2) + "\n");
    emit(json{{"command", "report"},
              {"out", config.out_dir},
              {"corpora", corpora.size()},
              {"factors", ms}});
}

}  // namespace semfactor::cli
