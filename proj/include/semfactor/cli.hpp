#pragma once

#include <optional>
#include <string>
#include <vector>

namespace semfactor::cli {

/// One flat bag of settings shared by every subcommand; flags map onto the
/// same names in the key=value config file, with flags taking precedence.
struct RunConfig {
    std::string vec_a;  // primary / anchor embedding
    std::string vec_b;  // optional second embedding, aligned onto vec_a
    std::string label_a = "a";
    std::string label_b = "b";
    std::size_t keep_top = 200000;
    std::string concepts_path;  // empty -> bundled occupation list
    std::string scale_path;     // empty -> bundled partial ISEI fixture
    std::vector<int> factors = {3};
    std::optional<long long> pseudo_n;
    bool kaiser = true;
    bool normalize_rows = true;
    std::string freq_covariate = "neglog";  // or "rank"
    double minres_tol = 1e-9;
    int minres_max_iter = 1000;
    double varimax_tol = 1e-10;
    int varimax_max_iter = 1000;
    std::string out_dir = "out";
    std::vector<std::string> tokens;  // vocab rank queries
    std::vector<std::string> probes;  // "concept,context" pairs
    // empty = keep the default selection (CPU detection, SEMFACTOR_KERNEL)
    std::string kernel;
};

/// Parses "2,3,4" into factor counts; throws on junk or values < 1.
std::vector<int> parse_factor_list(const std::string& text);

/// Config file grammar: one `key = value` per line, `#` starts a comment,
/// blank lines ignored. Keys are the long flag names without the leading
/// dashes. Returns pairs in file order; throws on lines without '='.
std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::string& path);

/// Applies one config entry to the RunConfig; throws on unknown keys or
/// unparsable values. List-valued keys (token, probe) append.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

/// Returns path itself when it exists (or is absolute); otherwise retries
/// under $SEMFACTOR_DATA_DIR before giving up.
std::string resolve_input_path(const std::string& path);

// Subcommand bodies. Each writes its artifacts under config.out_dir,
// prints a one-line JSON summary to stdout and throws semfactor::Error on
// failure; partial outputs are never left behind (temp file + rename).
void run_vocab(const RunConfig& config);
void run_simmat(const RunConfig& config);
void run_factor(const RunConfig& config);
void run_align(const RunConfig& config);
void run_validate(const RunConfig& config);
void run_report(const RunConfig& config);

}  // namespace semfactor::cli
