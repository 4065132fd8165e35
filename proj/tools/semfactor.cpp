// semfactor - latent-dimension analysis of concept sets in pre-trained
// word-embedding spaces: cosine similarity matrices, minimum-residual factor
// analysis with varimax rotation, orthogonal cross-corpus alignment and
// validation against external scales.
#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "semfactor/cli.hpp"
#include "semfactor/io_util.hpp"
#include "semfactor/kernels.hpp"

namespace {

using semfactor::cli::RunConfig;

struct CommandSpec {
    CLI::App* app = nullptr;
    std::function<void(const RunConfig&)> run;
};

void add_common_options(CLI::App* cmd, RunConfig& config,
                        std::string& config_path, std::string& factors_text) {
    cmd->add_option("--config", config_path,
                    "key=value config file; flags take precedence");
    cmd->add_option("--vec-a", config.vec_a,
                    "primary embedding (.vec text format)");
    cmd->add_option("--vec-b", config.vec_b,
                    "second embedding, aligned onto --vec-a");
    cmd->add_option("--label-a", config.label_a, "name for the first corpus");
    cmd->add_option("--label-b", config.label_b, "name for the second corpus");
    cmd->add_option("--keep-top", config.keep_top,
                    "restrict each vocabulary to its most frequent N words");
    cmd->add_option("--concepts", config.concepts_path,
                    "concept list file (one token per line); default: bundled "
                    "occupation list");
    cmd->add_option("--scale", config.scale_path,
                    "external scale CSV 'label,score'; default: bundled "
                    "partial ISEI fixture");
    cmd->add_option("--factors", factors_text,
                    "comma-separated factor counts, e.g. 2,3,4,5");
    cmd->add_option("--pseudo-n",
                    [&config](const CLI::results_t& res) {
                        config.pseudo_n = std::stoll(res[0]);
                        return true;
                    },
                    "pseudo sample size enabling chi-square fit indices");
    cmd->add_flag("--kaiser,!--no-kaiser", config.kaiser,
                  "Kaiser row normalization in varimax (default on)");
    cmd->add_flag("--normalize-rows,!--no-normalize-rows",
                  config.normalize_rows,
                  "unit-normalize rows before Procrustes (default on)");
    cmd->add_option("--freq-covariate", config.freq_covariate,
                    "frequency covariate transform: neglog (default) or rank");
    cmd->add_option("--minres-tol", config.minres_tol,
                    "extraction convergence tolerance");
    cmd->add_option("--minres-max-iter", config.minres_max_iter,
                    "extraction iteration cap");
    cmd->add_option("--varimax-tol", config.varimax_tol,
                    "rotation convergence tolerance");
    cmd->add_option("--varimax-max-iter", config.varimax_max_iter,
                    "rotation sweep cap");
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--kernel", config.kernel,
                    "compute backend: auto (default), scalar or avx2");
}

// Config entries apply only where no flag overrode them.
void merge_config_file(CLI::App* cmd, RunConfig& config,
                       const std::string& config_path,
                       std::string& factors_text) {
    for (const auto& [key, value] :
         semfactor::cli::parse_config_file(config_path)) {
        const std::string flag = "--" + key;
        const CLI::Option* opt =
            cmd->get_option_no_throw(flag);
        if (opt && opt->count() > 0) continue;
        if (key == "factors" && !factors_text.empty()) continue;
        semfactor::cli::apply_config_entry(config, key, value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "semantic-space structure toolkit: similarity matrices, factor "
        "analysis, cross-corpus alignment and scale validation over "
        "pre-trained word embeddings"};
    app.require_subcommand(1);

    RunConfig config;
    std::string config_path;
    std::string factors_text;

    std::vector<CommandSpec> commands;
    auto add = [&](const char* name, const char* help,
                   void (*fn)(const RunConfig&)) -> CLI::App* {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common_options(cmd, config, config_path, factors_text);
        commands.push_back({cmd, fn});
        return cmd;
    };

    CLI::App* vocab =
        add("vocab", "parse an embedding and report its vocabulary",
            semfactor::cli::run_vocab);
    vocab->add_option("--token", config.tokens,
                      "token whose frequency rank to report (repeatable)");

    CLI::App* simmat =
        add("simmat", "cosine similarity matrix over the concept list",
            semfactor::cli::run_simmat);
    simmat->add_option("--probe", config.probes,
                       "heuristic probe 'concept,context' (repeatable)");

    add("factor", "minres factor analysis with varimax rotation",
        semfactor::cli::run_factor);
    add("align", "Procrustes-align --vec-b onto --vec-a, report stability",
        semfactor::cli::run_align);
    add("validate", "correlate factor loadings with an external scale",
        semfactor::cli::run_validate);
    add("report", "end-to-end pipeline over one or two corpora",
        semfactor::cli::run_report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error %s: %s\n",
                     semfactor::error_code_name(semfactor::ErrorCode::Args),
                     e.what());
        return 2;
    }

    try {
        for (const auto& command : commands) {
            if (!command.app->parsed()) continue;
            if (!config_path.empty())
                merge_config_file(command.app, config, config_path,
                                  factors_text);
            if (!factors_text.empty())
                config.factors = semfactor::cli::parse_factor_list(factors_text);
            if (!config.kernel.empty())
                semfactor::kernels::select(
                    semfactor::kernels::parse_backend(config.kernel));
            command.run(config);
            return 0;
        }
        std::fprintf(stderr, "error E_ARGS: no subcommand given\n");
        return 2;
    } catch (const semfactor::Error& e) {
        std::fprintf(stderr, "error %s: %s\n",
                     semfactor::error_code_name(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error E_UNKNOWN: %s\n", e.what());
        return 1;
    }
}
