#include <doctest.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "semfactor/cli.hpp"
#include "semfactor/embedding.hpp"
#include "semfactor/fixtures.hpp"
#include "semfactor/io_util.hpp"
#include "test_helpers.hpp"

using namespace semfactor;
using test_helpers::TempDir;
using test_helpers::write_text;
using json = nlohmann::json;

TEST_SUITE_BEGIN("cli");

namespace {

// A miniature corpus whose concepts split into a "science" block and a
// "service" block, so even a 6-concept factor run is well-posed.
std::string tiny_corpus_text(unsigned seed, double jitter) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, jitter);
    const char* words[] = {"doctor",  "biologist", "physicist",
                           "cleaner", "waiter",    "maid",
                           "filler1", "filler2"};
    const double base[][4] = {{1, .8, 0, 0},  {1, .9, .1, 0}, {.9, 1, 0, .1},
                              {0, .1, 1, .8}, {.1, 0, .9, 1}, {0, 0, 1, .9},
                              {.5, .5, .5, .5}, {.4, .6, .5, .5}};
    std::string out = "8 4\n";
    for (int i = 0; i < 8; ++i) {
        out += words[i];
        for (int j = 0; j < 4; ++j) {
            std::ostringstream v;
            v << (base[i][j] + noise(gen));
            out += " " + v.str();
        }
        out += "\n";
    }
    return out;
}

const char* kTinyConcepts =
    "doctor\nbiologist\nphysicist\ncleaner\nwaiter\nmaid\nmissingconcept\n";
const char* kTinyScale =
    "label,score\n"
    "doctor,88\nbiologist,80\nphysicist,84\ncleaner,16\nwaiter,25\nmaid,14\n";

cli::RunConfig tiny_config(const TempDir& dir) {
    write_text(dir.file("a.vec"), tiny_corpus_text(1, 0.02));
    write_text(dir.file("b.vec"), tiny_corpus_text(2, 0.05));
    write_text(dir.file("concepts.txt"), kTinyConcepts);
    write_text(dir.file("scale.csv"), kTinyScale);
    cli::RunConfig config;
    config.vec_a = dir.file("a.vec").string();
    config.vec_b = dir.file("b.vec").string();
    config.label_a = "alpha";
    config.label_b = "beta";
    config.concepts_path = dir.file("concepts.txt").string();
    config.scale_path = dir.file("scale.csv").string();
    config.factors = {2};
    config.out_dir = (dir.path() / "out").string();
    return config;
}

int run_binary(const std::string& args) {
    const std::string command = std::string(SEMFACTOR_CLI_BINARY) + " " + args;
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("parse_factor_list accepts sweeps and rejects junk") {
    CHECK(cli::parse_factor_list("3") == std::vector<int>{3});
    CHECK(cli::parse_factor_list("2,3,4,5") == std::vector<int>{2, 3, 4, 5});
    CHECK_THROWS_AS((void)cli::parse_factor_list("2,x"), Error);
    CHECK_THROWS_AS((void)cli::parse_factor_list("0"), Error);
    CHECK_THROWS_AS((void)cli::parse_factor_list(""), Error);
}

TEST_CASE("bundled fixtures have the documented shape") {
    const auto& occupations = fixtures::occupations();
    CHECK(occupations.labels.size() == 234);
    CHECK(std::count(occupations.labels.begin(), occupations.labels.end(),
                     "doctor") == 1);
    CHECK(std::count(occupations.labels.begin(), occupations.labels.end(),
                     "director-general") == 1);

    const auto& isei = fixtures::isei_partial();
    CHECK(isei.entries.size() >= 80);
    CHECK(*isei.lookup("chairperson") == doctest::Approx(71.29));
    CHECK(*isei.lookup("maid") == doctest::Approx(14.21));
    CHECK(*isei.lookup("attorney") == doctest::Approx(86.72));
    // period spelling resolves through the match key
    CHECK(*isei.lookup("director.general") == doctest::Approx(71.29));
    // every scale label that is an occupation appears in the concept list
    int present = 0;
    for (const auto& [label, value] : isei.entries)
        if (std::find(occupations.labels.begin(), occupations.labels.end(),
                      label) != occupations.labels.end())
            ++present;
    CHECK(present >= static_cast<int>(isei.entries.size()) - 1);
}

TEST_CASE("vocab command writes the rank CSV") {
    TempDir dir("cmd_vocab");
    auto config = tiny_config(dir);
    config.tokens = {"doctor", "absent"};
    cli::run_vocab(config);

    const auto csv = test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "vocab_alpha.csv");
    CHECK(csv.find("token,rank\n") == 0);
    CHECK(csv.find("doctor,1\n") != std::string::npos);
    CHECK(csv.find("maid,6\n") != std::string::npos);
}

TEST_CASE("simmat command emits matrix, resolution and probes") {
    TempDir dir("cmd_simmat");
    auto config = tiny_config(dir);
    config.probes = {"doctor,biologist"};
    cli::run_simmat(config);

    const auto matrix = test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "similarity_alpha.csv");
    CHECK(matrix.find("label,doctor,") == 0);

    const auto resolution = json::parse(test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "resolution_alpha.json"));
    CHECK(resolution["found_count"] == 6);
    CHECK(resolution["missing"][0] == "missingconcept");

    const auto probes = test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "probes_alpha.csv");
    CHECK(probes.find("doctor,biologist,") != std::string::npos);
}

TEST_CASE("factor command writes loadings, fit and extremes per m") {
    TempDir dir("cmd_factor");
    auto config = tiny_config(dir);
    // noisier corpus keeps the similarity matrix positive definite, so the
    // chi-square block is computable
    write_text(dir.file("a.vec"), tiny_corpus_text(1, 0.4));
    config.factors = {1, 2};
    config.pseudo_n = 500;
    cli::run_factor(config);

    const auto fit2 = json::parse(test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "fit_alpha_m2.json"));
    REQUIRE(fit2.contains("chi_square"));
    CHECK(fit2["df"] == ((6 - 2) * (6 - 2) - 6 - 2) / 2);

    for (int m : {1, 2}) {
        const auto stem = "alpha_m" + std::to_string(m);
        const auto loadings = test_helpers::read_text(
            std::filesystem::path(config.out_dir) / ("loadings_" + stem + ".csv"));
        CHECK(loadings.find("label,f1") == 0);
        const auto fit = json::parse(test_helpers::read_text(
            std::filesystem::path(config.out_dir) / ("fit_" + stem + ".json")));
        CHECK(fit["m"] == m);
        CHECK(fit["converged"].is_boolean());
        CHECK(fit["column_ssq"].size() == static_cast<std::size_t>(m));
        const auto extremes = test_helpers::read_text(
            std::filesystem::path(config.out_dir) / ("extremes_" + stem + ".csv"));
        CHECK(extremes.find("factor,position,") == 0);
    }
}

TEST_CASE("align command reports stability and concept subset") {
    TempDir dir("cmd_align");
    auto config = tiny_config(dir);
    cli::run_align(config);

    const auto summary = json::parse(test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "alignment.json"));
    CHECK(summary["from"] == "beta");
    CHECK(summary["anchor"] == "alpha");
    CHECK(summary["shared_count"] == 8);
    CHECK(summary["concepts"]["found_count"] == 6);
    const double mean = summary["mean_stability"];
    CHECK(mean > 0.5);  // same construction up to small jitter

    const auto csv = test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "stability.csv");
    CHECK(csv.find("token,from_rank,anchor_rank,stability\n") == 0);
}

TEST_CASE("validate command correlates loadings with the scale") {
    TempDir dir("cmd_validate");
    auto config = tiny_config(dir);
    cli::run_validate(config);

    const auto vjson = json::parse(test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "validation_alpha_m2.json"));
    CHECK(vjson["matched_count"] == 6);
    CHECK(vjson["pearson_per_factor"].size() == 2);
    const auto scatter = test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "scatter_alpha_m2.csv");
    CHECK(scatter.find("label,osps,scale_score\n") == 0);
}

TEST_CASE("report command bundles both corpora with cross-corpus block") {
    TempDir dir("cmd_report");
    auto config = tiny_config(dir);
    cli::run_report(config);

    const auto report = json::parse(test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "report.json"));
    CHECK(report["corpora"].size() == 2);
    CHECK(report["alignment"]["shared_count"] == 8);
    REQUIRE(report.contains("cross_corpus"));
    const auto& cross = report["cross_corpus"][0];
    CHECK(cross["m"] == 2);
    CHECK(cross["shared_labels"] == 6);
    // same generative recipe: first factors should correlate strongly
    CHECK(std::fabs(cross["diagonal"][0].get<double>()) > 0.8);
    // the from-corpus carries the stability statistics
    const auto& beta_validation =
        report["corpora"][1]["factors"][0]["validation"];
    CHECK(beta_validation.contains("stability_frequency_r"));
    CHECK(beta_validation.contains("stability_frequency_r_rank"));
    CHECK(beta_validation.contains("stability_scale_partial_r"));
}

TEST_CASE("report with a single corpus and m=1 still bundles every section") {
    TempDir dir("cmd_report_single");
    auto config = tiny_config(dir);
    config.vec_b.clear();
    config.factors = {1};
    cli::run_report(config);

    const auto report = json::parse(test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "report.json"));
    CHECK(report["corpora"].size() == 1);
    CHECK_FALSE(report.contains("alignment"));
    CHECK_FALSE(report.contains("cross_corpus"));
    const auto& corpus = report["corpora"][0];
    CHECK(corpus["vocab"]["count"] == 8);
    CHECK(corpus["concepts"]["found_count"] == 6);
    CHECK(corpus["factors"][0]["m"] == 1);
    CHECK(corpus["factors"][0]["validation"]["matched_count"] == 6);
    CHECK(std::filesystem::exists(std::filesystem::path(config.out_dir) /
                                  "similarity_alpha.csv"));
}

TEST_CASE("report on a rotated twin corpus gives unit cross-corpus diagonal") {
    TempDir dir("cmd_report_rot");
    auto config = tiny_config(dir);

    // corpus b = corpus a right-multiplied by a random orthogonal map;
    // cosines are rotation-invariant, so the factor solutions must agree
    auto gen = test_helpers::rng(91);
    const auto parsed = embedding::parse_vec_file(config.vec_a);
    const auto q = test_helpers::random_orthogonal(gen, 4);
    linalg::Mat rotated(parsed.space.size(), 4);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < parsed.space.size(); ++i) {
        words.push_back(parsed.space.word(i));
        for (std::size_t jj = 0; jj < 4; ++jj) {
            double acc = 0.0;
            for (std::size_t kk = 0; kk < 4; ++kk)
                acc += parsed.space.row(i)[kk] * q(kk, jj);
            rotated(i, jj) = acc;
        }
    }
    embedding::write_vec_file(test_helpers::make_space(words, rotated, "rot"),
                              dir.file("b.vec"));

    cli::run_report(config);
    const auto report = json::parse(test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "report.json"));
    const auto& diag = report["cross_corpus"][0]["diagonal"];
    for (const auto& r : diag) CHECK(std::fabs(r.get<double>()) > 0.999);
    // the alignment map recovers the rotation: stabilities near 1
    CHECK(report["alignment"]["mean_stability"].get<double>() > 0.999);
}

TEST_CASE("number formatting conventions") {
    CHECK(format_sig9(0.123456789123) == "0.123456789");
    CHECK(format_sig9(1.0) == "1");
    CHECK(format_sig9(-2.5e-13) == "-2.5e-13");
    // rounding to 9 significant digits is idempotent
    const double rounded = round_sig9(0.9746318461970762);
    CHECK(round_sig9(rounded) == rounded);
    CHECK(format_sig9(rounded) == "0.974631846");
    // shortest form reparses to the identical double
    const double value = 0.1 + 0.2;
    double back = 0.0;
    const auto text = format_shortest(value);
    std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(back == value);
}

TEST_CASE("cross-corpus pairing bridges hyphen and period spellings") {
    TempDir dir("cmd_report_spelling");
    auto config = tiny_config(dir);

    // corpus b stores the compound concept under its period spelling
    const auto a_text = test_helpers::read_text(dir.file("a.vec"));
    write_text(dir.file("a.vec"),
               a_text .substr(0, a_text.find("doctor")) + "head-teacher" +
                   a_text.substr(a_text.find("doctor") + 6));
    const auto b_text = test_helpers::read_text(dir.file("b.vec"));
    write_text(dir.file("b.vec"),
               b_text.substr(0, b_text.find("doctor")) + "head.teacher" +
                   b_text.substr(b_text.find("doctor") + 6));
    write_text(dir.file("concepts.txt"),
               "head-teacher\nbiologist\nphysicist\ncleaner\nwaiter\nmaid\n");
    write_text(dir.file("scale.csv"),
               "label,score\nhead-teacher,65\nbiologist,80\nphysicist,84\n"
               "cleaner,16\nwaiter,25\nmaid,14\n");
    cli::run_report(config);

    const auto report = json::parse(test_helpers::read_text(
        std::filesystem::path(config.out_dir) / "report.json"));
    // resolved under different spellings per corpus...
    CHECK(report["corpora"][0]["concepts"]["found"][0] == "head-teacher");
    CHECK(report["corpora"][1]["concepts"]["found"][0] == "head.teacher");
    CHECK(report["corpora"][1]["concepts"]["respelled"][0]["token"] ==
          "head.teacher");
    // ...yet still paired across corpora and matched to the scale
    CHECK(report["cross_corpus"][0]["shared_labels"] == 6);
    CHECK(report["corpora"][1]["factors"][0]["validation"]["matched_count"] ==
          6);
}

TEST_CASE("atomic writes leave no temp files and create parents") {
    TempDir dir("atomic");
    const auto target = dir.path() / "nested" / "deep" / "file.csv";
    atomic_write_file(target, "a,b\n1,2\n");
    CHECK(test_helpers::read_text(target) == "a,b\n1,2\n");
    int entries = 0;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(dir.path()))
        if (entry.is_regular_file()) ++entries;
    CHECK(entries == 1);  // no `.tmp` leftovers
}

TEST_CASE("binary: exit codes and single-line errors") {
    TempDir dir("binary");
    const auto out = dir.file("out").string();

    // missing input -> nonzero with machine-parsable code on stderr
    const int missing = run_binary("vocab --vec-a " + dir.file("nope.vec").string() +
                                   " --out " + out + " 2> " +
                                   dir.file("err.txt").string());
    CHECK(missing == 1);
    const auto err = test_helpers::read_text(dir.file("err.txt"));
    CHECK(err.find("error E_IO:") == 0);
    CHECK(std::count(err.begin(), err.end(), '\n') == 1);

    // unknown flag -> argument error
    CHECK(run_binary("vocab --definitely-not-a-flag 2> /dev/null") == 2);

    // align without a second embedding -> E_ARGS
    write_text(dir.file("solo.vec"), tiny_corpus_text(3, 0.01));
    const int no_b = run_binary("align --vec-a " + dir.file("solo.vec").string() +
                                " --out " + out + " 2> " +
                                dir.file("err2.txt").string());
    CHECK(no_b == 1);
    CHECK(test_helpers::read_text(dir.file("err2.txt")).find("error E_ARGS:") == 0);

    // bad kernel name and bad covariate name are argument errors
    CHECK(run_binary("vocab --vec-a " + dir.file("solo.vec").string() +
                     " --kernel sse9 --out " + out + " 2> /dev/null") == 1);

    // happy path end to end through the real binary, driven by a config file
    write_text(dir.file("a.vec"), tiny_corpus_text(1, 0.02));
    write_text(dir.file("concepts.txt"), kTinyConcepts);
    write_text(dir.file("scale.csv"), kTinyScale);
    write_text(dir.file("run.cfg"),
               "vec-a=" + dir.file("a.vec").string() + "\n" +
                   "concepts=" + dir.file("concepts.txt").string() + "\n" +
                   "scale=" + dir.file("scale.csv").string() + "\n" +
                   "factors=2\n" + "out=" + out + "\n");
    const int ok = run_binary("report --config " + dir.file("run.cfg").string() +
                              " > /dev/null");
    CHECK(ok == 0);
    CHECK(std::filesystem::exists(std::filesystem::path(out) / "report.json"));

    // flag overrides config: bogus out dir in config, good one on the line
    const int overridden =
        run_binary("vocab --config " + dir.file("run.cfg").string() + " --out " +
                   dir.file("out2").string() + " > /dev/null");
    CHECK(overridden == 0);
    CHECK(std::filesystem::exists(dir.file("out2") / "vocab_a.csv"));
}

TEST_SUITE_END();
