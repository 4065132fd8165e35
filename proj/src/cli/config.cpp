#include <charconv>
#include <fstream>

#include "semfactor/cli.hpp"
#include "semfactor/io_util.hpp"

namespace semfactor::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw Error(ErrorCode::Args,
                "config key '" + key + "' expects a boolean, got '" + value +
                    "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw Error(ErrorCode::Args,
                    "config key '" + key + "' expects a number, got '" + value +
                        "'");
    return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(ErrorCode::Format,
                        "config " + path + ":" + std::to_string(line_no) +
                            ": expected 'key = value'");
        entries.emplace_back(trim(stripped.substr(0, eq)),
                             trim(stripped.substr(eq + 1)));
    }
    return entries;
}

void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "vec-a") config.vec_a = value;
    else if (key == "vec-b") config.vec_b = value;
    else if (key == "label-a") config.label_a = value;
    else if (key == "label-b") config.label_b = value;
    else if (key == "keep-top") config.keep_top = parse_number<std::size_t>(key, value);
    else if (key == "concepts") config.concepts_path = value;
    else if (key == "scale") config.scale_path = value;
    else if (key == "factors") config.factors = parse_factor_list(value);
    else if (key == "pseudo-n") config.pseudo_n = parse_number<long long>(key, value);
    else if (key == "kaiser") config.kaiser = parse_bool(key, value);
    else if (key == "normalize-rows") config.normalize_rows = parse_bool(key, value);
    else if (key == "freq-covariate") config.freq_covariate = value;
    else if (key == "minres-tol") config.minres_tol = parse_number<double>(key, value);
    else if (key == "minres-max-iter") config.minres_max_iter = parse_number<int>(key, value);
    else if (key == "varimax-tol") config.varimax_tol = parse_number<double>(key, value);
    else if (key == "varimax-max-iter") config.varimax_max_iter = parse_number<int>(key, value);
    else if (key == "out") config.out_dir = value;
    else if (key == "kernel") config.kernel = value;
    else if (key == "token") config.tokens.push_back(value);
    else if (key == "probe") config.probes.push_back(value);
    else
        throw Error(ErrorCode::Args, "unknown config key '" + key + "'");
}

}  // namespace semfactor::cli
