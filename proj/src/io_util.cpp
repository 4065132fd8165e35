#include "semfactor/io_util.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

namespace semfactor {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Args: return "E_ARGS";
        case ErrorCode::Io: return "E_IO";
        case ErrorCode::Format: return "E_FORMAT";
        case ErrorCode::Empty: return "E_EMPTY";
        case ErrorCode::Numeric: return "E_NUMERIC";
    }
    return "E_UNKNOWN";
}

std::string format_sig9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

double round_sig9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.8e", value);
    double out = value;
    std::from_chars(buf, buf + sizeof(buf), out);
    return out;
}

std::string format_shortest(double value) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path();
    if (!dir.empty()) {
        std::error_code ec;
        fs::create_directories(dir, ec);
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::Io,
                        "cannot open " + tmp.string() + " for writing");
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorCode::Io, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::Io, "cannot rename temp file onto " +
                                       path.string() + ": " + ec.message());
    }
}

}  // namespace semfactor
