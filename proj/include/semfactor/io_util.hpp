#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace semfactor {

// Machine-parsable error categories. The CLI maps an Error to a single
// stderr line "error <code>: <message>" and a nonzero exit.
enum class ErrorCode {
    Args,     // bad flags / config
    Io,       // missing or unreadable file, write failure
    Format,   // malformed input content
    Empty,    // operation left with no usable data
    Numeric,  // solver failure, degenerate input
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Formats with 9 significant digits (shared convention for every CSV the
// tool emits).
std::string format_sig9(double value);

// Nearest double to the 9-significant-digit decimal rendering of value.
// Applied before JSON emission so serialized numbers are short and stable.
double round_sig9(double value);

// Shortest decimal that parses back to the same double (vector files).
std::string format_shortest(double value);

// Writes content to path via a temp file in the same directory plus an
// atomic rename, so readers never observe a half-written file.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace semfactor
