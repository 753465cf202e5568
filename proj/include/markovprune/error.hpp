#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace markovprune {

// Stable domain error codes. The CLI prints these as "error[E0xx]: message"
// and maps every domain failure to exit code 1.
enum class Errc {
    cycle = 1,
    unknown_node = 2,
    duplicate_edge = 3,
    self_loop = 4,
    syntax = 5,
    semantic = 6,
    not_identifiable = 7,
    latent_misuse = 8,
    invalid_set = 9,
    numerical = 10,
    sample_too_small = 11,
    io = 12,
    bad_argument = 13,
    missing_edge = 14,
};

inline std::string errc_label(Errc c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "E%03d", static_cast<int>(c));
    return buf;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace markovprune
