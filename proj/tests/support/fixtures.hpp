#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "markovprune/dsl.hpp"

#ifndef MARKOVPRUNE_FIXTURE_DIR
#define MARKOVPRUNE_FIXTURE_DIR "fixtures"
#endif

namespace testfx {

inline std::string fixture_path(const std::string& name) {
    return std::string(MARKOVPRUNE_FIXTURE_DIR) + "/" + name;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline markovprune::ModelFile load(const std::string& name) {
    return markovprune::parse_or_throw(read_text(fixture_path(name)));
}

}  // namespace testfx
