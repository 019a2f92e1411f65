#pragma once

#include <string>

#include "ctprover/normalize.hpp"
#include "ctprover/parser.hpp"

namespace ts {

inline ctprover::Program load(const std::string& src) {
    return ctprover::normalize(ctprover::parse(src));
}

inline std::string corpus_path(const std::string& name) {
    return std::string(CTPROVER_SOURCE_DIR) + "/corpus/" + name;
}

}  // namespace ts
