#pragma once

#include <string>
#include <string_view>

#include "ctprover/ast.hpp"

namespace ctprover {

// Parses source text into an un-normalized AST (labels unassigned, conditions
// and expressions may be compound). Throws ParseError.
Program parse(std::string_view text);

Program parse_file(const std::string& path);

}  // namespace ctprover
