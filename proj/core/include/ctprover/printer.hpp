#pragma once

#include <string>

#include "ctprover/ast.hpp"

namespace ctprover {

std::string pretty_print(const Expr& e);
std::string pretty_print(const Program& p);

}  // namespace ctprover
