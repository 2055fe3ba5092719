#pragma once

#include "ephs/expr.hpp"
#include "lexer.hpp"

namespace ephs::detail {

// Parses one expression starting at the stream's cursor and stops at the first
// token that cannot continue it.
Expr parse_expression(TokenStream& ts);

}  // namespace ephs::detail
