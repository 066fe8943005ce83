#pragma once

#include <string>

#include "liesym/expr.hpp"
#include "liesym/symbols.hpp"

namespace liesym {

// Parses an expression in the engine grammar against the given registry and
// returns its canonical form. Errors carry the offending position.
Expr parse(const std::string& text, SymbolTable& symbols);

} // namespace liesym
