#pragma once

#include <functional>
#include <string>

#include "diracspec/types.hpp"

namespace dirac {

// Parse a complex-valued expression in the variable x. Supported syntax:
// numbers (1.5, 2e-3), the imaginary unit i, the constant pi, the variable x,
// + - * / ^ with usual precedence, parentheses, and the functions
// sin cos tan sinh cosh tanh exp log sqrt abs re im conj pow(a,b).
// Throws ConfigError with a position marker on malformed input.
std::function<Cx(double)> parse_expr(const std::string& src);

}  // namespace dirac
