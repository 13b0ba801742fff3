#pragma once

#include <string>

namespace qwork {

// Shortest decimal form of x rounded to `digits` significant digits,
// locale-independent. All emitted files use 12.
std::string format_number(double x, int digits = 12);

}  // namespace qwork
