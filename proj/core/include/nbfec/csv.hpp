#pragma once

#include <string>

namespace nbfec {

// Shortest round-trip decimal form, locale independent; keeps output files
// byte-stable across runs.
std::string format_double(double v);

}  // namespace nbfec
