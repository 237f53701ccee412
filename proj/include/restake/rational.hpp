#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace restake {

// Exact rational scalar used by the graph and mechanism layers. Stakes,
// profits and thresholds stay in Q so the worked examples (2/3, 7/3, ...)
// and all slashing identities can be checked without rounding.
using Rat = mpq_class;

// Parses "7/3", "-1.25", "0.932", "3" into an exact rational.
// Throws Error("parse-error", ...) on malformed input.
Rat rat_parse(std::string_view text);

// Exact rational from a decimal string ("1.5" -> 3/2). Scientific notation
// is not accepted; this is the file-format contract, not a general float parser.
Rat rat_from_decimal(std::string_view text);

// Exact binary value of a finite double (mantissa * 2^e).
Rat rat_from_double(double value);

// "p/q" when q != 1, otherwise "p".
std::string rat_to_fraction(const Rat& r);

// Fixed-point decimal rendering (round half away from zero), e.g. digits=6.
std::string rat_to_decimal(const Rat& r, int digits = 6);

inline double to_double(const Rat& r) { return r.get_d(); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// [x]_+ clamp used by the slashing formulas.
inline Rat rat_pos(const Rat& r) { return r < 0 ? Rat(0) : r; }

}  // namespace restake
