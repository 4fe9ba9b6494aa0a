#pragma once

// Arbitrary-precision rational coefficients via GMP. Conversion from double
// is exact (every finite double is a binary rational).

#include <gmpxx.h>

#include <string>

#include "sbundle/errors.hpp"

namespace sbundle {

using Rational = mpq_class;

inline Rational rational_from_string(const std::string& text) {
    try {
        Rational q(text, 10);
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw ParseError("invalid rational '" + text + "'");
    }
}

inline Rational rational_from_double(double x) {
    return Rational(x);  // mpq_set_d is exact
}

inline std::string rational_to_string(const Rational& q) { return q.get_str(); }

}  // namespace sbundle
