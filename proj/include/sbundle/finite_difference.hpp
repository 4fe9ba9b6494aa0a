#pragma once

// Central finite differences with one Richardson refinement. The default
// step h = max(1,|t|) * eps^(1/3) is the standard choice for second-order
// central differences; the refinement lifts the truncation error to O(h^4).

#include <cmath>
#include <limits>

#include "sbundle/simplex.hpp"

namespace sbundle {

template <typename Scalar>
Scalar default_fd_step(Scalar t) {
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    return std::cbrt(eps) * std::max(Scalar(1), std::abs(t));
}

template <typename Scalar, typename F>
Scalar fd_derivative(F&& f, Scalar t, Scalar h) {
    const Scalar d1 = (f(t + h) - f(t - h)) / (2 * h);
    const Scalar d2 = (f(t + h / 2) - f(t - h / 2)) / h;
    return (4 * d2 - d1) / 3;
}

template <typename Scalar, typename F>
Vector<Scalar> fd_derivative_vec(F&& f, Scalar t, Scalar h) {
    const Vector<Scalar> fp = f(t + h);
    const Vector<Scalar> fm = f(t - h);
    const Vector<Scalar> fp2 = f(t + h / 2);
    const Vector<Scalar> fm2 = f(t - h / 2);
    return ((4 * (fp2 - fm2) / h - (fp - fm) / (2 * h)) / 3).eval();
}

}  // namespace sbundle
