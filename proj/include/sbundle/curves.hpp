#pragma once

// One-parameter models as curves in the closed simplex, and the extraction
// of velocity, Fisher score, Fisher information and the square-root
// (sphere) embedding, with support-aware handling of boundary contacts.
//
// The score of a curve gamma at t is the vector s with
//     gamma'(x;t) = s(x;t) * gamma(x;t)   for all x.
// On supp gamma(t) it is the componentwise quotient; off the support it is
// only defined when the velocity vanishes there (tangential contact), in
// which case the canonical representative 0 is used and the cell is marked
// undetermined. A zero cell with nonzero velocity is a one-sided boundary
// contact and has no score: AbsoluteContinuityViolation.

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "sbundle/errors.hpp"
#include "sbundle/finite_difference.hpp"
#include "sbundle/simplex.hpp"

namespace sbundle {

enum class DiffMode { Analytic, CentralFd };

template <typename Scalar>
struct ParamCurve {
    SampleSpace space = SampleSpace::numbered(1);
    Scalar t_min = Scalar(0);
    Scalar t_max = Scalar(1);
    std::function<Vector<Scalar>(Scalar)> eval;
    std::function<Vector<Scalar>(Scalar)> deriv;  // optional analytic derivative
    Scalar fd_step = Scalar(0);                   // 0 = automatic

    DiffMode diff_mode() const { return deriv ? DiffMode::Analytic : DiffMode::CentralFd; }
    bool contains(Scalar t) const { return t >= t_min && t <= t_max; }
    bool interior(Scalar t) const { return t > t_min && t < t_max; }

    // Evaluate as a validated simplex point.
    ProbabilityVector<Scalar> at(Scalar t, Scalar normalization_tol = Scalar(tol::normalization),
                                 Scalar support_tol = Scalar(tol::support)) const {
        if (!contains(t)) throw OutOfDomain("curve evaluated at t = " + std::to_string(t));
        return ProbabilityVector<Scalar>(space, eval(t), normalization_tol, support_tol);
    }
};

// Ordinary velocity of the curve, a zero-sum contrast. Analytic when a
// derivative is supplied; otherwise central differences, which require t in
// the interior of the domain (the step shrinks near the ends).
template <typename Scalar>
ContrastVector<Scalar> velocity(const ParamCurve<Scalar>& curve, Scalar t) {
    if (curve.deriv) {
        if (!curve.contains(t)) throw OutOfDomain("velocity at t = " + std::to_string(t));
        return ContrastVector<Scalar>(curve.space, curve.deriv(t));
    }
    if (!curve.interior(t))
        throw OutOfDomain("finite differences need interior t, got t = " + std::to_string(t));
    Scalar h = curve.fd_step > Scalar(0) ? curve.fd_step : default_fd_step(t);
    h = std::min(h, std::min(t - curve.t_min, curve.t_max - t));
    if (!(h > Scalar(0))) throw OutOfDomain("degenerate finite-difference step");
    return ContrastVector<Scalar>(curve.space, fd_derivative_vec<Scalar>(curve.eval, t, h));
}

template <typename Scalar>
struct ScoreResult {
    ProbabilityVector<Scalar> base;
    BundleElement<Scalar> score;
    SupportIndicator determined;  // cells where the score is uniquely defined = supp base
    // Set when some support cell has weight below tol::conditioning: the
    // quotient is formed but legitimately blows up near a face.
    bool conditioning_warning = false;
};

// Score from an evaluated point and its velocity; shared by curve evaluation
// and tabulated (sampled) curves.
template <typename Scalar>
ScoreResult<Scalar> score_from(const ProbabilityVector<Scalar>& p, const Vector<Scalar>& vel,
                               Scalar ac_threshold = Scalar(tol::abs_continuity)) {
    Vector<Scalar> s = Vector<Scalar>::Zero(p.size());
    bool warn = false;
    for (Index i = 0; i < p.size(); ++i) {
        if (p.in_support(i)) {
            s[i] = vel[i] / p[i];
            if (p[i] < Scalar(tol::conditioning)) warn = true;
        } else if (std::abs(vel[i]) > ac_threshold) {
            throw AbsoluteContinuityViolation("cell '" + p.space().label(i) + "': weight " +
                                              std::to_string(p[i]) + " but velocity " +
                                              std::to_string(vel[i]));
        }
    }
    // |E_p[s]| = |sum of on-support velocities| <= |sum vel| + off-support
    // slack, so the bound matches the absolute-continuity threshold.
    BundleElement<Scalar> elem(p, s, ac_threshold);
    return ScoreResult<Scalar>{p, std::move(elem), p.support(), warn};
}

template <typename Scalar>
ScoreResult<Scalar> score(const ParamCurve<Scalar>& curve, Scalar t,
                          Scalar support_tol = Scalar(tol::support)) {
    const ProbabilityVector<Scalar> p =
        curve.at(t, Scalar(tol::normalization), support_tol);
    const ContrastVector<Scalar> v = velocity(curve, t);
    return score_from(p, v.values());
}

// Running variance of the score: sum over supp gamma(t) of vel^2 / gamma.
template <typename Scalar>
Scalar fisher_information(const ParamCurve<Scalar>& curve, Scalar t) {
    const ScoreResult<Scalar> r = score(curve, t);
    Scalar info = Scalar(0);
    for (Index i = 0; i < r.base.size(); ++i)
        if (r.base.in_support(i)) info += r.base[i] * r.score[i] * r.score[i];
    return info;
}

template <typename Scalar>
struct SqrtEmbedding {
    Vector<Scalar> rho;      // 2 sqrt(gamma), a point of the radius-2 sphere
    Vector<Scalar> rho_dot;  // (1/2) * score * rho
};

template <typename Scalar>
SqrtEmbedding<Scalar> sqrt_embedding(const ParamCurve<Scalar>& curve, Scalar t) {
    const ScoreResult<Scalar> r = score(curve, t);
    SqrtEmbedding<Scalar> e;
    e.rho = (2 * r.base.weights().array().sqrt()).matrix();
    e.rho_dot = (Scalar(0.5) * r.score.score().array() * e.rho.array()).matrix();
    return e;
}

}  // namespace sbundle
