#pragma once

// Natural gradient of scalar functionals on the closed simplex, entropy and
// entropy production with singularity compensation, the Cramer-Rao pair,
// and natural-gradient flow by explicit Euler in the exponential chart.
//
// The natural gradient of G at p is the fibre element representing dG via
// the covariance pairing: d/dt G(gamma(t)) = <grad G, score>_gamma. For a
// Euclidean gradient nabla G it equals the centred, canonicalized nabla G.
// Without an analytic gradient it is recovered from directional derivatives
// along exponential geodesics in a contrast basis of the current face, so
// probes never leave the simplex even at boundary points.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sbundle/curves.hpp"
#include "sbundle/errors.hpp"
#include "sbundle/finite_difference.hpp"
#include "sbundle/simplex.hpp"
#include "sbundle/transport.hpp"

namespace sbundle {

template <typename Scalar>
struct Functional {
    std::string name;
    std::function<Scalar(const ProbabilityVector<Scalar>&)> value;
    // Optional Euclidean gradient (nabla G); entries off supp p are ignored.
    std::function<Vector<Scalar>(const ProbabilityVector<Scalar>&)> euclidean_gradient;
    Scalar fd_step = Scalar(0);  // 0 = automatic
};

template <typename Scalar>
BundleElement<Scalar> natural_gradient(const Functional<Scalar>& g,
                                       const ProbabilityVector<Scalar>& p) {
    if (g.euclidean_gradient) return center(g.euclidean_gradient(p), p);

    const SupportIndicator supp = p.support();
    if (supp.count() < 2)
        throw GradientUnavailable("natural_gradient: finite differences at a vertex (functional '" +
                                  g.name + "')");
    std::vector<std::string> face;
    for (Index i = 0; i < p.size(); ++i)
        if (supp[i]) face.push_back(p.space().label(i));

    // Directional derivatives g_i = <grad G, v_i>_p along geodesic probes in
    // the fibre directions v_i, then a Gram solve recovers grad G.
    const auto basis = contrast_basis<Scalar>(p.space(), face);
    const Index k = static_cast<Index>(basis.size());
    std::vector<BundleElement<Scalar>> dirs;
    dirs.reserve(static_cast<std::size_t>(k));
    for (const auto& b : basis) dirs.push_back(center(b.values(), p));

    const Scalar h = g.fd_step > Scalar(0) ? g.fd_step : default_fd_step(Scalar(0));
    Vector<Scalar> rhs(k);
    for (Index i = 0; i < k; ++i) {
        ExpGeodesic<Scalar> probe(p, dirs[static_cast<std::size_t>(i)]);
        rhs[i] = fd_derivative<Scalar>(
            [&](Scalar eps) { return g.value(probe.point(eps)); }, Scalar(0), h);
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram(k, k);
    for (Index i = 0; i < k; ++i)
        for (Index j = i; j < k; ++j)
            gram(i, j) = gram(j, i) = inner_product(p, dirs[static_cast<std::size_t>(i)],
                                                    dirs[static_cast<std::size_t>(j)]);
    const Vector<Scalar> coef = gram.ldlt().solve(rhs);
    Vector<Scalar> grad = Vector<Scalar>::Zero(p.size());
    for (Index i = 0; i < k; ++i) grad += coef[i] * dirs[static_cast<std::size_t>(i)].score();
    return BundleElement<Scalar>(p, grad);
}

// |d/dt G(gamma(t)) - <grad G, score>_gamma|, the defining identity of the
// natural gradient checked by a finite-difference oracle. Expected ~ 0.
template <typename Scalar>
Scalar directional_derivative_check(const Functional<Scalar>& g, const ParamCurve<Scalar>& curve,
                                    Scalar t) {
    const ScoreResult<Scalar> sr = score(curve, t);
    const BundleElement<Scalar> grad = natural_gradient(g, sr.base);
    const Scalar pairing = inner_product(sr.base, grad, sr.score);

    Scalar h = default_fd_step(t);
    h = std::min(h, std::min(t - curve.t_min, curve.t_max - t));
    if (!(h > Scalar(0))) throw OutOfDomain("directional_derivative_check: t at domain end");
    const Scalar fd =
        fd_derivative<Scalar>([&](Scalar s) { return g.value(curve.at(s)); }, t, h);
    return std::abs(fd - pairing);
}

// ============================================================================
// Entropy
// ============================================================================

template <typename Scalar>
Scalar entropy(const ProbabilityVector<Scalar>& p) {
    Scalar h = Scalar(0);
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) h -= p[i] * std::log(p[i]);
    return h;
}

// Natural gradient of the entropy: -log p - H(p) on the support, 0 off. It
// vanishes exactly when p is uniform on its support (maximum entropy).
template <typename Scalar>
BundleElement<Scalar> entropy_gradient(const ProbabilityVector<Scalar>& p) {
    const Scalar h = entropy(p);
    Vector<Scalar> s = Vector<Scalar>::Zero(p.size());
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) s[i] = -std::log(p[i]) - h;
    return BundleElement<Scalar>(p, s);
}

// dH/dt along the curve: sum of -(log gamma + 1) gamma'. A cell with zero
// weight and zero velocity contributes 0 (the compensated limit at an
// isolated tangential zero); zero weight with nonzero velocity is a
// one-sided contact where dH/dt diverges.
template <typename Scalar>
Scalar entropy_production(const ParamCurve<Scalar>& curve, Scalar t,
                          Scalar ac_threshold = Scalar(tol::abs_continuity)) {
    const ProbabilityVector<Scalar> p = curve.at(t);
    const ContrastVector<Scalar> v = velocity(curve, t);
    Scalar acc = Scalar(0);
    for (Index i = 0; i < p.size(); ++i) {
        if (p.in_support(i)) {
            acc -= (std::log(p[i]) + Scalar(1)) * v[i];
        } else if (std::abs(v[i]) > ac_threshold) {
            throw AbsoluteContinuityViolation("entropy_production: cell '" + p.space().label(i) +
                                              "' has zero weight but velocity " +
                                              std::to_string(v[i]));
        }
    }
    return acc;
}

// Cramer-Rao pair at gamma(t) for the statistic g:
//   lhs = Cov(score, g)^2 = (d/dt E[g])^2,  rhs = FisherInfo * Var(g).
// Always lhs <= rhs (Cauchy-Schwarz), with equality iff g is collinear with
// the score on the support.
template <typename Scalar>
std::pair<Scalar, Scalar> cramer_rao_gap(const ParamCurve<Scalar>& curve, const Vector<Scalar>& g,
                                         Scalar t) {
    const ScoreResult<Scalar> sr = score(curve, t);
    const ProbabilityVector<Scalar>& p = sr.base;
    const Scalar mg = expectation(p, g);
    Scalar cov = Scalar(0), info = Scalar(0), var_g = Scalar(0);
    for (Index i = 0; i < p.size(); ++i) {
        if (!p.in_support(i)) continue;
        cov += p[i] * sr.score[i] * (g[i] - mg);
        info += p[i] * sr.score[i] * sr.score[i];
        var_g += p[i] * (g[i] - mg) * (g[i] - mg);
    }
    return {cov * cov, info * var_g};
}

// ============================================================================
// Natural-gradient flow
// ============================================================================

enum class FlowDirection { Ascent, Descent };

template <typename Scalar>
struct FlowPoint {
    Scalar t;  // accumulated step length
    ProbabilityVector<Scalar> point;
    Scalar grad_norm;
    Scalar value;
};

template <typename Scalar>
struct FlowTrajectory {
    std::vector<FlowPoint<Scalar>> points;
    Scalar step;
    FlowDirection direction;
    bool converged = false;
};

// Explicit Euler in the exponential chart: p_{k+1} is the exponential
// geodesic from p_k in the (signed) gradient direction, so every iterate
// keeps the support of p_0. Armijo-style step halving enforces monotone
// improvement; a step rejected after 30 halvings aborts the flow.
template <typename Scalar>
FlowTrajectory<Scalar> natural_gradient_flow(const Functional<Scalar>& g,
                                             const ProbabilityVector<Scalar>& p0, Scalar step,
                                             int n_steps, FlowDirection direction,
                                             Scalar grad_norm_tol = Scalar(1e-8)) {
    if (!(step > Scalar(0))) throw Error("natural_gradient_flow: step must be positive");
    if (p0.is_vertex())
        throw GradientUnavailable("natural_gradient_flow: cannot start at a vertex");

    constexpr int kMaxHalvings = 30;
    constexpr Scalar kArmijo = Scalar(1e-4);
    const Scalar sign = direction == FlowDirection::Ascent ? Scalar(1) : Scalar(-1);

    FlowTrajectory<Scalar> traj;
    traj.step = step;
    traj.direction = direction;

    ProbabilityVector<Scalar> p = p0;
    BundleElement<Scalar> grad = natural_gradient(g, p);
    Scalar gnorm = fibre_norm(grad);
    Scalar value = g.value(p);
    Scalar tacc = Scalar(0);
    traj.points.push_back({tacc, p, gnorm, value});

    for (int k = 0; k < n_steps; ++k) {
        if (gnorm < grad_norm_tol) {
            traj.converged = true;
            break;
        }
        const ExpGeodesic<Scalar> ray(p, grad);
        Scalar h = step;
        bool accepted = false;
        for (int halving = 0; halving <= kMaxHalvings; ++halving) {
            const ProbabilityVector<Scalar> candidate = ray.point(sign * h);
            const Scalar candidate_value = g.value(candidate);
            if (sign * (candidate_value - value) >= kArmijo * h * gnorm * gnorm) {
                p = candidate;
                value = candidate_value;
                tacc += h;
                accepted = true;
                break;
            }
            h /= 2;
        }
        if (!accepted)
            throw StepRejected("natural_gradient_flow: no improvement after " +
                               std::to_string(kMaxHalvings) + " halvings at iterate " +
                               std::to_string(k));
        grad = natural_gradient(g, p);
        gnorm = fibre_norm(grad);
        traj.points.push_back({tacc, p, gnorm, value});
        if (gnorm < grad_norm_tol) {
            traj.converged = true;
            break;
        }
    }
    return traj;
}

// ============================================================================
// Stock functionals
// ============================================================================

template <typename Scalar>
Functional<Scalar> expectation_functional(const Vector<Scalar>& g) {
    Functional<Scalar> f;
    f.name = "expectation";
    f.value = [g](const ProbabilityVector<Scalar>& p) { return expectation(p, g); };
    f.euclidean_gradient = [g](const ProbabilityVector<Scalar>&) { return g; };
    return f;
}

template <typename Scalar>
Functional<Scalar> entropy_functional() {
    Functional<Scalar> f;
    f.name = "entropy";
    f.value = [](const ProbabilityVector<Scalar>& p) { return entropy(p); };
    // Support-aware: -log p - 1 on supp p; the placeholder 0 off the support
    // is discarded by the centring canonicalization.
    f.euclidean_gradient = [](const ProbabilityVector<Scalar>& p) {
        Vector<Scalar> grad = Vector<Scalar>::Zero(p.size());
        for (Index i = 0; i < p.size(); ++i)
            if (p.in_support(i)) grad[i] = -std::log(p[i]) - Scalar(1);
        return grad;
    };
    return f;
}

}  // namespace sbundle
