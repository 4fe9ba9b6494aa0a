#pragma once

// Exponential and mixture parallel transports with their support rules, the
// exponential displacement chart, cumulant function, KL divergence, and
// closed-form exponential geodesics.
//
// Support rules follow each formula's own domain:
//   * the exponential transport is defined for any pair (it only re-centres);
//   * the mixture transport (p/q ratio) needs supp p nested in supp q,
//     except at cells where u is already zero;
//   * the displacement s_p(q) needs supp p = supp q exactly;
//   * KL(p||q) needs supp p nested in supp q.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sbundle/curves.hpp"
#include "sbundle/errors.hpp"
#include "sbundle/finite_difference.hpp"
#include "sbundle/simplex.hpp"

namespace sbundle {

// ============================================================================
// Parallel transports
// ============================================================================

// Exponential transport U^e_{p,q} u = u - E_q[u], canonical at q.
template <typename Scalar>
BundleElement<Scalar> e_transport(const ProbabilityVector<Scalar>& p,
                                  const ProbabilityVector<Scalar>& q,
                                  const BundleElement<Scalar>& u) {
    if (u.base() != p) throw BaseMismatch("e_transport: u not based at p");
    if (q.space() != p.space()) throw BaseMismatch("e_transport: different sample spaces");
    return center(u.score(), q);
}

// Mixture transport, defined by p u = q v: v = (p/q) u on supp p, 0 on the
// cells q gains. A cell in supp p \ supp q with nonzero u is inconsistent.
template <typename Scalar>
BundleElement<Scalar> m_transport(const ProbabilityVector<Scalar>& p,
                                  const ProbabilityVector<Scalar>& q,
                                  const BundleElement<Scalar>& u,
                                  Scalar zero_tol = Scalar(tol::bundle)) {
    if (u.base() != p) throw BaseMismatch("m_transport: u not based at p");
    if (q.space() != p.space()) throw BaseMismatch("m_transport: different sample spaces");
    Vector<Scalar> v = Vector<Scalar>::Zero(q.size());
    for (Index i = 0; i < p.size(); ++i) {
        if (p.in_support(i)) {
            if (q.in_support(i)) {
                v[i] = p[i] * u[i] / q[i];
            } else if (std::abs(u[i]) > zero_tol) {
                throw SupportNotNested("m_transport: cell '" + p.space().label(i) +
                                       "' is in supp p but not supp q with u != 0");
            }
        }
    }
    return BundleElement<Scalar>(q, v);
}

// ============================================================================
// Displacement chart, cumulant, KL
// ============================================================================

// Exponential displacement s_p(q) = log(q/p) - E_p[log(q/p)], the chart
// centred at p. Requires equal supports.
template <typename Scalar>
BundleElement<Scalar> displacement(const ProbabilityVector<Scalar>& p,
                                   const ProbabilityVector<Scalar>& q) {
    if (q.space() != p.space()) throw BaseMismatch("displacement: different sample spaces");
    Vector<Scalar> logratio = Vector<Scalar>::Zero(p.size());
    for (Index i = 0; i < p.size(); ++i) {
        if (p.in_support(i) != q.in_support(i))
            throw SupportMismatch("displacement: supp p != supp q at cell '" +
                                  p.space().label(i) + "'");
        if (p.in_support(i)) logratio[i] = std::log(q[i] / p[i]);
    }
    return center(logratio, p);
}

// Chart of the simplex face through `origin`.
template <typename Scalar>
struct DisplacementChart {
    ProbabilityVector<Scalar> origin;
    BundleElement<Scalar> at(const ProbabilityVector<Scalar>& q) const {
        return displacement(origin, q);
    }
};

// Cumulant K_p(u) = log E_p[e^u], evaluated over supp p with a max shift so
// large fibre directions cannot overflow. Defined for any u; values off
// supp p never enter (the cumulant is a statistical Lagrangian).
template <typename Scalar>
Scalar cumulant(const ProbabilityVector<Scalar>& p, const Vector<Scalar>& u) {
    if (u.size() != p.size()) throw Error("cumulant: length mismatch");
    Scalar m = -std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) m = std::max(m, u[i]);
    Scalar acc = Scalar(0);
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) acc += p[i] * std::exp(u[i] - m);
    return m + std::log(acc);
}

template <typename Scalar>
Scalar cumulant(const ProbabilityVector<Scalar>& p, const BundleElement<Scalar>& u) {
    if (u.base() != p) throw BaseMismatch("cumulant: u not based at p");
    return cumulant(p, u.score());
}

// KL(p||q) = sum over supp p of p log(p/q); needs supp p nested in supp q.
template <typename Scalar>
Scalar kl(const ProbabilityVector<Scalar>& p, const ProbabilityVector<Scalar>& q) {
    if (q.space() != p.space()) throw BaseMismatch("kl: different sample spaces");
    Scalar acc = Scalar(0);
    for (Index i = 0; i < p.size(); ++i) {
        if (!p.in_support(i)) continue;
        if (!q.in_support(i))
            throw SupportNotNested("kl: cell '" + p.space().label(i) + "' in supp p but not supp q");
        acc += p[i] * std::log(p[i] / q[i]);
    }
    return acc;
}

// ============================================================================
// Exponential geodesics
// ============================================================================

// q(t) = e^{t u - psi(t)} . q(0): the one-dimensional exponential family
// through the base point with direction u in the fibre. The support of every
// point equals supp q(0), and psi(t) = KL(q(0) || q(t)).
template <typename Scalar>
class ExpGeodesic {
  public:
    ExpGeodesic(ProbabilityVector<Scalar> base, BundleElement<Scalar> direction)
        : base_(std::move(base)), direction_(std::move(direction)) {
        if (direction_.base() != base_) throw BaseMismatch("ExpGeodesic: direction not based at base");
    }

    const ProbabilityVector<Scalar>& base() const { return base_; }
    const BundleElement<Scalar>& direction() const { return direction_; }

    // psi(t) = log E_base[e^{t u}]; max-shifted log-sum-exp.
    Scalar psi(Scalar t) const { return cumulant(base_, (t * direction_.score()).eval()); }

    ProbabilityVector<Scalar> point(Scalar t) const {
        const Scalar shift = psi(t);
        Vector<Scalar> w = Vector<Scalar>::Zero(base_.size());
        for (Index i = 0; i < base_.size(); ++i)
            if (base_.in_support(i)) w[i] = base_[i] * std::exp(t * direction_[i] - shift);
        return ProbabilityVector<Scalar>(base_.space(), std::move(w),
                                         Scalar(tol::normalization), base_.support_tol());
    }

  private:
    ProbabilityVector<Scalar> base_;
    BundleElement<Scalar> direction_;
};

template <typename Scalar>
ProbabilityVector<Scalar> exp_geodesic_point(const ExpGeodesic<Scalar>& g, Scalar t) {
    return g.point(t);
}

// Residual of the geodesic equation
//     dq/dt = (u - E_{q(t)}[u]) q(t)
// at a point, measured against a finite difference of the closed form.
// Self-test value, expected ~ 0.
template <typename Scalar>
Scalar geodesic_ode_residual(const ExpGeodesic<Scalar>& g, Scalar t) {
    const Scalar h = default_fd_step(t);
    const Vector<Scalar> fd =
        fd_derivative_vec<Scalar>([&g](Scalar s) { return g.point(s).weights(); }, t, h);
    const ProbabilityVector<Scalar> q = g.point(t);
    const Scalar mean = expectation(q, g.direction().score());
    Vector<Scalar> rhs = Vector<Scalar>::Zero(q.size());
    for (Index i = 0; i < q.size(); ++i)
        if (q.in_support(i)) rhs[i] = (g.direction()[i] - mean) * q[i];
    return (fd - rhs).template lpNorm<Eigen::Infinity>();
}

// |<U^m_{p,q} u, w>_q - <u, U^e_{q,p} w>_p|: the transports are adjoint for
// the covariance pairing, so this is zero up to rounding.
template <typename Scalar>
Scalar duality_gap(const ProbabilityVector<Scalar>& p, const ProbabilityVector<Scalar>& q,
                   const BundleElement<Scalar>& u, const BundleElement<Scalar>& w) {
    const Scalar lhs = inner_product(q, m_transport(p, q, u), w);
    const Scalar rhs = inner_product(p, u, e_transport(q, p, w));
    return std::abs(lhs - rhs);
}

// ============================================================================
// Cumulant flow derivative
// ============================================================================

// d/dt K_{gamma(t)}(u(t)) = E_{gamma^u(t)}[ score(t) + u'(t) ]  where
// gamma^u(t) = e^{u(t) - K} . gamma(t). The u-curve is differentiated by
// finite differences.
template <typename Scalar>
Scalar cumulant_flow_derivative(const ParamCurve<Scalar>& curve,
                                const std::function<Vector<Scalar>(Scalar)>& u_curve, Scalar t,
                                Scalar fd_step = Scalar(0)) {
    const ScoreResult<Scalar> sr = score(curve, t);
    const Vector<Scalar> u = u_curve(t);
    const Scalar h = fd_step > Scalar(0) ? fd_step : default_fd_step(t);
    const Vector<Scalar> u_dot = fd_derivative_vec<Scalar>(u_curve, t, h);

    const ProbabilityVector<Scalar>& p = sr.base;
    const Scalar k = cumulant(p, u);
    Scalar acc = Scalar(0);
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i))
            acc += p[i] * std::exp(u[i] - k) * (sr.score[i] + u_dot[i]);
    return acc;
}

}  // namespace sbundle
