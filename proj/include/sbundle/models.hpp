#pragma once

// Built-in one-parameter models: a line hitting a vertex and a face, the
// entropy example with an isolated tangential zero, mixtures, the
// Boltzmann-Gibbs curve with exponential-order boundary contact, and the
// 2x2 contingency-table curves (independence, marginal homogeneity) that
// live inside binomial varieties. Each entry carries its known linear score
// relations so test harnesses can run relation residuals automatically.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbundle/curves.hpp"
#include "sbundle/errors.hpp"
#include "sbundle/score_form.hpp"
#include "sbundle/simplex.hpp"

namespace sbundle {

// ============================================================================
// Specs
// ============================================================================

// Boltzmann-Gibbs data: gamma(x; beta) proportional to exp(-U(x)/beta^2 + beta V(x)).
// U >= 0 with min U = 0, so the beta -> 0 limit is uniform on {U = 0}.
template <typename Scalar>
struct GibbsSpec {
    SampleSpace space;
    Vector<Scalar> u;
    Vector<Scalar> v;

    GibbsSpec(SampleSpace space_, Vector<Scalar> u_, Vector<Scalar> v_)
        : space(std::move(space_)), u(std::move(u_)), v(std::move(v_)) {
        if (u.size() != space.size() || v.size() != space.size())
            throw Error("GibbsSpec: U/V length mismatch");
        if (u.minCoeff() != Scalar(0) || (u.array() < Scalar(0)).any())
            throw Error("GibbsSpec: U must be nonnegative with min U = 0");
    }
};

template <typename Scalar>
struct MixtureSpec {
    ProbabilityVector<Scalar> p;
    ProbabilityVector<Scalar> q;

    MixtureSpec(ProbabilityVector<Scalar> p_, ProbabilityVector<Scalar> q_)
        : p(std::move(p_)), q(std::move(q_)) {
        if (p.space() != q.space()) throw BaseMismatch("MixtureSpec: different sample spaces");
    }
};

// Below this |beta| the cells with U > 0 are evaluated as exactly zero and
// the {U = 0} block as the plain V-exponential family; exp(-U/beta^2) is
// smaller than 1e-170 there, beyond double resolution of the other weights.
inline constexpr double gibbs_beta_switch = 0.05;

// ============================================================================
// Curves
// ============================================================================

// (t, t, 1 - 2t) on [0, 1/2]: hits the vertex (0,0,1) at t = 0 and the face
// {p3 = 0} at t = 1/2, both transversally. Satisfies p1 - p2 = 0 = p3 + 2p1 - 1.
template <typename Scalar = double>
ParamCurve<Scalar> line_model() {
    ParamCurve<Scalar> c;
    c.space = SampleSpace::numbered(3);
    c.t_min = Scalar(0);
    c.t_max = Scalar(0.5);
    c.eval = [](Scalar t) {
        Vector<Scalar> w(3);
        w << t, t, 1 - 2 * t;
        return w;
    };
    c.deriv = [](Scalar) {
        Vector<Scalar> v(3);
        v << 1, 1, -2;
        return v;
    };
    return c;
}

// (t, (t - 1/2)^2, 3/4 - t^2) on [0.1, 0.8]: isolated tangential zero of
// cell 2 at t = 1/2, where the entropy stays differentiable.
template <typename Scalar = double>
ParamCurve<Scalar> entropy_curve() {
    ParamCurve<Scalar> c;
    c.space = SampleSpace::numbered(3);
    c.t_min = Scalar(0.1);
    c.t_max = Scalar(0.8);
    c.eval = [](Scalar t) {
        Vector<Scalar> w(3);
        w << t, (t - Scalar(0.5)) * (t - Scalar(0.5)), Scalar(0.75) - t * t;
        return w;
    };
    c.deriv = [](Scalar t) {
        Vector<Scalar> v(3);
        v << 1, 2 * (t - Scalar(0.5)), -2 * t;
        return v;
    };
    return c;
}

// (1 - t) p + t q on [0, 1], constant velocity q - p.
template <typename Scalar>
ParamCurve<Scalar> mixture_curve(const MixtureSpec<Scalar>& spec) {
    ParamCurve<Scalar> c;
    c.space = spec.p.space();
    c.t_min = Scalar(0);
    c.t_max = Scalar(1);
    const Vector<Scalar> p = spec.p.weights();
    const Vector<Scalar> q = spec.q.weights();
    c.eval = [p, q](Scalar t) { return ((1 - t) * p + t * q).eval(); };
    c.deriv = [p, q](Scalar) { return (q - p).eval(); };
    return c;
}

namespace detail {

// Gibbs weights; beta = 0 uses the explicit limit (uniform on {U = 0}), and
// |beta| below the switch drops the U > 0 cells entirely.
template <typename Scalar>
Vector<Scalar> gibbs_weights(const GibbsSpec<Scalar>& spec, Scalar beta) {
    const Index d = spec.space.size();
    Vector<Scalar> w = Vector<Scalar>::Zero(d);
    if (std::abs(beta) < Scalar(gibbs_beta_switch)) {
        Scalar z = Scalar(0);
        for (Index i = 0; i < d; ++i) {
            if (spec.u[i] == Scalar(0)) {
                w[i] = std::exp(beta * spec.v[i]);
                z += w[i];
            }
        }
        return (w / z).eval();
    }
    Vector<Scalar> e(d);
    for (Index i = 0; i < d; ++i) e[i] = -spec.u[i] / (beta * beta) + beta * spec.v[i];
    const Scalar shift = e.maxCoeff();
    Scalar z = Scalar(0);
    for (Index i = 0; i < d; ++i) {
        w[i] = std::exp(e[i] - shift);
        z += w[i];
    }
    return (w / z).eval();
}

// Natural-parameter statistic 2 U / beta^3 + V, whose centred version is the
// Fisher score of the Gibbs curve for beta != 0.
template <typename Scalar>
Vector<Scalar> gibbs_statistic(const GibbsSpec<Scalar>& spec, Scalar beta) {
    return (2 * spec.u / (beta * beta * beta) + spec.v).eval();
}

}  // namespace detail

// The Gibbs curve on beta in [-50, 50]. The derivative at |beta| below the
// switch uses the restricted V-family on {U = 0}: the U-driven part decays
// like exp(-1/beta^2) and is identically zero in that branch. Note the
// within-support derivative at beta = 0 is gamma(0) * (V - E_0[V]), which
// need not vanish; only the U > 0 cells have derivative zero there.
template <typename Scalar>
ParamCurve<Scalar> gibbs_curve(const GibbsSpec<Scalar>& spec) {
    ParamCurve<Scalar> c;
    c.space = spec.space;
    c.t_min = Scalar(-50);
    c.t_max = Scalar(50);
    c.eval = [spec](Scalar beta) { return detail::gibbs_weights(spec, beta); };
    c.deriv = [spec](Scalar beta) {
        const Index d = spec.space.size();
        const Vector<Scalar> w = detail::gibbs_weights(spec, beta);
        Vector<Scalar> stat;
        if (std::abs(beta) < Scalar(gibbs_beta_switch)) {
            stat = spec.v;  // U cells carry zero weight in this branch
        } else {
            stat = detail::gibbs_statistic(spec, beta);
        }
        Scalar mean = Scalar(0);
        for (Index i = 0; i < d; ++i)
            if (w[i] > Scalar(0)) mean += w[i] * stat[i];
        Vector<Scalar> dv = Vector<Scalar>::Zero(d);
        for (Index i = 0; i < d; ++i)
            if (w[i] > Scalar(0)) dv[i] = w[i] * (stat[i] - mean);
        return dv;
    };
    return c;
}

// Derivative of the Gibbs cumulant psi(beta) = log Z(beta):
// psi'(beta) = E_beta[2 U / beta^3 + V]. Undefined at beta = 0.
template <typename Scalar>
Scalar gibbs_cumulant_derivative(const GibbsSpec<Scalar>& spec, Scalar beta) {
    if (beta == Scalar(0))
        throw BetaZero("gibbs_cumulant_derivative: psi'(0) is not defined pointwise");
    const Vector<Scalar> w = detail::gibbs_weights(spec, beta);
    Scalar acc = Scalar(0);
    if (std::abs(beta) < Scalar(gibbs_beta_switch)) {
        // U > 0 cells carry zero weight; their 2U/beta^3 term is suppressed
        // (it decays like exp(-1/beta^2) / beta^3).
        for (Index i = 0; i < w.size(); ++i)
            if (w[i] > Scalar(0)) acc += w[i] * spec.v[i];
        return acc;
    }
    const Vector<Scalar> stat = detail::gibbs_statistic(spec, beta);
    for (Index i = 0; i < w.size(); ++i) acc += w[i] * stat[i];
    return acc;
}

// Reparametrization t -> theta(t) for the contingency-table curves.
template <typename Scalar>
struct ThetaPath {
    std::function<Scalar(Scalar)> value;
    std::function<Scalar(Scalar)> deriv;  // optional

    static ThetaPath identity() {
        return ThetaPath{[](Scalar t) { return t; }, [](Scalar) { return Scalar(1); }};
    }
};

// Product-measure curve (theta, 1-theta) x (1/3, 2/3) on the 2x2 table,
// inside the independence variety p11 p22 - p12 p21 = 0. Domain [0, 1];
// theta in (0, 1) keeps it interior.
template <typename Scalar = double>
ParamCurve<Scalar> independence_curve(const ThetaPath<Scalar>& path = ThetaPath<Scalar>::identity()) {
    ParamCurve<Scalar> c;
    c.space = SampleSpace::table2x2();
    c.t_min = Scalar(0);
    c.t_max = Scalar(1);
    const Scalar c1 = Scalar(1) / Scalar(3);
    const Scalar c2 = Scalar(2) / Scalar(3);
    auto theta = path.value;
    c.eval = [theta, c1, c2](Scalar t) {
        const Scalar th = theta(t);
        Vector<Scalar> w(4);
        w << th * c1, th * c2, (1 - th) * c1, (1 - th) * c2;
        return w;
    };
    if (path.deriv) {
        auto dtheta = path.deriv;
        c.deriv = [dtheta, c1, c2](Scalar t) {
            const Scalar dth = dtheta(t);
            Vector<Scalar> v(4);
            v << dth * c1, dth * c2, -dth * c1, -dth * c2;
            return v;
        };
    }
    return c;
}

// Independence with marginal homogeneity, collapsed to the three cells
// {11, 12, 22}: the normalized curve
//   ((1-theta)^2, theta(1-theta), theta^2) / (1 - theta + theta^2),
// which lies in V(p11 p22 - p12^2) exactly (the variety is toric, so the
// normalization drops out) and satisfies s11 - 2 s12 + s22 = 0.
template <typename Scalar = double>
ParamCurve<Scalar> marginal_homogeneity_curve() {
    ParamCurve<Scalar> c;
    c.space = SampleSpace({"11", "12", "22"});
    c.t_min = Scalar(0);
    c.t_max = Scalar(1);
    c.eval = [](Scalar th) {
        Vector<Scalar> w(3);
        w << (1 - th) * (1 - th), th * (1 - th), th * th;
        const Scalar n = 1 - th + th * th;
        return (w / n).eval();
    };
    c.deriv = [](Scalar th) {
        Vector<Scalar> w(3), dw(3);
        w << (1 - th) * (1 - th), th * (1 - th), th * th;
        dw << -2 * (1 - th), 1 - 2 * th, 2 * th;
        const Scalar n = 1 - th + th * th;
        const Scalar dn = 2 * th - 1;
        return ((dw * n - w * dn) / (n * n)).eval();
    };
    return c;
}

// ============================================================================
// Registry
// ============================================================================

template <typename Scalar>
struct ZooCurve {
    std::string name;
    ParamCurve<Scalar> curve;
    std::vector<LinearScoreForm> score_relations;  // relations satisfied on interior points
    std::string support_note;                      // expected support pattern
};

inline std::vector<std::string> zoo_names() {
    return {"line", "entropy3", "mixture", "gibbs", "indep2x2", "marghomo"};
}

template <typename Scalar = double>
MixtureSpec<Scalar> default_mixture_spec() {
    const SampleSpace space = SampleSpace::numbered(3);
    Vector<Scalar> p(3), q(3);
    p << Scalar(0.5), Scalar(0.5), Scalar(0);
    q << Scalar(0.25), Scalar(0.25), Scalar(0.5);
    return MixtureSpec<Scalar>(make_distribution(space, p), make_distribution(space, q));
}

template <typename Scalar = double>
GibbsSpec<Scalar> default_gibbs_spec() {
    const SampleSpace space = SampleSpace::numbered(3);
    Vector<Scalar> u(3), v(3);
    u << 0, 0, 1;
    v << Scalar(0), Scalar(1), Scalar(1.8);
    return GibbsSpec<Scalar>(space, u, v);
}

template <typename Scalar = double>
ZooCurve<Scalar> make_zoo_curve(const std::string& name,
                                const std::optional<MixtureSpec<Scalar>>& mixture = std::nullopt,
                                const std::optional<GibbsSpec<Scalar>>& gibbs = std::nullopt) {
    if (name == "line")
        return {name, line_model<Scalar>(), {}, "vertex at t=0, face {p3=0} at t=1/2"};
    if (name == "entropy3")
        return {name, entropy_curve<Scalar>(), {}, "isolated tangential zero of cell 2 at t=1/2"};
    if (name == "mixture") {
        const MixtureSpec<Scalar> spec = mixture ? *mixture : default_mixture_spec<Scalar>();
        return {name, mixture_curve(spec), {}, "supp = supp p + supp q on (0,1)"};
    }
    if (name == "gibbs") {
        const GibbsSpec<Scalar> spec = gibbs ? *gibbs : default_gibbs_spec<Scalar>();
        return {name, gibbs_curve(spec), {},
                "exponential-order contact of {U>0} cells at beta=0; vertices as beta -> +-inf"};
    }
    if (name == "indep2x2") {
        Eigen::VectorXi coef(4);
        coef << 1, -1, -1, 1;
        const ParamCurve<Scalar> curve = independence_curve<Scalar>();
        return {name, curve, {LinearScoreForm(curve.space, coef)}, "interior for theta in (0,1)"};
    }
    if (name == "marghomo") {
        Eigen::VectorXi coef(3);
        coef << 1, -2, 1;
        const ParamCurve<Scalar> curve = marginal_homogeneity_curve<Scalar>();
        return {name, curve, {LinearScoreForm(curve.space, coef)},
                "vertices at theta = 0, 1; interior otherwise"};
    }
    throw Error("unknown model '" + name + "'");
}

template <typename Scalar = double>
std::vector<ZooCurve<Scalar>> standard_zoo() {
    std::vector<ZooCurve<Scalar>> zoo;
    for (const auto& name : zoo_names()) zoo.push_back(make_zoo_curve<Scalar>(name));
    return zoo;
}

}  // namespace sbundle
