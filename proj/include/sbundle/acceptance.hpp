#pragma once

// Acceptance suite: one check per shipped guarantee, each printing measured
// vs expected. Run through the `verify` CLI subcommand or the acceptance
// test binary. Every tolerance is pinned here, including the wall-time
// budgets. Randomized checks draw from a seeded generator so runs are
// reproducible; the seed is the `verify --seed` flag.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sbundle/curves.hpp"
#include "sbundle/models.hpp"
#include "sbundle/natural_gradient.hpp"
#include "sbundle/polynomial.hpp"
#include "sbundle/simplex.hpp"
#include "sbundle/transport.hpp"

namespace sbundle::acceptance {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string measured;
    std::string expected;
    double seconds = 0;
};

namespace detail {

inline std::string fmt(const char* format, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), format, a, b, c);
    return buf;
}

struct Draw {
    std::mt19937_64 gen;
    explicit Draw(std::uint64_t seed) : gen(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }

    Vector<double> vector(Index d, double lo, double hi) {
        Vector<double> v(d);
        for (Index i = 0; i < d; ++i) v[i] = uniform(lo, hi);
        return v;
    }

    std::vector<bool> support(Index d, Index min_count) {
        std::vector<bool> s(static_cast<std::size_t>(d), false);
        Index count = 0;
        while (count < min_count) {
            s.assign(static_cast<std::size_t>(d), false);
            count = 0;
            for (Index i = 0; i < d; ++i)
                if (uniform(0, 1) < 0.65) {
                    s[static_cast<std::size_t>(i)] = true;
                    ++count;
                }
        }
        return s;
    }

    // keeps every support weight well above the support tolerance
    Vector<double> simplex_point(const std::vector<bool>& supp) {
        const Index d = static_cast<Index>(supp.size());
        Vector<double> w = Vector<double>::Zero(d);
        double sum = 0;
        Index k = 0;
        for (Index i = 0; i < d; ++i) {
            if (!supp[static_cast<std::size_t>(i)]) continue;
            w[i] = -std::log(uniform(1e-12, 1.0));
            sum += w[i];
            ++k;
        }
        for (Index i = 0; i < d; ++i)
            if (supp[static_cast<std::size_t>(i)]) w[i] = 0.5 * w[i] / sum + 0.5 / k;
        return w;
    }
};

// RK4 on the geodesic equation, the independent oracle for the closed form.
inline Vector<double> rk4_geodesic(const Vector<double>& u, Vector<double> y, double t1,
                                   int steps) {
    const auto rhs = [&u](const Vector<double>& q) {
        const double mean = u.dot(q);
        return Vector<double>(((u.array() - mean) * q.array()).matrix());
    };
    const double h = t1 / steps;
    for (int i = 0; i < steps; ++i) {
        const Vector<double> k1 = rhs(y);
        const Vector<double> k2 = rhs(y + (h / 2) * k1);
        const Vector<double> k3 = rhs(y + (h / 2) * k2);
        const Vector<double> k4 = rhs(y + h * k3);
        y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y;
}

struct InteriorRange {
    double lo;
    double hi;
};

inline InteriorRange interior_range(const std::string& name) {
    if (name == "line") return {0.01, 0.49};
    if (name == "entropy3") return {0.105, 0.795};
    if (name == "gibbs") return {-3.0, 3.0};
    return {0.005, 0.995};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// 1. Score identity on every zoo curve
// ---------------------------------------------------------------------------
inline CheckResult check_score_identity(std::uint64_t) {
    double worst_identity = 0, worst_mean = 0;
    for (const auto& entry : standard_zoo<double>()) {
        const auto [lo, hi] = detail::interior_range(entry.name);
        for (int i = 0; i < 200; ++i) {
            const double t = lo + i * (hi - lo) / 199.0;
            const auto sc = score(entry.curve, t);
            const auto vel = velocity(entry.curve, t);
            const Vector<double> recomposed =
                (sc.score.score().array() * sc.base.weights().array()).matrix();
            worst_identity = std::max(
                worst_identity, (vel.values() - recomposed).lpNorm<Eigen::Infinity>());
            worst_mean = std::max(worst_mean, std::abs(expectation(sc.base, sc.score.score())));
        }
    }
    CheckResult r;
    r.name = "score-identity";
    r.pass = worst_identity <= 1e-8 && worst_mean <= 1e-8;
    r.measured = detail::fmt("max |vdot - s*g| = %.3g, max |E[s]| = %.3g", worst_identity,
                             worst_mean);
    r.expected = "both <= 1e-8 on 200 interior points per zoo curve";
    return r;
}

// ---------------------------------------------------------------------------
// 2. Entropy production compensation at the tangential hit
// ---------------------------------------------------------------------------
inline CheckResult check_entropy_compensation(std::uint64_t) {
    const auto ent = entropy_curve<double>();
    const double at_half = entropy_production(ent, 0.5);
    const auto closed_form = [](double t) {
        return -(std::log(t) + 2 * (t - 0.5) * std::log((t - 0.5) * (t - 0.5)) -
                 2 * t * std::log(0.75 - t * t));
    };
    double worst = 0;
    for (const double t : {0.15, 0.3, 0.45, 0.6, 0.75})
        worst = std::max(worst, std::abs(entropy_production(ent, t) - closed_form(t)));
    CheckResult r;
    r.name = "entropy-compensation";
    r.pass = std::abs(at_half) <= 1e-9 && worst <= 1e-9;
    r.measured = detail::fmt("dH/dt(0.5) = %.3g, max gap to closed form = %.3g", at_half, worst);
    r.expected = "|dH/dt(0.5)| <= 1e-9 and closed-form agreement <= 1e-9";
    return r;
}

// ---------------------------------------------------------------------------
// 3. Gibbs boundary contacts
// ---------------------------------------------------------------------------
inline CheckResult check_gibbs_boundary(std::uint64_t) {
    const auto curve = gibbs_curve(default_gibbs_spec<double>());
    const auto w0 = curve.eval(0.0);
    const bool exact_limit = w0[0] == 0.5 && w0[1] == 0.5 && w0[2] == 0.0;

    bool contact = true;
    double worst_ratio = 0;
    for (const double beta : {0.1, 0.2, 0.3}) {
        const double w3 = curve.eval(beta)[2];
        const double bound = std::exp(-1.0 / (beta * beta));
        contact = contact && w3 <= bound;
        worst_ratio = std::max(worst_ratio, w3 / bound);
    }
    const double top = curve.eval(50.0)[2];
    const double bottom = curve.eval(-50.0)[0];
    const bool vertices = top >= 1.0 - 1e-8 && bottom >= 1.0 - 1e-8;

    CheckResult r;
    r.name = "gibbs-boundary";
    r.pass = exact_limit && contact && vertices;
    r.measured = std::string("gamma(0) exact: ") + (exact_limit ? "yes" : "NO") +
                 detail::fmt(", max w3/e^{-1/b^2} = %.3g, vertex mass = %.12g", worst_ratio,
                             std::min(top, bottom));
    r.expected = "gamma(0) = (1/2,1/2,0) exactly; w3 <= e^{-1/beta^2}; vertex mass >= 1 - 1e-8";
    return r;
}

// ---------------------------------------------------------------------------
// 4. Geodesic closed form vs RK4, psi = KL
// ---------------------------------------------------------------------------
inline CheckResult check_geodesic(std::uint64_t seed) {
    detail::Draw draw(seed * 7919 + 4);
    double worst_rk4 = 0, worst_psi = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index d = draw.uniform_int(2, 5);
        const SampleSpace space = SampleSpace::numbered(d);
        // every fourth trial has a defective support
        const auto supp = trial % 4 == 0 && d > 2 ? draw.support(d, 2)
                                                  : std::vector<bool>(static_cast<std::size_t>(d), true);
        const auto base = make_distribution(space, draw.simplex_point(supp));
        const auto dir = center(draw.vector(d, -2, 2), base);
        const ExpGeodesic<double> g(base, dir);
        for (const double t : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
            const int steps = static_cast<int>(std::ceil(std::abs(t) * 1024));
            const auto integrated = detail::rk4_geodesic(dir.score(), base.weights(), t, steps);
            worst_rk4 = std::max(
                worst_rk4, (integrated - g.point(t).weights()).lpNorm<Eigen::Infinity>());
            worst_psi = std::max(worst_psi, std::abs(g.psi(t) - kl(base, g.point(t))));
        }
    }
    CheckResult r;
    r.name = "geodesic";
    r.pass = worst_rk4 <= 1e-8 && worst_psi <= 1e-10;
    r.measured = detail::fmt("max |closed - RK4| = %.3g, max |psi - KL| = %.3g", worst_rk4,
                             worst_psi);
    r.expected = "RK4 gap <= 1e-8 and psi = KL gap <= 1e-10 on 50 random geodesics";
    return r;
}

// ---------------------------------------------------------------------------
// 5. Transport identity, composition, duality
// ---------------------------------------------------------------------------
inline CheckResult check_transport_laws(std::uint64_t seed) {
    detail::Draw draw(seed * 7919 + 5);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Index d = draw.uniform_int(3, 6);
        const SampleSpace space = SampleSpace::numbered(d);
        // nested supports A subset B subset C
        const auto sc = draw.support(d, 3);
        auto sb = sc;
        for (Index i = 0; i < d; ++i) {
            if (sb[static_cast<std::size_t>(i)] && std::count(sb.begin(), sb.end(), true) > 2) {
                sb[static_cast<std::size_t>(i)] = false;
                break;
            }
        }
        auto sa = sb;
        for (Index i = d - 1; i >= 0; --i) {
            if (sa[static_cast<std::size_t>(i)] && std::count(sa.begin(), sa.end(), true) > 2) {
                sa[static_cast<std::size_t>(i)] = false;
                break;
            }
        }
        const auto p = make_distribution(space, draw.simplex_point(sa));
        const auto q = make_distribution(space, draw.simplex_point(sb));
        const auto rr = make_distribution(space, draw.simplex_point(sc));
        const auto u = center(draw.vector(d, -3, 3), p);
        const auto w = center(draw.vector(d, -3, 3), q);
        const auto wr = center(draw.vector(d, -3, 3), rr);

        worst = std::max(worst,
                         (m_transport(p, p, u).score() - u.score()).lpNorm<Eigen::Infinity>());
        worst = std::max(worst,
                         (e_transport(p, p, u).score() - u.score()).lpNorm<Eigen::Infinity>());
        worst = std::max(worst, (m_transport(q, rr, m_transport(p, q, u)).score() -
                                 m_transport(p, rr, u).score())
                                    .lpNorm<Eigen::Infinity>());
        worst = std::max(worst, (e_transport(q, p, e_transport(rr, q, wr)).score() -
                                 e_transport(rr, p, wr).score())
                                    .lpNorm<Eigen::Infinity>());
        worst = std::max(worst, duality_gap(p, q, u, w));
    }
    CheckResult r;
    r.name = "transport-laws";
    r.pass = worst <= 1e-10;
    r.measured = detail::fmt("max gap over 1000 nested draws = %.3g", worst);
    r.expected = "identity, composition and duality gaps <= 1e-10";
    return r;
}

// ---------------------------------------------------------------------------
// 6. Natural-gradient defining identity
// ---------------------------------------------------------------------------
inline CheckResult check_natural_gradient(std::uint64_t) {
    Vector<double> stat(3);
    stat << 1, 0, 0;
    const auto funcs = {expectation_functional<double>(stat), entropy_functional<double>()};
    double worst = 0;
    for (const auto& name : {"line", "entropy3", "mixture", "gibbs"}) {
        const auto entry = make_zoo_curve<double>(name);
        double lo, hi;
        if (name == std::string("line")) {
            lo = 0.05;
            hi = 0.45;
        } else if (name == std::string("entropy3")) {
            lo = 0.13;
            hi = 0.77;
        } else if (name == std::string("gibbs")) {
            lo = -2;
            hi = 2;
        } else {
            lo = 0.05;
            hi = 0.95;
        }
        for (const auto& g : funcs) {
            for (int i = 0; i < 25; ++i) {
                const double t = lo + i * (hi - lo) / 24.0;
                worst = std::max(worst, directional_derivative_check(g, entry.curve, t));
            }
        }
    }
    CheckResult r;
    r.name = "natural-gradient";
    r.pass = worst <= 1e-6;
    r.measured = detail::fmt("max |d/dt G - <grad G, score>| = %.3g", worst);
    r.expected = "<= 1e-6 across {E[g], H} x {line, entropy3, mixture, gibbs} grids";
    return r;
}

// ---------------------------------------------------------------------------
// 7. Cramer-Rao
// ---------------------------------------------------------------------------
inline CheckResult check_cramer_rao(std::uint64_t seed) {
    const auto line = line_model<double>();
    Vector<double> g0(3);
    g0 << 1, 0, 0;
    const auto [lhs, rhs] = cramer_rao_gap(line, g0, 0.25);
    const bool worked = lhs == 1.0 && rhs == 3.0;

    detail::Draw draw(seed * 7919 + 7);
    const auto zoo = standard_zoo<double>();
    double worst_excess = -1e300;
    bool all_bounded = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto& entry = zoo[static_cast<std::size_t>(draw.uniform_int(0, 5))];
        const auto [lo, hi] = detail::interior_range(entry.name);
        const double t = draw.uniform(lo, hi);
        const auto g = draw.vector(entry.curve.space.size(), -2, 2);
        const auto [a, b] = cramer_rao_gap(entry.curve, g, t);
        worst_excess = std::max(worst_excess, a - b);
        all_bounded = all_bounded && a <= b + 1e-10;
    }
    CheckResult r;
    r.name = "cramer-rao";
    r.pass = worked && all_bounded;
    r.measured = detail::fmt("worked pair = (%.17g, %.17g), max lhs - rhs = %.3g", lhs, rhs,
                             worst_excess);
    r.expected = "(1, 3) exactly; lhs <= rhs + 1e-10 on 1000 draws";
    return r;
}

// ---------------------------------------------------------------------------
// 8. Entropy ascent flow on a face
// ---------------------------------------------------------------------------
inline CheckResult check_entropy_flow(std::uint64_t) {
    const SampleSpace space = SampleSpace::numbered(3);
    Vector<double> w0(3);
    w0 << 0.7, 0.3, 0;
    const auto traj = natural_gradient_flow(entropy_functional<double>(),
                                            make_distribution(space, w0), 0.5, 200,
                                            FlowDirection::Ascent);
    bool support_ok = true, monotone = true;
    double prev = -1;
    for (const auto& pt : traj.points) {
        support_ok = support_ok && pt.point.support().to_string() == "110";
        monotone = monotone && pt.value >= prev;
        prev = pt.value;
    }
    const auto& last = traj.points.back();
    const double gap =
        std::max(std::abs(last.point[0] - 0.5), std::abs(last.point[1] - 0.5));
    CheckResult r;
    r.name = "entropy-flow";
    r.pass = traj.converged && gap <= 1e-6 && support_ok && monotone && last.point[2] == 0.0;
    r.measured = detail::fmt("final gap to (1/2,1/2,0) = %.3g, grad norm = %.3g", gap,
                             last.grad_norm) +
                 (support_ok ? ", support invariant" : ", SUPPORT CHANGED") +
                 (monotone ? ", H monotone" : ", H NOT MONOTONE");
    r.expected = "converges within 1e-6, support 110 throughout, H nondecreasing";
    return r;
}

// ---------------------------------------------------------------------------
// 9. Algebra golden values and the Leibniz property
// ---------------------------------------------------------------------------
inline CheckResult check_algebra_golden(std::uint64_t seed) {
    const SampleSpace table = SampleSpace::table2x2();
    Eigen::VectorXi a1(4), b1(4);
    a1 << 1, 0, 0, 1;
    b1 << 0, 1, 1, 0;
    const bool indep_ok =
        binomial_score_relation(table, a1, b1).to_string() == "s11 - s12 - s21 + s22";

    const SampleSpace collapsed({"11", "12", "22"});
    Eigen::VectorXi a2(3), b2(3);
    a2 << 1, 0, 1;
    b2 << 0, 2, 0;
    const bool marghomo_ok =
        binomial_score_relation(collapsed, a2, b2).to_string() == "s11 - 2*s12 + s22";

    const RingPtr xyz = PolynomialRing::coefficients({"x", "y", "z"});
    const auto prod1 = face_product(contrast_basis(table), {"x", "y", "z"});
    const bool face1_ok = prod1 == parse_polynomial(xyz, "x^2*y*z + x*y^2*z + x*y*z^2");

    Vector<double> c12(4), c21(4), c22(4);
    c12 << 1, -1, 1, -1;
    c21 << 1, 1, -1, -1;
    c22 << 1, -1, -1, 1;
    const std::vector<ContrastVector<double>> basis2 = {
        ContrastVector<double>(table, c12), ContrastVector<double>(table, c21),
        ContrastVector<double>(table, c22)};
    const auto expected2 = parse_polynomial(xyz, "x + y + z") *
                           parse_polynomial(xyz, "-x + y - z") *
                           parse_polynomial(xyz, "x - y - z") *
                           parse_polynomial(xyz, "-x - y + z");
    const bool face2_ok = face_product(basis2, {"x", "y", "z"}) == expected2;

    const SampleSpace three = SampleSpace::numbered(3);
    const RingPtr ring = PolynomialRing::score_ring(three);
    const auto system = model_tangent_system(
        {parse_polynomial(ring, "p1 - p2"), parse_polynomial(ring, "p3 + 2*p1 - 1")}, three);
    const auto contains = [&system](const RationalPolynomial& f) {
        for (const auto& g : system)
            if (g == f) return true;
        return false;
    };
    const bool system_ok = contains(parse_polynomial(ring, "s1*p1 - s2*p2")) &&
                           contains(parse_polynomial(ring, "s3*p3 + 2*s1*p1"));

    detail::Draw draw(seed * 7919 + 9);
    bool leibniz_ok = true;
    for (int trial = 0; trial < 500 && leibniz_ok; ++trial) {
        const auto random_poly = [&draw, &ring, &three]() {
            RationalPolynomial f(ring);
            const int terms = draw.uniform_int(1, 4);
            for (int k = 0; k < terms; ++k) {
                ExponentVec e(static_cast<std::size_t>(ring->nvars()), 0u);
                for (Index x = 0; x < three.size(); ++x)
                    e[static_cast<std::size_t>(ring->var(VarKind::P, x))] =
                        static_cast<unsigned>(draw.uniform_int(0, 3));
                f.add_term(std::move(e), Rational(draw.uniform_int(-6, 6), draw.uniform_int(1, 5)));
            }
            return f;
        };
        const auto f = random_poly();
        const auto g = random_poly();
        leibniz_ok = derive(f * g) == derive(f) * g + f * derive(g);
    }

    CheckResult r;
    r.name = "algebra-golden";
    r.pass = indep_ok && marghomo_ok && face1_ok && face2_ok && system_ok && leibniz_ok;
    r.measured = std::string("indep=") + (indep_ok ? "ok" : "FAIL") +
                 ", marghomo=" + (marghomo_ok ? "ok" : "FAIL") +
                 ", faces=" + (face1_ok && face2_ok ? "ok" : "FAIL") +
                 ", line system=" + (system_ok ? "ok" : "FAIL") +
                 ", leibniz x500=" + (leibniz_ok ? "ok" : "FAIL");
    r.expected = "all golden identities exact in rational arithmetic";
    return r;
}

// ---------------------------------------------------------------------------
// 10. Score relation residuals inside and outside the varieties
// ---------------------------------------------------------------------------
inline CheckResult check_relation_residuals(std::uint64_t) {
    std::vector<double> grid;
    for (int i = 0; i <= 60; ++i) grid.push_back(0.1 + i * 0.8 / 60.0);

    const auto indep = make_zoo_curve<double>("indep2x2");
    const auto marghomo = make_zoo_curve<double>("marghomo");
    const double r1 = relation_residual(indep.score_relations[0], indep.curve, grid);
    const double r2 = relation_residual(marghomo.score_relations[0], marghomo.curve, grid);

    // negative control: a curve outside the independence variety
    ParamCurve<double> twisted;
    twisted.space = SampleSpace::table2x2();
    twisted.t_min = 0;
    twisted.t_max = 1;
    twisted.eval = [](double t) {
        Vector<double> w(4);
        w << t / 2, (1 - t) / 2, (1 - t) / 2, t / 2;
        return w;
    };
    twisted.deriv = [](double) {
        Vector<double> v(4);
        v << 0.5, -0.5, -0.5, 0.5;
        return v;
    };
    const double r3 = relation_residual(indep.score_relations[0], twisted, grid);

    CheckResult r;
    r.name = "relation-residuals";
    r.pass = r1 <= 1e-8 && r2 <= 1e-8 && r3 >= 1e-2;
    r.measured = detail::fmt("indep = %.3g, marghomo = %.3g, negative control = %.3g", r1, r2, r3);
    r.expected = "in-variety residuals <= 1e-8, negative control >= 1e-2";
    return r;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    double time_budget_seconds;
    std::function<CheckResult(std::uint64_t)> run;
};

inline const std::vector<Check>& checks() {
    static const std::vector<Check> all = {
        {"score-identity", 1.0, check_score_identity},
        {"entropy-compensation", 1.0, check_entropy_compensation},
        {"gibbs-boundary", 1.0, check_gibbs_boundary},
        {"geodesic", 5.0, check_geodesic},
        {"transport-laws", 2.0, check_transport_laws},
        {"natural-gradient", 5.0, check_natural_gradient},
        {"cramer-rao", 2.0, check_cramer_rao},
        {"entropy-flow", 1.0, check_entropy_flow},
        {"algebra-golden", 5.0, check_algebra_golden},
        {"relation-residuals", 2.0, check_relation_residuals},
    };
    return all;
}

inline std::vector<std::string> check_names() {
    std::vector<std::string> names;
    for (const auto& c : checks()) names.push_back(c.name);
    return names;
}

inline CheckResult run_check(const Check& check, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r = check.run(seed);
    const auto stop = std::chrono::steady_clock::now();
    r.seconds = std::chrono::duration<double>(stop - start).count();
    if (r.seconds >= check.time_budget_seconds) {
        r.pass = false;
        r.measured += detail::fmt(" [over time budget: %.2fs >= %.2fs]", r.seconds,
                                  check.time_budget_seconds);
    }
    return r;
}

inline std::vector<CheckResult> run_checks(std::uint64_t seed,
                                           const std::vector<std::string>& only = {}) {
    std::vector<CheckResult> results;
    for (const auto& check : checks()) {
        if (!only.empty() &&
            std::find(only.begin(), only.end(), check.name) == only.end())
            continue;
        results.push_back(run_check(check, seed));
    }
    return results;
}

}  // namespace sbundle::acceptance
