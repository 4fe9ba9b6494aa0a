#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sbundle/models.hpp>
#include <sbundle/polynomial.hpp>

#include <vector>

#include "oracles.hpp"

using namespace sbundle;

namespace {

RationalPolynomial parse(const RingPtr& ring, const std::string& text) {
    return parse_polynomial(ring, text);
}

// Random sparse polynomial in the p-indeterminates.
RationalPolynomial random_p_poly(oracles::Rng& rng, const RingPtr& ring) {
    RationalPolynomial f(ring);
    const int terms = rng.uniform_int(1, 4);
    const Index d = ring->cells();
    for (int k = 0; k < terms; ++k) {
        ExponentVec e(static_cast<std::size_t>(ring->nvars()), 0u);
        for (Index x = 0; x < d; ++x)
            e[static_cast<std::size_t>(ring->var(VarKind::P, x))] =
                static_cast<unsigned>(rng.uniform_int(0, 3));
        const int num = rng.uniform_int(-6, 6);
        const int den = rng.uniform_int(1, 5);
        f.add_term(std::move(e), Rational(num, den));
    }
    return f;
}

// Substitute the p-exponent pattern `from` by `to` in every term (the
// binomial relation p^from = p^to applied as a rewrite).
RationalPolynomial substitute_p_monomial(const RationalPolynomial& f, const Eigen::VectorXi& from,
                                         const Eigen::VectorXi& to) {
    const RingPtr& ring = f.ring();
    const Index d = ring->cells();
    RationalPolynomial out(ring);
    for (const auto& [e, c] : f.terms()) {
        bool matches = true;
        for (Index x = 0; x < d; ++x)
            if (static_cast<int>(e[static_cast<std::size_t>(ring->var(VarKind::P, x))]) != from[x])
                matches = false;
        if (!matches) {
            out.add_term(e, c);
            continue;
        }
        ExponentVec moved = e;
        for (Index x = 0; x < d; ++x)
            moved[static_cast<std::size_t>(ring->var(VarKind::P, x))] =
                static_cast<unsigned>(to[x]);
        out.add_term(std::move(moved), c);
    }
    return out;
}

}  // namespace

TEST_CASE("derive applies the rule pdot = s p") {
    const SampleSpace three = SampleSpace::numbered(3);
    const RingPtr ring = PolynomialRing::score_ring(three);

    CHECK(derive(parse(ring, "p1^2*p3")) == parse(ring, "2*s1*p1^2*p3 + s3*p1^2*p3"));
    CHECK(derive(parse(ring, "1")).is_zero());
    CHECK(derive(parse(ring, "7 - 3")).is_zero());

    const SampleSpace table = SampleSpace::table2x2();
    const RingPtr tring = PolynomialRing::score_ring(table);
    const auto indep = parse(tring, "p11*p22 - p12*p21");
    CHECK(derive(indep) ==
          parse(tring, "s11*p11*p22 + s22*p11*p22 - s12*p12*p21 - s21*p12*p21"));

    CHECK_THROWS_AS(derive(parse(ring, "s1*p1")), UnsupportedIndeterminate);
    CHECK_THROWS_AS(derive(parse(ring, "pdot1")), UnsupportedIndeterminate);
}

TEST_CASE("derive is linear and satisfies the Leibniz rule") {
    oracles::Rng rng(91);
    const SampleSpace three = SampleSpace::numbered(3);
    const RingPtr ring = PolynomialRing::score_ring(three);
    for (int trial = 0; trial < 500; ++trial) {
        const auto f = random_p_poly(rng, ring);
        const auto g = random_p_poly(rng, ring);
        CHECK(derive(f * g) == derive(f) * g + f * derive(g));
        const Rational a(rng.uniform_int(-4, 4), rng.uniform_int(1, 4));
        CHECK(derive(a * f + g) == a * derive(f) + derive(g));
    }
}

TEST_CASE("binomial score relations") {
    const SampleSpace table = SampleSpace::table2x2();
    Eigen::VectorXi alpha(4), beta(4);
    alpha << 1, 0, 0, 1;  // e11 + e22
    beta << 0, 1, 1, 0;   // e12 + e21
    const auto indep = binomial_score_relation(table, alpha, beta);
    CHECK(indep.to_string() == "s11 - s12 - s21 + s22");

    const SampleSpace collapsed({"11", "12", "22"});
    Eigen::VectorXi a2(3), b2(3);
    a2 << 1, 0, 1;  // e11 + e22
    b2 << 0, 2, 0;  // 2 e12
    const auto marghomo = binomial_score_relation(collapsed, a2, b2);
    CHECK(marghomo.to_string() == "s11 - 2*s12 + s22");

    const SampleSpace three = SampleSpace::numbered(3);
    Eigen::VectorXi a3(3), b3(3);
    a3 << 1, 1, 0;  // p1 p2
    b3 << 0, 1, 0;  // p2
    const auto trivial = binomial_score_relation(three, a3, b3);
    CHECK(trivial.to_string() == "s1");

    CHECK_THROWS_AS(binomial_score_relation(three, a3, a3), EqualExponents);
}

TEST_CASE("binomial derivative reduces modulo the relation") {
    // derive(p^a - p^b) = <a,s> p^a - <b,s> p^b, and substituting p^b -> p^a
    // leaves <a-b, s> p^a.
    oracles::Rng rng(17);
    const SampleSpace table = SampleSpace::table2x2();
    const RingPtr ring = PolynomialRing::score_ring(table);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXi a(4), b(4);
        for (Index i = 0; i < 4; ++i) {
            a[i] = rng.uniform_int(0, 2);
            b[i] = rng.uniform_int(0, 2);
        }
        if (a == b) continue;
        ExponentVec ea(static_cast<std::size_t>(ring->nvars()), 0u);
        ExponentVec eb(static_cast<std::size_t>(ring->nvars()), 0u);
        for (Index x = 0; x < 4; ++x) {
            ea[static_cast<std::size_t>(ring->var(VarKind::P, x))] = static_cast<unsigned>(a[x]);
            eb[static_cast<std::size_t>(ring->var(VarKind::P, x))] = static_cast<unsigned>(b[x]);
        }
        RationalPolynomial binom(ring);
        binom.add_term(ea, Rational(1));
        binom.add_term(eb, Rational(-1));
        if (binom.n_terms() != 2) continue;

        const auto reduced = substitute_p_monomial(derive(binom), b, a);
        RationalPolynomial expected(ring);
        for (Index x = 0; x < 4; ++x) {
            const int coeff = a[x] - b[x];
            if (coeff == 0) continue;
            ExponentVec e = ea;
            e[static_cast<std::size_t>(ring->var(VarKind::S, x))] += 1;
            expected.add_term(std::move(e), Rational(coeff));
        }
        CHECK(reduced == expected);
    }
}

TEST_CASE("face products of the 2x2 table bases") {
    const SampleSpace table = SampleSpace::table2x2();
    const RingPtr xyz = PolynomialRing::coefficients({"x", "y", "z"});

    // paper basis {c12, c21, c22} -> xyz(x+y+z)
    const auto basis1 = contrast_basis(table);
    const auto prod1 = face_product(basis1, {"x", "y", "z"});
    const auto expected1 = parse(xyz, "x^2*y*z + x*y^2*z + x*y*z^2");
    CHECK(prod1 == expected1);

    // alternative basis {c'12, c'21, c'22}
    Vector<double> c12(4), c21(4), c22(4);
    c12 << 1, -1, 1, -1;
    c21 << 1, 1, -1, -1;
    c22 << 1, -1, -1, 1;
    const std::vector<ContrastVector<double>> basis2 = {
        ContrastVector<double>(table, c12), ContrastVector<double>(table, c21),
        ContrastVector<double>(table, c22)};
    const auto prod2 = face_product(basis2, {"x", "y", "z"});
    const auto expected2 = parse(xyz, "x + y + z") * parse(xyz, "-x + y - z") *
                           parse(xyz, "x - y - z") * parse(xyz, "-x - y + z");
    CHECK(prod2 == expected2);
    CHECK(prod2.leading_term().second > 0);

    // d = 2: forms x and -x; the normalized product is x^2
    const SampleSpace two = SampleSpace::numbered(2);
    Vector<double> e12(2);
    e12 << 1, -1;
    const auto prod3 =
        face_product(std::vector<ContrastVector<double>>{ContrastVector<double>(two, e12)}, {"x"});
    const RingPtr xring = PolynomialRing::coefficients({"x"});
    CHECK(prod3 == parse(xring, "x^2"));

    // degenerate basis
    Vector<double> dup(4);
    dup << 1, -1, 0, 0;
    const std::vector<ContrastVector<double>> bad = {
        ContrastVector<double>(table, dup), ContrastVector<double>(table, dup),
        ContrastVector<double>(table, c22)};
    CHECK_THROWS_AS(face_product(bad, {"x", "y", "z"}), RankDeficientBasis);
}

TEST_CASE("face factors cut out the face-tangent contrasts") {
    oracles::Rng rng(5);
    for (const Index d : {2, 3, 4}) {
        const SampleSpace space = SampleSpace::numbered(d);
        // random integer spanning basis (retry until full rank)
        std::vector<ContrastVector<double>> basis;
        while (true) {
            basis.clear();
            std::vector<std::vector<double>> rows;
            for (Index i = 0; i + 1 < d; ++i) {
                Vector<double> v(d);
                double sum = 0;
                for (Index x = 0; x + 1 < d; ++x) {
                    v[x] = rng.uniform_int(-2, 2);
                    sum += v[x];
                }
                v[d - 1] = -sum;
                std::vector<double> row(static_cast<std::size_t>(d));
                for (Index x = 0; x < d; ++x) row[static_cast<std::size_t>(x)] = v[x];
                rows.push_back(row);
                basis.emplace_back(space, v);
            }
            if (oracles::gauss_rank(rows) == d - 1) break;
        }
        std::vector<std::string> names;
        for (Index i = 0; i + 1 < d; ++i) names.push_back("c" + std::to_string(i));
        const auto factors = face_factors(basis, names);
        CHECK(static_cast<Index>(factors.size()) == d);

        // for each cell x, a contrast supported off x has coefficients in the
        // zero set of factor x
        for (Index x = 0; x < d; ++x) {
            for (int trial = 0; trial < 10; ++trial) {
                // random contrast with v[x] = 0, solved into basis coordinates
                Eigen::MatrixXd m(d, d - 1);
                for (Index i = 0; i + 1 < d; ++i)
                    for (Index r = 0; r < d; ++r) m(r, i) = basis[static_cast<std::size_t>(i)][r];
                Eigen::VectorXd target = Eigen::VectorXd::Zero(d);
                double sum = 0;
                for (Index r = 0; r < d; ++r) {
                    if (r == x) continue;
                    target[r] = rng.uniform(-1, 1);
                    sum += target[r];
                }
                // make it zero-sum by shifting mass among the off-x cells
                Index other = (x + 1) % d;
                target[other] -= sum;
                const Eigen::VectorXd coeffs = m.colPivHouseholderQr().solve(target);
                if ((m * coeffs - target).lpNorm<Eigen::Infinity>() > 1e-9) continue;
                // evaluate factor x at the coefficients
                double value = 0;
                const auto& factor = factors[static_cast<std::size_t>(x)];
                for (const auto& [e, c] : factor.terms()) {
                    for (std::size_t v = 0; v < e.size(); ++v)
                        if (e[v] == 1) value += c.get_d() * coeffs[static_cast<Index>(v)];
                }
                CHECK(std::abs(value) <= 1e-9);
            }
        }
    }
}

TEST_CASE("model tangent system of the line model") {
    const SampleSpace three = SampleSpace::numbered(3);
    const RingPtr ring = PolynomialRing::score_ring(three);
    const std::vector<RationalPolynomial> model = {parse(ring, "p1 - p2"),
                                                   parse(ring, "p3 + 2*p1 - 1")};
    const auto system = model_tangent_system(model, three);
    REQUIRE(system.size() == 6);
    CHECK(system[0] == parse(ring, "p1 - p2"));
    CHECK(system[1] == parse(ring, "p3 + 2*p1 - 1"));
    CHECK(system[2] == parse(ring, "s1*p1 - s2*p2"));
    CHECK(system[3] == parse(ring, "s3*p3 + 2*s1*p1"));
    CHECK(system[4] == parse(ring, "p1 + p2 + p3 - 1"));
    CHECK(system[5] == parse(ring, "s1*p1 + s2*p2 + s3*p3"));
}

TEST_CASE("model tangent system of the independence model") {
    const SampleSpace table = SampleSpace::table2x2();
    const RingPtr ring = PolynomialRing::score_ring(table);
    const auto system = model_tangent_system({parse(ring, "p11*p22 - p12*p21")}, table);
    REQUIRE(system.size() == 4);
    CHECK(system[1] ==
          parse(ring, "s11*p11*p22 + s22*p11*p22 - s12*p12*p21 - s21*p12*p21"));
    CHECK(system[3] == parse(ring, "s11*p11 + s12*p12 + s21*p21 + s22*p22"));

    // empty model: just the simplex constraints
    const auto saturated = model_tangent_system({}, table);
    REQUIRE(saturated.size() == 2);
    CHECK(saturated[0] == parse(ring, "p11 + p12 + p21 + p22 - 1"));
    CHECK(saturated[1] == parse(ring, "s11*p11 + s12*p12 + s21*p21 + s22*p22"));
}

TEST_CASE("binomial detection") {
    const SampleSpace table = SampleSpace::table2x2();
    const RingPtr ring = PolynomialRing::score_ring(table);
    const auto b = as_binomial(parse(ring, "p11*p22 - p12*p21"));
    REQUIRE(b.has_value());
    Eigen::VectorXi alpha(4), beta(4);
    alpha << 1, 0, 0, 1;
    beta << 0, 1, 1, 0;
    CHECK(b->first == alpha);
    CHECK(b->second == beta);

    CHECK_FALSE(as_binomial(parse(ring, "p11*p22 - 2*p12*p21")).has_value());
    CHECK_FALSE(as_binomial(parse(ring, "p11 - p12 + p21")).has_value());
    CHECK_FALSE(as_binomial(parse(ring, "p11 + p12")).has_value());
    CHECK_FALSE(as_binomial(parse(ring, "s11*p11 - p12")).has_value());
}

TEST_CASE("printing and parsing round-trip") {
    const SampleSpace table = SampleSpace::table2x2();
    const RingPtr ring = PolynomialRing::score_ring(table);

    CHECK(parse(ring, "3/2*p11^2*s22").to_string() == "3/2*p11^2*s22");
    CHECK(parse(ring, "p11*p22 - p12*p21").to_string() == "p11*p22 - p12*p21");
    CHECK(RationalPolynomial::zero(ring).to_string() == "0");
    CHECK(parse(ring, "0").is_zero());
    CHECK(parse(ring, "-p11 + 1/3").to_string() == "-p11 + 1/3");
    CHECK(parse(ring, "2/4*p11").to_string() == "1/2*p11");
    CHECK(parse(ring, "p11*p11").to_string() == "p11^2");
    CHECK_THROWS_AS(parse(ring, "q11"), ParseError);
    CHECK_THROWS_AS(parse(ring, "p11 +"), ParseError);
    CHECK_THROWS_AS(parse(ring, ""), ParseError);

    oracles::Rng rng(37);
    const SampleSpace three = SampleSpace::numbered(3);
    const RingPtr sring = PolynomialRing::score_ring(three);
    for (int trial = 0; trial < 200; ++trial) {
        auto f = random_p_poly(rng, sring);
        const auto g = derive(f) + random_p_poly(rng, sring);
        CHECK(parse(sring, g.to_string()) == g);
    }
}

TEST_CASE("relation residuals vanish inside the varieties") {
    const std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = 0; i <= 40; ++i) g.push_back(0.1 + i * 0.8 / 40.0);
        return g;
    }();

    const auto indep = make_zoo_curve<double>("indep2x2");
    REQUIRE(indep.score_relations.size() == 1);
    CHECK(relation_residual(indep.score_relations[0], indep.curve, grid) <= 1e-9);

    const auto marghomo = make_zoo_curve<double>("marghomo");
    REQUIRE(marghomo.score_relations.size() == 1);
    CHECK(relation_residual(marghomo.score_relations[0], marghomo.curve, grid) <= 1e-9);

    // negative control: a non-independent curve
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
    CHECK(relation_residual(indep.score_relations[0], twisted, grid) >= 1e-2);

    // boundary points are rejected
    ParamCurve<double> boundary = marghomo.curve;
    CHECK_THROWS_AS(relation_residual(marghomo.score_relations[0], boundary, {0.0, 0.5}),
                    BoundaryPoint);
}

TEST_CASE("relations hold on random interior curves inside each variety") {
    oracles::Rng rng(71);
    const auto logistic = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    const std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = 0; i <= 20; ++i) g.push_back(0.1 + i * 0.8 / 20.0);
        return g;
    }();

    const auto indep_form = make_zoo_curve<double>("indep2x2").score_relations[0];
    const auto mh_form = make_zoo_curve<double>("marghomo").score_relations[0];

    for (int trial = 0; trial < 20; ++trial) {
        // random product-measure curve: rows (a(t), 1-a(t)), cols (b(t), 1-b(t))
        const double a0 = rng.uniform(-1, 1), a1 = rng.uniform(-2, 2);
        const double b0 = rng.uniform(-1, 1), b1 = rng.uniform(-2, 2);
        ParamCurve<double> product;
        product.space = SampleSpace::table2x2();
        product.t_min = 0;
        product.t_max = 1;
        product.eval = [=](double t) {
            const double a = logistic(a0 + a1 * t), b = logistic(b0 + b1 * t);
            Vector<double> w(4);
            w << a * b, a * (1 - b), (1 - a) * b, (1 - a) * (1 - b);
            return w;
        };
        CHECK(relation_residual(indep_form, product, grid) <= 1e-8);

        // random reparametrization of the collapsed marginal-homogeneity curve
        const double c0 = rng.uniform(-1, 1), c1 = rng.uniform(-2, 2);
        ParamCurve<double> mh;
        mh.space = SampleSpace({"11", "12", "22"});
        mh.t_min = 0;
        mh.t_max = 1;
        mh.eval = [=](double t) {
            const double th = logistic(c0 + c1 * t);
            Vector<double> w(3);
            w << (1 - th) * (1 - th), th * (1 - th), th * th;
            return (w / (1 - th + th * th)).eval();
        };
        CHECK(relation_residual(mh_form, mh, grid) <= 1e-8);
    }
}
