#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sbundle/curves.hpp>
#include <sbundle/models.hpp>
#include <sbundle/polynomial.hpp>

#include <cmath>

#include "oracles.hpp"

using namespace sbundle;

namespace {

ParamCurve<double> constant_curve(const Vector<double>& w) {
    ParamCurve<double> c;
    c.space = SampleSpace::numbered(w.size());
    c.t_min = 0;
    c.t_max = 1;
    c.eval = [w](double) { return w; };
    c.deriv = [d = w.size()](double) { return Vector<double>(Vector<double>::Zero(d)); };
    return c;
}

Vector<double> vec3(double a, double b, double c) {
    Vector<double> v(3);
    v << a, b, c;
    return v;
}

}  // namespace

TEST_CASE("velocity of the worked curves") {
    const auto line = line_model();
    const auto v = velocity(line, 0.3);
    CHECK(v.values()[0] == 1.0);
    CHECK(v.values()[1] == 1.0);
    CHECK(v.values()[2] == -2.0);

    const auto still = constant_curve(vec3(0.2, 0.3, 0.5));
    CHECK(velocity(still, 0.4).values().isZero(0));

    const auto ent = entropy_curve();
    const auto ve = velocity(ent, 0.5);
    CHECK(ve.values()[0] == 1.0);
    CHECK(ve.values()[1] == 0.0);
    CHECK(ve.values()[2] == -1.0);

    CHECK_THROWS_AS(velocity(line, 0.7), OutOfDomain);
}

TEST_CASE("score on the line model interior") {
    const auto line = line_model();
    const auto r = score(line, 0.25);
    CHECK(r.score.score()[0] == doctest::Approx(4.0));
    CHECK(r.score.score()[1] == doctest::Approx(4.0));
    CHECK(r.score.score()[2] == doctest::Approx(-4.0));
    CHECK(r.determined.to_string() == "111");
    CHECK_FALSE(r.conditioning_warning);
    CHECK(std::abs(expectation(r.base, r.score.score())) <= 1e-12);
}

TEST_CASE("score at a tangential hit leaves the cell undetermined") {
    const auto ent = entropy_curve();
    const auto r = score(ent, 0.5);
    CHECK(r.base.weights()[0] == doctest::Approx(0.5));
    CHECK(r.base.weights()[1] == 0.0);
    CHECK(r.base.weights()[2] == doctest::Approx(0.5));
    CHECK(r.score.score()[0] == doctest::Approx(2.0));
    CHECK(r.score.score()[1] == 0.0);  // canonical zero, undetermined
    CHECK(r.score.score()[2] == doctest::Approx(-2.0));
    CHECK(r.determined.to_string() == "101");
}

TEST_CASE("transversal endpoint contact has no score") {
    const auto line = line_model();
    CHECK_THROWS_AS(score(line, 0.5), AbsoluteContinuityViolation);
    CHECK_THROWS_AS(score(line, 0.0), AbsoluteContinuityViolation);
}

TEST_CASE("paper score formula for the entropy curve") {
    const auto ent = entropy_curve();
    const auto r = score(ent, 0.3);
    CHECK(r.score.score()[0] == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
    CHECK(r.score.score()[1] == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(r.score.score()[2] == doctest::Approx(-10.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("fisher information") {
    const auto line = line_model();
    CHECK(fisher_information(line, 0.25) == doctest::Approx(16.0).epsilon(1e-12));

    const auto still = constant_curve(vec3(0.2, 0.3, 0.5));
    CHECK(fisher_information(still, 0.5) == 0.0);

    // two-point support: 1^2/(1/2) + 0 + 1^2/(1/2)
    const auto ent = entropy_curve();
    CHECK(fisher_information(ent, 0.5) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("square root embedding lands on the radius-2 sphere") {
    Vector<double> quarter(4);
    quarter << 0.25, 0.25, 0.25, 0.25;
    const auto still = constant_curve(quarter);
    const auto e0 = sqrt_embedding(still, 0.5);
    CHECK(e0.rho.isApprox(Vector<double>::Ones(4), 1e-12));
    CHECK(e0.rho_dot.isZero(1e-12));

    const auto line = line_model();
    const auto e1 = sqrt_embedding(line, 0.25);
    CHECK(e1.rho[0] == doctest::Approx(1.0));
    CHECK(e1.rho[1] == doctest::Approx(1.0));
    CHECK(e1.rho[2] == doctest::Approx(std::sqrt(2.0)));
    CHECK(e1.rho_dot[0] == doctest::Approx(2.0));
    CHECK(e1.rho_dot[1] == doctest::Approx(2.0));
    CHECK(e1.rho_dot[2] == doctest::Approx(-2.0 * std::sqrt(2.0)));

    for (double t : {0.12, 0.2, 0.33, 0.45}) {
        const auto e = sqrt_embedding(line, t);
        CHECK(e.rho.norm() == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(std::abs(e.rho.dot(e.rho_dot)) <= 1e-10);
    }
}

TEST_CASE("score identity and zero mean on interior grids") {
    for (const auto& entry : standard_zoo<double>()) {
        // interior ranges that avoid transversal contacts
        double lo = entry.curve.t_min, hi = entry.curve.t_max;
        if (entry.name == "line") {
            lo = 0.01;
            hi = 0.49;
        } else if (entry.name == "mixture" || entry.name == "indep2x2" || entry.name == "marghomo") {
            lo = 0.02;
            hi = 0.98;
        } else if (entry.name == "gibbs") {
            lo = -3;
            hi = 3;
        }
        for (int i = 0; i < 60; ++i) {
            const double t = lo + i * (hi - lo) / 59.0;
            const auto r = score(entry.curve, t);
            const auto v = velocity(entry.curve, t);
            const Vector<double> recomposed =
                (r.score.score().array() * r.base.weights().array()).matrix();
            CHECK((v.values() - recomposed).lpNorm<Eigen::Infinity>() <= 1e-8);
            CHECK(std::abs(expectation(r.base, r.score.score())) <= 1e-8);
        }
    }
}

TEST_CASE("interior tangential hits have zero velocity") {
    // entropy curve at t = 1/2: gamma_2 = 0 at an interior minimum
    auto fd = entropy_curve();
    fd.deriv = nullptr;  // force finite differences
    const auto v = velocity(fd, 0.5);
    CHECK(std::abs(v.values()[1]) <= 1e-9);
}

TEST_CASE("finite differences agree with analytic derivatives") {
    for (const auto& name : {"line", "entropy3", "marghomo"}) {
        const auto entry = make_zoo_curve<double>(name);
        auto fd = entry.curve;
        fd.deriv = nullptr;
        const double lo = std::max(fd.t_min + 0.02, 0.05);
        const double hi = fd.t_max - 0.02;
        for (int i = 0; i < 25; ++i) {
            const double t = lo + i * (hi - lo) / 24.0;
            const auto va = velocity(entry.curve, t);
            const auto vf = velocity(fd, t);
            CHECK((va.values() - vf.values()).lpNorm<Eigen::Infinity>() <= 1e-9);
        }
    }
}

TEST_CASE("implicit relations are orthogonal to the score") {
    // F(p) = p11 p22 - p12 p21 vanishes along the independence curve, so the
    // centred gradient of F is covariance-orthogonal to the score.
    const auto indep = independence_curve<double>();
    for (int i = 0; i < 30; ++i) {
        const double t = 0.1 + i * 0.8 / 29.0;
        const auto r = score(indep, t);
        const auto& w = r.base.weights();
        Vector<double> grad(4);
        grad << w[3], -w[2], -w[1], w[0];
        const auto g = center(grad, r.base);
        CHECK(std::abs(inner_product(r.base, g, r.score)) <= 1e-10);
    }
}

TEST_CASE("near-boundary quotients carry a conditioning warning") {
    ParamCurve<double> c;
    c.space = SampleSpace::numbered(2);
    c.t_min = 0;
    c.t_max = 1;
    c.eval = [](double t) {
        Vector<double> w(2);
        w << 1e-10 + t * 0.0, 1 - 1e-10;
        return w;
    };
    c.deriv = [](double) {
        Vector<double> v(2);
        v << 1e-12, -1e-12;
        return v;
    };
    const auto r = score(c, 0.5);
    CHECK(r.conditioning_warning);
    CHECK(r.determined.to_string() == "11");
}

TEST_CASE("out of domain evaluation") {
    const auto line = line_model();
    CHECK_THROWS_AS(line.at(0.75), OutOfDomain);
    auto fd = line;
    fd.deriv = nullptr;
    CHECK_THROWS_AS(velocity(fd, 0.0), OutOfDomain);  // FD needs interior t
}
