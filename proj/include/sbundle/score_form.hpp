#pragma once

// Linear relations on Fisher scores, sum_x c_x s_x = 0. Binomial model
// equations p^alpha = p^beta induce the relation with c = alpha - beta on
// the open simplex; see the polynomial module for the derivation and the
// curves module for the scores.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "sbundle/curves.hpp"
#include "sbundle/errors.hpp"
#include "sbundle/simplex.hpp"

namespace sbundle {

class LinearScoreForm {
  public:
    LinearScoreForm(SampleSpace space, Eigen::VectorXi coefficients)
        : space_(std::move(space)), coefficients_(std::move(coefficients)) {
        if (coefficients_.size() != space_.size())
            throw Error("LinearScoreForm: coefficient length mismatch");
        if (coefficients_.isZero()) throw Error("LinearScoreForm: zero form");
    }

    const SampleSpace& space() const { return space_; }
    const Eigen::VectorXi& coefficients() const { return coefficients_; }

    template <typename Scalar>
    Scalar apply(const Vector<Scalar>& score_values) const {
        Scalar acc = Scalar(0);
        for (Index i = 0; i < coefficients_.size(); ++i)
            acc += Scalar(coefficients_[i]) * score_values[i];
        return acc;
    }

    // e.g. "s11 - 2*s12 + s22".
    std::string to_string() const {
        std::string out;
        for (Index i = 0; i < coefficients_.size(); ++i) {
            const int c = coefficients_[i];
            if (c == 0) continue;
            if (out.empty()) {
                if (c < 0) out += "-";
            } else {
                out += c > 0 ? " + " : " - ";
            }
            const int mag = std::abs(c);
            if (mag != 1) out += std::to_string(mag) + "*";
            out += "s" + space_.label(i);
        }
        return out;
    }

    friend bool operator==(const LinearScoreForm& a, const LinearScoreForm& b) {
        return a.space_ == b.space_ && a.coefficients_ == b.coefficients_;
    }

  private:
    SampleSpace space_;
    Eigen::VectorXi coefficients_;
};

// Max over the grid of |sum c_x s_x(t)|. The relation is only guaranteed on
// the open simplex, so a grid point with defective support is an error.
template <typename Scalar>
Scalar relation_residual(const LinearScoreForm& form, const ParamCurve<Scalar>& curve,
                         const std::vector<Scalar>& t_grid) {
    if (form.space() != curve.space) throw BaseMismatch("relation_residual: space mismatch");
    Scalar worst = Scalar(0);
    for (const Scalar t : t_grid) {
        const ProbabilityVector<Scalar> p = curve.at(t);
        if (p.support().count() != curve.space.size())
            throw BoundaryPoint("relation_residual: gamma(" + std::to_string(t) +
                                ") has defective support");
        const ScoreResult<Scalar> sr = score(curve, t);
        worst = std::max(worst, std::abs(form.apply(sr.score.score())));
    }
    return worst;
}

}  // namespace sbundle
