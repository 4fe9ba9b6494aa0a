#pragma once

// Core types for the closed probability simplex: sample spaces, probability
// vectors with tracked support, zero-sum contrasts, and the statistical
// bundle of (p, s) pairs with E_p[s] = 0.
//
// Conventions used throughout the library:
//   * all numeric vectors are indexed by the SampleSpace order fixed at
//     construction;
//   * the support of a probability vector is recomputed on demand from the
//     weights, never cached;
//   * bundle elements are stored as the canonical representative of the
//     reduced bundle: the score is zero off the support of the base point;
//   * expectations are summed over the support only, so off-support entries
//     may hold any value (including +/-inf) without poisoning results.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sbundle/errors.hpp"

namespace sbundle {

using Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Default absolute tolerances, chosen with double precision headroom for
// grids of ~1e4 evaluations.
namespace tol {
inline constexpr double support = 1e-12;        // weight > support  =>  cell is in supp p
inline constexpr double normalization = 1e-9;   // |sum w - 1| bound
inline constexpr double contrast = 1e-8;        // |sum v| bound for contrasts
inline constexpr double bundle = 1e-8;          // |E_p[s]| bound for bundle elements
inline constexpr double abs_continuity = 1e-6;  // |velocity| above this on a zero cell is an error
inline constexpr double conditioning = 1e-8;    // weights below this make the score quotient ill-conditioned
}  // namespace tol

// ============================================================================
// SampleSpace
// ============================================================================

// Finite ordered outcome set. Copies are cheap (labels are shared).
class SampleSpace {
  public:
    explicit SampleSpace(std::vector<std::string> labels)
        : labels_(std::make_shared<const std::vector<std::string>>(std::move(labels))) {
        if (labels_->empty()) throw Error("SampleSpace: needs at least one label");
        for (std::size_t i = 0; i < labels_->size(); ++i)
            for (std::size_t j = i + 1; j < labels_->size(); ++j)
                if ((*labels_)[i] == (*labels_)[j])
                    throw Error("SampleSpace: duplicate label '" + (*labels_)[i] + "'");
    }

    // Labels "1", "2", ..., "d".
    static SampleSpace numbered(Index d) {
        std::vector<std::string> labels;
        labels.reserve(static_cast<std::size_t>(d));
        for (Index i = 1; i <= d; ++i) labels.push_back(std::to_string(i));
        return SampleSpace(std::move(labels));
    }

    // The 2x2 contingency table cells "11", "12", "21", "22" (row-major).
    static SampleSpace table2x2() { return SampleSpace({"11", "12", "21", "22"}); }

    Index size() const { return static_cast<Index>(labels_->size()); }
    const std::string& label(Index i) const { return (*labels_)[static_cast<std::size_t>(i)]; }
    const std::vector<std::string>& labels() const { return *labels_; }

    Index index_of(const std::string& label) const {
        for (std::size_t i = 0; i < labels_->size(); ++i)
            if ((*labels_)[i] == label) return static_cast<Index>(i);
        throw Error("SampleSpace: unknown label '" + label + "'");
    }

    bool contains(const std::string& label) const {
        return std::find(labels_->begin(), labels_->end(), label) != labels_->end();
    }

    friend bool operator==(const SampleSpace& a, const SampleSpace& b) {
        return a.labels_ == b.labels_ || *a.labels_ == *b.labels_;
    }
    friend bool operator!=(const SampleSpace& a, const SampleSpace& b) { return !(a == b); }

  private:
    std::shared_ptr<const std::vector<std::string>> labels_;
};

// ============================================================================
// SupportIndicator
// ============================================================================

// 0/1 indicator of a subset of cells; mask*mask = mask by construction.
class SupportIndicator {
  public:
    SupportIndicator(SampleSpace space, Eigen::Array<bool, Eigen::Dynamic, 1> mask)
        : space_(std::move(space)), mask_(std::move(mask)) {
        if (mask_.size() != space_.size()) throw Error("SupportIndicator: mask length mismatch");
    }

    const SampleSpace& space() const { return space_; }
    bool operator[](Index i) const { return mask_[i]; }
    Index size() const { return mask_.size(); }
    Index count() const { return mask_.count(); }

    template <typename Scalar = double>
    Vector<Scalar> indicator() const {
        Vector<Scalar> v(mask_.size());
        for (Index i = 0; i < mask_.size(); ++i) v[i] = mask_[i] ? Scalar(1) : Scalar(0);
        return v;
    }

    // e.g. "101" for {cell 1, cell 3} of a three-point space.
    std::string to_string() const {
        std::string s;
        s.reserve(static_cast<std::size_t>(mask_.size()));
        for (Index i = 0; i < mask_.size(); ++i) s += mask_[i] ? '1' : '0';
        return s;
    }

    friend bool operator==(const SupportIndicator& a, const SupportIndicator& b) {
        return a.space_ == b.space_ && (a.mask_ == b.mask_).all();
    }
    friend bool operator!=(const SupportIndicator& a, const SupportIndicator& b) { return !(a == b); }

  private:
    SampleSpace space_;
    Eigen::Array<bool, Eigen::Dynamic, 1> mask_;
};

// ============================================================================
// ProbabilityVector
// ============================================================================

template <typename Scalar>
class ProbabilityVector {
  public:
    // Validating constructor; prefer make_distribution below.
    //
    // Weights within `normalization_tol` of a simplex point are accepted:
    // entries in [-normalization_tol, 0] are clamped to zero and the vector is
    // renormalized. A weight below -normalization_tol throws NegativeWeight;
    // a sum off by more than the tolerance after clamping throws NotNormalized.
    ProbabilityVector(const SampleSpace& space, Vector<Scalar> weights,
                      Scalar normalization_tol = Scalar(tol::normalization),
                      Scalar support_tol = Scalar(tol::support))
        : space_(space), weights_(std::move(weights)), support_tol_(support_tol) {
        if (weights_.size() != space_.size())
            throw Error("ProbabilityVector: expected " + std::to_string(space_.size()) +
                        " weights, got " + std::to_string(weights_.size()));
        if (support_tol_ < Scalar(0)) throw Error("ProbabilityVector: negative support tolerance");
        for (Index i = 0; i < weights_.size(); ++i) {
            if (!(weights_[i] > -normalization_tol))  // also rejects NaN
                throw NegativeWeight("weight " + std::to_string(weights_[i]) + " at cell '" +
                                     space_.label(i) + "'");
            if (weights_[i] < Scalar(0)) weights_[i] = Scalar(0);
        }
        const Scalar sum = weights_.sum();
        if (std::abs(sum - Scalar(1)) > normalization_tol)
            throw NotNormalized("weights sum to " + std::to_string(sum));
        weights_ /= sum;
    }

    const SampleSpace& space() const { return space_; }
    const Vector<Scalar>& weights() const { return weights_; }
    Scalar operator[](Index i) const { return weights_[i]; }
    Index size() const { return weights_.size(); }
    Scalar support_tol() const { return support_tol_; }

    bool in_support(Index i) const { return weights_[i] > support_tol_; }

    // Recomputed from the weights on every call.
    SupportIndicator support() const {
        Eigen::Array<bool, Eigen::Dynamic, 1> mask(weights_.size());
        for (Index i = 0; i < weights_.size(); ++i) mask[i] = in_support(i);
        return SupportIndicator(space_, std::move(mask));
    }

    bool is_vertex() const { return support().count() == 1; }

    friend bool operator==(const ProbabilityVector& a, const ProbabilityVector& b) {
        return a.space_ == b.space_ && a.weights_ == b.weights_ && a.support_tol_ == b.support_tol_;
    }
    friend bool operator!=(const ProbabilityVector& a, const ProbabilityVector& b) { return !(a == b); }

  private:
    SampleSpace space_;
    Vector<Scalar> weights_;
    Scalar support_tol_;
};

template <typename Scalar>
ProbabilityVector<Scalar> make_distribution(const SampleSpace& space, const Vector<Scalar>& weights,
                                            Scalar normalization_tol = Scalar(tol::normalization),
                                            Scalar support_tol = Scalar(tol::support)) {
    return ProbabilityVector<Scalar>(space, weights, normalization_tol, support_tol);
}

// Expectation E_p[f], summed over supp p only. Off-support values of f are
// ignored, so they may be arbitrary (even infinite).
template <typename Scalar>
Scalar expectation(const ProbabilityVector<Scalar>& p, const Vector<Scalar>& f) {
    if (f.size() != p.size()) throw Error("expectation: length mismatch");
    Scalar s = Scalar(0);
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) s += p[i] * f[i];
    return s;
}

template <typename Scalar>
Scalar variance(const ProbabilityVector<Scalar>& p, const Vector<Scalar>& f) {
    const Scalar m = expectation(p, f);
    Scalar s = Scalar(0);
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) s += p[i] * (f[i] - m) * (f[i] - m);
    return s;
}

template <typename Scalar>
Scalar covariance(const ProbabilityVector<Scalar>& p, const Vector<Scalar>& f, const Vector<Scalar>& g) {
    const Scalar mf = expectation(p, f);
    const Scalar mg = expectation(p, g);
    Scalar s = Scalar(0);
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) s += p[i] * (f[i] - mf) * (g[i] - mg);
    return s;
}

// ============================================================================
// ContrastVector
// ============================================================================

// Zero-sum vector on the sample space.
template <typename Scalar>
class ContrastVector {
  public:
    ContrastVector(const SampleSpace& space, Vector<Scalar> values,
                   Scalar zero_sum_tol = Scalar(tol::contrast))
        : space_(space), values_(std::move(values)) {
        if (values_.size() != space_.size()) throw Error("ContrastVector: length mismatch");
        const Scalar sum = values_.sum();
        if (std::abs(sum) > zero_sum_tol)
            throw Error("ContrastVector: entries sum to " + std::to_string(sum));
    }

    const SampleSpace& space() const { return space_; }
    const Vector<Scalar>& values() const { return values_; }
    Scalar operator[](Index i) const { return values_[i]; }
    Index size() const { return values_.size(); }

  private:
    SampleSpace space_;
    Vector<Scalar> values_;
};

// ============================================================================
// BundleElement
// ============================================================================

// Point of the statistical bundle: a base distribution together with a
// score s satisfying E_p[s] = 0. Stored canonically with s = 0 off supp p,
// which is the representative of the reduced-bundle class.
template <typename Scalar>
class BundleElement {
  public:
    BundleElement(ProbabilityVector<Scalar> base, const Vector<Scalar>& score,
                  Scalar expectation_tol = Scalar(tol::bundle))
        : base_(std::move(base)), score_(Vector<Scalar>::Zero(base_.size())) {
        if (score.size() != base_.size()) throw Error("BundleElement: score length mismatch");
        Scalar mean = Scalar(0);
        for (Index i = 0; i < base_.size(); ++i) {
            if (base_.in_support(i)) {
                score_[i] = score[i];
                mean += base_[i] * score[i];
            }
        }
        if (std::abs(mean) > expectation_tol)
            throw InvalidBundleElement("E_p[score] = " + std::to_string(mean));
    }

    const ProbabilityVector<Scalar>& base() const { return base_; }
    const Vector<Scalar>& score() const { return score_; }
    Scalar operator[](Index i) const { return score_[i]; }
    Index size() const { return score_.size(); }

  private:
    ProbabilityVector<Scalar> base_;
    Vector<Scalar> score_;
};

// Center an arbitrary random variable u into the fibre at p: subtract E_p[u]
// and zero the result off supp p.
template <typename Scalar>
BundleElement<Scalar> center(const Vector<Scalar>& u, const ProbabilityVector<Scalar>& p) {
    if (u.size() != p.size()) throw Error("center: length mismatch");
    const Scalar mean = expectation(p, u);
    Vector<Scalar> s = Vector<Scalar>::Zero(p.size());
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) s[i] = u[i] - mean;
    return BundleElement<Scalar>(p, s);
}

// Covariance pairing <u, v>_p = E_p[u v] on the fibre at p.
template <typename Scalar>
Scalar inner_product(const ProbabilityVector<Scalar>& p, const BundleElement<Scalar>& u,
                     const BundleElement<Scalar>& v) {
    if (u.base() != p || v.base() != p)
        throw BaseMismatch("inner_product: bundle elements not based at the given point");
    Scalar s = Scalar(0);
    for (Index i = 0; i < p.size(); ++i)
        if (p.in_support(i)) s += p[i] * u[i] * v[i];
    return s;
}

template <typename Scalar>
Scalar fibre_norm(const BundleElement<Scalar>& u) {
    return std::sqrt(inner_product(u.base(), u, u));
}

// ============================================================================
// Contrast bases and tangent membership
// ============================================================================

// Basis {e_{x0} - e_y : y in I, y != x0} of the contrasts supported in I,
// where x0 is the first element of I in space order. |I| - 1 vectors.
template <typename Scalar = double>
std::vector<ContrastVector<Scalar>> contrast_basis(const SampleSpace& space,
                                                   const std::vector<std::string>& subset) {
    if (subset.empty()) throw EmptySubset("contrast_basis: empty subset");
    std::vector<Index> idx;
    idx.reserve(subset.size());
    for (const auto& label : subset) idx.push_back(space.index_of(label));
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw Error("contrast_basis: repeated label in subset");

    std::vector<ContrastVector<Scalar>> basis;
    basis.reserve(idx.size() - 1);
    for (std::size_t k = 1; k < idx.size(); ++k) {
        Vector<Scalar> v = Vector<Scalar>::Zero(space.size());
        v[idx[0]] = Scalar(1);
        v[idx[k]] = Scalar(-1);
        basis.emplace_back(space, std::move(v));
    }
    return basis;
}

template <typename Scalar = double>
std::vector<ContrastVector<Scalar>> contrast_basis(const SampleSpace& space) {
    return contrast_basis<Scalar>(space, space.labels());
}

// Whether (p, v) lies in the tangent bundle of the closed simplex: v must be
// zero-sum and vanish off supp p.
template <typename Scalar>
bool tangent_membership(const ProbabilityVector<Scalar>& p, const Vector<Scalar>& v,
                        Scalar tolerance = Scalar(tol::normalization)) {
    if (v.size() != p.size()) throw Error("tangent_membership: length mismatch");
    if (std::abs(v.sum()) > tolerance) return false;
    for (Index i = 0; i < p.size(); ++i)
        if (!p.in_support(i) && std::abs(v[i]) > tolerance) return false;
    return true;
}

}  // namespace sbundle
