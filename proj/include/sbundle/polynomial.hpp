#pragma once

// Exact sparse polynomial engine for the score calculus: the derivation rule
// pdot_x = s_x p_x turns model equations in the probabilities into implicit
// tangent-bundle equations in (p, s). Binomial equations p^alpha = p^beta
// yield linear score relations <alpha - beta, s> = 0 on the open simplex,
// and contrast bases of 2x2 tables yield the face ideals as products of
// linear forms in the basis coefficients.
//
// Coefficients are exact rationals; monomials are ordered graded-lex over
// the fixed indeterminate order (p-block, then pdot-block, then s-block, in
// sample-space order), which makes printing canonical and equality
// structural.
//
// Text format: terms like `3/2*p11^2*s22`, joined by ` + ` / ` - `.

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbundle/errors.hpp"
#include "sbundle/rational.hpp"
#include "sbundle/score_form.hpp"
#include "sbundle/simplex.hpp"

namespace sbundle {

enum class VarKind { P = 0, PDot = 1, S = 2 };

// ============================================================================
// PolynomialRing
// ============================================================================

// An ordered set of named indeterminates. Two flavours: a plain coefficient
// ring (arbitrary names, used for face ideals) and the score ring of a
// sample space with the p/pdot/s blocks.
class PolynomialRing {
  public:
    static std::shared_ptr<const PolynomialRing> coefficients(std::vector<std::string> names) {
        return std::shared_ptr<const PolynomialRing>(new PolynomialRing(std::move(names)));
    }

    static std::shared_ptr<const PolynomialRing> score_ring(const SampleSpace& space) {
        std::vector<std::string> names;
        names.reserve(static_cast<std::size_t>(3 * space.size()));
        for (const char* prefix : {"p", "pdot", "s"})
            for (Index i = 0; i < space.size(); ++i) names.push_back(prefix + space.label(i));
        auto ring = std::shared_ptr<PolynomialRing>(new PolynomialRing(std::move(names)));
        ring->space_ = space;
        return ring;
    }

    Index nvars() const { return static_cast<Index>(names_.size()); }
    const std::string& var_name(Index v) const { return names_[static_cast<std::size_t>(v)]; }
    const std::vector<std::string>& var_names() const { return names_; }

    bool is_score_ring() const { return space_.has_value(); }
    const SampleSpace& space() const {
        if (!space_) throw Error("PolynomialRing: not a score ring");
        return *space_;
    }
    Index cells() const { return space().size(); }

    Index var(VarKind kind, Index cell) const {
        return static_cast<Index>(kind) * cells() + cell;
    }
    VarKind kind_of(Index v) const { return static_cast<VarKind>(v / cells()); }
    Index cell_of(Index v) const { return v % cells(); }

    friend bool operator==(const PolynomialRing& a, const PolynomialRing& b) {
        return a.names_ == b.names_ && a.space_.has_value() == b.space_.has_value();
    }

  private:
    explicit PolynomialRing(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.empty()) throw Error("PolynomialRing: no indeterminates");
        for (std::size_t i = 0; i < names_.size(); ++i)
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j])
                    throw Error("PolynomialRing: duplicate indeterminate '" + names_[i] + "'");
    }

    std::vector<std::string> names_;
    std::optional<SampleSpace> space_;
};

using RingPtr = std::shared_ptr<const PolynomialRing>;

using ExponentVec = std::vector<unsigned>;

// Graded lexicographic: total degree first, then lex with the first
// indeterminate most significant.
struct GradedLexLess {
    bool operator()(const ExponentVec& a, const ExponentVec& b) const {
        const unsigned da = std::accumulate(a.begin(), a.end(), 0u);
        const unsigned db = std::accumulate(b.begin(), b.end(), 0u);
        if (da != db) return da < db;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) return a[i] < b[i];
        return false;
    }
};

// ============================================================================
// RationalPolynomial
// ============================================================================

class RationalPolynomial {
  public:
    using TermMap = std::map<ExponentVec, Rational, GradedLexLess>;

    explicit RationalPolynomial(RingPtr ring) : ring_(std::move(ring)) {
        if (!ring_) throw Error("RationalPolynomial: null ring");
    }

    static RationalPolynomial zero(RingPtr ring) { return RationalPolynomial(std::move(ring)); }

    static RationalPolynomial constant(RingPtr ring, const Rational& c) {
        RationalPolynomial f(std::move(ring));
        f.add_term(ExponentVec(static_cast<std::size_t>(f.ring_->nvars()), 0u), c);
        return f;
    }

    static RationalPolynomial monomial(RingPtr ring, ExponentVec exponents, const Rational& c) {
        RationalPolynomial f(std::move(ring));
        if (exponents.size() != static_cast<std::size_t>(f.ring_->nvars()))
            throw Error("RationalPolynomial: exponent vector length mismatch");
        f.add_term(std::move(exponents), c);
        return f;
    }

    static RationalPolynomial variable(RingPtr ring, Index v) {
        ExponentVec e(static_cast<std::size_t>(ring->nvars()), 0u);
        e[static_cast<std::size_t>(v)] = 1u;
        return monomial(std::move(ring), std::move(e), Rational(1));
    }

    const RingPtr& ring() const { return ring_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t n_terms() const { return terms_.size(); }

    unsigned degree() const {
        unsigned d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0u));
        return d;
    }

    // Largest monomial in graded-lex order.
    const std::pair<const ExponentVec, Rational>& leading_term() const {
        if (terms_.empty()) throw Error("leading_term of zero polynomial");
        return *terms_.rbegin();
    }

    void add_term(ExponentVec e, Rational c) {
        c.canonicalize();  // mpq arithmetic and comparison require canonical form
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(std::move(e), c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    RationalPolynomial& operator+=(const RationalPolynomial& other) {
        check_ring(other);
        for (const auto& [e, c] : other.terms_) add_term(e, c);
        return *this;
    }
    RationalPolynomial& operator-=(const RationalPolynomial& other) {
        check_ring(other);
        for (const auto& [e, c] : other.terms_) add_term(e, -c);
        return *this;
    }
    RationalPolynomial& operator*=(Rational c) {
        c.canonicalize();
        if (c == 0) {
            terms_.clear();
        } else {
            for (auto& [e, coeff] : terms_) coeff *= c;
        }
        return *this;
    }

    friend RationalPolynomial operator+(RationalPolynomial a, const RationalPolynomial& b) {
        a += b;
        return a;
    }
    friend RationalPolynomial operator-(RationalPolynomial a, const RationalPolynomial& b) {
        a -= b;
        return a;
    }
    friend RationalPolynomial operator-(RationalPolynomial a) {
        for (auto& [e, c] : a.terms_) c = -c;
        return a;
    }
    friend RationalPolynomial operator*(const RationalPolynomial& a, const RationalPolynomial& b) {
        a.check_ring(b);
        RationalPolynomial out(a.ring_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                ExponentVec e(ea.size());
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                out.add_term(std::move(e), ca * cb);
            }
        }
        return out;
    }
    friend RationalPolynomial operator*(RationalPolynomial a, const Rational& c) {
        a *= c;
        return a;
    }
    friend RationalPolynomial operator*(const Rational& c, RationalPolynomial a) {
        a *= c;
        return a;
    }

    friend bool operator==(const RationalPolynomial& a, const RationalPolynomial& b) {
        return (a.ring_ == b.ring_ || *a.ring_ == *b.ring_) && a.terms_ == b.terms_;
    }
    friend bool operator!=(const RationalPolynomial& a, const RationalPolynomial& b) {
        return !(a == b);
    }

    std::string to_string() const;

  private:
    void check_ring(const RationalPolynomial& other) const {
        if (ring_ != other.ring_ && !(*ring_ == *other.ring_))
            throw Error("RationalPolynomial: mixed rings");
    }

    RingPtr ring_;
    TermMap terms_;
};

// ============================================================================
// Printing and parsing
// ============================================================================

inline std::string RationalPolynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    // leading term first
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [e, c] = *it;
        const bool negative = c < 0;
        const Rational mag = negative ? Rational(-c) : c;
        if (out.empty()) {
            if (negative) out += "-";
        } else {
            out += negative ? " - " : " + ";
        }
        std::string factors;
        for (std::size_t v = 0; v < e.size(); ++v) {
            if (e[v] == 0) continue;
            if (!factors.empty()) factors += "*";
            factors += ring_->var_name(static_cast<Index>(v));
            if (e[v] > 1) factors += "^" + std::to_string(e[v]);
        }
        if (factors.empty()) {
            out += rational_to_string(mag);
        } else if (mag == 1) {
            out += factors;
        } else {
            out += rational_to_string(mag) + "*" + factors;
        }
    }
    return out;
}

namespace detail {

class PolynomialParser {
  public:
    PolynomialParser(RingPtr ring, std::string text)
        : ring_(std::move(ring)), text_(std::move(text)) {
        // longest name first so e.g. "pdot1" is not read as "p" + junk
        order_.resize(static_cast<std::size_t>(ring_->nvars()));
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<Index>(i);
        std::stable_sort(order_.begin(), order_.end(), [this](Index a, Index b) {
            return ring_->var_name(a).size() > ring_->var_name(b).size();
        });
    }

    RationalPolynomial parse() {
        RationalPolynomial out(ring_);
        skip_ws();
        bool first = true;
        while (pos_ < text_.size()) {
            int sign = 1;
            if (peek() == '+' || peek() == '-') {
                sign = peek() == '-' ? -1 : 1;
                ++pos_;
                skip_ws();
            } else if (!first) {
                throw ParseError("expected '+' or '-' at offset " + std::to_string(pos_) +
                                 " in '" + text_ + "'");
            }
            auto [e, c] = parse_term();
            out.add_term(std::move(e), sign * c);
            first = false;
            skip_ws();
        }
        if (first) throw ParseError("empty polynomial");
        return out;
    }

  private:
    char peek() const { return text_[pos_]; }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::pair<ExponentVec, Rational> parse_term() {
        ExponentVec e(static_cast<std::size_t>(ring_->nvars()), 0u);
        Rational c(1);
        bool any = false;
        while (true) {
            skip_ws();
            if (pos_ >= text_.size()) break;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                c *= parse_rational();
                any = true;
            } else if (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_') {
                const Index v = parse_varname();
                unsigned power = 1;
                skip_ws();
                if (pos_ < text_.size() && peek() == '^') {
                    ++pos_;
                    skip_ws();
                    power = static_cast<unsigned>(parse_integer());
                }
                e[static_cast<std::size_t>(v)] += power;
                any = true;
            } else {
                break;
            }
            skip_ws();
            if (pos_ < text_.size() && peek() == '*') {
                ++pos_;
                continue;
            }
            break;
        }
        if (!any) throw ParseError("expected a term at offset " + std::to_string(pos_) + " in '" +
                                   text_ + "'");
        return {std::move(e), std::move(c)};
    }

    long parse_integer() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) throw ParseError("expected an integer at offset " + std::to_string(pos_));
        return std::stol(text_.substr(start, pos_ - start));
    }

    Rational parse_rational() {
        const long num = parse_integer();
        skip_ws();
        if (pos_ < text_.size() && peek() == '/') {
            // a '/' only continues the rational if a digit follows
            std::size_t probe = pos_ + 1;
            while (probe < text_.size() && std::isspace(static_cast<unsigned char>(text_[probe])))
                ++probe;
            if (probe < text_.size() && std::isdigit(static_cast<unsigned char>(text_[probe]))) {
                pos_ = probe;
                const long den = parse_integer();
                if (den == 0) throw ParseError("zero denominator");
                Rational q(num, den);
                q.canonicalize();
                return q;
            }
        }
        return Rational(num);
    }

    Index parse_varname() {
        for (const Index v : order_) {
            const std::string& name = ring_->var_name(v);
            if (text_.compare(pos_, name.size(), name) == 0) {
                pos_ += name.size();
                return v;
            }
        }
        throw ParseError("unknown indeterminate at offset " + std::to_string(pos_) + " in '" +
                         text_ + "'");
    }

    RingPtr ring_;
    std::string text_;
    std::size_t pos_ = 0;
    std::vector<Index> order_;
};

}  // namespace detail

inline RationalPolynomial parse_polynomial(RingPtr ring, const std::string& text) {
    return detail::PolynomialParser(std::move(ring), text).parse();
}

// ============================================================================
// Derivation
// ============================================================================

// Leibniz derivative under the rule d(p_x) = s_x p_x: a monomial p^alpha maps
// to <alpha, s> p^alpha. Input must contain p-indeterminates only.
inline RationalPolynomial derive(const RationalPolynomial& f) {
    const RingPtr& ring = f.ring();
    if (!ring->is_score_ring()) throw Error("derive: needs a score ring");
    const Index d = ring->cells();
    RationalPolynomial out(ring);
    for (const auto& [e, c] : f.terms()) {
        for (Index v = 0; v < ring->nvars(); ++v) {
            if (ring->kind_of(v) != VarKind::P && e[static_cast<std::size_t>(v)] != 0)
                throw UnsupportedIndeterminate("derive: term contains '" + ring->var_name(v) + "'");
        }
        for (Index x = 0; x < d; ++x) {
            const unsigned a = e[static_cast<std::size_t>(ring->var(VarKind::P, x))];
            if (a == 0) continue;
            ExponentVec es = e;
            es[static_cast<std::size_t>(ring->var(VarKind::S, x))] += 1;
            out.add_term(std::move(es), c * static_cast<long>(a));
        }
    }
    return out;
}

// ============================================================================
// Binomial relations
// ============================================================================

// For the binomial p^alpha - p^beta = 0, any differentiable curve inside the
// variety satisfies <alpha - beta, s> = 0 on the open simplex.
inline LinearScoreForm binomial_score_relation(const SampleSpace& space,
                                               const Eigen::VectorXi& alpha,
                                               const Eigen::VectorXi& beta) {
    if (alpha.size() != space.size() || beta.size() != space.size())
        throw Error("binomial_score_relation: exponent length mismatch");
    if ((alpha.array() < 0).any() || (beta.array() < 0).any())
        throw Error("binomial_score_relation: exponents must be nonnegative");
    if (alpha == beta) throw EqualExponents("binomial_score_relation: alpha == beta");
    return LinearScoreForm(space, alpha - beta);
}

// Recognize f = p^alpha - p^beta (exactly two terms, coefficients +1/-1,
// p-indeterminates only) and return (alpha, beta).
inline std::optional<std::pair<Eigen::VectorXi, Eigen::VectorXi>> as_binomial(
    const RationalPolynomial& f) {
    const RingPtr& ring = f.ring();
    if (!ring->is_score_ring() || f.n_terms() != 2) return std::nullopt;
    const Index d = ring->cells();
    Eigen::VectorXi alpha = Eigen::VectorXi::Zero(d), beta = Eigen::VectorXi::Zero(d);
    bool have_plus = false, have_minus = false;
    for (const auto& [e, c] : f.terms()) {
        if (c != 1 && c != -1) return std::nullopt;
        Eigen::VectorXi exps = Eigen::VectorXi::Zero(d);
        for (Index v = 0; v < ring->nvars(); ++v) {
            const unsigned a = e[static_cast<std::size_t>(v)];
            if (a == 0) continue;
            if (ring->kind_of(v) != VarKind::P) return std::nullopt;
            exps[ring->cell_of(v)] = static_cast<int>(a);
        }
        if (c == 1) {
            alpha = exps;
            have_plus = true;
        } else {
            beta = exps;
            have_minus = true;
        }
    }
    if (!have_plus || !have_minus) return std::nullopt;
    return std::make_pair(alpha, beta);
}

// ============================================================================
// Face ideals
// ============================================================================

namespace detail {

// Exact rank of a rational matrix by Gaussian elimination.
inline Index rational_rank(std::vector<std::vector<Rational>> m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    Index rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t pivot = row;
        while (pivot < rows && m[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[pivot], m[row]);
        for (std::size_t r = row + 1; r < rows; ++r) {
            if (m[r][col] == 0) continue;
            const Rational factor = m[r][col] / m[row][col];
            for (std::size_t c2 = col; c2 < cols; ++c2) m[r][c2] -= factor * m[row][c2];
        }
        ++row;
        ++rank;
    }
    return rank;
}

}  // namespace detail

// The d componentwise linear forms L_x(coeffs) of the generic contrast
// c = sum_i coeff_i basis_i, one per cell, over the coefficient ring.
// Vanishing of L_x means the contrast is tangent to the face opposite x.
template <typename Scalar>
std::vector<RationalPolynomial> face_factors(const std::vector<ContrastVector<Scalar>>& basis,
                                             const std::vector<std::string>& coeff_names) {
    if (basis.empty()) throw RankDeficientBasis("face_factors: empty basis");
    const SampleSpace& space = basis.front().space();
    const Index d = space.size();
    if (static_cast<Index>(basis.size()) != d - 1 || coeff_names.size() != basis.size())
        throw RankDeficientBasis("face_factors: need d-1 basis vectors and matching names");
    for (const auto& b : basis)
        if (b.space() != space) throw Error("face_factors: mixed sample spaces");

    std::vector<std::vector<Rational>> m(basis.size(), std::vector<Rational>(static_cast<std::size_t>(d)));
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (Index x = 0; x < d; ++x)
            m[i][static_cast<std::size_t>(x)] = rational_from_double(static_cast<double>(basis[i][x]));
    if (detail::rational_rank(m) != d - 1)
        throw RankDeficientBasis("face_factors: basis does not span the contrast space");

    const RingPtr ring = PolynomialRing::coefficients(coeff_names);
    std::vector<RationalPolynomial> factors;
    factors.reserve(static_cast<std::size_t>(d));
    for (Index x = 0; x < d; ++x) {
        RationalPolynomial form(ring);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            ExponentVec e(coeff_names.size(), 0u);
            e[i] = 1u;
            form.add_term(std::move(e), m[i][static_cast<std::size_t>(x)]);
        }
        factors.push_back(std::move(form));
    }
    return factors;
}

// Product of the face forms, i.e. the generator of the face ideal. The sign
// is normalized so the expanded leading coefficient (graded-lex) is positive.
template <typename Scalar>
RationalPolynomial face_product(const std::vector<ContrastVector<Scalar>>& basis,
                                const std::vector<std::string>& coeff_names) {
    const auto factors = face_factors(basis, coeff_names);
    RationalPolynomial product = RationalPolynomial::constant(factors.front().ring(), Rational(1));
    for (const auto& f : factors) product = product * f;
    if (!product.is_zero() && product.leading_term().second < 0) product = -product;
    return product;
}

// ============================================================================
// Tangent systems
// ============================================================================

// Generators of the implicit tangent-bundle presentation of a model: the
// model equations, their derivatives rewritten in (p, s), the sum-to-one
// constraint, and the zero-mean score condition sum_x s_x p_x (which is
// sum_x pdot_x after substitution).
inline std::vector<RationalPolynomial> model_tangent_system(
    const std::vector<RationalPolynomial>& model_polys, const SampleSpace& space) {
    const RingPtr ring = PolynomialRing::score_ring(space);
    std::vector<RationalPolynomial> out;
    out.reserve(model_polys.size() * 2 + 2);
    for (const auto& f : model_polys) {
        if (!(f.ring() == ring || *f.ring() == *ring))
            throw Error("model_tangent_system: polynomial over a different ring");
        out.push_back(f);
    }
    for (const auto& f : model_polys) out.push_back(derive(f));

    RationalPolynomial sum_to_one(ring);
    RationalPolynomial zero_mean(ring);
    for (Index x = 0; x < space.size(); ++x) {
        ExponentVec e(static_cast<std::size_t>(ring->nvars()), 0u);
        e[static_cast<std::size_t>(ring->var(VarKind::P, x))] = 1u;
        sum_to_one.add_term(e, Rational(1));
        ExponentVec es = e;
        es[static_cast<std::size_t>(ring->var(VarKind::S, x))] = 1u;
        zero_mean.add_term(std::move(es), Rational(1));
    }
    sum_to_one.add_term(ExponentVec(static_cast<std::size_t>(ring->nvars()), 0u), Rational(-1));
    out.push_back(std::move(sum_to_one));
    out.push_back(std::move(zero_mean));
    return out;
}

}  // namespace sbundle
