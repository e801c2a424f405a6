#pragma once

// Dressed generators, cut-offs and the Lax / zero-curvature residuals of the
// standard, strict and combined hierarchies.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slt/dense.hpp"
#include "slt/diffpoly.hpp"
#include "slt/errors.hpp"
#include "slt/frame.hpp"
#include "slt/loop_series.hpp"

namespace slt {

enum class HierarchyKind { Standard, Strict, Combined };

inline std::string to_string(HierarchyKind k) {
    switch (k) {
    case HierarchyKind::Standard: return "standard";
    case HierarchyKind::Strict: return "strict";
    case HierarchyKind::Combined: return "combined";
    }
    return "standard";
}

/// Which dressed family a series belongs to: U (z-graded), V (strict,
/// z-graded with leading z), W (z^{-1}-graded).
enum class Family { U, V, W };

struct Target {
    Family family = Family::U;
    int index = 1;
};

using Flow = DerivationSymbol;

/// Group elements a deformation was dressed with: `negative` is in G_{<0}
/// (standard, combined) or G_{<=0} (strict), `positive` in G_{>=0}.
template <Scalar S>
struct Witness {
    std::optional<LoopSeries<S>> negative;
    std::optional<LoopSeries<S>> positive;
};

template <Scalar S>
struct Deformation {
    HierarchyKind kind = HierarchyKind::Standard;
    CommutativeFrame frame;
    std::vector<LoopSeries<S>> u;
    std::vector<LoopSeries<S>> v;
    std::vector<LoopSeries<S>> w;
    std::optional<Witness<S>> witness;

    const std::vector<LoopSeries<S>>& family(Family f) const {
        switch (f) {
        case Family::U: return u;
        case Family::V: return v;
        case Family::W: return w;
        }
        return u;
    }

    const LoopSeries<S>& series(Target t) const {
        const auto& fam = family(t.family);
        if (fam.empty()) throw IndexOutOfRange("deformation has no series of the requested family");
        if (t.index < 1 || static_cast<std::size_t>(t.index) > fam.size())
            throw IndexOutOfRange("series index " + std::to_string(t.index) + " outside [1, " + std::to_string(fam.size()) + "]");
        return fam[static_cast<std::size_t>(t.index - 1)];
    }

    std::vector<Target> targets() const {
        std::vector<Target> out;
        for (Family f : {Family::U, Family::V, Family::W})
            for (std::size_t i = 1; i <= family(f).size(); ++i) out.push_back({f, static_cast<int>(i)});
        return out;
    }
};

namespace detail {

template <Scalar S>
bool near(const Matrix<S>& a, const Matrix<S>& b, double tol) {
    if constexpr (ScalarTraits<S>::exact) return a == b;
    else
        return (a - b).norm() <= tol;
}

template <Scalar S>
bool near_zero(const Matrix<S>& a, double tol) {
    if constexpr (ScalarTraits<S>::exact) return a.is_zero();
    else
        return a.norm() <= tol;
}

template <Scalar S>
void check_series_size(const LoopSeries<S>& s, const CommutativeFrame& frame, const char* what) {
    if (s.n() != frame.n()) throw ShapeViolation(std::string(what) + ": matrix size does not match the frame");
}

/// E_alpha + strictly negative tail.
template <Scalar S>
void check_u_shape(const LoopSeries<S>& s, const CommutativeFrame& frame, int alpha, double tol) {
    check_series_size(s, frame, "U");
    if (!s.closed_above()) throw ShapeViolation("U_" + std::to_string(alpha) + " must have finitely many positive powers");
    for (int k = std::max(1, s.window().lo); k <= s.window().hi; ++k)
        if (!near_zero(s.at(k), tol)) throw ShapeViolation("U_" + std::to_string(alpha) + " has a positive power z^" + std::to_string(k));
    if (!near(s.coeff(0), frame.template E_as<S>(alpha), tol))
        throw ShapeViolation("constant term of U_" + std::to_string(alpha) + " differs from E_" + std::to_string(alpha));
}

/// V_{alpha,0} z + lower.
template <Scalar S>
void check_v_shape(const LoopSeries<S>& s, const CommutativeFrame& frame, int alpha, double tol) {
    check_series_size(s, frame, "V");
    if (!s.closed_above()) throw ShapeViolation("V_" + std::to_string(alpha) + " must be bounded above");
    for (int k = std::max(2, s.window().lo); k <= s.window().hi; ++k)
        if (!near_zero(s.at(k), tol)) throw ShapeViolation("V_" + std::to_string(alpha) + " has a power z^" + std::to_string(k) + " above z");
}

/// Sum_{j>=0} S_j z^{j-1}.
template <Scalar S>
void check_w_shape(const LoopSeries<S>& s, const CommutativeFrame& frame, int alpha, double tol) {
    check_series_size(s, frame, "W");
    if (!s.closed_below()) throw ShapeViolation("W_" + std::to_string(alpha) + " must be bounded below");
    for (int k = s.window().lo; k <= std::min(-2, s.window().hi); ++k)
        if (!near_zero(s.at(k), tol)) throw ShapeViolation("W_" + std::to_string(alpha) + " has a power z^" + std::to_string(k) + " below 1/z");
}

template <Scalar S>
void check_count(const std::vector<LoopSeries<S>>& fam, const CommutativeFrame& frame, const char* what) {
    if (fam.size() != frame.rank())
        throw ShapeViolation(std::string(what) + ": expected " + std::to_string(frame.rank()) + " series, got " + std::to_string(fam.size()));
}

} // namespace detail

/// Builds a deformation from explicit series, validating the shapes.
template <Scalar S>
Deformation<S> from_series(HierarchyKind kind, const CommutativeFrame& frame, std::vector<LoopSeries<S>> u,
                           std::vector<LoopSeries<S>> v, std::vector<LoopSeries<S>> w, double tol = 1e-8) {
    Deformation<S> d{kind, frame, std::move(u), std::move(v), std::move(w), std::nullopt};
    if (kind == HierarchyKind::Standard || kind == HierarchyKind::Combined) {
        detail::check_count(d.u, frame, "U");
        for (std::size_t a = 0; a < d.u.size(); ++a) detail::check_u_shape(d.u[a], frame, static_cast<int>(a + 1), tol);
    } else if (!d.u.empty())
        throw ShapeViolation("strict deformations carry no U series");
    if (kind == HierarchyKind::Strict) {
        detail::check_count(d.v, frame, "V");
        for (std::size_t a = 0; a < d.v.size(); ++a) detail::check_v_shape(d.v[a], frame, static_cast<int>(a + 1), tol);
    } else if (!d.v.empty())
        throw ShapeViolation("only strict deformations carry V series");
    if (kind == HierarchyKind::Combined) {
        detail::check_count(d.w, frame, "W");
        for (std::size_t a = 0; a < d.w.size(); ++a) detail::check_w_shape(d.w[a], frame, static_cast<int>(a + 1), tol);
    } else if (!d.w.empty())
        throw ShapeViolation("only combined deformations carry W series");
    return d;
}

/// The undeformed generators E_a, E_a z, E_a z^{-1}.
template <Scalar S>
Deformation<S> trivial_deformation(HierarchyKind kind, const CommutativeFrame& frame) {
    Deformation<S> d{kind, frame, {}, {}, {}, std::nullopt};
    for (std::size_t a = 1; a <= frame.rank(); ++a) {
        const auto e = frame.template E_as<S>(static_cast<int>(a));
        if (kind != HierarchyKind::Strict) d.u.push_back(LoopSeries<S>::monomial(e, 0, Grading::Descending));
        if (kind == HierarchyKind::Strict) d.v.push_back(LoopSeries<S>::monomial(e, 1, Grading::Descending));
        if (kind == HierarchyKind::Combined) d.w.push_back(LoopSeries<S>::monomial(e, -1, Grading::Ascending));
    }
    return d;
}

namespace detail {

template <Scalar S>
void check_negative_witness(const LoopSeries<S>& g, bool unipotent) {
    if (!g.closed_above() || g.grading() != Grading::Descending)
        throw NotStrictlyNegative("dressing element must be a descending series bounded above");
    for (int k = std::max(1, g.window().lo); k <= g.window().hi; ++k)
        if (!g.at(k).is_zero()) throw NotStrictlyNegative("dressing element has a positive power z^" + std::to_string(k));
    if (unipotent && g.coeff(0) != Matrix<S>::identity(g.n()))
        throw NotUnipotent("dressing element of G_<0 must have identity constant term");
}

template <Scalar S>
void check_positive_witness(const LoopSeries<S>& x) {
    if (!x.closed_below()) throw ShapeViolation("dressing element of G_>=0 must be bounded below");
    for (int k = x.window().lo; k <= std::min(-1, x.window().hi); ++k)
        if (!x.at(k).is_zero()) throw ShapeViolation("dressing element of G_>=0 has a negative power z^" + std::to_string(k));
}

} // namespace detail

/// Dressing of the seed generators. Standard: U_a = g E_a g^{-1} with g in
/// G_<0; strict: V_a = Kg E_a z (Kg)^{-1}; combined: U from g and
/// W_a = X E_a z^{-1} X^{-1} with X in G_>=0.
template <Scalar S>
Deformation<S> deform(HierarchyKind kind, const CommutativeFrame& frame, const Witness<S>& witness) {
    Deformation<S> d{kind, frame, {}, {}, {}, witness};
    const std::size_t r = frame.rank();
    if (kind == HierarchyKind::Standard || kind == HierarchyKind::Combined) {
        if (!witness.negative) throw ValidationError("deformation needs a G_<0 dressing element");
        const auto& g = *witness.negative;
        if (g.n() != frame.n()) throw ValidationError("dressing element has the wrong matrix size");
        detail::check_negative_witness(g, true);
        const auto ginv = invert(g);
        for (std::size_t a = 1; a <= r; ++a) {
            const auto e = LoopSeries<S>::constant(frame.template E_as<S>(static_cast<int>(a)));
            d.u.push_back(series_mul(series_mul(g, e), ginv).with_grading(Grading::Descending));
        }
    }
    if (kind == HierarchyKind::Strict) {
        if (!witness.negative) throw ValidationError("strict deformation needs a G_<=0 dressing element");
        const auto& g = *witness.negative;
        if (g.n() != frame.n()) throw ValidationError("dressing element has the wrong matrix size");
        detail::check_negative_witness(g, false);
        const auto ginv = invert(g);
        for (std::size_t a = 1; a <= r; ++a) {
            const auto e = LoopSeries<S>::monomial(frame.template E_as<S>(static_cast<int>(a)), 1);
            d.v.push_back(series_mul(series_mul(g, e), ginv).with_grading(Grading::Descending));
        }
    }
    if (kind == HierarchyKind::Combined) {
        if (!witness.positive) throw ValidationError("combined deformation needs a G_>=0 dressing element");
        const auto x = witness.positive->with_grading(Grading::Ascending);
        if (x.n() != frame.n()) throw ValidationError("dressing element has the wrong matrix size");
        detail::check_positive_witness(x);
        const auto xinv = invert(x);
        for (std::size_t a = 1; a <= r; ++a) {
            const auto e = LoopSeries<S>::monomial(frame.template E_as<S>(static_cast<int>(a)), -1, Grading::Ascending);
            d.w.push_back(series_mul(series_mul(x, e), xinv).with_grading(Grading::Ascending));
        }
    }
    return d;
}

/// Where a flow's cut-off comes from: the target series, the power of z it
/// is multiplied with, and the region it is projected onto.
struct CutSpec {
    Target target;
    int shift = 0;
    Region region = Region::GEQ0;
};

inline CutSpec cut_spec(HierarchyKind kind, const Flow& f) {
    switch (kind) {
    case HierarchyKind::Standard:
        if (f.m < 0) throw IndexOutOfRange("standard hierarchy flows need m >= 0, got m = " + std::to_string(f.m));
        return {{Family::U, f.alpha}, f.m, Region::GEQ0};
    case HierarchyKind::Strict:
        if (f.m < 1) throw IndexOutOfRange("strict hierarchy flows need m >= 1, got m = " + std::to_string(f.m));
        return {{Family::V, f.alpha}, f.m - 1, Region::GT0};
    case HierarchyKind::Combined:
        if (f.m >= 0) return {{Family::U, f.alpha}, f.m, Region::GEQ0};
        return {{Family::W, f.alpha}, f.m + 1, Region::LT0};
    }
    throw IndexOutOfRange("unknown hierarchy kind");
}

/// U_a z^m, V_b z^{m-1} or W_b z^{m+1}: the series a cut-off projects.
template <Scalar S>
LoopSeries<S> generator(const Deformation<S>& d, const Flow& f) {
    const CutSpec c = cut_spec(d.kind, f);
    return d.series(c.target).shift(c.shift);
}

/// B_{m a} = pi_{>=0}(U_a z^m), C_{m b} = pi_{>0}(V_b z^{m-1}) or
/// C_{m b} = pi_{<0}(W_b z^{m+1}).
template <Scalar S>
LoopSeries<S> cutoff(const Deformation<S>& d, const Flow& f) {
    const CutSpec c = cut_spec(d.kind, f);
    LoopSeries<S> out = project(d.series(c.target).shift(c.shift), c.region);
    if (!out.is_polynomial())
        throw WindowUnderflow("cut-off for flow (" + f.key() + ") needs a deeper window of the dressed series");
    return out;
}

/// A_{m a} = B_{m a} - U_a z^m and its strict / negative counterparts.
template <Scalar S>
LoopSeries<S> part(const Deformation<S>& d, const Flow& f) {
    return cutoff(d, f) - generator(d, f);
}

inline void check_flow_target(HierarchyKind kind, const Flow& f, Target t) {
    (void)cut_spec(kind, f);
    const bool ok = kind == HierarchyKind::Standard ? t.family == Family::U
                    : kind == HierarchyKind::Strict ? t.family == Family::V
                                                    : t.family != Family::V;
    if (!ok) throw IndexOutOfRange("target family does not belong to the hierarchy");
}

/// Right-hand side [cut-off(f), target] of a Lax equation.
template <Scalar S>
LoopSeries<S> lax_rhs(const Deformation<S>& d, const Flow& f, Target t) {
    check_flow_target(d.kind, f, t);
    return series_bracket(cutoff(d, f), d.series(t));
}

/// derivative - [cutoff, target] with an explicitly supplied cut-off.
template <Scalar S>
LoopSeries<S> lax_residual(const LoopSeries<S>& cut, const LoopSeries<S>& target, const LoopSeries<S>& derivative) {
    return derivative - series_bracket(cut, target);
}

/// d_f(target) - [cutoff(f), target].
template <Scalar S>
LoopSeries<S> lax_residual(const Deformation<S>& d, const Flow& f, Target t, const LoopSeries<S>& derivative) {
    return derivative - lax_rhs(d, f, t);
}

/// d_{f1}(C_{f2}) as dictated by the Lax equations.
template <Scalar S>
LoopSeries<S> lax_cutoff_derivative(const Deformation<S>& d, const Flow& f1, const Flow& f2) {
    const CutSpec c2 = cut_spec(d.kind, f2);
    return project(lax_rhs(d, f1, c2.target).shift(c2.shift), c2.region);
}

/// d_{f1} of the part A / D belonging to f2, as dictated by the Lax equations.
template <Scalar S>
LoopSeries<S> lax_part_derivative(const Deformation<S>& d, const Flow& f1, const Flow& f2) {
    const CutSpec c2 = cut_spec(d.kind, f2);
    return lax_cutoff_derivative(d, f1, f2) - lax_rhs(d, f1, c2.target).shift(c2.shift);
}

/// d_1(C_2) - d_2(C_1) - [C_1, C_2].
template <Scalar S>
LoopSeries<S> zc_residual(const LoopSeries<S>& c1, const LoopSeries<S>& c2, const LoopSeries<S>& d1_c2,
                          const LoopSeries<S>& d2_c1) {
    return d1_c2 - d2_c1 - series_bracket(c1, c2);
}

/// Derivatives supplied to a zero-curvature check: d_{f1} of the second
/// cut-off (or part) and d_{f2} of the first.
template <Scalar S>
struct ZcDerivatives {
    LoopSeries<S> d1_of_second;
    LoopSeries<S> d2_of_first;
};

template <Scalar S>
LoopSeries<S> zc_residual(const Deformation<S>& d, const Flow& f1, const Flow& f2, const ZcDerivatives<S>& der) {
    return zc_residual(cutoff(d, f1), cutoff(d, f2), der.d1_of_second, der.d2_of_first);
}

template <Scalar S>
ZcDerivatives<S> lax_zc_derivatives(const Deformation<S>& d, const Flow& f1, const Flow& f2) {
    return {lax_cutoff_derivative(d, f1, f2), lax_cutoff_derivative(d, f2, f1)};
}

inline void check_same_part_family(HierarchyKind kind, const Flow& f1, const Flow& f2) {
    if (cut_spec(kind, f1).target.family != cut_spec(kind, f2).target.family)
        throw IndexOutOfRange("part relations need both flows on the same side");
}

/// d_1(A_2) - d_2(A_1) - [A_1, A_2] (or with D-parts).
template <Scalar S>
LoopSeries<S> corollary_residual(const Deformation<S>& d, const Flow& f1, const Flow& f2, const ZcDerivatives<S>& der) {
    check_same_part_family(d.kind, f1, f2);
    return zc_residual(part(d, f1), part(d, f2), der.d1_of_second, der.d2_of_first);
}

template <Scalar S>
ZcDerivatives<S> lax_part_derivatives(const Deformation<S>& d, const Flow& f1, const Flow& f2) {
    check_same_part_family(d.kind, f1, f2);
    return {lax_part_derivative(d, f1, f2), lax_part_derivative(d, f2, f1)};
}

/// Flows a deformation can be checked against, restricted to |m| <= bound.
inline std::vector<Flow> flows_of(HierarchyKind kind, std::size_t rank, int lo, int hi) {
    std::vector<Flow> out;
    for (int m = lo; m <= hi; ++m) {
        if (kind == HierarchyKind::Standard && m < 0) continue;
        if (kind == HierarchyKind::Strict && m < 1) continue;
        for (std::size_t a = 1; a <= rank; ++a) out.push_back({m, static_cast<int>(a)});
    }
    return out;
}

template <Scalar S>
LoopSeries<S> conjugate_const(const Matrix<S>& g0, const Matrix<S>& g0inv, const LoopSeries<S>& s) {
    return (g0 * s) * g0inv;
}

/// Conjugates every series (and the frame) by a constant invertible matrix.
template <Scalar S>
Deformation<S> frame_conjugate(const Deformation<S>& d, const Matrix<GaussianRational>& g0) {
    Matrix<GaussianRational> inv0;
    try {
        inv0 = inverse(g0);
    } catch (const SingularLeading&) {
        throw SingularLeading("frame conjugation by a singular matrix");
    }
    const auto g = lift<S>(g0);
    const auto gi = lift<S>(inv0);
    Deformation<S> out{d.kind, d.frame.conjugated(g0), {}, {}, {}, std::nullopt};
    for (const auto& s : d.u) out.u.push_back(conjugate_const(g, gi, s));
    for (const auto& s : d.v) out.v.push_back(conjugate_const(g, gi, s));
    for (const auto& s : d.w) out.w.push_back(conjugate_const(g, gi, s));
    if (d.witness) {
        Witness<S> wt;
        if (d.witness->negative) wt.negative = conjugate_const(g, gi, *d.witness->negative);
        if (d.witness->positive) wt.positive = conjugate_const(g, gi, *d.witness->positive);
        out.witness = wt;
    }
    return out;
}

/// exp of a constant matrix: finite sum when nilpotent, Eigen for the
/// complex backend.
template <Scalar S>
Matrix<S> const_exp(const Matrix<S>& h) {
    const std::size_t n = h.n();
    bool nilpotent = false;
    {
        Matrix<S> p = Matrix<S>::identity(n);
        for (std::size_t k = 0; k < n; ++k) p = p * h;
        if constexpr (ScalarTraits<S>::exact) nilpotent = p.is_zero();
        else
            nilpotent = p.norm() == 0.0;
    }
    if (nilpotent) {
        Matrix<S> sum = Matrix<S>::identity(n);
        Matrix<S> p = Matrix<S>::identity(n);
        for (std::size_t k = 1; k < n; ++k) {
            p = p * h;
            sum += ScalarTraits<S>::from_gauss(GaussianRational(detail::inverse_factorial(static_cast<int>(k)))) * p;
        }
        return sum;
    }
    if constexpr (std::is_same_v<S, Complex>) {
        return from_dense(expm(to_dense(h)));
    } else {
        throw ValidationError("exponential of a non-nilpotent matrix is not representable over an exact backend");
    }
}

/// U_hat = exp(-sum t0_a E_a) U exp(sum t0_a E_a).
template <Scalar S>
Deformation<S> zero_time_normalize(const Deformation<S>& d, const std::vector<S>& t0) {
    if (d.kind != HierarchyKind::Standard) throw ValidationError("zero-time normalization applies to standard deformations");
    if (t0.size() != d.frame.rank()) throw ValidationError("need one t0 value per frame element");
    Matrix<S> h(d.frame.n());
    for (std::size_t a = 0; a < t0.size(); ++a) h += t0[a] * d.frame.template E_as<S>(static_cast<int>(a + 1));
    const Matrix<S> ep = const_exp(h);
    const Matrix<S> em = const_exp(-h);
    Deformation<S> out{d.kind, d.frame, {}, {}, {}, std::nullopt};
    for (const auto& s : d.u) out.u.push_back(conjugate_const(em, ep, s));
    return out;
}

/// Coefficient-wise derivation of a symbolic series.
inline LoopSeries<DiffPoly> derive_series(const LoopSeries<DiffPoly>& s, const DerivationSymbol& d) {
    return s.map_coeffs([&](const Matrix<DiffPoly>& m) { return m.map([&](const DiffPoly& p) { return p.derive(d); }); });
}

inline LoopSeries<DiffPoly> substitute_series(const LoopSeries<DiffPoly>& s, const Bindings& b) {
    return s.map_coeffs([&](const Matrix<DiffPoly>& m) { return m.map([&](const DiffPoly& p) { return p.substitute(b); }); });
}

inline Matrix<DiffPoly> substitute_matrix(const Matrix<DiffPoly>& m, const Bindings& b) {
    return m.map([&](const DiffPoly& p) { return p.substitute(b); });
}

} // namespace slt
