#pragma once

// Oscillating matrices {factor} psi_0 with psi_0 = exp(sum t_{m a} E_a z^m),
// kept as unevaluated (factor, flows) pairs.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "slt/diffpoly.hpp"
#include "slt/errors.hpp"
#include "slt/frame.hpp"
#include "slt/hierarchy.hpp"
#include "slt/loop_series.hpp"

namespace slt {

enum class Side { Infinity, Zero };

inline std::string to_string(Side s) { return s == Side::Infinity ? "infinity" : "zero"; }

template <Scalar S>
using FlowRecord = std::map<DerivationSymbol, S>;

/// Exponent vector l of delta(l) = diag(z^{l_1}, ..., z^{l_n}).
struct ExponentVector {
    std::vector<int> l;

    friend bool operator==(const ExponentVector&, const ExponentVector&) = default;

    /// delta(l) commutes with every E_a iff l_i = l_j wherever some E_a has a
    /// nonzero (i, j) entry.
    bool commutes_with(const CommutativeFrame& frame) const {
        if (l.size() != frame.n()) return false;
        for (const auto& e : frame.basis())
            for (std::size_t i = 0; i < e.n(); ++i)
                for (std::size_t j = 0; j < e.n(); ++j)
                    if (!e(i, j).is_zero() && l[i] != l[j]) return false;
        return true;
    }

    void validate(const CommutativeFrame& frame) const {
        if (l.size() != frame.n()) throw ValidationError("exponent vector must have length " + std::to_string(frame.n()));
        if (!commutes_with(frame)) throw ValidationError("delta(l) does not commute with the frame");
    }

    ExponentVector shifted(int k) const {
        ExponentVector out = *this;
        for (int& x : out.l) x += k;
        return out;
    }

    ExponentVector negated() const {
        ExponentVector out = *this;
        for (int& x : out.l) x = -x;
        return out;
    }

    template <Scalar S>
    LoopSeries<S> delta(Grading g = Grading::Descending) const {
        if (l.empty()) throw ValidationError("empty exponent vector");
        const auto [lo, hi] = std::minmax_element(l.begin(), l.end());
        auto out = LoopSeries<S>::polynomial(l.size(), *lo, *hi, g);
        for (std::size_t i = 0; i < l.size(); ++i) out.at(l[i])(i, i) = ScalarTraits<S>::one();
        return out;
    }
};

template <Scalar S>
struct OscillatingMatrix {
    Side side = Side::Infinity;
    LoopSeries<S> factor;
    FlowRecord<S> flows;
    // Typed elements: factor = k delta(l) with k in G_<0 (infinity) or G_>=0 (zero).
    std::optional<ExponentVector> l;
    std::optional<LoopSeries<S>> k;

    bool typed() const { return l.has_value() && k.has_value(); }

    friend bool operator==(const OscillatingMatrix& a, const OscillatingMatrix& b) {
        return a.side == b.side && a.factor == b.factor && a.flows == b.flows;
    }

    nlohmann::json to_json() const {
        nlohmann::json fl = nlohmann::json::object();
        for (const auto& [d, t] : flows) fl[d.key()] = ScalarTraits<S>::to_json(t);
        nlohmann::json j{{"side", to_string(side)}, {"factor", factor.to_json()}, {"flows", fl}};
        if (l) j["l"] = l->l;
        return j;
    }
};

namespace detail {

template <Scalar S>
void check_side_algebra(Side side, const LoopSeries<S>& k) {
    if (k.is_polynomial()) return;
    const Grading want = side == Side::Infinity ? Grading::Descending : Grading::Ascending;
    if (k.grading() != want)
        throw SideMismatch("series lives in the wrong algebra for an oscillating matrix at " + to_string(side));
}

} // namespace detail

/// Typed oscillating matrix {k delta(l)} psi_0.
template <Scalar S>
OscillatingMatrix<S> make_typed(Side side, const LoopSeries<S>& k, const ExponentVector& l, FlowRecord<S> flows,
                                const CommutativeFrame& frame) {
    l.validate(frame);
    if (k.n() != frame.n()) throw ValidationError("factor has the wrong matrix size");
    if (side == Side::Infinity) {
        detail::check_negative_witness(k, true);
    } else {
        detail::check_positive_witness(k);
        (void)inverse(k.coeff(0));
    }
    const Grading g = side == Side::Infinity ? Grading::Descending : Grading::Ascending;
    const auto kk = k.with_grading(g);
    OscillatingMatrix<S> psi{side, series_mul(kk, l.delta<S>(g)).with_grading(g), std::move(flows), l, kk};
    return psi;
}

template <Scalar S>
OscillatingMatrix<S> make_oscillating(Side side, const LoopSeries<S>& factor, FlowRecord<S> flows) {
    detail::check_side_algebra(side, factor);
    return {side, factor, std::move(flows), std::nullopt, std::nullopt};
}

/// Left module action: factor -> k factor.
template <Scalar S>
OscillatingMatrix<S> osc_act(const LoopSeries<S>& k, const OscillatingMatrix<S>& psi) {
    detail::check_side_algebra(psi.side, k);
    return {psi.side, series_mul(k, psi.factor), psi.flows, std::nullopt, std::nullopt};
}

/// Right action of E_a (at infinity) or E_a z^{-1} (at zero).
template <Scalar S>
OscillatingMatrix<S> osc_right_frame(const OscillatingMatrix<S>& psi, int alpha, const CommutativeFrame& frame) {
    const int power = psi.side == Side::Infinity ? 0 : -1;
    const auto e = LoopSeries<S>::monomial(frame.template E_as<S>(alpha), power, psi.factor.grading());
    return {psi.side, series_mul(psi.factor, e), psi.flows, std::nullopt, std::nullopt};
}

/// d_{m a}({g} psi_0) = {d(g) + g E_a z^m} psi_0; `dfactor` is d(g).
template <Scalar S>
OscillatingMatrix<S> osc_derive(const OscillatingMatrix<S>& psi, const DerivationSymbol& d, const LoopSeries<S>& dfactor,
                                const CommutativeFrame& frame) {
    const auto e = LoopSeries<S>::monomial(frame.template E_as<S>(d.alpha), d.m, psi.factor.grading());
    return {psi.side, dfactor + series_mul(psi.factor, e), psi.flows, std::nullopt, std::nullopt};
}

inline OscillatingMatrix<DiffPoly> osc_derive(const OscillatingMatrix<DiffPoly>& psi, const DerivationSymbol& d,
                                              const CommutativeFrame& frame) {
    return osc_derive(psi, d, derive_series(psi.factor, d), frame);
}

template <Scalar S>
struct Connection {
    LoopSeries<S> m;
    bool ok = false;
    double forbidden_norm = 0.0;
};

/// M = d(k) k^{-1} + k E_a z^m k^{-1} for a typed psi; the verdict checks
/// that M has no part in the region forbidden for the side (negative powers
/// at infinity, nonnegative powers at zero).
template <Scalar S>
Connection<S> extract_connection(const OscillatingMatrix<S>& psi, const DerivationSymbol& flow, const LoopSeries<S>& dk,
                                 const CommutativeFrame& frame, double tol = 0.0) {
    if (!psi.typed()) throw ValidationError("connection extraction needs a typed oscillating matrix");
    const auto& k = *psi.k;
    const auto kinv = invert(k);
    const auto e = LoopSeries<S>::monomial(frame.template E_as<S>(flow.alpha), flow.m, k.grading());
    Connection<S> c;
    c.m = series_mul(dk, kinv) + series_mul(series_mul(k, e), kinv);
    const Region forbidden = psi.side == Side::Infinity ? Region::LT0 : Region::GEQ0;
    const auto bad = project(c.m, forbidden);
    c.forbidden_norm = bad.max_norm();
    if constexpr (ScalarTraits<S>::exact) c.ok = bad.is_zero();
    else
        c.ok = c.forbidden_norm <= tol;
    return c;
}

inline Connection<DiffPoly> extract_connection(const OscillatingMatrix<DiffPoly>& psi, const DerivationSymbol& flow,
                                               const CommutativeFrame& frame) {
    if (!psi.typed()) throw ValidationError("connection extraction needs a typed oscillating matrix");
    return extract_connection(psi, flow, derive_series(*psi.k, flow), frame);
}

} // namespace slt
