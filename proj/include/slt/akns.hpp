#pragma once

// Symbolic reduction of the n = 2 diagonal hierarchy to the AKNS system.

#include <string>

#include "json.hpp"

#include "slt/diffpoly.hpp"
#include "slt/frame.hpp"
#include "slt/hierarchy.hpp"
#include "slt/loop_series.hpp"

namespace slt {

struct AknsReport {
    // Dressing coordinates: X_k = [[-alpha_k, beta_k], [gamma_k, alpha_k]].
    Matrix<DiffPoly> u1_dressed; // coefficient of z^-1 in U_1
    Matrix<DiffPoly> u2_dressed; // coefficient of z^-2 in U_1
    DiffPoly q;                  // (U_{1,1})_{12} in dressing coordinates
    DiffPoly r;                  // (U_{1,1})_{21}
    DiffPoly u11;                // in q, r
    DiffPoly u22;
    DiffPoly u12; // solved from the z^1 equality
    DiffPoly u21;
    DiffPoly pde_q; // i d_{2,1} q = pde_q
    DiffPoly pde_r; // i d_{2,1} r = pde_r
    bool z1_diagonal_vanishes = false;
    bool z0_diagonal_vanishes = false;

    nlohmann::json to_json() const {
        return {{"q", q.to_json()},
                {"r", r.to_json()},
                {"u11", u11.to_json()},
                {"u22", u22.to_json()},
                {"u12", u12.to_json()},
                {"u21", u21.to_json()},
                {"pde_q", pde_q.to_json()},
                {"pde_r", pde_r.to_json()},
                {"consistency", {{"z1_diagonal", z1_diagonal_vanishes}, {"z0_diagonal", z0_diagonal_vanishes}}}};
    }

    /// Flow labels x = t_{1,1}, t = t_{2,1}.
    static std::string label(const DerivationSymbol& d) {
        if (d == DerivationSymbol{1, 1}) return "x";
        if (d == DerivationSymbol{2, 1}) return "t";
        return "[" + d.key() + "]";
    }

    std::string text() const {
        std::string s;
        s += "u11 = " + u11.str(label) + "\n";
        s += "u22 = " + u22.str(label) + "\n";
        s += "u12 = " + u12.str(label) + "\n";
        s += "u21 = " + u21.str(label) + "\n";
        s += "i*q_t = " + pde_q.str(label) + "\n";
        s += "i*r_t = " + pde_r.str(label) + "\n";
        return s;
    }
};

namespace detail {

inline Matrix<DiffPoly> akns_x(int k) {
    const auto a = DiffPoly::var("alpha" + std::to_string(k));
    const auto b = DiffPoly::var("beta" + std::to_string(k));
    const auto c = DiffPoly::var("gamma" + std::to_string(k));
    return Matrix<DiffPoly>{{-a, b}, {c, a}};
}

inline bool diagonal_zero(const Matrix<DiffPoly>& m) { return m(0, 0).is_zero() && m(1, 1).is_zero(); }

} // namespace detail

inline AknsReport akns_reduce() {
    const auto frame = CommutativeFrame::diagonal(2);
    const DerivationSymbol dx{1, 1};
    const DerivationSymbol dt{2, 1};
    AknsReport rep;

    auto x = LoopSeries<DiffPoly>::polynomial(2, -2, -1);
    x.at(-1) = detail::akns_x(1);
    x.at(-2) = detail::akns_x(2);
    Witness<DiffPoly> wt;
    wt.negative = exp_neg(x, -2);
    const auto dressed = deform(HierarchyKind::Standard, frame, wt);
    const auto& u1 = dressed.u.front();
    rep.u1_dressed = u1.coeff(-1);
    rep.u2_dressed = u1.coeff(-2);
    rep.q = rep.u1_dressed(0, 1);
    rep.r = rep.u1_dressed(1, 0);

    const Indeterminate q("q"), r("r"), u12("u12"), u21("u21");
    const DiffPoly Q(q), R(r);
    Bindings to_qr;
    to_qr[Indeterminate("beta1")] = (rep.q - Q).solve_for(Indeterminate("beta1"));
    to_qr[Indeterminate("gamma1")] = (rep.r - R).solve_for(Indeterminate("gamma1"));
    rep.u11 = rep.u2_dressed(0, 0).substitute(to_qr);
    rep.u22 = rep.u2_dressed(1, 1).substitute(to_qr);

    // Generic U_1 = E_1 + U_{1,1} z^-1 + U_{1,2} z^-2 with unknown off-diagonal u12, u21.
    auto u = LoopSeries<DiffPoly>::descending(2, -2, 0);
    u.at(0) = frame.E_as<DiffPoly>(1);
    u.at(-1) = Matrix<DiffPoly>{{DiffPoly(), Q}, {R, DiffPoly()}};
    u.at(-2) = Matrix<DiffPoly>{{rep.u11, DiffPoly(u12)}, {DiffPoly(u21), rep.u22}};
    const auto generic = from_series<DiffPoly>(HierarchyKind::Standard, frame, {u}, {}, {});
    const auto b1 = cutoff(generic, dx);
    const auto b2 = cutoff(generic, dt);
    const auto res = zc_residual(b1, b2, derive_series(b2, dx), derive_series(b1, dt));

    const auto z1 = res.coeff(1);
    rep.z1_diagonal_vanishes = detail::diagonal_zero(z1);
    Bindings solved;
    solved[u12] = z1(0, 1).solve_for(u12);
    solved[u21] = z1(1, 0).solve_for(u21);
    rep.u12 = solved[u12];
    rep.u21 = solved[u21];

    const auto z0 = substitute_matrix(res.coeff(0), solved);
    rep.z0_diagonal_vanishes = detail::diagonal_zero(z0);
    const DiffPoly i(GaussianRational::i());
    rep.pde_q = i * z0(0, 1).solve_for(q.derived(dt));
    rep.pde_r = i * z0(1, 0).solve_for(r.derived(dt));
    return rep;
}

} // namespace slt
