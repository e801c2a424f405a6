#include <gtest/gtest.h>

#include "support.hpp"

using namespace slt;
using namespace slt::testing;

namespace {

const std::array<Region, 4> kRegions{Region::GEQ0, Region::LT0, Region::GT0, Region::LEQ0};

Matrix<GR> mat2(GR a, GR b, GR c, GR d) {
    Matrix<GR> m(2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
    return m;
}

Matrix<DiffPoly> sym2(const std::string& a, const std::string& b, const std::string& c, int k) {
    const auto s = std::to_string(k);
    Matrix<DiffPoly> m(2);
    m(0, 0) = -DiffPoly::var(a + s);
    m(0, 1) = DiffPoly::var(b + s);
    m(1, 0) = DiffPoly::var(c + s);
    m(1, 1) = DiffPoly::var(a + s);
    return m;
}

bool supported_in(const LoopSeries<GR>& x, Region r) {
    for (int k = x.window().lo; k <= x.window().hi; ++k) {
        if (x.at(k).is_zero()) continue;
        const bool in = (r == Region::GEQ0 && k >= 0) || (r == Region::LT0 && k < 0) || (r == Region::GT0 && k > 0) ||
                        (r == Region::LEQ0 && k <= 0);
        if (!in) return false;
    }
    return true;
}

} // namespace

TEST(Projection, Examples) {
    const Matrix<GR> e1 = mat2(-GR::i(), 0, 0, GR::i());
    Rng rng(1);
    const auto x = rand_matrix<GR>(rng, 2);
    auto s = LoopSeries<GR>::polynomial(2, -1, 1);
    s.at(1) = e1;
    s.at(-1) = x;
    EXPECT_EQ(project(s, Region::GEQ0), LoopSeries<GR>::monomial(e1, 1));
    auto c = LoopSeries<GR>::polynomial(2, 0, 1);
    c.at(0) = x;
    c.at(1) = e1;
    EXPECT_EQ(project(c, Region::GT0), LoopSeries<GR>::monomial(e1, 1));
}

TEST(Projection, PartitionAndIdempotence) {
    Rng rng(2);
    for (int t = 0; t < 40; ++t) {
        const auto x = rand_series<GR>(rng, 2, -4, 4);
        EXPECT_EQ(project(x, Region::GEQ0) + project(x, Region::LT0), x);
        EXPECT_EQ(project(x, Region::GT0) + project(x, Region::LEQ0), x);
        for (Region r : kRegions) {
            EXPECT_EQ(project(project(x, r), r), project(x, r));
            EXPECT_TRUE(supported_in(project(x, r), r));
        }
    }
}

TEST(Projection, OpenSeriesStaysHonest) {
    Rng rng(3);
    const auto x = rand_series<GR>(rng, 2, -3, 2, false, true);
    const auto neg = project(x, Region::LT0);
    EXPECT_FALSE(neg.closed_below());
    EXPECT_THROW((void)neg.coeff(-4), WindowUnderflow);
    const auto pos = project(x, Region::GEQ0);
    EXPECT_TRUE(pos.is_polynomial());
}

TEST(Bracket, FrameElementsCommute) {
    const auto frame = make_frame(FrameKind::Diagonal, 3);
    for (int a = 1; a <= 2; ++a)
        for (int b = 1; b <= 2; ++b)
            for (int i = -2; i <= 2; ++i)
                for (int j = -2; j <= 2; ++j) {
                    const auto x = LoopSeries<GR>::monomial(frame.E(a), i);
                    const auto y = LoopSeries<GR>::monomial(frame.E(b), j);
                    EXPECT_TRUE(series_bracket(x, y).is_zero());
                }
}

TEST(Bracket, PowersOfZAreCentral) {
    Rng rng(4);
    const auto x = rand_matrix<GR>(rng, 3), y = rand_matrix<GR>(rng, 3);
    const auto lhs = series_bracket(LoopSeries<GR>::monomial(x, -1), LoopSeries<GR>::monomial(y, 2));
    EXPECT_EQ(lhs, LoopSeries<GR>::monomial(commutator(x, y), 1));
}

TEST(Product, MatchesBruteForce) {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto a = rand_series<GR>(rng, 2, -3, 2);
        const auto b = rand_series<GR>(rng, 2, -1, 3);
        const auto p = series_mul(a, b);
        for (const auto& [k, m] : brute_product(a, b)) EXPECT_EQ(p.coeff(k), m) << "power " << k;
    }
}

TEST(Product, TruncatedInputsGiveExactWindow) {
    Rng rng(6);
    const auto a = rand_series<GR>(rng, 2, -4, 1, false, true);
    const auto b = rand_series<GR>(rng, 2, -4, 2, false, true);
    const auto p = series_mul(a, b);
    EXPECT_EQ(p.window().hi, 3);
    EXPECT_EQ(p.window().lo, -2);
    const auto full = brute_product(a, b);
    for (int k = -2; k <= 3; ++k) EXPECT_EQ(p.coeff(k), full.at(k));
    EXPECT_THROW((void)p.coeff(-3), WindowUnderflow);
    EXPECT_THROW((void)series_mul(a, b, Window{-6, 3}), WindowUnderflow);
}

TEST(Bracket, JacobiOverGaussianRationals) {
    Rng rng(7);
    for (int t = 0; t < 10; ++t) {
        const auto x = rand_series<GR>(rng, 2, -4, 4);
        const auto y = rand_series<GR>(rng, 2, -4, 4);
        const auto z = rand_series<GR>(rng, 2, -4, 4);
        const auto j = series_bracket(x, series_bracket(y, z)) + series_bracket(y, series_bracket(z, x)) +
                       series_bracket(z, series_bracket(x, y));
        EXPECT_TRUE(j.is_zero());

        // Oracle: all six triple products expanded from raw coefficients.
        std::map<int, Matrix<GR>> acc;
        auto add = [&](const LoopSeries<GR>& a, const LoopSeries<GR>& b, const LoopSeries<GR>& c, int sign) {
            for (int i = -4; i <= 4; ++i)
                for (int k = -4; k <= 4; ++k)
                    for (int l = -4; l <= 4; ++l) {
                        auto m = a.at(i) * b.at(k) * c.at(l);
                        auto it = acc.try_emplace(i + k + l, Matrix<GR>(2)).first;
                        if (sign > 0) it->second += m;
                        else
                            it->second -= m;
                    }
        };
        add(x, y, z, 1), add(x, z, y, -1), add(y, z, x, -1), add(z, y, x, 1);
        add(y, z, x, 1), add(y, x, z, -1), add(z, x, y, -1), add(x, z, y, 1);
        add(z, x, y, 1), add(z, y, x, -1), add(x, y, z, -1), add(y, x, z, 1);
        for (const auto& [k, m] : acc) EXPECT_TRUE(m.is_zero());
    }
}

TEST(Bracket, SubalgebraClosure) {
    Rng rng(8);
    for (Region r : kRegions) {
        for (int t = 0; t < 10; ++t) {
            const auto x = project(rand_series<GR>(rng, 2, -3, 3), r);
            const auto y = project(rand_series<GR>(rng, 2, -3, 3), r);
            EXPECT_TRUE(supported_in(series_bracket(x, y), r));
        }
    }
}

TEST(Exp, ZeroAndFirstOrder) {
    auto zero = LoopSeries<GR>::polynomial(2, -2, -1);
    EXPECT_EQ(exp_neg(zero, -2), LoopSeries<GR>::identity(2));

    Rng rng(9);
    const auto x1 = rand_matrix<GR>(rng, 2);
    const auto e = exp_neg(LoopSeries<GR>::monomial(x1, -1), -2);
    EXPECT_EQ(e.window(), (Window{-2, 0}));
    EXPECT_EQ(e.coeff(0), Matrix<GR>::identity(2));
    EXPECT_EQ(e.coeff(-1), x1);
    EXPECT_EQ(e.coeff(-2), GR(mpq_class(1, 2)) * (x1 * x1));
}

TEST(Exp, RejectsNonNegativePowers) {
    auto x = LoopSeries<GR>::polynomial(2, -1, 0);
    x.at(0) = Matrix<GR>::identity(2);
    EXPECT_THROW(exp_neg(x, -3), NotStrictlyNegative);
    auto g = LoopSeries<GR>::polynomial(2, -1, 0);
    g.at(0) = GR(2) * Matrix<GR>::identity(2);
    EXPECT_THROW(log_unip(g, -3), NotUnipotent);
}

TEST(Exp, LogInvertsExp) {
    Rng rng(10);
    for (int t = 0; t < 20; ++t) {
        const auto x = rand_series<GR>(rng, 2, -3, -1);
        const auto g = exp_neg(x, -6);
        EXPECT_EQ(g.window(), (Window{-6, 0}));
        // Term-by-term oracle: Id + X + X^2/2 + ... truncated at -6.
        std::map<int, Matrix<GR>> oracle{{0, Matrix<GR>::identity(2)}};
        std::map<int, Matrix<GR>> power{{0, Matrix<GR>::identity(2)}};
        mpq_class fact = 1;
        for (int k = 1; k <= 6; ++k) {
            std::map<int, Matrix<GR>> next;
            for (const auto& [p, m] : power)
                for (int j = -3; j <= -1; ++j)
                    if (p + j >= -6) next.try_emplace(p + j, Matrix<GR>(2)).first->second += m * x.at(j);
            power = next;
            fact /= k;
            for (const auto& [p, m] : power) oracle.try_emplace(p, Matrix<GR>(2)).first->second += GR(fact) * m;
        }
        for (int k = -6; k <= 0; ++k) {
            const auto it = oracle.find(k);
            EXPECT_EQ(g.coeff(k), it == oracle.end() ? Matrix<GR>(2) : it->second);
        }
        const auto back = log_unip(g, -6);
        EXPECT_EQ(back.truncate({-6, -1}), x.truncate({-3, -1}).truncate({-6, -1}));
        for (int k = -6; k <= -4; ++k) EXPECT_TRUE(back.coeff(k).is_zero());
    }
}

TEST(Invert, GeometricSeries) {
    Rng rng(11);
    const auto x = rand_matrix<GR>(rng, 2);
    auto g = LoopSeries<GR>::polynomial(2, -1, 0);
    g.at(0) = Matrix<GR>::identity(2);
    g.at(-1) = x;
    const auto inv = invert(g, -4);
    Matrix<GR> p = Matrix<GR>::identity(2);
    for (int k = 0; k >= -4; --k) {
        EXPECT_EQ(inv.coeff(k), (k % 2 == 0 ? p : -p));
        p = p * x;
    }
}

TEST(Invert, Constant) {
    const auto k = mat2(1, 2, 3, 4);
    EXPECT_EQ(invert(LoopSeries<GR>::constant(k)), LoopSeries<GR>::constant(inverse(k)));
    EXPECT_THROW(invert(LoopSeries<GR>::constant(mat2(1, 2, 2, 4))), SingularLeading);
}

TEST(Invert, RandomNonPositiveGroup) {
    Rng rng(12);
    for (int t = 0; t < 15; ++t) {
        auto g = rand_negative_group<GR>(rng, 2, 5);
        const auto k0 = mat2(rand_gauss(rng), 1, 1, 0);
        g = k0 * g;
        const auto gi = invert(g);
        EXPECT_EQ(series_mul(g, gi).truncate({-5, 0}), LoopSeries<GR>::identity(2).truncate({-5, 0}));
        EXPECT_EQ(series_mul(gi, g).truncate({-5, 0}), LoopSeries<GR>::identity(2).truncate({-5, 0}));
    }
}

TEST(Invert, AscendingMirror) {
    Rng rng(13);
    const auto x = rand_positive_group<GR>(rng, 2, 4);
    const auto xi = invert(x);
    EXPECT_EQ(xi.grading(), Grading::Ascending);
    const auto prod = series_mul(x, xi);
    for (int k = 0; k <= 4; ++k) EXPECT_EQ(prod.coeff(k), k == 0 ? Matrix<GR>::identity(2) : Matrix<GR>(2));
}

TEST(Conjugate, AknsDressingCoefficients) {
    const auto e1 = LoopSeries<DiffPoly>::constant(lift<DiffPoly>(mat2(-GR::i(), 0, 0, GR::i())));
    auto x = LoopSeries<DiffPoly>::polynomial(2, -2, -1);
    x.at(-1) = sym2("alpha", "beta", "gamma", 1);
    x.at(-2) = sym2("alpha", "beta", "gamma", 2);
    const auto g = exp_neg(x, -2);
    const auto u = conjugate(g, e1);

    const DiffPoly i(GR::i());
    const auto b1 = DiffPoly::var("beta1"), g1 = DiffPoly::var("gamma1"), a1 = DiffPoly::var("alpha1");
    const auto b2 = DiffPoly::var("beta2"), g2 = DiffPoly::var("gamma2");
    const DiffPoly two(2);

    const auto c1 = u.coeff(-1);
    EXPECT_TRUE(c1(0, 0).is_zero());
    EXPECT_EQ(c1(0, 1), two * i * b1);
    EXPECT_EQ(c1(1, 0), -(two * i * g1));
    EXPECT_TRUE(c1(1, 1).is_zero());
    EXPECT_EQ(c1, commutator(x.at(-1), e1.at(0)));

    const auto c2 = u.coeff(-2);
    EXPECT_EQ(c2(0, 0), -(two * i * b1 * g1));
    EXPECT_EQ(c2(0, 1), two * i * (b2 - a1 * b1));
    EXPECT_EQ(c2(1, 0), -(two * i * (g2 + a1 * g1)));
    EXPECT_EQ(c2(1, 1), two * i * b1 * g1);
    EXPECT_EQ(u.coeff(0), e1.at(0));
}

TEST(Conjugate, IdentityIsNoOp) {
    Rng rng(14);
    const auto y = rand_series<GR>(rng, 3, -3, 1, false, true, true);
    EXPECT_EQ(conjugate(LoopSeries<GR>::identity(3), y), y);
}

TEST(Conjugate, PreservesTracelessness) {
    Rng rng(15);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 2 + t % 2;
        const auto g = rand_negative_group<GR>(rng, n, 4);
        const auto y = rand_series<GR>(rng, n, -2, 1, true, true, true);
        const auto c = conjugate(g, y, -4);
        EXPECT_TRUE(is_traceless(c));
        EXPECT_FALSE(c.is_zero());
    }
}

TEST(LoopSeriesJson, RoundTrip) {
    Rng rng(16);
    const auto x = rand_series<GR>(rng, 2, -2, 1, false, true);
    const auto back = LoopSeries<GR>::from_json(x.to_json());
    EXPECT_EQ(back, x);
    EXPECT_EQ(back.window(), x.window());
    EXPECT_EQ(back.closed_below(), x.closed_below());
    const auto j = x.to_json();
    EXPECT_EQ(j.at("n"), 2);
    EXPECT_EQ(j.at("window"), nlohmann::json::array({-2, 1}));
    EXPECT_TRUE(j.at("coeffs").contains("-1"));
}
