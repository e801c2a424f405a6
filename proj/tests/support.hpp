#pragma once

// Seeded random generators and brute-force oracles shared by the suites.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "slt/slt.hpp"

namespace slt::testing {

using Rng = std::mt19937_64;
using GR = GaussianRational;

inline GR rand_gauss(Rng& rng, int range = 3) {
    std::uniform_int_distribution<int> num(-range, range);
    std::uniform_int_distribution<int> den(1, 3);
    return {mpq_class(num(rng), den(rng)), mpq_class(num(rng), den(rng))};
}

inline Complex rand_complex(Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng)};
}

template <Scalar S>
S rand_scalar(Rng& rng) {
    if constexpr (std::is_same_v<S, Complex>) return rand_complex(rng);
    else
        return ScalarTraits<S>::from_gauss(rand_gauss(rng));
}

template <Scalar S>
Matrix<S> rand_matrix(Rng& rng, std::size_t n, bool traceless = false) {
    Matrix<S> m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rand_scalar<S>(rng);
    if (traceless) {
        S sum = ScalarTraits<S>::zero();
        for (std::size_t i = 0; i + 1 < n; ++i) sum = sum + m(i, i);
        m(n - 1, n - 1) = ScalarTraits<S>::zero() - sum;
    }
    return m;
}

template <Scalar S>
LoopSeries<S> rand_series(Rng& rng, std::size_t n, int lo, int hi, bool closed_below = true, bool closed_above = true,
                          bool traceless = false, Grading g = Grading::Descending) {
    LoopSeries<S> s(n, {lo, hi}, g, closed_below, closed_above);
    for (int k = lo; k <= hi; ++k) s.at(k) = rand_matrix<S>(rng, n, traceless);
    return s;
}

/// Element of G_<0 as exp of a random strictly negative polynomial.
template <Scalar S>
LoopSeries<S> rand_negative_group(Rng& rng, std::size_t n, int depth, int support = 3) {
    auto x = rand_series<S>(rng, n, -std::min(support, depth), -1);
    return exp_neg(x, -depth);
}

/// Element of G_>=0: random invertible constant times exp of a positive polynomial.
template <Scalar S>
LoopSeries<S> rand_positive_group(Rng& rng, std::size_t n, int depth, int support = 2) {
    Matrix<S> k0;
    for (;;) {
        k0 = rand_matrix<S>(rng, n);
        try {
            (void)inverse(k0);
            break;
        } catch (const SingularLeading&) {
        }
    }
    auto y = rand_series<S>(rng, n, -std::min(support, depth), -1);
    auto e = exp_neg(y, -depth).reflect();
    return (k0 * e).with_grading(Grading::Ascending);
}

/// Coefficient map oracle: product of two series with all stored
/// coefficients, no window reasoning.
template <Scalar S>
std::map<int, Matrix<S>> brute_product(const LoopSeries<S>& a, const LoopSeries<S>& b) {
    std::map<int, Matrix<S>> out;
    for (int i = a.window().lo; i <= a.window().hi; ++i)
        for (int j = b.window().lo; j <= b.window().hi; ++j) {
            auto it = out.find(i + j);
            if (it == out.end()) it = out.emplace(i + j, Matrix<S>(a.n())).first;
            it->second += a.at(i) * b.at(j);
        }
    return out;
}

/// Random differential polynomial in the given base names with derivatives
/// from `flows`, at most `terms` terms of degree <= `degree`.
inline DiffPoly rand_diffpoly(Rng& rng, const std::vector<std::string>& names, const std::vector<DerivationSymbol>& flows,
                              int terms, int degree) {
    std::uniform_int_distribution<int> deg(0, degree);
    std::uniform_int_distribution<std::size_t> pick_name(0, names.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_flow(0, flows.size());
    DiffPoly p;
    for (int t = 0; t < terms; ++t) {
        DiffPoly mono(rand_gauss(rng));
        const int d = deg(rng);
        for (int k = 0; k < d; ++k) {
            Indeterminate x(names[pick_name(rng)]);
            const std::size_t f = pick_flow(rng);
            if (f < flows.size()) x = x.derived(flows[f]);
            mono = mono * DiffPoly(x);
        }
        p += mono;
    }
    return p;
}

/// Multiplication oracle for DiffPoly: expands term by term into a flat
/// list of (coefficient, sorted factor names) and merges.
inline std::map<std::vector<std::string>, GR> brute_expand(const DiffPoly& a, const DiffPoly& b) {
    std::map<std::vector<std::string>, GR> out;
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) {
            std::vector<std::string> factors;
            for (const auto& [x, p] : ma)
                for (int k = 0; k < p; ++k) factors.push_back(DiffPoly::to_string(x));
            for (const auto& [x, p] : mb)
                for (int k = 0; k < p; ++k) factors.push_back(DiffPoly::to_string(x));
            std::sort(factors.begin(), factors.end());
            out[factors] += ca * cb;
        }
    std::erase_if(out, [](const auto& kv) { return kv.second.is_zero(); });
    return out;
}

inline std::map<std::vector<std::string>, GR> flatten(const DiffPoly& a) { return brute_expand(a, DiffPoly(1)); }

} // namespace slt::testing
