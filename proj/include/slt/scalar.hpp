#pragma once

// Scalar backends for series coefficients. Every backend provides a
// specialization of ScalarTraits with the same static interface.

#include <cmath>
#include <complex>
#include <limits>

#include "json.hpp"

#include "slt/diffpoly.hpp"
#include "slt/errors.hpp"
#include "slt/gaussian_rational.hpp"

namespace slt {

using Complex = std::complex<double>;

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<GaussianRational> {
    static constexpr bool exact = true;
    static constexpr bool field = true;
    static GaussianRational zero() { return {}; }
    static GaussianRational one() { return GaussianRational(1); }
    static GaussianRational from_gauss(const GaussianRational& g) { return g; }
    static bool is_zero(const GaussianRational& s) { return s.is_zero(); }
    static GaussianRational inverse(const GaussianRational& s) { return s.inverse(); }
    static double magnitude(const GaussianRational& s) { return std::abs(s.to_complex()); }
    static nlohmann::json to_json(const GaussianRational& s) {
        auto [re, im] = s.to_strings();
        return {re, im};
    }
    static GaussianRational from_json(const nlohmann::json& j) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
            throw ValidationError("Gaussian rational must be [\"re\",\"im\"]");
        return GaussianRational::from_strings(j[0].get<std::string>(), j[1].get<std::string>());
    }
};

template <>
struct ScalarTraits<Complex> {
    static constexpr bool exact = false;
    static constexpr bool field = true;
    static Complex zero() { return {}; }
    static Complex one() { return {1.0, 0.0}; }
    static Complex from_gauss(const GaussianRational& g) { return g.to_complex(); }
    static bool is_zero(const Complex& s) { return s == Complex{}; }
    static Complex inverse(const Complex& s) {
        if (s == Complex{}) throw SingularLeading("division by zero");
        return 1.0 / s;
    }
    static double magnitude(const Complex& s) { return std::abs(s); }
    static nlohmann::json to_json(const Complex& s) { return {s.real(), s.imag()}; }
    static Complex from_json(const nlohmann::json& j) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
            throw ValidationError("complex scalar must be [re,im]");
        return {j[0].get<double>(), j[1].get<double>()};
    }
};

template <>
struct ScalarTraits<DiffPoly> {
    static constexpr bool exact = true;
    static constexpr bool field = false;
    static DiffPoly zero() { return {}; }
    static DiffPoly one() { return DiffPoly(1); }
    static DiffPoly from_gauss(const GaussianRational& g) { return DiffPoly(g); }
    static bool is_zero(const DiffPoly& s) { return s.is_zero(); }
    /// Only constants are invertible here.
    static DiffPoly inverse(const DiffPoly& s) {
        if (!s.is_constant() || s.is_zero()) throw SingularLeading("non-constant differential polynomial is not invertible");
        return DiffPoly(s.constant_value().inverse());
    }
    static double magnitude(const DiffPoly& s) {
        if (s.is_zero()) return 0.0;
        if (s.is_constant()) return std::abs(s.constant_value().to_complex());
        return std::numeric_limits<double>::infinity();
    }
    static nlohmann::json to_json(const DiffPoly& s) { return s.to_json(); }
    static DiffPoly from_json(const nlohmann::json& j) { return DiffPoly::from_json(j); }
};

template <class S>
concept Scalar = requires(const S& a, const S& b) {
    { a + b } -> std::convertible_to<S>;
    { a - b } -> std::convertible_to<S>;
    { a * b } -> std::convertible_to<S>;
    { ScalarTraits<S>::zero() } -> std::convertible_to<S>;
    { ScalarTraits<S>::is_zero(a) } -> std::convertible_to<bool>;
};

} // namespace slt
