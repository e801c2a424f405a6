#pragma once

// Window-truncated matrix Laurent series. A series stores the coefficients
// on a window [lo, hi] and records, for each side, whether the powers beyond
// the window are known to vanish ("closed") or are simply not computed.
// Every operation returns the largest window on which its result is exactly
// determined by its inputs, and throws WindowUnderflow when that is empty.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <gmpxx.h>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "slt/errors.hpp"
#include "slt/matrix.hpp"
#include "slt/scalar.hpp"

namespace slt {

struct Window {
    int lo = 0;
    int hi = 0;

    bool contains(int k) const { return lo <= k && k <= hi; }
    int size() const { return hi - lo + 1; }
    friend bool operator==(const Window&, const Window&) = default;
};

/// Which direction a series may be infinite in: Descending is
/// gl_n(R)[z, 1/z) (finitely many positive powers), Ascending is
/// gl_n(R)[1/z, z).
enum class Grading { Descending, Ascending };

enum class Region { GEQ0, LT0, GT0, LEQ0 };

namespace detail {

constexpr std::int64_t kNegInf = std::numeric_limits<std::int64_t>::min() / 4;
constexpr std::int64_t kPosInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Interval {
    std::int64_t lo;
    std::int64_t hi;
    bool empty() const { return lo > hi; }
};

inline Interval region_interval(Region r) {
    switch (r) {
    case Region::GEQ0: return {0, kPosInf};
    case Region::LT0: return {kNegInf, -1};
    case Region::GT0: return {1, kPosInf};
    case Region::LEQ0: return {kNegInf, 0};
    }
    return {0, -1};
}

inline mpq_class inverse_factorial(int k) {
    mpz_class f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return mpq_class(mpz_class(1), f);
}

} // namespace detail

template <Scalar S>
class LoopSeries {
public:
    using Traits = ScalarTraits<S>;
    using Mat = Matrix<S>;

    LoopSeries() = default;

    /// Zero coefficients on `w`; closedness flags say whether the powers
    /// below / above the window vanish.
    LoopSeries(std::size_t n, Window w, Grading g, bool closed_below, bool closed_above)
        : n_(n), window_(w), grading_(g), closed_below_(closed_below), closed_above_(closed_above),
          coeffs_(static_cast<std::size_t>(w.size()), Mat(n)) {
        if (w.lo > w.hi) throw ValidationError("window lo > hi");
    }

    /// Element of gl_n(R)[z, 1/z) known on [lo, hi]: powers above hi vanish.
    static LoopSeries descending(std::size_t n, int lo, int hi) { return {n, {lo, hi}, Grading::Descending, false, true}; }
    /// Element of gl_n(R)[1/z, z) known on [lo, hi]: powers below lo vanish.
    static LoopSeries ascending(std::size_t n, int lo, int hi) { return {n, {lo, hi}, Grading::Ascending, true, false}; }
    /// Laurent polynomial supported in [lo, hi].
    static LoopSeries polynomial(std::size_t n, int lo, int hi, Grading g = Grading::Descending) {
        return {n, {lo, hi}, g, true, true};
    }
    static LoopSeries monomial(const Mat& m, int power, Grading g = Grading::Descending) {
        LoopSeries s = polynomial(m.n(), power, power, g);
        s.coeffs_[0] = m;
        return s;
    }
    static LoopSeries constant(const Mat& m, Grading g = Grading::Descending) { return monomial(m, 0, g); }
    static LoopSeries identity(std::size_t n, Grading g = Grading::Descending) { return constant(Mat::identity(n), g); }

    std::size_t n() const { return n_; }
    const Window& window() const { return window_; }
    Grading grading() const { return grading_; }
    bool closed_below() const { return closed_below_; }
    bool closed_above() const { return closed_above_; }
    bool is_polynomial() const { return closed_below_ && closed_above_; }

    /// Powers on which the coefficient is exactly known.
    std::int64_t known_lo() const { return closed_below_ ? detail::kNegInf : window_.lo; }
    std::int64_t known_hi() const { return closed_above_ ? detail::kPosInf : window_.hi; }
    bool knows(std::int64_t k) const { return known_lo() <= k && k <= known_hi(); }

    /// Coefficient of z^k; zero outside the window on a closed side.
    Mat coeff(int k) const {
        if (window_.contains(k)) return coeffs_[static_cast<std::size_t>(k - window_.lo)];
        if (knows(k)) return Mat(n_);
        throw WindowUnderflow("coefficient of z^" + std::to_string(k) + " is outside the known window [" +
                              std::to_string(window_.lo) + ", " + std::to_string(window_.hi) + "]");
    }

    const Mat& at(int k) const {
        if (!window_.contains(k)) throw WindowUnderflow("power " + std::to_string(k) + " outside stored window");
        return coeffs_[static_cast<std::size_t>(k - window_.lo)];
    }
    Mat& at(int k) {
        if (!window_.contains(k)) throw WindowUnderflow("power " + std::to_string(k) + " outside stored window");
        return coeffs_[static_cast<std::size_t>(k - window_.lo)];
    }
    void set(int k, Mat m) {
        if (m.n() != n_) throw ValidationError("coefficient size mismatch");
        at(k) = std::move(m);
    }

    bool is_zero() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Mat& m) { return m.is_zero(); });
    }

    /// Largest Frobenius norm among stored coefficients.
    double max_norm() const {
        double m = 0.0;
        for (const auto& c : coeffs_) m = std::max(m, c.norm());
        return m;
    }

    /// Highest power with a nonzero stored coefficient (nullopt if none).
    std::optional<int> top_power() const {
        for (int k = window_.hi; k >= window_.lo; --k)
            if (!at(k).is_zero()) return k;
        return std::nullopt;
    }
    std::optional<int> bottom_power() const {
        for (int k = window_.lo; k <= window_.hi; ++k)
            if (!at(k).is_zero()) return k;
        return std::nullopt;
    }

    /// Restrict or extend the stored window. Extending is only allowed into
    /// powers that are known to vanish.
    LoopSeries truncate(Window w) const {
        if (w.lo > w.hi) throw ValidationError("window lo > hi");
        if (!knows(w.lo) || !knows(w.hi))
            throw WindowUnderflow("requested window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) +
                                  "] exceeds the known window of the series");
        bool cb = closed_below_;
        for (int k = window_.lo; cb && k < w.lo && k <= window_.hi; ++k) cb = at(k).is_zero();
        bool ca = closed_above_;
        for (int k = window_.hi; ca && k > w.hi && k >= window_.lo; --k) ca = at(k).is_zero();
        LoopSeries out(n_, w, grading_, cb, ca);
        for (int k = w.lo; k <= w.hi; ++k)
            if (window_.contains(k)) out.at(k) = at(k);
        return out;
    }

    LoopSeries with_grading(Grading g) const {
        LoopSeries out = *this;
        out.grading_ = g;
        return out;
    }

    /// Multiplication by z^k.
    LoopSeries shift(int k) const {
        LoopSeries out = *this;
        out.window_ = {window_.lo + k, window_.hi + k};
        return out;
    }

    /// The substitution z -> 1/z.
    LoopSeries reflect() const {
        LoopSeries out(n_, {-window_.hi, -window_.lo},
                       grading_ == Grading::Descending ? Grading::Ascending : Grading::Descending, closed_above_,
                       closed_below_);
        for (int k = window_.lo; k <= window_.hi; ++k) out.at(-k) = at(k);
        return out;
    }

    template <class F>
    LoopSeries map_coeffs(F&& f) const {
        LoopSeries out = *this;
        for (auto& c : out.coeffs_) c = f(c);
        return out;
    }

    LoopSeries project(Region r) const {
        const auto reg = detail::region_interval(r);
        const detail::Interval kr{std::max(known_lo(), reg.lo), std::min(known_hi(), reg.hi)};
        if (kr.empty()) throw WindowUnderflow("projection onto a region where the series is unknown");
        const bool cb = reg.lo == detail::kNegInf ? kr.lo == detail::kNegInf : kr.lo == reg.lo;
        const bool ca = reg.hi == detail::kPosInf ? kr.hi == detail::kPosInf : kr.hi == reg.hi;
        std::int64_t lo = std::max<std::int64_t>(window_.lo, kr.lo);
        std::int64_t hi = std::min<std::int64_t>(window_.hi, kr.hi);
        if (lo > hi) {
            // Nothing stored in the region: the result vanishes on kr.
            std::int64_t p = kr.lo != detail::kNegInf ? kr.lo : kr.hi;
            if (p == detail::kPosInf) p = 0;
            lo = hi = p;
        }
        LoopSeries out(n_, {static_cast<int>(lo), static_cast<int>(hi)}, grading_, cb, ca);
        for (int k = out.window_.lo; k <= out.window_.hi; ++k)
            if (window_.contains(k)) out.at(k) = at(k);
        return out;
    }

    LoopSeries operator-() const {
        return map_coeffs([](const Mat& m) { return -m; });
    }

    friend LoopSeries operator+(const LoopSeries& a, const LoopSeries& b) { return combine(a, b, false); }
    friend LoopSeries operator-(const LoopSeries& a, const LoopSeries& b) { return combine(a, b, true); }

    friend LoopSeries operator*(const S& s, const LoopSeries& a) {
        return a.map_coeffs([&](const Mat& m) { return s * m; });
    }
    /// Constant matrix on the left / right.
    friend LoopSeries operator*(const Mat& m, const LoopSeries& a) {
        return a.map_coeffs([&](const Mat& c) { return m * c; });
    }
    friend LoopSeries operator*(const LoopSeries& a, const Mat& m) {
        return a.map_coeffs([&](const Mat& c) { return c * m; });
    }

    friend LoopSeries operator*(const LoopSeries& a, const LoopSeries& b) { return multiply(a, b); }

    /// Cauchy product on the exactly computable window; with `request` the
    /// result is truncated to it (WindowUnderflow if not computable).
    static LoopSeries multiply(const LoopSeries& x, const LoopSeries& y, std::optional<Window> request = std::nullopt) {
        if (x.n_ != y.n_) throw ValidationError("series size mismatch");
        const std::int64_t ax = x.closed_below_ ? x.window_.lo : detail::kNegInf;
        const std::int64_t bx = x.closed_above_ ? x.window_.hi : detail::kPosInf;
        const std::int64_t ay = y.closed_below_ ? y.window_.lo : detail::kNegInf;
        const std::int64_t by = y.closed_above_ ? y.window_.hi : detail::kPosInf;
        const int kmin = x.window_.lo + y.window_.lo;
        const int kmax = x.window_.hi + y.window_.hi;
        auto exact = [&](std::int64_t k) {
            const std::int64_t ilo = std::max(ax, k - by);
            const std::int64_t ihi = std::min(bx, k - ay);
            if (ilo > ihi) return true;
            return ilo >= x.window_.lo && ihi <= x.window_.hi && k - ihi >= y.window_.lo && k - ilo <= y.window_.hi;
        };
        int first = kmax + 1;
        int last = kmin - 1;
        for (int k = kmin; k <= kmax; ++k)
            if (exact(k)) {
                first = std::min(first, k);
                last = k;
            }
        if (first > last) throw WindowUnderflow("product has no exactly computable coefficient");
        for (int k = first; k <= last; ++k)
            if (!exact(k)) throw WindowUnderflow("product window is not contiguous");
        const bool cb = x.closed_below_ && y.closed_below_ && first == kmin;
        const bool ca = x.closed_above_ && y.closed_above_ && last == kmax;
        Window w{first, last};
        if (request) {
            if ((request->lo < first && !cb) || (request->hi > last && !ca))
                throw WindowUnderflow("requested product window [" + std::to_string(request->lo) + ", " +
                                      std::to_string(request->hi) + "] is not computable from the inputs (exact on [" +
                                      std::to_string(first) + ", " + std::to_string(last) + "])");
        }
        LoopSeries out(x.n_, w, product_grading(x, y), cb, ca);
        for (int k = first; k <= last; ++k) {
            Mat acc(x.n_);
            const int ilo = std::max(x.window_.lo, k - y.window_.hi);
            const int ihi = std::min(x.window_.hi, k - y.window_.lo);
            for (int i = ilo; i <= ihi; ++i) {
                const Mat& xi = x.at(i);
                const Mat& yj = y.at(k - i);
                if (xi.is_zero() || yj.is_zero()) continue;
                acc += xi * yj;
            }
            out.at(k) = std::move(acc);
        }
        return request ? out.truncate(*request) : out;
    }

    /// Exact equality on the powers both series know.
    friend bool operator==(const LoopSeries& a, const LoopSeries& b) {
        if (a.n_ != b.n_) return false;
        try {
            return (a - b).is_zero();
        } catch (const WindowUnderflow&) {
            return false;
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json coeffs = nlohmann::json::object();
        for (int k = window_.lo; k <= window_.hi; ++k) coeffs[std::to_string(k)] = at(k).to_json();
        return {{"n", n_},
                {"window", {window_.lo, window_.hi}},
                {"grading", grading_ == Grading::Descending ? "descending" : "ascending"},
                {"closed", {closed_below_, closed_above_}},
                {"coeffs", coeffs}};
    }

    static LoopSeries from_json(const nlohmann::json& j) {
        try {
            const auto n = j.at("n").get<std::size_t>();
            const Window w{j.at("window").at(0).get<int>(), j.at("window").at(1).get<int>()};
            Grading g = Grading::Descending;
            if (j.contains("grading")) {
                const auto s = j["grading"].get<std::string>();
                if (s == "ascending") g = Grading::Ascending;
                else if (s != "descending")
                    throw ValidationError("unknown grading '" + s + "'");
            }
            bool cb = g == Grading::Ascending;
            bool ca = g == Grading::Descending;
            if (j.contains("closed")) {
                cb = j["closed"].at(0).get<bool>();
                ca = j["closed"].at(1).get<bool>();
            }
            LoopSeries out(n, w, g, cb, ca);
            for (const auto& [key, value] : j.at("coeffs").items()) {
                const int k = std::stoi(key);
                if (!w.contains(k)) throw ValidationError("coefficient power " + key + " outside window");
                out.at(k) = Mat::from_json(value, n);
            }
            return out;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("malformed series JSON: ") + e.what());
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const Error*>(&e)) throw;
            throw ValidationError(std::string("malformed series JSON: ") + e.what());
        }
    }

private:
    static Grading product_grading(const LoopSeries& a, const LoopSeries& b) {
        if (!a.is_polynomial()) return a.grading_;
        if (!b.is_polynomial()) return b.grading_;
        return a.grading_;
    }

    static LoopSeries combine(const LoopSeries& a, const LoopSeries& b, bool subtract) {
        if (a.n_ != b.n_) throw ValidationError("series size mismatch");
        const std::int64_t klo = std::max(a.known_lo(), b.known_lo());
        const std::int64_t khi = std::min(a.known_hi(), b.known_hi());
        if (klo > khi) throw WindowUnderflow("sum of series with disjoint known windows");
        const bool cb = klo == detail::kNegInf;
        const bool ca = khi == detail::kPosInf;
        std::int64_t lo = cb ? std::min(a.window_.lo, b.window_.lo) : klo;
        std::int64_t hi = ca ? std::max(a.window_.hi, b.window_.hi) : khi;
        if (lo > hi) {
            if (cb) lo = hi;
            else
                hi = lo;
        }
        LoopSeries out(a.n_, {static_cast<int>(lo), static_cast<int>(hi)}, product_grading(a, b), cb, ca);
        for (int k = out.window_.lo; k <= out.window_.hi; ++k) {
            Mat c = a.window_.contains(k) ? a.at(k) : Mat(a.n_);
            if (b.window_.contains(k)) {
                if (subtract) c -= b.at(k);
                else
                    c += b.at(k);
            }
            out.at(k) = std::move(c);
        }
        return out;
    }

    std::size_t n_ = 0;
    Window window_{};
    Grading grading_ = Grading::Descending;
    bool closed_below_ = true;
    bool closed_above_ = true;
    std::vector<Mat> coeffs_;
};

template <Scalar S>
LoopSeries<S> project(const LoopSeries<S>& x, Region r) {
    return x.project(r);
}

template <Scalar S>
LoopSeries<S> series_mul(const LoopSeries<S>& x, const LoopSeries<S>& y, std::optional<Window> request = std::nullopt) {
    return LoopSeries<S>::multiply(x, y, request);
}

template <Scalar S>
LoopSeries<S> series_bracket(const LoopSeries<S>& x, const LoopSeries<S>& y, std::optional<Window> request = std::nullopt) {
    LoopSeries<S> r = series_mul(x, y) - series_mul(y, x);
    return request ? r.truncate(*request) : r;
}

namespace detail {

template <Scalar S>
void require_strictly_negative(const LoopSeries<S>& x, const char* what) {
    if (!x.closed_above() || x.grading() != Grading::Descending)
        throw NotStrictlyNegative(std::string(what) + ": series must be a descending series closed above");
    for (int k = std::max(0, x.window().lo); k <= x.window().hi; ++k)
        if (!x.at(k).is_zero()) throw NotStrictlyNegative(std::string(what) + ": nonzero coefficient at z^" + std::to_string(k));
}

} // namespace detail

/// exp(X) for X with strictly negative powers; the sum terminates on the
/// window because X^k only reaches z^-w after k >= w factors.
template <Scalar S>
LoopSeries<S> exp_neg(const LoopSeries<S>& x, std::optional<int> lowest = std::nullopt) {
    detail::require_strictly_negative(x, "exp_neg");
    const std::size_t n = x.n();
    const int lo = lowest.value_or(std::min(x.window().lo, 0));
    if (lo > 0) throw ValidationError("exp_neg: window must reach z^0");
    if (!x.closed_below() && lo < x.window().lo)
        throw WindowUnderflow("exp_neg: requested depth exceeds the known window of the exponent");
    if (x.is_zero() && x.closed_below()) return LoopSeries<S>::identity(n);
    const Window w{lo, 0};
    LoopSeries<S> xw = x.truncate({std::max(lo, std::min(x.window().lo, -1)), std::max(x.window().hi, std::min(-1, x.window().hi))});
    LoopSeries<S> sum = LoopSeries<S>::identity(n).truncate(w);
    sum = LoopSeries<S>(n, w, Grading::Descending, false, true) + sum;
    LoopSeries<S> power = LoopSeries<S>::identity(n);
    for (int k = 1; k <= -lo; ++k) {
        power = series_mul(power, xw);
        const Window keep{std::max(lo, power.window().lo), power.window().hi};
        if (keep.lo > keep.hi) break;
        power = power.truncate({std::max(lo, power.window().lo), power.window().hi});
        if (power.closed_below() == false && power.window().lo > lo) {
            // Cannot happen when X is known down to lo; guard anyway.
            throw WindowUnderflow("exp_neg: power series lost precision");
        }
        sum = sum + ScalarTraits<S>::from_gauss(GaussianRational(detail::inverse_factorial(k))) * power;
    }
    return sum.truncate(w);
}

/// log(Id + Y) for Y with strictly negative powers.
template <Scalar S>
LoopSeries<S> log_unip(const LoopSeries<S>& g, std::optional<int> lowest = std::nullopt) {
    const std::size_t n = g.n();
    if (!g.closed_above() || g.grading() != Grading::Descending)
        throw NotUnipotent("log_unip: series must be a descending series closed above");
    if (g.coeff(0) != Matrix<S>::identity(n)) throw NotUnipotent("log_unip: constant term is not the identity");
    for (int k = 1; k <= g.window().hi; ++k)
        if (!g.at(k).is_zero()) throw NotUnipotent("log_unip: nonzero positive power z^" + std::to_string(k));
    const int lo = lowest.value_or(std::min(g.window().lo, -1));
    if (!g.closed_below() && lo < g.window().lo) throw WindowUnderflow("log_unip: requested depth exceeds known window");
    LoopSeries<S> y = (g - LoopSeries<S>::identity(n)).truncate({lo, -1});
    if (g.closed_below()) y = LoopSeries<S>(n, {lo, -1}, Grading::Descending, false, true) + y;
    LoopSeries<S> sum(n, {lo, -1}, Grading::Descending, false, true);
    LoopSeries<S> power = LoopSeries<S>::identity(n);
    for (int k = 1; k <= -lo; ++k) {
        power = series_mul(power, y);
        power = power.truncate({std::max(lo, power.window().lo), power.window().hi});
        const GaussianRational c(mpq_class((k % 2 == 1) ? 1 : -1, k));
        sum = sum + ScalarTraits<S>::from_gauss(c) * power;
    }
    return sum.truncate({lo, -1});
}

/// Inverse in the group attached to the grading: for a descending series the
/// leading coefficient is the top one, for an ascending series the bottom one.
/// `far` is the farthest power to compute (default: as deep as the input).
template <Scalar S>
LoopSeries<S> invert(const LoopSeries<S>& g, std::optional<int> far = std::nullopt) {
    const std::size_t n = g.n();
    if (g.grading() == Grading::Ascending) {
        std::optional<int> f;
        if (far) f = -*far;
        return invert(g.reflect(), f).reflect();
    }
    if (!g.closed_above()) throw SingularLeading("invert: descending series must be closed above to have a leading term");
    const auto top = g.top_power();
    if (!top) throw SingularLeading("invert: series is zero");
    const int p = *top;
    const auto& lead = g.at(p);
    Matrix<S> lead_inv;
    try {
        lead_inv = inverse(lead);
    } catch (const SingularLeading&) {
        throw SingularLeading("invert: leading coefficient at z^" + std::to_string(p) + " is not invertible");
    }
    // h = g z^{-p} has leading coefficient at z^0.
    const LoopSeries<S> h = g.truncate({std::min(g.window().lo, p), p}).shift(-p);
    if (g.is_polynomial() && g.bottom_power() == top) return LoopSeries<S>::monomial(lead_inv, -p);
    const int depth = far ? *far + p : h.window().lo;
    if (depth > 0) throw ValidationError("invert: requested depth above the leading power");
    if (!h.closed_below() && depth < h.window().lo) throw WindowUnderflow("invert: requested depth exceeds the known window");
    LoopSeries<S> y(n, {depth, 0}, Grading::Descending, false, true);
    y.at(0) = lead_inv;
    for (int k = -1; k >= depth; --k) {
        Matrix<S> acc(n);
        for (int i = k; i <= -1; ++i) {
            if (!h.knows(i)) continue;
            const Matrix<S> hi = h.coeff(i);
            if (hi.is_zero()) continue;
            acc += hi * y.at(k - i);
        }
        y.at(k) = -(lead_inv * acc);
    }
    return y.shift(-p);
}

/// g Y g^{-1}.
template <Scalar S>
LoopSeries<S> conjugate(const LoopSeries<S>& g, const LoopSeries<S>& y, std::optional<int> far = std::nullopt) {
    return series_mul(series_mul(g, y), invert(g, far));
}

/// Entry-wise trace of every stored coefficient vanishes.
template <Scalar S>
bool is_traceless(const LoopSeries<S>& x, double tol = 0.0) {
    for (int k = x.window().lo; k <= x.window().hi; ++k) {
        const S t = x.at(k).trace();
        if constexpr (ScalarTraits<S>::exact) {
            if (!ScalarTraits<S>::is_zero(t)) return false;
        } else {
            if (ScalarTraits<S>::magnitude(t) > tol) return false;
        }
    }
    return true;
}

/// Distance on the powers both series know (max Frobenius norm).
template <Scalar S>
double distance(const LoopSeries<S>& a, const LoopSeries<S>& b) {
    return (a - b).max_norm();
}

} // namespace slt
