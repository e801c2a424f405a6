#pragma once

#include <gmpxx.h>

#include <complex>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "slt/errors.hpp"

namespace slt {

/// Exact element re + i*im of the Gaussian rationals Q(i).
class GaussianRational {
public:
    GaussianRational() = default;
    GaussianRational(long re) : re_(re) {}
    GaussianRational(mpq_class re, mpq_class im = 0) : re_(std::move(re)), im_(std::move(im)) {
        re_.canonicalize();
        im_.canonicalize();
    }

    static GaussianRational i() { return {mpq_class(0), mpq_class(1)}; }
    static GaussianRational ratio(long num, long den) { return {mpq_class(num, den)}; }

    const mpq_class& re() const { return re_; }
    const mpq_class& im() const { return im_; }

    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
    bool is_real() const { return sgn(im_) == 0; }

    GaussianRational conj() const { return {re_, -im_}; }
    mpq_class norm2() const { return re_ * re_ + im_ * im_; }

    GaussianRational inverse() const {
        if (is_zero()) throw SingularLeading("division by zero in Q(i)");
        mpq_class d = norm2();
        return {re_ / d, -im_ / d};
    }

    std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

    GaussianRational& operator+=(const GaussianRational& o) {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    GaussianRational& operator-=(const GaussianRational& o) {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }
    GaussianRational& operator*=(const GaussianRational& o) {
        mpq_class r = re_ * o.re_ - im_ * o.im_;
        mpq_class m = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        im_ = std::move(m);
        return *this;
    }
    GaussianRational& operator/=(const GaussianRational& o) { return *this *= o.inverse(); }

    friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
    friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
    friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
    friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
    friend GaussianRational operator-(const GaussianRational& a) { return {-a.re_, -a.im_}; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

    /// Lexicographic on (re, im); only used to give containers a total order.
    friend bool operator<(const GaussianRational& a, const GaussianRational& b) {
        if (a.re_ != b.re_) return a.re_ < b.re_;
        return a.im_ < b.im_;
    }

    /// Decimal "p/q" strings (just "p" when q = 1).
    std::pair<std::string, std::string> to_strings() const { return {re_.get_str(), im_.get_str()}; }

    static GaussianRational from_strings(const std::string& re, const std::string& im) {
        return {parse_rational(re), parse_rational(im)};
    }

    static mpq_class parse_rational(const std::string& s) {
        mpq_class q;
        if (s.empty() || q.set_str(s, 10) != 0) throw ValidationError("malformed rational '" + s + "'");
        if (q.get_den() == 0) throw ValidationError("zero denominator in '" + s + "'");
        q.canonicalize();
        return q;
    }

    std::string str() const {
        std::ostringstream os;
        os << *this;
        return os.str();
    }

    friend std::ostream& operator<<(std::ostream& os, const GaussianRational& a) {
        const bool has_re = sgn(a.re_) != 0;
        const bool has_im = sgn(a.im_) != 0;
        if (!has_re && !has_im) return os << "0";
        if (has_re) os << a.re_;
        if (has_im) {
            if (has_re) os << (sgn(a.im_) > 0 ? "+" : "-");
            else if (sgn(a.im_) < 0)
                os << "-";
            mpq_class m = abs(a.im_);
            if (m != 1) os << m << "*";
            os << "i";
        }
        return os;
    }

private:
    mpq_class re_{0};
    mpq_class im_{0};
};

} // namespace slt
