#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "json.hpp"

#include "slt/errors.hpp"
#include "slt/scalar.hpp"

namespace slt {

/// Dense square n x n matrix over a scalar backend, row-major.
template <Scalar S>
class Matrix {
public:
    using Traits = ScalarTraits<S>;

    Matrix() = default;
    explicit Matrix(std::size_t n) : n_(n), data_(n * n, Traits::zero()) {}
    Matrix(std::initializer_list<std::initializer_list<S>> rows) : n_(rows.size()) {
        data_.reserve(n_ * n_);
        for (const auto& row : rows) {
            if (row.size() != n_) throw ValidationError("matrix literal is not square");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = Traits::one();
        return m;
    }

    /// Matrix unit E_{ij} (zero-based).
    static Matrix unit(std::size_t n, std::size_t i, std::size_t j) {
        Matrix m(n);
        m(i, j) = Traits::one();
        return m;
    }

    std::size_t n() const { return n_; }

    S& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    const S& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](const S& s) { return Traits::is_zero(s); });
    }

    S trace() const {
        S t = Traits::zero();
        for (std::size_t i = 0; i < n_; ++i) t = t + (*this)(i, i);
        return t;
    }

    Matrix& operator+=(const Matrix& o) {
        check_size(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] = data_[k] + o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_size(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] = data_[k] - o.data_[k];
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator-(const Matrix& a) {
        Matrix out(a.n_);
        for (std::size_t k = 0; k < a.data_.size(); ++k) out.data_[k] = Traits::zero() - a.data_[k];
        return out;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        a.check_size(b);
        const std::size_t n = a.n_;
        Matrix out(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const S& aik = a(i, k);
                if (Traits::is_zero(aik)) continue;
                for (std::size_t j = 0; j < n; ++j)
                    if (!Traits::is_zero(b(k, j))) out(i, j) = out(i, j) + aik * b(k, j);
            }
        return out;
    }

    friend Matrix operator*(const S& s, const Matrix& a) {
        Matrix out(a.n_);
        for (std::size_t k = 0; k < a.data_.size(); ++k) out.data_[k] = s * a.data_[k];
        return out;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) { return a.n_ == b.n_ && a.data_ == b.data_; }
    friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

    /// Frobenius norm (infinite for non-constant symbolic entries).
    double norm() const {
        double s = 0.0;
        for (const S& x : data_) {
            double m = Traits::magnitude(x);
            s += m * m;
        }
        return std::sqrt(s);
    }

    template <class F>
    auto map(F&& f) const -> Matrix<std::invoke_result_t<F, const S&>> {
        Matrix<std::invoke_result_t<F, const S&>> out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) out(i, j) = f((*this)(i, j));
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < n_; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t j = 0; j < n_; ++j) row.push_back(Traits::to_json((*this)(i, j)));
            rows.push_back(std::move(row));
        }
        return rows;
    }

    static Matrix from_json(const nlohmann::json& j, std::size_t n) {
        if (!j.is_array() || j.size() != n) throw ValidationError("matrix must have " + std::to_string(n) + " rows");
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!j[i].is_array() || j[i].size() != n) throw ValidationError("matrix row has wrong length");
            for (std::size_t k = 0; k < n; ++k) m(i, k) = Traits::from_json(j[i][k]);
        }
        return m;
    }

private:
    void check_size(const Matrix& o) const {
        if (o.n_ != n_) throw ValidationError("matrix size mismatch");
    }

    std::size_t n_ = 0;
    std::vector<S> data_;
};

template <Scalar S>
Matrix<S> commutator(const Matrix<S>& a, const Matrix<S>& b) {
    return a * b - b * a;
}

/// Inverse over a field backend by Gauss-Jordan elimination; over DiffPoly
/// only constant matrices are inverted (in Q(i)).
template <Scalar S>
Matrix<S> inverse(const Matrix<S>& a) {
    using T = ScalarTraits<S>;
    if constexpr (!T::field) {
        Matrix<GaussianRational> c(a.n());
        for (std::size_t i = 0; i < a.n(); ++i)
            for (std::size_t j = 0; j < a.n(); ++j) {
                if (!a(i, j).is_constant()) throw SingularLeading("matrix with non-constant entries is not invertible over the backend");
                c(i, j) = a(i, j).constant_value();
            }
        return inverse(c).map([](const GaussianRational& g) { return T::from_gauss(g); });
    } else {
        const std::size_t n = a.n();
        Matrix<S> m = a;
        Matrix<S> inv = Matrix<S>::identity(n);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t pivot = n;
            if constexpr (T::exact) {
                for (std::size_t r = col; r < n; ++r)
                    if (!T::is_zero(m(r, col))) {
                        pivot = r;
                        break;
                    }
            } else {
                double best = 0.0;
                for (std::size_t r = col; r < n; ++r)
                    if (T::magnitude(m(r, col)) > best) {
                        best = T::magnitude(m(r, col));
                        pivot = r;
                    }
            }
            if (pivot == n) throw SingularLeading("singular matrix");
            if (pivot != col)
                for (std::size_t j = 0; j < n; ++j) {
                    std::swap(m(pivot, j), m(col, j));
                    std::swap(inv(pivot, j), inv(col, j));
                }
            const S p = T::inverse(m(col, col));
            for (std::size_t j = 0; j < n; ++j) {
                m(col, j) = m(col, j) * p;
                inv(col, j) = inv(col, j) * p;
            }
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col || T::is_zero(m(r, col))) continue;
                const S f = m(r, col);
                for (std::size_t j = 0; j < n; ++j) {
                    m(r, j) = m(r, j) - f * m(col, j);
                    inv(r, j) = inv(r, j) - f * inv(col, j);
                }
            }
        }
        return inv;
    }
}

template <Scalar S>
Matrix<S> lift(const Matrix<GaussianRational>& m) {
    return m.map([](const GaussianRational& g) { return ScalarTraits<S>::from_gauss(g); });
}

} // namespace slt
