#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "slt/errors.hpp"
#include "slt/gaussian_rational.hpp"
#include "slt/matrix.hpp"

namespace slt {

enum class FrameKind { Diagonal, Unipotent, Custom };

inline std::string to_string(FrameKind k) {
    switch (k) {
    case FrameKind::Diagonal: return "diagonal";
    case FrameKind::Unipotent: return "unipotent";
    case FrameKind::Custom: return "custom";
    }
    return "custom";
}

inline FrameKind frame_kind_from_string(const std::string& s) {
    if (s == "diagonal") return FrameKind::Diagonal;
    if (s == "unipotent") return FrameKind::Unipotent;
    if (s == "custom") return FrameKind::Custom;
    throw ValidationError("unknown frame kind '" + s + "'");
}

namespace detail {

/// Rank of a list of matrices viewed as vectors in Q(i)^{n^2}.
inline std::size_t matrix_rank(const std::vector<Matrix<GaussianRational>>& mats) {
    if (mats.empty()) return 0;
    const std::size_t n = mats.front().n();
    std::vector<std::vector<GaussianRational>> rows;
    for (const auto& m : mats) {
        std::vector<GaussianRational> r;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    std::size_t rank = 0;
    const std::size_t cols = n * n;
    for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
        std::size_t p = rank;
        while (p < rows.size() && rows[p][c].is_zero()) ++p;
        if (p == rows.size()) continue;
        std::swap(rows[p], rows[rank]);
        const GaussianRational inv = rows[rank][c].inverse();
        for (std::size_t r = rank + 1; r < rows.size(); ++r) {
            if (rows[r][c].is_zero()) continue;
            const GaussianRational f = rows[r][c] * inv;
            for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
        }
        ++rank;
    }
    return rank;
}

} // namespace detail

/// Basis E_1..E_r of a commutative subalgebra of traceless matrices.
class CommutativeFrame {
public:
    CommutativeFrame() = default;

    /// E_k = c_k (e_{k+1,k+1} - e_{k,k}); the default scalar i gives
    /// diag(-i, i) for n = 2.
    static CommutativeFrame diagonal(std::size_t n, std::optional<std::vector<GaussianRational>> scalars = std::nullopt) {
        if (n < 2) throw ValidationError("frame needs n >= 2");
        if (scalars && scalars->size() != n - 1)
            throw ValidationError("diagonal frame needs " + std::to_string(n - 1) + " scalars");
        std::vector<Matrix<GaussianRational>> basis;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const GaussianRational c = scalars ? (*scalars)[k] : GaussianRational::i();
            Matrix<GaussianRational> e(n);
            e(k, k) = -c;
            e(k + 1, k + 1) = c;
            basis.push_back(std::move(e));
        }
        return CommutativeFrame(FrameKind::Diagonal, std::move(basis));
    }

    /// {B, B^2, ..., B^{n-1}} with B the upper shift.
    static CommutativeFrame unipotent(std::size_t n) {
        if (n < 2) throw ValidationError("frame needs n >= 2");
        Matrix<GaussianRational> b(n);
        for (std::size_t i = 0; i + 1 < n; ++i) b(i, i + 1) = GaussianRational(1);
        std::vector<Matrix<GaussianRational>> basis;
        Matrix<GaussianRational> p = b;
        for (std::size_t k = 1; k < n; ++k) {
            basis.push_back(p);
            p = p * b;
        }
        return CommutativeFrame(FrameKind::Unipotent, std::move(basis));
    }

    static CommutativeFrame custom(std::vector<Matrix<GaussianRational>> basis) {
        return CommutativeFrame(FrameKind::Custom, std::move(basis));
    }

    FrameKind kind() const { return kind_; }
    std::size_t n() const { return n_; }
    std::size_t rank() const { return basis_.size(); }
    const std::vector<Matrix<GaussianRational>>& basis() const { return basis_; }

    /// E_alpha, alpha 1-based.
    const Matrix<GaussianRational>& E(int alpha) const {
        if (alpha < 1 || static_cast<std::size_t>(alpha) > basis_.size())
            throw IndexOutOfRange("frame index " + std::to_string(alpha) + " outside [1, " + std::to_string(basis_.size()) + "]");
        return basis_[static_cast<std::size_t>(alpha - 1)];
    }

    template <Scalar S>
    Matrix<S> E_as(int alpha) const {
        return lift<S>(E(alpha));
    }

    bool commutes_with(const Matrix<GaussianRational>& m) const {
        for (const auto& e : basis_)
            if (!commutator(e, m).is_zero()) return false;
        return true;
    }

    /// g0 E_alpha g0^{-1} for every basis element.
    CommutativeFrame conjugated(const Matrix<GaussianRational>& g0) const {
        const auto inv = inverse(g0);
        std::vector<Matrix<GaussianRational>> basis;
        for (const auto& e : basis_) basis.push_back(g0 * e * inv);
        return custom(std::move(basis));
    }

    nlohmann::json to_json() const {
        nlohmann::json basis = nlohmann::json::array();
        for (const auto& e : basis_) basis.push_back(e.to_json());
        nlohmann::json j = {{"kind", to_string(kind_)}, {"n", n_}, {"basis", basis}};
        if (kind_ == FrameKind::Diagonal) {
            nlohmann::json sc = nlohmann::json::array();
            for (std::size_t k = 0; k < basis_.size(); ++k) sc.push_back(ScalarTraits<GaussianRational>::to_json(basis_[k](k + 1, k + 1)));
            j["scalars"] = sc;
        }
        return j;
    }

    /// Accepts {"kind":"diagonal"|"unipotent"} (n supplied) or
    /// {"kind":"custom","basis":[matrix,...]} with entries ["re","im"].
    static CommutativeFrame from_json(const nlohmann::json& j, std::size_t n) {
        if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
            throw ValidationError("frame must be an object with a string 'kind'");
        const FrameKind k = frame_kind_from_string(j["kind"].get<std::string>());
        if (k == FrameKind::Unipotent) return unipotent(n);
        if (k == FrameKind::Diagonal) {
            if (!j.contains("scalars")) return diagonal(n);
            std::vector<GaussianRational> sc;
            for (const auto& s : j["scalars"]) sc.push_back(ScalarTraits<GaussianRational>::from_json(s));
            return diagonal(n, sc);
        }
        if (!j.contains("basis") || !j["basis"].is_array()) throw ValidationError("custom frame needs a 'basis' array");
        std::vector<Matrix<GaussianRational>> basis;
        for (const auto& m : j["basis"]) basis.push_back(Matrix<GaussianRational>::from_json(m, n));
        return custom(std::move(basis));
    }

private:
    CommutativeFrame(FrameKind kind, std::vector<Matrix<GaussianRational>> basis) : kind_(kind), basis_(std::move(basis)) {
        if (basis_.empty()) throw ValidationError("frame basis is empty");
        n_ = basis_.front().n();
        for (std::size_t a = 0; a < basis_.size(); ++a) {
            if (basis_[a].n() != n_) throw ValidationError("frame matrices have different sizes");
            if (!basis_[a].trace().is_zero()) throw NotTraceless("frame element E_" + std::to_string(a + 1) + " has nonzero trace");
        }
        for (std::size_t a = 0; a < basis_.size(); ++a)
            for (std::size_t b = a + 1; b < basis_.size(); ++b)
                if (!commutator(basis_[a], basis_[b]).is_zero())
                    throw NotCommuting("frame elements E_" + std::to_string(a + 1) + " and E_" + std::to_string(b + 1) +
                                       " do not commute");
        if (detail::matrix_rank(basis_) != basis_.size()) throw DependentBasis("frame basis is linearly dependent");
    }

    FrameKind kind_ = FrameKind::Custom;
    std::size_t n_ = 0;
    std::vector<Matrix<GaussianRational>> basis_;
};

inline CommutativeFrame make_frame(FrameKind kind, std::size_t n,
                                   std::optional<std::vector<Matrix<GaussianRational>>> basis = std::nullopt) {
    if ((kind == FrameKind::Custom) != basis.has_value())
        throw ValidationError("a basis is supplied exactly for custom frames");
    switch (kind) {
    case FrameKind::Diagonal: return CommutativeFrame::diagonal(n);
    case FrameKind::Unipotent: return CommutativeFrame::unipotent(n);
    case FrameKind::Custom: {
        auto f = CommutativeFrame::custom(std::move(*basis));
        if (f.n() != n) throw ValidationError("custom basis has the wrong matrix size");
        return f;
    }
    }
    throw ValidationError("unknown frame kind");
}

} // namespace slt
