#pragma once

// Differential polynomial ring over Q(i): finite sums of monomials in
// derivative-indexed indeterminates, with commuting derivations d_{m,alpha}.

#include <algorithm>
#include <atomic>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "slt/errors.hpp"
#include "slt/gaussian_rational.hpp"

namespace slt {

/// The derivation d_{m,alpha}: flow degree m, frame index alpha (1-based).
struct DerivationSymbol {
    int m = 0;
    int alpha = 1;

    auto operator<=>(const DerivationSymbol&) const = default;

    std::string key() const { return std::to_string(m) + "," + std::to_string(alpha); }

    static DerivationSymbol from_key(const std::string& key) {
        auto comma = key.find(',');
        if (comma == std::string::npos) throw ValidationError("flow key '" + key + "' is not of the form m,alpha");
        try {
            std::size_t used = 0;
            DerivationSymbol d{std::stoi(key.substr(0, comma), &used), 0};
            std::size_t used2 = 0;
            d.alpha = std::stoi(key.substr(comma + 1), &used2);
            if (used != comma || used2 != key.size() - comma - 1) throw std::invalid_argument("trailing");
            if (d.alpha < 1) throw ValidationError("frame index must be >= 1 in '" + key + "'");
            return d;
        } catch (const std::logic_error&) {
            throw ValidationError("flow key '" + key + "' is not of the form m,alpha");
        }
    }
};

/// A named indeterminate with a derivative multi-index; d11 d11 q is its own
/// first-class indeterminate.
struct Indeterminate {
    std::string name;
    std::vector<std::pair<DerivationSymbol, int>> derivs; // sorted, counts > 0

    Indeterminate() = default;
    explicit Indeterminate(std::string n) : name(std::move(n)) {}
    Indeterminate(std::string n, std::vector<std::pair<DerivationSymbol, int>> d) : name(std::move(n)), derivs(std::move(d)) {
        normalize();
    }

    bool is_base() const { return derivs.empty(); }

    int order() const {
        int total = 0;
        for (const auto& [d, c] : derivs) total += c;
        return total;
    }

    int count(const DerivationSymbol& d) const {
        for (const auto& [s, c] : derivs)
            if (s == d) return c;
        return 0;
    }

    Indeterminate derived(const DerivationSymbol& d, int times = 1) const {
        Indeterminate out = *this;
        out.derivs.emplace_back(d, times);
        out.normalize();
        return out;
    }

    Indeterminate base() const { return Indeterminate(name); }

    auto operator<=>(const Indeterminate&) const = default;

private:
    void normalize() {
        std::sort(derivs.begin(), derivs.end());
        std::vector<std::pair<DerivationSymbol, int>> merged;
        for (const auto& [d, c] : derivs) {
            if (!merged.empty() && merged.back().first == d) merged.back().second += c;
            else
                merged.emplace_back(d, c);
        }
        std::erase_if(merged, [](const auto& p) { return p.second == 0; });
        derivs = std::move(merged);
    }
};

/// Sorted (indeterminate, power) list; the empty monomial is 1.
using Monomial = std::vector<std::pair<Indeterminate, int>>;

namespace detail {

inline std::atomic<std::size_t>& term_cap_storage() {
    static std::atomic<std::size_t> cap{1'000'000};
    return cap;
}

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.reserve(a.size() + b.size());
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (i->first < j->first) out.push_back(*i++);
        else if (j->first < i->first)
            out.push_back(*j++);
        else {
            out.emplace_back(i->first, i->second + j->second);
            ++i;
            ++j;
        }
    }
    out.insert(out.end(), i, a.end());
    out.insert(out.end(), j, b.end());
    return out;
}

} // namespace detail

/// Upper bound on the number of expanded terms a single product may produce.
inline std::size_t diffpoly_term_cap() { return detail::term_cap_storage().load(); }
inline void set_diffpoly_term_cap(std::size_t cap) { detail::term_cap_storage().store(cap); }

class DiffPoly;
using Bindings = std::map<Indeterminate, DiffPoly>;

class DiffPoly {
public:
    using Terms = std::map<Monomial, GaussianRational>;

    DiffPoly() = default;
    DiffPoly(long c) : DiffPoly(GaussianRational(c)) {}
    DiffPoly(const GaussianRational& c) {
        if (!c.is_zero()) terms_.emplace(Monomial{}, c);
    }
    explicit DiffPoly(const Indeterminate& x) { terms_.emplace(Monomial{{x, 1}}, GaussianRational(1)); }

    static DiffPoly var(const std::string& name) { return DiffPoly(Indeterminate(name)); }
    static DiffPoly var(const Indeterminate& x) { return DiffPoly(x); }

    const Terms& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
    GaussianRational constant_value() const {
        if (!is_constant()) throw ValidationError("differential polynomial is not a constant");
        return terms_.empty() ? GaussianRational() : terms_.begin()->second;
    }

    /// Coefficient of a monomial (zero if absent).
    GaussianRational coefficient(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? GaussianRational() : it->second;
    }

    int degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) {
            int t = 0;
            for (const auto& [x, p] : m) t += p;
            d = std::max(d, t);
        }
        return d;
    }

    /// Every indeterminate occurring in the polynomial.
    std::vector<Indeterminate> indeterminates() const {
        std::vector<Indeterminate> out;
        for (const auto& [m, c] : terms_)
            for (const auto& [x, p] : m) out.push_back(x);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    DiffPoly& operator+=(const DiffPoly& o) {
        for (const auto& [m, c] : o.terms_) accumulate(m, c);
        return *this;
    }
    DiffPoly& operator-=(const DiffPoly& o) {
        for (const auto& [m, c] : o.terms_) accumulate(m, -c);
        return *this;
    }
    DiffPoly& operator*=(const DiffPoly& o) { return *this = *this * o; }

    friend DiffPoly operator+(DiffPoly a, const DiffPoly& b) { return a += b; }
    friend DiffPoly operator-(DiffPoly a, const DiffPoly& b) { return a -= b; }
    friend DiffPoly operator-(const DiffPoly& a) {
        DiffPoly out;
        for (const auto& [m, c] : a.terms_) out.terms_.emplace_hint(out.terms_.end(), m, -c);
        return out;
    }

    friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b) {
        if (a.terms_.empty() || b.terms_.empty()) return {};
        if (a.terms_.size() * b.terms_.size() > diffpoly_term_cap())
            throw ResourceExceeded("differential polynomial product would expand to " +
                                   std::to_string(a.terms_.size() * b.terms_.size()) + " terms (cap " +
                                   std::to_string(diffpoly_term_cap()) + ")");
        DiffPoly out;
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) out.accumulate(detail::mono_mul(ma, mb), ca * cb);
        return out;
    }

    friend DiffPoly operator*(const GaussianRational& s, const DiffPoly& a) {
        if (s.is_zero()) return {};
        DiffPoly out;
        for (const auto& [m, c] : a.terms_) out.terms_.emplace_hint(out.terms_.end(), m, s * c);
        return out;
    }

    friend bool operator==(const DiffPoly& a, const DiffPoly& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const DiffPoly& a, const DiffPoly& b) { return !(a == b); }

    /// Apply the derivation d (Leibniz rule on monomials, chain rule on powers).
    DiffPoly derive(const DerivationSymbol& d) const {
        DiffPoly out;
        for (const auto& [m, c] : terms_) {
            for (std::size_t k = 0; k < m.size(); ++k) {
                const auto& [x, p] = m[k];
                Monomial rest = m;
                if (p == 1) rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
                else
                    rest[k].second -= 1;
                Monomial dm = detail::mono_mul(rest, Monomial{{x.derived(d), 1}});
                out.accumulate(dm, GaussianRational(p) * c);
            }
        }
        return out;
    }

    /// Simultaneous substitution. An indeterminate is replaced by its binding
    /// if it has one; otherwise a derivative indeterminate is replaced by the
    /// matching derivatives of the closest bound ancestor. Names that have no
    /// binding at any derivative level are left untouched.
    DiffPoly substitute(const Bindings& bindings) const {
        if (bindings.empty()) return *this;
        std::map<Indeterminate, DiffPoly> cache;
        auto resolve = [&](const Indeterminate& x) -> const DiffPoly* {
            if (auto it = cache.find(x); it != cache.end()) return &it->second;
            if (auto it = bindings.find(x); it != bindings.end()) return &it->second;
            bool name_bound = false;
            const Indeterminate* best = nullptr;
            for (const auto& [y, value] : bindings) {
                if (y.name != x.name) continue;
                name_bound = true;
                if (is_ancestor(y, x) && (best == nullptr || y.order() > best->order())) best = &y;
            }
            if (!name_bound) return nullptr;
            if (best == nullptr) {
                if (x.is_base()) return nullptr;
                throw UnboundDerivative("no binding for derivative indeterminate " + to_string(x) +
                                        " and no bound ancestor to differentiate");
            }
            DiffPoly value = bindings.at(*best);
            for (const auto& [d, c] : x.derivs)
                for (int k = best->count(d); k < c; ++k) value = value.derive(d);
            return &cache.emplace(x, std::move(value)).first->second;
        };

        DiffPoly out;
        for (const auto& [m, c] : terms_) {
            DiffPoly term(c);
            Monomial kept;
            for (const auto& [x, p] : m) {
                const DiffPoly* value = resolve(x);
                if (value == nullptr) {
                    kept.emplace_back(x, p);
                    continue;
                }
                for (int k = 0; k < p; ++k) term = term * *value;
            }
            if (!kept.empty()) {
                DiffPoly factor;
                factor.terms_.emplace(kept, GaussianRational(1));
                term = term * factor;
            }
            out += term;
        }
        return out;
    }

    /// Coefficient of x^1 when the polynomial is affine in x with a constant
    /// slope; used to solve linear relations for a single unknown.
    std::pair<GaussianRational, DiffPoly> split_linear(const Indeterminate& x) const {
        GaussianRational slope;
        DiffPoly rest;
        for (const auto& [m, c] : terms_) {
            auto it = std::find_if(m.begin(), m.end(), [&](const auto& e) { return e.first == x; });
            if (it == m.end()) {
                rest.accumulate(m, c);
                continue;
            }
            if (it->second != 1 || m.size() != 1)
                throw ValidationError("relation is not linear with constant slope in " + to_string(x));
            slope += c;
        }
        return {slope, rest};
    }

    /// Solve `*this == 0` for x, assuming split_linear succeeds.
    DiffPoly solve_for(const Indeterminate& x) const {
        auto [slope, rest] = split_linear(x);
        if (slope.is_zero()) throw ValidationError("relation does not involve " + to_string(x));
        return (-slope.inverse()) * rest;
    }

    using Labeler = std::function<std::string(const DerivationSymbol&)>;

    static std::string default_label(const DerivationSymbol& d) { return "[" + d.key() + "]"; }

    static std::string to_string(const Indeterminate& x, const Labeler& label = default_label) {
        std::string s = x.name;
        if (!x.derivs.empty()) {
            s += "_";
            for (const auto& [d, c] : x.derivs)
                for (int k = 0; k < c; ++k) s += label(d);
        }
        return s;
    }

    std::string str(const Labeler& label = default_label) const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            std::string cs = c.str();
            bool negative = !cs.empty() && cs[0] == '-' && (c.is_real() || c.re() == 0);
            if (negative) cs.erase(0, 1);
            if (!c.is_real() && c.re() != 0) cs = "(" + cs + ")";
            if (first) os << (negative ? "-" : "");
            else
                os << (negative ? " - " : " + ");
            first = false;
            std::string mono;
            for (const auto& [x, p] : m) {
                if (!mono.empty()) mono += "*";
                mono += to_string(x, label);
                if (p > 1) mono += "^" + std::to_string(p);
            }
            if (mono.empty()) os << cs;
            else if (cs == "1")
                os << mono;
            else
                os << cs << "*" << mono;
        }
        return os.str();
    }

    friend std::ostream& operator<<(std::ostream& os, const DiffPoly& p) { return os << p.str(); }

    nlohmann::json to_json() const {
        nlohmann::json sum = nlohmann::json::array();
        for (const auto& [m, c] : terms_) {
            auto [re, im] = c.to_strings();
            nlohmann::json mono = nlohmann::json::array();
            for (const auto& [x, p] : m) {
                nlohmann::json ds = nlohmann::json::array();
                for (const auto& [d, k] : x.derivs) ds.push_back({d.key(), k});
                for (int k = 0; k < p; ++k) mono.push_back({x.name, ds});
            }
            sum.push_back({{"coef", {re, im}}, {"mono", mono}});
        }
        return {{"sum", sum}};
    }

    static DiffPoly from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("sum") || !j["sum"].is_array())
            throw ValidationError("DiffPoly JSON needs a \"sum\" array");
        DiffPoly out;
        for (const auto& t : j["sum"]) {
            const auto& coef = t.at("coef");
            DiffPoly term(GaussianRational::from_strings(coef.at(0).get<std::string>(), coef.at(1).get<std::string>()));
            for (const auto& f : t.at("mono")) {
                std::vector<std::pair<DerivationSymbol, int>> ds;
                for (const auto& d : f.at(1)) ds.emplace_back(DerivationSymbol::from_key(d.at(0).get<std::string>()), d.at(1).get<int>());
                term = term * DiffPoly(Indeterminate(f.at(0).get<std::string>(), ds));
            }
            out += term;
        }
        return out;
    }

private:
    static bool is_ancestor(const Indeterminate& y, const Indeterminate& x) {
        if (y.name != x.name) return false;
        for (const auto& [d, c] : y.derivs)
            if (x.count(d) < c) return false;
        return true;
    }

    void accumulate(const Monomial& m, const GaussianRational& c) {
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (inserted) return;
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }

    Terms terms_;
};

inline DiffPoly derive(const DiffPoly& p, const DerivationSymbol& d) { return p.derive(d); }

} // namespace slt
