#pragma once

// Numeric construction of combined-hierarchy solutions from a loop g:
// factorize delta(l) gamma(t) g gamma(t)^{-1} delta(-l) = u_-^{-1} p_+ on the
// unit circle and read off U = u_- E u_-^{-1}, W = p_+ E z^{-1} p_+^{-1}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "slt/dense.hpp"
#include "slt/errors.hpp"
#include "slt/frame.hpp"
#include "slt/hierarchy.hpp"
#include "slt/linearization.hpp"
#include "slt/loop_series.hpp"

namespace slt {

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

} // namespace detail

/// Fourier loop sum_{k=lo}^{hi} l_k z^k on an annulus around the unit circle.
class AnnulusLoop {
public:
    AnnulusLoop() = default;
    AnnulusLoop(std::size_t n, int lo, int hi) : n_(n), lo_(lo), hi_(hi) {
        if (lo > hi) throw ValidationError("loop window lo > hi");
        coeffs_.assign(static_cast<std::size_t>(hi - lo + 1), DenseMatrix::Zero(n, n));
    }

    static AnnulusLoop identity(std::size_t n, int bound = 0) {
        AnnulusLoop l(n, -bound, bound);
        l.at(0) = DenseMatrix::Identity(n, n);
        return l;
    }

    std::size_t n() const { return n_; }
    int lo() const { return lo_; }
    int hi() const { return hi_; }
    double radius() const { return radius_; }
    void set_radius(double r) {
        if (!(r > 0.0 && r < 1.0)) throw ValidationError("annulus radius must lie in (0, 1)");
        radius_ = r;
    }

    DenseMatrix coeff(int k) const {
        if (k < lo_ || k > hi_) return DenseMatrix::Zero(n_, n_);
        return coeffs_[static_cast<std::size_t>(k - lo_)];
    }
    DenseMatrix& at(int k) {
        if (k < lo_ || k > hi_) throw WindowUnderflow("loop frequency " + std::to_string(k) + " outside storage");
        return coeffs_[static_cast<std::size_t>(k - lo_)];
    }

    bool is_identity() const {
        for (int k = lo_; k <= hi_; ++k) {
            DenseMatrix want = DenseMatrix::Zero(n_, n_);
            if (k == 0) want.setIdentity();
            if (coeff(k) != want) return false;
        }
        return lo_ <= 0 && 0 <= hi_;
    }

    double max_norm() const {
        double m = 0.0;
        for (const auto& c : coeffs_) m = std::max(m, c.norm());
        return m;
    }

    /// max(|l_lo|, |l_hi|) / max_k |l_k|.
    double tail_ratio() const {
        const double m = max_norm();
        if (m == 0.0) return 0.0;
        return std::max(coeff(lo_).norm(), coeff(hi_).norm()) / m;
    }

    /// Values at z_j = exp(2 pi i j / grid).
    std::vector<DenseMatrix> sample(int grid) const {
        std::vector<DenseMatrix> out(static_cast<std::size_t>(grid), DenseMatrix::Zero(n_, n_));
        const auto roots = unit_roots(grid);
        for (int j = 0; j < grid; ++j)
            for (int k = lo_; k <= hi_; ++k) {
                const auto& c = coeffs_[static_cast<std::size_t>(k - lo_)];
                if (c.isZero(0.0)) continue;
                out[static_cast<std::size_t>(j)] += roots[static_cast<std::size_t>(mod(static_cast<long>(j) * k, grid))] * c;
            }
        return out;
    }

    /// Fourier coefficients on [-grid/2, grid/2 - 1] of sampled values.
    static AnnulusLoop from_samples(const std::vector<DenseMatrix>& values) {
        const int grid = static_cast<int>(values.size());
        if (grid < 2) throw ValidationError("grid too small");
        const std::size_t n = static_cast<std::size_t>(values.front().rows());
        AnnulusLoop out(n, -grid / 2, grid / 2 - 1);
        const auto roots = unit_roots(grid);
        for (int k = out.lo_; k <= out.hi_; ++k) {
            DenseMatrix acc = DenseMatrix::Zero(n, n);
            for (int j = 0; j < grid; ++j)
                acc += roots[static_cast<std::size_t>(mod(-static_cast<long>(j) * k, grid))] * values[static_cast<std::size_t>(j)];
            out.at(k) = acc / static_cast<double>(grid);
        }
        return out;
    }

    AnnulusLoop truncated(int lo, int hi) const {
        AnnulusLoop out(n_, lo, hi);
        out.radius_ = radius_;
        for (int k = lo; k <= hi; ++k) out.at(k) = coeff(k);
        return out;
    }

    LoopSeries<Complex> to_series(Window w, Grading g, bool closed_below, bool closed_above) const {
        LoopSeries<Complex> s(n_, w, g, closed_below, closed_above);
        for (int k = w.lo; k <= w.hi; ++k) s.at(k) = from_dense(coeff(k));
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json coeffs = nlohmann::json::object();
        for (int k = lo_; k <= hi_; ++k) {
            const auto c = coeff(k);
            if (c.isZero(0.0)) continue;
            coeffs[std::to_string(k)] = from_dense(c).to_json();
        }
        return {{"n", n_}, {"window", {lo_, hi_}}, {"radius", radius_}, {"coeffs", coeffs}};
    }

    static AnnulusLoop from_json(const nlohmann::json& j, std::size_t n) {
        if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_object())
            throw ValidationError("loop JSON needs a 'coeffs' object");
        int lo = 0, hi = 0;
        for (const auto& [key, v] : j["coeffs"].items()) {
            const int k = parse_power(key);
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
        if (j.contains("window")) {
            lo = std::min(lo, j["window"].at(0).get<int>());
            hi = std::max(hi, j["window"].at(1).get<int>());
        }
        AnnulusLoop out(n, lo, hi);
        for (const auto& [key, v] : j["coeffs"].items()) out.at(parse_power(key)) = to_dense(Matrix<Complex>::from_json(v, n));
        if (j.contains("radius")) out.set_radius(j["radius"].get<double>());
        return out;
    }

    static std::vector<std::complex<double>> unit_roots(int grid) {
        std::vector<std::complex<double>> r(static_cast<std::size_t>(grid));
        for (int j = 0; j < grid; ++j) r[static_cast<std::size_t>(j)] = std::polar(1.0, 2.0 * std::numbers::pi * j / grid);
        return r;
    }

private:
    static long mod(long a, long m) { return ((a % m) + m) % m; }

    static int parse_power(const std::string& key) {
        try {
            std::size_t used = 0;
            const int k = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
            return k;
        } catch (const std::logic_error&) {
            throw ValidationError("loop coefficient key '" + key + "' is not an integer");
        }
    }

    std::size_t n_ = 0;
    int lo_ = 0;
    int hi_ = 0;
    double radius_ = 0.5;
    std::vector<DenseMatrix> coeffs_;
};

struct SolverOptions {
    int N = 16;
    int M = 12;
    int grid = 128;
    double fact_tol = 1e-10;
    double cond_max = 1e10;
    double tail_tol = 1e-10;
    double fd_step = 1e-4;
    double fd_tol = 1e-6;

    void validate() const {
        if (N < 1 || M < 1) throw ValidationError("depths N and M must be positive");
        if (grid < 4 * (N + M) || (grid & (grid - 1)) != 0)
            throw ValidationError("grid must be a power of two with grid >= 4(N+M)");
        if (!(fact_tol > 0) || !(cond_max > 1) || !(tail_tol > 0) || !(fd_step > 0) || !(fd_tol > 0))
            throw ValidationError("tolerances must be positive");
    }
};

/// Pointwise exp(sum t_{m a} E_a z^m) on the grid.
inline std::vector<DenseMatrix> gamma_samples(const FlowRecord<Complex>& flows, const CommutativeFrame& frame, int N, int grid,
                                              double sign = 1.0) {
    const auto n = static_cast<Eigen::Index>(frame.n());
    const auto roots = AnnulusLoop::unit_roots(grid);
    std::vector<DenseMatrix> out(static_cast<std::size_t>(grid));
    for (const auto& [d, t] : flows)
        if (std::abs(d.m) > N / 2) throw ValidationError("flow degree |m| = " + std::to_string(std::abs(d.m)) + " exceeds N/2");
    std::vector<std::pair<int, DenseMatrix>> terms;
    for (const auto& [d, t] : flows) {
        if (t == Complex{}) continue;
        terms.emplace_back(d.m, sign * t * to_dense(frame.E(d.alpha)));
    }
    for (int j = 0; j < grid; ++j) {
        if (terms.empty()) {
            out[static_cast<std::size_t>(j)] = DenseMatrix::Identity(n, n);
            continue;
        }
        DenseMatrix h = DenseMatrix::Zero(n, n);
        for (const auto& [m, e] : terms) h += std::pow(roots[static_cast<std::size_t>(j)], m) * e;
        out[static_cast<std::size_t>(j)] = expm(h);
    }
    return out;
}

inline void check_aliasing(const AnnulusLoop& full, int keep, double tail_tol, const std::string& what) {
    double inside = 0.0;
    double outside = 0.0;
    for (int k = full.lo(); k <= full.hi(); ++k) {
        const double v = full.coeff(k).norm();
        if (std::abs(k) <= keep) inside = std::max(inside, v);
        else
            outside = std::max(outside, v);
    }
    if (outside > tail_tol * std::max(inside, 1.0))
        throw AliasingDetected(what + ": Fourier mass beyond |k| = " + std::to_string(keep) + " is " + detail::sci(outside));
}

/// gamma(t) as a Fourier loop on [-N, N].
inline AnnulusLoop gamma_eval(const FlowRecord<Complex>& flows, const CommutativeFrame& frame, int N, int grid,
                              double tail_tol = 1e-10) {
    if (grid < 4 * N || (grid & (grid - 1)) != 0) throw ValidationError("grid must be a power of two with grid >= 4N");
    bool trivial = true;
    for (const auto& [d, t] : flows) {
        if (std::abs(d.m) > N / 2) throw ValidationError("flow degree exceeds N/2");
        if (t != Complex{}) trivial = false;
    }
    if (trivial) return AnnulusLoop::identity(frame.n(), N);
    const auto full = AnnulusLoop::from_samples(gamma_samples(flows, frame, N, grid));
    check_aliasing(full, N, tail_tol, "gamma");
    return full.truncated(-N, N);
}

/// delta(l) loop delta(-l): entry (i, j) of frequency k moves to k + l_i - l_j.
inline AnnulusLoop delta_twist(const ExponentVector& l, const AnnulusLoop& loop) {
    if (l.l.size() != loop.n()) throw ValidationError("exponent vector length differs from loop size");
    const auto [mn, mx] = std::minmax_element(l.l.begin(), l.l.end());
    const int spread = *mx - *mn;
    AnnulusLoop out(loop.n(), loop.lo() - spread, loop.hi() + spread);
    out.set_radius(loop.radius());
    for (int k = loop.lo(); k <= loop.hi(); ++k) {
        const auto c = loop.coeff(k);
        for (std::size_t i = 0; i < loop.n(); ++i)
            for (std::size_t j = 0; j < loop.n(); ++j) {
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                out.at(k + l.l[i] - l.l[j])(ii, jj) = c(ii, jj);
            }
    }
    return out;
}

struct Factorization {
    AnnulusLoop u_minus; // Id + sum_{k=1}^{M} a_k z^{-k}
    AnnulusLoop p_plus;  // sum_{j=0}^{N} p_j z^j
    double residual = 0.0;
    double condition = 0.0;
};

/// Birkhoff factorization l = u_-^{-1} p_+ by the block Toeplitz system
/// sum_k a_k l_{j+k} = -l_j, j in [-M, -1]. P is the minimal p_+ degree.
inline Factorization birkhoff_factorize(const AnnulusLoop& loop, int M, int P, const SolverOptions& opt) {
    const std::size_t n = loop.n();
    const auto ni = static_cast<Eigen::Index>(n);
    if (loop.is_identity()) {
        Factorization id{AnnulusLoop(n, -M, 0), AnnulusLoop(n, 0, P), 0.0, 1.0};
        id.u_minus.at(0) = DenseMatrix::Identity(ni, ni);
        id.p_plus.at(0) = DenseMatrix::Identity(ni, ni);
        return id;
    }
    const Eigen::Index size = ni * M;
    DenseMatrix T(size, size);
    DenseMatrix L(ni, size);
    for (int k = 1; k <= M; ++k)
        for (int j = -M; j <= -1; ++j) T.block((k - 1) * ni, (j + M) * ni, ni, ni) = loop.coeff(j + k);
    for (int j = -M; j <= -1; ++j) L.block(0, (j + M) * ni, ni, ni) = loop.coeff(j);
    const DenseMatrix Tt = T.transpose();
    Eigen::JacobiSVD<DenseMatrix> svd(Tt, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond <= opt.cond_max))
        throw BigCellViolation("Toeplitz system is singular (condition " + detail::sci(cond) +
                               "): the loop is outside the big cell at this point");
    const DenseMatrix At = svd.solve(DenseMatrix(-L.transpose()));
    const DenseMatrix A = At.transpose();

    Factorization f;
    f.condition = cond;
    f.u_minus = AnnulusLoop(n, -M, 0);
    f.u_minus.at(0) = DenseMatrix::Identity(ni, ni);
    for (int k = 1; k <= M; ++k) f.u_minus.at(-k) = A.block(0, (k - 1) * ni, ni, ni);

    auto product = [&](int j) {
        DenseMatrix c = loop.coeff(j);
        for (int k = 1; k <= M; ++k) c += f.u_minus.coeff(-k) * loop.coeff(j + k);
        return c;
    };
    double residual = 0.0;
    for (int j = loop.lo() + M; j <= -1; ++j) residual = std::max(residual, product(j).norm());
    f.residual = residual;
    if (residual > opt.fact_tol)
        throw BigCellViolation("factorization residual " + detail::sci(residual) + " exceeds fact_tol; the loop is outside the big cell or M is too small");
    // p_+ keeps at least P frequencies and extends while the product has
    // mass above 1e-3 fact_tol.
    int top = P;
    for (int j = loop.hi(); j > P; --j)
        if (product(j).norm() > 1e-3 * opt.fact_tol) {
            top = j;
            break;
        }
    f.p_plus = AnnulusLoop(n, 0, top);
    for (int j = 0; j <= top; ++j) f.p_plus.at(j) = product(j);
    Eigen::JacobiSVD<DenseMatrix> s0(f.p_plus.coeff(0));
    const auto& sv = s0.singularValues();
    const double c0 = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(c0 <= opt.cond_max)) throw BigCellViolation("constant term of p_+ is singular");
    return f;
}

/// max over the grid of |u_-(z)^{-1} p_+(z) - l(z)|.
inline double reconstruction_error(const Factorization& f, const AnnulusLoop& loop, int grid) {
    const auto u = f.u_minus.sample(grid);
    const auto p = f.p_plus.sample(grid);
    const auto l = loop.sample(grid);
    double err = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) err = std::max(err, (u[j].inverse() * p[j] - l[j]).norm());
    return err;
}

struct SolverProblem {
    CommutativeFrame frame;
    AnnulusLoop g;
    ExponentVector l;
    FlowRecord<Complex> flows;
    SolverOptions options;
};

struct WaveMatrixPair {
    AnnulusLoop u_minus;
    AnnulusLoop p_plus;
    ExponentVector l;
    FlowRecord<Complex> flows;
    AnnulusLoop g;
    double residual = 0.0;
};

/// Fourier coefficients of delta(l) gamma(t) g gamma(t)^{-1} delta(-l).
inline AnnulusLoop twisted_loop(const SolverProblem& p) {
    const auto& o = p.options;
    p.l.validate(p.frame);
    if (p.g.n() != p.frame.n()) throw ValidationError("loop size differs from frame size");
    if (p.g.is_identity()) return AnnulusLoop::identity(p.frame.n());
    const auto gs = p.g.sample(o.grid);
    const auto gp = gamma_samples(p.flows, p.frame, o.N, o.grid, 1.0);
    const auto gm = gamma_samples(p.flows, p.frame, o.N, o.grid, -1.0);
    std::vector<DenseMatrix> vals(gs.size());
    for (std::size_t j = 0; j < gs.size(); ++j) vals[j] = gp[j] * gs[j] * gm[j];
    const auto full = AnnulusLoop::from_samples(vals);
    check_aliasing(full, o.grid / 2 - 4, o.tail_tol, "twisted loop");
    return delta_twist(p.l, full);
}

inline WaveMatrixPair build_wave_pair(const SolverProblem& p) {
    p.options.validate();
    const auto loop = twisted_loop(p);
    const auto f = birkhoff_factorize(loop, p.options.M, p.options.N, p.options);
    return {f.u_minus, f.p_plus, p.l, p.flows, p.g, f.residual};
}

/// max over the grid of |Psi - Phi g^{-1}| with Psi = u_- delta gamma,
/// Phi = p_+ delta gamma.
inline double relation_error(const WaveMatrixPair& w, const CommutativeFrame& frame, const SolverOptions& o) {
    const auto u = w.u_minus.sample(o.grid);
    const auto p = w.p_plus.sample(o.grid);
    const auto g = w.g.sample(o.grid);
    const auto gam = gamma_samples(w.flows, frame, o.N, o.grid);
    const auto roots = AnnulusLoop::unit_roots(o.grid);
    double err = 0.0;
    const auto n = static_cast<Eigen::Index>(frame.n());
    for (std::size_t j = 0; j < u.size(); ++j) {
        DenseMatrix delta = DenseMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) delta(i, i) = std::pow(roots[j], w.l.l[static_cast<std::size_t>(i)]);
        const DenseMatrix psi = u[j] * delta * gam[j];
        const DenseMatrix phi = p[j] * delta * gam[j];
        err = std::max(err, (psi - phi * g[j].inverse()).norm());
    }
    return err;
}

/// U_a = u_- E_a u_-^{-1} on [-M, 0] and W_a = p_+ E_a z^{-1} p_+^{-1} on [-1, N-1].
inline Deformation<Complex> extract_solution(const WaveMatrixPair& w, const CommutativeFrame& frame) {
    const int M = -w.u_minus.lo();
    const int N = w.p_plus.hi();
    Deformation<Complex> d{HierarchyKind::Combined, frame, {}, {}, {}, std::nullopt};
    const bool exact_identity = w.u_minus.is_identity() && w.p_plus.is_identity();
    if (exact_identity) {
        auto t = trivial_deformation<Complex>(HierarchyKind::Combined, frame);
        for (auto& s : t.u) s = s.truncate({-std::max(M, 1), 0});
        for (auto& s : t.w) s = s.truncate({-1, std::max(N - 1, 0)});
        // Truncation of a polynomial keeps it closed; the solution is exact.
        return t;
    }
    const auto um = w.u_minus.to_series({-M, 0}, Grading::Descending, false, true);
    const auto pp = w.p_plus.to_series({0, N}, Grading::Ascending, true, false);
    const auto umi = invert(um);
    const auto ppi = invert(pp);
    Witness<Complex> wt{um, pp};
    d.witness = wt;
    for (std::size_t a = 1; a <= frame.rank(); ++a) {
        const auto e = frame.E_as<Complex>(static_cast<int>(a));
        d.u.push_back((series_mul(um * e, umi)).with_grading(Grading::Descending));
        const auto ez = LoopSeries<Complex>::monomial(e, -1, Grading::Ascending);
        d.w.push_back(series_mul(series_mul(pp, ez), ppi).with_grading(Grading::Ascending));
    }
    return d;
}

/// Reductions: standard needs the negative flows switched off,
/// strict needs the nonnegative ones off and uses V(z) = W(1/z).
inline Deformation<Complex> reduce_subhierarchy(const Deformation<Complex>& sol, const FlowRecord<Complex>& flows,
                                                HierarchyKind target) {
    if (sol.kind != HierarchyKind::Combined) throw ValidationError("reduction starts from a combined solution");
    if (target == HierarchyKind::Standard) {
        for (const auto& [d, t] : flows)
            if (d.m < 0 && t != Complex{})
                throw FlowSupportViolation("standard reduction needs all negative flows zero, t(" + d.key() + ") is not");
        return {HierarchyKind::Standard, sol.frame, sol.u, {}, {}, std::nullopt};
    }
    if (target == HierarchyKind::Strict) {
        for (const auto& [d, t] : flows)
            if (d.m >= 0 && t != Complex{})
                throw FlowSupportViolation("strict reduction needs all nonnegative flows zero, t(" + d.key() + ") is not");
        Deformation<Complex> out{HierarchyKind::Strict, sol.frame, {}, {}, {}, std::nullopt};
        for (const auto& w : sol.w) out.v.push_back(w.reflect());
        return out;
    }
    throw ValidationError("reduction target must be standard or strict");
}

/// Strict flow m' >= 1 corresponds to combined flow -m'.
inline Flow strict_to_combined(const Flow& f) { return {-f.m, f.alpha}; }

/// Random traceless loop exp(eps * X(z)) with X supported on [-modes, modes].
inline AnnulusLoop random_loop(std::size_t n, double eps, int modes, std::uint64_t seed, const SolverOptions& o) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const auto ni = static_cast<Eigen::Index>(n);
    std::vector<DenseMatrix> x;
    for (int k = -modes; k <= modes; ++k) {
        DenseMatrix c(ni, ni);
        for (Eigen::Index i = 0; i < ni; ++i)
            for (Eigen::Index j = 0; j < ni; ++j) c(i, j) = Complex(unif(rng), unif(rng));
        const Complex tr = c.trace() / static_cast<double>(n);
        for (Eigen::Index i = 0; i < ni; ++i) c(i, i) -= tr;
        x.push_back(eps * c);
    }
    const auto roots = AnnulusLoop::unit_roots(o.grid);
    std::vector<DenseMatrix> vals(static_cast<std::size_t>(o.grid));
    for (int j = 0; j < o.grid; ++j) {
        DenseMatrix h = DenseMatrix::Zero(ni, ni);
        for (int k = -modes; k <= modes; ++k) h += std::pow(roots[static_cast<std::size_t>(j)], k) * x[static_cast<std::size_t>(k + modes)];
        vals[static_cast<std::size_t>(j)] = expm(h);
    }
    const auto full = AnnulusLoop::from_samples(vals);
    check_aliasing(full, o.N, o.tail_tol, "random loop");
    return full.truncated(-o.N, o.N);
}

inline Deformation<Complex> solve(const SolverProblem& p) { return extract_solution(build_wave_pair(p), p.frame); }

// ---------------------------------------------------------------------------
// Finite-difference verification

struct CheckSpec {
    enum class Kind { Lax, Zc, Cor } kind = Kind::Lax;
    Flow f1;
    Flow f2;
    std::string label;
};

inline CheckSpec parse_check(const std::string& s) {
    auto fail = [&]() -> CheckSpec { throw ValidationError("malformed check '" + s + "' (expected lax:m,a | zc:m,a:m,a | cor:m,a:m,a)"); };
    const auto c1 = s.find(':');
    if (c1 == std::string::npos) return fail();
    const std::string kind = s.substr(0, c1);
    const std::string rest = s.substr(c1 + 1);
    CheckSpec spec;
    spec.label = s;
    if (kind == "lax") {
        spec.kind = CheckSpec::Kind::Lax;
        spec.f1 = DerivationSymbol::from_key(rest);
        spec.f2 = spec.f1;
        return spec;
    }
    if (kind != "zc" && kind != "cor") return fail();
    spec.kind = kind == "zc" ? CheckSpec::Kind::Zc : CheckSpec::Kind::Cor;
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) return fail();
    spec.f1 = DerivationSymbol::from_key(rest.substr(0, c2));
    spec.f2 = DerivationSymbol::from_key(rest.substr(c2 + 1));
    return spec;
}

struct CheckResult {
    std::string label;
    std::optional<double> residual;
    bool inconclusive = false;
    bool passed = false;
    std::string note;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed || c.inconclusive; });
    }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& c : checks) {
            if (c.inconclusive) j[c.label] = {{"status", "inconclusive"}, {"note", c.note}};
            else
                j[c.label] = {{"status", c.passed ? "pass" : "fail"}, {"max_norm", *c.residual}};
        }
        return j;
    }
};

/// Central-difference derivative with one Richardson step around the base
/// flow record; `eval` maps a flow record to a series.
template <class F>
LoopSeries<Complex> richardson_derivative(F&& eval, const FlowRecord<Complex>& base, const Flow& f, double h) {
    auto at = [&](double dt) {
        FlowRecord<Complex> fl = base;
        fl[f] += dt;
        return eval(fl);
    };
    const auto d1 = (1.0 / (2.0 * h)) * (at(h) - at(-h));
    const auto d2 = (1.0 / h) * (at(h / 2) - at(-h / 2));
    return (4.0 / 3.0) * d2 - (1.0 / 3.0) * d1;
}

inline VerifyReport fd_verify(const SolverProblem& p, const std::vector<CheckSpec>& checks) {
    const double h = p.options.fd_step;
    using Key = std::vector<std::tuple<int, int, double, double>>;
    std::map<Key, Deformation<Complex>> cache;
    auto solution_at = [&](const FlowRecord<Complex>& fl) -> const Deformation<Complex>& {
        Key key;
        for (const auto& [d, t] : fl) key.emplace_back(d.m, d.alpha, t.real(), t.imag());
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        SolverProblem q = p;
        q.flows = fl;
        return cache.emplace(key, solve(q)).first->second;
    };
    VerifyReport report;
    for (const auto& c : checks) {
        CheckResult r;
        r.label = c.label;
        try {
            const auto& base = solution_at(p.flows);
            double worst = 0.0;
            if (c.kind == CheckSpec::Kind::Lax) {
                for (const auto& t : base.targets()) {
                    const auto d = richardson_derivative([&](const FlowRecord<Complex>& fl) { return solution_at(fl).series(t); },
                                                         p.flows, c.f1, h);
                    worst = std::max(worst, lax_residual(base, c.f1, t, d).max_norm());
                }
            } else if (c.kind == CheckSpec::Kind::Zc) {
                const auto d1 = richardson_derivative([&](const FlowRecord<Complex>& fl) { return cutoff(solution_at(fl), c.f2); },
                                                      p.flows, c.f1, h);
                const auto d2 = richardson_derivative([&](const FlowRecord<Complex>& fl) { return cutoff(solution_at(fl), c.f1); },
                                                      p.flows, c.f2, h);
                worst = zc_residual(base, c.f1, c.f2, ZcDerivatives<Complex>{d1, d2}).max_norm();
            } else {
                const auto d1 = richardson_derivative([&](const FlowRecord<Complex>& fl) { return part(solution_at(fl), c.f2); },
                                                      p.flows, c.f1, h);
                const auto d2 = richardson_derivative([&](const FlowRecord<Complex>& fl) { return part(solution_at(fl), c.f1); },
                                                      p.flows, c.f2, h);
                worst = corollary_residual(base, c.f1, c.f2, ZcDerivatives<Complex>{d1, d2}).max_norm();
            }
            r.residual = worst;
            r.passed = worst <= p.options.fd_tol;
        } catch (const BigCellViolation& e) {
            r.inconclusive = true;
            r.note = e.what();
        }
        report.checks.push_back(std::move(r));
    }
    return report;
}

} // namespace slt
