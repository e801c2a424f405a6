#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "slt/slt.hpp"

namespace {

using json = nlohmann::json;
using namespace slt;

struct Flags {
    std::string config;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::optional<std::string> frame;
    std::optional<int> depth_N;
    std::optional<int> depth_M;
    std::optional<int> grid;
    std::optional<double> tol_fact;
    std::optional<double> tol_cond;
    std::optional<double> tol_tail;
    std::optional<double> fd_step;
    std::optional<double> fd_tol;
    std::vector<std::string> checks;
    std::string target = "standard";
    std::optional<std::size_t> term_cap;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

HierarchyKind parse_kind(const std::string& s) {
    if (s == "standard") return HierarchyKind::Standard;
    if (s == "strict") return HierarchyKind::Strict;
    if (s == "combined") return HierarchyKind::Combined;
    throw ValidationError("unknown hierarchy kind '" + s + "'");
}

json frame_spec(const json& cfg, const Flags& f) {
    if (f.frame) {
        if (!f.frame->empty() && f.frame->front() == '{') return json::parse(*f.frame);
        return {{"kind", *f.frame}};
    }
    return cfg.value("frame", json{{"kind", "diagonal"}});
}

int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

Complex flow_value(const json& v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    return ScalarTraits<Complex>::from_json(v);
}

std::vector<std::string> check_list(const json& cfg, const Flags& f, std::vector<std::string> fallback) {
    if (!f.checks.empty()) return f.checks;
    if (cfg.contains("checks")) return cfg["checks"].get<std::vector<std::string>>();
    return fallback;
}

struct Problem {
    SolverProblem p;
    json canonical;
    std::string hash;
    json cfg;
};

/// Reads a solver config, or the "input" block of a previous solve output,
/// applies flag overrides and returns the canonical problem.
Problem load_problem(const json& raw, const Flags& f) {
    const json cfg = raw.contains("input") ? raw["input"] : raw;
    if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
    Problem out;
    out.cfg = cfg;
    auto& p = out.p;
    auto& o = p.options;
    const std::size_t n = f.n ? *f.n : cfg.value("n", std::size_t{2});
    p.frame = CommutativeFrame::from_json(frame_spec(cfg, f), n);

    o.N = f.depth_N ? *f.depth_N : cfg.value("N", o.N);
    o.M = f.depth_M ? *f.depth_M : cfg.value("M", o.M);
    if (f.grid) o.grid = *f.grid;
    else if (cfg.contains("grid")) o.grid = cfg["grid"].get<int>();
    else o.grid = std::max(128, next_pow2(4 * (o.N + o.M)));
    const json tol = cfg.value("tolerances", json::object());
    o.fact_tol = f.tol_fact ? *f.tol_fact : tol.value("fact", o.fact_tol);
    o.cond_max = f.tol_cond ? *f.tol_cond : tol.value("cond_max", o.cond_max);
    o.tail_tol = f.tol_tail ? *f.tol_tail : tol.value("tail", o.tail_tol);
    o.fd_step = f.fd_step ? *f.fd_step : tol.value("fd_step", o.fd_step);
    o.fd_tol = f.fd_tol ? *f.fd_tol : tol.value("fd", o.fd_tol);
    o.validate();

    const json g = cfg.contains("g") ? cfg["g"] : (f.seed ? json{{"random", json::object()}} : json("identity"));
    if (g.is_string() && g.get<std::string>() == "identity") {
        p.g = AnnulusLoop::identity(n);
    } else if (g.is_object() && g.contains("random")) {
        const json r = g["random"];
        std::optional<std::uint64_t> seed = f.seed;
        if (!seed && r.contains("seed")) seed = r["seed"].get<std::uint64_t>();
        if (!seed) throw ValidationError("a random loop needs --seed or g.random.seed");
        p.g = random_loop(n, r.value("eps", 0.1), r.value("modes", 1), *seed, o);
    } else if (g.is_object()) {
        p.g = AnnulusLoop::from_json(g, n);
    } else {
        throw ValidationError("g must be \"identity\", {\"random\":{...}} or a loop object");
    }

    p.l.l = cfg.contains("l") ? cfg["l"].get<std::vector<int>>() : std::vector<int>(n, 0);
    p.l.validate(p.frame);

    json flows = json::object();
    if (cfg.contains("flows")) {
        for (const auto& [key, v] : cfg["flows"].items()) {
            const Flow fl = DerivationSymbol::from_key(key);
            if (fl.alpha < 1 || static_cast<std::size_t>(fl.alpha) > p.frame.rank())
                throw ValidationError("flow " + key + " refers to a missing frame element");
            if (2 * std::abs(fl.m) > o.N) throw ValidationError("flow " + key + " needs |m| <= N/2");
            p.flows[fl] = flow_value(v);
        }
    }
    for (const auto& [fl, t] : p.flows) flows[fl.key()] = ScalarTraits<Complex>::to_json(t);

    out.canonical = {{"n", n},
                     {"frame", p.frame.to_json()},
                     {"N", o.N},
                     {"M", o.M},
                     {"grid", o.grid},
                     {"g", p.g.to_json()},
                     {"l", p.l.l},
                     {"flows", flows}};
    out.hash = hex64(fnv1a(out.canonical.dump()));
    out.canonical["tolerances"] = {{"fact", o.fact_tol},
                                   {"cond_max", o.cond_max},
                                   {"tail", o.tail_tol},
                                   {"fd_step", o.fd_step},
                                   {"fd", o.fd_tol}};
    return out;
}

// ---------------------------------------------------------------------------
// Text rendering

std::string scalar_text(const GaussianRational& s) { return s.str(); }
std::string scalar_text(const DiffPoly& s) { return s.str(); }
std::string scalar_text(const Complex& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g%+.9gi", s.real(), s.imag());
    return buf;
}

/// One line per power; matrix entries row-major, rows separated by '|',
/// every entry column padded to a common width.
template <Scalar S>
std::string series_text(const std::string& name, const LoopSeries<S>& s) {
    const std::size_t n = s.n();
    std::vector<std::string> powers;
    std::vector<std::vector<std::string>> cells;
    std::size_t wp = 0, wc = 0;
    for (int k = s.window().lo; k <= s.window().hi; ++k) {
        const auto& c = s.coeff(k);
        if (c.is_zero()) continue;
        powers.push_back("z^" + std::to_string(k));
        wp = std::max(wp, powers.back().size());
        std::vector<std::string> row;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                row.push_back(scalar_text(c(i, j)));
                wc = std::max(wc, row.back().size());
            }
        cells.push_back(std::move(row));
    }
    std::ostringstream os;
    os << name << "  window [" << s.window().lo << ", " << s.window().hi << "]\n";
    if (powers.empty()) os << "  0\n";
    for (std::size_t r = 0; r < powers.size(); ++r) {
        os << "  " << std::left << std::setw(static_cast<int>(wp)) << powers[r];
        for (std::size_t e = 0; e < cells[r].size(); ++e) {
            os << (e % n == 0 ? "  | " : "  ") << std::right << std::setw(static_cast<int>(wc)) << cells[r][e];
        }
        os << "\n";
    }
    return os.str();
}

template <Scalar S>
json family_json(const std::vector<LoopSeries<S>>& fam) {
    json a = json::array();
    for (const auto& s : fam) a.push_back(s.to_json());
    return a;
}

template <Scalar S>
json deformation_json(const Deformation<S>& d) {
    json j = {{"kind", to_string(d.kind)}};
    if (!d.u.empty()) j["U"] = family_json(d.u);
    if (!d.v.empty()) j["V"] = family_json(d.v);
    if (!d.w.empty()) j["W"] = family_json(d.w);
    return j;
}

template <Scalar S>
std::string deformation_text(const Deformation<S>& d) {
    std::string s = "kind " + to_string(d.kind) + "\n";
    auto fam = [&](const char* name, const std::vector<LoopSeries<S>>& f) {
        for (std::size_t a = 0; a < f.size(); ++a) s += series_text(std::string(name) + "_" + std::to_string(a + 1), f[a]);
    };
    fam("U", d.u);
    fam("V", d.v);
    fam("W", d.w);
    return s;
}

void emit(const Flags& f, const json& j, const std::string& text) {
    if (f.format == "text") std::cout << text;
    else
        std::cout << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Commands

int cmd_derive_akns(const Flags& f) {
    const auto rep = akns_reduce();
    emit(f, rep.to_json(), rep.text());
    return 0;
}

template <Scalar S>
int zc_check_backend(const Flags& f, const json& cfg, double tol) {
    const auto kind = parse_kind(cfg.value("kind", std::string("combined")));
    const std::size_t n = f.n ? *f.n : cfg.value("n", std::size_t{2});
    const auto frame = CommutativeFrame::from_json(frame_spec(cfg, f), n);
    Deformation<S> d;
    if (cfg.contains("witness")) {
        Witness<S> w;
        const json& wj = cfg["witness"];
        if (wj.contains("negative")) w.negative = LoopSeries<S>::from_json(wj["negative"]);
        if (wj.contains("positive")) w.positive = LoopSeries<S>::from_json(wj["positive"]);
        d = deform(kind, frame, w);
    } else {
        d = trivial_deformation<S>(kind, frame);
    }
    std::vector<std::string> fallback;
    const auto fl = flows_of(kind, frame.rank(), -2, 2);
    for (std::size_t i = 0; i < fl.size(); ++i)
        for (std::size_t j = i + 1; j < fl.size(); ++j) fallback.push_back("zc:" + fl[i].key() + ":" + fl[j].key());
    const auto checks = check_list(cfg, f, fallback);

    json report = json::object();
    std::string text;
    bool ok = true;
    for (const auto& label : checks) {
        const auto c = parse_check(label);
        if (c.kind == CheckSpec::Kind::Lax) throw ValidationError("zc-check takes zc: and cor: checks, not '" + label + "'");
        const auto res = c.kind == CheckSpec::Kind::Zc ? zc_residual(d, c.f1, c.f2, lax_zc_derivatives(d, c.f1, c.f2))
                                                       : corollary_residual(d, c.f1, c.f2, lax_part_derivatives(d, c.f1, c.f2));
        const bool zero = res.is_zero();
        const double norm = res.max_norm();
        const bool pass = ScalarTraits<S>::exact ? zero : norm <= tol;
        ok = ok && pass;
        json entry = {{"status", pass ? "pass" : "fail"}};
        if (ScalarTraits<S>::exact) entry["zero"] = zero;
        else
            entry["max_norm"] = norm;
        if (!pass) entry["residual"] = res.to_json();
        report[label] = entry;
        text += label + "  " + (pass ? "pass" : "fail");
        if (!ScalarTraits<S>::exact) text += "  " + detail::sci(norm);
        text += "\n";
        if (!pass) text += series_text("  residual", res);
    }
    emit(f, {{"kind", to_string(kind)}, {"checks", report}, {"all_passed", ok}}, text);
    return ok ? 0 : 1;
}

int cmd_zc_check(const Flags& f) {
    const json cfg = load_config(f.config);
    const std::string backend = cfg.value("backend", std::string("exact"));
    const double tol = f.tol_fact ? *f.tol_fact : cfg.value("tol", 1e-10);
    if (backend == "exact") return zc_check_backend<GaussianRational>(f, cfg, tol);
    if (backend == "complex") return zc_check_backend<Complex>(f, cfg, tol);
    if (backend == "symbolic") return zc_check_backend<DiffPoly>(f, cfg, tol);
    throw ValidationError("backend must be exact, complex or symbolic");
}

int cmd_solve(const Flags& f) {
    const auto pr = load_problem(load_config(f.config), f);
    const auto w = build_wave_pair(pr.p);
    const auto sol = extract_solution(w, pr.p.frame);
    const double rel = relation_error(w, pr.p.frame, pr.p.options);
    const json j = {{"input", pr.canonical},
                    {"provenance", {{"hash", pr.hash}}},
                    {"solution", deformation_json(sol)},
                    {"diagnostics", {{"factorization_residual", w.residual}, {"relation_error", rel}}}};
    std::string text = "provenance " + pr.hash + "\n";
    text += "factorization residual " + detail::sci(w.residual) + "\n";
    text += "relation error " + detail::sci(rel) + "\n";
    text += deformation_text(sol);
    emit(f, j, text);
    return 0;
}

int cmd_verify(const Flags& f) {
    const auto pr = load_problem(load_config(f.config), f);
    std::vector<CheckSpec> specs;
    for (const auto& c : check_list(pr.cfg, f, {"lax:1,1"})) specs.push_back(parse_check(c));
    const auto rep = fd_verify(pr.p, specs);
    bool failed = false;
    int inconclusive = 0;
    std::string text = "provenance " + pr.hash + "\n";
    for (const auto& c : rep.checks) {
        if (c.inconclusive) ++inconclusive;
        else if (!c.passed)
            failed = true;
        text += c.label + "  " + (c.inconclusive ? "inconclusive  " + c.note : (c.passed ? "pass  " : "fail  ") + detail::sci(*c.residual)) +
                "\n";
    }
    const json j = {{"provenance", {{"hash", pr.hash}}},
                    {"checks", rep.to_json()},
                    {"fd_tol", pr.p.options.fd_tol},
                    {"inconclusive", inconclusive},
                    {"all_passed", !failed}};
    emit(f, j, text);
    return failed ? 1 : 0;
}

int cmd_reduce(const Flags& f) {
    const auto pr = load_problem(load_config(f.config), f);
    const auto target = parse_kind(f.target);
    if (target == HierarchyKind::Combined) throw ValidationError("reduce target must be standard or strict");
    const auto sol = reduce_subhierarchy(solve(pr.p), pr.p.flows, target);
    const json j = {{"provenance", {{"hash", pr.hash}}}, {"solution", deformation_json(sol)}};
    emit(f, j, "provenance " + pr.hash + "\n" + deformation_text(sol));
    return 0;
}

void add_common(CLI::App* c, Flags& f) {
    c->add_option("--config", f.config, "JSON config file");
    c->add_option("--format", f.format, "output encoding")->check(CLI::IsMember({"json", "text"}));
    c->add_option("--seed", f.seed, "seed for random loops");
    c->add_option("--n", f.n, "matrix size");
    c->add_option("--frame", f.frame, "frame kind or frame JSON");
    c->add_option("--depth-N", f.depth_N, "Fourier bound N");
    c->add_option("--depth-M", f.depth_M, "u_- depth M");
    c->add_option("--grid", f.grid, "grid size");
    c->add_option("--tol-fact", f.tol_fact, "factorization tolerance");
    c->add_option("--tol-cond", f.tol_cond, "condition bound");
    c->add_option("--tol-tail", f.tol_tail, "Fourier tail tolerance");
    c->add_option("--fd-step", f.fd_step, "finite-difference step");
    c->add_option("--fd-tol", f.fd_tol, "finite-difference tolerance");
    c->add_option("--checks", f.checks, "checks such as lax:1,1 zc:-1,1:1,1");
    c->add_option("--term-cap", f.term_cap, "term cap for symbolic expressions");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slt: (sl_n, t)-hierarchy toolkit"};
    app.require_subcommand(1);
    Flags f;
    auto* derive = app.add_subcommand("derive-akns", "AKNS equations from the n = 2 diagonal hierarchy");
    auto* zc = app.add_subcommand("zc-check", "zero-curvature residuals of a dressed deformation");
    auto* solve_cmd = app.add_subcommand("solve", "solution from a loop by Birkhoff factorization");
    auto* verify = app.add_subcommand("verify", "finite-difference residual report");
    auto* reduce = app.add_subcommand("reduce", "standard or strict reduction of a solution");
    for (auto* c : {derive, zc, solve_cmd, verify, reduce}) add_common(c, f);
    reduce->add_option("--target", f.target, "standard or strict")->check(CLI::IsMember({"standard", "strict"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (f.term_cap) set_diffpoly_term_cap(*f.term_cap);
    try {
        if (*derive) return cmd_derive_akns(f);
        if (*zc) return cmd_zc_check(f);
        if (*solve_cmd) return cmd_solve(f);
        if (*verify) return cmd_verify(f);
        if (*reduce) return cmd_reduce(f);
    } catch (const BigCellViolation& e) {
        std::cerr << "big cell violation: " << e.what() << "\n";
        return 3;
    } catch (const ResourceExceeded& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
