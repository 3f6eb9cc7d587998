#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <tuple>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpc/ainf.hpp"
#include "tpc/bar.hpp"
#include "tpc/hochschild.hpp"

namespace tpc {

// ---------------------------------------------------------------------------
// Categories

namespace detail {

// mu_k(pt, ..., pt) on one object: value for k >= 3, zero for k = 1, 2.
inline void add_morse_rule(TabulatedAInfCategory& A, const std::string& name, std::size_t e, std::size_t pt,
                           std::optional<Rational> disc_area) {
    A.set_mu({pt}, {});
    A.set_mu({pt, pt}, {});
    A.add_rule(name, [e, pt, disc_area](const TabulatedAInfCategory&,
                                        const std::vector<std::size_t>& t) -> std::optional<LambdaVec> {
        for (auto g : t)
            if (g != pt) return std::nullopt;
        if (t.size() < 3) return std::nullopt;
        if (!disc_area) return LambdaVec{};
        return LambdaVec{{e, NovikovElement::monomial(*disc_area)}};
    });
}

}  // namespace detail

// One Lagrangian equator L of the unit-area sphere: Morse model with e and pt,
// mu_k(pt, ..., pt) = T^{1/2} e for k >= 3 and mu_2(pt, pt) = 0.
inline TabulatedAInfCategory build_single_equator(const Rational& = Rational(0)) {
    TabulatedAInfCategory A;
    A.modulus = 2;
    A.n = 1;
    auto L = A.add_object("L");
    auto e = A.add_unit(L, "e");
    auto pt = A.add_generator("pt", L, L, 1, Rational(0));
    detail::add_morse_rule(A, "disc", e, pt, Rational(1, 2));
    return A;
}

// Great circles L_1..L_N through the poles, L_i at longitude (i-1) pi / N.
// n[i,j], s[i,j] in CF(L_i, L_j) are the north and south poles at level h.
inline TabulatedAInfCategory build_sphere(std::size_t N, const Rational& h = Rational(0)) {
    if (N < 2) throw std::invalid_argument("sphere model needs N >= 2");
    if (h.sign() < 0) throw std::invalid_argument("h must be nonnegative");
    TabulatedAInfCategory A;
    A.modulus = 2;
    A.n = 1;
    std::vector<std::size_t> L, e;
    for (std::size_t i = 1; i <= N; ++i) {
        L.push_back(A.add_object("L" + std::to_string(i)));
        e.push_back(A.add_unit(L.back(), "e" + std::to_string(i)));
        auto pt = A.add_generator("pt" + std::to_string(i), L.back(), L.back(), 1, Rational(0));
        detail::add_morse_rule(A, "disc" + std::to_string(i), e.back(), pt, Rational(1, 2));
    }
    auto tag = [](std::size_t i, std::size_t j) { return "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]"; };
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            if (i == j) continue;
            auto n = A.add_generator("n" + tag(i, j), L[i], L[j], i < j ? 1 : 0, h);
            auto s = A.add_generator("s" + tag(i, j), L[i], L[j], i < j ? 0 : 1, h);
            A.set_mu({n}, {});
            A.set_mu({s}, {});
        }
    const auto lune = NovikovElement::monomial(Rational(1, static_cast<std::int64_t>(2 * N)));
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t j = (i + 1) % N;
        auto n = A.index_of("n" + tag(i, j)), s = A.index_of("s" + tag(j, i));
        A.set_mu({n, s}, {{e[i], lune}});
        A.set_mu({s, n}, {{e[j], lune}});
    }
    return A;
}

// ---------------------------------------------------------------------------
// Torus grid: horizontal circles H_j at y = alpha_j, vertical circles V_k at x = beta_k
// on R^2 / Z^2 (area 1). Corner a^{jk}_xy in CF(H_j, V_k), a^{jk}_yx in CF(V_k, H_j).

struct TorusCorner {
    bool xy = true;
    std::size_t j = 0, k = 0;
    friend bool operator==(const TorusCorner&, const TorusCorner&) = default;
};

struct TorusGeometry {
    std::size_t Nx = 1, Ny = 1;
    Rational P;
    std::vector<Rational> alpha, beta;  // heights of H_j, abscissae of V_k
    std::vector<Rational> ex, ey;       // e on H_j at x = ex[j], e on V_k at y = ey[k]
    Rational ux, uy;                    // point class u

    static TorusGeometry grid(std::size_t Nx, std::size_t Ny, const Rational& P) {
        TorusGeometry g;
        g.Nx = Nx;
        g.Ny = Ny;
        g.P = P;
        const auto nx = static_cast<std::int64_t>(Nx), ny = static_cast<std::int64_t>(Ny);
        for (std::int64_t j = 0; j < nx; ++j) g.alpha.push_back(Rational(j, nx));
        for (std::int64_t k = 0; k < ny; ++k) g.beta.push_back(Rational(k, ny));
        g.ex.assign(Nx, Rational(2, 3 * ny));
        g.ey.assign(Ny, Rational(2, 3 * nx));
        g.ux = Rational(1, 3 * ny);
        g.uy = Rational(1, 3 * nx);
        return g;
    }
};

namespace torus {

inline Rational frac(const Rational& r) { return r - Rational(r.floor()); }

// #{p in Z : lo < pos + p < hi}
inline std::int64_t lifts_in(const Rational& pos, const Rational& lo, const Rational& hi) {
    if (!(lo < hi)) return 0;
    const std::int64_t n = (hi - pos).ceil() - (lo - pos).floor() - 1;
    return n > 0 ? n : 0;
}

// Rectangle family realizing a closed corner word from one starting corner.
struct Family {
    std::size_t j0 = 0, k0 = 0;  // lower-left corner indices
    Rational dw, dh;             // width and height classes mod 1
    char start = 'B';            // 'B' lower-left, 'T' upper-right, 'L' upper-left, 'R' lower-right
    std::size_t side_obj = 0;    // index of the circle carrying the closing side
    bool side_horizontal = true;
};

inline std::vector<Family> families(const TorusGeometry& G, const TorusCorner& c1, const TorusCorner& c3) {
    std::vector<Family> out;
    if (c1.xy) {
        out.push_back({c1.j, c1.k, frac(G.beta[c3.k] - G.beta[c1.k]), frac(G.alpha[c3.j] - G.alpha[c1.j]), 'B', c1.j, true});
        out.push_back({c3.j, c3.k, frac(G.beta[c1.k] - G.beta[c3.k]), frac(G.alpha[c1.j] - G.alpha[c3.j]), 'T', c1.j, true});
    } else {
        out.push_back({c3.j, c1.k, frac(G.beta[c3.k] - G.beta[c1.k]), frac(G.alpha[c1.j] - G.alpha[c3.j]), 'L', c1.k, false});
        out.push_back({c1.j, c3.k, frac(G.beta[c1.k] - G.beta[c3.k]), frac(G.alpha[c3.j] - G.alpha[c1.j]), 'R', c1.k, false});
    }
    return out;
}

inline std::vector<Rational> class_values(const Rational& d, const Rational& bound) {
    std::vector<Rational> v;
    for (Rational x = d.is_zero() ? Rational(1) : d; x < bound; x = x + Rational(1)) v.push_back(x);
    return v;
}

// sum over rectangles (w, h) of the family of weight(w, h) T^{wh}, mod 2, truncated at P
inline NovikovElement family_series(const TorusGeometry& G, const Family& f,
                                    const std::function<std::int64_t(const Family&, const Rational&, const Rational&)>& weight) {
    std::vector<Rational> e;
    const Rational hmin = f.dh.is_zero() ? Rational(1) : f.dh;
    for (const auto& w : class_values(f.dw, G.P / hmin))
        for (const auto& h : class_values(f.dh, G.P / w))
            if (weight(f, w, h) % 2 != 0) e.push_back(w * h);
    return NovikovElement::from_exponents(std::move(e), G.P);
}

// exits of e on the closing side
inline std::int64_t exit_count(const TorusGeometry& G, const Family& f, const Rational& w, const Rational& h) {
    const Rational x0 = G.beta[f.k0], y0 = G.alpha[f.j0];
    switch (f.start) {
        case 'B':
        case 'T': {
            // closing side along the bottom (start at lower-left) or the top (start at upper-right)
            return lifts_in(G.ex[f.side_obj], x0, x0 + w);
        }
        default: return lifts_in(G.ey[f.side_obj], y0, y0 + h);
    }
}

inline std::int64_t u_count(const TorusGeometry& G, const Family& f, const Rational& w, const Rational& h) {
    const Rational x0 = G.beta[f.k0], y0 = G.alpha[f.j0];
    return lifts_in(G.ux, x0, x0 + w) * lifts_in(G.uy, y0, y0 + h);
}

}  // namespace torus

struct TorusData {
    TorusGeometry geometry;
    std::map<std::size_t, TorusCorner> corners;
    std::map<std::pair<bool, std::pair<std::size_t, std::size_t>>, std::size_t> corner_index;
    std::vector<std::size_t> H, V, eH, eV, ptH, ptV;

    std::size_t corner(bool xy, std::size_t j, std::size_t k) const { return corner_index.at({xy, {j, k}}); }
    std::optional<TorusCorner> as_corner(std::size_t g) const {
        auto it = corners.find(g);
        if (it == corners.end()) return std::nullopt;
        return it->second;
    }
};

namespace detail {

inline std::string torus_object_name(const TorusGeometry& G, bool horizontal, std::size_t i) {
    const bool single = horizontal ? G.Nx == 1 : G.Ny == 1;
    if (horizontal) return (G.Ny == 1 && G.Nx > 1) ? "L" + std::to_string(i + 1) : single ? "Lx" : "Lx" + std::to_string(i + 1);
    return single ? "Ly" : "Ly" + std::to_string(i + 1);
}

inline std::string torus_suffix(const std::string& object) { return object.substr(1); }

inline std::string corner_name(const TorusGeometry& G, bool xy, std::size_t j, std::size_t k) {
    std::string idx;
    if (G.Nx > 1 && G.Ny > 1) idx = std::to_string(j + 1) + "." + std::to_string(k + 1);
    else if (G.Nx > 1) idx = std::to_string(j + 1);
    else if (G.Ny > 1) idx = std::to_string(k + 1);
    return "a" + idx + (xy ? "xy" : "yx");
}

}  // namespace detail

inline std::pair<TabulatedAInfCategory, TorusData> build_torus_data(std::size_t Nx, std::size_t Ny, const Rational& P,
                                                                    const Rational& h, std::optional<TorusGeometry> geometry = std::nullopt) {
    if (Nx < 1 || Ny < 1) throw std::invalid_argument("torus model needs Nx, Ny >= 1");
    if (P.sign() <= 0) throw std::invalid_argument("precision must be positive");
    if (h.sign() < 0) throw std::invalid_argument("h must be nonnegative");
    TorusData D;
    D.geometry = geometry ? *geometry : TorusGeometry::grid(Nx, Ny, P);
    D.geometry.P = P;
    const auto& G = D.geometry;
    TabulatedAInfCategory A;
    A.modulus = 2;
    A.n = 1;
    auto add_circle = [&](bool horizontal, std::size_t i) {
        auto name = detail::torus_object_name(G, horizontal, i);
        auto o = A.add_object(name);
        auto sfx = detail::torus_suffix(name);
        auto e = A.add_unit(o, "e" + sfx);
        auto pt = A.add_generator("pt" + sfx, o, o, 1, Rational(0));
        detail::add_morse_rule(A, "morse" + sfx, e, pt, std::nullopt);
        (horizontal ? D.H : D.V).push_back(o);
        (horizontal ? D.eH : D.eV).push_back(e);
        (horizontal ? D.ptH : D.ptV).push_back(pt);
    };
    for (std::size_t j = 0; j < Nx; ++j) add_circle(true, j);
    for (std::size_t k = 0; k < Ny; ++k) add_circle(false, k);
    for (std::size_t j = 0; j < Nx; ++j)
        for (std::size_t k = 0; k < Ny; ++k) {
            auto a = A.add_generator(detail::corner_name(G, true, j, k), D.H[j], D.V[k], 0, h);
            auto b = A.add_generator(detail::corner_name(G, false, j, k), D.V[k], D.H[j], 1, h);
            D.corners[a] = {true, j, k};
            D.corners[b] = {false, j, k};
            D.corner_index[{true, {j, k}}] = a;
            D.corner_index[{false, {j, k}}] = b;
        }
    // Corner-only tuples: immersed discs with convex corners on straight circles are rectangles.
    auto data = std::make_shared<TorusData>(D);
    A.add_rule("rectangles", [data](const TabulatedAInfCategory&, const std::vector<std::size_t>& t) -> std::optional<LambdaVec> {
        std::vector<TorusCorner> c;
        for (auto g : t) {
            auto x = data->as_corner(g);
            if (!x) return std::nullopt;
            c.push_back(*x);
        }
        const auto& G = data->geometry;
        if (t.size() == 3) {
            // closing corner c4 and output at the same point in the opposite direction
            const TorusCorner c4 = c[0].xy ? TorusCorner{false, c[0].j, c[2].k} : TorusCorner{true, c[2].j, c[0].k};
            NovikovElement s;
            for (const auto& f : torus::families(G, c[0], c[2]))
                s += torus::family_series(G, f, [](const torus::Family&, const Rational&, const Rational&) { return std::int64_t{1}; });
            return LambdaVec{{data->corner(!c4.xy, c4.j, c4.k), s}};
        }
        if (t.size() == 4) {
            NovikovElement s;
            for (const auto& f : torus::families(G, c[0], c[2]))
                s += torus::family_series(G, f, [&G](const torus::Family& f, const Rational& w, const Rational& h) {
                    return torus::exit_count(G, f, w, h);
                });
            const std::size_t unit = c[0].xy ? data->eH[c[0].j] : data->eV[c[0].k];
            return LambdaVec{{unit, s}};
        }
        return LambdaVec{};
    });
    return {std::move(A), std::move(D)};
}

inline TabulatedAInfCategory build_torus(std::size_t Nx, std::size_t Ny, const Rational& P, const Rational& h = Rational(0)) {
    return build_torus_data(Nx, Ny, P, h).first;
}

// ---------------------------------------------------------------------------
// Quantum cohomology elements and models with open-closed maps

struct QHElement {
    std::map<std::string, NovikovElement> coeffs;
    std::string summand = "0";

    void add(const std::string& g, const NovikovElement& x) {
        auto& c = coeffs[g];
        c += x;
        if (c.is_zero()) coeffs.erase(g);
    }
    QHElement& operator+=(const QHElement& o) {
        for (const auto& [g, x] : o.coeffs) add(g, x);
        return *this;
    }
    QHElement scaled(const NovikovElement& c) const {
        QHElement r;
        r.summand = summand;
        for (const auto& [g, x] : coeffs) r.add(g, x * c);
        return r;
    }
    NovikovElement coefficient(const std::string& g) const {
        auto it = coeffs.find(g);
        return it == coeffs.end() ? NovikovElement::zero() : it->second;
    }
    bool is_zero() const { return coeffs.empty(); }
    std::string str() const {
        if (coeffs.empty()) return "0";
        std::string s;
        for (const auto& [g, x] : coeffs) s += (s.empty() ? "" : " + ") + ("(" + x.str() + ")" + g);
        return s;
    }
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["summand"] = summand;
        j["coefficients"] = nlohmann::json::object();
        for (const auto& [g, x] : coeffs) j["coefficients"][g] = x.str();
        return j;
    }
    friend bool operator==(const QHElement& a, const QHElement& b) { return a.coeffs == b.coeffs && a.summand == b.summand; }
};

inline QHElement qh(const std::string& g, const NovikovElement& x) {
    QHElement r;
    r.add(g, x);
    return r;
}

struct FukayaModel {
    using OCRule = std::function<std::optional<QHElement>(const FukayaModel&, const Tensor&)>;

    std::string kind;  // single, sphere, torus
    std::size_t N = 1;
    Rational h, precision;
    TabulatedAInfCategory category;
    std::vector<std::string> qh_basis{"u", "pt"};
    std::map<Tensor, QHElement> oc_table;
    std::vector<OCRule> oc_rules;
    std::optional<TorusData> torus;
    Rational sphere_u_angle;  // in units of pi
    HochschildChain witness;
    HochschildChain witness_base;  // witness before unit corrections

    std::string describe() const {
        if (kind == "torus") return "torus " + std::to_string(torus->geometry.Nx) + "x" + std::to_string(torus->geometry.Ny);
        if (kind == "sphere") return "sphere N=" + std::to_string(N);
        return "single equator";
    }
};

inline std::optional<QHElement> oc_lookup(const FukayaModel& M, const Tensor& t) {
    if (auto it = M.oc_table.find(t); it != M.oc_table.end()) return it->second;
    for (const auto& r : M.oc_rules)
        if (auto v = r(M, t)) return v;
    return std::nullopt;
}

inline QHElement oc_evaluate(const FukayaModel& M, const HochschildChain& c) {
    QHElement out;
    for (const auto& [t, x] : normalize(M.category, c)) {
        auto v = oc_lookup(M, t);
        if (!v) throw coverage_gap("OC not tabulated on " + M.category.render(t), M.category.names(t));
        out += v->scaled(x);
    }
    return out;
}

// Level of an OC image: max over coefficients of -valuation (QH generators at level 0).
inline std::optional<Rational> qh_level(const QHElement& q) {
    std::optional<Rational> l;
    for (const auto& [g, x] : q.coeffs) {
        Rational v = Rational(0) - x.valuation().value;
        if (!l || v > *l) l = v;
    }
    return l;
}

inline FukayaModel single_equator_model() {
    FukayaModel M;
    M.kind = "single";
    M.category = build_single_equator();
    M.precision = default_precision();
    const auto e = M.category.index_of("e"), pt = M.category.index_of("pt");
    const auto half = NovikovElement::monomial(Rational(1, 2));
    M.oc_table[{pt, pt}] = qh("u", half);
    auto p = qh("pt", NovikovElement::one());
    p.add("u", half);
    M.oc_table[{pt}] = p;
    M.oc_table[{e}] = QHElement{};
    M.witness = M.witness_base = {{Tensor{pt, pt}, NovikovElement::one()}};
    return M;
}

inline FukayaModel sphere_model(std::size_t N, const Rational& h = Rational(0)) {
    FukayaModel M;
    M.kind = "sphere";
    M.N = N;
    M.h = h;
    M.precision = default_precision();
    M.category = build_sphere(N, h);
    M.sphere_u_angle = Rational(1, static_cast<std::int64_t>(2 * N));
    const auto& A = M.category;
    const auto half = NovikovElement::monomial(Rational(1, 2));
    const auto lune = NovikovElement::monomial(Rational(1, static_cast<std::int64_t>(2 * N)));
    for (std::size_t i = 1; i <= N; ++i) {
        const auto s = std::to_string(i);
        const auto e = A.index_of("e" + s), pt = A.index_of("pt" + s);
        M.oc_table[{pt, pt}] = qh("u", half);
        auto p = qh("pt", NovikovElement::one());
        p.add("u", half);
        M.oc_table[{pt}] = p;
        M.oc_table[{e}] = QHElement{};
        const std::size_t j = i % N + 1;
        const auto n = A.index_of("n[" + s + "," + std::to_string(j) + "]");
        const auto sp = A.index_of("s[" + std::to_string(j) + "," + s + "]");
        // the lune between L_1 and L_2 holds u
        M.oc_table[{n, sp}] = i == 1 ? qh("u", lune) : QHElement{};
        add_term(M.witness, {n, sp}, NovikovElement::one());
    }
    M.witness_base = M.witness;
    return M;
}

// Sum of the fundamental 4-cycles of the grid cells, one per cyclic word.
inline HochschildChain torus_cell_cycles(const TorusData& D) {
    const auto& G = D.geometry;
    HochschildChain c;
    std::set<Tensor> seen;
    for (std::size_t j = 0; j < G.Nx; ++j)
        for (std::size_t k = 0; k < G.Ny; ++k) {
            const std::size_t j1 = (j + 1) % G.Nx, k1 = (k + 1) % G.Ny;
            const Tensor t{D.corner(true, j, k), D.corner(false, j1, k), D.corner(true, j1, k1), D.corner(false, j, k1)};
            bool rotated = false;
            for (std::size_t r = 1; r < t.size(); ++r) {
                Tensor s(t.begin() + static_cast<std::ptrdiff_t>(r), t.end());
                s.insert(s.end(), t.begin(), t.begin() + static_cast<std::ptrdiff_t>(r));
                rotated = rotated || seen.count(s) > 0;
            }
            if (rotated) continue;
            seen.insert(t);
            add_term(c, t, NovikovElement::one());
        }
    return c;
}

// Cancels residual terms c (a (x) a' + a' (x) a) at a point by adding c e_H (x) a (x) a'.
inline HochschildChain unit_corrections(const TabulatedAInfCategory& A, const TorusData& D, const HochschildChain& residual) {
    HochschildChain corr;
    for (const auto& [t, c] : residual) {
        if (t.size() != 2) continue;
        auto x = D.as_corner(t[0]), y = D.as_corner(t[1]);
        if (!x || !y || !x->xy || y->xy || x->j != y->j || x->k != y->k) continue;
        add_term(corr, {D.eH[x->j], t[0], t[1]}, c);
    }
    (void)A;
    return corr;
}

inline FukayaModel torus_model(std::size_t Nx, std::size_t Ny, const Rational& P, const Rational& h = Rational(0),
                               std::optional<TorusGeometry> geometry = std::nullopt) {
    FukayaModel M;
    M.kind = "torus";
    M.N = Nx;
    M.h = h;
    M.precision = P;
    auto [A, D] = build_torus_data(Nx, Ny, P, h, geometry);
    M.category = std::move(A);
    M.torus = std::move(D);
    M.qh_basis = {"u", "x", "y", "pt"};
    // closed rectangle words: each geometric rectangle counted once with its interior u lifts
    M.oc_rules.push_back([](const FukayaModel& M, const Tensor& t) -> std::optional<QHElement> {
        const auto& D = *M.torus;
        std::vector<TorusCorner> c;
        for (auto g : t) {
            auto x = D.as_corner(g);
            if (!x) return std::nullopt;
            c.push_back(*x);
        }
        if (t.size() != 4) return std::nullopt;
        const auto& G = D.geometry;
        auto fams = torus::families(G, c[0], c[2]);
        std::vector<Rational> e;
        std::set<std::tuple<std::size_t, std::size_t, Rational, Rational>> seen;
        for (const auto& f : fams) {
            const Rational hmin = f.dh.is_zero() ? Rational(1) : f.dh;
            for (const auto& w : torus::class_values(f.dw, G.P / hmin))
                for (const auto& hh : torus::class_values(f.dh, G.P / w)) {
                    if (!seen.insert({f.j0, f.k0, w, hh}).second) continue;
                    if (torus::u_count(G, f, w, hh) % 2 != 0) e.push_back(w * hh);
                }
        }
        return qh("u", NovikovElement::from_exponents(std::move(e), G.P));
    });
    // constant triangles e (x) a (x) a' contribute nothing
    M.oc_rules.push_back([](const FukayaModel& M, const Tensor& t) -> std::optional<QHElement> {
        const auto& D = *M.torus;
        if (t.size() != 3 || !M.category.is_unit(t[0])) return std::nullopt;
        auto x = D.as_corner(t[1]), y = D.as_corner(t[2]);
        if (!x || !y || x->xy == y->xy || x->j != y->j || x->k != y->k) return std::nullopt;
        return QHElement{};
    });
    const auto& Dm = *M.torus;
    M.witness_base = torus_cell_cycles(Dm);
    M.witness = M.witness_base;
    add_terms(M.witness, unit_corrections(M.category, Dm, dcc(M.category, M.witness_base)));
    return M;
}

// ---------------------------------------------------------------------------
// Independent geometric enumeration

struct OracleQuery {
    std::string kind;  // "mu" or "oc"
    Tensor tensor;
    std::optional<std::size_t> output;  // output generator for mu
};

namespace detail {

// Brute-force rectangles [x0,x1] x [y0,y1] in the plane, lower-left corner in [0,1)^2.
inline NovikovElement oracle_torus(const FukayaModel& M, const OracleQuery& q) {
    const auto& D = *M.torus;
    const auto& G = D.geometry;
    std::vector<TorusCorner> word;
    for (auto g : q.tensor) {
        auto c = D.as_corner(g);
        if (!c) throw std::invalid_argument("oracle covers corner-only tuples");
        word.push_back(*c);
    }
    if (word.size() < 3 || word.size() > 4) return NovikovElement::zero();
    auto count_lifts = [](const Rational& pos, const Rational& lo, const Rational& hi) {
        std::int64_t n = 0;
        for (std::int64_t p = lo.floor() - 1; p <= hi.ceil() + 1; ++p) {
            Rational v = pos + Rational(p);
            if (lo < v && v < hi) ++n;
        }
        return n;
    };
    std::map<Rational, std::int64_t> mult;
    const Rational step_x(1, static_cast<std::int64_t>(G.Ny)), step_y(1, static_cast<std::int64_t>(G.Nx));
    for (std::size_t j0 = 0; j0 < G.Nx; ++j0)
        for (std::size_t k0 = 0; k0 < G.Ny; ++k0) {
            const Rational x0 = G.beta[k0], y0 = G.alpha[j0];
            for (std::int64_t px = 1;; ++px) {
                const Rational x1 = x0 + step_x * Rational(px);
                const Rational w = x1 - x0;
                if (!(w * step_y < G.P)) break;
                for (std::int64_t py = 1;; ++py) {
                    const Rational y1 = y0 + step_y * Rational(py);
                    const Rational hh = y1 - y0;
                    const Rational area = w * hh;
                    if (!(area < G.P)) break;
                    // corner indices by position
                    auto kx = [&](const Rational& x) {
                        for (std::size_t k = 0; k < G.Ny; ++k)
                            if (torus::frac(x - G.beta[k]).is_zero()) return k;
                        throw std::logic_error("abscissa off the grid");
                    };
                    auto jy = [&](const Rational& y) {
                        for (std::size_t j = 0; j < G.Nx; ++j)
                            if (torus::frac(y - G.alpha[j]).is_zero()) return j;
                        throw std::logic_error("height off the grid");
                    };
                    const std::size_t k1 = kx(x1), j1 = jy(y1);
                    // clockwise from lower-left
                    const TorusCorner cyc[4] = {{true, j0, k0}, {false, j1, k0}, {true, j1, k1}, {false, j0, k1}};
                    // sides arriving at each corner: into BL along the bottom, into TL along the left, ...
                    std::int64_t total = 0;
                    bool any = false;
                    for (int s = 0; s < 4; ++s) {
                        bool match = true;
                        for (std::size_t i = 0; i < word.size(); ++i) match = match && cyc[(s + i) % 4] == word[i];
                        if (!match) continue;
                        if (q.kind == "oc") {
                            if (word.size() == 4) any = true;
                            continue;
                        }
                        if (word.size() == 3) {
                            ++total;
                            continue;
                        }
                        switch (s) {
                            case 0: total += count_lifts(G.ex[j0], x0, x1); break;
                            case 1: total += count_lifts(G.ey[k0], y0, y1); break;
                            case 2: total += count_lifts(G.ex[j1], x0, x1); break;
                            default: total += count_lifts(G.ey[k1], y0, y1); break;
                        }
                    }
                    if (q.kind == "oc" && any) total = count_lifts(G.ux, x0, x1) * count_lifts(G.uy, y0, y1);
                    mult[area] += total;
                }
            }
        }
    std::vector<Rational> e;
    for (const auto& [a, m] : mult)
        if (m % 2 != 0) e.push_back(a);
    return NovikovElement::from_exponents(std::move(e), G.P);
}

// Lune between consecutive great circles: dihedral angle pi/N, area fraction angle / (2 pi).
inline NovikovElement oracle_sphere(const FukayaModel& M, const OracleQuery& q) {
    const auto& A = M.category;
    if (q.tensor.size() != 2) throw std::invalid_argument("sphere oracle covers two-corner lunes");
    const auto& g0 = A.gens[q.tensor[0]];
    const std::size_t i = g0.source, j = g0.target;
    const auto NN = static_cast<std::int64_t>(M.N);
    if ((i + 1) % M.N != j) return NovikovElement::zero();
    const Rational lo(static_cast<std::int64_t>(i), NN);
    const Rational hi = i + 1 == M.N ? Rational(1) : Rational(static_cast<std::int64_t>(i + 1), NN);
    const Rational area = (hi - lo) / Rational(2);
    if (q.kind == "oc") {
        if (!(lo < M.sphere_u_angle && M.sphere_u_angle < hi)) return NovikovElement::zero();
        return NovikovElement::monomial(area);
    }
    return NovikovElement::monomial(area);
}

}  // namespace detail

inline NovikovElement oracle_enumerate(const FukayaModel& M, const OracleQuery& q) {
    if (M.kind == "torus") return detail::oracle_torus(M, q);
    if (M.kind == "sphere") return detail::oracle_sphere(M, q);
    // single equator: the two hemispheres have area 1/2 and one of them holds u
    return NovikovElement::monomial(Rational(1, 2));
}

// ---------------------------------------------------------------------------
// Certificates

struct ApproximabilityCertificate {
    std::string model;
    HochschildChain witness;
    Rational witness_level;
    NovikovElement oc_unit;
    Rational alpha;     // R(u, OC) bound: witness level plus valuation of the u coefficient
    Rational accuracy;  // alpha / 2 + h
    Rational h;
    std::optional<Rational> precision;

    nlohmann::json to_json(const TabulatedAInfCategory& A) const {
        nlohmann::json j;
        j["model"] = model;
        j["witness"] = chain_to_json(A, witness);
        j["level"] = witness_level.str();
        j["oc_unit_coefficient"] = oc_unit.str();
        j["alpha"] = alpha.str();
        j["h"] = h.str();
        j["accuracy"] = accuracy.str();
        j["accuracy_formula"] = "alpha/2 + h";
        j["precision"] = precision ? nlohmann::json(precision->str()) : nlohmann::json(nullptr);
        return j;
    }
};

struct certificate_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline ApproximabilityCertificate approximability_certificate(const FukayaModel& M) {
    const auto& A = M.category;
    if (!is_cycle(A, M.witness)) throw certificate_error("witness is not a Hochschild cycle");
    auto oc = oc_evaluate(M, M.witness);
    auto u = oc.coefficient("u");
    if (u.is_zero()) throw certificate_error("OC image of the witness misses u");
    if (oc.coeffs.size() != 1) throw certificate_error("OC image of the witness is not a multiple of u: " + oc.str());
    ApproximabilityCertificate c;
    c.model = M.describe();
    c.witness = M.witness;
    c.witness_level = *chain_level(A, M.witness);
    c.oc_unit = u;
    c.alpha = c.witness_level + u.valuation().value;
    c.h = M.h;
    c.accuracy = c.alpha / Rational(2) + M.h;
    c.precision = u.precision();
    return c;
}

}  // namespace tpc
