#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tpc/ainf.hpp"
#include "tpc/bar.hpp"
#include "tpc/novikov_complex.hpp"

namespace tpc {

struct invalid_twisted_complex : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline void add_lambda(LambdaVec& acc, std::size_t g, const NovikovElement& c) {
    if (c.is_zero()) return;
    auto it = acc.find(g);
    if (it == acc.end()) acc.emplace(g, c);
    else {
        it->second = it->second + c;
        if (it->second.is_zero()) acc.erase(it);
    }
}

// Multilinear extension of mu to combinations of generators.
inline LambdaVec mu_lin(const TabulatedAInfCategory& A, const std::vector<const LambdaVec*>& args) {
    LambdaVec out;
    std::vector<std::size_t> t(args.size());
    std::function<void(std::size_t, const NovikovElement&)> rec = [&](std::size_t k, const NovikovElement& c) {
        if (k == args.size()) {
            for (const auto& [g, v] : A.mu_or_throw(t)) add_lambda(out, g, c * v);
            return;
        }
        for (const auto& [g, v] : *args[k]) {
            t[k] = g;
            rec(k + 1, c * v);
        }
    };
    rec(0, NovikovElement::one());
    return out;
}

struct Summand {
    std::size_t object = 0;
    Rational shift;  // Sigma^shift
    int degree = 0;  // translation T^degree
    std::string label;
};

// (i, j) -> component from summand i of the source to summand j of the target
using TwMatrix = std::map<std::pair<std::size_t, std::size_t>, LambdaVec>;

inline void add_entry(TwMatrix& m, std::size_t i, std::size_t j, const LambdaVec& v) {
    auto& slot = m[{i, j}];
    for (const auto& [g, c] : v) add_lambda(slot, g, c);
    if (slot.empty()) m.erase({i, j});
}

// Summands in order, q strictly upper triangular with q_ij in A(S_i, S_j).
struct TwistedComplex {
    std::vector<Summand> summands;
    TwMatrix q;

    std::size_t size() const { return summands.size(); }
    static TwistedComplex single(const TabulatedAInfCategory& A, std::size_t object) {
        return {{{object, Rational(0), 0, A.objects[object].name}}, {}};
    }
};

// mu^Tw_d(f_1, ..., f_d) for f_k: X_{k-1} -> X_k, with q's of every X_k inserted in all positions.
inline TwMatrix mu_tw(const TabulatedAInfCategory& A, const std::vector<const TwistedComplex*>& cx,
                      const std::vector<const TwMatrix*>& fs) {
    if (cx.size() != fs.size() + 1) throw std::invalid_argument("mu_tw needs one more complex than morphisms");
    const std::size_t d = fs.size();
    auto by_source = [](const TwMatrix& m) {
        std::map<std::size_t, std::vector<std::pair<std::size_t, const LambdaVec*>>> out;
        for (const auto& [ij, v] : m) out[ij.first].push_back({ij.second, &v});
        return out;
    };
    std::vector<decltype(by_source(TwMatrix{}))> qs, fm;
    for (auto* c : cx) qs.push_back(by_source(c->q));
    for (auto* f : fs) fm.push_back(by_source(*f));
    TwMatrix out;
    std::vector<const LambdaVec*> chosen;
    std::size_t start = 0;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t s) {
        if (k == d && !chosen.empty()) add_entry(out, start, s, mu_lin(A, chosen));
        if (auto it = qs[k].find(s); it != qs[k].end())
            for (const auto& [t, v] : it->second) {
                chosen.push_back(v);
                rec(k, t);
                chosen.pop_back();
            }
        if (k < d)
            if (auto it = fm[k].find(s); it != fm[k].end())
                for (const auto& [t, v] : it->second) {
                    chosen.push_back(v);
                    rec(k + 1, t);
                    chosen.pop_back();
                }
    };
    for (start = 0; start < cx[0]->size(); ++start) rec(0, start);
    return out;
}

inline TwMatrix mu1_tw(const TabulatedAInfCategory& A, const TwistedComplex& X, const TwistedComplex& Y, const TwMatrix& f) {
    return mu_tw(A, {&X, &Y}, {&f});
}
inline TwMatrix mu2_tw(const TabulatedAInfCategory& A, const TwistedComplex& X, const TwistedComplex& Y,
                       const TwistedComplex& Z, const TwMatrix& f, const TwMatrix& g) {
    return mu_tw(A, {&X, &Y, &Z}, {&f, &g});
}

inline TwMatrix maurer_cartan_residual(const TabulatedAInfCategory& A, const TwistedComplex& X) {
    return mu_tw(A, {&X}, {});
}
inline bool maurer_cartan_check(const TabulatedAInfCategory& A, const TwistedComplex& X) {
    return maurer_cartan_residual(A, X).empty();
}

// Level l(a) + r_j - r_i - val(c) of a morphism, nullopt for zero.
inline std::optional<Rational> morphism_level(const TabulatedAInfCategory& A, const TwistedComplex& X,
                                              const TwistedComplex& Y, const TwMatrix& f) {
    std::optional<Rational> best;
    for (const auto& [ij, v] : f)
        for (const auto& [g, c] : v) {
            Rational l = A.gens[g].level + Y.summands[ij.second].shift - X.summands[ij.first].shift - c.valuation().value;
            if (!best || l > *best) best = l;
        }
    return best;
}

// Degree of a homogeneous morphism; throws if inhomogeneous.
inline std::optional<int> morphism_degree(const TabulatedAInfCategory& A, const TwistedComplex& X, const TwistedComplex& Y,
                                          const TwMatrix& f) {
    std::optional<int> deg;
    for (const auto& [ij, v] : f)
        for (const auto& [g, c] : v) {
            int d = A.norm(A.gens[g].degree + Y.summands[ij.second].degree - X.summands[ij.first].degree);
            if (deg && *deg != d) throw invalid_twisted_complex("inhomogeneous morphism");
            deg = d;
        }
    return deg;
}

inline void check_endpoints(const TabulatedAInfCategory& A, const TwistedComplex& X, const TwistedComplex& Y,
                            const TwMatrix& f) {
    for (const auto& [ij, v] : f) {
        if (ij.first >= X.size() || ij.second >= Y.size()) throw invalid_twisted_complex("matrix index out of range");
        for (const auto& [g, c] : v)
            if (A.gens[g].source != X.summands[ij.first].object || A.gens[g].target != Y.summands[ij.second].object)
                throw invalid_twisted_complex("entry " + A.gens[g].name + " has the wrong endpoints");
    }
}

// Triangularity, endpoints, degree 1, level <= 0 and the Maurer-Cartan identity.
inline void validate_twisted(const TabulatedAInfCategory& A, const TwistedComplex& X) {
    check_endpoints(A, X, X, X.q);
    for (const auto& [ij, v] : X.q)
        if (ij.first >= ij.second) throw invalid_twisted_complex("q is not strictly upper triangular");
    if (auto d = morphism_degree(A, X, X, X.q); d && *d != A.norm(1)) throw invalid_twisted_complex("q does not have degree 1");
    if (auto l = morphism_level(A, X, X, X.q); l && l->sign() > 0) throw invalid_twisted_complex("q has positive level");
    if (!maurer_cartan_check(A, X)) throw invalid_twisted_complex("Maurer-Cartan identity fails");
}

// lambda-filtered mapping cone of a degree 0 cycle f: Sigma^lambda X[1] first, then X'.
inline TwistedComplex twisted_cone(const TabulatedAInfCategory& A, const TwistedComplex& X, const TwistedComplex& Xp,
                                   const TwMatrix& f, const Rational& lambda) {
    check_endpoints(A, X, Xp, f);
    if (auto l = morphism_level(A, X, Xp, f); l && *l > lambda) throw invalid_twisted_complex("lambda below the level of f");
    if (auto d = morphism_degree(A, X, Xp, f); d && *d != 0) throw invalid_twisted_complex("f does not have degree 0");
    if (!mu1_tw(A, X, Xp, f).empty()) throw invalid_twisted_complex("f is not a cycle");
    TwistedComplex C;
    const std::size_t n = X.size();
    for (const auto& s : X.summands) C.summands.push_back({s.object, s.shift + lambda, s.degree - 1, s.label});
    for (const auto& s : Xp.summands) C.summands.push_back(s);
    for (const auto& [ij, v] : X.q) C.q[ij] = v;
    for (const auto& [ij, v] : Xp.q) C.q[{ij.first + n, ij.second + n}] = v;
    for (const auto& [ij, v] : f) C.q[{ij.first, ij.second + n}] = v;
    return C;
}

// Generators (j, a) of hom_Tw(Y, X) for a single object Y.
inline std::vector<std::pair<std::size_t, std::size_t>> single_hom_basis(const TabulatedAInfCategory& A, std::size_t Y,
                                                                        const TwistedComplex& X) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t j = 0; j < X.size(); ++j)
        for (auto a : A.hom(Y, X.summands[j].object)) out.push_back({j, a});
    return out;
}

struct Twist {
    TwistedComplex complex;  // T_Y X
    std::vector<std::pair<std::size_t, std::size_t>> basis;  // summand v <-> (j, a)
    TwistedComplex source;   // Y (x) hom_Tw(Y, X)
    TwMatrix xi;             // evaluation Y (x) hom_Tw(Y, X) -> X
    TwMatrix inclusion;      // X -> T_Y X
};

// T_Y X = Cone^0(xi: Y (x) hom_Tw(Y, X) -> X).
inline Twist twist(const TabulatedAInfCategory& A, std::size_t Y, const TwistedComplex& X) {
    if (!A.units[Y]) throw invalid_category("object without a unit");
    Twist R;
    R.basis = single_hom_basis(A, Y, X);
    const std::size_t m = R.basis.size();
    auto Ycx = TwistedComplex::single(A, Y);
    // differential of hom_Tw(Y, X) on the basis
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> pos;
    for (std::size_t v = 0; v < m; ++v) pos[R.basis[v]] = v;
    std::vector<std::vector<std::pair<std::size_t, NovikovElement>>> dv(m);
    std::vector<std::vector<std::size_t>> succ(m);
    std::vector<std::size_t> indeg(m, 0);
    for (std::size_t v = 0; v < m; ++v) {
        TwMatrix a{{{0, R.basis[v].first}, LambdaVec{{R.basis[v].second, NovikovElement::one()}}}};
        for (const auto& [ij, vec] : mu1_tw(A, Ycx, X, a))
            for (const auto& [g, c] : vec) {
                auto w = pos.at({ij.second, g});
                dv[v].push_back({w, c});
                succ[v].push_back(w);
                ++indeg[w];
            }
    }
    // order summands so that q_vw only points forward
    std::vector<std::size_t> order, ready;
    for (std::size_t v = 0; v < m; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<>());
        auto v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (auto w : succ[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (order.size() != m) throw invalid_twisted_complex("hom differential is not triangular on generators");
    std::vector<std::size_t> rank(m);
    for (std::size_t k = 0; k < m; ++k) rank[order[k]] = k;
    std::vector<std::pair<std::size_t, std::size_t>> basis(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto [j, a] = R.basis[order[k]];
        basis[k] = {j, a};
        R.source.summands.push_back({Y, A.gens[a].level + X.summands[j].shift, A.norm(A.gens[a].degree + X.summands[j].degree),
                                     A.gens[a].name + "|" + X.summands[j].label});
        add_entry(R.xi, k, j, LambdaVec{{a, NovikovElement::one()}});
    }
    for (std::size_t v = 0; v < m; ++v)
        for (const auto& [w, c] : dv[v]) add_entry(R.source.q, rank[v], rank[w], LambdaVec{{*A.units[Y], c}});
    R.basis = basis;
    R.complex = twisted_cone(A, R.source, X, R.xi, Rational(0));
    for (std::size_t i = 0; i < X.size(); ++i)
        add_entry(R.inclusion, i, m + i, LambdaVec{{*A.units[X.summands[i].object], NovikovElement::one()}});
    return R;
}

// hom_Tw(X, X') with mu_1^Tw as a Floer complex; basis (i, j, a).
struct HomTw {
    FloerComplex complex;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> basis;
};

inline HomTw hom_tw_complex(const TabulatedAInfCategory& A, const TwistedComplex& X, const TwistedComplex& Xp) {
    HomTw H;
    H.complex = FloerComplex(A.modulus);
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> pos;
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = 0; j < Xp.size(); ++j)
            for (auto a : A.hom(X.summands[i].object, Xp.summands[j].object)) {
                pos[{i, j, a}] = H.basis.size();
                H.basis.push_back({i, j, a});
                H.complex.add_generator(A.gens[a].name + "[" + std::to_string(i) + "," + std::to_string(j) + "]",
                                        A.gens[a].degree + Xp.summands[j].degree - X.summands[i].degree,
                                        A.gens[a].level + Xp.summands[j].shift - X.summands[i].shift);
            }
    for (std::size_t k = 0; k < H.basis.size(); ++k) {
        const auto [i, j, a] = H.basis[k];
        TwMatrix f{{{i, j}, LambdaVec{{a, NovikovElement::one()}}}};
        for (const auto& [ij, v] : mu1_tw(A, X, Xp, f))
            for (const auto& [g, c] : v) H.complex.add_entry(k, pos.at({ij.first, ij.second, g}), c);
    }
    return H;
}

// Cone of the contraction A(Z, Y) (x) hom_Tw(Y, X) -> hom_Tw(Z, X), b (x) a -> mu^Tw_2(b, a).
inline FloerComplex contraction_cone(const TabulatedAInfCategory& A, std::size_t Z, std::size_t Y, const TwistedComplex& X) {
    auto Zc = TwistedComplex::single(A, Z), Yc = TwistedComplex::single(A, Y);
    auto ZY = hom_tw_complex(A, Zc, Yc), YX = hom_tw_complex(A, Yc, X), ZX = hom_tw_complex(A, Zc, X);
    FloerComplex C(A.modulus);
    const std::size_t nzy = ZY.complex.size(), nyx = YX.complex.size();
    for (std::size_t b = 0; b < nzy; ++b)
        for (std::size_t a = 0; a < nyx; ++a)
            C.add_generator(ZY.complex.gens[b].name + "(x)" + YX.complex.gens[a].name,
                            ZY.complex.gens[b].degree + YX.complex.gens[a].degree + 1,
                            ZY.complex.gens[b].level + YX.complex.gens[a].level);
    const std::size_t off = nzy * nyx;
    for (const auto& g : ZX.complex.gens) C.add_generator(g.name, g.degree, g.level);
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> zx_pos;
    for (std::size_t k = 0; k < ZX.basis.size(); ++k) zx_pos[ZX.basis[k]] = k;
    for (std::size_t b = 0; b < nzy; ++b)
        for (std::size_t a = 0; a < nyx; ++a) {
            const std::size_t k = b * nyx + a;
            for (const auto& [b2, c] : ZY.complex.d[b]) C.add_entry(k, b2 * nyx + a, c);
            for (const auto& [a2, c] : YX.complex.d[a]) C.add_entry(k, b * nyx + a2, c);
            const auto [i0, j0, bg] = ZY.basis[b];
            const auto [i1, j1, ag] = YX.basis[a];
            TwMatrix fb{{{0, 0}, LambdaVec{{bg, NovikovElement::one()}}}};
            TwMatrix fa{{{0, j1}, LambdaVec{{ag, NovikovElement::one()}}}};
            for (const auto& [ij, v] : mu2_tw(A, Zc, Yc, X, fb, fa))
                for (const auto& [g, c] : v) C.add_entry(k, off + zx_pos.at({0, ij.second, g}), c);
        }
    for (std::size_t k = 0; k < ZX.complex.size(); ++k)
        for (const auto& [k2, c] : ZX.complex.d[k]) C.add_entry(off + k, off + k2, c);
    return C;
}

// ---------------------------------------------------------------------------
// Bar cycles and twisted complexes over B

struct BarResolution {
    TwistedComplex complex;   // summands (a_1, ..., a_d, gamma_2) at object L_0
    std::vector<Tensor> suffixes;
    TwMatrix f;               // K -> complex
    TwMatrix g;               // complex -> K
    TwistedComplex K;
};

// Twisted complex over B resolving F^N B(-, K), with f and g read off a bar element h.
inline BarResolution resolution_from_bar(const TabulatedAInfCategory& A, const std::vector<std::size_t>& B, std::size_t K,
                                         std::size_t N, const TensorVec& h) {
    BarResolution R;
    R.K = TwistedComplex::single(A, K);
    {
        std::set<Tensor> suffixes;
        for (const auto& t : bar_tensors(A, B, K, N)) suffixes.insert(Tensor(t.begin() + 1, t.end()));
        R.suffixes.assign(suffixes.begin(), suffixes.end());
    }
    auto& S = R.suffixes;
    std::stable_sort(S.begin(), S.end(), [](const Tensor& a, const Tensor& b) { return a.size() > b.size(); });
    std::map<Tensor, std::size_t> pos;
    for (std::size_t i = 0; i < S.size(); ++i) pos[S[i]] = i;
    // entries: first factor to the tail, interior contractions as multiples of the unit
    std::vector<std::vector<std::pair<std::size_t, NovikovElement>>> unit_moves(S.size());
    std::vector<std::size_t> indeg(S.size(), 0);
    for (std::size_t i = 0; i < S.size(); ++i) {
        const auto& s = S[i];
        if (s.size() >= 2) add_entry(R.complex.q, i, pos.at(Tensor(s.begin() + 1, s.end())), LambdaVec{{s.front(), NovikovElement::one()}});
        TensorVec out;
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = a + 1; b <= s.size(); ++b) contract_block(A, s, a, b, NovikovElement::one(), out);
        for (const auto& [t, c] : out) {
            unit_moves[i].push_back({pos.at(t), c});
            ++indeg[pos.at(t)];
        }
    }
    // summand order: tails come after their sources; unit moves are respected by a stable topological sort
    std::vector<std::vector<std::size_t>> succ(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        for (const auto& [j, c] : unit_moves[i]) succ[i].push_back(j);
        if (S[i].size() >= 2) {
            succ[i].push_back(pos.at(Tensor(S[i].begin() + 1, S[i].end())));
            ++indeg[succ[i].back()];
        }
    }
    std::vector<std::size_t> order, ready;
    for (std::size_t i = 0; i < S.size(); ++i)
        if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<>());
        auto v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (auto w : succ[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (order.size() != S.size()) throw invalid_twisted_complex("bar resolution is not triangular");
    std::vector<std::size_t> rank(S.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;
    TwMatrix q;
    for (const auto& [ij, v] : R.complex.q) q[{rank[ij.first], rank[ij.second]}] = v;
    for (std::size_t i = 0; i < S.size(); ++i)
        for (const auto& [j, c] : unit_moves[i]) {
            const std::size_t L0 = A.gens[S[i].front()].source;
            add_entry(q, rank[i], rank[j], LambdaVec{{*A.units[L0], c}});
        }
    std::vector<Tensor> sorted(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) sorted[rank[i]] = S[i];
    S = sorted;
    R.complex.q = q;
    for (const auto& s : S) {
        int deg = -static_cast<int>(s.size() - 1);
        std::string label;
        for (auto x : s) {
            deg += A.gens[x].degree;
            label += (label.empty() ? "" : "*") + A.gens[x].name;
        }
        R.complex.summands.push_back({A.gens[s.front()].source, tensor_level(A, s), A.norm(deg), label});
    }
    std::map<Tensor, std::size_t> final_pos;
    for (std::size_t i = 0; i < S.size(); ++i) final_pos[S[i]] = i;
    for (const auto& [t, c] : h) {
        auto it = final_pos.find(Tensor(t.begin() + 1, t.end()));
        if (it == final_pos.end()) throw std::invalid_argument("h has a tensor outside the truncation");
        add_entry(R.f, 0, it->second, LambdaVec{{t.front(), c}});
    }
    for (std::size_t i = 0; i < S.size(); ++i)
        if (S[i].size() == 1) add_entry(R.g, i, 0, LambdaVec{{S[i].front(), NovikovElement::one()}});
    return R;
}

// h = sum over paths of f_i (x) q (x) ... (x) q (x) g_j, at most N interior factors.
inline TensorVec extract_bar_element(const TabulatedAInfCategory& A, const TwistedComplex& C, const TwMatrix& f,
                                     const TwMatrix& g, std::size_t N) {
    TensorVec out;
    std::map<std::size_t, std::vector<std::pair<std::size_t, const LambdaVec*>>> qs;
    for (const auto& [ij, v] : C.q) qs[ij.first].push_back({ij.second, &v});
    std::map<std::size_t, const LambdaVec*> gs;
    for (const auto& [ij, v] : g) gs[ij.first] = &v;
    std::vector<const LambdaVec*> chosen;
    std::function<void(std::size_t)> rec = [&](std::size_t s) {
        if (auto it = gs.find(s); it != gs.end()) {
            chosen.push_back(it->second);
            Tensor t(chosen.size());
            std::function<void(std::size_t, const NovikovElement&)> expand = [&](std::size_t k, const NovikovElement& c) {
                if (k == chosen.size()) {
                    add_term(out, t, c);
                    return;
                }
                for (const auto& [x, v] : *chosen[k]) {
                    t[k] = x;
                    expand(k + 1, c * v);
                }
            };
            expand(0, NovikovElement::one());
            chosen.pop_back();
        }
        if (chosen.size() >= N + 1) return;
        if (auto it = qs.find(s); it != qs.end())
            for (const auto& [t, v] : it->second) {
                chosen.push_back(v);
                rec(t);
                chosen.pop_back();
            }
    };
    for (const auto& [ij, v] : f) {
        chosen.push_back(&v);
        rec(ij.second);
        chosen.pop_back();
    }
    return out;
}

}  // namespace tpc
