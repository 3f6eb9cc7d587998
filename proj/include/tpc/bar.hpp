#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tpc/ainf.hpp"
#include "tpc/novikov_complex.hpp"

namespace tpc {

using Tensor = std::vector<std::size_t>;
// Z/2 Novikov combination of pure tensors of generators.
using TensorVec = std::map<Tensor, NovikovElement>;

inline void add_term(TensorVec& v, const Tensor& t, const NovikovElement& c) {
    if (c.is_zero()) return;
    auto it = v.find(t);
    if (it == v.end()) v.emplace(t, c);
    else {
        it->second = it->second + c;
        if (it->second.is_zero()) v.erase(it);
    }
}
inline void add_terms(TensorVec& v, const TensorVec& w, const NovikovElement& c = NovikovElement::one()) {
    for (const auto& [t, x] : w) add_term(v, t, x * c);
}

inline Rational tensor_level(const TabulatedAInfCategory& A, const Tensor& t) {
    Rational l(0);
    for (auto g : t) l += A.gens[g].level;
    return l;
}
inline std::optional<Rational> tensor_vec_level(const TabulatedAInfCategory& A, const TensorVec& v) {
    std::optional<Rational> best;
    for (const auto& [t, c] : v) {
        Rational l = tensor_level(A, t) - c.valuation().value;
        if (!best || l > *best) best = l;
    }
    return best;
}
inline std::string render(const TabulatedAInfCategory& A, const TensorVec& v) {
    if (v.empty()) return "0";
    std::string s;
    for (const auto& [t, c] : v) {
        std::string r;
        for (auto g : t) r += (r.empty() ? "" : "*") + A.gens[g].name;
        s += (s.empty() ? "" : " + ") + ("(" + c.str() + ")" + r);
    }
    return s;
}

// Replaces t[i..j) by mu of that block, distributing over the output.
inline void contract_block(const TabulatedAInfCategory& A, const Tensor& t, std::size_t i, std::size_t j,
                           const NovikovElement& c, TensorVec& out) {
    std::vector<std::size_t> block(t.begin() + i, t.begin() + j);
    for (const auto& [g, x] : A.mu_or_throw(block)) {
        Tensor r(t.begin(), t.begin() + i);
        r.push_back(g);
        r.insert(r.end(), t.begin() + j, t.end());
        add_term(out, r, c * x);
    }
}

// ---------------------------------------------------------------------------
// Bar bimodule F^N B(K,K) and the map mu^B(K) to A(K,K)

struct BarComplex {
    std::vector<Tensor> tensors;  // gamma_1, a_1, ..., a_d, gamma_2
    FloerComplex complex;         // bar differential
    std::vector<std::size_t> target_gens;  // A(K,K) generators
    FloerComplex target;                   // A(K,K) with mu_1
    std::vector<LambdaVec> mu_map;         // per tensor, over target positions

    std::size_t index_of(const Tensor& t) const {
        auto it = std::lower_bound(tensors.begin(), tensors.end(), t);
        if (it == tensors.end() || *it != t) throw std::out_of_range("tensor outside the truncation");
        return static_cast<std::size_t>(it - tensors.begin());
    }
    LambdaVec to_lambda(const TensorVec& v) const {
        LambdaVec out;
        for (const auto& [t, c] : v) out.emplace(index_of(t), c);
        return out;
    }
    TensorVec from_lambda(const LambdaVec& v) const {
        TensorVec out;
        for (const auto& [i, c] : v) out.emplace(tensors[i], c);
        return out;
    }
};

// Pure tensors gamma_1 (x) a_1 (x) ... (x) a_d (x) gamma_2 with interior objects in B and d <= N.
inline std::vector<Tensor> bar_tensors(const TabulatedAInfCategory& A, const std::vector<std::size_t>& B, std::size_t K,
                                       std::size_t N) {
    std::set<std::size_t> inB(B.begin(), B.end());
    std::vector<Tensor> out;
    Tensor cur;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t obj, std::size_t d) {
        // close with gamma_2
        for (auto g : A.hom(obj, K)) {
            cur.push_back(g);
            out.push_back(cur);
            cur.pop_back();
        }
        if (d == N) return;
        for (auto y : inB)
            for (auto g : A.hom(obj, y)) {
                cur.push_back(g);
                rec(y, d + 1);
                cur.pop_back();
            }
    };
    for (auto L0 : inB)
        for (auto g : A.hom(K, L0)) {
            cur.push_back(g);
            rec(L0, 0);
            cur.pop_back();
        }
    std::sort(out.begin(), out.end());
    return out;
}

// Bar differential: every proper contiguous block contracted by mu.
inline TensorVec bar_differential(const TabulatedAInfCategory& A, const TensorVec& x) {
    TensorVec out;
    for (const auto& [t, c] : x)
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = i + 1; j <= t.size(); ++j)
                if (!(i == 0 && j == t.size())) contract_block(A, t, i, j, c, out);
    return out;
}

inline LambdaVec bar_mu(const TabulatedAInfCategory& A, const TensorVec& x) {
    LambdaVec out;
    for (const auto& [t, c] : x)
        for (const auto& [g, v] : A.mu_or_throw(t)) {
            auto it = out.find(g);
            auto term = c * v;
            if (it == out.end()) {
                if (!term.is_zero()) out.emplace(g, term);
            } else {
                it->second = it->second + term;
                if (it->second.is_zero()) out.erase(it);
            }
        }
    return out;
}

inline BarComplex bar_complex(const TabulatedAInfCategory& A, const std::vector<std::size_t>& B, std::size_t K,
                              std::size_t N) {
    BarComplex R;
    R.tensors = bar_tensors(A, B, K, N);
    R.complex = FloerComplex(A.modulus);
    for (const auto& t : R.tensors) {
        std::string name;
        int deg = static_cast<int>(t.size()) - 2;
        for (auto g : t) {
            name += (name.empty() ? "" : "*") + A.gens[g].name;
            deg += A.gens[g].degree;
        }
        R.complex.add_generator(name, deg, tensor_level(A, t));
    }
    R.target_gens = A.hom(K, K);
    R.target = FloerComplex(A.modulus);
    std::map<std::size_t, std::size_t> pos;
    for (std::size_t i = 0; i < R.target_gens.size(); ++i) {
        const auto& g = A.gens[R.target_gens[i]];
        pos[R.target_gens[i]] = i;
        R.target.add_generator(g.name, g.degree, g.level);
    }
    for (std::size_t i = 0; i < R.target_gens.size(); ++i)
        for (const auto& [g, c] : A.mu_or_throw({R.target_gens[i]})) R.target.add_entry(i, pos.at(g), c);
    R.mu_map.resize(R.tensors.size());
    for (std::size_t j = 0; j < R.tensors.size(); ++j) {
        TensorVec one{{R.tensors[j], NovikovElement::one()}};
        for (const auto& [t, c] : bar_differential(A, one)) R.complex.add_entry(j, R.index_of(t), c);
        for (const auto& [g, c] : A.mu_or_throw(R.tensors[j])) R.mu_map[j].emplace(pos.at(g), c);
    }
    return R;
}

// R([e_K], [mu^B(K)]) at the truncation, with a minimal-level witness.
struct UnitReach {
    ExtRational value = ExtRational::infinity();
    TensorVec witness;  // bar cycle h
    LambdaVec a_K;      // mu(h) = e_K + mu_1(a_K), over A generators
    bool truncated = false;
};

inline UnitReach unit_reach(const TabulatedAInfCategory& A, const std::vector<std::size_t>& B, std::size_t K,
                            std::size_t N, const Rational& precision = default_precision()) {
    if (!A.units[K]) throw invalid_category("object without a unit");
    auto R = bar_complex(A, B, K, N);
    const std::size_t nb = R.tensors.size(), nt = R.target_gens.size();
    std::vector<Rational> levels;
    for (const auto& g : R.complex.gens) levels.push_back(g.level);
    for (const auto& g : R.target.gens) levels.push_back(g.level);
    // Phi(v, u) = (d_bar v, mu(v) + mu_1 u)
    std::vector<LambdaVec> cols(nb + nt);
    for (std::size_t j = 0; j < nb; ++j) {
        cols[j] = R.complex.d[j];
        for (const auto& [i, c] : R.mu_map[j]) cols[j].emplace(nb + i, c);
    }
    for (std::size_t j = 0; j < nt; ++j)
        for (const auto& [i, c] : R.target.d[j]) cols[nb + j].emplace(nb + i, c);
    auto red = lambda::reduce(levels, levels, cols, working_floor(levels, precision));
    std::size_t e_pos = 0;
    while (R.target_gens[e_pos] != *A.units[K]) ++e_pos;
    UnitReach out;
    auto z = red.preimage(LambdaVec{{nb + e_pos, NovikovElement::one()}});
    out.truncated = red.truncated || red.truncated_preimage;
    if (!z) return out;
    Rational lvl(0);
    if (auto l = lambda::level_of(*z, levels); l && *l > lvl) lvl = *l;
    out.value = ExtRational(lvl);
    for (const auto& [i, c] : *z) {
        if (i < nb) out.witness.emplace(R.tensors[i], c);
        else out.a_K.emplace(R.target_gens[i - nb], c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cone(mu^B) elements: tensors of length >= 2 lie in the bar bimodule, length 1 in A.

// Cone differential: every contiguous block, including the full one.
inline TensorVec cone_differential(const TabulatedAInfCategory& A, const TensorVec& x) {
    TensorVec out;
    for (const auto& [t, c] : x)
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = i + 1; j <= t.size(); ++j) contract_block(A, t, i, j, c, out);
    return out;
}

// x * y: blocks that contain the last factor of x and the first factor of y.
inline TensorVec star_product(const TabulatedAInfCategory& A, const TensorVec& x, const TensorVec& y) {
    TensorVec out;
    for (const auto& [s, c] : x)
        for (const auto& [t, d] : y) {
            if (A.gens[s.back()].target != A.gens[t.front()].source) continue;
            Tensor st = s;
            st.insert(st.end(), t.begin(), t.end());
            for (std::size_t k = 0; k < s.size(); ++k)
                for (std::size_t j = 1; j <= t.size(); ++j) contract_block(A, st, k, s.size() + j, c * d, out);
        }
    return out;
}

// H(x) = x * (h + a_K), a contracting homotopy of Cone(mu^B(K)) when mu^Cone(h + a_K) = e_K.
struct ContractingHomotopy {
    const TabulatedAInfCategory* A;
    TensorVec kernel;  // h + a_K
    Rational shift;

    TensorVec operator()(const TensorVec& x) const { return star_product(*A, x, kernel); }
};

inline ContractingHomotopy contracting_homotopy(const TabulatedAInfCategory& A, std::size_t K, const TensorVec& h,
                                               const LambdaVec& a_K) {
    TensorVec k = h;
    for (const auto& [g, c] : a_K) add_term(k, Tensor{g}, c);
    auto d = cone_differential(A, k);
    TensorVec unit{{Tensor{*A.units[K]}, NovikovElement::one()}};
    if (d != unit) throw std::invalid_argument("h is not a cycle mapping to the unit: mu(h + a_K) = " + render(A, d));
    Rational shift(0);
    if (auto l = tensor_vec_level(A, k); l && *l > shift) shift = *l;
    return {&A, k, shift};
}

// ---------------------------------------------------------------------------
// Left modules and module pre-morphisms, evaluated formally

inline constexpr int kModSpace = 1;

struct ModGen {
    std::string name;
    std::size_t object = 0;
    int degree = 0;
    Rational level;
};

// mu^M_{l|1}(x_1, ..., x_l, m) on generator inputs; nullopt on a gap.
struct TabulatedModule {
    std::vector<ModGen> gens;
    std::map<std::pair<Tensor, std::size_t>, LambdaVec> table;
    std::function<std::optional<LambdaVec>(const Tensor&, std::size_t)> rule;

    std::optional<LambdaVec> act(const TabulatedAInfCategory& A, const Tensor& xs, std::size_t m) const {
        if (auto it = table.find({xs, m}); it != table.end()) return it->second;
        for (auto x : xs)
            if (A.is_unit(x)) {
                if (xs.size() == 1) return LambdaVec{{m, NovikovElement::one()}};
                return LambdaVec{};
            }
        if (rule) return rule(xs, m);
        return std::nullopt;
    }
    std::vector<std::size_t> fiber(std::size_t object) const {
        std::vector<std::size_t> v;
        for (std::size_t i = 0; i < gens.size(); ++i)
            if (gens[i].object == object) v.push_back(i);
        return v;
    }
};

// Yoneda module of X: M(Y) = A(Y, X), module generator i is A generator index_map[i].
inline TabulatedModule yoneda_module(const TabulatedAInfCategory& A, std::size_t X) {
    TabulatedModule M;
    auto to_mod = std::make_shared<std::map<std::size_t, std::size_t>>();
    auto to_gen = std::make_shared<std::vector<std::size_t>>();
    for (std::size_t y = 0; y < A.objects.size(); ++y)
        for (auto g : A.hom(y, X)) {
            (*to_mod)[g] = M.gens.size();
            to_gen->push_back(g);
            M.gens.push_back({A.gens[g].name, y, A.gens[g].degree, A.gens[g].level});
        }
    M.rule = [&A, to_mod, to_gen](const Tensor& xs, std::size_t m) -> std::optional<LambdaVec> {
        Tensor t = xs;
        t.push_back((*to_gen)[m]);
        auto v = A.mu(t);
        if (!v) return std::nullopt;
        LambdaVec out;
        for (const auto& [g, c] : *v) out.emplace(to_mod->at(g), c);
        return out;
    };
    return M;
}

using FVec = FormalEngine::Vec;
using ModuleAction = std::function<FVec(const std::vector<FVec>&, const FVec&)>;
// Component t_{l|1}(x_1, ..., x_l, m) of a pre-morphism.
using PreMorphism = std::function<FVec(const std::vector<FVec>&, const FVec&)>;

inline std::vector<FVec> slice(const std::vector<FVec>& v, std::size_t i, std::size_t j) {
    return std::vector<FVec>(v.begin() + i, v.begin() + j);
}

// mu_1 of the dg category of modules.
inline FVec mod_mu1(MuEngine& M, const ModuleAction& src, const ModuleAction& tgt, const PreMorphism& t,
                    const std::vector<FVec>& xs, const FVec& m) {
    const std::size_t l = xs.size();
    FVec acc;
    for (std::size_t i = 0; i <= l; ++i) FormalEngine::add_all(acc, tgt(slice(xs, 0, i), t(slice(xs, i, l), m)));
    for (std::size_t i = 0; i <= l; ++i) FormalEngine::add_all(acc, t(slice(xs, 0, i), src(slice(xs, i, l), m)));
    for (std::size_t a = 0; a < l; ++a)
        for (std::size_t b = a + 1; b <= l; ++b) {
            auto inner = M.mu(slice(xs, a, b));
            if (inner.empty()) continue;
            auto ys = slice(xs, 0, a);
            ys.push_back(inner);
            auto rest = slice(xs, b, l);
            ys.insert(ys.end(), rest.begin(), rest.end());
            FormalEngine::add_all(acc, t(ys, m));
        }
    return acc;
}

// mu_2(s, t) = t o s.
inline FVec mod_compose(const PreMorphism& s, const PreMorphism& t, const std::vector<FVec>& xs, const FVec& m) {
    FVec acc;
    for (std::size_t j = 0; j <= xs.size(); ++j) FormalEngine::add_all(acc, t(slice(xs, 0, j), s(slice(xs, j, xs.size()), m)));
    return acc;
}

inline ModuleAction yoneda_action(MuEngine& M) {
    return [&M](const std::vector<FVec>& xs, const FVec& y) {
        auto args = xs;
        args.push_back(y);
        return M.mu(args);
    };
}

// Binds mu^M on the engine; module elements are leaves of kModSpace.
inline ModuleAction module_action(MuEngine& M, const TabulatedModule& mod) {
    const auto* A = M.A;
    int op = M.E.add_op("muM", [A, &mod](FormalEngine& E, const std::vector<std::size_t>& args) -> std::optional<FVec> {
        bool leaves = E.is_leaf(args.back(), kModSpace);
        Tensor xs;
        for (std::size_t k = 0; k + 1 < args.size(); ++k) {
            leaves = leaves && E.is_leaf(args[k], kGenSpace);
            if (E.is_leaf(args[k], kGenSpace)) xs.push_back(E.at(args[k]).index);
        }
        if (leaves) {
            auto v = mod.act(*A, xs, E.at(args.back()).index);
            if (!v) return std::nullopt;
            return E.from(kModSpace, *v);
        }
        for (std::size_t k = 0; k + 1 < args.size(); ++k)
            if (E.is_leaf(args[k], kGenSpace) && A->is_unit(E.at(args[k]).index)) {
                if (args.size() == 2) return E.term(args.back());
                return FVec{};
            }
        return std::nullopt;
    });
    return [&M, op](const std::vector<FVec>& xs, const FVec& m) {
        auto args = xs;
        args.push_back(m);
        return M.E.apply(op, args);
    };
}

// Random pre-morphism Y(L) -> M, tabulated on tuples of length <= max_len.
inline PreMorphism random_premorphism(MuEngine& M, const TabulatedModule& mod, std::size_t L, std::size_t max_len,
                                      std::mt19937_64& rng) {
    const auto& A = *M.A;
    auto tab = std::make_shared<std::map<Tensor, LambdaVec>>();
    for (std::size_t len = 1; len <= max_len; ++len)
        for (const auto& t : A.tuples(len, std::nullopt, L)) {
            LambdaVec v;
            for (auto m : mod.fiber(A.gens[t.front()].source))
                if (rng() % 2) v.emplace(m, NovikovElement::monomial(Rational(static_cast<std::int64_t>(rng() % 3), 2)));
            (*tab)[t] = v;
        }
    int op = M.E.add_op("phi", [tab](FormalEngine& E, const std::vector<std::size_t>& args) -> std::optional<FVec> {
        Tensor t;
        for (auto id : args) {
            if (!E.is_leaf(id, kGenSpace)) return std::nullopt;
            t.push_back(E.at(id).index);
        }
        auto it = tab->find(t);
        if (it == tab->end()) return std::nullopt;
        return E.from(kModSpace, it->second);
    });
    return [&M, op](const std::vector<FVec>& xs, const FVec& y) {
        auto args = xs;
        args.push_back(y);
        return M.E.apply(op, args);
    };
}

struct IdentityReport {
    std::size_t instances = 0;
    std::size_t formal = 0;  // instances whose terms involve untabulated values
    std::vector<std::string> failures;
    std::vector<std::string> uncheckable;

    bool passed() const { return failures.empty(); }
    nlohmann::json to_json() const {
        return {{"passed", passed()},
                {"instances", instances},
                {"formal", formal},
                {"failures", failures},
                {"uncheckable", uncheckable}};
    }
};

// Inputs (x_1, ..., x_l, y) with y in A(X_l, L), for l <= l_max.
inline std::vector<Tensor> module_inputs(const TabulatedAInfCategory& A, std::size_t L, std::size_t l_max) {
    std::vector<Tensor> out;
    for (std::size_t len = 1; len <= l_max + 1; ++len)
        for (auto& t : A.tuples(len, std::nullopt, L)) out.push_back(std::move(t));
    return out;
}

// theta o lambda = id and lambda o theta + id = mu_1 H + H mu_1 on the pre-morphism complex mod(Y(L), M),
// plus the chain map property of lambda (which needs the module relations).
inline IdentityReport verify_lambda_homotopy(const TabulatedAInfCategory& A, std::size_t L, const TabulatedModule& mod,
                                             std::size_t l_max = 2, std::size_t samples = 3, std::uint64_t seed = 1) {
    if (!A.units[L]) throw invalid_category("object without a unit");
    IdentityReport rep;
    MuEngine M(A);
    auto act = module_action(M, mod);
    auto yon = yoneda_action(M);
    const FVec eL = M.gen(*A.units[L]);
    auto mvec = [&](std::size_t m) { return M.E.term(M.E.leaf(kModSpace, m)); };
    auto render = [&](const FVec& v) {
        return M.E.render(v, [&](int s, std::size_t i) { return s == kGenSpace ? A.gens[i].name : mod.gens[i].name; });
    };
    auto lambda_of = [&](const FVec& c) -> PreMorphism {
        return [&, c](const std::vector<FVec>& xs, const FVec& y) {
            auto args = xs;
            args.push_back(y);
            return act(args, c);
        };
    };
    auto gens_of = [&](const Tensor& t) {
        std::vector<FVec> v;
        for (auto g : t) v.push_back(M.gen(g));
        return v;
    };
    // theta(lambda(c)) = c
    for (auto c : mod.fiber(L)) {
        ++rep.instances;
        auto r = FormalEngine::sum(lambda_of(mvec(c))({}, eL), mvec(c));
        if (classify(M.E, r) != Residual::zero) rep.failures.push_back("theta(lambda(" + mod.gens[c].name + ")) != " + mod.gens[c].name);
    }
    const auto inputs = module_inputs(A, L, l_max);
    // chain map: mu_1(lambda(c)) = lambda(mu^M_{0|1} c)
    for (auto c : mod.fiber(L)) {
        auto lc = lambda_of(mvec(c));
        auto dc = lambda_of(act({}, mvec(c)));
        for (const auto& t : inputs) {
            ++rep.instances;
            auto xs = gens_of(t);
            FVec y = xs.back();
            xs.pop_back();
            auto r = FormalEngine::sum(mod_mu1(M, yon, act, lc, xs, y), dc(xs, y));
            switch (classify(M.E, r)) {
                case Residual::zero: break;
                case Residual::failure:
                    rep.failures.push_back("lambda(" + mod.gens[c].name + ") not a chain map at (" + A.render(t) + "): " + render(r));
                    break;
                case Residual::uncheckable:
                    rep.uncheckable.push_back("lambda(" + mod.gens[c].name + ") at (" + A.render(t) + ")");
                    break;
            }
        }
    }
    // homotopy identity on random pre-morphisms
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        auto phi = random_premorphism(M, mod, L, l_max + 2, rng);
        PreMorphism H_phi = [&, phi](const std::vector<FVec>& xs, const FVec& y) {
            auto args = xs;
            args.push_back(y);
            return phi(args, eL);
        };
        PreMorphism d_phi = [&, phi](const std::vector<FVec>& xs, const FVec& y) { return mod_mu1(M, yon, act, phi, xs, y); };
        PreMorphism H_dphi = [&, d_phi](const std::vector<FVec>& xs, const FVec& y) {
            auto args = xs;
            args.push_back(y);
            return d_phi(args, eL);
        };
        auto lam_theta = lambda_of(phi({}, eL));
        for (const auto& t : inputs) {
            ++rep.instances;
            auto xs = gens_of(t);
            FVec y = xs.back();
            xs.pop_back();
            FVec r = lam_theta(xs, y);
            FormalEngine::add_all(r, phi(xs, y));
            FormalEngine::add_all(r, mod_mu1(M, yon, act, H_phi, xs, y));
            FormalEngine::add_all(r, H_dphi(xs, y));
            switch (classify(M.E, r)) {
                case Residual::zero: break;
                case Residual::failure:
                    rep.failures.push_back("homotopy identity fails at (" + A.render(t) + "): " + render(r));
                    break;
                case Residual::uncheckable: rep.uncheckable.push_back("homotopy identity at (" + A.render(t) + ")"); break;
            }
        }
    }
    rep.formal = M.E.gaps.size();
    return rep;
}

// ---------------------------------------------------------------------------
// The split-generation diagram: lambda o mu^B + mu_2(lambdabar, xi) = mu_1(H) + H o mu^bar,
// checked component-wise against the A-infinity relation it reduces to.

struct DiagramReport {
    std::size_t instances = 0;
    std::size_t checked = 0;  // relation fully evaluated and zero
    std::vector<std::string> mismatches;  // diagram terms differ from the A-infinity relation
    std::vector<std::string> failures;    // evaluated relation nonzero
    std::vector<std::string> uncheckable;

    bool passed() const { return mismatches.empty() && failures.empty(); }
    nlohmann::json to_json() const {
        return {{"passed", passed()},
                {"instances", instances},
                {"checked", checked},
                {"mismatches", mismatches},
                {"failures", failures},
                {"uncheckable_count", uncheckable.size()}};
    }
};

inline DiagramReport verify_abouzaid_diagram(const TabulatedAInfCategory& A, const std::vector<std::size_t>& B,
                                             std::size_t K, std::size_t N, std::size_t l_max = 1) {
    DiagramReport rep;
    MuEngine M(A);
    const int tensor_op = M.E.add_op("tensor", [](FormalEngine&, const std::vector<std::size_t>&) { return std::nullopt; }, false);
    auto tensor = [&](const std::vector<FVec>& parts) { return M.E.apply(tensor_op, parts); };
    auto kids_of = [&](std::size_t id) {
        std::vector<FVec> v;
        for (auto k : M.E.at(id).kids) v.push_back(M.E.term(k));
        return v;
    };
    auto yon = yoneda_action(M);
    // U(Q) = F^N B(Q, K): bar tensors b, a_1, ..., a_d, gamma_2 as a left module
    ModuleAction U = [&](const std::vector<FVec>& xs, const FVec& u) {
        FVec acc;
        for (const auto& [id, c] : u) {
            auto k = kids_of(id);
            const std::size_t m = k.size();
            if (xs.empty()) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = i + 1; j <= m; ++j) {
                        if (i == 0 && j == m) continue;
                        auto inner = M.mu(slice(k, i, j));
                        auto parts = slice(k, 0, i);
                        parts.push_back(inner);
                        auto rest = slice(k, j, m);
                        parts.insert(parts.end(), rest.begin(), rest.end());
                        FormalEngine::add_all(acc, tensor(parts), c);
                    }
            } else {
                for (std::size_t i = 1; i < m; ++i) {
                    auto in = xs;
                    auto head = slice(k, 0, i);
                    in.insert(in.end(), head.begin(), head.end());
                    auto parts = std::vector<FVec>{M.mu(in)};
                    auto rest = slice(k, i, m);
                    parts.insert(parts.end(), rest.begin(), rest.end());
                    FormalEngine::add_all(acc, tensor(parts), c);
                }
            }
        }
        return acc;
    };
    // full contraction U -> Y(K)
    PreMorphism xi = [&](const std::vector<FVec>& xs, const FVec& u) {
        FVec acc;
        for (const auto& [id, c] : u) {
            auto in = xs;
            auto k = kids_of(id);
            in.insert(in.end(), k.begin(), k.end());
            FormalEngine::add_all(acc, M.mu(in), c);
        }
        return acc;
    };
    const auto inputs = module_inputs(A, K, l_max);
    for (const auto& g : bar_tensors(A, B, K, N)) {
        std::vector<FVec> gam;
        for (auto x : g) gam.push_back(M.gen(x));
        const std::size_t d = g.size() - 2;
        FVec gamma_t = tensor(gam);
        FVec mu_bar = M.mu(gam);
        FVec dbar = U({}, gamma_t);
        PreMorphism lambdabar = [&, gam, d](const std::vector<FVec>& xs, const FVec& y) {
            FVec acc;
            for (std::size_t j = 0; j <= d; ++j) {
                auto in = xs;
                in.push_back(y);
                auto head = slice(gam, 0, j + 1);
                in.insert(in.end(), head.begin(), head.end());
                auto parts = std::vector<FVec>{M.mu(in)};
                auto rest = slice(gam, j + 1, gam.size());
                parts.insert(parts.end(), rest.begin(), rest.end());
                FormalEngine::add_all(acc, tensor(parts));
            }
            return acc;
        };
        auto H_of = [&](const FVec& u) -> PreMorphism {
            return [&, u](const std::vector<FVec>& xs, const FVec& y) {
                FVec acc;
                for (const auto& [id, c] : u) {
                    auto in = xs;
                    in.push_back(y);
                    auto k = kids_of(id);
                    in.insert(in.end(), k.begin(), k.end());
                    FormalEngine::add_all(acc, M.mu(in), c);
                }
                return acc;
            };
        };
        PreMorphism H_gamma = H_of(gamma_t);
        PreMorphism H_dbar = H_of(dbar);
        for (const auto& t : inputs) {
            ++rep.instances;
            std::vector<FVec> xs;
            for (auto x : t) xs.push_back(M.gen(x));
            FVec y = xs.back();
            xs.pop_back();
            auto lam_in = xs;
            lam_in.push_back(y);
            lam_in.push_back(mu_bar);
            FVec lhs = M.mu(lam_in);
            FormalEngine::add_all(lhs, mod_compose(lambdabar, xi, xs, y));
            FVec rhs = mod_mu1(M, yon, yon, H_gamma, xs, y);
            FormalEngine::add_all(rhs, H_dbar(xs, y));
            auto all = xs;
            all.push_back(y);
            all.insert(all.end(), gam.begin(), gam.end());
            FVec rel = M.ainf_relation(all);
            FVec diff = FormalEngine::sum(FormalEngine::sum(lhs, rhs), rel);
            const std::string where = A.render(t) + " | " + A.render(g);
            if (!diff.empty()) {
                rep.mismatches.push_back(where + ": " + M.render(diff));
                continue;
            }
            switch (classify(M.E, rel)) {
                case Residual::zero: ++rep.checked; break;
                case Residual::failure: rep.failures.push_back(where + ": " + M.render(rel)); break;
                case Residual::uncheckable: rep.uncheckable.push_back(where); break;
            }
        }
    }
    return rep;
}

}  // namespace tpc
