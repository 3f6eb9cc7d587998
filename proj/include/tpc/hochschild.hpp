#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpc/ainf.hpp"
#include "tpc/bar.hpp"
#include "tpc/novikov_complex.hpp"

namespace tpc {

// Z/2 Novikov combination of cyclically composable tensors x_1 (x) ... (x) x_k.
using HochschildChain = TensorVec;

inline bool cyclic_composable(const TabulatedAInfCategory& A, const Tensor& t) {
    if (t.empty() || !A.composable(t)) return false;
    return A.gens[t.back()].target == A.gens[t.front()].source;
}

// Normalized chains: a unit may only sit in the first slot.
inline bool degenerate(const TabulatedAInfCategory& A, const Tensor& t) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (A.is_unit(t[i])) return true;
    return false;
}

inline int hochschild_degree(const TabulatedAInfCategory& A, const Tensor& t) {
    int d = static_cast<int>(t.size()) - 1 - A.n;
    for (auto g : t) d += A.gens[g].degree;
    return A.norm(d);
}

inline HochschildChain normalize(const TabulatedAInfCategory& A, const HochschildChain& c) {
    HochschildChain out;
    for (const auto& [t, x] : c) {
        if (!cyclic_composable(A, t)) throw invalid_category("chain term is not cyclically composable: " + A.render(t));
        if (!degenerate(A, t)) add_term(out, t, x);
    }
    return out;
}

// Cyclic Hochschild differential on normalized chains.
inline HochschildChain dcc(const TabulatedAInfCategory& A, const HochschildChain& c) {
    HochschildChain out;
    for (const auto& [t, coef] : normalize(A, c)) {
        const std::size_t k = t.size();
        // blocks away from x_1
        for (std::size_t i = 1; i < k; ++i)
            for (std::size_t j = i + 1; j <= k; ++j) contract_block(A, t, i, j, coef, out);
        // blocks through x_1: x_{k-r+1} .. x_k, x_1 .. x_s
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t s = 1; r + s <= k; ++s) {
                Tensor block(t.end() - static_cast<std::ptrdiff_t>(r), t.end());
                block.insert(block.end(), t.begin(), t.begin() + static_cast<std::ptrdiff_t>(s));
                Tensor rest(t.begin() + static_cast<std::ptrdiff_t>(s), t.end() - static_cast<std::ptrdiff_t>(r));
                for (const auto& [g, v] : A.mu_or_throw(block)) {
                    Tensor n{g};
                    n.insert(n.end(), rest.begin(), rest.end());
                    add_term(out, n, coef * v);
                }
            }
    }
    for (auto it = out.begin(); it != out.end();) it = degenerate(A, it->first) ? out.erase(it) : std::next(it);
    return out;
}

inline bool is_cycle(const TabulatedAInfCategory& A, const HochschildChain& c) { return dcc(A, c).empty(); }

inline std::optional<Rational> chain_level(const TabulatedAInfCategory& A, const HochschildChain& c) {
    return tensor_vec_level(A, c);
}

// Normalized cyclic tensors of length 1..N_max.
inline std::vector<Tensor> hochschild_tensors(const TabulatedAInfCategory& A, std::size_t N_max) {
    std::vector<Tensor> out;
    for (std::size_t len = 1; len <= N_max; ++len)
        for (std::size_t x = 0; x < A.objects.size(); ++x)
            for (auto& t : A.tuples(len, x, x))
                if (!degenerate(A, t)) out.push_back(std::move(t));
    std::sort(out.begin(), out.end());
    return out;
}

// Length filtration piece F^N CC as a Floer complex.
struct HochschildComplex {
    std::vector<Tensor> tensors;
    FloerComplex complex;

    std::size_t index_of(const Tensor& t) const {
        auto it = std::lower_bound(tensors.begin(), tensors.end(), t);
        if (it == tensors.end() || *it != t) throw std::out_of_range("tensor outside the truncation");
        return static_cast<std::size_t>(it - tensors.begin());
    }
    LambdaVec to_lambda(const HochschildChain& c) const {
        LambdaVec v;
        for (const auto& [t, x] : c) v.emplace(index_of(t), x);
        return v;
    }
};

inline HochschildComplex hochschild_complex(const TabulatedAInfCategory& A, std::size_t N_max) {
    HochschildComplex H;
    H.tensors = hochschild_tensors(A, N_max);
    H.complex = FloerComplex(A.modulus);
    for (const auto& t : H.tensors) {
        std::string name;
        for (auto g : t) name += (name.empty() ? "" : "*") + A.gens[g].name;
        H.complex.add_generator(name, hochschild_degree(A, t), tensor_level(A, t));
    }
    for (std::size_t j = 0; j < H.tensors.size(); ++j)
        for (const auto& [t, c] : dcc(A, {{H.tensors[j], NovikovElement::one()}})) H.complex.add_entry(j, H.index_of(t), c);
    return H;
}

// Concise barcode of F^N CC restricted to one degree (all degrees when nullopt).
inline ConciseBarcode hochschild_barcode(const TabulatedAInfCategory& A, std::size_t N_max,
                                         std::optional<int> degree = std::nullopt,
                                         const Rational& precision = default_precision()) {
    auto B = concise_barcode(hochschild_complex(A, N_max).complex, precision);
    if (!degree) return B;
    ConciseBarcode out;
    const int d = A.norm(*degree);
    for (const auto& b : B.finite)
        if (b.degree == d) out.finite.push_back(b);
    if (auto it = B.infinite.find(d); it != B.infinite.end()) out.infinite[d] = it->second;
    return out;
}

// Least r such that T^{-r} times a level-preserving rescaling of c bounds: min level of a preimage minus level of c.
inline ExtRational class_boundary_depth(const TabulatedAInfCategory& A, std::size_t N_max, const HochschildChain& c,
                                        const Rational& precision = default_precision()) {
    if (!is_cycle(A, c)) throw std::invalid_argument("chain is not a cycle");
    auto H = hochschild_complex(A, N_max);
    auto levels = H.complex.levels();
    auto red = lambda::reduce(levels, levels, H.complex.d, working_floor(levels, precision));
    auto b = H.to_lambda(normalize(A, c));
    if (b.empty()) return ExtRational(Rational(0));
    auto z = red.preimage(b);
    if (!z) return ExtRational::infinity();
    return ExtRational(*lambda::level_of(*z, levels) - *lambda::level_of(b, levels));
}

inline nlohmann::json chain_to_json(const TabulatedAInfCategory& A, const HochschildChain& c) {
    auto j = nlohmann::json::array();
    for (const auto& [t, x] : c) j.push_back({{"tensor", A.names(t)}, {"coefficient", x.str()}});
    return j;
}

inline HochschildChain chain_from_json(const TabulatedAInfCategory& A, const nlohmann::json& j) {
    HochschildChain c;
    for (const auto& term : j) {
        Tensor t;
        for (const auto& n : term.at("tensor")) t.push_back(A.index_of(n.get<std::string>()));
        add_term(c, t, NovikovElement::parse(term.value("coefficient", std::string("1"))));
    }
    return c;
}

}  // namespace tpc
