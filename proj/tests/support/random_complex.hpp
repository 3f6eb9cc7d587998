#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "tpc/filtered_complex.hpp"

namespace tpc::testing {

inline Rational random_level(std::mt19937_64& rng, int grid = 8, int den = 2) {
    return Rational(static_cast<std::int64_t>(rng() % grid), den);
}

// Filtered automorphism: unitriangular in (level, index) order and degree preserving.
inline gf2::Matrix random_filtered_change(const FilteredComplex& C, std::mt19937_64& rng) {
    const std::size_t n = C.size();
    auto g = gf2::Matrix::identity(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j || C.gens[i].degree != C.gens[j].degree) continue;
            const bool below = C.gens[i].level < C.gens[j].level || (C.gens[i].level == C.gens[j].level && i < j);
            if (below && rng() % 2) g.set(i, j);
        }
    return g;
}

inline FilteredComplex conjugated(const FilteredComplex& C, const gf2::Matrix& g) {
    FilteredComplex D = C;
    D.d = g * C.d * gf2::inverse(g);
    return D;
}

// Random direct sum of elementary complexes, then a random filtered change of basis.
inline FilteredComplex random_complex(std::mt19937_64& rng, std::size_t max_dim, int max_degree = 2, int grid = 8,
                                      int den = 2) {
    FilteredComplex C;
    const std::size_t dim = rng() % (max_dim + 1);
    while (C.size() < dim) {
        const int deg = static_cast<int>(rng() % (max_degree + 1));
        const Rational la = random_level(rng, grid, den);
        if (C.size() + 2 <= dim && rng() % 3 != 0) {
            const Rational lb = la + random_level(rng, grid, den);
            auto a = C.add_generator("g" + std::to_string(C.size()), deg, la);
            auto b = C.add_generator("g" + std::to_string(C.size()), deg + 1, lb);
            C.add_entry(b, a);
        } else {
            C.add_generator("g" + std::to_string(C.size()), deg, la);
        }
    }
    std::vector<std::size_t> perm(C.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    FilteredComplex P;
    for (std::size_t k = 0; k < perm.size(); ++k) {
        const auto& g = C.gens[perm[k]];
        P.add_generator("g" + std::to_string(k), g.degree, g.level);
    }
    std::vector<std::size_t> inv(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
    for (std::size_t j = 0; j < C.size(); ++j)
        for (auto i = C.d.cols[j].find_first(); i != gf2::Vec::npos; i = C.d.cols[j].find_next(i))
            P.add_entry(inv[j], inv[i]);
    return conjugated(P, random_filtered_change(P, rng));
}

}  // namespace tpc::testing
