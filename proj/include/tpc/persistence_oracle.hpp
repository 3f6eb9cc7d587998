#pragma once

// Brute-force distances from explicit morphisms between interval modules.
// A morphism I[x1,x2) -> I[y1,y2) raising filtration by a is nonzero exactly when
// y1 <= x1 + a < y2 <= x2 + a; maps between sums are Z/2 matrices of those.

#include <cstdint>
#include <vector>

#include "tpc/persistence.hpp"

namespace tpc::oracle {

namespace detail {

inline bool lt(const ExtRational& a, const ExtRational& b) { return a < b; }

inline bool interval_map(const Bar& x, const Bar& y, const Rational& a) {
    if (x.degree != y.degree) return false;
    ExtRational xa = ExtRational(x.birth + a);
    if (ExtRational(y.birth) > xa) return false;
    if (!(xa < y.death)) return false;
    return !(y.death > x.death + a);
}

// The composite x -> y -> z (shifts a then b) is nonzero.
inline bool composite_nonzero(const Bar& x, const Bar& y, const Bar& z, const Rational& a, const Rational& b) {
    Rational lo = rmax(x.birth, rmax(y.birth - a, z.birth - a - b));
    ExtRational hi = x.death;
    ExtRational hy = y.death - a, hz = z.death - (a + b);
    if (hy < hi) hi = hy;
    if (hz < hi) hi = hz;
    return ExtRational(lo) < hi;
}

struct Entry {
    int row, col;
};

inline std::vector<Entry> valid_entries(const std::vector<Bar>& X, const std::vector<Bar>& Y, const Rational& a) {
    std::vector<Entry> e;
    for (int i = 0; i < static_cast<int>(X.size()); ++i)
        for (int j = 0; j < static_cast<int>(Y.size()); ++j)
            if (interval_map(X[i], Y[j], a)) e.push_back({i, j});
    return e;
}

// Does psi o phi equal eta_{a+b} on X for the given matrices?
inline bool composite_is_eta(const std::vector<Bar>& X, const std::vector<Bar>& Y, const std::vector<Entry>& pe,
                             std::uint32_t pm, const std::vector<Entry>& qe, std::uint32_t qm, const Rational& a,
                             const Rational& b) {
    const int n = static_cast<int>(X.size());
    const Rational s = a + b;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            int v = 0;
            for (std::size_t p = 0; p < pe.size(); ++p) {
                if (!(pm >> p & 1u) || pe[p].row != i) continue;
                int j = pe[p].col;
                for (std::size_t q = 0; q < qe.size(); ++q) {
                    if (!(qm >> q & 1u) || qe[q].row != j || qe[q].col != k) continue;
                    if (composite_nonzero(X[i], Y[j], X[k], a, b)) v ^= 1;
                }
            }
            int want = (i == k) && (X[i].infinite() || X[i].length().value > s);
            if (v != want) return false;
        }
    }
    return true;
}

// phi: X -> Y of shift a, psi: Y -> X of shift b.
inline bool exists_maps(const std::vector<Bar>& X, const std::vector<Bar>& Y, const Rational& a, const Rational& b,
                        bool both_sides) {
    auto pe = valid_entries(X, Y, a);
    auto qe = valid_entries(Y, X, b);
    if (pe.size() > 24 || qe.size() > 24) throw std::invalid_argument("oracle: barcodes too large");
    for (std::uint32_t pm = 0; pm < (1u << pe.size()); ++pm) {
        for (std::uint32_t qm = 0; qm < (1u << qe.size()); ++qm) {
            if (!composite_is_eta(X, Y, pe, pm, qe, qm, a, b)) continue;
            if (!both_sides) return true;
            // swap roles: psi then phi on Y
            if (composite_is_eta(Y, X, qe, qm, pe, pm, b, a)) return true;
        }
    }
    return false;
}

inline std::vector<Rational> half_grid(const Rational& top) {
    std::vector<Rational> g;
    for (std::int64_t k = 0; Rational(k, 2) <= top; ++k) g.emplace_back(k, 2);
    return g;
}

inline ExtRational least_on_grid(const std::vector<Rational>& grid, const std::function<bool(const Rational&)>& ok,
                                 const Rational& far) {
    if (!ok(grid.back())) {
        if (ok(far)) throw std::logic_error("oracle: optimum lies outside the grid");
        return ExtRational::infinity();
    }
    std::size_t lo = 0, hi = grid.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (ok(grid[mid])) hi = mid;
        else lo = mid + 1;
    }
    return ExtRational(grid[lo]);
}

}  // namespace detail

// Values are exact when every candidate lies on the half-integer grid up to `top`.
inline ExtRational dint(const Barcode& X, const Barcode& Y, const Rational& top = Rational(5)) {
    auto g = detail::half_grid(top);
    return detail::least_on_grid(
        g, [&](const Rational& r) { return detail::exists_maps(X.bars, Y.bars, r, r, true); }, top * Rational(4));
}

inline ExtRational drint(const Barcode& R, const Barcode& X, const Rational& top = Rational(5)) {
    auto g = detail::half_grid(top);
    return detail::least_on_grid(
        g, [&](const Rational& r) { return detail::exists_maps(R.bars, X.bars, r, r, false); }, top * Rational(4));
}

inline ExtRational Dint(const Barcode& X, const Barcode& Y, const Rational& top = Rational(10)) {
    auto g = detail::half_grid(top);
    ExtRational best = ExtRational::infinity();
    for (const auto& a : g) {
        auto ok = [&](const Rational& b) { return detail::exists_maps(X.bars, Y.bars, a, b, true); };
        if (!ok(g.back())) continue;
        std::size_t lo = 0, hi = g.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (ok(g[mid])) hi = mid;
            else lo = mid + 1;
        }
        ExtRational v(a + g[lo]);
        if (v < best) best = v;
    }
    if (best.is_inf() && detail::exists_maps(X.bars, Y.bars, top * Rational(2), top * Rational(2), true))
        throw std::logic_error("oracle: optimum lies outside the grid");
    return best;
}

// All multisets of at most k bars with endpoints in {0..top} and deaths possibly infinite.
inline std::vector<Barcode> small_barcodes(int k, int top) {
    std::vector<Bar> types;
    for (int b = 0; b <= top; ++b) {
        for (int d = b + 1; d <= top; ++d) types.push_back({Rational(b), ExtRational(Rational(d)), 0});
        types.push_back({Rational(b), ExtRational::infinity(), 0});
    }
    std::vector<Barcode> out;
    std::vector<int> pick;
    std::function<void(int, int)> rec = [&](int start, int left) {
        Barcode c;
        for (int t : pick) c.add(types[t]);
        out.push_back(c);
        if (left == 0) return;
        for (int t = start; t < static_cast<int>(types.size()); ++t) {
            pick.push_back(t);
            rec(t, left - 1);
            pick.pop_back();
        }
    };
    rec(0, k);
    return out;
}

}  // namespace tpc::oracle
