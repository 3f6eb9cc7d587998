#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpc/rational.hpp"

namespace tpc {

struct Bar {
    Rational birth;
    ExtRational death;
    int degree = 0;

    bool infinite() const { return death.is_inf(); }
    ExtRational length() const { return death - birth; }
    friend bool operator==(const Bar&, const Bar&) = default;
};

inline bool bar_less(const Bar& a, const Bar& b) {
    if (a.degree != b.degree) return a.degree < b.degree;
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
}

struct Barcode {
    std::vector<Bar> bars;
    int modulus = 0;

    Barcode() = default;
    explicit Barcode(int m) : modulus(m) {}
    Barcode(std::vector<Bar> b, int m = 0) : modulus(m) {
        for (auto& x : b) add(x);
    }

    int reduce_degree(int d) const {
        if (modulus <= 0) return d;
        int r = d % modulus;
        return r < 0 ? r + modulus : r;
    }

    // Empty bars are dropped.
    void add(Bar b) {
        if (!(ExtRational(b.birth) < b.death)) return;
        b.degree = reduce_degree(b.degree);
        bars.push_back(b);
    }
    void add(const Rational& birth, const ExtRational& death, int degree = 0) { add(Bar{birth, death, degree}); }

    void normalize() { std::sort(bars.begin(), bars.end(), bar_less); }
    Barcode sorted() const {
        Barcode c = *this;
        c.normalize();
        return c;
    }
    std::size_t size() const { return bars.size(); }

    std::set<int> degrees() const {
        std::set<int> s;
        for (const auto& b : bars) s.insert(b.degree);
        return s;
    }
    std::vector<Bar> in_degree(int d) const {
        std::vector<Bar> v;
        for (const auto& b : bars)
            if (b.degree == d) v.push_back(b);
        return v;
    }
    std::size_t infinite_count(int d) const {
        std::size_t n = 0;
        for (const auto& b : bars)
            if (b.degree == d && b.infinite()) ++n;
        return n;
    }

    // Sigma^s: every endpoint moves by s.
    Barcode shifted(const Rational& s) const {
        Barcode c(modulus);
        for (const auto& b : bars) c.add(b.birth + s, b.death + s, b.degree);
        return c;
    }

    friend Barcode operator+(const Barcode& a, const Barcode& b) {
        if (a.modulus != b.modulus) throw std::invalid_argument("grading modulus mismatch");
        Barcode c = a;
        for (const auto& x : b.bars) c.add(x);
        return c;
    }

    friend bool operator==(const Barcode& a, const Barcode& b) {
        return a.modulus == b.modulus && a.sorted().bars == b.sorted().bars;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["modulus"] = modulus;
        j["bars"] = nlohmann::json::array();
        for (const auto& b : sorted().bars)
            j["bars"].push_back({{"birth", b.birth.str()}, {"death", b.death.str()}, {"degree", b.degree}});
        return j;
    }
    static Barcode from_json(const nlohmann::json& j) {
        Barcode c(j.value("modulus", 0));
        for (const auto& b : j.at("bars")) {
            auto death_str = b.at("death").get<std::string>();
            c.add(Rational::parse(b.at("birth").get<std::string>()), ExtRational::parse(death_str), b.value("degree", 0));
        }
        return c;
    }
};

enum class CountMode { finite_only, all };

// Bars with death - birth > delta.
inline std::size_t bar_count(const Barcode& B, const Rational& delta, CountMode mode = CountMode::all) {
    if (delta.sign() < 0) throw std::invalid_argument("bar_count: negative delta");
    std::size_t n = 0;
    for (const auto& b : B.bars) {
        if (b.infinite()) {
            if (mode == CountMode::all) ++n;
        } else if (b.length().value > delta) {
            ++n;
        }
    }
    return n;
}

inline Rational spectral_range(const Barcode& B) {
    std::optional<Rational> lo, hi;
    for (const auto& b : B.bars) {
        if (!b.infinite()) continue;
        if (!lo || b.birth < *lo) lo = b.birth;
        if (!hi || b.birth > *hi) hi = b.birth;
    }
    if (!lo) throw std::invalid_argument("spectral_range: no infinite bars");
    return *hi - *lo;
}

namespace detail {

// Kuhn's augmenting paths; adj[i] lists right vertices for left vertex i.
inline std::vector<int> max_matching(const std::vector<std::vector<int>>& adj, int n_right) {
    std::vector<int> match_right(n_right, -1);
    std::vector<char> seen;
    std::function<bool(int)> augment = [&](int u) -> bool {
        for (int v : adj[u]) {
            if (seen[v]) continue;
            seen[v] = 1;
            if (match_right[v] < 0 || augment(match_right[v])) {
                match_right[v] = u;
                return true;
            }
        }
        return false;
    };
    for (int u = 0; u < static_cast<int>(adj.size()); ++u) {
        seen.assign(n_right, 0);
        augment(u);
    }
    return match_right;
}

inline int matching_size(const std::vector<int>& match_right) {
    int k = 0;
    for (int v : match_right) k += v >= 0;
    return k;
}

// X_t -> Y_{t+a} and Y_t -> X_{t+b} compatible on a pair of bars.
inline bool pair_compatible(const Bar& x, const Bar& y, const Rational& a, const Rational& b) {
    if (x.infinite() != y.infinite()) return false;
    if (y.birth > x.birth + a || x.birth > y.birth + b) return false;
    if (x.infinite()) return true;
    return !(y.death.value > x.death.value + a) && !(x.death.value > y.death.value + b);
}

// (a,b)-matching in one degree: matched pairs compatible, unmatched bars of length <= a+b.
inline bool ab_matching_feasible(const std::vector<Bar>& X, const std::vector<Bar>& Y, const Rational& a,
                                 const Rational& b) {
    const int n = static_cast<int>(X.size()), m = static_cast<int>(Y.size());
    const Rational s = a + b;
    auto removable = [&](const Bar& z) { return !z.infinite() && !(z.length().value > s); };
    // left: X (n) then diagonal copies of Y (m); right: Y (m) then diagonal copies of X (n)
    std::vector<std::vector<int>> adj(n + m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j)
            if (pair_compatible(X[i], Y[j], a, b)) adj[i].push_back(j);
        if (removable(X[i])) adj[i].push_back(m + i);
    }
    for (int j = 0; j < m; ++j) {
        if (removable(Y[j])) adj[n + j].push_back(j);
        for (int i = 0; i < n; ++i) adj[n + j].push_back(m + i);
    }
    return matching_size(max_matching(adj, n + m)) == n + m;
}

// Every bar of R longer than 2r goes injectively to an r-close bar of X.
inline bool retract_matching_feasible(const std::vector<Bar>& R, const std::vector<Bar>& X, const Rational& r) {
    std::vector<std::vector<int>> adj;
    const Rational two_r = r + r;
    for (const auto& y : R) {
        if (!y.infinite() && !(y.length().value > two_r)) continue;
        adj.emplace_back();
        for (int j = 0; j < static_cast<int>(X.size()); ++j)
            if (pair_compatible(y, X[j], r, r)) adj.back().push_back(j);
    }
    return matching_size(max_matching(adj, static_cast<int>(X.size()))) == static_cast<int>(adj.size());
}

inline std::set<int> all_degrees(const Barcode& A, const Barcode& B) {
    auto s = A.degrees();
    for (int d : B.degrees()) s.insert(d);
    return s;
}

inline void check_modulus(const Barcode& A, const Barcode& B) {
    if (A.modulus != B.modulus) throw std::invalid_argument("grading modulus mismatch");
}

inline bool ab_feasible(const Barcode& A, const Barcode& B, const Rational& a, const Rational& b) {
    for (int d : all_degrees(A, B))
        if (!ab_matching_feasible(A.in_degree(d), B.in_degree(d), a, b)) return false;
    return true;
}

inline bool retract_feasible(const Barcode& R, const Barcode& X, const Rational& r) {
    for (int d : all_degrees(R, X))
        if (!retract_matching_feasible(R.in_degree(d), X.in_degree(d), r)) return false;
    return true;
}

// Endpoint differences between bars of equal degree: births with births, finite deaths with finite deaths.
inline std::vector<Rational> endpoint_differences(const Barcode& A, const Barcode& B) {
    std::vector<Rational> c;
    for (const auto& x : A.bars)
        for (const auto& y : B.bars) {
            if (x.degree != y.degree) continue;
            c.push_back(y.birth - x.birth);
            if (!x.infinite() && !y.infinite()) c.push_back(y.death.value - x.death.value);
        }
    return c;
}

inline std::vector<Rational> half_lengths(const Barcode& A) {
    std::vector<Rational> v;
    for (const auto& x : A.bars)
        if (!x.infinite()) v.push_back(x.length().value / Rational(2));
    return v;
}

inline void sort_unique(std::vector<Rational>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Smallest candidate satisfying a monotone predicate, or infinity.
inline ExtRational first_feasible(std::vector<Rational> cand, const std::function<bool(const Rational&)>& ok) {
    sort_unique(cand);
    if (cand.empty() || !ok(cand.back())) return ExtRational::infinity();
    std::size_t lo = 0, hi = cand.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (ok(cand[mid])) hi = mid;
        else lo = mid + 1;
    }
    return ExtRational(cand[lo]);
}

}  // namespace detail

// Bottleneck form of the interleaving distance.
inline ExtRational interleaving_distance(const Barcode& A, const Barcode& B) {
    detail::check_modulus(A, B);
    for (int d : detail::all_degrees(A, B))
        if (A.infinite_count(d) != B.infinite_count(d)) return ExtRational::infinity();
    std::vector<Rational> cand{Rational(0)};
    for (const auto& c : detail::endpoint_differences(A, B)) cand.push_back(rabs(c));
    for (const auto& h : detail::half_lengths(A)) cand.push_back(h);
    for (const auto& h : detail::half_lengths(B)) cand.push_back(h);
    return detail::first_feasible(cand, [&](const Rational& r) { return detail::ab_feasible(A, B, r, r); });
}

// Least a+b over asymmetric (a,b)-interleavings. Writing a = r+s, b = r-s this is
// 2 min r over |s| <= r with an r-matching between A and B shifted by -s.
inline ExtRational dint_variant(const Barcode& A, const Barcode& B) {
    detail::check_modulus(A, B);
    for (int d : detail::all_degrees(A, B))
        if (A.infinite_count(d) != B.infinite_count(d)) return ExtRational::infinity();
    auto diffs = detail::endpoint_differences(A, B);
    std::vector<Rational> cand{Rational(0)};
    for (const auto& c : diffs) cand.push_back(rabs(c));
    for (std::size_t i = 0; i < diffs.size(); ++i)
        for (std::size_t j = i + 1; j < diffs.size(); ++j) cand.push_back(rabs(diffs[i] - diffs[j]));
    for (const auto& h : detail::half_lengths(A)) cand.push_back(h + h);
    for (const auto& h : detail::half_lengths(B)) cand.push_back(h + h);
    detail::sort_unique(diffs);
    auto ok = [&](const Rational& D) {
        Rational r = D / Rational(2);
        std::vector<Rational> svals{r, -r};
        for (const auto& c : diffs) {
            svals.push_back(c + r);
            svals.push_back(c - r);
        }
        detail::sort_unique(svals);
        for (const auto& s : svals) {
            if (s > r || s < -r) continue;
            if (detail::ab_feasible(A, B, r + s, r - s)) return true;
        }
        return false;
    };
    return detail::first_feasible(cand, ok);
}

// How far R is from being a retract of X.
inline ExtRational retract_interleaving(const Barcode& R, const Barcode& X) {
    detail::check_modulus(R, X);
    std::vector<Rational> cand{Rational(0)};
    for (const auto& c : detail::endpoint_differences(R, X)) cand.push_back(rabs(c));
    for (const auto& h : detail::half_lengths(R)) cand.push_back(h);
    return detail::first_feasible(cand, [&](const Rational& r) { return detail::retract_feasible(R, X, r); });
}

enum class Metric { dint, drint, Dint };

inline ExtRational metric_value(Metric m, const Barcode& A, const Barcode& B) {
    switch (m) {
        case Metric::dint: return interleaving_distance(A, B);
        case Metric::drint: return retract_interleaving(A, B);
        case Metric::Dint: return dint_variant(A, B);
    }
    return ExtRational::infinity();
}

// inf over relative shifts u of metric(A, Sigma^u B); u ranges over the breakpoints of the
// piecewise linear objective.
inline ExtRational shift_invariant(Metric m, const Barcode& A, const Barcode& B) {
    detail::check_modulus(A, B);
    auto diffs = detail::endpoint_differences(A, B);
    std::vector<Rational> us{Rational(0)};
    for (const auto& c : diffs) us.push_back(-c);
    for (std::size_t i = 0; i < diffs.size(); ++i)
        for (std::size_t j = i + 1; j < diffs.size(); ++j) us.push_back(-(diffs[i] + diffs[j]) / Rational(2));
    detail::sort_unique(us);
    ExtRational best = ExtRational::infinity();
    for (const auto& u : us) {
        ExtRational v = metric_value(m, A, B.shifted(u));
        if (v < best) best = v;
    }
    return best;
}

// K built from the bars of X left unmatched by a retract matching at level d_rint(R,X).
inline Barcode retract_complement(const Barcode& R, const Barcode& X, const Rational& eps) {
    ExtRational r = retract_interleaving(R, X);
    if (!(r < ExtRational(eps))) throw std::invalid_argument("retract_complement: d_rint(R,X) >= eps");
    Barcode K(X.modulus);
    const Rational two_r = r.value + r.value;
    for (int d : detail::all_degrees(R, X)) {
        auto Rd = R.in_degree(d);
        auto Xd = X.in_degree(d);
        std::vector<std::vector<int>> adj;
        for (const auto& y : Rd) {
            if (!y.infinite() && !(y.length().value > two_r)) continue;
            adj.emplace_back();
            for (int j = 0; j < static_cast<int>(Xd.size()); ++j)
                if (detail::pair_compatible(y, Xd[j], r.value, r.value)) adj.back().push_back(j);
        }
        auto mr = detail::max_matching(adj, static_cast<int>(Xd.size()));
        for (int j = 0; j < static_cast<int>(Xd.size()); ++j)
            if (mr[j] < 0) K.add(Xd[j]);
    }
    ExtRational check = interleaving_distance(R + K, X);
    if (!(check < ExtRational(eps + eps))) throw std::logic_error("retract_complement: bound not achieved");
    return K;
}

}  // namespace tpc
