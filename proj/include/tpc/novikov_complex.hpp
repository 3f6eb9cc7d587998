#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tpc/filtered_complex.hpp"
#include "tpc/gf2.hpp"
#include "tpc/novikov.hpp"
#include "tpc/rational.hpp"

namespace tpc {

// Sparse vector over the Novikov field, indexed by generator.
using LambdaVec = std::map<std::size_t, NovikovElement>;

namespace lambda {

// l(v) = max_i (level_i - val v_i); nullopt for zero.
inline std::optional<Rational> level_of(const LambdaVec& v, const std::vector<Rational>& levels) {
    std::optional<Rational> best;
    for (const auto& [i, c] : v) {
        if (c.is_zero()) continue;
        Rational l = levels[i] - c.valuation().value;
        if (!best || l > *best) best = l;
    }
    return best;
}

// Leading entry: lexicographic max of (level_i - val v_i, i).
inline std::optional<std::pair<Rational, std::size_t>> lead(const LambdaVec& v, const std::vector<Rational>& levels) {
    std::optional<std::pair<Rational, std::size_t>> best;
    for (const auto& [i, c] : v) {
        if (c.is_zero()) continue;
        std::pair<Rational, std::size_t> key{levels[i] - c.valuation().value, i};
        if (!best || key.first > best->first || (key.first == best->first && key.second > best->second)) best = key;
    }
    return best;
}

// Drops every term whose level falls to the floor or below; reports whether anything was dropped.
inline bool cut(LambdaVec& v, const std::vector<Rational>& levels, const Rational& floor) {
    bool dropped = false;
    for (auto it = v.begin(); it != v.end();) {
        const Rational bound = levels[it->first] - floor;  // keep exponents < bound
        std::vector<Rational> keep;
        for (const auto& e : it->second.terms())
            if (e < bound) keep.push_back(e);
            else dropped = true;
        if (keep.empty()) it = v.erase(it);
        else {
            it->second = NovikovElement::from_exponents(std::move(keep));
            ++it;
        }
    }
    return dropped;
}

// v += T^s w
inline void add_shifted(LambdaVec& v, const LambdaVec& w, const Rational& s) {
    for (const auto& [i, c] : w) {
        auto it = v.find(i);
        auto term = c.shifted(s);
        if (it == v.end()) v.emplace(i, term);
        else {
            it->second = it->second + term;
            if (it->second.is_zero()) v.erase(it);
        }
    }
}

inline LambdaVec apply(const std::vector<LambdaVec>& cols, const LambdaVec& x) {
    LambdaVec out;
    for (const auto& [j, c] : x)
        for (const auto& [i, e] : cols[j]) {
            auto t = c * e;
            auto it = out.find(i);
            if (it == out.end()) {
                if (!t.is_zero()) out.emplace(i, t);
            } else {
                it->second = it->second + t;
                if (it->second.is_zero()) out.erase(it);
            }
        }
    return out;
}

// Reduction of a Lambda-linear map so that the reduced images have distinct leading rows.
// The tracked domain vectors stay an orthogonal basis with unchanged levels.
struct Reduction {
    std::vector<Rational> src_levels, tgt_levels;
    std::vector<LambdaVec> domain;  // y_j over source generators
    std::vector<LambdaVec> image;   // D y_j over target generators
    std::map<std::size_t, std::size_t> owner;  // leading row -> column
    Rational floor;
    bool truncated = false;

    bool pivot(std::size_t j) const { return !image[j].empty(); }
    std::size_t rank() const { return owner.size(); }
    // l(y_j) - l(D y_j)
    Rational length(std::size_t j) const { return src_levels[j] - *level_of(image[j], tgt_levels); }

    // A preimage of minimal level, if b lies in the image.
    std::optional<LambdaVec> preimage(LambdaVec b) const {
        truncated_preimage = false;
        LambdaVec z;
        if (cut(b, tgt_levels, floor)) truncated_preimage = true;
        while (!b.empty()) {
            auto ld = lead(b, tgt_levels);
            auto it = owner.find(ld->second);
            if (it == owner.end()) return std::nullopt;
            const std::size_t k = it->second;
            const Rational s = b.at(ld->second).valuation().value - image[k].at(ld->second).valuation().value;
            add_shifted(b, image[k], s);
            add_shifted(z, domain[k], s);
            if (cut(b, tgt_levels, floor)) truncated_preimage = true;
        }
        return z;
    }
    mutable bool truncated_preimage = false;
};

// cols[j] is the image of source generator j. Terms below `floor` in level are discarded.
inline Reduction reduce(const std::vector<Rational>& src_levels, const std::vector<Rational>& tgt_levels,
                        const std::vector<LambdaVec>& cols, const Rational& floor) {
    Reduction R;
    R.src_levels = src_levels;
    R.tgt_levels = tgt_levels;
    R.floor = floor;
    R.image = cols;
    R.domain.resize(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        R.domain[j][j] = NovikovElement::one();
        if (cut(R.image[j], tgt_levels, floor)) R.truncated = true;
    }
    std::vector<std::size_t> work(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) work[j] = cols.size() - 1 - j;
    while (!work.empty()) {
        std::size_t j = work.back();
        work.pop_back();
        while (!R.image[j].empty()) {
            auto ld = lead(R.image[j], tgt_levels);
            const std::size_t row = ld->second;
            auto it = R.owner.find(row);
            if (it == R.owner.end()) {
                R.owner[row] = j;
                break;
            }
            std::size_t k = it->second;
            // Reduce the longer column by the shorter one.
            if (R.length(j) < R.length(k)) {
                it->second = j;
                std::swap(j, k);
            }
            const Rational s = R.image[j].at(row).valuation().value - R.image[k].at(row).valuation().value;
            add_shifted(R.image[j], R.image[k], s);
            add_shifted(R.domain[j], R.domain[k], s);
            if (cut(R.image[j], tgt_levels, floor)) R.truncated = true;
        }
    }
    return R;
}

}  // namespace lambda

// ---------------------------------------------------------------------------
// Floer-type complexes over the Novikov field

class FloerComplex {
public:
    int modulus = 0;
    std::vector<Generator> gens;
    std::vector<LambdaVec> d;  // d[j] = boundary of generator j

    FloerComplex() = default;
    explicit FloerComplex(int m) : modulus(m) {}

    std::size_t size() const { return gens.size(); }
    int norm(int deg) const { return reduce_mod(deg, modulus); }

    std::size_t add_generator(const std::string& name, int degree, const Rational& level) {
        gens.push_back({name, norm(degree), level});
        d.emplace_back();
        return gens.size() - 1;
    }
    void add_entry(std::size_t from, std::size_t to, const NovikovElement& c) {
        auto& col = d[from];
        auto it = col.find(to);
        if (it == col.end()) {
            if (!c.is_zero()) col.emplace(to, c);
        } else {
            it->second = it->second + c;
            if (it->second.is_zero()) col.erase(it);
        }
    }
    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < gens.size(); ++i)
            if (gens[i].name == name) return i;
        throw invalid_complex("unknown generator: " + name);
    }
    std::vector<Rational> levels() const {
        std::vector<Rational> v;
        for (const auto& g : gens) v.push_back(g.level);
        return v;
    }

    void validate() const {
        for (std::size_t j = 0; j < size(); ++j)
            for (const auto& [i, c] : d[j]) {
                if (i >= size()) throw invalid_complex("differential entry out of range");
                if (gens[i].degree != norm(gens[j].degree - 1))
                    throw invalid_complex("differential has wrong degree at " + gens[j].name);
                if (gens[i].level - c.valuation().value > gens[j].level)
                    throw invalid_complex("differential increases action at " + gens[j].name);
            }
        for (std::size_t j = 0; j < size(); ++j) {
            auto dd = lambda::apply(d, d[j]);
            for (const auto& [i, c] : dd)
                if (!c.is_zero()) throw invalid_complex("d^2 != 0 at " + gens[j].name);
        }
    }

    // Least filtration drop l(x) - l(c y) over all nonzero entries; nullopt when d = 0.
    std::optional<Rational> min_filtration_drop() const {
        std::optional<Rational> best;
        for (std::size_t j = 0; j < size(); ++j)
            for (const auto& [i, c] : d[j]) {
                Rational drop = gens[j].level - (gens[i].level - c.valuation().value);
                if (!best || drop < *best) best = drop;
            }
        return best;
    }

    // T = 1 specialization: each entry becomes its number of terms mod 2.
    gf2::Matrix at_one() const {
        gf2::Matrix m(size(), size());
        for (std::size_t j = 0; j < size(); ++j)
            for (const auto& [i, c] : d[j])
                if (c.size() % 2 == 1) m.set(i, j);
        return m;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["modulus"] = modulus;
        j["generators"] = nlohmann::json::array();
        for (const auto& g : gens) j["generators"].push_back({{"name", g.name}, {"degree", g.degree}, {"level", g.level.str()}});
        j["differential"] = nlohmann::json::array();
        for (std::size_t col = 0; col < size(); ++col)
            for (const auto& [i, c] : d[col])
                j["differential"].push_back({{"from", gens[col].name}, {"to", gens[i].name}, {"coefficient", c.str()}});
        return j;
    }
    static FloerComplex from_json(const nlohmann::json& j) {
        FloerComplex c(j.value("modulus", 0));
        for (const auto& g : j.at("generators"))
            c.add_generator(g.at("name").get<std::string>(), g.value("degree", 0),
                            FilteredComplex::level_from_json(g.at("level")));
        if (j.contains("differential"))
            for (const auto& e : j.at("differential")) {
                NovikovElement coef = NovikovElement::one();
                if (e.contains("coefficient")) {
                    const auto& cj = e.at("coefficient");
                    coef = cj.is_string() ? NovikovElement::parse(cj.get<std::string>()) : NovikovElement::from_json(cj);
                }
                c.add_entry(c.index_of(e.at("from").get<std::string>()), c.index_of(e.at("to").get<std::string>()), coef);
            }
        c.validate();
        return c;
    }

    // Filtered Z/2 complex seen as a Floer complex with monomial-free coefficients.
    static FloerComplex from_filtered(const FilteredComplex& C) {
        FloerComplex F(C.modulus);
        for (const auto& g : C.gens) F.add_generator(g.name, g.degree, g.level);
        for (std::size_t j = 0; j < C.size(); ++j)
            for (auto i = C.d.cols[j].find_first(); i != gf2::Vec::npos; i = C.d.cols[j].find_next(i))
                F.add_entry(j, i, NovikovElement::one());
        return F;
    }
};

struct ConciseBar {
    int degree = 0;  // degree of the boundary end
    Rational length;
};

// Bars all start at 0; zero-length pairs are kept so that 2|finite| + |infinite| = generator count.
struct ConciseBarcode {
    int modulus = 0;
    std::vector<ConciseBar> finite;
    std::map<int, std::size_t> infinite;
    bool truncated = false;

    std::size_t infinite_count() const {
        std::size_t n = 0;
        for (const auto& [d, k] : infinite) n += k;
        return n;
    }
    std::size_t count_above(const Rational& delta) const {
        std::size_t n = infinite_count();
        for (const auto& b : finite)
            if (b.length > delta) ++n;
        return n;
    }
    std::vector<Rational> lengths() const {
        std::vector<Rational> v;
        for (const auto& b : finite) v.push_back(b.length);
        std::sort(v.begin(), v.end());
        return v;
    }
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["modulus"] = modulus;
        j["finite"] = nlohmann::json::array();
        auto f = finite;
        std::sort(f.begin(), f.end(), [](const ConciseBar& a, const ConciseBar& b) {
            return a.degree != b.degree ? a.degree < b.degree : a.length < b.length;
        });
        for (const auto& b : f) j["finite"].push_back({{"degree", b.degree}, {"length", b.length.str()}});
        j["infinite"] = nlohmann::json::object();
        for (const auto& [d, k] : infinite) j["infinite"][std::to_string(d)] = k;
        if (truncated) j["truncated"] = true;
        return j;
    }
};

inline Rational working_floor(const std::vector<Rational>& levels, const Rational& precision) {
    Rational lo(0);
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (i == 0 || levels[i] < lo) lo = levels[i];
    return lo - precision;
}

inline lambda::Reduction reduce_complex(const FloerComplex& C, const Rational& precision) {
    auto lv = C.levels();
    return lambda::reduce(lv, lv, C.d, working_floor(lv, precision));
}

inline ConciseBarcode concise_barcode(const FloerComplex& C, const Rational& precision = default_precision()) {
    C.validate();
    auto R = reduce_complex(C, precision);
    ConciseBarcode B;
    B.modulus = C.modulus;
    B.truncated = R.truncated;
    std::map<int, std::size_t> dims, rank_out, rank_in;
    for (const auto& g : C.gens) ++dims[g.degree];
    for (std::size_t j = 0; j < C.size(); ++j) {
        if (!R.pivot(j)) continue;
        const int low = C.norm(C.gens[j].degree - 1);
        B.finite.push_back({low, R.length(j)});
        ++rank_out[C.gens[j].degree];
        ++rank_in[low];
    }
    for (const auto& [deg, n] : dims) {
        const std::size_t inf = n - rank_out[deg] - rank_in[deg];
        if (inf > 0) B.infinite[deg] = inf;
    }
    return B;
}

inline std::size_t bar_count_at(const FloerComplex& C, const Rational& delta,
                                 const Rational& precision = default_precision()) {
    if (delta.sign() < 0) throw std::invalid_argument("bar_count_at: negative delta");
    return concise_barcode(C, precision).count_above(delta);
}

inline Rational boundary_depth(const FloerComplex& C, const Rational& precision = default_precision()) {
    Rational best(0);
    for (const auto& b : concise_barcode(C, precision).finite)
        if (b.length > best) best = b.length;
    return best;
}

inline std::size_t homology_rank_at_one(const FloerComplex& C) {
    return C.size() - 2 * gf2::rank(C.at_one());
}

}  // namespace tpc
