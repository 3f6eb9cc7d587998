#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tpc/gf2.hpp"
#include "tpc/persistence.hpp"
#include "tpc/rational.hpp"

namespace tpc {

struct invalid_complex : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Generator {
    std::string name;
    int degree = 0;
    Rational level;
};

inline int reduce_mod(int d, int modulus) {
    if (modulus <= 0) return d;
    int r = d % modulus;
    return r < 0 ? r + modulus : r;
}

// Finite filtered chain complex over Z/2; d.cols[j] is the boundary of generator j.
class FilteredComplex {
public:
    int modulus = 0;
    int differential_degree = -1;
    std::vector<Generator> gens;
    gf2::Matrix d;

    FilteredComplex() = default;
    explicit FilteredComplex(int m) : modulus(m) {}

    std::size_t size() const { return gens.size(); }
    int norm(int deg) const { return reduce_mod(deg, modulus); }

    std::size_t add_generator(const std::string& name, int degree, const Rational& level) {
        gens.push_back({name, norm(degree), level});
        d.rows = gens.size();
        for (auto& c : d.cols) c.resize(gens.size());
        d.cols.emplace_back(gens.size());
        return gens.size() - 1;
    }

    // Adds `to` to the boundary of `from`.
    void add_entry(std::size_t from, std::size_t to) { d.flip(to, from); }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < gens.size(); ++i)
            if (gens[i].name == name) return i;
        throw invalid_complex("unknown generator: " + name);
    }

    gf2::Vec zero_vec() const { return gf2::Vec(size()); }
    gf2::Vec unit(std::size_t i) const { return gf2::unit(size(), i); }
    gf2::Vec boundary(const gf2::Vec& x) const { return d.apply(x); }

    std::optional<Rational> level_of(const gf2::Vec& x) const {
        std::optional<Rational> best;
        for (auto i = x.find_first(); i != gf2::Vec::npos; i = x.find_next(i))
            if (!best || gens[i].level > *best) best = gens[i].level;
        return best;
    }

    // Degree of a homogeneous vector; nullopt for zero, throws when inhomogeneous.
    std::optional<int> degree_of(const gf2::Vec& x) const {
        std::optional<int> deg;
        for (auto i = x.find_first(); i != gf2::Vec::npos; i = x.find_next(i)) {
            if (deg && *deg != gens[i].degree) throw invalid_complex("inhomogeneous chain");
            deg = gens[i].degree;
        }
        return deg;
    }

    void validate() const {
        if (d.rows != size() || d.ncols() != size()) throw invalid_complex("differential has wrong shape");
        std::set<std::string> names;
        for (const auto& g : gens)
            if (!names.insert(g.name).second) throw invalid_complex("duplicate generator name: " + g.name);
        for (std::size_t j = 0; j < size(); ++j) {
            const auto& c = d.cols[j];
            for (auto i = c.find_first(); i != gf2::Vec::npos; i = c.find_next(i)) {
                if (gens[i].level > gens[j].level)
                    throw invalid_complex("differential raises filtration at " + gens[j].name);
                if (gens[i].degree != norm(gens[j].degree + differential_degree))
                    throw invalid_complex("differential has wrong degree at " + gens[j].name);
            }
        }
        if (!(d * d).is_zero()) throw invalid_complex("d^2 != 0");
    }

    std::set<int> degrees() const {
        std::set<int> s;
        for (const auto& g : gens) s.insert(g.degree);
        return s;
    }
    std::set<Rational> levels() const {
        std::set<Rational> s;
        for (const auto& g : gens) s.insert(g.level);
        return s;
    }

    // Sigma^r raises every level by r.
    FilteredComplex shifted(const Rational& r) const {
        FilteredComplex c = *this;
        for (auto& g : c.gens) g.level = g.level + r;
        return c;
    }
    FilteredComplex translated(int t) const {
        FilteredComplex c = *this;
        for (auto& g : c.gens) g.degree = norm(g.degree + t);
        return c;
    }

    friend FilteredComplex direct_sum(const FilteredComplex& a, const FilteredComplex& b) {
        if (a.modulus != b.modulus || a.differential_degree != b.differential_degree)
            throw invalid_complex("grading mismatch in direct sum");
        FilteredComplex c = a;
        const std::size_t off = a.size();
        for (const auto& g : b.gens) {
            std::string name = g.name;
            while (std::any_of(c.gens.begin(), c.gens.end(), [&](const Generator& h) { return h.name == name; }))
                name += "'";
            c.add_generator(name, g.degree, g.level);
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto& col = b.d.cols[j];
            for (auto i = col.find_first(); i != gf2::Vec::npos; i = col.find_next(i)) c.add_entry(off + j, off + i);
        }
        return c;
    }

    static FilteredComplex E1(const Rational& level, int degree = 0, const std::string& name = "c") {
        FilteredComplex c;
        c.add_generator(name, degree, level);
        return c;
    }
    // Cone of b -> a: da = 0, db = a, |b| = |a| + 1.
    static FilteredComplex E2(const Rational& va, const Rational& vb, int degree_a = 0) {
        FilteredComplex c;
        c.add_generator("a", degree_a, va);
        c.add_generator("b", degree_a + 1, vb);
        c.add_entry(1, 0);
        return c;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["modulus"] = modulus;
        if (differential_degree != -1) j["differential_degree"] = differential_degree;
        j["generators"] = nlohmann::json::array();
        for (const auto& g : gens) j["generators"].push_back({{"name", g.name}, {"degree", g.degree}, {"level", g.level.str()}});
        j["differential"] = nlohmann::json::array();
        for (std::size_t col = 0; col < size(); ++col)
            for (auto i = d.cols[col].find_first(); i != gf2::Vec::npos; i = d.cols[col].find_next(i))
                j["differential"].push_back({{"from", gens[col].name}, {"to", gens[i].name}});
        return j;
    }

    static Rational level_from_json(const nlohmann::json& v) {
        if (v.is_string()) return Rational::parse(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
        if (v.is_number()) return Rational::parse(v.dump());
        throw invalid_complex("level must be a number or rational string");
    }

    static FilteredComplex from_json(const nlohmann::json& j) {
        FilteredComplex c(j.value("modulus", 0));
        c.differential_degree = j.value("differential_degree", -1);
        for (const auto& g : j.at("generators"))
            c.add_generator(g.at("name").get<std::string>(), g.value("degree", 0), level_from_json(g.at("level")));
        if (j.contains("differential"))
            for (const auto& e : j.at("differential"))
                c.add_entry(c.index_of(e.at("from").get<std::string>()), c.index_of(e.at("to").get<std::string>()));
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------
// Elementary decomposition

struct ElementaryDecomposition {
    struct Pair {
        gf2::Vec a, b;
        Rational va, vb;
        int degree = 0;
        std::size_t a_gen = 0, b_gen = 0;
        Rational length() const { return vb - va; }
    };
    struct Single {
        gf2::Vec c;
        Rational vc;
        int degree = 0;
        std::size_t gen = 0;
    };
    std::vector<Pair> pairs;
    std::vector<Single> singles;

    // Columns: a_0, b_0, a_1, b_1, ..., then the singles.
    gf2::Matrix basis(std::size_t n) const {
        gf2::Matrix m;
        m.rows = n;
        for (const auto& p : pairs) {
            m.cols.push_back(p.a);
            m.cols.push_back(p.b);
        }
        for (const auto& s : singles) m.cols.push_back(s.c);
        return m;
    }
};

// Generators sorted by (level, index).
inline std::vector<std::size_t> filtration_order(const FilteredComplex& C) {
    std::vector<std::size_t> ord(C.size());
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::size_t x, std::size_t y) { return C.gens[x].level < C.gens[y].level; });
    return ord;
}

inline ElementaryDecomposition decompose_elementary(const FilteredComplex& C) {
    C.validate();
    const std::size_t n = C.size();
    auto ord = filtration_order(C);
    // Internal row coordinate: n-1-position, so the filtration-maximal entry is the lowest set bit.
    std::vector<std::size_t> row_of(n), gen_of_row(n);
    for (std::size_t p = 0; p < n; ++p) {
        row_of[ord[p]] = n - 1 - p;
        gen_of_row[n - 1 - p] = ord[p];
    }
    auto to_rows = [&](const gf2::Vec& v) {
        gf2::Vec r(n);
        for (auto i = v.find_first(); i != gf2::Vec::npos; i = v.find_next(i)) r[row_of[i]] = true;
        return r;
    };
    auto from_rows = [&](const gf2::Vec& r) {
        gf2::Vec v(n);
        for (auto i = r.find_first(); i != gf2::Vec::npos; i = r.find_next(i)) v[gen_of_row[i]] = true;
        return v;
    };

    std::vector<gf2::Vec> R(n), V(n);
    std::vector<std::ptrdiff_t> owner(n, -1);
    std::vector<bool> is_low(n, false);
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t j = ord[p];
        R[j] = to_rows(C.d.cols[j]);
        V[j] = C.unit(j);
        while (R[j].any()) {
            auto low = R[j].find_first();
            if (owner[low] < 0) break;
            R[j] ^= R[owner[low]];
            V[j] ^= V[owner[low]];
        }
        if (R[j].any()) {
            auto low = R[j].find_first();
            owner[low] = static_cast<std::ptrdiff_t>(j);
            is_low[gen_of_row[low]] = true;
        }
    }

    ElementaryDecomposition dec;
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t j = ord[p];
        if (R[j].any()) {
            const std::size_t lg = gen_of_row[R[j].find_first()];
            dec.pairs.push_back({from_rows(R[j]), V[j], C.gens[lg].level, C.gens[j].level, C.gens[lg].degree, lg, j});
        } else if (!is_low[j]) {
            dec.singles.push_back({V[j], C.gens[j].level, C.gens[j].degree, j});
        }
    }
    return dec;
}

inline Barcode barcode_of(const ElementaryDecomposition& dec, int modulus) {
    Barcode B(modulus);
    for (const auto& p : dec.pairs) B.add(p.va, ExtRational(p.vb), p.degree);
    for (const auto& s : dec.singles) B.add(s.vc, ExtRational::infinity(), s.degree);
    return B.sorted();
}

inline Barcode homology_barcode(const FilteredComplex& C) { return barcode_of(decompose_elementary(C), C.modulus); }

// ---------------------------------------------------------------------------
// Filtered maps

struct FilteredMap {
    FilteredComplex source, target;
    gf2::Matrix matrix;  // cols indexed by source generators
    Rational shift;
    int degree = 0;

    FilteredMap() = default;
    FilteredMap(FilteredComplex s, FilteredComplex t, Rational sh = Rational(0), int deg = 0)
        : source(std::move(s)), target(std::move(t)), matrix(target.size(), source.size()), shift(sh), degree(deg) {}

    static FilteredMap identity(const FilteredComplex& C) {
        FilteredMap f(C, C);
        f.matrix = gf2::Matrix::identity(C.size());
        return f;
    }

    gf2::Vec apply(const gf2::Vec& x) const { return matrix.apply(x); }

    void validate() const {
        if (matrix.rows != target.size() || matrix.ncols() != source.size())
            throw invalid_complex("map matrix has wrong shape");
        for (std::size_t j = 0; j < source.size(); ++j) {
            const auto& c = matrix.cols[j];
            for (auto i = c.find_first(); i != gf2::Vec::npos; i = c.find_next(i)) {
                if (target.gens[i].level > source.gens[j].level + shift)
                    throw invalid_complex("map exceeds its declared shift at " + source.gens[j].name);
                if (target.gens[i].degree != target.norm(source.gens[j].degree + degree))
                    throw invalid_complex("map has wrong degree at " + source.gens[j].name);
            }
        }
        if (!(target.d * matrix == matrix * source.d)) throw invalid_complex("map is not a chain map");
    }
};

// target + Sigma^lambda source[1] with d(s) = d_S(s) + f(s).
inline FilteredComplex cone(const FilteredMap& f, const Rational& lambda) {
    if (f.degree != 0) throw invalid_complex("cone needs a degree-0 map");
    if (lambda < f.shift) throw invalid_complex("cone weight below the map shift");
    f.validate();
    FilteredComplex c = f.target;
    const std::size_t off = c.size();
    const int up = -f.source.differential_degree;
    for (const auto& g : f.source.gens) {
        std::string name = g.name + "^";
        while (std::any_of(c.gens.begin(), c.gens.end(), [&](const Generator& h) { return h.name == name; }))
            name += "'";
        c.add_generator(name, g.degree + up, g.level + lambda);
    }
    for (std::size_t j = 0; j < f.source.size(); ++j) {
        const auto& ds = f.source.d.cols[j];
        for (auto i = ds.find_first(); i != gf2::Vec::npos; i = ds.find_next(i)) c.add_entry(off + j, off + i);
        const auto& fj = f.matrix.cols[j];
        for (auto i = fj.find_first(); i != gf2::Vec::npos; i = fj.find_next(i)) c.add_entry(off + j, i);
    }
    c.validate();
    return c;
}

// Generator (i,j) is the map c_i -> d_j, with level v(d_j) - v(c_i); differential f -> d f + f d.
inline FilteredComplex internal_hom(const FilteredComplex& C, const FilteredComplex& D) {
    if (C.modulus != D.modulus || C.differential_degree != D.differential_degree)
        throw invalid_complex("grading mismatch in internal hom");
    FilteredComplex H(D.modulus);
    H.differential_degree = D.differential_degree;
    const std::size_t n = C.size(), m = D.size();
    auto idx = [&](std::size_t i, std::size_t j) { return i * m + j; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            H.add_generator("[" + C.gens[i].name + "," + D.gens[j].name + "]", D.gens[j].degree - C.gens[i].degree,
                            D.gens[j].level - C.gens[i].level);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const auto& dj = D.d.cols[j];
            for (auto k = dj.find_first(); k != gf2::Vec::npos; k = dj.find_next(k)) H.add_entry(idx(i, j), idx(i, k));
            for (std::size_t l = 0; l < n; ++l)
                if (C.d.cols[l][i]) H.add_entry(idx(i, j), idx(l, j));
        }
    H.validate();
    return H;
}

// ---------------------------------------------------------------------------
// Truncation V_delta

struct Truncation {
    FilteredComplex complex;
    gf2::Matrix projection;  // C -> V
    gf2::Matrix section;     // V -> C
};

inline Truncation truncate(const FilteredComplex& C, const Rational& delta) {
    if (delta.sign() < 0) throw std::invalid_argument("truncate: negative delta");
    auto dec = decompose_elementary(C);
    const std::size_t n = C.size();
    const gf2::Matrix M = dec.basis(n);
    const gf2::Matrix Minv = gf2::inverse(M);

    Truncation t;
    t.complex = FilteredComplex(C.modulus);
    t.complex.differential_degree = C.differential_degree;
    std::vector<std::size_t> kept;  // basis column indices
    t.section.rows = n;
    for (std::size_t p = 0; p < dec.pairs.size(); ++p) {
        const auto& pr = dec.pairs[p];
        if (!(pr.length() > delta)) continue;
        auto ia = t.complex.add_generator(C.gens[pr.a_gen].name, pr.degree, pr.va);
        auto ib = t.complex.add_generator(C.gens[pr.b_gen].name, C.gens[pr.b_gen].degree, pr.vb);
        t.complex.add_entry(ib, ia);
        kept.push_back(2 * p);
        kept.push_back(2 * p + 1);
        t.section.cols.push_back(pr.a);
        t.section.cols.push_back(pr.b);
    }
    for (std::size_t s = 0; s < dec.singles.size(); ++s) {
        const auto& sg = dec.singles[s];
        t.complex.add_generator(C.gens[sg.gen].name, sg.degree, sg.vc);
        kept.push_back(2 * dec.pairs.size() + s);
        t.section.cols.push_back(sg.c);
    }
    t.projection = gf2::Matrix(kept.size(), n);
    for (std::size_t g = 0; g < n; ++g)
        for (std::size_t r = 0; r < kept.size(); ++r)
            if (Minv.cols[g][kept[r]]) t.projection.set(r, g);
    return t;
}

inline FilteredComplex minimal_model(const FilteredComplex& C) { return truncate(C, Rational(0)).complex; }

// ---------------------------------------------------------------------------
// Cone decompositions

struct ConeStep {
    std::string name;
    Rational alpha;       // filtration shift of the attached generator
    int translation = 0;  // degree of the attached sphere; the new generator sits one degree up
    Rational weight;
    gf2::Vec attaching;   // cycle in the complex before this step
};

struct ConeDecomposition {
    FilteredComplex start, end;
    std::vector<ConeStep> steps;

    std::size_t length() const { return steps.size(); }
    Rational total_weight() const {
        Rational w(0);
        for (const auto& s : steps) w = w + s.weight;
        return w;
    }

    FilteredComplex replay() const {
        FilteredComplex A = start;
        for (const auto& s : steps) {
            if (s.attaching.size() != A.size()) throw invalid_complex("attaching map has wrong size");
            if (A.boundary(s.attaching).any()) throw invalid_complex("attaching map is not a cycle");
            auto lv = A.level_of(s.attaching);
            if (lv && *lv > s.alpha) throw invalid_complex("attaching map is not filtered");
            auto dg = A.degree_of(s.attaching);
            if (dg && *dg != A.norm(s.translation)) throw invalid_complex("attaching map has wrong degree");
            auto j = A.add_generator(s.name, s.translation - A.differential_degree, s.alpha + s.weight);
            for (auto i = s.attaching.find_first(); i != gf2::Vec::npos; i = s.attaching.find_next(i)) A.add_entry(j, i);
        }
        A.validate();
        return A;
    }
};

enum class ConeMode { to_target, to_zero };

struct ConeLengthResult {
    std::size_t value = 0;
    ConeDecomposition decomposition;
};

inline std::size_t cone_length_formula(const Barcode& B, const Rational& eps) {
    std::size_t inf = 0;
    for (const auto& b : B.bars) inf += b.infinite() ? 1 : 0;
    return 2 * bar_count(B, eps + eps, CountMode::all) - inf;
}

inline gf2::Vec padded(const gf2::Vec& v, std::size_t n) {
    gf2::Vec w = v;
    w.resize(n);
    return w;
}

inline ConeLengthResult cone_length(const FilteredComplex& C, const Rational& eps, ConeMode mode) {
    if (eps.sign() < 0) throw std::invalid_argument("cone_length: negative epsilon");
    ConeLengthResult res;
    res.value = cone_length_formula(homology_barcode(C), eps);
    auto& dec = res.decomposition;
    const int up = -C.differential_degree;
    if (mode == ConeMode::to_target) {
        auto V = truncate(C, eps + eps).complex;
        dec.start = FilteredComplex(C.modulus);
        dec.start.differential_degree = C.differential_degree;
        // Generators of V in filtration order; a boundary always precedes its source.
        auto ord = filtration_order(V);
        std::stable_sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) {
            if (V.gens[x].level != V.gens[y].level) return V.gens[x].level < V.gens[y].level;
            return V.d.cols[x].none() && V.d.cols[y].any();
        });
        std::vector<std::size_t> pos(V.size());
        for (std::size_t k = 0; k < ord.size(); ++k) {
            const auto g = ord[k];
            gf2::Vec att(k);
            for (auto i = V.d.cols[g].find_first(); i != gf2::Vec::npos; i = V.d.cols[g].find_next(i)) att[pos[i]] = true;
            dec.steps.push_back({V.gens[g].name, V.gens[g].level, V.gens[g].degree - up, Rational(0), att});
            pos[g] = k;
        }
    } else {
        dec.start = C;
        auto d = decompose_elementary(C);
        std::size_t n = C.size();
        for (const auto& s : d.singles) {
            dec.steps.push_back({C.gens[s.gen].name + "^k", s.vc, s.degree, Rational(0), padded(s.c, n)});
            ++n;
        }
        for (const auto& p : d.pairs) {
            if (!(p.length() > eps + eps)) continue;
            dec.steps.push_back({C.gens[p.a_gen].name + "^k", p.va, p.degree, Rational(0), padded(p.a, n)});
            const std::size_t a_prime = n++;
            gf2::Vec att = padded(p.b, n);
            att[a_prime] = true;
            dec.steps.push_back({C.gens[p.b_gen].name + "^k", p.vb, C.gens[p.b_gen].degree, Rational(0), att});
            ++n;
        }
    }
    dec.end = dec.replay();
    return res;
}

// ---------------------------------------------------------------------------
// Cone-attachment search

struct SearchSpace {
    std::vector<Rational> alphas;
    std::vector<int> translations;
};

// Filtered degree-0 chain maps Sigma^alpha T^t G -> A, all of them (small complexes only).
inline std::vector<gf2::Matrix> enumerate_chain_maps(const FilteredComplex& G, const FilteredComplex& A) {
    std::vector<std::vector<gf2::Vec>> options(G.size());
    for (std::size_t g = 0; g < G.size(); ++g) {
        std::vector<std::size_t> allowed;
        for (std::size_t i = 0; i < A.size(); ++i)
            if (A.gens[i].degree == G.gens[g].degree && !(A.gens[i].level > G.gens[g].level)) allowed.push_back(i);
        if (allowed.size() > 16) throw std::length_error("map enumeration too large");
        for (std::size_t mask = 0; mask < (std::size_t(1) << allowed.size()); ++mask) {
            gf2::Vec v(A.size());
            for (std::size_t b = 0; b < allowed.size(); ++b)
                if (mask >> b & 1) v[allowed[b]] = true;
            options[g].push_back(v);
        }
    }
    std::vector<gf2::Matrix> out;
    gf2::Matrix m(A.size(), G.size());
    std::function<void(std::size_t)> rec = [&](std::size_t g) {
        if (g == G.size()) {
            if (A.d * m == m * G.d) out.push_back(m);
            return;
        }
        for (const auto& v : options[g]) {
            m.cols[g] = v;
            rec(g + 1);
        }
    };
    rec(0);
    return out;
}

inline std::string barcode_key(const Barcode& B) { return B.sorted().to_json().dump(); }

// Fewest attachments of cones over Sigma^alpha T^t G, starting from `start`, reaching a complex accepted by `done`.
inline std::optional<std::size_t> search_cone_attachments(const FilteredComplex& start, const FilteredComplex& G,
                                                           const SearchSpace& space,
                                                           const std::function<bool(const Barcode&)>& done,
                                                           std::size_t max_depth) {
    std::vector<FilteredComplex> frontier{minimal_model(start)};
    std::set<std::string> seen{barcode_key(homology_barcode(frontier[0]))};
    if (done(homology_barcode(frontier[0]))) return 0;
    for (std::size_t depth = 1; depth <= max_depth; ++depth) {
        std::vector<FilteredComplex> next;
        for (const auto& A : frontier) {
            for (const auto& alpha : space.alphas)
                for (int t : space.translations) {
                    FilteredComplex F = G.shifted(alpha).translated(t);
                    F.modulus = A.modulus;
                    for (auto& g : F.gens) g.degree = F.norm(g.degree);
                    for (const auto& m : enumerate_chain_maps(F, A)) {
                        FilteredMap f(F, A);
                        f.matrix = m;
                        auto K = minimal_model(cone(f, Rational(0)));
                        auto B = homology_barcode(K);
                        if (!seen.insert(barcode_key(B)).second) continue;
                        if (done(B)) return depth;
                        next.push_back(std::move(K));
                    }
                }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return std::nullopt;
}

inline std::vector<Rational> unique_sorted(std::vector<Rational> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Cone-length by exhaustive search over attachments of shifted/translated k (levels from the instance, +-eps).
inline std::optional<std::size_t> brute_force_cone_length(const FilteredComplex& C, const Rational& eps, ConeMode mode,
                                                          std::size_t max_depth,
                                                          const std::vector<Rational>& extra_levels = {}) {
    auto k = FilteredComplex::E1(Rational(0), 0, "k");
    k.modulus = C.modulus;
    k.differential_degree = C.differential_degree;
    SearchSpace space;
    for (const auto& l : C.levels()) {
        space.alphas.push_back(l);
        space.alphas.push_back(l - eps);
        space.alphas.push_back(l + eps);
    }
    for (const auto& l : extra_levels) space.alphas.push_back(l);
    space.alphas = unique_sorted(space.alphas);
    std::set<int> ts;
    for (int dg : C.degrees()) {
        ts.insert(C.norm(dg));
        ts.insert(C.norm(dg + C.differential_degree));
    }
    space.translations.assign(ts.begin(), ts.end());
    const Barcode target = homology_barcode(C);
    FilteredComplex start = mode == ConeMode::to_target ? FilteredComplex(C.modulus) : C;
    start.differential_degree = C.differential_degree;
    const Barcode goal = mode == ConeMode::to_target ? target : Barcode(C.modulus);
    return search_cone_attachments(
        start, k, space, [&](const Barcode& B) { return detail::ab_feasible(B, goal, eps, eps); },
        max_depth);
}

// ---------------------------------------------------------------------------
// Retract cone-length relative to a generator

struct RetractBracket {
    std::size_t lower = 0;
    std::optional<std::size_t> upper;
};

inline Rational coefficient_k(const FilteredComplex& G) {
    auto n = cone_length_formula(homology_barcode(internal_hom(G, G)), Rational(0));
    if (n == 0) throw invalid_complex("generator has trivial endomorphisms");
    return Rational(1, static_cast<std::int64_t>(n));
}

inline SearchSpace retract_search_space(const FilteredComplex& A, const FilteredComplex& G, const Rational& eps) {
    SearchSpace s;
    for (const auto& a : A.gens)
        for (const auto& g : G.gens) {
            s.alphas.push_back(a.level - g.level);
            s.alphas.push_back(a.level - g.level - eps);
            s.alphas.push_back(a.level - g.level + eps);
        }
    s.alphas = unique_sorted(s.alphas);
    std::set<int> ts;
    for (const auto& a : A.gens)
        for (const auto& g : G.gens) {
            ts.insert(A.norm(a.degree - g.degree));
            ts.insert(A.norm(a.degree - g.degree + A.differential_degree));
        }
    s.translations.assign(ts.begin(), ts.end());
    return s;
}

inline std::optional<std::size_t> retract_cone_length_search(const FilteredComplex& A, const FilteredComplex& G,
                                                             const Rational& eps, std::size_t budget,
                                                             const std::vector<Rational>& extra_alphas = {}) {
    auto space = retract_search_space(A, G, eps);
    for (const auto& x : extra_alphas) space.alphas.push_back(x);
    space.alphas = unique_sorted(space.alphas);
    const Barcode BA = homology_barcode(A);
    FilteredComplex zero(A.modulus);
    zero.differential_degree = A.differential_degree;
    return search_cone_attachments(
        zero, G, space, [&](const Barcode& B) { return detail::retract_feasible(BA, B, eps); }, budget);
}

inline RetractBracket retract_cone_length_over(const FilteredComplex& A, const FilteredComplex& G, const Rational& eps,
                                               std::size_t budget) {
    RetractBracket r;
    const Rational k = coefficient_k(G);
    const auto bars = bar_count(homology_barcode(internal_hom(G, A)), eps + eps, CountMode::all);
    const Rational lb = k * Rational(static_cast<std::int64_t>(bars));
    r.lower = static_cast<std::size_t>(lb.ceil());
    r.upper = retract_cone_length_search(A, G, eps, budget);
    return r;
}

// ---------------------------------------------------------------------------
// Perturbation retract

struct StabilityReduction {
    FilteredComplex retract;  // (C_k, D_k)
    gf2::Matrix projection;   // C -> C_k
    gf2::Matrix section;      // C_k -> C
    std::size_t before = 0;   // bar count of H(C,d) above eps
    std::size_t after = 0;    // bar count of H(C,D) above eps
};

inline std::size_t count_above(const FilteredComplex& C, const Rational& eps) {
    return bar_count(homology_barcode(C), eps, CountMode::all);
}

// C carries D = d + Dp; pairs of (C,d) shorter than delta are eliminated one by one.
inline StabilityReduction stability_reduce(const FilteredComplex& C, const gf2::Matrix& d_part,
                                           const gf2::Matrix& D_prime, const Rational& delta, const Rational& eps) {
    C.validate();
    const std::size_t n = C.size();
    if (!(d_part + D_prime == C.d)) throw invalid_complex("differential is not d + D'");
    if (!(eps < delta)) throw std::invalid_argument("stability_reduce: need eps < delta");
    for (std::size_t j = 0; j < n; ++j)
        for (auto i = D_prime.cols[j].find_first(); i != gf2::Vec::npos; i = D_prime.cols[j].find_next(i))
            if (C.gens[i].level > C.gens[j].level - delta) throw invalid_complex("D' does not drop filtration by delta");
    FilteredComplex Cd = C;
    Cd.d = d_part;
    Cd.validate();

    auto dec = decompose_elementary(Cd);
    const gf2::Matrix M = dec.basis(n);
    const gf2::Matrix Minv = gf2::inverse(M);
    gf2::Matrix Dp = Minv * D_prime * M;  // in the elementary basis
    const std::size_t np = dec.pairs.size();
    std::vector<Rational> lv(n);
    std::vector<int> dg(n);
    std::vector<std::string> names(n);
    for (std::size_t p = 0; p < np; ++p) {
        lv[2 * p] = dec.pairs[p].va;
        lv[2 * p + 1] = dec.pairs[p].vb;
        dg[2 * p] = dec.pairs[p].degree;
        dg[2 * p + 1] = C.gens[dec.pairs[p].b_gen].degree;
        names[2 * p] = C.gens[dec.pairs[p].a_gen].name;
        names[2 * p + 1] = C.gens[dec.pairs[p].b_gen].name;
    }
    for (std::size_t s = 0; s < dec.singles.size(); ++s) {
        lv[2 * np + s] = dec.singles[s].vc;
        dg[2 * np + s] = dec.singles[s].degree;
        names[2 * np + s] = C.gens[dec.singles[s].gen].name;
    }
    std::vector<gf2::Vec> sec = M.cols;  // section images in C coordinates
    gf2::Matrix P = Minv;                // projection, rows over elementary indices
    std::vector<bool> active(n, true);

    std::vector<std::size_t> short_pairs;
    for (std::size_t p = 0; p < np; ++p)
        if (dec.pairs[p].length() < delta) short_pairs.push_back(p);
    std::stable_sort(short_pairs.begin(), short_pairs.end(),
                     [&](std::size_t x, std::size_t y) { return dec.pairs[x].length() < dec.pairs[y].length(); });
    for (std::size_t p : short_pairs) {
        const std::size_t a0 = 2 * p, b0 = 2 * p + 1;
        const gf2::Vec w = Dp.cols[b0];
        if (w[a0] || w[b0]) throw invalid_complex("perturbation hits the eliminated pair");
        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == a0 || x == b0) continue;
            if (Dp.cols[x][a0]) sec[x] ^= sec[b0];
        }
        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == a0 || x == b0) continue;
            auto& col = Dp.cols[x];
            if (col[a0]) {
                col[a0] = false;
                col ^= w;
            }
            col[b0] = false;
        }
        for (auto& col : P.cols) {
            if (col[a0]) {
                col[a0] = false;
                col ^= w;
            }
            col[b0] = false;
        }
        active[a0] = active[b0] = false;
    }

    StabilityReduction out;
    out.retract = FilteredComplex(C.modulus);
    out.retract.differential_degree = C.differential_degree;
    std::vector<std::size_t> act, where(n, 0);
    for (std::size_t x = 0; x < n; ++x)
        if (active[x]) {
            where[x] = act.size();
            act.push_back(x);
            out.retract.add_generator(names[x], dg[x], lv[x]);
        }
    for (std::size_t k = 0; k < act.size(); ++k) {
        const std::size_t x = act[k];
        if (x < 2 * np && x % 2 == 1) out.retract.add_entry(k, where[x - 1]);
        const auto& col = Dp.cols[x];
        for (auto i = col.find_first(); i != gf2::Vec::npos; i = col.find_next(i)) {
            if (!active[i]) throw invalid_complex("retract differential leaves the retract");
            out.retract.add_entry(k, where[i]);
        }
    }
    out.retract.validate();
    out.section.rows = n;
    for (std::size_t x : act) out.section.cols.push_back(sec[x]);
    out.projection = gf2::Matrix(act.size(), n);
    for (std::size_t g = 0; g < n; ++g)
        for (std::size_t k = 0; k < act.size(); ++k)
            if (P.cols[g][act[k]]) out.projection.set(k, g);
    out.before = count_above(Cd, eps);
    out.after = count_above(C, eps);
    return out;
}

// Thresholds where bar counts of either complex can change, restricted below delta.
inline std::vector<Rational> count_thresholds(const FilteredComplex& C, const gf2::Matrix& d_part, const Rational& delta) {
    FilteredComplex Cd = C;
    Cd.d = d_part;
    std::vector<Rational> out{Rational(0)};
    for (const FilteredComplex* X : std::array<const FilteredComplex*, 2>{&C, &Cd})
        for (const auto& b : homology_barcode(*X).bars)
            if (!b.infinite() && b.length().value < delta) out.push_back(b.length().value);
    return unique_sorted(out);
}

// ---------------------------------------------------------------------------
// Reach gap

// inf{s >= r : the class of w at level s lies in the image of H(f) at level s}.
inline ExtRational reach_gap(const gf2::Vec& w, const Rational& r, const FilteredMap& f) {
    f.validate();
    const auto& T = f.target;
    const auto& S = f.source;
    if (w.size() != T.size()) throw invalid_complex("class has wrong size");
    if (T.boundary(w).any()) throw invalid_complex("w is not a cycle");
    auto lw = T.level_of(w);
    if (lw && *lw > r) throw invalid_complex("w does not lie at level r");
    if (w.none()) return ExtRational(r);

    std::vector<Rational> cand{r};
    for (const auto& g : T.gens)
        if (g.level > r) cand.push_back(g.level);
    for (const auto& g : S.gens)
        if (g.level + f.shift > r) cand.push_back(g.level + f.shift);
    cand = unique_sorted(cand);

    for (const auto& s : cand) {
        gf2::Span span(T.size());
        std::vector<std::size_t> src;
        for (std::size_t j = 0; j < S.size(); ++j)
            if (!(S.gens[j].level > s - f.shift)) src.push_back(j);
        gf2::Matrix dsub(S.size(), src.size());
        for (std::size_t k = 0; k < src.size(); ++k) dsub.cols[k] = S.d.cols[src[k]];
        for (const auto& z : gf2::kernel(dsub)) {
            gf2::Vec full(S.size());
            for (auto k = z.find_first(); k != gf2::Vec::npos; k = z.find_next(k)) full[src[k]] = true;
            span.add(f.apply(full));
        }
        for (std::size_t j = 0; j < T.size(); ++j)
            if (!(T.gens[j].level > s)) span.add(T.d.cols[j]);
        if (span.contains(w)) return ExtRational(s);
    }
    return ExtRational::infinity();
}

}  // namespace tpc
