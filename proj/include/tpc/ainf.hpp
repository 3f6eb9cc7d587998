#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tpc/novikov.hpp"
#include "tpc/novikov_complex.hpp"
#include "tpc/rational.hpp"

namespace tpc {

struct coverage_gap : std::runtime_error {
    std::vector<std::string> tuple;
    coverage_gap(const std::string& what, std::vector<std::string> t)
        : std::runtime_error(what), tuple(std::move(t)) {}
};

struct invalid_category : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Tabulated filtered A-infinity categories over the Novikov field (Z/2 coefficients)

struct AObject {
    std::string name;
    std::string base;  // objects with equal base differ by a shift
    Rational shift;
    int grading = 0;
};

struct AGen {
    std::string name;
    std::size_t source = 0, target = 0;
    int degree = 0;
    Rational level;
};

// mu_d is tabulated on explicit tuples, by strict unit rules, and by named rules.
// A tuple is covered when one of these determines its value; everything else is a gap.
class TabulatedAInfCategory {
public:
    using Rule = std::function<std::optional<LambdaVec>(const TabulatedAInfCategory&, const std::vector<std::size_t>&)>;
    struct NamedRule {
        std::string name;
        Rule rule;
    };

    int modulus = 2;
    int n = 0;  // offset in the Hochschild grading
    std::vector<AObject> objects;
    std::vector<AGen> gens;
    std::vector<std::optional<std::size_t>> units;
    std::map<std::vector<std::size_t>, LambdaVec> table;
    std::vector<NamedRule> rules;
    std::optional<std::size_t> complete_through;  // untabulated tuples of order <= this are zero

    int norm(int deg) const { return reduce_mod(deg, modulus); }

    std::size_t add_object(const std::string& name, const Rational& shift = Rational(0), int grading = 0,
                           const std::string& base = "") {
        for (const auto& o : objects)
            if (o.name == name) throw invalid_category("duplicate object: " + name);
        objects.push_back({name, base.empty() ? name : base, shift, grading});
        units.emplace_back();
        return objects.size() - 1;
    }
    std::size_t add_generator(const std::string& name, std::size_t source, std::size_t target, int degree,
                              const Rational& level) {
        if (source >= objects.size() || target >= objects.size()) throw invalid_category("generator object out of range");
        for (const auto& g : gens)
            if (g.name == name) throw invalid_category("duplicate generator: " + name);
        gens.push_back({name, source, target, norm(degree), level});
        homs_[{source, target}].push_back(gens.size() - 1);
        return gens.size() - 1;
    }
    std::size_t add_unit(std::size_t object, const std::string& name) {
        auto g = add_generator(name, object, object, 0, Rational(0));
        units[object] = g;
        return g;
    }
    void set_mu(const std::vector<std::size_t>& inputs, LambdaVec output) {
        if (!composable(inputs)) throw invalid_category("mu entry on a non-composable tuple");
        for (auto it = output.begin(); it != output.end();)
            it = it->second.is_zero() ? output.erase(it) : std::next(it);
        table[inputs] = std::move(output);
    }
    void add_rule(const std::string& name, Rule r) { rules.push_back({name, std::move(r)}); }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < gens.size(); ++i)
            if (gens[i].name == name) return i;
        throw invalid_category("unknown generator: " + name);
    }
    std::size_t object_index(const std::string& name) const {
        for (std::size_t i = 0; i < objects.size(); ++i)
            if (objects[i].name == name) return i;
        throw invalid_category("unknown object: " + name);
    }
    const std::vector<std::size_t>& hom(std::size_t x, std::size_t y) const {
        static const std::vector<std::size_t> none;
        auto it = homs_.find({x, y});
        return it == homs_.end() ? none : it->second;
    }
    std::vector<Rational> levels() const {
        std::vector<Rational> v;
        for (const auto& g : gens) v.push_back(g.level);
        return v;
    }
    bool is_unit(std::size_t g) const {
        const auto& u = units[gens[g].source];
        return u && *u == g;
    }
    bool composable(const std::vector<std::size_t>& t) const {
        if (t.empty()) return false;
        for (std::size_t i = 0; i + 1 < t.size(); ++i)
            if (gens[t[i]].target != gens[t[i + 1]].source) return false;
        return true;
    }
    bool related(std::size_t x, std::size_t y) const { return objects[x].base == objects[y].base; }
    std::vector<std::string> names(const std::vector<std::size_t>& t) const {
        std::vector<std::string> v;
        for (auto g : t) v.push_back(gens[g].name);
        return v;
    }
    std::string render(const std::vector<std::size_t>& t) const {
        std::string s;
        for (auto g : t) s += (s.empty() ? "" : ",") + gens[g].name;
        return s;
    }
    std::string render(const LambdaVec& v) const {
        if (v.empty()) return "0";
        std::string s;
        for (const auto& [g, c] : v) s += (s.empty() ? "" : " + ") + ("(" + c.str() + ")" + gens[g].name);
        return s;
    }

    // Value of mu_d on a composable generator tuple; nullopt on a coverage gap.
    std::optional<LambdaVec> mu(const std::vector<std::size_t>& t) const {
        if (!composable(t)) throw invalid_category("mu on a non-composable tuple: " + render(t));
        if (auto it = table.find(t); it != table.end()) return it->second;
        if (auto u = unit_rule(t)) return u;
        if (hom(gens[t.front()].source, gens[t.back()].target).empty()) return LambdaVec{};
        for (const auto& r : rules)
            if (auto v = r.rule(*this, t)) return v;
        if (complete_through && t.size() <= *complete_through) return LambdaVec{};
        return std::nullopt;
    }
    bool covered(const std::vector<std::size_t>& t) const { return mu(t).has_value(); }
    LambdaVec mu_or_throw(const std::vector<std::size_t>& t) const {
        auto v = mu(t);
        if (!v) throw coverage_gap("mu not tabulated on " + render(t), names(t));
        return *v;
    }

    // Strict unitality: mu_1(e) = 0, mu_2(e, x) = x = mu_2(x, e), higher mu with a unit vanish.
    std::optional<LambdaVec> unit_rule(const std::vector<std::size_t>& t) const {
        std::optional<std::size_t> pos;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (is_unit(t[i])) {
                pos = i;
                break;
            }
        if (!pos) return std::nullopt;
        if (t.size() != 2) return LambdaVec{};
        return LambdaVec{{t[1 - *pos], NovikovElement::one()}};
    }

    // Composable tuples of the given length, optionally starting/ending at fixed objects.
    std::vector<std::vector<std::size_t>> tuples(std::size_t length, std::optional<std::size_t> from = std::nullopt,
                                                 std::optional<std::size_t> to = std::nullopt,
                                                 std::size_t limit = 2000000) const {
        std::vector<std::vector<std::size_t>> out;
        std::vector<std::size_t> cur;
        std::function<void(std::size_t)> rec = [&](std::size_t obj) {
            if (out.size() >= limit) throw invalid_category("tuple enumeration exceeds limit");
            if (cur.size() == length) {
                if (!to || obj == *to) out.push_back(cur);
                return;
            }
            for (std::size_t y = 0; y < objects.size(); ++y)
                for (auto g : hom(obj, y)) {
                    cur.push_back(g);
                    rec(y);
                    cur.pop_back();
                }
        };
        if (length == 0) return out;
        for (std::size_t x = 0; x < objects.size(); ++x)
            if (!from || *from == x) rec(x);
        return out;
    }

    nlohmann::json to_json(std::size_t max_order) const;
    static TabulatedAInfCategory from_json(const nlohmann::json& j);

private:
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> homs_;
};

// ---------------------------------------------------------------------------
// Formal evaluation: operations on tabulated data, with untabulated values kept as
// free symbols so that identities can be compared term by term.

class FormalEngine {
public:
    using Vec = std::map<std::size_t, NovikovElement>;
    struct Node {
        int op = -1;  // -1 for leaves
        int space = 0;
        std::size_t index = 0;
        std::vector<std::size_t> kids;
    };
    using Eval = std::function<std::optional<Vec>(FormalEngine&, const std::vector<std::size_t>&)>;
    struct Op {
        std::string name;
        Eval eval;
        bool record_gaps = true;
    };

    int add_op(const std::string& name, Eval eval, bool record_gaps = true) {
        ops_.push_back({name, std::move(eval), record_gaps});
        return static_cast<int>(ops_.size()) - 1;
    }
    std::size_t leaf(int space, std::size_t index) { return intern({-1, space, index, {}}); }
    std::size_t node(int op, const std::vector<std::size_t>& kids) { return intern({op, 0, 0, kids}); }
    const Node& at(std::size_t id) const { return nodes_[id]; }
    bool is_leaf(std::size_t id) const { return nodes_[id].op < 0; }
    bool is_leaf(std::size_t id, int space) const { return nodes_[id].op < 0 && nodes_[id].space == space; }

    Vec term(std::size_t id, const NovikovElement& c = NovikovElement::one()) const {
        Vec v;
        if (!c.is_zero()) v.emplace(id, c);
        return v;
    }
    Vec from(int space, const LambdaVec& v) {
        Vec out;
        for (const auto& [i, c] : v)
            if (!c.is_zero()) out.emplace(leaf(space, i), c);
        return out;
    }
    static void add_to(Vec& acc, std::size_t id, const NovikovElement& c) {
        if (c.is_zero()) return;
        auto it = acc.find(id);
        if (it == acc.end()) acc.emplace(id, c);
        else {
            it->second = it->second + c;
            if (it->second.is_zero()) acc.erase(it);
        }
    }
    static void add_all(Vec& acc, const Vec& v, const NovikovElement& c = NovikovElement::one()) {
        for (const auto& [id, x] : v) add_to(acc, id, x * c);
    }
    static Vec sum(const Vec& a, const Vec& b) {
        Vec r = a;
        add_all(r, b);
        return r;
    }
    bool concrete(const Vec& v) const {
        for (const auto& [id, c] : v)
            if (!is_leaf(id)) return false;
        return true;
    }
    // Leaf coefficients of one space; throws if anything else is present.
    LambdaVec to_lambda(const Vec& v, int space) const {
        LambdaVec out;
        for (const auto& [id, c] : v) {
            if (!is_leaf(id, space)) throw std::logic_error("formal vector is not concrete");
            out.emplace(nodes_[id].index, c);
        }
        return out;
    }

    // Multilinear extension of an operation.
    Vec apply(int op, const std::vector<Vec>& args) {
        Vec acc;
        for (const auto& a : args)
            if (a.empty()) return acc;
        std::vector<Vec::const_iterator> it;
        for (const auto& a : args) it.push_back(a.begin());
        std::vector<std::size_t> choice(args.size());
        while (true) {
            NovikovElement c = NovikovElement::one();
            for (std::size_t k = 0; k < args.size(); ++k) {
                choice[k] = it[k]->first;
                c = c * it[k]->second;
            }
            if (!c.is_zero()) {
                auto r = ops_[op].eval(*this, choice);
                if (r) add_all(acc, *r, c);
                else {
                    bool leaves = true;
                    for (auto id : choice) leaves = leaves && is_leaf(id);
                    if (leaves && ops_[op].record_gaps) gaps.insert({op, choice});
                    add_to(acc, node(op, choice), c);
                }
            }
            std::size_t k = 0;
            for (; k < args.size(); ++k) {
                if (++it[k] != args[k].end()) break;
                it[k] = args[k].begin();
            }
            if (k == args.size()) break;
        }
        return acc;
    }

    std::string render(std::size_t id, const std::function<std::string(int, std::size_t)>& leaf_name) const {
        const auto& nd = nodes_[id];
        if (nd.op < 0) return leaf_name(nd.space, nd.index);
        std::string s = ops_[nd.op].name + "(";
        for (std::size_t k = 0; k < nd.kids.size(); ++k) s += (k ? "," : "") + render(nd.kids[k], leaf_name);
        return s + ")";
    }
    std::string render(const Vec& v, const std::function<std::string(int, std::size_t)>& leaf_name) const {
        if (v.empty()) return "0";
        std::string s;
        for (const auto& [id, c] : v) s += (s.empty() ? "" : " + ") + ("(" + c.str() + ")" + render(id, leaf_name));
        return s;
    }
    const Op& op(int i) const { return ops_[i]; }

    std::set<std::pair<int, std::vector<std::size_t>>> gaps;

private:
    std::size_t intern(const Node& n) {
        auto key = std::make_tuple(n.op, n.space, n.index, n.kids);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        nodes_.push_back(n);
        index_.emplace(key, nodes_.size() - 1);
        return nodes_.size() - 1;
    }
    std::vector<Node> nodes_;
    std::map<std::tuple<int, int, std::size_t, std::vector<std::size_t>>, std::size_t> index_;
    std::vector<Op> ops_;
};

// Leaf space of category generators in a FormalEngine.
inline constexpr int kGenSpace = 0;

// Registers mu of A on the engine. Formal inputs still obey strict unitality and empty homs.
inline int bind_mu(FormalEngine& E, const TabulatedAInfCategory& A, const std::string& name = "mu") {
    // endpoints of a formal A-term
    auto ends = std::make_shared<std::function<std::pair<std::size_t, std::size_t>(std::size_t)>>();
    *ends = [&E, &A, ends](std::size_t id) -> std::pair<std::size_t, std::size_t> {
        const auto& nd = E.at(id);
        if (nd.op < 0) return {A.gens[nd.index].source, A.gens[nd.index].target};
        return {(*ends)(nd.kids.front()).first, (*ends)(nd.kids.back()).second};
    };
    return E.add_op(name, [&A, ends](FormalEngine& E, const std::vector<std::size_t>& args) -> std::optional<FormalEngine::Vec> {
        bool leaves = true;
        for (auto id : args) leaves = leaves && E.is_leaf(id, kGenSpace);
        if (leaves) {
            std::vector<std::size_t> t;
            for (auto id : args) t.push_back(E.at(id).index);
            auto v = A.mu(t);
            if (!v) return std::nullopt;
            return E.from(kGenSpace, *v);
        }
        for (std::size_t k = 0; k < args.size(); ++k)
            if (E.is_leaf(args[k], kGenSpace) && A.is_unit(E.at(args[k]).index)) {
                if (args.size() != 2) return FormalEngine::Vec{};
                return E.term(args[1 - k]);
            }
        if (A.hom((*ends)(args.front()).first, (*ends)(args.back()).second).empty()) return FormalEngine::Vec{};
        return std::nullopt;
    });
}

// Formal engine with mu bound; gen(i) gives the leaf vector of generator i.
struct MuEngine {
    const TabulatedAInfCategory* A;
    FormalEngine E;
    int mu_op;

    explicit MuEngine(const TabulatedAInfCategory& cat) : A(&cat), mu_op(bind_mu(E, cat)) {}
    MuEngine(const MuEngine&) = delete;
    MuEngine& operator=(const MuEngine&) = delete;

    FormalEngine::Vec gen(std::size_t g) { return E.term(E.leaf(kGenSpace, g)); }
    FormalEngine::Vec vec(const LambdaVec& v) { return E.from(kGenSpace, v); }
    FormalEngine::Vec mu(const std::vector<FormalEngine::Vec>& args) { return E.apply(mu_op, args); }

    // sum over all blocks x_1..mu(x_{i+1}..x_j)..x_m of the outer mu
    FormalEngine::Vec ainf_relation(const std::vector<FormalEngine::Vec>& x) {
        FormalEngine::Vec acc;
        const std::size_t m = x.size();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j <= m; ++j) {
                std::vector<FormalEngine::Vec> inner(x.begin() + i, x.begin() + j);
                auto in = mu(inner);
                if (in.empty()) continue;
                std::vector<FormalEngine::Vec> outer(x.begin(), x.begin() + i);
                outer.push_back(in);
                outer.insert(outer.end(), x.begin() + j, x.end());
                FormalEngine::add_all(acc, mu(outer));
            }
        return acc;
    }
    std::string leaf_name(int space, std::size_t i) const {
        return space == kGenSpace ? A->gens[i].name : "m" + std::to_string(i);
    }
    std::string render(const FormalEngine::Vec& v) const {
        return E.render(v, [this](int s, std::size_t i) { return leaf_name(s, i); });
    }
};

// Status of an identity residual: zero, nonzero and fully evaluated, or involving untabulated values.
enum class Residual { zero, failure, uncheckable };

inline Residual classify(const FormalEngine& E, const FormalEngine::Vec& r) {
    if (r.empty()) return Residual::zero;
    return E.concrete(r) ? Residual::failure : Residual::uncheckable;
}

// ---------------------------------------------------------------------------
// verify_ainf

struct AInfReport {
    std::size_t checked = 0;
    std::vector<std::string> uncheckable;
    std::vector<std::string> failures;
    std::vector<std::string> problems;  // unit, filtration, grading, composability

    bool passed() const { return failures.empty() && problems.empty(); }
    nlohmann::json to_json() const {
        return {{"passed", passed()},
                {"checked", checked},
                {"uncheckable", uncheckable},
                {"failures", failures},
                {"problems", problems}};
    }
};

inline AInfReport verify_ainf(const TabulatedAInfCategory& A, std::size_t max_order = 4) {
    AInfReport rep;
    for (std::size_t x = 0; x < A.objects.size(); ++x) {
        if (!A.units[x]) {
            rep.problems.push_back("object " + A.objects[x].name + " has no unit");
            continue;
        }
        const auto& e = A.gens[*A.units[x]];
        if (e.level.sign() != 0) rep.problems.push_back("unit " + e.name + " not at level 0");
        if (e.degree != 0) rep.problems.push_back("unit " + e.name + " not in degree 0");
    }
    // tabulated values: target hom, filtration, grading, unit rules
    for (std::size_t d = 1; d <= max_order; ++d)
        for (const auto& t : A.tuples(d)) {
            auto v = A.mu(t);
            if (!v) continue;
            Rational in_level(0);
            int in_deg = static_cast<int>(d) - 2;
            for (auto g : t) {
                in_level += A.gens[g].level;
                in_deg += A.gens[g].degree;
            }
            for (const auto& [g, c] : *v) {
                if (A.gens[g].source != A.gens[t.front()].source || A.gens[g].target != A.gens[t.back()].target)
                    rep.problems.push_back("mu(" + A.render(t) + ") leaves its hom space via " + A.gens[g].name);
                if (A.gens[g].level - c.valuation().value > in_level)
                    rep.problems.push_back("mu(" + A.render(t) + ") raises the filtration");
                if (A.gens[g].degree != A.norm(in_deg))
                    rep.problems.push_back("mu(" + A.render(t) + ") has the wrong degree at " + A.gens[g].name);
            }
            if (auto u = A.unit_rule(t); u && *u != *v)
                rep.problems.push_back("mu(" + A.render(t) + ") violates strict unitality");
        }
    MuEngine M(A);
    for (std::size_t m = 1; m <= max_order; ++m)
        for (const auto& t : A.tuples(m)) {
            std::vector<FormalEngine::Vec> x;
            for (auto g : t) x.push_back(M.gen(g));
            auto r = M.ainf_relation(x);
            switch (classify(M.E, r)) {
                case Residual::zero: ++rep.checked; break;
                case Residual::failure:
                    rep.failures.push_back("relation at (" + A.render(t) + "): " + M.render(r));
                    break;
                case Residual::uncheckable: rep.uncheckable.push_back(A.render(t)); break;
            }
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Normalized r-shift S^r A and the comparison functor eta_r

struct ShiftedCategory {
    TabulatedAInfCategory category;
    Rational r;
    // eta_r is the identity on generators; it is filtered iff no level decreases.
    bool eta_filtered(const TabulatedAInfCategory& original) const {
        for (std::size_t g = 0; g < original.gens.size(); ++g)
            if (original.gens[g].level > category.gens[g].level) return false;
        return true;
    }
};

inline ShiftedCategory shift_category(const TabulatedAInfCategory& A, const Rational& r) {
    if (r.sign() < 0) throw std::invalid_argument("shift_category needs r >= 0");
    ShiftedCategory S{A, r};
    for (auto& g : S.category.gens)
        if (!A.related(g.source, g.target)) g.level += r;
    return S;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json TabulatedAInfCategory::to_json(std::size_t max_order) const {
    nlohmann::json j;
    j["modulus"] = modulus;
    j["n"] = n;
    j["objects"] = nlohmann::json::array();
    for (std::size_t x = 0; x < objects.size(); ++x) {
        const auto& o = objects[x];
        nlohmann::json oj{{"name", o.name}, {"shift", o.shift.str()}, {"grading", o.grading}};
        if (o.base != o.name) oj["base"] = o.base;
        if (units[x]) oj["unit"] = gens[*units[x]].name;
        j["objects"].push_back(oj);
    }
    j["generators"] = nlohmann::json::array();
    for (const auto& g : gens)
        j["generators"].push_back({{"name", g.name},
                                   {"source", objects[g.source].name},
                                   {"target", objects[g.target].name},
                                   {"degree", g.degree},
                                   {"level", g.level.str()}});
    // every covered tuple up to max_order with a nonzero value, excluding unit rules
    j["mu"] = nlohmann::json::array();
    std::vector<std::string> gaps;
    for (std::size_t d = 1; d <= max_order; ++d)
        for (const auto& t : tuples(d)) {
            auto v = mu(t);
            if (!v) {
                gaps.push_back(render(t));
                continue;
            }
            bool explicit_entry = table.count(t) > 0;
            if (v->empty() && !explicit_entry) continue;
            if (!explicit_entry && unit_rule(t)) continue;
            nlohmann::json e{{"order", d}, {"inputs", names(t)}, {"output_terms", nlohmann::json::array()}};
            for (const auto& [g, c] : *v) e["output_terms"].push_back({{"gen", gens[g].name}, {"novikov", c.str()}});
            j["mu"].push_back(e);
        }
    if (gaps.empty()) j["complete_through"] = max_order;
    else j["gaps"] = gaps;
    return j;
}

inline TabulatedAInfCategory TabulatedAInfCategory::from_json(const nlohmann::json& j) {
    TabulatedAInfCategory A;
    A.modulus = j.value("modulus", 2);
    A.n = j.value("n", 0);
    std::vector<std::pair<std::size_t, std::string>> unit_names;
    for (const auto& o : j.at("objects")) {
        Rational shift(0);
        if (o.contains("shift")) shift = FilteredComplex::level_from_json(o.at("shift"));
        auto x = A.add_object(o.at("name").get<std::string>(), shift, o.value("grading", 0), o.value("base", std::string()));
        if (o.contains("unit")) unit_names.push_back({x, o.at("unit").get<std::string>()});
    }
    for (const auto& g : j.at("generators"))
        A.add_generator(g.at("name").get<std::string>(), A.object_index(g.at("source").get<std::string>()),
                        A.object_index(g.at("target").get<std::string>()), g.value("degree", 0),
                        FilteredComplex::level_from_json(g.at("level")));
    for (const auto& [x, name] : unit_names) {
        auto g = A.index_of(name);
        if (A.gens[g].source != x || A.gens[g].target != x) throw invalid_category("unit " + name + " is not an endomorphism");
        A.units[x] = g;
    }
    if (j.contains("mu"))
        for (const auto& e : j.at("mu")) {
            std::vector<std::size_t> t;
            for (const auto& nm : e.at("inputs")) t.push_back(A.index_of(nm.get<std::string>()));
            if (e.contains("order") && e.at("order").get<std::size_t>() != t.size())
                throw invalid_category("mu record order does not match its inputs");
            LambdaVec out;
            for (const auto& term : e.at("output_terms")) {
                const auto& cj = term.at("novikov");
                auto c = cj.is_string() ? NovikovElement::parse(cj.get<std::string>()) : NovikovElement::from_json(cj);
                auto g = A.index_of(term.at("gen").get<std::string>());
                auto it = out.find(g);
                if (it == out.end()) out.emplace(g, c);
                else it->second = it->second + c;
            }
            A.set_mu(t, out);
        }
    if (j.contains("complete_through")) A.complete_through = j.at("complete_through").get<std::size_t>();
    return A;
}

}  // namespace tpc
