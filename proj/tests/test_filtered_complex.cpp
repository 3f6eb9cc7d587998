#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/random_complex.hpp"
#include "tpc/filtered_complex.hpp"

using namespace tpc;
using tpc::testing::random_complex;

namespace {

Rational q(const std::string& s) { return Rational::parse(s); }

Barcode bc(std::initializer_list<std::tuple<std::string, std::string, int>> bars) {
    Barcode c;
    for (const auto& [b, d, g] : bars) c.add(Rational::parse(b), ExtRational::parse(d), g);
    return c.sorted();
}

// Rank of H_s -> H_t in degree k by linear algebra on sublevel sets.
std::size_t rank_function(const FilteredComplex& C, int k, const Rational& s, const Rational& t) {
    std::vector<std::size_t> zs;
    for (std::size_t j = 0; j < C.size(); ++j)
        if (C.gens[j].degree == k && !(C.gens[j].level > s)) zs.push_back(j);
    gf2::Matrix dz(C.size(), zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) dz.cols[i] = C.d.cols[zs[i]];
    std::vector<gf2::Vec> cycles;
    for (const auto& z : gf2::kernel(dz)) {
        gf2::Vec v(C.size());
        for (auto i = z.find_first(); i != gf2::Vec::npos; i = z.find_next(i)) v[zs[i]] = true;
        cycles.push_back(v);
    }
    std::vector<gf2::Vec> bounds;
    for (std::size_t j = 0; j < C.size(); ++j)
        if (C.gens[j].degree == C.norm(k + 1) && !(C.gens[j].level > t)) bounds.push_back(C.d.cols[j]);
    auto both = bounds;
    both.insert(both.end(), cycles.begin(), cycles.end());
    return gf2::rank(both) - gf2::rank(bounds);
}

std::size_t barcode_rank(const Barcode& B, int k, const Rational& s, const Rational& t) {
    std::size_t n = 0;
    for (const auto& b : B.bars)
        if (b.degree == k && !(b.birth > s) && b.death > ExtRational(t)) ++n;
    return n;
}

std::vector<Rational> critical(const FilteredComplex& C) {
    const auto lv = C.levels();
    std::vector<Rational> v(lv.begin(), lv.end());
    v.push_back(Rational(-1));
    return v;
}

bool chain_map(const FilteredComplex& S, const FilteredComplex& T, const gf2::Matrix& m) {
    return T.d * m == m * S.d;
}

bool filtered(const FilteredComplex& S, const FilteredComplex& T, const gf2::Matrix& m) {
    for (std::size_t j = 0; j < S.size(); ++j)
        for (auto i = m.cols[j].find_first(); i != gf2::Vec::npos; i = m.cols[j].find_next(i))
            if (T.gens[i].level > S.gens[j].level) return false;
    return true;
}

}  // namespace

TEST_CASE("elementary complexes") {
    CHECK(homology_barcode(FilteredComplex::E2(0, 1)) == bc({{"0", "1", 0}}));
    CHECK(homology_barcode(FilteredComplex::E1(0)) == bc({{"0", "inf", 0}}));
    CHECK(homology_barcode(FilteredComplex::E2(0, 0)).size() == 0);

    auto dec = decompose_elementary(FilteredComplex::E2(0, 1));
    REQUIRE(dec.pairs.size() == 1);
    CHECK(dec.pairs[0].va == Rational(0));
    CHECK(dec.pairs[0].vb == Rational(1));

    FilteredComplex three;
    three.add_generator("x", 0, 0);
    three.add_generator("y", 1, 1);
    three.add_generator("z", 2, 2);
    auto d3 = decompose_elementary(three);
    CHECK(d3.pairs.empty());
    CHECK(d3.singles.size() == 3);
}

TEST_CASE("validation rejects bad complexes") {
    FilteredComplex up;
    up.add_generator("a", 0, 2);
    up.add_generator("b", 1, 1);
    up.add_entry(1, 0);
    CHECK_THROWS_AS(up.validate(), invalid_complex);

    FilteredComplex sq;
    sq.add_generator("a", 0, 0);
    sq.add_generator("b", 1, 0);
    sq.add_generator("c", 2, 0);
    sq.add_entry(1, 0);
    sq.add_entry(2, 1);
    CHECK_THROWS_AS(sq.validate(), invalid_complex);

    FilteredComplex wrong;
    wrong.add_generator("a", 0, 0);
    wrong.add_generator("b", 0, 1);
    wrong.add_entry(1, 0);
    CHECK_THROWS_AS(wrong.validate(), invalid_complex);
}

TEST_CASE("json round trip") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 20; ++it) {
        auto C = random_complex(rng, 8);
        auto D = FilteredComplex::from_json(C.to_json());
        CHECK(D.to_json() == C.to_json());
        CHECK(homology_barcode(D) == homology_barcode(C));
    }
    auto j = nlohmann::json::parse(
        R"({"modulus":0,"generators":[{"name":"a","degree":0,"level":0},{"name":"b","degree":1,"level":"1/2"}],)"
        R"("differential":[{"from":"b","to":"a"}]})");
    CHECK(homology_barcode(FilteredComplex::from_json(j)) == bc({{"0", "1/2", 0}}));
}

TEST_CASE("barcode matches rank function on random complexes") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 200; ++it) {
        auto C = random_complex(rng, 10);
        auto B = homology_barcode(C);
        auto lv = critical(C);
        for (int k : C.degrees())
            for (const auto& s : lv)
                for (const auto& t : lv) {
                    if (t < s) continue;
                    REQUIRE(rank_function(C, k, s, t) == barcode_rank(B, k, s, t));
                }
    }
}

TEST_CASE("barcode invariant under filtered basis change") {
    std::mt19937_64 rng(12);
    for (int it = 0; it < 100; ++it) {
        auto C = random_complex(rng, 10);
        auto D = tpc::testing::conjugated(C, tpc::testing::random_filtered_change(C, rng));
        D.validate();
        CHECK(homology_barcode(D) == homology_barcode(C));
    }
}

TEST_CASE("decomposition basis is filtered with filtered inverse") {
    std::mt19937_64 rng(13);
    for (int it = 0; it < 100; ++it) {
        auto C = random_complex(rng, 10);
        auto dec = decompose_elementary(C);
        auto M = dec.basis(C.size());
        auto Minv = gf2::inverse(M);
        std::vector<Rational> lv;
        for (const auto& p : dec.pairs) {
            lv.push_back(p.va);
            lv.push_back(p.vb);
            CHECK(C.boundary(p.b) == p.a);
            CHECK(*C.level_of(p.a) == p.va);
            CHECK(*C.level_of(p.b) == p.vb);
        }
        for (const auto& s : dec.singles) {
            lv.push_back(s.vc);
            CHECK(C.boundary(s.c).none());
            CHECK(*C.level_of(s.c) == s.vc);
        }
        for (std::size_t g = 0; g < C.size(); ++g)
            for (auto i = Minv.cols[g].find_first(); i != gf2::Vec::npos; i = Minv.cols[g].find_next(i))
                CHECK(!(lv[i] > C.gens[g].level));
    }
}

TEST_CASE("truncate") {
    auto C = direct_sum(FilteredComplex::E2(0, q("0.2")), FilteredComplex::E2(0, 3));
    auto t = truncate(C, q("0.5"));
    CHECK(t.complex.size() == 2);
    CHECK(homology_barcode(t.complex) == bc({{"0", "3", 0}}));

    std::mt19937_64 rng(14);
    for (int it = 0; it < 100; ++it) {
        auto X = random_complex(rng, 10);
        const Rational delta = tpc::testing::random_level(rng);
        auto tr = truncate(X, delta);
        auto BX = homology_barcode(X);
        CHECK(tr.complex.size() == 2 * bar_count(BX, delta, CountMode::finite_only) +
                                       (bar_count(BX, delta, CountMode::all) - bar_count(BX, delta, CountMode::finite_only)));
        CHECK(chain_map(X, tr.complex, tr.projection));
        CHECK(chain_map(tr.complex, X, tr.section));
        CHECK(filtered(X, tr.complex, tr.projection));
        CHECK(filtered(tr.complex, X, tr.section));
        CHECK(tr.projection * tr.section == gf2::Matrix::identity(tr.complex.size()));
        Barcode kept(0);
        for (const auto& b : BX.bars)
            if (b.infinite() || b.length().value > delta) kept.add(b);
        CHECK(homology_barcode(tr.complex) == kept.sorted());
        if (delta == Rational(0)) CHECK(homology_barcode(tr.complex) == BX);
    }
}

TEST_CASE("cones") {
    auto e = FilteredComplex::E1(0);
    auto c1 = cone(FilteredMap::identity(e), 0);
    CHECK(homology_barcode(c1).size() == 0);
    CHECK(c1.size() == 2);

    FilteredMap zero(e, e);
    auto c2 = cone(zero, 0);
    CHECK(homology_barcode(c2) == bc({{"0", "inf", 0}, {"0", "inf", 1}}));

    // E2(a,b) as the cone of E1(b)[-1] -> E1(a)
    const Rational va = q("1/2"), vb = q("7/2");
    FilteredMap f(FilteredComplex::E1(va, 0, "b"), FilteredComplex::E1(va, 0, "a"));
    f.matrix.set(0, 0);
    auto c3 = cone(f, vb - va);
    CHECK(homology_barcode(c3) == homology_barcode(FilteredComplex::E2(va, vb)));

    FilteredMap g(FilteredComplex::E1(0), FilteredComplex::E1(1), Rational(1));
    g.matrix.set(0, 0);
    CHECK_THROWS_AS(cone(g, Rational(0)), invalid_complex);
    CHECK_NOTHROW(cone(g, Rational(1)));
}

TEST_CASE("internal hom") {
    auto k = FilteredComplex::E1(0);
    auto H = internal_hom(k, k);
    CHECK(H.size() == 1);
    CHECK(H.gens[0].level == Rational(0));
    CHECK(H.d.is_zero());
    CHECK(homology_barcode(internal_hom(k, FilteredComplex::E2(0, 1))) == homology_barcode(FilteredComplex::E2(0, 1)));
}

TEST_CASE("internal hom homology matches map-space enumeration") {
    std::mt19937_64 rng(15);
    int checked = 0;
    for (int it = 0; it < 60; ++it) {
        auto C = random_complex(rng, 3);
        auto D = random_complex(rng, 3);
        auto HB = homology_barcode(internal_hom(C, D));
        const std::size_t n = C.size(), m = D.size();
        std::set<int> ks;
        for (const auto& a : C.gens)
            for (const auto& b : D.gens) ks.insert(b.degree - a.degree);
        std::set<Rational> shifts{Rational(-100)};
        for (const auto& a : C.gens)
            for (const auto& b : D.gens) shifts.insert(b.level - a.level);
        // All maps of a given degree and shift bound, flattened as n*m bit vectors.
        auto maps = [&](int k, const Rational& t) {
            std::vector<std::pair<std::size_t, std::size_t>> slots;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    if (D.gens[j].degree - C.gens[i].degree == k && !(D.gens[j].level - C.gens[i].level > t))
                        slots.push_back({i, j});
            std::vector<gf2::Matrix> out;
            for (std::size_t mask = 0; mask < (std::size_t(1) << slots.size()); ++mask) {
                gf2::Matrix f(m, n);
                for (std::size_t b = 0; b < slots.size(); ++b)
                    if (mask >> b & 1) f.set(slots[b].second, slots[b].first);
                out.push_back(f);
            }
            return out;
        };
        auto flat = [&](const gf2::Matrix& f) {
            gf2::Vec v(n * m);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    if (f.get(j, i)) v[i * m + j] = true;
            return v;
        };
        for (int k : ks)
            for (const auto& s : shifts)
                for (const auto& t : shifts) {
                    if (t < s) continue;
                    std::vector<gf2::Vec> cyc, bnd;
                    for (const auto& f : maps(k, s))
                        if (D.d * f == f * C.d) cyc.push_back(flat(f));
                    for (const auto& h : maps(k + 1, t)) bnd.push_back(flat(D.d * h + h * C.d));
                    auto both = bnd;
                    both.insert(both.end(), cyc.begin(), cyc.end());
                    const std::size_t r = (cyc.empty() && bnd.empty()) ? 0 : gf2::rank(both) - gf2::rank(bnd);
                    REQUIRE(r == barcode_rank(HB, k, s, t));
                    ++checked;
                }
    }
    CHECK(checked > 100);
}

TEST_CASE("cone length examples") {
    CHECK(cone_length(FilteredComplex::E2(0, 1), q("0.3"), ConeMode::to_target).value == 2);
    CHECK(cone_length(FilteredComplex::E2(0, 1), q("0.6"), ConeMode::to_target).value == 0);
    for (auto e : {q("0"), q("1"), q("100")}) {
        CHECK(cone_length(FilteredComplex::E1(q("3/2")), e, ConeMode::to_target).value == 1);
        CHECK(cone_length(FilteredComplex::E1(q("3/2")), e, ConeMode::to_zero).value == 1);
    }
}

TEST_CASE("cone length decompositions realize the formula") {
    std::mt19937_64 rng(16);
    for (int it = 0; it < 200; ++it) {
        auto C = random_complex(rng, 10);
        const Rational eps = tpc::testing::random_level(rng, 6, 4);
        auto B = homology_barcode(C);
        for (auto mode : {ConeMode::to_target, ConeMode::to_zero}) {
            auto r = cone_length(C, eps, mode);
            CHECK(r.value == r.decomposition.length());
            CHECK(r.decomposition.total_weight() == Rational(0));
            auto endB = homology_barcode(r.decomposition.end);
            const Barcode goal = mode == ConeMode::to_target ? B : Barcode(0);
            CHECK(!(interleaving_distance(endB, goal) > ExtRational(eps)));
        }
        auto a = cone_length(C, eps, ConeMode::to_target).value;
        auto b = cone_length(C, eps + Rational(1, 4), ConeMode::to_target).value;
        CHECK(b <= a);
    }
}

TEST_CASE("cone length equals exhaustive search at small dimension") {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 60; ++it) {
        auto C = random_complex(rng, 3);
        const Rational eps = tpc::testing::random_level(rng, 6, 4);
        for (auto mode : {ConeMode::to_target, ConeMode::to_zero}) {
            auto f = cone_length(C, eps, mode).value;
            auto bf = brute_force_cone_length(C, eps, mode, C.size() + 1);
            REQUIRE(bf.has_value());
            CHECK(*bf == f);
        }
    }
}

TEST_CASE("exhaustive search is stable under a finer level grid") {
    std::mt19937_64 rng(18);
    for (int it = 0; it < 10; ++it) {
        auto C = random_complex(rng, 3);
        const Rational eps = tpc::testing::random_level(rng, 6, 4);
        std::vector<Rational> fine;
        for (int i = -2; i <= 20; ++i) fine.push_back(Rational(i, 4));
        auto coarse = brute_force_cone_length(C, eps, ConeMode::to_target, C.size() + 1);
        auto finer = brute_force_cone_length(C, eps, ConeMode::to_target, C.size() + 1, fine);
        CHECK(coarse == finer);
    }
}

TEST_CASE("retract cone length bracket") {
    auto k = FilteredComplex::E1(0);
    auto r1 = retract_cone_length_over(k, k, 0, 3);
    CHECK(r1.lower == 1);
    REQUIRE(r1.upper.has_value());
    CHECK(*r1.upper == 1);

    auto A = direct_sum(FilteredComplex::E2(0, 1), FilteredComplex::E2(0, 1));
    auto r2 = retract_cone_length_over(A, k, q("0.1"), 5);
    CHECK(r2.lower == 2);
    REQUIRE(r2.upper.has_value());
    CHECK(*r2.upper == 4);
    CHECK(coefficient_k(k) == Rational(1));
}

TEST_CASE("retract cone length over k equals the formula") {
    std::mt19937_64 rng(19);
    auto k = FilteredComplex::E1(0);
    for (int it = 0; it < 40; ++it) {
        auto A = random_complex(rng, 3);
        const Rational eps = tpc::testing::random_level(rng, 6, 4);
        auto r = retract_cone_length_over(A, k, eps, A.size() + 1);
        REQUIRE(r.upper.has_value());
        CHECK(*r.upper == cone_length(A, eps, ConeMode::to_target).value);
        CHECK(r.lower <= *r.upper);
    }
}

TEST_CASE("retract cone length is submultiplicative through an intermediate generator") {
    std::mt19937_64 rng(20);
    int checked = 0;
    for (int it = 0; it < 40 && checked < 15; ++it) {
        auto A = random_complex(rng, 3, 1, 4);
        auto G = random_complex(rng, 2, 1, 4);
        auto G2 = random_complex(rng, 2, 1, 4);
        if (homology_barcode(G).size() == 0 || homology_barcode(G2).size() == 0) continue;
        const Rational eps = tpc::testing::random_level(rng, 4, 4);
        std::vector<Rational> extra;
        for (const auto& a : A.gens)
            for (const auto& g2 : G2.gens)
                for (const auto& x : G2.gens)
                    for (const auto& g : G.gens) {
                        extra.push_back(a.level - g2.level + x.level - g.level);
                        extra.push_back(a.level - g2.level + x.level - g.level - eps);
                        extra.push_back(a.level - g2.level + x.level - g.level + eps);
                    }
        auto n1 = retract_cone_length_search(A, G2, eps, 3);
        auto n2 = retract_cone_length_search(G2, G, 0, 2);
        if (!n1 || !n2 || (*n1) * (*n2) > 3) continue;
        auto lhs = retract_cone_length_search(A, G, eps, (*n1) * (*n2), extra);
        REQUIRE(lhs.has_value());
        CHECK(*lhs <= (*n1) * (*n2));
        ++checked;
    }
    CHECK(checked >= 5);
}

TEST_CASE("stability reduce examples") {
    auto C = FilteredComplex::E2(0, 5);
    gf2::Matrix zero(2, 2);
    auto r = stability_reduce(C, C.d, zero, 2, 1);
    CHECK(r.before == 1);
    CHECK(r.after >= 1);
    CHECK(homology_barcode(r.retract) == bc({{"0", "5", 0}}));

    std::mt19937_64 rng(21);
    for (int it = 0; it < 50; ++it) {
        auto X = random_complex(rng, 8);
        gf2::Matrix z(X.size(), X.size());
        auto s = stability_reduce(X, X.d, z, 1, q("1/2"));
        Barcode kept(0);
        for (const auto& b : homology_barcode(X).bars)
            if (b.infinite() || !(b.length().value < Rational(1))) kept.add(b);
        CHECK(homology_barcode(s.retract) == kept.sorted());
    }

    FilteredComplex bad;
    bad.add_generator("a", 0, 0);
    bad.add_generator("b", 1, 1);
    bad.add_entry(1, 0);
    gf2::Matrix none(2, 2);
    CHECK_THROWS_AS(stability_reduce(bad, none, bad.d, 2, 1), invalid_complex);
}

TEST_CASE("stability reduce on perturbations of acyclic complexes") {
    std::mt19937_64 rng(22);
    int used = 0;
    for (int it = 0; it < 3000 && used < 300; ++it) {
        // acyclic d: pairs only
        FilteredComplex C;
        const int npairs = 1 + static_cast<int>(rng() % 3);
        for (int p = 0; p < npairs; ++p) {
            const int deg = static_cast<int>(rng() % 2);
            const Rational la = tpc::testing::random_level(rng, 10, 2);
            const Rational lb = la + tpc::testing::random_level(rng, 6, 2);
            auto a = C.add_generator("a" + std::to_string(p), deg, la);
            auto b = C.add_generator("b" + std::to_string(p), deg + 1, lb);
            C.add_entry(b, a);
        }
        C = tpc::testing::conjugated(C, tpc::testing::random_filtered_change(C, rng));
        const Rational delta = Rational(1 + static_cast<std::int64_t>(rng() % 4), 2);
        gf2::Matrix Dp(C.size(), C.size());
        for (std::size_t j = 0; j < C.size(); ++j)
            for (std::size_t i = 0; i < C.size(); ++i)
                if (C.gens[i].degree == C.norm(C.gens[j].degree - 1) && !(C.gens[i].level > C.gens[j].level - delta) &&
                    rng() % 3 == 0)
                    Dp.set(i, j);
        gf2::Matrix D = C.d + Dp;
        if (!(D * D).is_zero()) continue;
        FilteredComplex CD = C;
        CD.d = D;
        ++used;
        for (const auto& eps : count_thresholds(CD, C.d, delta)) {
            auto r = stability_reduce(CD, C.d, Dp, delta, eps);
            CHECK(r.after >= r.before);
            CHECK(chain_map(CD, r.retract, r.projection));
            CHECK(chain_map(r.retract, CD, r.section));
            CHECK(filtered(CD, r.retract, r.projection));
            CHECK(filtered(r.retract, CD, r.section));
            CHECK(r.projection * r.section == gf2::Matrix::identity(r.retract.size()));
            for (const auto& b : homology_barcode(r.retract).bars) CHECK((b.infinite() || b.length().value > eps));
        }
    }
    CHECK(used >= 100);
}

TEST_CASE("perturbation can merge infinite bars when d is not acyclic") {
    FilteredComplex C;
    C.add_generator("a", 0, 0);
    C.add_generator("b", 1, 5);
    C.add_entry(1, 0);
    gf2::Matrix d(2, 2);
    auto r = stability_reduce(C, d, C.d, 2, 1);
    CHECK(r.before == 2);
    CHECK(r.after == 1);
}

TEST_CASE("reach gap") {
    std::mt19937_64 rng(23);
    for (int it = 0; it < 30; ++it) {
        auto V = random_complex(rng, 6);
        auto dec = decompose_elementary(V);
        if (dec.singles.empty()) continue;
        const Rational r = tpc::testing::random_level(rng, 5, 1);
        // eta_r: Sigma^r V -> V
        FilteredMap eta(V.shifted(r), V);
        eta.matrix = gf2::Matrix::identity(V.size());
        const auto& s = dec.singles.front();
        CHECK(reach_gap(s.c, s.vc, eta) == ExtRational(s.vc + r));
        CHECK(reach_gap(s.c, s.vc, FilteredMap::identity(V)) == ExtRational(s.vc));
        FilteredMap zero(V, V);
        CHECK(reach_gap(s.c, s.vc, zero).is_inf());
    }
    auto E = FilteredComplex::E2(0, 3);
    FilteredMap zero(E, E);
    CHECK(reach_gap(E.unit(0), 0, zero) == ExtRational(3));
    CHECK_THROWS_AS(reach_gap(E.unit(1), 3, zero), invalid_complex);
}

TEST_CASE("reach gap grows under composition") {
    std::mt19937_64 rng(24);
    int checked = 0;
    for (int it = 0; it < 200; ++it) {
        auto A = random_complex(rng, 3);
        auto B = random_complex(rng, 3);
        auto C = random_complex(rng, 3);
        auto fs = enumerate_chain_maps(A, B);
        auto gs = enumerate_chain_maps(B, C);
        if (fs.empty() || gs.empty()) continue;
        FilteredMap f(A, B), g(B, C), gf(A, C);
        f.matrix = fs[rng() % fs.size()];
        g.matrix = gs[rng() % gs.size()];
        gf.matrix = g.matrix * f.matrix;
        auto dec = decompose_elementary(C);
        for (const auto& s : dec.singles) {
            CHECK(reach_gap(s.c, s.vc, gf) >= reach_gap(s.c, s.vc, g));
            ++checked;
        }
    }
    CHECK(checked > 20);
}
