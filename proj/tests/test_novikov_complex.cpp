#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/random_complex.hpp"
#include "tpc/novikov_complex.hpp"

using namespace tpc;

namespace {

NovikovElement T(const std::string& e) { return NovikovElement::monomial(Rational::parse(e)); }

FloerComplex two_gen(const NovikovElement& c) {
    FloerComplex C;
    C.add_generator("x", 0, 0);
    C.add_generator("y", 1, 5);
    C.add_entry(1, 0, c);
    return C;
}

// Random filtered change of basis e_j -> e_j + lambda e_i, applied n times.
FloerComplex scramble(FloerComplex C, std::mt19937_64& rng, int n) {
    if (C.size() == 0) return C;
    for (int it = 0; it < n; ++it) {
        const std::size_t i = rng() % C.size(), j = rng() % C.size();
        if (i == j || C.gens[i].degree != C.gens[j].degree) continue;
        // l(T^s e_i) = l_i - s <= l_j
        const Rational s = C.gens[i].level - C.gens[j].level + Rational(static_cast<std::int64_t>(rng() % 3), 2);
        const auto lam = NovikovElement::monomial(s);
        // column op: D e_j += lam D e_i
        lambda::add_shifted(C.d[j], C.d[i], s);
        // row op: coordinate i += lam * coordinate j
        for (auto& col : C.d) {
            auto it2 = col.find(j);
            if (it2 == col.end()) continue;
            LambdaVec extra{{i, it2->second * lam}};
            lambda::add_shifted(col, extra, Rational(0));
        }
    }
    return C;
}

FloerComplex random_floer(std::mt19937_64& rng, std::size_t max_dim) {
    auto F = FloerComplex::from_filtered(tpc::testing::random_complex(rng, max_dim));
    return scramble(F, rng, 12);
}

std::multiset<std::pair<int, Rational>> positive_bars(const ConciseBarcode& B) {
    std::multiset<std::pair<int, Rational>> s;
    for (const auto& b : B.finite)
        if (b.length.sign() > 0) s.insert({b.degree, b.length});
    return s;
}

}  // namespace

TEST_CASE("concise barcode examples") {
    FloerComplex z;
    for (int i = 0; i < 4; ++i) z.add_generator("g" + std::to_string(i), i % 2, Rational(i));
    auto B0 = concise_barcode(z);
    CHECK(B0.finite.empty());
    CHECK(B0.infinite_count() == 4);
    CHECK(bar_count_at(z, Rational(3)) == 4);
    CHECK(boundary_depth(z) == Rational(0));

    auto B1 = concise_barcode(two_gen(NovikovElement::one()));
    REQUIRE(B1.finite.size() == 1);
    CHECK(B1.finite[0].length == Rational(5));
    CHECK(B1.infinite_count() == 0);

    auto C2 = two_gen(T("2"));
    auto B2 = concise_barcode(C2);
    REQUIRE(B2.finite.size() == 1);
    CHECK(B2.finite[0].length == Rational(7));
    CHECK(boundary_depth(C2) == Rational(7));
    CHECK(bar_count_at(C2, Rational(7)) == 0);
    CHECK(bar_count_at(C2, Rational(6)) == 1);
}

TEST_CASE("action increasing entries are rejected") {
    FloerComplex C;
    C.add_generator("x", 0, 5);
    C.add_generator("y", 1, 0);
    C.add_entry(1, 0, NovikovElement::one());
    CHECK_THROWS_AS(C.validate(), invalid_complex);
    C.d[1][0] = T("5");
    CHECK_NOTHROW(C.validate());
}

TEST_CASE("series coefficients reduce exactly") {
    // dy = (1 + T) x, dz = x: the reduced pair has length l(z) - l(x)
    FloerComplex C;
    C.add_generator("x", 0, 0);
    C.add_generator("y", 1, 1);
    C.add_generator("z", 1, 3);
    C.add_entry(1, 0, NovikovElement::from_exponents({Rational(0), Rational(1)}));
    C.add_entry(2, 0, NovikovElement::one());
    auto B = concise_barcode(C);
    REQUIRE(B.finite.size() == 1);
    CHECK(B.finite[0].length == Rational(1));
    CHECK(B.infinite.at(1) == 1);
}

TEST_CASE("agrees with filtered Z/2 barcodes") {
    std::mt19937_64 rng(31);
    for (int it = 0; it < 200; ++it) {
        auto C = tpc::testing::random_complex(rng, 10);
        auto B = concise_barcode(FloerComplex::from_filtered(C));
        auto H = homology_barcode(C);
        std::multiset<std::pair<int, Rational>> fin;
        std::size_t inf = 0;
        for (const auto& b : H.bars) {
            if (b.infinite()) ++inf;
            else fin.insert({b.degree, b.length().value});
        }
        CHECK(positive_bars(B) == fin);
        CHECK(B.infinite_count() == inf);
        CHECK(2 * B.finite.size() + B.infinite_count() == C.size());
    }
}

TEST_CASE("bar lengths invariant under filtered Lambda basis changes") {
    std::mt19937_64 rng(32);
    for (int it = 0; it < 150; ++it) {
        auto F = FloerComplex::from_filtered(tpc::testing::random_complex(rng, 8));
        auto G = scramble(F, rng, 20);
        G.validate();
        auto a = concise_barcode(F), b = concise_barcode(G);
        CHECK(positive_bars(a) == positive_bars(b));
        CHECK(a.infinite == b.infinite);
    }
}

TEST_CASE("counting lemma and specialization") {
    std::mt19937_64 rng(33);
    for (int it = 0; it < 150; ++it) {
        auto F = random_floer(rng, 9);
        auto B = concise_barcode(F);
        CHECK(2 * B.finite.size() + B.infinite_count() == F.size());
        if (auto v = F.min_filtration_drop())
            for (const auto& b : B.finite) CHECK(!(b.length < *v));
    }
    // exact 0/1 coefficients: T = 1 recovers the Lambda rank
    for (int it = 0; it < 100; ++it) {
        auto C = tpc::testing::random_complex(rng, 9);
        auto F = FloerComplex::from_filtered(C);
        CHECK(homology_rank_at_one(F) == concise_barcode(F).infinite_count());
    }
}

TEST_CASE("minimal preimages") {
    std::mt19937_64 rng(34);
    for (int it = 0; it < 100; ++it) {
        auto F = random_floer(rng, 8);
        auto R = reduce_complex(F, Rational(64));
        LambdaVec z;
        for (std::size_t i = 0; i < F.size(); ++i)
            if (rng() % 2) z[i] = NovikovElement::monomial(Rational(static_cast<std::int64_t>(rng() % 5), 2));
        auto b = lambda::apply(F.d, z);
        auto p = R.preimage(b);
        REQUIRE(p.has_value());
        auto Dp = lambda::apply(F.d, *p);
        if (R.truncated || R.truncated_preimage) {
            lambda::add_shifted(Dp, b, Rational(0));
            lambda::cut(Dp, F.levels(), R.floor);
            CHECK(Dp.empty());
        } else {
            CHECK(Dp == b);
        }
        auto lp = lambda::level_of(*p, F.levels());
        auto lz = lambda::level_of(z, F.levels());
        if (lp) CHECK(!(*lp > *lz));
        // the orthogonal kernel does not lower levels further
        for (std::size_t j = 0; j < F.size(); ++j) {
            if (R.pivot(j)) continue;
            LambdaVec q = *p;
            lambda::add_shifted(q, R.domain[j], Rational(0));
            auto lq = lambda::level_of(q, F.levels());
            if (lp && lq) CHECK(!(*lq < *lp));
        }
    }
}

TEST_CASE("json round trip") {
    std::mt19937_64 rng(35);
    for (int it = 0; it < 20; ++it) {
        auto F = random_floer(rng, 6);
        auto G = FloerComplex::from_json(F.to_json());
        CHECK(G.to_json() == F.to_json());
    }
    auto j = nlohmann::json::parse(
        R"({"generators":[{"name":"x","degree":0,"level":0},{"name":"y","degree":1,"level":5}],)"
        R"("differential":[{"from":"y","to":"x","coefficient":"T^{2}"}]})");
    CHECK(boundary_depth(FloerComplex::from_json(j)) == Rational(7));
}
