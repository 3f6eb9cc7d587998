#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tpc/persistence.hpp"
#include "tpc/persistence_oracle.hpp"

using namespace tpc;

namespace {

Barcode bc(std::initializer_list<std::pair<std::string, std::string>> bars) {
    Barcode c;
    for (const auto& [b, d] : bars) c.add(Rational::parse(b), ExtRational::parse(d), 0);
    return c;
}

ExtRational ex(const std::string& s) { return ExtRational::parse(s); }

Barcode random_barcode(std::mt19937& rng, int max_bars) {
    std::uniform_int_distribution<int> nb(0, max_bars), ep(0, 24), inf(0, 4), deg(0, 1);
    Barcode c;
    int n = nb(rng);
    for (int i = 0; i < n; ++i) {
        int b = ep(rng), d = ep(rng);
        if (b > d) std::swap(b, d);
        if (b == d) ++d;
        if (inf(rng) == 0) c.add(Rational(b, 4), ExtRational::infinity(), deg(rng));
        else c.add(Rational(b, 4), ExtRational(Rational(d, 4)), deg(rng));
    }
    return c;
}

}  // namespace

TEST_CASE("bar counting") {
    CHECK(bar_count(bc({{"0", "1"}}), Rational::parse("0.6")) == 1);
    CHECK(bar_count(bc({{"0", "1"}}), Rational(1)) == 0);
    CHECK(bar_count(bc({{"0", "0.2"}, {"0", "3"}, {"1", "inf"}}), Rational(1, 2)) == 2);
    CHECK(bar_count(bc({{"0", "0.2"}, {"0", "3"}, {"1", "inf"}}), Rational(1, 2), CountMode::finite_only) == 1);
    CHECK_THROWS(bar_count(bc({}), Rational(-1)));
}

TEST_CASE("spectral range") {
    CHECK(spectral_range(bc({{"0", "inf"}, {"2", "inf"}})) == Rational(2));
    CHECK(spectral_range(bc({{"5", "inf"}})) == Rational(0));
    CHECK(spectral_range(bc({{"0", "1"}, {"3", "inf"}, {"4", "inf"}})) == Rational(1));
    CHECK_THROWS(spectral_range(bc({{"0", "1"}})));
}

TEST_CASE("interleaving distance examples") {
    CHECK(interleaving_distance(bc({{"0", "1"}}), bc({{"0", "1"}})) == ex("0"));
    CHECK(interleaving_distance(bc({{"0", "inf"}}), bc({{"1/2", "inf"}})) == ex("1/2"));
    CHECK(interleaving_distance(bc({{"0", "2"}}), bc({})) == ex("1"));
    CHECK(interleaving_distance(bc({{"0", "inf"}}), bc({})).is_inf());
    CHECK(oracle::dint(bc({{"0", "2"}}), bc({})) == ex("1"));
    Barcode a(2), b(3);
    CHECK_THROWS(interleaving_distance(a, b));
}

TEST_CASE("asymmetric variant examples") {
    CHECK(dint_variant(bc({{"0", "1"}, {"2", "inf"}}), bc({{"0", "1"}, {"2", "inf"}})) == ex("0"));
    CHECK(dint_variant(bc({{"0", "2"}}), bc({})) == ex("2"));
    CHECK(oracle::Dint(bc({{"0", "2"}}), bc({})) == ex("2"));
    // a pure translation by 1 costs 1 here but 1 in the symmetric form as well
    CHECK(dint_variant(bc({{"0", "inf"}}), bc({{"1", "inf"}})) == ex("1"));
}

TEST_CASE("retract interleaving examples") {
    CHECK(retract_interleaving(bc({{"0", "1"}}), bc({{"0", "1"}, {"3", "7"}})) == ex("0"));
    CHECK(retract_interleaving(bc({{"0", "10"}}), bc({})) == ex("5"));
    CHECK(retract_interleaving(bc({}), bc({{"0", "1"}, {"0", "inf"}})) == ex("0"));
    CHECK(retract_interleaving(bc({{"0", "inf"}}), bc({})).is_inf());
}

TEST_CASE("shift invariant versions") {
    CHECK(shift_invariant(Metric::dint, bc({{"0", "inf"}}), bc({{"7", "inf"}})) == ex("0"));
    auto B = bc({{"0", "1"}, {"1/2", "3"}, {"2", "inf"}});
    for (int r = -3; r <= 3; ++r) {
        CHECK(shift_invariant(Metric::dint, B, B.shifted(Rational(r, 3))) == ex("0"));
        CHECK(shift_invariant(Metric::Dint, B, B.shifted(Rational(r, 3))) == ex("0"));
        CHECK(shift_invariant(Metric::drint, B, B.shifted(Rational(r, 3))) == ex("0"));
    }
    CHECK(shift_invariant(Metric::dint, bc({{"0", "1"}}), bc({{"0", "3"}})) == ex("1"));
    // brute force over a fine grid of shifts
    ExtRational best = ExtRational::infinity();
    for (int k = -40; k <= 40; ++k) {
        auto v = interleaving_distance(bc({{"0", "1"}}), bc({{"0", "3"}}).shifted(Rational(k, 8)));
        if (v < best) best = v;
    }
    CHECK(best == ex("1"));
}

TEST_CASE("retract complement") {
    auto K = retract_complement(bc({{"0", "1"}}), bc({{"0", "1"}, {"5", "6"}}), Rational(1, 10));
    CHECK(K == bc({{"5", "6"}}));
    auto X = bc({{"0", "2"}, {"1", "inf"}});
    CHECK(retract_complement(bc({}), X, Rational(1)) == X);
    std::mt19937 rng(3);
    for (int t = 0; t < 300; ++t) {
        auto R = random_barcode(rng, 3), Xr = random_barcode(rng, 4);
        auto d = retract_interleaving(R, Xr);
        if (d.is_inf()) continue;
        Rational eps = d.value + Rational(1, 8);
        auto Kr = retract_complement(R, Xr, eps);
        CHECK(interleaving_distance(R + Kr, Xr) < ExtRational(eps + eps));
    }
}

TEST_CASE("metric properties on random barcodes") {
    std::mt19937 rng(5);
    for (int t = 0; t < 300; ++t) {
        auto A = random_barcode(rng, 4), B = random_barcode(rng, 4), C = random_barcode(rng, 4), K = random_barcode(rng, 2);
        auto ab = interleaving_distance(A, B), ba = interleaving_distance(B, A);
        CHECK(ab == ba);
        auto ac = interleaving_distance(A, C), cb = interleaving_distance(C, B);
        if (!ac.is_inf() && !cb.is_inf()) CHECK(!(ab > ExtRational(ac.value + cb.value)));
        auto D = dint_variant(A, B);
        if (!D.is_inf()) {
            CHECK(!(ExtRational(D.value / Rational(2)) > ab));
            CHECK(!(ab > D));
        } else {
            CHECK(ab.is_inf());
        }
        CHECK(!(retract_interleaving(A, B) > interleaving_distance(A + K, B)));
    }
}

TEST_CASE("matching distances equal the morphism oracle on small barcodes") {
    auto all = oracle::small_barcodes(3, 3);
    int checked = 0;
    for (const auto& X : all) {
        for (const auto& Y : all) {
            if (X.size() + Y.size() > 3) continue;
            CHECK(interleaving_distance(X, Y) == oracle::dint(X, Y));
            CHECK(retract_interleaving(X, Y) == oracle::drint(X, Y));
            CHECK(dint_variant(X, Y) == oracle::Dint(X, Y));
            ++checked;
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("json round trip") {
    Barcode c(2);
    c.add(Rational(1, 3), ExtRational::infinity(), 1);
    c.add(Rational(0), ExtRational(Rational(5, 2)), 3);
    auto j = c.to_json();
    CHECK(Barcode::from_json(j) == c);
    CHECK(j["bars"][0]["degree"] == 1);
}
