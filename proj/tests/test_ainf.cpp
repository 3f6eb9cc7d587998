#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tpc/ainf.hpp"
#include "tpc/bar.hpp"
#include "tpc/fukaya_models.hpp"

using namespace tpc;

namespace {

NovikovElement T(const Rational& e) { return NovikovElement::monomial(e); }

// One object, e and an idempotent x in degree 0; all degrees collapse with modulus 1.
TabulatedAInfCategory idempotent_algebra() {
    TabulatedAInfCategory A;
    A.modulus = 1;
    auto X = A.add_object("X");
    A.add_unit(X, "e");
    auto x = A.add_generator("x", X, X, 0, Rational(0));
    A.set_mu({x, x}, {{x, NovikovElement::one()}});
    A.complete_through = 6;
    return A;
}

TensorVec random_cone_element(const TabulatedAInfCategory& A, std::size_t K, std::mt19937_64& rng, std::size_t max_len) {
    TensorVec v;
    const std::size_t terms = 1 + rng() % 3;
    for (std::size_t i = 0; i < terms; ++i) {
        const std::size_t len = 1 + rng() % max_len;
        auto ts = A.tuples(len, K, K);
        if (ts.empty()) continue;
        add_term(v, ts[rng() % ts.size()], T(Rational(static_cast<std::int64_t>(rng() % 4), 4)));
    }
    return v;
}

// T^{-1/2} a*a*a + e*pt*e with a = pt + T^{1/4} e
TensorVec equator_witness(const TabulatedAInfCategory& A) {
    const auto e = A.index_of("e"), pt = A.index_of("pt");
    std::vector<std::pair<std::size_t, Rational>> a{{pt, Rational(0)}, {e, Rational(1, 4)}};
    TensorVec h;
    for (const auto& [g1, s1] : a)
        for (const auto& [g2, s2] : a)
            for (const auto& [g3, s3] : a) add_term(h, {g1, g2, g3}, T(s1 + s2 + s3 - Rational(1, 2)));
    add_term(h, {e, pt, e}, NovikovElement::one());
    return h;
}

}  // namespace

TEST_CASE("verify_ainf on small categories") {
    auto A = idempotent_algebra();
    auto r = verify_ainf(A, 5);
    CHECK(r.passed());
    CHECK(r.uncheckable.empty());
    CHECK(r.checked > 0);

    auto S = build_single_equator();
    auto rs = verify_ainf(S, 6);
    CHECK(rs.passed());
    CHECK(rs.uncheckable.empty());
}

TEST_CASE("corrupted mu_3 is reported with its tuple") {
    auto A = idempotent_algebra();
    auto x = A.index_of("x");
    A.set_mu({x, x, x}, {{x, T(Rational(1))}});
    auto r = verify_ainf(A, 4);
    CHECK_FALSE(r.passed());
    bool found = false;
    for (const auto& f : r.failures) found = found || f.find("(x,x,x,x)") != std::string::npos;
    CHECK(found);
}

TEST_CASE("axiom violations") {
    auto A = build_single_equator();
    auto pt = A.index_of("pt"), e = A.index_of("e");
    auto B = A;
    B.set_mu({pt, pt}, {{pt, NovikovElement::one()}});
    CHECK_FALSE(verify_ainf(B, 3).passed());
    auto C = A;
    C.set_mu({pt, pt, pt}, {{e, T(Rational(-1))}});
    CHECK_FALSE(verify_ainf(C, 3).passed());
    auto D = A;
    D.set_mu({e, pt}, {});
    CHECK_FALSE(verify_ainf(D, 2).passed());
}

TEST_CASE("uncovered relations are listed") {
    TabulatedAInfCategory A;
    auto X = A.add_object("X");
    A.add_unit(X, "e");
    A.add_generator("p", X, X, 1, Rational(0));
    auto r = verify_ainf(A, 3);
    CHECK(r.passed());
    CHECK_FALSE(r.uncheckable.empty());
}

TEST_CASE("json round trip") {
    auto A = build_single_equator();
    auto j = A.to_json(6);
    auto B = TabulatedAInfCategory::from_json(j);
    CHECK(B.to_json(6) == j);
    for (std::size_t d = 1; d <= 6; ++d)
        for (const auto& t : A.tuples(d)) CHECK(*A.mu(t) == *B.mu(t));
    auto C = TabulatedAInfCategory::from_json(nlohmann::json::parse(j.dump()));
    CHECK(verify_ainf(C, 5).passed());
}

TEST_CASE("normalized shift") {
    TabulatedAInfCategory A;
    auto X = A.add_object("X"), Y = A.add_object("Y"), Z = A.add_object("Z", Rational(1), 0, "X");
    A.add_unit(X, "eX");
    A.add_unit(Y, "eY");
    A.add_unit(Z, "eZ");
    auto f = A.add_generator("f", X, Y, 0, Rational(1, 3));
    auto g = A.add_generator("g", X, Z, 0, Rational(0));
    auto S0 = shift_category(A, Rational(0));
    for (std::size_t i = 0; i < A.gens.size(); ++i) CHECK(S0.category.gens[i].level == A.gens[i].level);
    auto S = shift_category(A, Rational(2, 5));
    CHECK(S.category.gens[f].level == Rational(1, 3) + Rational(2, 5));
    CHECK(S.category.gens[g].level == Rational(0));
    CHECK(S.category.gens[*A.units[X]].level == Rational(0));
    CHECK(S.eta_filtered(A));
    CHECK_THROWS(shift_category(A, Rational(-1)));
}

TEST_CASE("bar complex") {
    auto A = build_single_equator();
    const auto L = A.object_index("L");
    auto R = bar_complex(A, {L}, L, 3);
    for (std::size_t j = 0; j < R.complex.size(); ++j) CHECK(lambda::apply(R.complex.d, R.complex.d[j]).empty());
    CHECK_NOTHROW(R.complex.validate());
    // mu^B is a chain map into A(L, L)
    for (std::size_t j = 0; j < R.complex.size(); ++j) {
        auto lhs = lambda::apply(R.mu_map, R.complex.d[j]);
        auto rhs = lambda::apply(R.target.d, R.mu_map[j]);
        lambda::add_shifted(lhs, rhs, Rational(0));
        CHECK(lhs.empty());
    }
    auto h = equator_witness(A);
    CHECK(bar_differential(A, h).empty());
    CHECK(bar_mu(A, h) == LambdaVec{{A.index_of("e"), NovikovElement::one()}});
    CHECK(*tensor_vec_level(A, h) == Rational(1, 2));
    TensorVec only_cube;
    for (const auto& [t, c] : h)
        if (t.size() == 3 && t != Tensor{A.index_of("e"), A.index_of("pt"), A.index_of("e")}) only_cube.emplace(t, c);
    CHECK(bar_mu(A, only_cube) == LambdaVec{{A.index_of("e"), NovikovElement::one()}});

    auto empty = bar_complex(A, {}, L, 3);
    CHECK(empty.complex.size() == 0);
}

TEST_CASE("unit reach") {
    auto A = build_single_equator();
    const auto L = A.object_index("L");
    for (std::size_t N = 0; N <= 3; ++N) {
        auto u = unit_reach(A, {L}, L, N);
        CHECK(u.value == ExtRational(Rational(0)));
        CHECK(bar_differential(A, u.witness).empty());
    }
    CHECK(unit_reach(A, {}, L, 2).value == ExtRational::infinity());
}

TEST_CASE("cone product and contracting homotopy") {
    auto A = build_single_equator();
    const auto L = A.object_index("L");
    const auto e = A.index_of("e");
    std::mt19937_64 rng(41);
    TensorVec unit{{Tensor{e}, NovikovElement::one()}};
    for (int it = 0; it < 200; ++it) {
        auto x = random_cone_element(A, L, rng, 3), y = random_cone_element(A, L, rng, 3);
        auto lhs = cone_differential(A, star_product(A, x, y));
        auto rhs = star_product(A, cone_differential(A, x), y);
        add_terms(rhs, star_product(A, x, cone_differential(A, y)));
        CHECK(lhs == rhs);
        CHECK(star_product(A, x, unit) == x);
        auto dd = cone_differential(A, cone_differential(A, x));
        CHECK(dd.empty());
    }
    auto H = contracting_homotopy(A, L, equator_witness(A), {});
    CHECK(H.shift == Rational(1, 2));
    for (int it = 0; it < 100; ++it) {
        auto x = random_cone_element(A, L, rng, 3);
        auto r = cone_differential(A, H(x));
        add_terms(r, H(cone_differential(A, x)));
        CHECK(r == x);
        auto lx = tensor_vec_level(A, x), lh = tensor_vec_level(A, H(x));
        if (lx && lh) CHECK(!(*lh > *lx + H.shift));
    }
    TensorVec bad{{Tensor{A.index_of("pt"), e}, NovikovElement::one()}};
    CHECK_THROWS(contracting_homotopy(A, L, bad, {}));
}

TEST_CASE("lambda homotopy") {
    auto A = build_single_equator();
    const auto L = A.object_index("L");
    auto Y = yoneda_module(A, L);
    auto r = verify_lambda_homotopy(A, L, Y, 2);
    CHECK(r.passed());
    CHECK(r.uncheckable.empty());
    CHECK(r.instances > 0);

    TabulatedModule zero;
    CHECK(verify_lambda_homotopy(A, L, zero, 2).passed());

    auto bad = yoneda_module(A, L);
    bad.table[{Tensor{A.index_of("e")}, 1}] = {};
    CHECK_FALSE(verify_lambda_homotopy(A, L, bad, 2).passed());
}

TEST_CASE("split generation diagram") {
    auto A = build_single_equator();
    const auto L = A.object_index("L");
    auto r = verify_abouzaid_diagram(A, {L}, L, 2, 1);
    CHECK(r.passed());
    CHECK(r.uncheckable.empty());
    CHECK(r.checked == r.instances);
    CHECK(r.instances > 0);
}
