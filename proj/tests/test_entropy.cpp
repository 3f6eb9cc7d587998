#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tpc/entropy.hpp"

using namespace tpc;

TEST_CASE("cone-length lower bound") {
    Barcode L(0);
    L.add(Rational(0), ExtRational(Rational(1)), 0);
    L.add(Rational(0), ExtRational::infinity(), 0);
    L.add(Rational(2), ExtRational(Rational(22, 10)), 1);
    CHECK(lower_bound_conelength(std::vector<Barcode>{L}, Rational(1), Rational(1, 4)) == 2);
    CHECK(lower_bound_conelength(std::vector<Barcode>{L}, Rational(1, 2), Rational(1, 4)) == 1);
    CHECK(lower_bound_conelength(std::vector<Barcode>{}, Rational(1), Rational(1, 4)) == 0);
    CHECK(lower_bound_conelength(std::vector<Barcode>{Barcode(0)}, Rational(1), Rational(1, 4)) == 0);
}

TEST_CASE("entropy estimates") {
    std::vector<double> pow2, lin, cst;
    for (int k = 1; k <= 40; ++k) {
        pow2.push_back(std::pow(2.0, k));
        lin.push_back(k);
        cst.push_back(7);
    }
    CHECK(entropy_estimate(pow2, EntropyMode::exponential).value == doctest::Approx(std::log(2.0)));
    CHECK(entropy_estimate(lin, EntropyMode::slow).value == doctest::Approx(1.0));
    CHECK(entropy_estimate(cst, EntropyMode::exponential).value == doctest::Approx(0.0));
    CHECK(entropy_estimate(cst, EntropyMode::slow).value == doctest::Approx(0.0));
    CHECK_THROWS(entropy_estimate({1.0, 2.0}, EntropyMode::slow));
    auto e = entropy_estimate(lin, EntropyMode::slow, 5);
    CHECK(e.first == 5);
    CHECK(e.last == 40);
}

TEST_CASE("eta profile") {
    EtaProfile eta;
    CHECK_THROWS(EtaProfile(1.0, 1.0));
    CHECK_THROWS(EtaProfile(1.5, 1.9));
    CHECK(eta(0.5) == 0);
    CHECK(eta(3.0) == doctest::Approx(3 * eta.sigma - 1.5));
    CHECK(eta(9.0) == doctest::Approx(eta.var()));
    for (double x = 0; x <= 9; x += 0.001) {
        CHECK(eta.derivative(x) <= 1.5);
        if (x > 1.001 && x < 1.999) CHECK(eta.second_derivative(x) > 0);
        if (x > 7.001 && x < 7.999) CHECK(eta.second_derivative(x) < 0);
        // C^1 across the joints
        CHECK(std::abs(eta(x + 1e-7) - eta(x) - 1e-7 * eta.derivative(x)) < 1e-6);
    }
    EtaProfile e2(1.25, 1.9, 0.2);
    for (double ell : {0.1, 0.5, 1.0, 1.2}) {
        auto r = eta_solve(e2, ell, 1.0);
        CHECK(std::abs(e2.derivative(r.r) - ell) < 1e-12);
        CHECK(std::abs(e2.derivative(r.r_prime) - ell) < 1e-12);
        CHECK(r.r > 1);
        CHECK(r.r < 2);
        CHECK(r.r_prime > 7);
        CHECK(r.r_prime < 8);
    }
    CHECK_THROWS(eta_solve(eta, 2.0 * eta.sigma, 2.0));
}

TEST_CASE("action model") {
    EtaProfile eta(1.0, 1.5);
    LengthSpectrum s;
    s.lengths = {{1.0, 1}, {2.5, 1}, {3.5, 2}};
    s.normalize();
    auto M = floer_action_model(s, eta, 2.0, 1.0);
    // n <= ell: not admissible
    CHECK(M.bars.size() == 1);
    const auto& b = M.bars[0];
    CHECK(b.gap >= 3.0);
    CHECK(b.gap_bound == 3.0);
    CHECK(b.gap == doctest::Approx(action(eta, b.r_prime, 1.0, 2.0) - action(eta, b.r, 1.0, 2.0)));
    CHECK(M.count >= M.certified_count);
    CHECK(M.barcode().finite.size() == 1);
    for (double n : {3.0, 5.0, 8.0}) {
        auto A = floer_action_model(s, eta, n + 0.25, 0.5);
        CHECK(A.count >= A.certified_count);
        for (const auto& g : A.bars) CHECK(g.gap >= g.gap_bound - 1e-9);
    }
    CHECK_THROWS(floer_action_model(s, eta, 3.5, 1.0));
    std::istringstream in("1.5\n# comment\n\n2.25\n1.5\n");
    auto p = parse_spectrum(in);
    CHECK(p.lengths.size() == 2);
    CHECK(p.total() == 3);
    std::istringstream bad("1.5\nabc\n");
    CHECK_THROWS(parse_spectrum(bad));
}

TEST_CASE("synthetic spectrum growth") {
    auto s = synthetic_spectrum(1.0, 30.0);
    CHECK(s.count_up_to(20.0) == static_cast<std::uint64_t>(std::round(std::exp(20.0) / 20.0)));
    EtaProfile eta;
    std::vector<double> counts;
    for (int n = 10; n <= 40; ++n) counts.push_back(static_cast<double>(floer_action_model(s, eta, n, 1.0).count));
    auto est = entropy_estimate(counts, EntropyMode::exponential, 1);
    CHECK(est.value >= 5.0 / 8 - 0.1);
}

TEST_CASE("Dehn sphere model") {
    for (std::size_t k : {1u, 2u, 5u, 12u}) {
        auto D = dehn_sphere_model(k);
        CHECK(D.complex.size() == 2 * k + 2);
        CHECK(homology_rank_at_one(D.complex) == 2);
        CHECK(D.bar_count >= k);
        CHECK(D.certified_count >= k);
        auto B = concise_barcode(D.complex);
        for (const auto& b : B.finite) CHECK(b.length >= Rational(3, 32));
    }
    CHECK_THROWS(dehn_sphere_model(0));
    CHECK_THROWS(dehn_sphere_model(3, Rational(1, 16)));
    std::vector<double> lb;
    for (std::size_t k = 1; k <= 60; ++k) {
        auto D = dehn_sphere_model(k);
        lb.push_back(static_cast<double>(lower_bound_conelength(std::vector<ConciseBarcode>{concise_barcode(D.complex)},
                                                                Rational(1, 2), Rational(1, 32))));
    }
    auto slow = entropy_estimate(lb, EntropyMode::slow);
    CHECK(slow.value >= 0.9);
    CHECK(slow.value <= 1.1);
    CHECK(entropy_estimate(lb, EntropyMode::exponential).value < 0.1);
}
