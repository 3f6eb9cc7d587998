#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tpc/filtered_complex.hpp"
#include "tpc/novikov_complex.hpp"
#include "tpc/persistence.hpp"

namespace tpc {

// ---------------------------------------------------------------------------
// Cone-length lower bounds and entropy estimators

inline std::size_t lower_bound_conelength(const std::vector<Barcode>& homs, const Rational& kF, const Rational& eps) {
    std::int64_t bars = 0;
    for (const auto& B : homs) bars += static_cast<std::int64_t>(bar_count(B, eps + eps, CountMode::all));
    return static_cast<std::size_t>((kF * Rational(bars)).ceil());
}

inline std::size_t lower_bound_conelength(const std::vector<ConciseBarcode>& homs, const Rational& kF, const Rational& eps) {
    std::int64_t bars = 0;
    for (const auto& B : homs) bars += static_cast<std::int64_t>(B.count_above(eps + eps));
    return static_cast<std::size_t>((kF * Rational(bars)).ceil());
}

enum class EntropyMode { exponential, slow };

struct EntropyEstimate {
    double value = 0;
    std::size_t first = 0, last = 0;  // window of iterates used, inclusive, 1-based
};

// Least-squares slope of log N_k against k (exponential) or log k (slow) over the upper half of the prefix.
inline EntropyEstimate entropy_estimate(const std::vector<double>& seq, EntropyMode mode,
                                        std::optional<std::size_t> first = std::nullopt) {
    if (seq.size() < 3) throw std::invalid_argument("entropy_estimate needs at least 3 points");
    EntropyEstimate est;
    est.last = seq.size();
    est.first = first ? *first : (seq.size() + 1) / 2;
    if (est.first < 1 || est.last < est.first + 2) throw std::invalid_argument("entropy window too short");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = 0;
    for (std::size_t k = est.first; k <= est.last; ++k) {
        const double v = seq[k - 1];
        if (!(v > 0)) throw std::invalid_argument("entropy_estimate needs positive values");
        const double x = mode == EntropyMode::exponential ? static_cast<double>(k) : std::log(static_cast<double>(k));
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1;
    }
    est.value = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return est;
}

// ---------------------------------------------------------------------------
// Radial profile eta: 0 on [0,1], sigma x - k on [2,7], constant on [8,inf),
// cubic C^1 transitions, convex on (1,2) and concave on (7,8).

struct EtaProfile {
    double sigma = 1.0 + std::sqrt(2.0) / 100;  // irrational, so sigma n avoids rational lengths
    double k = 1.5;
    double tail = 0.0;  // cubic coefficient on (7,8)

    EtaProfile() = default;
    EtaProfile(double s, double kk, double t = 0.0) : sigma(s), k(kk), tail(t) { validate(); }

    // p(t) = a t^2 + b t^3 on (1,2) with p(1) = 2 sigma - k, p'(1) = sigma
    double a() const { return 5 * sigma - 3 * k; }
    double b() const { return 2 * k - 3 * sigma; }
    // q(t) = 7 sigma - k + sigma t + c t^2 + tail t^3 on (7,8) with q'(1) = 0
    double c() const { return -(sigma + 3 * tail) / 2; }

    void validate() const {
        if (!(sigma >= 1 && sigma < 1.5)) throw std::invalid_argument("sigma must lie in [1, 3/2)");
        if (!(k > 0 && k < 2)) throw std::invalid_argument("k must lie in (0, 2)");
        if (!(k > 4 * sigma / 3 && k < 5 * sigma / 3))
            throw std::invalid_argument("cubic transition on (1,2) is convex only for 4 sigma/3 < k < 5 sigma/3");
        if (!(tail > -sigma / 3 && tail < sigma / 3)) throw std::invalid_argument("tail must lie in (-sigma/3, sigma/3)");
        if (!(var() < 10)) throw std::invalid_argument("total variation must stay below 10");
    }
    double var() const { return 7 * sigma - k + sigma + c() + tail; }

    double operator()(double x) const {
        if (x <= 1) return 0;
        if (x < 2) {
            const double t = x - 1;
            return a() * t * t + b() * t * t * t;
        }
        if (x <= 7) return sigma * x - k;
        if (x < 8) {
            const double t = x - 7;
            return 7 * sigma - k + sigma * t + c() * t * t + tail * t * t * t;
        }
        return var();
    }
    double derivative(double x) const {
        if (x <= 1) return 0;
        if (x < 2) {
            const double t = x - 1;
            return 2 * a() * t + 3 * b() * t * t;
        }
        if (x <= 7) return sigma;
        if (x < 8) {
            const double t = x - 7;
            return sigma + 2 * c() * t + 3 * tail * t * t;
        }
        return 0;
    }
    double second_derivative(double x) const {
        if (x > 1 && x < 2) return 2 * a() + 6 * b() * (x - 1);
        if (x > 7 && x < 8) return 2 * c() + 6 * tail * (x - 7);
        return 0;
    }
};

struct EtaRoots {
    double r = 0, r_prime = 0;
};

// The two radii with eta'(r) = ell / n, one in (1,2) and one in (7,8).
inline EtaRoots eta_solve(const EtaProfile& eta, double ell, double n, double tol = 1e-12) {
    const double s = ell / n;
    if (!(s > 0)) throw std::invalid_argument("eta_solve needs ell / n > 0");
    if (!(s < eta.sigma)) throw std::invalid_argument("eta_solve needs ell / n < sigma");
    auto bisect = [&](double lo, double hi, bool increasing) {
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = (lo + hi) / 2;
            const double v = eta.derivative(mid) - s;
            if ((v < 0) == increasing) lo = mid;
            else hi = mid;
            if (std::abs(v) < tol * 1e-3) return mid;
        }
        return (lo + hi) / 2;
    };
    return {bisect(1.0, 2.0, true), bisect(7.0, 8.0, false)};
}

inline double action(const EtaProfile& eta, double r, double ell, double n) { return n * eta(r) - r * ell; }

// ---------------------------------------------------------------------------
// Geodesic length spectra and the Floer action model

struct LengthSpectrum {
    std::vector<std::pair<double, std::uint64_t>> lengths;  // (length, multiplicity), increasing

    std::uint64_t count_up_to(double T) const {
        std::uint64_t n = 0;
        for (const auto& [l, m] : lengths)
            if (l <= T) n += m;
        return n;
    }
    std::uint64_t total() const { return count_up_to(std::numeric_limits<double>::infinity()); }
    void normalize() {
        std::sort(lengths.begin(), lengths.end());
        std::vector<std::pair<double, std::uint64_t>> out;
        for (const auto& [l, m] : lengths) {
            if (!(l > 0)) throw std::invalid_argument("spectrum lengths must be positive");
            if (!out.empty() && out.back().first == l) out.back().second += m;
            else if (m > 0) out.emplace_back(l, m);
        }
        lengths = std::move(out);
    }
    // sigma n is not a length
    bool generic(double sigma, double n) const {
        for (const auto& [l, m] : lengths)
            if (l == sigma * n) return false;
        return true;
    }
};

// One length per line; blank lines and '#' comments skipped.
inline LengthSpectrum parse_spectrum(std::istream& in) {
    LengthSpectrum s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        double l;
        if (!(ls >> l)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw std::invalid_argument("spectrum line " + std::to_string(lineno) + ": not a number");
        }
        s.lengths.emplace_back(l, 1);
    }
    s.normalize();
    return s;
}

// Lengths on a grid of the given step with count(l <= T) = round(e^{hT} / (hT)), made monotone.
inline LengthSpectrum synthetic_spectrum(double h_top, double T_max, double step = 1.0 / 64) {
    if (!(h_top > 0 && T_max > 0 && step > 0)) throw std::invalid_argument("synthetic_spectrum parameters must be positive");
    LengthSpectrum s;
    std::uint64_t prev = 0;
    const auto steps = static_cast<std::int64_t>(std::floor(T_max / step + 1e-9));
    for (std::int64_t i = 1; i <= steps; ++i) {
        const double T = static_cast<double>(i) * step;
        const double target = std::round(std::exp(h_top * T) / (h_top * T));
        const auto cnt = std::max<std::uint64_t>(prev, static_cast<std::uint64_t>(target));
        if (cnt > prev) s.lengths.emplace_back(T, cnt - prev);
        prev = cnt;
    }
    return s;
}

struct GeodesicBar {
    double ell = 0;
    std::uint64_t multiplicity = 1;
    double r = 0, r_prime = 0;
    double gap = 0;           // A_n(gamma') - A_n(gamma)
    double gap_bound = 0;     // 5 n - 7 ell
    bool certified = false;   // n >= 7 ell / 5 + delta / 5
};

struct ActionModel {
    double n = 0, delta = 0;
    std::vector<GeodesicBar> bars;
    std::uint64_t count = 0;            // bars with gap >= delta, with multiplicity
    std::uint64_t certified_count = 0;  // from the rational bound

    ConciseBarcode barcode(std::size_t max_bars = 1u << 20) const {
        ConciseBarcode B;
        B.modulus = 2;
        std::uint64_t total = 0;
        for (const auto& b : bars) total += b.multiplicity;
        if (total > max_bars) throw std::length_error("action model has too many bars to materialize");
        for (const auto& b : bars)
            for (std::uint64_t i = 0; i < b.multiplicity; ++i)
                B.finite.push_back({0, Rational(static_cast<std::int64_t>(std::llround(b.gap * 1e9)), 1000000000)});
        return B;
    }
};

inline ActionModel floer_action_model(const LengthSpectrum& spec, const EtaProfile& eta, double n, double delta) {
    if (!spec.generic(eta.sigma, n)) throw std::invalid_argument("sigma n is a length of the spectrum");
    ActionModel M;
    M.n = n;
    M.delta = delta;
    for (const auto& [l, m] : spec.lengths) {
        if (!(l < n * eta.sigma)) continue;
        GeodesicBar b;
        b.ell = l;
        b.multiplicity = m;
        auto roots = eta_solve(eta, l, n);
        b.r = roots.r;
        b.r_prime = roots.r_prime;
        b.gap = action(eta, b.r_prime, l, n) - action(eta, b.r, l, n);
        b.gap_bound = 5 * n - 7 * l;
        b.certified = 5 * n >= 7 * l + delta;
        if (b.gap >= delta) M.count += m;
        if (b.certified) M.certified_count += m;
        M.bars.push_back(b);
    }
    return M;
}

// ---------------------------------------------------------------------------
// Dehn twist on the sphere: CF(L_1, Psi^k L) with 2k + 2 generators

struct DehnSphereModel {
    FloerComplex complex;
    std::size_t bar_count = 0;        // bars longer than 2 eps'
    std::size_t certified_count = 0;  // from the counting lemma
    Rational min_valuation;
};

inline DehnSphereModel dehn_sphere_model(std::size_t k, const Rational& eps_prime = Rational(1, 32)) {
    if (k < 1) throw std::invalid_argument("dehn_sphere_model needs k >= 1");
    if (eps_prime > Rational(1, 32) || eps_prime.sign() < 0) throw std::invalid_argument("eps' must lie in [0, 1/32]");
    DehnSphereModel D;
    D.complex = FloerComplex(2);
    auto& C = D.complex;
    C.add_generator("north", 1, Rational(0));
    C.add_generator("south", 0, Rational(0));
    std::vector<std::size_t> p, q;
    for (std::size_t i = 1; i <= k; ++i) {
        p.push_back(C.add_generator("p" + std::to_string(i), 0, Rational(0)));
        q.push_back(C.add_generator("q" + std::to_string(i), 1, Rational(0)));
    }
    // strips leaving the annulus cover a region of area at least 3/32
    const Rational v(3, 32);
    for (std::size_t i = 0; i < k; ++i) {
        C.add_entry(q[i], p[i], NovikovElement::monomial(v + Rational(static_cast<std::int64_t>(i % 3), 32)));
        if (i + 1 < k) C.add_entry(q[i], p[i + 1], NovikovElement::monomial(v + Rational(1, 8)));
    }
    C.validate();
    D.min_valuation = v;
    D.bar_count = concise_barcode(C).count_above(eps_prime + eps_prime);
    // counting lemma: m generators, r = rank at T = 1, all entries of valuation >= v > 2 eps'
    const std::size_t r = homology_rank_at_one(C);
    D.certified_count = v > eps_prime + eps_prime ? (C.size() - r) / 2 + r : r;
    return D;
}

}  // namespace tpc
