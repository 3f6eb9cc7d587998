#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpc/rational.hpp"

namespace tpc {

// Element of the Novikov field over Z/2: a finite set of exponents, each with
// coefficient 1, optionally known only below a cutoff.
class NovikovElement {
public:
    NovikovElement() = default;

    static NovikovElement zero() { return {}; }
    static NovikovElement one() { return monomial(Rational(0)); }
    static NovikovElement monomial(const Rational& e) {
        NovikovElement x;
        x.terms_.push_back(e);
        return x;
    }
    // Duplicated exponents cancel in pairs.
    static NovikovElement from_exponents(std::vector<Rational> exps, std::optional<Rational> precision = std::nullopt) {
        NovikovElement x;
        x.terms_ = cancel_pairs(std::move(exps));
        x.precision_ = precision;
        x.truncate_in_place();
        return x;
    }

    const std::vector<Rational>& terms() const { return terms_; }
    const std::optional<Rational>& precision() const { return precision_; }
    bool exact() const { return !precision_.has_value(); }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    bool contains(const Rational& e) const { return std::binary_search(terms_.begin(), terms_.end(), e); }

    // Least exponent, +inf for zero.
    ExtRational valuation() const {
        if (terms_.empty()) return ExtRational::infinity();
        return ExtRational(terms_.front());
    }

    NovikovElement truncated(const Rational& p) const {
        NovikovElement x = *this;
        if (!x.precision_ || p < *x.precision_) x.precision_ = p;
        x.truncate_in_place();
        return x;
    }

    NovikovElement shifted(const Rational& s) const {
        NovikovElement x;
        x.terms_.reserve(terms_.size());
        for (const auto& e : terms_) x.terms_.push_back(e + s);
        if (precision_) x.precision_ = *precision_ + s;
        return x;
    }

    friend NovikovElement operator+(const NovikovElement& a, const NovikovElement& b) {
        NovikovElement r;
        std::set_symmetric_difference(a.terms_.begin(), a.terms_.end(), b.terms_.begin(), b.terms_.end(),
                                      std::back_inserter(r.terms_));
        r.precision_ = min_prec(a.precision_, b.precision_);
        r.truncate_in_place();
        return r;
    }
    NovikovElement& operator+=(const NovikovElement& o) { return *this = *this + o; }
    friend NovikovElement operator-(const NovikovElement& a, const NovikovElement& b) { return a + b; }

    friend NovikovElement operator*(const NovikovElement& a, const NovikovElement& b) {
        NovikovElement r;
        std::optional<Rational> pa, pb;
        if (a.precision_) {
            if (!b.terms_.empty()) pa = *a.precision_ + b.terms_.front();
            else if (b.precision_) pa = *a.precision_ + *b.precision_;
        }
        if (b.precision_) {
            if (!a.terms_.empty()) pb = *b.precision_ + a.terms_.front();
            else if (a.precision_) pb = *a.precision_ + *b.precision_;
        }
        // exact zero times anything is exact zero
        if ((a.terms_.empty() && !a.precision_) || (b.terms_.empty() && !b.precision_)) return r;
        r.precision_ = min_prec(pa, pb);
        std::vector<Rational> prod;
        prod.reserve(a.terms_.size() * b.terms_.size());
        for (const auto& x : a.terms_) {
            for (const auto& y : b.terms_) {
                Rational s = x + y;
                if (r.precision_ && !(s < *r.precision_)) continue;
                prod.push_back(s);
            }
        }
        r.terms_ = cancel_pairs(std::move(prod));
        return r;
    }
    NovikovElement& operator*=(const NovikovElement& o) { return *this = *this * o; }

    // Inverse known exactly below the cutoff p (further limited by this element's own precision).
    NovikovElement invert(const Rational& p) const {
        if (terms_.empty()) throw std::domain_error("cannot invert zero Novikov element");
        const Rational v = terms_.front();
        Rational q = p + v;  // cutoff for the normalized inverse
        if (precision_) q = rmin(q, *precision_ - v);
        std::vector<Rational> u;  // this * T^{-v}, exponents >= 0 with u[0] = 0
        for (const auto& e : terms_) u.push_back(e - v);
        std::set<Rational> residual{Rational(0)};
        std::vector<Rational> w;
        while (!residual.empty()) {
            Rational e = *residual.begin();
            if (!(e < q)) break;
            w.push_back(e);
            for (const auto& x : u) {
                Rational s = e + x;
                if (!(s < q)) break;
                auto it = residual.find(s);
                if (it == residual.end()) residual.insert(s);
                else residual.erase(it);
            }
        }
        NovikovElement r;
        for (const auto& e : w) r.terms_.push_back(e - v);
        r.precision_ = q - v;
        r.truncate_in_place();
        return r;
    }

    friend bool operator==(const NovikovElement& a, const NovikovElement& b) {
        return a.terms_ == b.terms_ && a.precision_ == b.precision_;
    }

    // Equality of the parts both sides know.
    bool agrees_with(const NovikovElement& o) const {
        auto p = min_prec(precision_, o.precision_);
        if (!p) return terms_ == o.terms_;
        return truncated(*p).terms_ == o.truncated(*p).terms_;
    }

    std::string str() const {
        std::string s;
        for (const auto& e : terms_) {
            if (!s.empty()) s += " + ";
            s += "T^{" + e.str() + "}";
        }
        if (precision_) {
            if (!s.empty()) s += " + ";
            s += "O(T^{" + precision_->str() + "})";
        }
        return s.empty() ? std::string("0") : s;
    }

    static NovikovElement parse(const std::string& text) {
        NovikovElement x;
        std::vector<Rational> exps;
        std::size_t i = 0;
        auto skip = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
        auto read_exp = [&]() -> Rational {
            if (i < text.size() && text[i] == '^') {
                ++i;
                if (i < text.size() && text[i] == '{') {
                    auto close = text.find('}', i);
                    if (close == std::string::npos) throw parse_error("unclosed exponent in: " + text);
                    Rational r = Rational::parse(text.substr(i + 1, close - i - 1));
                    i = close + 1;
                    return r;
                }
                std::size_t j = i;
                while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '/' ||
                                           text[j] == '-' || text[j] == '.'))
                    ++j;
                Rational r = Rational::parse(text.substr(i, j - i));
                i = j;
                return r;
            }
            return Rational(1);
        };
        skip();
        if (text.substr(i) == "0") return x;
        while (i < text.size()) {
            skip();
            if (text.compare(i, 3, "O(T") == 0) {
                i += 3;
                Rational p = read_exp();
                skip();
                if (i >= text.size() || text[i] != ')') throw parse_error("bad precision term in: " + text);
                ++i;
                x.precision_ = p;
            } else if (i < text.size() && text[i] == 'T') {
                ++i;
                exps.push_back(read_exp());
            } else if (i < text.size() && text[i] == '1') {
                ++i;
                exps.push_back(Rational(0));
            } else {
                throw parse_error("bad Novikov element: " + text);
            }
            skip();
            if (i < text.size()) {
                if (text[i] != '+') throw parse_error("expected '+' in: " + text);
                ++i;
            }
        }
        x.terms_ = cancel_pairs(std::move(exps));
        x.truncate_in_place();
        return x;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : terms_) arr.push_back(e.str());
        if (!precision_) return arr;
        return nlohmann::json{{"terms", arr}, {"precision", precision_->str()}};
    }

    static NovikovElement from_json(const nlohmann::json& j) {
        std::vector<Rational> exps;
        std::optional<Rational> p;
        const nlohmann::json* arr = &j;
        if (j.is_object()) {
            arr = &j.at("terms");
            if (j.contains("precision")) p = Rational::parse(j.at("precision").get<std::string>());
        }
        if (!arr->is_array()) throw parse_error("Novikov element must be a JSON array of exponents");
        for (const auto& e : *arr) exps.push_back(Rational::parse(e.get<std::string>()));
        return from_exponents(std::move(exps), p);
    }

private:
    static std::optional<Rational> min_prec(const std::optional<Rational>& a, const std::optional<Rational>& b) {
        if (!a) return b;
        if (!b) return a;
        return rmin(*a, *b);
    }

    static std::vector<Rational> cancel_pairs(std::vector<Rational> v) {
        std::sort(v.begin(), v.end());
        std::vector<Rational> out;
        out.reserve(v.size());
        for (std::size_t i = 0; i < v.size();) {
            std::size_t j = i;
            while (j < v.size() && v[j] == v[i]) ++j;
            if ((j - i) % 2 == 1) out.push_back(v[i]);
            i = j;
        }
        return out;
    }

    void truncate_in_place() {
        if (!precision_) return;
        auto it = std::lower_bound(terms_.begin(), terms_.end(), *precision_);
        terms_.erase(it, terms_.end());
    }

    std::vector<Rational> terms_;
    std::optional<Rational> precision_;
};

// Working precision for truncated computations: TPC_PRECISION if set, else 64.
inline Rational default_precision() {
    if (const char* env = std::getenv("TPC_PRECISION")) return Rational::parse(env);
    return Rational(64);
}

namespace series {

// sum_{n>=0} T^{(2n+1)^2}
inline NovikovElement odd_squares(const Rational& precision) {
    std::vector<Rational> e;
    for (std::int64_t n = 0;; ++n) {
        Rational x((2 * n + 1) * (2 * n + 1));
        if (!(x < precision)) break;
        e.push_back(x);
    }
    return NovikovElement::from_exponents(std::move(e), precision);
}

// sum_{n in Z} T^{scale (n + beta)^2}, counted mod 2
inline NovikovElement theta(const Rational& beta, const Rational& scale, const Rational& precision) {
    if (scale.sign() <= 0) throw std::invalid_argument("theta scale must be positive");
    std::vector<Rational> e;
    // scale (n+beta)^2 < P forces |n + beta| < sqrt(P/scale) + 1
    double bound = std::sqrt(std::max(0.0, (precision / scale).to_double())) + std::abs(beta.to_double()) + 2.0;
    std::int64_t nb = static_cast<std::int64_t>(bound);
    for (std::int64_t n = -nb; n <= nb; ++n) {
        Rational t = Rational(n) + beta;
        Rational x = scale * t * t;
        if (x < precision) e.push_back(x);
    }
    return NovikovElement::from_exponents(std::move(e), precision);
}

// sum_{k>=0} sum_{d | 2k+1, d = +-1 (2N)} T^{(2k+1)/N}; for even N the residues +-1+N are admitted too.
inline NovikovElement divisor_sum(std::int64_t N, const Rational& precision) {
    if (N < 1) throw std::invalid_argument("divisor_sum needs N >= 1");
    std::vector<Rational> e;
    const std::int64_t m = 2 * N;
    auto admitted = [&](std::int64_t d) {
        std::int64_t r = d % m;
        if (r == 1 % m || r == (m - 1) % m) return true;
        if (N % 2 == 0 && (r == (1 + N) % m || r == (m - 1 + N) % m)) return true;
        return false;
    };
    for (std::int64_t k = 0;; ++k) {
        Rational x(2 * k + 1, N);
        if (!(x < precision)) break;
        std::int64_t v = 2 * k + 1;
        int count = 0;
        for (std::int64_t d = 1; d <= v; ++d)
            if (v % d == 0 && admitted(d)) ++count;
        if (count % 2 == 1) e.push_back(x);
    }
    return NovikovElement::from_exponents(std::move(e), precision);
}

}  // namespace series

}  // namespace tpc
