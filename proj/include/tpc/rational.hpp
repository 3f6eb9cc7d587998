#pragma once

#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tpc {

struct overflow_error : std::overflow_error {
    using std::overflow_error::overflow_error;
};

struct parse_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Exact rational with 64-bit parts; intermediates in 128 bits.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) { assign(static_cast<__int128>(n), static_cast<__int128>(d)); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return (num_ > 0) - (num_ < 0); }

    std::int64_t floor() const {
        std::int64_t q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }
    std::int64_t ceil() const {
        std::int64_t q = num_ / den_;
        if (num_ % den_ != 0 && num_ > 0) ++q;
        return q;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        Rational r;
        r.assign(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                 static_cast<__int128>(a.den_) * b.den_);
        return r;
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        Rational r;
        r.assign(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                 static_cast<__int128>(a.den_) * b.den_);
        return r;
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        Rational r;
        r.assign(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
        return r;
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        Rational r;
        r.assign(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
        return r;
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        __int128 l = static_cast<__int128>(a.num_) * b.den_;
        __int128 r = static_cast<__int128>(b.num_) * a.den_;
        if (l < r) return std::strong_ordering::less;
        if (l > r) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    // Accepts "p", "p/q", and finite decimals such as "-1.25" or "3e-2".
    static Rational parse(const std::string& s) {
        auto trim = [](std::string t) {
            auto b = t.find_first_not_of(" \t\r\n");
            auto e = t.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
        };
        std::string t = trim(s);
        if (t.empty()) throw parse_error("empty rational");
        auto slash = t.find('/');
        if (slash != std::string::npos) {
            return Rational(parse_int(t.substr(0, slash)), parse_int(t.substr(slash + 1)));
        }
        std::int64_t exp10 = 0;
        auto epos = t.find_first_of("eE");
        if (epos != std::string::npos) {
            exp10 = parse_int(t.substr(epos + 1));
            t = t.substr(0, epos);
        }
        bool neg = false;
        std::size_t i = 0;
        if (i < t.size() && (t[i] == '+' || t[i] == '-')) neg = t[i++] == '-';
        __int128 n = 0;
        std::int64_t frac_digits = 0;
        bool dot = false, any = false;
        for (; i < t.size(); ++i) {
            char c = t[i];
            if (c == '.' && !dot) { dot = true; continue; }
            if (c < '0' || c > '9') throw parse_error("bad rational: " + s);
            any = true;
            n = n * 10 + (c - '0');
            if (n > static_cast<__int128>(INT64_MAX)) throw parse_error("rational literal too large: " + s);
            if (dot) ++frac_digits;
        }
        if (!any) throw parse_error("bad rational: " + s);
        std::int64_t shift = exp10 - frac_digits;
        if (shift > 18 || shift < -18) throw parse_error("exponent out of range: " + s);
        __int128 den = 1;
        for (std::int64_t k = 0; k < -shift; ++k) den *= 10;
        for (std::int64_t k = 0; k < shift; ++k) n *= 10;
        Rational r;
        r.assign(neg ? -n : n, den);
        return r;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    static std::int64_t parse_int(const std::string& s) {
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &pos);
        } catch (...) {
            throw parse_error("bad integer: " + s);
        }
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
        if (pos != s.size()) throw parse_error("bad integer: " + s);
        return v;
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    void assign(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 g = gcd128(n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n == 0) d = 1;
        if (n > INT64_MAX || n < -INT64_MAX || d > INT64_MAX) throw overflow_error("rational overflow");
        num_ = static_cast<std::int64_t>(n);
        den_ = static_cast<std::int64_t>(d);
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rational rmin(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational rabs(const Rational& a) { return a.sign() < 0 ? -a : a; }

// Rational extended by +infinity; used for bar deaths and valuations of zero.
struct ExtRational {
    Rational value;
    bool inf = false;

    ExtRational() = default;
    ExtRational(const Rational& r) : value(r) {}
    ExtRational(std::int64_t v) : value(v) {}
    static ExtRational infinity() {
        ExtRational e;
        e.inf = true;
        return e;
    }
    bool is_inf() const { return inf; }

    friend bool operator==(const ExtRational& a, const ExtRational& b) {
        if (a.inf || b.inf) return a.inf == b.inf;
        return a.value == b.value;
    }
    friend std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b) {
        if (a.inf && b.inf) return std::strong_ordering::equal;
        if (a.inf) return std::strong_ordering::greater;
        if (b.inf) return std::strong_ordering::less;
        return a.value <=> b.value;
    }
    friend ExtRational operator+(const ExtRational& a, const Rational& b) {
        if (a.inf) return a;
        return ExtRational(a.value + b);
    }
    friend ExtRational operator-(const ExtRational& a, const Rational& b) {
        if (a.inf) return a;
        return ExtRational(a.value - b);
    }
    std::string str() const { return inf ? std::string("inf") : value.str(); }
    static ExtRational parse(const std::string& s) {
        if (s == "inf" || s == "+inf" || s == "infinity") return infinity();
        return ExtRational(Rational::parse(s));
    }
};

}  // namespace tpc

template <>
struct std::hash<tpc::Rational> {
    std::size_t operator()(const tpc::Rational& r) const noexcept {
        return std::hash<std::int64_t>()(r.num()) * 1000003u ^ std::hash<std::int64_t>()(r.den());
    }
};
