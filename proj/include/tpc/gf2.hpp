#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace tpc::gf2 {

using Vec = boost::dynamic_bitset<>;

// Column-major matrix: cols[j] is the image of basis vector j.
struct Matrix {
    std::size_t rows = 0;
    std::vector<Vec> cols;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c, Vec(r)) {}

    std::size_t ncols() const { return cols.size(); }
    bool get(std::size_t i, std::size_t j) const { return cols[j][i]; }
    void set(std::size_t i, std::size_t j, bool v = true) { cols[j][i] = v; }
    void flip(std::size_t i, std::size_t j) { cols[j].flip(i); }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.cols[i][i] = true;
        return m;
    }

    Vec apply(const Vec& v) const {
        if (v.size() != cols.size()) throw std::invalid_argument("gf2: dimension mismatch");
        Vec out(rows);
        for (auto j = v.find_first(); j != Vec::npos; j = v.find_next(j)) out ^= cols[j];
        return out;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols.size() != b.rows) throw std::invalid_argument("gf2: dimension mismatch");
        Matrix c;
        c.rows = a.rows;
        c.cols.reserve(b.cols.size());
        for (const auto& col : b.cols) c.cols.push_back(a.apply(col));
        return c;
    }
    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        if (a.rows != b.rows || a.cols.size() != b.cols.size()) throw std::invalid_argument("gf2: dimension mismatch");
        Matrix c = a;
        for (std::size_t j = 0; j < c.cols.size(); ++j) c.cols[j] ^= b.cols[j];
        return c;
    }
    friend bool operator==(const Matrix& a, const Matrix& b) { return a.rows == b.rows && a.cols == b.cols; }

    bool is_zero() const {
        for (const auto& c : cols)
            if (c.any()) return false;
        return true;
    }
};

inline Vec unit(std::size_t n, std::size_t i) {
    Vec v(n);
    v[i] = true;
    return v;
}

// Incremental echelon basis; pivot of a vector is its lowest set bit.
class Span {
public:
    explicit Span(std::size_t n = 0) : n_(n) {}

    std::size_t dimension() const { return basis_.size(); }

    // Residual of v modulo the span; combo records which stored vectors were used.
    Vec reduce_full(Vec v, Vec* combo = nullptr) const {
        if (combo) *combo = Vec(basis_.size());
        Vec out(v.size());
        while (v.any()) {
            auto p = v.find_first();
            auto it = pivot_index(p);
            if (!it) {
                out[p] = true;
                v[p] = false;
                continue;
            }
            v ^= basis_[*it];
            if (combo) *combo ^= combos_[*it];
        }
        return out;
    }

    bool contains(const Vec& v) const { return reduce_full(v).none(); }

    // Adds v; returns true when independent.
    bool add(const Vec& v) {
        Vec combo;
        Vec r = reduce_full(v, &combo);
        if (r.none()) return false;
        for (auto& c : combos_) c.resize(basis_.size() + 1);
        combo.resize(basis_.size() + 1);
        combo[basis_.size()] = true;
        auto p = r.find_first();
        if (owner_.size() <= p) owner_.resize(std::max(p + 1, r.size()), -1);
        owner_[p] = static_cast<std::ptrdiff_t>(basis_.size());
        basis_.push_back(r);
        combos_.push_back(combo);
        return true;
    }

    // Coordinates of v in terms of the vectors passed to add() (only independent ones are kept), if in span.
    std::optional<Vec> solve(const Vec& v) const {
        Vec combo;
        Vec r = reduce_full(v, &combo);
        if (r.any()) return std::nullopt;
        return combo;
    }

private:
    std::optional<std::size_t> pivot_index(std::size_t p) const {
        if (p >= owner_.size() || owner_[p] < 0) return std::nullopt;
        return static_cast<std::size_t>(owner_[p]);
    }

    std::size_t n_;
    std::vector<Vec> basis_;
    std::vector<Vec> combos_;
    std::vector<std::ptrdiff_t> owner_;
};

inline std::size_t rank(const std::vector<Vec>& vs) {
    if (vs.empty()) return 0;
    Span s(vs.front().size());
    for (const auto& v : vs) s.add(v);
    return s.dimension();
}

inline std::size_t rank(const Matrix& m) { return rank(m.cols); }

// Basis of {x : M x = 0}.
inline std::vector<Vec> kernel(const Matrix& m) {
    const std::size_t n = m.ncols();
    Span s(m.rows);
    std::vector<Vec> out;
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < n; ++j) {
        Vec combo;
        Vec r = s.reduce_full(m.cols[j], &combo);
        if (r.none()) {
            Vec k(n);
            k[j] = true;
            for (auto i = combo.find_first(); i != Vec::npos; i = combo.find_next(i)) k[kept[i]] = true;
            out.push_back(k);
        } else {
            s.add(m.cols[j]);
            kept.push_back(j);
        }
    }
    return out;
}

inline Matrix inverse(const Matrix& m) {
    const std::size_t n = m.ncols();
    if (m.rows != n) throw std::invalid_argument("gf2: inverse of non-square matrix");
    Span s(n);
    for (const auto& c : m.cols)
        if (!s.add(c)) throw std::invalid_argument("gf2: singular matrix");
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i) inv.cols[i] = *s.solve(unit(n, i));
    return inv;
}

}  // namespace tpc::gf2
