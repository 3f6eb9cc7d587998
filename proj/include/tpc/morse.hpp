#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tpc::morse {

struct infeasible_parameters : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CriticalPoint {
    std::vector<double> x;  // coordinates
    double radius = 0;      // eta_z
    int index = 0;          // Morse index
};

// Smooth function on a circle (dim 1) or flat torus (dim 2) given analytically,
// with declared critical points and their balls.
struct PiecewiseProfile {
    std::size_t dim = 1;
    std::vector<double> periods{1.0};
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> gradient;
    std::vector<CriticalPoint> critical;
    double K = 0, delta = 0, eta = 0;

    double operator()(double x) const { return value({x}); }
    double variation_bound() const {
        double hi = 0;
        for (const auto& c : critical) hi = std::max(hi, value(c.x));
        return hi;
    }
};

namespace detail {

inline double wrap(double x, double period) {
    double r = std::fmod(x, period);
    return r < 0 ? r + period : r;
}

// |u| with the corner replaced by (u^2 + eps^2) / (2 eps) on |u| < eps
inline double smooth_abs(double u, double eps) { return std::abs(u) < eps ? (u * u + eps * eps) / (2 * eps) : std::abs(u); }
inline double smooth_abs_d(double u, double eps) { return std::abs(u) < eps ? u / eps : (u < 0 ? -1.0 : 1.0); }

inline double circle_distance(double a, double b, double period) {
    double d = std::abs(wrap(a - b, period));
    return std::min(d, period - d);
}

}  // namespace detail

// Zigzag with slopes +-1 on m equal segments (m even, c/m - eta < K), corners smoothed in balls of radius eta.
inline PiecewiseProfile build_1d(double K, double delta, double eta, double circumference = 1.0) {
    if (!(K > 0)) throw infeasible_parameters("K must be positive");
    if (!(delta > 0 && delta < 1)) throw infeasible_parameters("delta must lie in (0, 1)");
    if (!(eta > 0)) throw infeasible_parameters("eta must be positive");
    if (!(circumference > 0)) throw infeasible_parameters("circumference must be positive");
    std::size_t m = 2;
    while (circumference / static_cast<double>(m) - eta >= K) m += 2;
    const double seg = circumference / static_cast<double>(m);
    if (!(2 * eta < seg)) throw infeasible_parameters("eta too large for the segment length " + std::to_string(seg));
    PiecewiseProfile P;
    P.dim = 1;
    P.periods = {circumference};
    P.K = K;
    P.delta = delta;
    P.eta = eta;
    const double c = circumference;
    // minima at even multiples of seg, maxima at odd multiples
    auto raw = [seg, c, eta](double x) {
        x = detail::wrap(x, c);
        const double k = std::floor(x / seg);
        const double t = x - k * seg;           // position in segment
        const bool rising = static_cast<long long>(k) % 2 == 0;
        const double nearest = t < seg / 2 ? t : t - seg;  // signed offset to nearest vertex
        const double dist = std::abs(nearest);
        const bool at_min = rising == (t < seg / 2);
        if (at_min) return detail::smooth_abs(dist, eta) - eta / 2;
        return seg - detail::smooth_abs(dist, eta) - eta / 2;
    };
    auto raw_d = [seg, c, eta](double x) {
        x = detail::wrap(x, c);
        const double k = std::floor(x / seg);
        const double t = x - k * seg;
        const bool rising = static_cast<long long>(k) % 2 == 0;
        const double nearest = t < seg / 2 ? t : t - seg;
        const bool at_min = rising == (t < seg / 2);
        const double d = detail::smooth_abs_d(nearest, eta);
        return at_min ? d : -d;
    };
    P.value = [raw](const std::vector<double>& x) { return raw(x[0]); };
    P.gradient = [raw_d](const std::vector<double>& x) { return std::vector<double>{raw_d(x[0])}; };
    for (std::size_t i = 0; i < m; ++i) P.critical.push_back({{static_cast<double>(i) * seg}, eta, i % 2 == 0 ? 0 : 1});
    return P;
}

// Two-critical-point height function on the circle: a single up and down segment.
inline PiecewiseProfile height_function(double eta, double circumference = 1.0) {
    return build_1d(circumference / 2, 0.5, eta, circumference);
}

// Reflects f above each cut level c (processed from the top): f -> c - |c - f| smoothed at width eps.
inline PiecewiseProfile fold_step(const PiecewiseProfile& f, std::vector<double> cuts, double eps) {
    if (cuts.empty()) return f;
    if (f.dim != 1) throw std::invalid_argument("fold_step acts on circle profiles");
    if (!(eps > 0)) throw std::invalid_argument("fold width must be positive");
    std::sort(cuts.rbegin(), cuts.rend());
    PiecewiseProfile g = f;
    for (double c : cuts) {
        for (const auto& z : g.critical) {
            const double v = g.value(z.x);
            if (std::abs(v - c) <= eps) throw std::invalid_argument("cut level meets a critical value");
        }
        // new critical points where g crosses c, located by bisection between sign changes on a fine grid
        const double period = g.periods[0];
        const std::size_t n = 1u << 16;
        std::vector<CriticalPoint> added;
        const auto prev_val = g.value;
        const auto prev_grad = g.gradient;
        double slope_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double a = period * static_cast<double>(i) / static_cast<double>(n);
            double b = period * static_cast<double>(i + 1) / static_cast<double>(n);
            double fa = prev_val({a}) - c, fb = prev_val({b}) - c;
            if ((fa < 0) == (fb < 0)) continue;
            for (int it = 0; it < 80; ++it) {
                const double mid = (a + b) / 2;
                const double fm = prev_val({mid}) - c;
                if ((fm < 0) == (fa < 0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            const double z = (a + b) / 2;
            const double s = std::abs(prev_grad({z})[0]);
            slope_min = std::min(slope_min, s);
            added.push_back({{z}, eps / s, 1});
        }
        for (const auto& z : g.critical)
            for (const auto& w : added)
                if (detail::circle_distance(z.x[0], w.x[0], period) <= z.radius + w.radius)
                    throw std::invalid_argument("fold band meets a critical ball");
        // critical points above the cut turn into minima of the folded function
        std::vector<CriticalPoint> kept;
        for (auto z : g.critical) {
            if (prev_val(z.x) > c) z.index = 1 - z.index;
            kept.push_back(z);
        }
        kept.insert(kept.end(), added.begin(), added.end());
        g.critical = std::move(kept);
        g.value = [prev_val, c, eps](const std::vector<double>& x) {
            return c - detail::smooth_abs(c - prev_val(x), eps);
        };
        g.gradient = [prev_val, prev_grad, c, eps](const std::vector<double>& x) {
            const double u = c - prev_val(x);
            return std::vector<double>{detail::smooth_abs_d(u, eps) * prev_grad(x)[0]};
        };
        g.eta = std::max(g.eta, eps / slope_min);
    }
    // restore min = 0
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& z : g.critical) lo = std::min(lo, g.value(z.x));
    const auto v = g.value;
    g.value = [v, lo](const std::vector<double>& x) { return v(x) - lo; };
    return g;
}

// Replaces the smoothing at a corner critical point z by one of smaller radius.
inline PiecewiseProfile shrink_step(const PiecewiseProfile& f, std::size_t z, double new_radius) {
    if (f.dim != 1) throw std::invalid_argument("shrink_step acts on circle profiles");
    if (z >= f.critical.size()) throw std::out_of_range("no such critical point");
    const auto cp = f.critical[z];
    if (!(new_radius > 0 && new_radius < cp.radius)) throw std::invalid_argument("new radius must lie in (0, eta_z)");
    const double r = cp.radius, x0 = cp.x[0], period = f.periods[0];
    // linear continuation from the ball boundary
    const double left = x0 - r, right = x0 + r;
    const double vl = f.value({left}), vr = f.value({right});
    const double sl = f.gradient({left - 1e-9})[0], sr = f.gradient({right + 1e-9})[0];
    if (!(sl * sr < 0)) throw std::invalid_argument("shrink_step needs a corner critical point");
    if (std::abs(std::abs(sl) - std::abs(sr)) > 1e-9) throw std::invalid_argument("shrink_step needs symmetric slopes");
    const double s = std::abs(sl);
    const double apex = (vl + vr) / 2 + (sl > 0 ? s * r : -s * r);
    const double sign = sl > 0 ? -1.0 : 1.0;  // max: apex - s|t|, min: apex + s|t|
    PiecewiseProfile g = f;
    const auto v = f.value;
    const auto dv = f.gradient;
    g.value = [v, x0, r, period, apex, sign, s, new_radius](const std::vector<double>& x) {
        double t = detail::wrap(x[0] - x0 + period / 2, period) - period / 2;
        if (std::abs(t) >= r) return v(x);
        return apex + sign * s * detail::smooth_abs(t, new_radius);
    };
    g.gradient = [dv, x0, r, period, sign, s, new_radius](const std::vector<double>& x) {
        double t = detail::wrap(x[0] - x0 + period / 2, period) - period / 2;
        if (std::abs(t) >= r) return dv(x);
        return std::vector<double>{sign * s * detail::smooth_abs_d(t, new_radius)};
    };
    g.critical[z].radius = new_radius;
    // keep min = 0
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& c : g.critical) lo = std::min(lo, g.value(c.x));
    const auto gv = g.value;
    g.value = [gv, lo](const std::vector<double>& x) { return gv(x) - lo; };
    return g;
}

// f(x, y) = g(x) + h(y) on the flat torus; critical balls of radius sqrt(2) max(eta_g, eta_h).
inline PiecewiseProfile torus_product(const PiecewiseProfile& g, const PiecewiseProfile& h) {
    if (g.dim != 1 || h.dim != 1) throw std::invalid_argument("torus_product takes circle profiles");
    PiecewiseProfile P;
    P.dim = 2;
    P.periods = {g.periods[0], h.periods[0]};
    P.K = g.K + h.K;
    P.delta = std::min(g.delta, h.delta);
    P.eta = std::sqrt(2.0) * std::max(g.eta, h.eta);
    const auto gv = g.value, hv = h.value;
    const auto gd = g.gradient, hd = h.gradient;
    P.value = [gv, hv](const std::vector<double>& x) { return gv({x[0]}) + hv({x[1]}); };
    P.gradient = [gd, hd](const std::vector<double>& x) { return std::vector<double>{gd({x[0]})[0], hd({x[1]})[0]}; };
    for (const auto& a : g.critical)
        for (const auto& b : h.critical)
            P.critical.push_back({{a.x[0], b.x[0]}, std::sqrt(2.0) * std::max(a.radius, b.radius), a.index + b.index});
    return P;
}

struct VerifyReport {
    bool passed = true;
    std::vector<std::string> violations;
    double min = 0, max = 0;
    double min_gradient_outside = std::numeric_limits<double>::infinity();
    std::size_t critical_samples = 0;  // sign changes of f' on the grid (circle only)
    std::size_t declared = 0;

    void fail(const std::string& s) {
        passed = false;
        if (violations.size() < 20) violations.push_back(s);
    }
};

// Grid check with central differences: 0 <= f <= K, min = 0, |grad f| >= delta outside the declared balls.
inline VerifyReport verify(const PiecewiseProfile& f, std::size_t grid) {
    VerifyReport rep;
    rep.declared = f.critical.size();
    if (grid < 4) throw std::invalid_argument("grid too coarse");
    const double slack = f.delta * 1e-3;
    for (const auto& c : f.critical)
        if (c.radius > f.eta * (1 + 1e-12)) rep.fail("critical ball radius " + std::to_string(c.radius) + " exceeds eta");
    for (std::size_t i = 0; i < f.critical.size(); ++i)
        for (std::size_t j = i + 1; j < f.critical.size(); ++j) {
            double d2 = 0;
            for (std::size_t a = 0; a < f.dim; ++a) {
                const double d = detail::circle_distance(f.critical[i].x[a], f.critical[j].x[a], f.periods[a]);
                d2 += d * d;
            }
            if (std::sqrt(d2) <= f.critical[i].radius + f.critical[j].radius) rep.fail("critical balls overlap");
        }
    auto inside_ball = [&](const std::vector<double>& x) {
        for (const auto& c : f.critical) {
            double d2 = 0;
            for (std::size_t a = 0; a < f.dim; ++a) {
                const double d = detail::circle_distance(x[a], c.x[a], f.periods[a]);
                d2 += d * d;
            }
            if (std::sqrt(d2) <= c.radius) return true;
        }
        return false;
    };
    rep.min = std::numeric_limits<double>::infinity();
    rep.max = -rep.min;
    const std::size_t total = f.dim == 1 ? grid : grid * grid;
    std::vector<double> h(f.dim);
    for (std::size_t a = 0; a < f.dim; ++a) h[a] = f.periods[a] / static_cast<double>(grid);
    std::vector<double> deriv;
    for (std::size_t s = 0; s < total; ++s) {
        std::vector<double> x(f.dim);
        x[0] = h[0] * static_cast<double>(s % grid);
        if (f.dim == 2) x[1] = h[1] * static_cast<double>(s / grid);
        const double v = f.value(x);
        rep.min = std::min(rep.min, v);
        rep.max = std::max(rep.max, v);
        double g2 = 0;
        for (std::size_t a = 0; a < f.dim; ++a) {
            auto xp = x, xm = x;
            xp[a] += h[a];
            xm[a] -= h[a];
            const double d = (f.value(xp) - f.value(xm)) / (2 * h[a]);
            g2 += d * d;
            if (f.dim == 1) deriv.push_back(d);
        }
        const double g = std::sqrt(g2);
        if (!inside_ball(x)) {
            rep.min_gradient_outside = std::min(rep.min_gradient_outside, g);
            if (g < f.delta - slack) {
                std::string at;
                for (auto c : x) at += (at.empty() ? "" : ",") + std::to_string(c);
                rep.fail("gradient " + std::to_string(g) + " < delta at (" + at + ")");
            }
        }
    }
    // critical values also count toward the range
    for (const auto& c : f.critical) {
        const double v = f.value(c.x);
        rep.min = std::min(rep.min, v);
        rep.max = std::max(rep.max, v);
    }
    if (rep.min < -1e-12) rep.fail("negative value " + std::to_string(rep.min));
    if (std::abs(rep.min) > 1e-9) rep.fail("minimum " + std::to_string(rep.min) + " is not 0");
    if (rep.max > f.K) rep.fail("variation " + std::to_string(rep.max) + " exceeds K");
    if (f.dim == 1) {
        for (std::size_t i = 0; i < deriv.size(); ++i) {
            const double a = deriv[i], b = deriv[(i + 1) % deriv.size()];
            if ((a > 0) != (b > 0)) ++rep.critical_samples;
        }
        if (rep.critical_samples != rep.declared)
            rep.fail("derivative changes sign " + std::to_string(rep.critical_samples) + " times, declared " +
                     std::to_string(rep.declared));
    }
    return rep;
}

// CSV: sample,value (circle) or x,y,value (torus)
inline void write_csv(std::ostream& out, const PiecewiseProfile& f, std::size_t grid) {
    out.precision(17);
    if (f.dim == 1) {
        out << "x,value\n";
        for (std::size_t i = 0; i < grid; ++i) {
            const double x = f.periods[0] * static_cast<double>(i) / static_cast<double>(grid);
            out << x << ',' << f.value({x}) << '\n';
        }
        return;
    }
    out << "x,y,value\n";
    for (std::size_t j = 0; j < grid; ++j)
        for (std::size_t i = 0; i < grid; ++i) {
            const double x = f.periods[0] * static_cast<double>(i) / static_cast<double>(grid);
            const double y = f.periods[1] * static_cast<double>(j) / static_cast<double>(grid);
            out << x << ',' << y << ',' << f.value({x, y}) << '\n';
        }
}

}  // namespace tpc::morse
