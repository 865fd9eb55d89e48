#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

namespace wpt::numerics {

/// Tolerances and budget for adaptive quadrature.
struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdivisions = 2000;

    void validate() const
    {
        if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_subdivisions < 1)
            throw std::invalid_argument("QuadratureSpec: need rel_tol > 0, abs_tol >= 0, max_subdivisions >= 1");
    }
};

struct SpecialValue {
    double value = 0.0;
    double est_error = 0.0;
};

/// Thrown when the subdivision budget runs out; best() holds the estimate reached.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, SpecialValue best)
        : std::runtime_error(what), best_(best) {}
    SpecialValue best() const { return best_; }

private:
    SpecialValue best_;
};

namespace detail {

// 15-point Kronrod nodes / weights and the embedded 7-point Gauss weights.
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = fc * wgk[7];
    double resg = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        const double s = f(c - dx) + f(c + dx);
        resk += wgk[j] * s;
        if (j % 2 == 1) resg += wg[j / 2] * s;
    }
    resk *= h;
    resg *= h;
    return {a, b, resk, std::abs(resk - resg)};
}

template <class F>
SpecialValue adaptive(F& f, double a, double b, const QuadratureSpec& spec)
{
    std::priority_queue<Panel> heap;
    Panel first = gk15(f, a, b);
    double total = first.value;
    double err = first.error;
    heap.push(first);
    int intervals = 1;
    auto done = [&] { return err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
    while (!done()) {
        if (intervals >= spec.max_subdivisions) {
            throw NonConvergence("integrate: subdivision budget exhausted", {total, err});
        }
        Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // panel too small to split further in double precision
            throw NonConvergence("integrate: panel below machine resolution", {total, err});
        }
        heap.pop();
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
        // the running error sum drifts; recompute it now and then
        if (intervals % 64 == 0) {
            std::vector<Panel> all;
            all.reserve(heap.size());
            total = 0.0;
            err = 0.0;
            while (!heap.empty()) {
                all.push_back(heap.top());
                heap.pop();
            }
            for (const auto& p : all) {
                total += p.value;
                err += p.error;
                heap.push(p);
            }
        }
    }
    return {total, err};
}

inline void check_finite(double x, const char* what)
{
    if (!std::isfinite(x)) throw std::domain_error(std::string(what) + ": non-finite argument");
}

} // namespace detail

/// Adaptive Gauss-Kronrod integral of f over [lower, upper]. upper may be +inf,
/// in which case t = lower + scale*u/(1-u) maps the range onto [0, 1).
template <class F>
SpecialValue integrate(F&& f, double lower, double upper, const QuadratureSpec& spec = {}, double scale = 1.0)
{
    spec.validate();
    if (std::isnan(lower) || std::isnan(upper) || std::isinf(lower))
        throw std::domain_error("integrate: bad limits");
    if (upper == lower) return {0.0, 0.0};
    if (upper < lower) {
        SpecialValue r = integrate(f, upper, lower, spec, scale);
        return {-r.value, r.est_error};
    }
    if (std::isinf(upper)) {
        if (!(scale > 0.0)) throw std::domain_error("integrate: scale must be positive");
        auto g = [&](double u) {
            const double w = 1.0 - u;
            const double t = lower + scale * u / w;
            if (!std::isfinite(t)) return 0.0;
            const double v = f(t);
            if (v == 0.0) return 0.0;
            return v * scale / (w * w);
        };
        return detail::adaptive(g, 0.0, 1.0, spec);
    }
    auto g = [&](double t) { return static_cast<double>(f(t)); };
    return detail::adaptive(g, lower, upper, spec);
}

/// Integral over consecutive pieces [p0,p1], [p1,p2], ...; the last point may be +inf.
template <class F>
SpecialValue integrate_pieces(F&& f, const std::vector<double>& points, const QuadratureSpec& spec = {}, double scale = 1.0)
{
    SpecialValue sum{0.0, 0.0};
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i + 1] > points[i])) continue;
        SpecialValue part = integrate(f, points[i], points[i + 1], spec, scale);
        sum.value += part.value;
        sum.est_error += part.est_error;
    }
    return sum;
}

/// Q(s,x) = Gamma(s,x)/Gamma(s).
inline double upper_incomplete_gamma_reg(double s, double x)
{
    detail::check_finite(s, "upper_incomplete_gamma_reg");
    detail::check_finite(x, "upper_incomplete_gamma_reg");
    if (!(s > 0.0) || x < 0.0) throw std::domain_error("upper_incomplete_gamma_reg: need s > 0, x >= 0");
    if (x == 0.0) return 1.0;
    return boost::math::gamma_q(s, x);
}

namespace detail {

// e^z E_nu(z) for nu >= 1: (1/z) * int_0^inf e^{-v} (1 + v/z)^{-nu} dv
inline SpecialValue en_scaled_quadrature(double nu, double z)
{
    QuadratureSpec q{1e-14, 0.0, 4000};
    auto f = [nu, z](double v) { return std::exp(-v - nu * std::log1p(v / z)); };
    const double split = std::min(z, 1.0);
    SpecialValue r = integrate_pieces(f, {0.0, split, std::numeric_limits<double>::infinity()}, q);
    return {r.value / z, r.est_error / z};
}

} // namespace detail

/// e^z * E_nu(z); stays representable for large z.
inline SpecialValue exp_integral_en_scaled(double order, double z)
{
    detail::check_finite(order, "exp_integral_en");
    detail::check_finite(z, "exp_integral_en");
    if (!(z > 0.0) || order < 0.0) throw std::domain_error("exp_integral_en: need z > 0, order >= 0");
    if (order == 0.0) return {1.0 / z, 0.0};
    if (order >= 1.0) return detail::en_scaled_quadrature(order, z);
    // nu < 1: E_nu(z) = z^{nu-1} Gamma(1-nu, z)
    const double a = 1.0 - order;
    const double lg = std::lgamma(a);
    const double q = boost::math::gamma_q(a, z);
    if (z < 500.0 && q > 0.0) {
        const double v = std::exp(z + (order - 1.0) * std::log(z) + lg) * q;
        return {v, 4.0 * std::numeric_limits<double>::epsilon() * v};
    }
    // q underflowed, fall back to the quadrature form (valid for every nu > 0)
    return detail::en_scaled_quadrature(order, z);
}

/// Generalized exponential integral E_nu(z) = int_1^inf e^{-zt} t^{-nu} dt, real nu >= 0.
inline SpecialValue exp_integral_en(double order, double z)
{
    SpecialValue s = exp_integral_en_scaled(order, z);
    const double k = std::exp(-z);
    return {s.value * k, s.est_error * k};
}

/// Ei(x) for x < 0, i.e. -E_1(-x).
inline SpecialValue exp_integral_ei(double x)
{
    detail::check_finite(x, "exp_integral_ei");
    if (!(x < 0.0)) throw std::domain_error("exp_integral_ei: need x < 0");
    const double v = boost::math::expint(x);
    return {v, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(v)};
}

/// Root of f on a sign-changing bracket [lo, hi], to relative width tol.
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-12)
{
    auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol * std::min(std::abs(a), std::abs(b)); };
    std::uintmax_t iters = 2000;
    auto r = boost::math::tools::bisect(f, lo, hi, stop, iters);
    return 0.5 * (r.first + r.second);
}

} // namespace wpt::numerics
