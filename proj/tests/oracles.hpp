#pragma once

// Independent reference computations used to cross-check library results.
// Everything here is deliberately implemented without touching the library's
// own algorithms: finite differences instead of closed-form jets, dense
// sampling instead of branch arithmetic, textbook formulas instead of
// searches.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Richardson-extrapolated central difference.  Good to ~1e-10 for smooth f
// at moderate x.
inline double derivative(const std::function<double(double)>& f, double x,
                         double h = 1e-4) {
    auto d = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2 * hh); };
    double d1 = d(h), d2 = d(h / 2);
    return (4 * d2 - d1) / 3;
}

inline double second_derivative(const std::function<double(double)>& f, double x,
                                double h = 1e-4) {
    auto d = [&](double hh) {
        return (f(x + hh) - 2 * f(x) + f(x - hh)) / (hh * hh);
    };
    double d1 = d(h), d2 = d(h / 2);
    return (4 * d2 - d1) / 3;
}

inline double third_derivative(const std::function<double(double)>& f, double x,
                               double h = 1e-3) {
    auto d = [&](double hh) {
        return (f(x + 2 * hh) - 2 * f(x + hh) + 2 * f(x - hh) - f(x - 2 * hh))
               / (2 * hh * hh * hh);
    };
    double d1 = d(h), d2 = d(h / 2);
    return (4 * d2 - d1) / 3;
}

inline double schwarzian(const std::function<double(double)>& f, double x) {
    double f1 = derivative(f, x);
    double f2 = second_derivative(f, x);
    double f3 = third_derivative(f, x);
    return f3 / f1 - 1.5 * (f2 / f1) * (f2 / f1);
}

// Image of [a,b] under f by dense sampling.
inline std::pair<double, double> image_by_sampling(
    const std::function<double(double)>& f, double a, double b, int n = 20000) {
    double lo = f(a), hi = f(a);
    for (int i = 1; i <= n; ++i) {
        double v = f(a + (b - a) * i / n);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

// Log-ratio distortion of h on an ordered triple, straight from the formula.
inline double lrd(const std::function<double(double)>& h, double x, double y,
                  double z) {
    double num = std::abs(h(z) - h(y)) / std::abs(h(y) - h(x));
    double den = (z - y) / (y - x);
    return std::abs(std::log(num / den));
}

// Conjugacy between the full tent map and the full quadratic map.
inline double tent_to_quadratic(double x) {
    double s = std::sin(3.14159265358979323846 * x / 2);
    return s * s;
}

} // namespace oracle
