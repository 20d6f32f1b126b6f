#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace ifslab {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 8> kGL8Nodes = {
    -0.9602898564975362316835609, -0.7966664774136267395915539,
    -0.5255324099163289858177390, -0.1834346424956498049394761,
    0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};

inline constexpr std::array<double, 8> kGL8Weights = {
    0.1012285362903762591525314, 0.2223810344533744705443560,
    0.3137066458778872873379622, 0.3626837833783619829651504,
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

// Single-panel 8-point Gauss-Legendre on [a, b].
template <typename F>
double gauss8(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += kGL8Weights[i] * f(c + h * kGL8Nodes[i]);
    return s * h;
}

// Composite Gauss-Legendre with `panels` equal panels.
template <typename F>
double integrate(F&& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = 0.0;
    for (int k = 0; k < panels; ++k) s += gauss8(f, a + k * h, a + (k + 1) * h);
    return s;
}

// Composite quadrature with Richardson-style refinement error estimate.
template <typename F>
std::pair<double, double> integrate_with_error(F&& f, double a, double b, int panels) {
    const double coarse = integrate(f, a, b, panels);
    const double fine = integrate(f, a, b, 2 * panels);
    return {fine, std::abs(fine - coarse)};
}

namespace detail {
template <typename F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace ifslab
