#pragma once

#include "cashdiv/errors.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

namespace cashdiv {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

struct SimpsonState {
    const std::function<double(double)>* f;
    int max_depth;
    std::size_t evaluations = 0;
    double error = 0.0;
    bool exhausted = false;
};

inline double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm,
                              double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = (*st.f)(lm);
    const double frm = (*st.f)(rm);
    st.evaluations += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
        st.error += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    if (depth >= st.max_depth) {
        st.exhausted = true;
        st.error += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Simpson rule with Richardson correction; the tolerance is split
/// in half at each bisection. Throws ConvergenceError carrying the best
/// estimate when an interval still fails the test at `max_depth`.
inline QuadratureResult adaptive_simpson_detailed(const std::function<double(double)>& f, double a,
                                                  double b, double tol, int max_depth) {
    if (!(a < b)) throw DomainError("adaptive_simpson: requires a < b");
    if (!(tol > 0.0)) throw DomainError("adaptive_simpson: tolerance must be > 0");
    detail::SimpsonState st{&f, max_depth};
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    st.evaluations = 3;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    QuadratureResult out;
    out.value = detail::simpson_recurse(st, a, b, fa, fm, fb, whole, tol, 0);
    out.error_estimate = st.error;
    out.evaluations = st.evaluations;
    if (st.exhausted && out.error_estimate > tol) {
        throw ConvergenceError("adaptive_simpson: tolerance " + std::to_string(tol) +
                                   " not met at depth " + std::to_string(max_depth),
                               out.value, out.error_estimate);
    }
    return out;
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_depth) {
    return adaptive_simpson_detailed(f, a, b, tol, max_depth).value;
}

}  // namespace cashdiv
