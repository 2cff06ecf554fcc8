#pragma once

#include <functional>

namespace cirsum {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
    int evaluations = 0;
};

// Globally adaptive integration of f over the finite interval [a, b] with a
// 15-point Gauss-Kronrod rule per panel, always splitting the panel with the
// largest error estimate first.  Nodes are strictly interior, so integrable
// endpoint singularities (e.g. s^{nu-1} with nu < 1) are handled without
// special casing.  Stops when the summed error estimate falls below
// max(abs_tol, rel_tol * |integral|) or max_panels is exhausted (converged
// flag false, best estimate still returned).
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, double rel_tol = 0.0, int max_panels = 4000);

}  // namespace cirsum
