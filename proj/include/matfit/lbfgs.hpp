// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_LBFGS_HPP
#define MATFIT_LBFGS_HPP

#include <deque>
#include <functional>
#include <vector>

#include "matfit/common.hpp"

namespace matfit {

// Limited-memory quasi-Newton with gradient projection for box constraints.
// Search directions come from the standard two-loop recursion over projected
// steps; steps are backtracked with an Armijo test written against the
// projected trial point, so iterates always stay inside the box.

struct LbfgsOptions {
    int memory = 10;
    int max_iters = 500;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    double rel_tol = 1e-6; // relative energy decrease over `patience` iters
    int patience = 5;
    int max_linesearch = 50;
    double grad_tol = 1e-10; // projected-gradient infinity norm
};

struct LbfgsResult {
    std::vector<double> x;
    double f = 0;
    int iters = 0;
    bool converged = false;
    bool line_search_failed = false;
    std::vector<double> trace; // accepted energies, trace[0] = initial
};

// objective(x, grad) -> f, filling grad (same size as x)
using LbfgsObjective = std::function<double(const std::vector<double>&, std::vector<double>&)>;
// observer(iter, x, f); called after each accepted step
using LbfgsObserver = std::function<void(int, const std::vector<double>&, double)>;

namespace detail {

inline void project_box(std::vector<double>& x, const std::vector<double>& lo,
                        const std::vector<double>& hi) {
    for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

} // namespace detail

inline LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, std::vector<double> x,
                                  const std::vector<double>& lo, const std::vector<double>& hi,
                                  const LbfgsOptions& opts = {},
                                  const LbfgsObserver& observer = nullptr) {
    const size_t n = x.size();
    detail::project_box(x, lo, hi);

    std::vector<double> g(n), g_new(n), x_new(n), d(n);
    std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs; // (s, y)

    LbfgsResult res;
    double f = objective(x, g);
    res.trace.push_back(f);

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        // projected-gradient stationarity
        double pg = 0;
        for (size_t i = 0; i < n; ++i) {
            double step = std::clamp(x[i] - g[i], lo[i], hi[i]) - x[i];
            pg = std::max(pg, std::abs(step));
        }
        if (pg < opts.grad_tol) {
            res.converged = true;
            break;
        }

        // two-loop recursion
        d = g;
        for (double& v : d) v = -v;
        std::vector<double> alpha(pairs.size());
        for (int k = int(pairs.size()) - 1; k >= 0; --k) {
            const auto& [s, yv] = pairs[k];
            double sy = 0, sd = 0;
            for (size_t i = 0; i < n; ++i) sy += s[i] * yv[i];
            for (size_t i = 0; i < n; ++i) sd += s[i] * d[i];
            alpha[k] = sd / sy;
            for (size_t i = 0; i < n; ++i) d[i] -= alpha[k] * yv[i];
        }
        if (!pairs.empty()) {
            const auto& [s, yv] = pairs.back();
            double sy = 0, yy = 0;
            for (size_t i = 0; i < n; ++i) {
                sy += s[i] * yv[i];
                yy += yv[i] * yv[i];
            }
            double scale = sy / std::max(yy, 1e-300);
            for (double& v : d) v *= scale;
        }
        for (int k = 0; k < int(pairs.size()); ++k) {
            const auto& [s, yv] = pairs[k];
            double sy = 0, yd = 0;
            for (size_t i = 0; i < n; ++i) sy += s[i] * yv[i];
            for (size_t i = 0; i < n; ++i) yd += yv[i] * d[i];
            double beta = yd / sy;
            for (size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * s[i];
        }

        double gd = 0;
        for (size_t i = 0; i < n; ++i) gd += g[i] * d[i];
        if (!(gd < 0)) { // not a descent direction; fall back to steepest
            for (size_t i = 0; i < n; ++i) d[i] = -g[i];
        }

        // backtracking Armijo on the projected trial point
        double t = 1.0;
        bool accepted = false;
        double f_new = f;
        for (int ls = 0; ls < opts.max_linesearch; ++ls) {
            for (size_t i = 0; i < n; ++i)
                x_new[i] = std::clamp(x[i] + t * d[i], lo[i], hi[i]);
            double gdx = 0;
            for (size_t i = 0; i < n; ++i) gdx += g[i] * (x_new[i] - x[i]);
            if (gdx >= 0) { // projection removed all descent at this scale
                t *= opts.backtrack;
                continue;
            }
            f_new = objective(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + opts.armijo_c * gdx) {
                accepted = true;
                break;
            }
            t *= opts.backtrack;
        }
        if (!accepted) {
            res.line_search_failed = true;
            break;
        }

        // curvature pair from the accepted projected step
        std::vector<double> s(n), yv(n);
        double sy = 0, ss = 0, yy = 0;
        for (size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            yv[i] = g_new[i] - g[i];
            sy += s[i] * yv[i];
            ss += s[i] * s[i];
            yy += yv[i] * yv[i];
        }
        if (sy > 1e-10 * std::sqrt(ss * yy)) {
            pairs.emplace_back(std::move(s), std::move(yv));
            if (int(pairs.size()) > opts.memory) pairs.pop_front();
        }

        x = x_new;
        f = f_new;
        g = g_new;
        res.iters = iter + 1;
        res.trace.push_back(f);
        if (observer) observer(iter, x, f);

        // relative energy decrease over the patience window
        int w = opts.patience;
        if (int(res.trace.size()) > w) {
            double before = res.trace[res.trace.size() - 1 - w];
            double rel = (before - f) / std::max(1.0, std::abs(before));
            if (rel < opts.rel_tol) {
                res.converged = true;
                break;
            }
        }
    }

    res.x = std::move(x);
    res.f = f;
    return res;
}

} // namespace matfit

#endif
