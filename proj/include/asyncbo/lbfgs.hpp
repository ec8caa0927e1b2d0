#ifndef ASYNCBO_LBFGS_HPP
#define ASYNCBO_LBFGS_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include <Eigen/Core>

namespace asyncbo {
namespace opt {

struct LbfgsOptions {
    int memory = 10;
    int max_iterations = 200;
    int max_line_search = 30;
    /// Stop when the infinity norm of the projected gradient falls below this.
    double pg_tolerance = 1e-5;
    /// Stop when (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) falls below this.
    double f_tolerance = 2.2e-9;
    double armijo = 1e-4;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Box-constrained limited-memory BFGS (projected two-loop recursion with a
/// backtracking Armijo search along the projected path).
///
/// `f(x, grad)` returns the objective and writes its gradient; returning a
/// non-finite value marks x as infeasible and makes the line search back off.
/// Returns std::nullopt if the starting point itself is infeasible.
template <typename Objective>
std::optional<LbfgsResult> minimize_box(Objective&& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                                        const Eigen::VectorXd& upper, const LbfgsOptions& options = {})
{
    const Eigen::Index n = x0.size();
    auto project = [&](Eigen::VectorXd v) {
        return v.cwiseMax(lower).cwiseMin(upper).eval();
    };
    auto projected_gradient_norm = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
        const Eigen::VectorXd step = project(x - g) - x;
        return step.lpNorm<Eigen::Infinity>();
    };

    LbfgsResult res;
    res.x = project(std::move(x0));
    Eigen::VectorXd g(n);
    double fx = f(res.x, g);
    ++res.evaluations;
    if (!std::isfinite(fx) || !g.allFinite())
        return std::nullopt;

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    Eigen::VectorXd alpha_buf(options.memory);

    for (; res.iterations < options.max_iterations; ++res.iterations) {
        if (projected_gradient_norm(res.x, g) < options.pg_tolerance) {
            res.converged = true;
            break;
        }

        // Variables pinned at a bound with the gradient pushing outward are
        // held fixed for this iteration.
        Eigen::Array<bool, Eigen::Dynamic, 1> free(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lower = res.x[i] <= lower[i] && g[i] > 0.0;
            const bool at_upper = res.x[i] >= upper[i] && g[i] < 0.0;
            free[i] = !(at_lower || at_upper);
        }
        auto mask = [&](Eigen::VectorXd v) {
            for (Eigen::Index i = 0; i < n; ++i)
                if (!free[i])
                    v[i] = 0.0;
            return v;
        };

        Eigen::VectorXd q = mask(g);
        const int m = static_cast<int>(s_hist.size());
        for (int i = m - 1; i >= 0; --i) {
            alpha_buf[i] = rho_hist[i] * mask(s_hist[i]).dot(q);
            q -= alpha_buf[i] * mask(y_hist[i]);
        }
        if (m > 0) {
            const Eigen::VectorXd ys = mask(y_hist.back());
            const double yy = ys.squaredNorm();
            if (yy > 0.0)
                q *= mask(s_hist.back()).dot(ys) / yy;
        }
        for (int i = 0; i < m; ++i) {
            const double beta = rho_hist[i] * mask(y_hist[i]).dot(q);
            q += (alpha_buf[i] - beta) * mask(s_hist[i]);
        }
        Eigen::VectorXd dir = -mask(q);
        if (!(dir.dot(g) < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -mask(g);
        }
        if (s_hist.empty()) {
            // First step: scale so the largest move is at most one unit.
            const double dmax = dir.lpNorm<Eigen::Infinity>();
            if (dmax > 1.0)
                dir /= dmax;
        }

        double step = 1.0;
        Eigen::VectorXd x_new, g_new(n);
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < options.max_line_search; ++ls, step *= 0.5) {
            x_new = project(res.x + step * dir);
            const double decrease = g.dot(x_new - res.x);
            if (decrease >= 0.0 && (x_new - res.x).lpNorm<Eigen::Infinity>() == 0.0)
                break;
            f_new = f(x_new, g_new);
            ++res.evaluations;
            if (std::isfinite(f_new) && g_new.allFinite() && f_new <= fx + options.armijo * decrease) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;

        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * y.squaredNorm()) {
            if (static_cast<int>(s_hist.size()) == options.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
        }

        const double rel = (fx - f_new) / std::max({std::abs(fx), std::abs(f_new), 1.0});
        res.x = x_new;
        g = g_new;
        fx = f_new;
        if (rel < options.f_tolerance) {
            res.converged = true;
            ++res.iterations;
            break;
        }
    }
    res.value = fx;
    return res;
}

} // namespace opt
} // namespace asyncbo

#endif
