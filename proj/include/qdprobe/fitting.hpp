#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "qdprobe/errors.hpp"

namespace qdprobe {

// Ordinary least squares line y = a + b*x.
struct LineFit {
    double a = 0.0;
    double b = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw validation_error("fit_line: need >=2 matched samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) return {sy / n, 0.0};
    LineFit f;
    f.b = (n * sxy - sx * sy) / den;
    f.a = (sy - f.b * sx) / n;
    return f;
}

namespace detail {

// Gaussian elimination with partial pivoting; A is n*n row-major and is
// destroyed. Returns false on a singular system.
inline bool solve_inplace(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::fabs(A[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(A[r * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < 1e-300) return false;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        double d = A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = A[r * n + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= A[r * n + c] * b[c];
        b[r] = acc / A[r * n + r];
    }
    return true;
}

}  // namespace detail

struct LevMarOptions {
    int max_iterations = 200;
    double lambda0 = 1e-3;
    double step_tol = 1e-12;   // relative parameter step
    double cost_tol = 1e-14;   // relative cost decrease
};

struct LevMarResult {
    std::vector<double> params;
    double rms_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Levenberg-Marquardt with numeric central-difference Jacobian. The model
// callback fills residuals r_i(p); cost is sum r_i^2. Small dense problems
// only (the fits here have 4-6 parameters).
inline LevMarResult levmar_fit(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& residuals,
    std::size_t n_residuals, std::vector<double> p, LevMarOptions opts = {}) {
    const int np = static_cast<int>(p.size());
    std::vector<double> r(n_residuals), r_try(n_residuals);
    std::vector<double> jac(n_residuals * np);
    std::vector<double> A(np * np), g(np), step(np);

    auto cost_of = [&](const std::vector<double>& q, std::vector<double>& rr) {
        residuals(q, rr);
        double c = 0;
        for (double v : rr) c += v * v;
        return c;
    };

    double cost = cost_of(p, r);
    double lambda = opts.lambda0;
    LevMarResult out;

    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        // numeric Jacobian
        std::vector<double> pj = p;
        for (int j = 0; j < np; ++j) {
            double h = 1e-7 * std::max(1.0, std::fabs(p[j]));
            pj[j] = p[j] + h;
            residuals(pj, r_try);
            std::vector<double> hi = r_try;
            pj[j] = p[j] - h;
            residuals(pj, r_try);
            for (std::size_t i = 0; i < n_residuals; ++i)
                jac[i * np + j] = (hi[i] - r_try[i]) / (2 * h);
            pj[j] = p[j];
        }
        // normal equations
        for (int a = 0; a < np; ++a) {
            g[a] = 0;
            for (int b = 0; b <= a; ++b) {
                double s = 0;
                for (std::size_t i = 0; i < n_residuals; ++i)
                    s += jac[i * np + a] * jac[i * np + b];
                A[a * np + b] = s;
                A[b * np + a] = s;
            }
            for (std::size_t i = 0; i < n_residuals; ++i) g[a] -= jac[i * np + a] * r[i];
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 24; ++attempt) {
            std::vector<double> Ad = A;
            for (int d = 0; d < np; ++d) Ad[d * np + d] += lambda * std::max(A[d * np + d], 1e-12);
            std::vector<double> rhs = g;
            if (!detail::solve_inplace(Ad, rhs, np)) {
                lambda *= 10;
                continue;
            }
            std::vector<double> p_try = p;
            double step_norm = 0, p_norm = 0;
            for (int j = 0; j < np; ++j) {
                p_try[j] += rhs[j];
                step_norm += rhs[j] * rhs[j];
                p_norm += p[j] * p[j];
            }
            double c_try = cost_of(p_try, r_try);
            if (c_try < cost) {
                double rel_drop = (cost - c_try) / std::max(cost, 1e-300);
                p = p_try;
                r = r_try;
                double prev = cost;
                cost = c_try;
                lambda = std::max(lambda * 0.25, 1e-14);
                stepped = true;
                if (std::sqrt(step_norm) <= opts.step_tol * (std::sqrt(p_norm) + opts.step_tol) ||
                    (prev > 0 && rel_drop < opts.cost_tol)) {
                    out.converged = true;
                }
                break;
            }
            lambda *= 10;
        }
        if (!stepped) {
            out.converged = true;  // no downhill step available: local minimum
            break;
        }
        if (out.converged) break;
    }

    out.params = std::move(p);
    out.rms_residual = std::sqrt(cost / static_cast<double>(n_residuals));
    out.iterations = it + 1;
    return out;
}

}  // namespace qdprobe
