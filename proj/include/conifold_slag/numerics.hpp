#pragma once

// Shared numeric plumbing: type aliases, finite differences with one
// Richardson level, a safeguarded scalar Newton, and a damped Newton for
// small square systems with a finite-difference Jacobian.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "conifold_slag/errors.hpp"

namespace conifold_slag {

using Complex = std::complex<double>;
using Vec2c = Eigen::Vector2cd;
using Vec3c = Eigen::Vector3cd;
using Vec4c = Eigen::Vector4cd;
using Mat2c = Eigen::Matrix2cd;
using Mat3c = Eigen::Matrix3cd;
using Mat4c = Eigen::Matrix4cd;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};

namespace fd {

/// Step policy: h = 1e-5 * max(1, |coordinate|).
inline double step(double magnitude, double base = 1e-5) {
    return base * std::max(1.0, std::abs(magnitude));
}

/// Central difference of f at t = 0 with one Richardson extrapolation level.
/// f may return any type closed under +, - and scalar multiplication.
template <class F>
auto derivative(F&& f, double h) {
    using R = std::decay_t<decltype(f(0.0))>;  // materialize Eigen expressions
    auto central = [&](double hh) { return R((f(hh) - f(-hh)) * (0.5 / hh)); };
    const R coarse = central(h);
    const R fine = central(0.5 * h);
    return R((fine * 4.0 - coarse) * (1.0 / 3.0));
}

/// Jacobian of F : R^n -> R^m at x, column by column, Richardson-corrected.
template <class F>
MatX jacobian(F&& func, const VecX& x, double base = 1e-5) {
    const VecX f0 = func(x);
    MatX jac(f0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = step(x[j], base);
        jac.col(j) = derivative(
            [&](double t) {
                VecX xt = x;
                xt[j] += t;
                return VecX(func(xt));
            },
            h);
    }
    return jac;
}

}  // namespace fd

/// Unit vector spanning the (numerical) kernel of a wide m x (m+1) matrix.
inline VecX kernel_direction(const MatX& jac) {
    Eigen::JacobiSVD<MatX> svd(jac, Eigen::ComputeFullV);
    return svd.matrixV().col(svd.matrixV().cols() - 1);
}

/// Ratio of the smallest to the largest singular value.
inline double singular_ratio(const MatX& m) {
    Eigen::JacobiSVD<MatX> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0.0;
    return s[s.size() - 1] / s[0];
}

struct ScalarRoot {
    double root = 0.0;
    int iterations = 0;
    bool used_bisection = false;
};

/// Root of an increasing function f on [lo, hi] with f(lo) <= 0 <= f(hi).
/// Newton steps from x0; any step leaving the current bracket is replaced by
/// bisection. Stops when the step is below 4 ulp of the iterate.
template <class F, class DF>
ScalarRoot safeguarded_newton(F&& f, DF&& df, double lo, double hi, double x0, int max_iter = 200) {
    ScalarRoot out;
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        const double fx = f(x);
        if (fx == 0.0) break;
        if (fx > 0.0) hi = x; else lo = x;
        const double d = df(x);
        double next = (d > 0.0) ? x - fx / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
            out.used_bisection = true;
        }
        const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next);
        if (std::abs(next - x) <= tol || hi - lo <= tol) {
            x = next;
            break;
        }
        x = next;
    }
    out.root = x;
    return out;
}

struct NewtonOptions {
    double tolerance = 1e-12;  ///< on the residual max-norm
    int max_iterations = 60;
    double fd_base = 1e-6;
};

struct NewtonResult {
    VecX x;
    double residual = 0.0;
    int iterations = 0;
};

/// Damped Newton for square F : R^n -> R^n using a finite-difference Jacobian.
/// Throws NoConvergence / SingularJacobian.
template <class F>
NewtonResult newton_solve(F&& func, VecX x, const NewtonOptions& opt = {}) {
    NewtonResult out;
    VecX fx = func(x);
    double res = fx.cwiseAbs().maxCoeff();
    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it;
        if (res <= opt.tolerance) break;
        const MatX jac = fd::jacobian(func, x, opt.fd_base);
        Eigen::FullPivLU<MatX> lu(jac);
        if (lu.rank() < jac.cols()) throw SingularJacobian("newton_solve: singular Jacobian");
        const VecX dx = lu.solve(-fx);
        if (!dx.allFinite()) throw SingularJacobian("newton_solve: non-finite step");
        double damping = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k) {
            const VecX trial = x + damping * dx;
            const VecX ft = func(trial);
            const double rt = ft.allFinite() ? ft.cwiseAbs().maxCoeff() : INFINITY;
            if (rt < res || rt <= opt.tolerance) {
                x = trial;
                fx = ft;
                res = rt;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if (!accepted) break;
    }
    out.x = x;
    out.residual = res;
    if (!(res <= opt.tolerance)) throw NoConvergence("newton_solve: residual " + std::to_string(res));
    return out;
}

inline double relative_stddev(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    return std::sqrt(var) / std::abs(mean);
}

// ---------------------------------------------------------------------------
// Parallel loops. Every index writes its own slot, so results do not depend
// on the thread count; CONIFOLD_SLAG_THREADS caps the number of workers.

inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CONIFOLD_SLAG_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

/// f(i) for i in [0, n). The exception of the smallest failing index is
/// rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (i < failed_at) {
                        failed_at = i;
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace conifold_slag
