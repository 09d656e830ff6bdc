#include "hesspec/bulk_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hesspec/error.hpp"

namespace hesspec {

namespace {

constexpr double kTol = 1e-11;
constexpr int kNewtonIterations = 200;
constexpr int kDampedIterations = 10000;

bool finite(cd v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

}  // namespace

bool SupportReport::contains(double x) const {
    return std::any_of(intervals.begin(), intervals.end(),
                       [x](const auto& iv) { return iv.first <= x && x <= iv.second; });
}

std::pair<double, bool> SupportReport::nearest_edge(double x) const {
    double best = std::numeric_limits<double>::quiet_NaN();
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : intervals) {
        for (double edge : {a, b}) {
            if (std::abs(x - edge) < dist) {
                dist = std::abs(x - edge);
                best = edge;
            }
        }
    }
    return {best, x < best};
}

BulkSolver::BulkSolver(const ProblemSpec& spec, int quad_order)
    : spec_(spec), geometry_(spec), engine_(spec, geometry_, quad_order), c_(spec.c()) {
    const SpectralMeasure& nu = geometry_.spectrum();
    t_mean_ = 0.0;
    for (std::size_t j = 0; j < nu.values.size(); ++j) t_mean_ += nu.weights[j] * nu.values[j];
    const double t_max = nu.values.back();
    const double g_abs = std::max({std::abs(engine_.g_quantile(1e-6)),
                                   std::abs(engine_.g_quantile(1.0 - 1e-6)), 1e-300});
    scale_ = g_abs * t_max * (1.0 + std::sqrt(c_)) * (1.0 + std::sqrt(c_));
}

BulkSolver::Eval BulkSolver::evaluate(cd z, cd delta) const {
    const auto [e, e2] = engine_.e_weight_pair(delta);
    const SpectralMeasure& nu = geometry_.spectrum();
    cd a0{0.0, 0.0}, a1{0.0, 0.0}, a2{0.0, 0.0}, b1{0.0, 0.0};
    for (std::size_t j = 0; j < nu.values.size(); ++j) {
        const double t = nu.values[j];
        const cd denom = e * t - z;
        if (std::abs(denom) == 0.0) {
            throw NumericError("e*t - z vanished");
        }
        const cd r = 1.0 / denom;
        const double w = nu.weights[j];
        a0 += w * r;
        a1 += w * t * r;
        a2 += w * t * t * r * r;
        b1 += w * t * r * r;
    }
    return {e, e2, c_ * a1, a0, 1.0 - c_ * e2 * a2, b1};
}

double BulkSolver::self_consistency(cd z, cd delta) const {
    return std::abs(delta - evaluate(z, delta).f);
}

bool BulkSolver::newton(cd z, cd& delta, int& iterations) const {
    Eval ev;
    try {
        ev = evaluate(z, delta);
    } catch (const NumericError&) {
        return false;
    }
    cd phi = delta - ev.f;
    for (int it = 0; it < kNewtonIterations; ++it) {
        ++iterations;
        if (!finite(phi) || !finite(ev.d) || ev.d == 0.0) return false;
        const cd step = phi / ev.d;
        double lam = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40 && !accepted; ++bt, lam *= 0.5) {
            const cd cand = delta - lam * step;
            const bool tiny = std::abs(lam * step) <= kTol * std::max(1.0, std::abs(cand));
            try {
                const Eval ce = evaluate(z, cand);
                const cd cphi = cand - ce.f;
                if (finite(cphi) &&
                    (std::abs(cphi) <= (1.0 - 1e-4 * lam) * std::abs(phi) || tiny)) {
                    delta = cand;
                    ev = ce;
                    phi = cphi;
                    accepted = true;
                    if (tiny) return true;
                }
            } catch (const NumericError&) {
            }
            if (accepted) break;
        }
        if (!accepted) return false;
        if (std::abs(lam * step) <= kTol * std::max(1.0, std::abs(delta))) return true;
    }
    return false;
}

bool BulkSolver::damped(cd z, cd& delta, int& iterations) const {
    double eta = 0.5;
    cd previous{0.0, 0.0};
    for (int it = 0; it < kDampedIterations; ++it) {
        ++iterations;
        cd f;
        try {
            f = evaluate(z, delta).f;
        } catch (const NumericError&) {
            return false;
        }
        const cd diff = f - delta;
        if (!finite(diff)) return false;
        if (std::abs(diff) < kTol * std::max(1.0, std::abs(delta))) return true;
        if ((diff * std::conj(previous)).real() < 0.0) eta = std::max(0.5 * eta, 1e-4);
        delta += eta * diff;
        previous = diff;
    }
    return false;
}

bool BulkSolver::branch_ok(cd z, cd delta, const Eval& ev) const {
    if (!finite(delta) || !finite(ev.m)) return false;
    if (z.imag() != 0.0) {
        const double s = z.imag() > 0.0 ? 1.0 : -1.0;
        return ev.m.imag() * s > -1e-12 * std::abs(ev.m) &&
               delta.imag() * s > -1e-12 * std::abs(delta);
    }
    // Real z: the Stieltjes branch is real, increasing in z (D > 0 <=> delta' > 0) and
    // keeps 1 + g delta > 0 on the whole law of g.
    if (std::abs(delta.imag()) > 1e-10 * std::max(1.0, std::abs(delta))) return false;
    if (!(ev.d.real() > 0.0)) return false;
    const double d = delta.real();
    return 1.0 + engine_.g_min() * d > 0.0 && 1.0 + engine_.g_max() * d > 0.0;
}

StieltjesPoint BulkSolver::finish(cd z, cd delta, int iterations) const {
    if (z.imag() == 0.0) delta = cd(delta.real(), 0.0);
    const Eval ev = evaluate(z, delta);
    StieltjesPoint out;
    out.z = z;
    out.delta = delta;
    out.m = ev.m;
    out.e = ev.e;
    out.iterations = iterations;
    out.residual = std::abs(delta - ev.f);
    return out;
}

std::optional<StieltjesPoint> BulkSolver::attempt(cd z, cd start) const {
    if (z.imag() == 0.0) start = cd(start.real(), 0.0);
    cd delta = start;
    int iterations = 0;
    if (!newton(z, delta, iterations)) return std::nullopt;
    try {
        const Eval ev = evaluate(z, delta);
        if (!branch_ok(z, delta, ev)) return std::nullopt;
    } catch (const NumericError&) {
        return std::nullopt;
    }
    return finish(z, delta, iterations);
}

std::optional<StieltjesPoint> BulkSolver::continuation(cd z, bool* reached_axis) const {
    if (reached_axis) *reached_axis = false;
    const double x = z.real();
    const double target = z.imag();
    const double top = 10.0 * std::max({scale_, std::abs(x), target});
    const double floor = target > 0.0 ? target : 1e-10 * scale_;
    const cd z0(x, top);
    cd delta = -c_ * t_mean_ / z0;
    int iterations = 0;
    if (!newton(z0, delta, iterations)) return std::nullopt;
    double y = top;
    double ratio = 0.25;
    while (y > floor) {
        const double next = std::max(y * ratio, floor);
        cd trial = delta;
        const cd zk(x, next);
        bool ok = newton(zk, trial, iterations);
        if (ok) {
            try {
                ok = branch_ok(zk, trial, evaluate(zk, trial));
            } catch (const NumericError&) {
                ok = false;
            }
        }
        if (ok) {
            delta = trial;
            y = next;
            ratio = std::max(ratio * ratio, 1e-2);
        } else {
            ratio = std::sqrt(ratio);
            if (ratio > 0.999) return std::nullopt;
        }
    }
    if (reached_axis) *reached_axis = true;
    if (target > 0.0) return finish(z, delta, iterations);
    auto real = attempt(cd(x, 0.0), cd(delta.real(), 0.0));
    if (real) real->iterations += iterations;
    return real;
}

StieltjesPoint BulkSolver::solve_point(cd z, std::optional<cd> warm_start) const {
    if (!finite(z)) throw DomainError("non-finite z");
    if (z.imag() < 0.0) {
        StieltjesPoint p = solve_point(std::conj(z), warm_start ? std::optional<cd>(std::conj(*warm_start))
                                                                : std::nullopt);
        p.z = z;
        p.delta = std::conj(p.delta);
        p.m = std::conj(p.m);
        p.e = std::conj(p.e);
        return p;
    }
    if (warm_start) {
        if (auto p = attempt(z, *warm_start)) return *p;
    }
    if (std::abs(z) > 0.0) {
        if (auto p = attempt(z, -c_ * t_mean_ / z)) return *p;
    }
    bool reached_axis = false;
    if (auto p = continuation(z, &reached_axis)) return *p;
    if (z.imag() == 0.0 && reached_axis) {
        // The branch was followed down to the axis but no real solution continues it.
        throw BranchViolation("no branch-consistent real solution at x = " +
                              std::to_string(z.real()) + " (inside the support)");
    }

    cd delta = warm_start.value_or(std::abs(z) > 0.0 ? -c_ * t_mean_ / z : cd(0.0, 1.0));
    int iterations = 0;
    const bool converged = damped(z, delta, iterations);
    if (converged) {
        try {
            if (branch_ok(z, delta, evaluate(z, delta))) return finish(z, delta, iterations);
        } catch (const NumericError&) {
        }
        if (z.imag() == 0.0) {
            throw BranchViolation("no branch-consistent real solution at x = " +
                                  std::to_string(z.real()) + " (inside the support?)");
        }
        throw BranchViolation("fixed point converged off the Stieltjes branch");
    }
    double residual = std::numeric_limits<double>::infinity();
    try {
        residual = self_consistency(z, delta);
    } catch (const NumericError&) {
    }
    if (z.imag() == 0.0) {
        throw BranchViolation("no real solution at x = " + std::to_string(z.real()) +
                              " (inside the support?)");
    }
    throw NonConvergence("fixed point did not converge", residual);
}

std::optional<StieltjesPoint> BulkSolver::solve_exterior(double x, std::optional<cd> warm_start) const {
    if (warm_start) {
        if (auto p = attempt(cd(x, 0.0), *warm_start)) return p;
    }
    try {
        return solve_point(cd(x, 0.0));
    } catch (const NumericError&) {
        return std::nullopt;
    }
}

StieltjesDerivatives BulkSolver::derivatives(const StieltjesPoint& point) const {
    const Eval ev = evaluate(point.z, point.delta);
    const cd delta_prime = c_ * ev.b1 / ev.d;
    const SpectralMeasure& nu = geometry_.spectrum();
    cd m_prime{0.0, 0.0};
    for (std::size_t j = 0; j < nu.values.size(); ++j) {
        const double t = nu.values[j];
        const cd r = 1.0 / (ev.e * t - point.z);
        m_prime += nu.weights[j] * (1.0 + ev.e2 * delta_prime * t) * r * r;
    }
    return {delta_prime, m_prime, ev.e2};
}

double BulkSolver::default_epsilon(double span) { return std::max(1e-6, 1e-6 * span); }

DensityCurve BulkSolver::density(const std::vector<double>& grid, double epsilon,
                                 bool richardson) const {
    if (!(epsilon > 0.0)) throw DomainError("density epsilon must be positive");
    DensityCurve out;
    out.grid = grid;
    out.epsilon = epsilon;
    out.richardson = richardson;
    auto sweep = [&](double eps) {
        std::vector<double> rho(grid.size());
        std::optional<cd> warm;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            try {
                const StieltjesPoint p = solve_point(cd(grid[i], eps), warm);
                rho[i] = std::max(p.m.imag(), 0.0) / M_PI;
                warm = p.delta;
            } catch (const NumericError&) {
                rho[i] = std::numeric_limits<double>::quiet_NaN();
                ++out.failures;
                warm.reset();
            }
        }
        return rho;
    };
    out.density = sweep(epsilon);
    if (richardson) {
        const std::vector<double> half = sweep(0.5 * epsilon);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out.density[i] = std::max(2.0 * half[i] - out.density[i], 0.0);
        }
    }
    return out;
}

std::pair<double, double> BulkSolver::default_scan_range() const {
    const SpectralMeasure& nu = geometry_.spectrum();
    const double t_max = nu.values.back();
    const double mp = (1.0 + std::sqrt(c_)) * (1.0 + std::sqrt(c_));
    const double hi = std::max(engine_.g_quantile(1.0 - 1e-6), 0.0) * t_max * mp;
    const double lo = std::min(engine_.g_quantile(1e-6), 0.0) * t_max * mp;
    double span = hi - lo;
    if (!(span > 0.0)) span = 1.0;
    return {lo - 0.1 * span, hi + 0.1 * span};
}

double BulkSolver::refine_exact(double outside, double inside, std::optional<cd> warm) const {
    const double step = inside - outside;
    std::optional<StieltjesPoint> ext = solve_exterior(outside, warm);
    for (int k = 0; k < 20 && !ext; ++k) {
        outside -= step;
        ext = solve_exterior(outside);
    }
    if (!ext) return std::numeric_limits<double>::quiet_NaN();
    // The smoothed density can cross the threshold just outside a steep edge; walk inward.
    for (int k = 0;; ++k) {
        auto p = solve_exterior(inside, ext->delta);
        if (!p) break;
        if (k == 20) return std::numeric_limits<double>::quiet_NaN();
        outside = inside;
        ext = p;
        inside += step;
    }
    const double tol = 1e-11 * std::max(1.0, scale_);
    cd w = ext->delta;
    while (std::abs(inside - outside) > tol) {
        const double mid = 0.5 * (inside + outside);
        if (auto p = solve_exterior(mid, w)) {
            outside = mid;
            w = p->delta;
        } else {
            inside = mid;
        }
    }
    return 0.5 * (inside + outside);
}

double BulkSolver::refine_threshold(double below, double above, double threshold, double eps) const {
    const double tol = 1e-6;
    auto rho = [&](double x) {
        try {
            return std::max(solve_point(cd(x, eps)).m.imag(), 0.0) / M_PI;
        } catch (const NumericError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    while (std::abs(above - below) > tol) {
        const double mid = 0.5 * (above + below);
        const double r = rho(mid);
        if (std::isfinite(r) && r > threshold) {
            above = mid;
        } else {
            below = mid;
        }
    }
    return 0.5 * (above + below);
}

SupportReport BulkSolver::support(std::optional<std::pair<double, double>> scan_range,
                                  int resolution) const {
    if (resolution < 3) throw DomainError("support resolution must be >= 3");
    SupportReport out;
    out.bounded = classify_g_support(spec_).bounded;
    out.refinement = out.bounded ? EdgeRefinement::Exact : EdgeRefinement::DensityThreshold;
    out.scan_range = scan_range.value_or(default_scan_range());
    const auto [lo, hi] = out.scan_range;
    if (!(hi > lo)) throw DomainError("empty scan range");

    std::vector<double> grid(resolution);
    for (int i = 0; i < resolution; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
    }
    const double eps = default_epsilon(hi - lo);
    const DensityCurve curve = density(grid, eps);
    double peak = 0.0;
    for (double r : curve.density) {
        if (std::isfinite(r)) peak = std::max(peak, r);
    }
    out.peak_density = peak;
    if (!(peak > 0.0)) return out;
    const double threshold = kThresholdRatio * peak;

    auto above = [&](int i) {
        return std::isfinite(curve.density[i]) && curve.density[i] > threshold;
    };
    std::vector<std::pair<double, double>> intervals;
    int i = 0;
    while (i < resolution) {
        if (!above(i)) {
            ++i;
            continue;
        }
        const int start = i;
        while (i + 1 < resolution && above(i + 1)) ++i;
        const int end = i;
        ++i;

        double left = grid[start];
        double right = grid[end];
        if (start > 0) {
            double edge = std::numeric_limits<double>::quiet_NaN();
            if (out.bounded) edge = refine_exact(grid[start - 1], grid[start], std::nullopt);
            if (!std::isfinite(edge)) edge = refine_threshold(grid[start - 1], grid[start], threshold, eps);
            left = edge;
        }
        if (end + 1 < resolution) {
            double edge = std::numeric_limits<double>::quiet_NaN();
            if (out.bounded) edge = refine_exact(grid[end + 1], grid[end], std::nullopt);
            if (!std::isfinite(edge)) edge = refine_threshold(grid[end + 1], grid[end], threshold, eps);
            right = edge;
        }
        if (!intervals.empty() && left <= intervals.back().second) {
            intervals.back().second = std::max(intervals.back().second, right);
        } else {
            intervals.emplace_back(left, right);
        }
    }
    out.intervals = std::move(intervals);
    out.bulk_count = static_cast<int>(out.intervals.size());
    return out;
}

}  // namespace hesspec
