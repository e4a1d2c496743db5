#include "orbitlab/measures.hpp"

#include <algorithm>
#include <cmath>

#include "orbitlab/parallel.hpp"

namespace orbitlab {

namespace {

// Adaptive Simpson with an absolute tolerance; the integrands here are smooth
// away from finitely many kinks, which bisection isolates.
double simpson(double (*f)(double, const void*), const void* ctx, double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

struct QuadCtx {
    const MeasureSpec* measure;
    double r;
    Metric metric;
};

double adaptive_simpson_rec(double (*f)(double, const void*), const void* ctx, double a, double m, double b, double fa,
                            double fm, double fb, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm, ctx);
    double frm = f(rm, ctx);
    double left = simpson(f, ctx, a, m, fa, flm, fm);
    double right = simpson(f, ctx, m, b, fm, frm, fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, ctx, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, ctx, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double adaptive_simpson(double (*f)(double, const void*), const void* ctx, double a, double b, double tol) {
    double m = 0.5 * (a + b);
    double fa = f(a, ctx);
    double fm = f(m, ctx);
    double fb = f(b, ctx);
    double whole = simpson(f, ctx, a, b, fa, fm, fb);
    return adaptive_simpson_rec(f, ctx, a, m, b, fa, fm, fb, whole, tol, 48);
}

constexpr double kQuadTol = 1e-9;

double ball_mass_at_u(double u, const void* raw) {
    const auto* ctx = static_cast<const QuadCtx*>(raw);
    double y = ctx->measure->inv_cdf(u);
    return ball_measure(*ctx->measure, y, ctx->r, ctx->metric);
}

struct CrossCtx {
    const MeasureSpec* mu1;
    const MeasureSpec* mu2;
    double r;
    Metric metric;
};

double cross_mass_at_u(double u, const void* raw) {
    const auto* ctx = static_cast<const CrossCtx*>(raw);
    double y = ctx->mu2->inv_cdf(u);
    return ball_measure(*ctx->mu1, y, ctx->r, ctx->metric);
}

// Unordered sorted-array pairs with x_j - x_i below t.
std::uint64_t pairs_delta_below(const std::vector<double>& sorted, double t, bool strict) {
    std::uint64_t count = 0;
    std::size_t lo = 0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        if (strict) {
            while (sorted[j] - sorted[lo] >= t) ++lo;
        } else {
            while (sorted[j] - sorted[lo] > t) ++lo;
        }
        count += j - lo;
    }
    return count;
}

// Ordered pairs (a != b) with distance < r.
std::uint64_t count_close_pairs(const std::vector<double>& sorted, double r, Metric metric) {
    const std::size_t n = sorted.size();
    const std::uint64_t all = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t unordered;
    if (metric == Metric::Interval) {
        unordered = pairs_delta_below(sorted, r, true);
    } else if (r > 0.5) {
        unordered = all; // circle distance never exceeds 1/2
    } else {
        // direct pairs |dx| < r, plus wrapped pairs |dx| > 1 - r (disjoint)
        unordered = pairs_delta_below(sorted, r, true) + (all - pairs_delta_below(sorted, 1.0 - r, false));
    }
    return 2 * unordered;
}

} // namespace

double ball_measure(const MeasureSpec& measure, double center, double r, Metric metric) {
    if (!(r > 0.0)) return 0.0;
    if (metric == Metric::Circle) {
        if (measure.kind != MeasureKind::Lebesgue) {
            // Wrap the CDF difference around the circle.
            if (2.0 * r >= 1.0) return 1.0;
            double lo = center - r;
            double hi = center + r;
            if (lo < 0.0) return measure.cdf(hi) + (1.0 - measure.cdf(lo + 1.0));
            if (hi > 1.0) return (1.0 - measure.cdf(lo)) + measure.cdf(hi - 1.0);
            return measure.cdf(hi) - measure.cdf(lo);
        }
        return std::min(2.0 * r, 1.0);
    }
    return measure.cdf(center + r) - measure.cdf(center - r);
}

std::vector<double> dyadic_r_grid(int j_lo, int j_hi) {
    std::vector<double> grid;
    for (int j = j_lo; j <= j_hi; ++j) grid.push_back(std::ldexp(1.0, -j));
    return grid;
}

double correlation_integral_value(const MeasureSpec& measure, double r, Metric metric, CiMethod method,
                                  const PairCountParams& params, double* stderr_out) {
    if (stderr_out) *stderr_out = 0.0;
    switch (method) {
        case CiMethod::Analytic: {
            if (measure.kind != MeasureKind::Lebesgue)
                throw ConfigError("analytic correlation integral exists only for lebesgue");
            if (metric == Metric::Circle) return std::min(2.0 * r, 1.0);
            return r >= 1.0 ? 1.0 : 2.0 * r - r * r;
        }
        case CiMethod::Quadrature: {
            QuadCtx ctx{&measure, r, metric};
            return adaptive_simpson(&ball_mass_at_u, &ctx, 0.0, 1.0, kQuadTol);
        }
        case CiMethod::PairCount: {
            CorrelationIntegral ci = correlation_integral(measure, std::span<const double>(&r, 1), metric,
                                                          CiMethod::PairCount, params);
            if (stderr_out) *stderr_out = ci.stderrs[0];
            return ci.values[0];
        }
    }
    throw ConfigError("unknown correlation integral method");
}

CorrelationIntegral correlation_integral(const MeasureSpec& measure, std::span<const double> r_grid, Metric metric,
                                         CiMethod method, const PairCountParams& params) {
    CorrelationIntegral ci;
    ci.measure = measure;
    ci.metric = metric;
    ci.method = method;
    ci.r_grid.assign(r_grid.begin(), r_grid.end());
    if (method != CiMethod::PairCount) {
        for (double r : r_grid) ci.values.push_back(correlation_integral_value(measure, r, metric, method));
        return ci;
    }
    if (params.samples < 1000) throw ConfigError("pair counting needs at least 1000 samples");
    const std::size_t blocks = std::max<std::size_t>(params.blocks, 2);
    const std::size_t per_block = params.samples / blocks;
    if (per_block < 2) throw ConfigError("too many blocks for the sample budget");

    // Per-block estimates over independent samples; deterministic reduction
    // in block order.
    std::vector<std::vector<double>> block_estimates(blocks);
    parallel_for(blocks, params.threads, [&](std::uint64_t b) {
        Rng rng(split_seed(params.seed, b));
        std::vector<double> xs(per_block);
        for (auto& x : xs) x = sample_seed(measure, rng);
        std::sort(xs.begin(), xs.end());
        auto& est = block_estimates[b];
        est.resize(r_grid.size());
        const double denom = static_cast<double>(per_block) * static_cast<double>(per_block - 1);
        for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
            est[gi] = static_cast<double>(count_close_pairs(xs, r_grid[gi], metric)) / denom;
        }
    });
    for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
        double mean = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) mean += block_estimates[b][gi];
        mean /= static_cast<double>(blocks);
        double var = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            double d = block_estimates[b][gi] - mean;
            var += d * d;
        }
        var /= static_cast<double>(blocks - 1);
        ci.values.push_back(mean);
        ci.stderrs.push_back(std::sqrt(var / static_cast<double>(blocks)));
    }
    return ci;
}

double cross_correlation_integral(const MeasureSpec& mu1, const MeasureSpec& mu2, double r, Metric metric) {
    if (mu1.kind == MeasureKind::Lebesgue && mu2.kind == MeasureKind::Lebesgue)
        return correlation_integral_value(mu1, r, metric, CiMethod::Analytic);
    CrossCtx ctx{&mu1, &mu2, r, metric};
    return adaptive_simpson(&cross_mass_at_u, &ctx, 0.0, 1.0, kQuadTol);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DegenerateFit("need at least two points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = n * sxx - sx * sx;
    if (det == 0.0) throw DegenerateFit("abscissae carry no spread");
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += e * e;
    }
    fit.residual_rms = std::sqrt(ss / n);
    return fit;
}

CorrelationDimensionEstimate correlation_dimension(const CorrelationIntegral& ci) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ci.r_grid.size(); ++i) {
        if (ci.values[i] > 0.0) {
            lx.push_back(std::log(ci.r_grid[i]));
            ly.push_back(std::log(ci.values[i]));
        }
    }
    if (lx.size() < 5) throw DegenerateFit("need at least five positive grid points");
    bool all_equal = std::all_of(ly.begin(), ly.end(), [&](double v) { return v == ly.front(); });
    if (all_equal) throw DegenerateFit("correlation integral is flat over the grid");
    LinearFit fit = fit_line(lx, ly);
    CorrelationDimensionEstimate est;
    est.slope = fit.slope;
    est.intercept = fit.intercept;
    est.residual_rms = fit.residual_rms;
    est.points_used = lx.size();
    auto [lo, hi] = std::minmax_element(ci.r_grid.begin(), ci.r_grid.end());
    est.r_lo = *lo;
    est.r_hi = *hi;
    return est;
}

double tightness_constant(const MeasureSpec& measure, std::span<const double> r_grid, Metric metric,
                          double center_spacing_factor) {
    double k_max = 0.0;
    for (double r : r_grid) {
        if (!(r > 0.0 && r <= 0.25)) throw ConfigError("tightness grid must lie in (0, 1/4]");
        double denom = std::sqrt(correlation_integral_value(
            measure, r, metric, measure.kind == MeasureKind::Lebesgue ? CiMethod::Analytic : CiMethod::Quadrature));
        double step = r / center_spacing_factor;
        double sup = 0.0;
        for (double c = 0.0; c <= 1.0 + 0.5 * step; c += step) {
            sup = std::max(sup, ball_measure(measure, std::min(c, 1.0), r, metric));
        }
        k_max = std::max(k_max, sup / denom);
    }
    return k_max;
}

} // namespace orbitlab
