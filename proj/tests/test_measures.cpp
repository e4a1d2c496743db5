#include <doctest.h>

#include <cmath>

#include "orbitlab/measures.hpp"

using namespace orbitlab;

namespace {

// midpoint-rule oracle, independent of the adaptive quadrature in measures
double midpoint_integral(const std::function<double(double)>& f, int cells) {
    double sum = 0.0;
    for (int i = 0; i < cells; ++i) sum += f((i + 0.5) / cells);
    return sum / cells;
}

} // namespace

TEST_CASE("ball measures from closed-form CDFs") {
    MeasureSpec leb = MeasureSpec::lebesgue();
    CHECK(ball_measure(leb, 0.5, 0.1, Metric::Circle) == doctest::Approx(0.2));
    CHECK(ball_measure(leb, 0.123, 0.7, Metric::Circle) == 1.0);
    CHECK(ball_measure(leb, 0.0, 0.1, Metric::Interval) == doctest::Approx(0.1));

    MeasureSpec gauss = MeasureSpec::gauss();
    double expected = std::log2(1.6 / 1.4);
    CHECK(ball_measure(gauss, 0.5, 0.1, Metric::Interval) == doctest::Approx(expected).epsilon(1e-12));
    // quadrature oracle over the density
    double oracle = 0.0;
    const int cells = 200000;
    for (int i = 0; i < cells; ++i) {
        double x = 0.4 + 0.2 * (i + 0.5) / cells;
        oracle += 0.2 / cells * gauss.density(x);
    }
    CHECK(ball_measure(gauss, 0.5, 0.1, Metric::Interval) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("correlation integral closed forms and quadrature") {
    MeasureSpec leb = MeasureSpec::lebesgue();
    CHECK(correlation_integral_value(leb, 0.05, Metric::Circle, CiMethod::Analytic) == doctest::Approx(0.1));
    // interval: 2r - r^2, against a midpoint oracle of int |B(y,r) cap [0,1]| dy
    double analytic = correlation_integral_value(leb, 0.1, Metric::Interval, CiMethod::Analytic);
    CHECK(analytic == doctest::Approx(0.19).epsilon(1e-12));
    double oracle = midpoint_integral(
        [&](double y) { return std::min(y + 0.1, 1.0) - std::max(y - 0.1, 0.0); }, 250000);
    CHECK(analytic == doctest::Approx(oracle).epsilon(1e-6));
    // quadrature agrees with the analytic value
    CHECK(correlation_integral_value(leb, 0.1, Metric::Interval, CiMethod::Quadrature) ==
          doctest::Approx(analytic).epsilon(1e-8));
}

TEST_CASE("logistic4 correlation integral scales like r log(1/r)") {
    MeasureSpec acim = MeasureSpec::logistic4_acim();
    for (int j = 4; j <= 14; j += 2) {
        double r = std::ldexp(1.0, -j);
        double v = correlation_integral_value(acim, r, Metric::Interval, CiMethod::Quadrature);
        double ratio = v / (r * std::log(1.0 / r));
        CHECK(ratio > 0.45);
        CHECK(ratio < 0.80);
    }
}

TEST_CASE("pair counting matches the analytic lebesgue value within 3 standard errors") {
    MeasureSpec leb = MeasureSpec::lebesgue();
    auto grid = dyadic_r_grid(4, 10);
    PairCountParams params;
    params.samples = 100000;
    params.seed = 31;
    CorrelationIntegral ci = correlation_integral(leb, grid, Metric::Circle, CiMethod::PairCount, params);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double target = std::min(2.0 * grid[i], 1.0);
        CHECK(std::abs(ci.values[i] - target) <= 3.0 * ci.stderrs[i]);
    }
}

TEST_CASE("pair counting matches quadrature for the singular measures") {
    PairCountParams params;
    params.samples = 100000;
    params.seed = 37;
    auto grid = dyadic_r_grid(4, 8);
    for (MeasureSpec m : {MeasureSpec::gauss(), MeasureSpec::logistic4_acim()}) {
        CorrelationIntegral pc = correlation_integral(m, grid, Metric::Interval, CiMethod::PairCount, params);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double q = correlation_integral_value(m, grid[i], Metric::Interval, CiMethod::Quadrature);
            CHECK(std::abs(pc.values[i] - q) <= 3.0 * pc.stderrs[i]);
        }
    }
}

TEST_CASE("correlation integral is monotone in r") {
    for (MeasureSpec m : {MeasureSpec::lebesgue(), MeasureSpec::gauss(), MeasureSpec::logistic4_acim()}) {
        double prev = 0.0;
        for (int j = 14; j >= 2; --j) {
            double v = correlation_integral_value(m, std::ldexp(1.0, -j), Metric::Interval, CiMethod::Quadrature);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("cross correlation integrals") {
    MeasureSpec leb = MeasureSpec::lebesgue();
    MeasureSpec gauss = MeasureSpec::gauss();
    MeasureSpec acim = MeasureSpec::logistic4_acim();
    CHECK(cross_correlation_integral(leb, leb, 0.05, Metric::Circle) == doctest::Approx(0.1));
    // bracket from the density range [1/(2 ln 2), 1/ln 2]
    double v = cross_correlation_integral(leb, gauss, 0.1, Metric::Interval);
    CHECK(v >= 0.1 / (2.0 * std::log(2.0)));
    CHECK(v <= 0.2 / std::log(2.0));
    // Fubini symmetry
    for (double r : {0.01, 0.1}) {
        CHECK(std::abs(cross_correlation_integral(gauss, acim, r, Metric::Interval) -
                       cross_correlation_integral(acim, gauss, r, Metric::Interval)) < 1e-9);
    }
}

TEST_CASE("correlation dimension estimates") {
    MeasureSpec leb = MeasureSpec::lebesgue();
    auto grid = dyadic_r_grid(4, 14);
    auto analytic = correlation_integral(leb, grid, Metric::Circle, CiMethod::Analytic);
    auto est = correlation_dimension(analytic);
    CHECK(est.slope == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(est.points_used == grid.size());

    PairCountParams params;
    params.samples = 100000;
    params.seed = 41;
    auto gauss_pc = correlation_integral(MeasureSpec::gauss(), grid, Metric::Interval, CiMethod::PairCount, params);
    double slope = correlation_dimension(gauss_pc).slope;
    CHECK(slope > 0.95);
    CHECK(slope < 1.05);

    // the r log(1/r) factor depresses the finite-r slope below one
    auto acim_q = correlation_integral(MeasureSpec::logistic4_acim(), grid, Metric::Interval, CiMethod::Quadrature);
    double acim_slope = correlation_dimension(acim_q).slope;
    CHECK(acim_slope > 0.85);
    CHECK(acim_slope < 0.91);

    // a flat integral cannot be fitted
    std::vector<double> flat_grid = {0.9, 0.85, 0.8, 0.75, 0.7, 0.65};
    auto flat = correlation_integral(leb, flat_grid, Metric::Circle, CiMethod::Analytic);
    CHECK_THROWS_AS(correlation_dimension(flat), DegenerateFit);
}

TEST_CASE("tightness constant") {
    MeasureSpec leb = MeasureSpec::lebesgue();
    std::vector<double> grid = {0.25, 0.125, 0.0625, 0.03125};
    // sup mu(B)/sqrt(CI) = 2r/sqrt(2r) = sqrt(2r), maximal at r = 1/4
    double k = tightness_constant(leb, grid, Metric::Circle);
    CHECK(k == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));

    // finite and non-increasing as r -> 0 for the Gauss measure
    MeasureSpec gauss = MeasureSpec::gauss();
    double prev = 1e9;
    for (double r : grid) {
        double kr = tightness_constant(gauss, std::span<const double>(&r, 1), Metric::Interval);
        CHECK(kr < prev + 1e-9);
        CHECK(std::isfinite(kr));
        prev = kr;
    }

    // scale-free in the center-grid density
    double k8 = tightness_constant(gauss, grid, Metric::Interval, 8.0);
    double k16 = tightness_constant(gauss, grid, Metric::Interval, 16.0);
    CHECK(std::abs(k16 - k8) / k8 < 0.01);

    // bounded over the full dyadic grid for all three measures
    auto small = dyadic_r_grid(4, 14);
    for (MeasureSpec m : {MeasureSpec::lebesgue(), MeasureSpec::gauss(), MeasureSpec::logistic4_acim()}) {
        CHECK(tightness_constant(m, small, Metric::Interval) < 3.0);
    }
}

TEST_CASE("fit_line recovers exact lines") {
    std::vector<double> x = {1, 2, 3, 4, 5}, y = {3, 5, 7, 9, 11};
    auto fit = fit_line(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.residual_rms == doctest::Approx(0.0));
}
