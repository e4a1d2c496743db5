#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "orbitlab/dynamics.hpp"

namespace orbitlab {

enum class CiMethod { Analytic, PairCount, Quadrature };

/// mu(B(center, r)) by exact CDF differences, clipped to the support; the
/// circle metric wraps the ball around 1 ~ 0.
double ball_measure(const MeasureSpec& measure, double center, double r, Metric metric);

struct PairCountParams {
    std::size_t samples = 100000;
    std::size_t blocks = 16;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct CorrelationIntegral {
    MeasureSpec measure;
    Metric metric = Metric::Interval;
    CiMethod method = CiMethod::Quadrature;
    std::vector<double> r_grid;   // decreasing
    std::vector<double> values;
    std::vector<double> stderrs;  // PairCount only, else empty
};

// int mu(B(y,r)) dmu(y).  Analytic exists only for Lebesgue
// (circle: min(2r,1); interval: 2r - r^2).  Quadrature integrates the ball
// mass against the density through the inverse-CDF substitution, which removes
// the density's endpoint singularities.  PairCount is the Grassberger-
// Procaccia estimate over i.i.d. samples, counted per block so that standard
// errors come from independent replicates.
double correlation_integral_value(const MeasureSpec& measure, double r, Metric metric, CiMethod method,
                                  const PairCountParams& params = {}, double* stderr_out = nullptr);

CorrelationIntegral correlation_integral(const MeasureSpec& measure, std::span<const double> r_grid, Metric metric,
                                         CiMethod method, const PairCountParams& params = {});

// int mu1(B(y,r)) dmu2(y); symmetric in (mu1, mu2) by Fubini.
double cross_correlation_integral(const MeasureSpec& mu1, const MeasureSpec& mu2, double r, Metric metric);

// Dyadic grid r = 2^-j for j in [j_lo, j_hi].
std::vector<double> dyadic_r_grid(int j_lo, int j_hi);

struct CorrelationDimensionEstimate {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::size_t points_used = 0;
    double r_lo = 0.0, r_hi = 0.0;
};

// Least-squares slope of log value vs log r over grid points with value > 0;
// needs at least five of them.
CorrelationDimensionEstimate correlation_dimension(const CorrelationIntegral& ci);

/// Scale-free tightness constant: max over the grid of
/// sup_y mu(B(y,r)) / sqrt(correlation integral at r), the sup taken over ball
/// centers spaced r/8 apart.
double tightness_constant(const MeasureSpec& measure, std::span<const double> r_grid, Metric metric,
                          double center_spacing_factor = 8.0);

// Simple least squares y = a + b x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace orbitlab
