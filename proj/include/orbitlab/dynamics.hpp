#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "orbitlab/circle_point.hpp"
#include "orbitlab/rng.hpp"

namespace orbitlab {

enum class SystemKind { KAry, Rotation, Logistic4, Gauss };
enum class Exactness { Exact, Float64Shadow };
enum class MeasureKind { Lebesgue, GaussMeasure, Logistic4Acim };

// Fractional part of (sqrt(5)-1)/2 and of sqrt(2)-1, to 128 bits.
CirclePoint golden_angle();
CirclePoint sqrt2m1_angle();

/// The invariant measures used by the built-in systems.  All three have
/// closed-form CDFs, so ball masses and seed sampling are exact up to
/// binary-64 evaluation of the formulas.
struct MeasureSpec {
    MeasureKind kind = MeasureKind::Lebesgue;

    static MeasureSpec lebesgue() { return {MeasureKind::Lebesgue}; }
    static MeasureSpec gauss() { return {MeasureKind::GaussMeasure}; }
    static MeasureSpec logistic4_acim() { return {MeasureKind::Logistic4Acim}; }
    static MeasureSpec parse(std::string_view name);

    double cdf(double x) const;
    double inv_cdf(double u) const;
    double density(double x) const;
    std::string name() const;

    friend bool operator==(const MeasureSpec&, const MeasureSpec&) = default;
};

// Inverse-CDF sampling; Lebesgue is the identity map on the uniform draw.
double sample_seed(const MeasureSpec& measure, Rng& rng);

struct SystemSpec {
    SystemKind kind = SystemKind::KAry;
    int k = 2;                  // KAry only
    CirclePoint alpha{};        // Rotation only
    std::optional<Metric> metric_override;

    static SystemSpec kary(int k);
    static SystemSpec rotation(CirclePoint alpha);
    static SystemSpec logistic4();
    static SystemSpec gauss();
    // "kary:2", "rotation:golden", "rotation:sqrt2m1", "rotation:hex:<32 hex>",
    // "logistic4", "gauss"
    static SystemSpec parse(std::string_view name);

    Metric metric() const;
    Exactness exactness() const;
    MeasureSpec default_measure() const;
    std::string name() const;
};

// Binary-64 step of the map (shadow systems; also used by exact systems for
// display purposes).  Gauss at 0 raises DomainError.
double iterate_f64(const SystemSpec& system, double x, std::uint64_t steps = 1);

// Exact iteration for the exact systems.
BitStreamPoint iterate_exact(const SystemSpec& system, const BitStreamPoint& p, std::size_t steps);
CirclePoint iterate_exact(const SystemSpec& system, CirclePoint p, std::uint64_t steps);

/// A single orbit up to a fixed horizon.  Exact systems expose every point
/// with at least 128 exact leading bits; Float64Shadow systems iterate in
/// binary-64 and quantize, which is recorded in the exactness metadata.
class OrbitStream {
public:
    using Seed = std::variant<BitStreamPoint, CirclePoint, double>;

    OrbitStream(SystemSpec system, Seed seed, std::uint64_t horizon);

    // Orbit with a randomly drawn seed, Lebesgue/default-measure distributed.
    static OrbitStream random(const SystemSpec& system, std::uint64_t horizon, Rng& rng);

    CirclePoint point(std::uint64_t i) const;
    const SystemSpec& system() const { return system_; }
    std::uint64_t horizon() const { return horizon_; }
    Metric metric() const { return system_.metric(); }
    Exactness exactness() const { return system_.exactness(); }
    const Seed& seed() const { return seed_; }

private:
    void fill() const;

    SystemSpec system_;
    Seed seed_;
    std::uint64_t horizon_;
    mutable std::vector<CirclePoint> cache_;
    mutable bool filled_ = false;
};

// Empirical one-sample Kolmogorov-Smirnov statistic against a CDF.
double ks_statistic(std::vector<double> samples, const MeasureSpec& measure);

} // namespace orbitlab
