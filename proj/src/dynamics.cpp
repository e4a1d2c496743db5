#include "orbitlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

namespace orbitlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;

u128 make_u128(std::uint64_t hi, std::uint64_t lo) {
    return (static_cast<u128>(hi) << 64) | lo;
}

int parse_int(std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("bad integer: " + std::string(s));
    return v;
}
} // namespace

CirclePoint golden_angle() {
    // floor(((sqrt 5 - 1)/2) * 2^128)
    return CirclePoint(make_u128(0x9e3779b97f4a7c15ULL, 0xf39cc0605cedc834ULL));
}

CirclePoint sqrt2m1_angle() {
    // floor((sqrt 2 - 1) * 2^128)
    return CirclePoint(make_u128(0x6a09e667f3bcc908ULL, 0xb2fb1366ea957d3eULL));
}

MeasureSpec MeasureSpec::parse(std::string_view name) {
    if (name == "lebesgue") return lebesgue();
    if (name == "gauss") return gauss();
    if (name == "logistic4-acim" || name == "logistic4") return logistic4_acim();
    throw ConfigError("unknown measure: " + std::string(name));
}

double MeasureSpec::cdf(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    switch (kind) {
        case MeasureKind::Lebesgue: return x;
        case MeasureKind::GaussMeasure: return std::log2(1.0 + x);
        case MeasureKind::Logistic4Acim: return (2.0 / kPi) * std::asin(std::sqrt(x));
    }
    return x;
}

double MeasureSpec::inv_cdf(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    switch (kind) {
        case MeasureKind::Lebesgue: return u;
        case MeasureKind::GaussMeasure: return std::exp2(u) - 1.0;
        case MeasureKind::Logistic4Acim: {
            double s = std::sin(kPi * u / 2.0);
            return s * s;
        }
    }
    return u;
}

double MeasureSpec::density(double x) const {
    switch (kind) {
        case MeasureKind::Lebesgue: return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
        case MeasureKind::GaussMeasure: return 1.0 / ((1.0 + x) * kLn2);
        case MeasureKind::Logistic4Acim: return 1.0 / (kPi * std::sqrt(x * (1.0 - x)));
    }
    return 0.0;
}

std::string MeasureSpec::name() const {
    switch (kind) {
        case MeasureKind::Lebesgue: return "lebesgue";
        case MeasureKind::GaussMeasure: return "gauss";
        case MeasureKind::Logistic4Acim: return "logistic4-acim";
    }
    return "?";
}

double sample_seed(const MeasureSpec& measure, Rng& rng) {
    return measure.inv_cdf(rng.next_double());
}

SystemSpec SystemSpec::kary(int k) {
    if (k < 2) throw ConfigError("kary base must be >= 2");
    SystemSpec s;
    s.kind = SystemKind::KAry;
    s.k = k;
    return s;
}

SystemSpec SystemSpec::rotation(CirclePoint alpha) {
    SystemSpec s;
    s.kind = SystemKind::Rotation;
    s.alpha = alpha;
    return s;
}

SystemSpec SystemSpec::logistic4() {
    SystemSpec s;
    s.kind = SystemKind::Logistic4;
    return s;
}

SystemSpec SystemSpec::gauss() {
    SystemSpec s;
    s.kind = SystemKind::Gauss;
    return s;
}

SystemSpec SystemSpec::parse(std::string_view name) {
    if (name.rfind("kary:", 0) == 0) return kary(parse_int(name.substr(5)));
    if (name == "rotation:golden") return rotation(golden_angle());
    if (name == "rotation:sqrt2m1") return rotation(sqrt2m1_angle());
    if (name.rfind("rotation:hex:", 0) == 0) return rotation(CirclePoint::from_hex(name.substr(13)));
    if (name == "logistic4") return logistic4();
    if (name == "gauss") return gauss();
    throw ConfigError("unknown system: " + std::string(name));
}

Metric SystemSpec::metric() const {
    if (metric_override) return *metric_override;
    switch (kind) {
        case SystemKind::KAry:
        case SystemKind::Rotation: return Metric::Circle;
        case SystemKind::Logistic4:
        case SystemKind::Gauss: return Metric::Interval;
    }
    return Metric::Circle;
}

Exactness SystemSpec::exactness() const {
    switch (kind) {
        case SystemKind::KAry:
        case SystemKind::Rotation: return Exactness::Exact;
        case SystemKind::Logistic4:
        case SystemKind::Gauss: return Exactness::Float64Shadow;
    }
    return Exactness::Exact;
}

MeasureSpec SystemSpec::default_measure() const {
    switch (kind) {
        case SystemKind::KAry:
        case SystemKind::Rotation: return MeasureSpec::lebesgue();
        case SystemKind::Logistic4: return MeasureSpec::logistic4_acim();
        case SystemKind::Gauss: return MeasureSpec::gauss();
    }
    return MeasureSpec::lebesgue();
}

std::string SystemSpec::name() const {
    switch (kind) {
        case SystemKind::KAry: return "kary:" + std::to_string(k);
        case SystemKind::Rotation: return "rotation:hex:" + alpha.hex();
        case SystemKind::Logistic4: return "logistic4";
        case SystemKind::Gauss: return "gauss";
    }
    return "?";
}

double iterate_f64(const SystemSpec& system, double x, std::uint64_t steps) {
    for (std::uint64_t s = 0; s < steps; ++s) {
        switch (system.kind) {
            case SystemKind::KAry: {
                double y = x * system.k;
                x = y - std::floor(y);
                break;
            }
            case SystemKind::Rotation: {
                x += system.alpha.value();
                if (x >= 1.0) x -= 1.0;
                break;
            }
            case SystemKind::Logistic4:
                x = 4.0 * x * (1.0 - x);
                break;
            case SystemKind::Gauss: {
                if (x == 0.0) throw DomainError("gauss map undefined at 0");
                double y = 1.0 / x;
                x = y - std::floor(y);
                break;
            }
        }
    }
    return x;
}

BitStreamPoint iterate_exact(const SystemSpec& system, const BitStreamPoint& p, std::size_t steps) {
    if (system.kind != SystemKind::KAry) throw ConfigError("digit-stream iteration requires a k-ary system");
    if (p.base() != system.k) throw ConfigError("digit base does not match system");
    // kx mod 1 drops the leading digit: shift the expansion left.
    if (steps > p.size()) throw InsufficientDigits("cannot shift past the end of the stream");
    std::vector<std::uint8_t> rest(p.digits().begin() + static_cast<std::ptrdiff_t>(steps), p.digits().end());
    return BitStreamPoint(system.k, std::move(rest));
}

CirclePoint iterate_exact(const SystemSpec& system, CirclePoint p, std::uint64_t steps) {
    if (system.kind != SystemKind::Rotation) throw ConfigError("128-bit point iteration requires a rotation");
    return mul_add_wrap(p, steps, system.alpha);
}

OrbitStream::OrbitStream(SystemSpec system, Seed seed, std::uint64_t horizon)
    : system_(std::move(system)), seed_(std::move(seed)), horizon_(horizon) {
    if (system_.kind == SystemKind::KAry) {
        const auto* bs = std::get_if<BitStreamPoint>(&seed_);
        if (!bs) throw ConfigError("k-ary orbits need a digit-stream seed");
        if (bs->size() < horizon_ + 128)
            throw InsufficientDigits("k-ary seed needs horizon + 128 digits");
        if (bs->base() != system_.k) throw ConfigError("seed base does not match system");
    } else if (system_.kind == SystemKind::Rotation) {
        if (!std::holds_alternative<CirclePoint>(seed_))
            throw ConfigError("rotation orbits need a 128-bit point seed");
    } else {
        if (!std::holds_alternative<double>(seed_))
            throw ConfigError("binary-64 systems need a double seed");
    }
}

OrbitStream OrbitStream::random(const SystemSpec& system, std::uint64_t horizon, Rng& rng) {
    switch (system.kind) {
        case SystemKind::KAry:
            return OrbitStream(system, BitStreamPoint(system.k, rng.next_digits(system.k, horizon + 128)), horizon);
        case SystemKind::Rotation:
            return OrbitStream(system, rng.next_point(), horizon);
        case SystemKind::Logistic4:
        case SystemKind::Gauss: {
            MeasureSpec m = system.default_measure();
            return OrbitStream(system, sample_seed(m, rng), horizon);
        }
    }
    throw ConfigError("unknown system kind");
}

void OrbitStream::fill() const {
    if (filled_) return;
    cache_.clear();
    cache_.reserve(horizon_);
    switch (system_.kind) {
        case SystemKind::KAry: {
            const auto& bs = std::get<BitStreamPoint>(seed_);
            cache_ = bs.materialize_range(0, horizon_);
            break;
        }
        case SystemKind::Rotation: {
            CirclePoint p = std::get<CirclePoint>(seed_);
            for (std::uint64_t i = 0; i < horizon_; ++i) {
                cache_.push_back(mul_add_wrap(p, i, system_.alpha));
            }
            break;
        }
        case SystemKind::Logistic4:
        case SystemKind::Gauss: {
            double x = std::get<double>(seed_);
            for (std::uint64_t i = 0; i < horizon_; ++i) {
                cache_.push_back(CirclePoint::from_double(x));
                if (i + 1 < horizon_) x = iterate_f64(system_, x);
            }
            break;
        }
    }
    filled_ = true;
}

CirclePoint OrbitStream::point(std::uint64_t i) const {
    if (i >= horizon_) throw ConfigError("orbit index past horizon");
    fill();
    return cache_[i];
}

double ks_statistic(std::vector<double> samples, const MeasureSpec& measure) {
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = measure.cdf(samples[i]);
        double lo = static_cast<double>(i) / n;
        double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(f - lo), std::abs(f - hi)});
    }
    return d;
}

} // namespace orbitlab
