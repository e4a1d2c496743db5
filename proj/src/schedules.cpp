#include "orbitlab/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

#include "orbitlab/errors.hpp"

namespace orbitlab {

namespace {

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("bad number: " + std::string(s));
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Bertrand-series test for sum n^{-q} (log n)^a (loglog n)^bb.
SeriesClass bertrand_class(double q, double a, double bb) {
    if (q > 1.0) return SeriesClass::Converges;
    if (q < 1.0) return SeriesClass::Diverges;
    if (a < -1.0) return SeriesClass::Converges;
    if (a > -1.0) return SeriesClass::Diverges;
    return bb < -1.0 ? SeriesClass::Converges : SeriesClass::Diverges;
}

std::vector<std::pair<double, double>> partial_sum_trace(const std::function<double(std::uint64_t)>& term,
                                                         std::uint64_t horizon) {
    std::vector<std::pair<double, double>> trace;
    double sum = 0.0;
    std::uint64_t next_checkpoint = 8;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        sum += term(n);
        if (n == next_checkpoint || n == horizon) {
            trace.emplace_back(static_cast<double>(n), sum);
            if (n == next_checkpoint) next_checkpoint *= 2;
        }
    }
    return trace;
}

} // namespace

const char* to_string(SeriesClass c) {
    switch (c) {
        case SeriesClass::Converges: return "Converges";
        case SeriesClass::Diverges: return "Diverges";
        case SeriesClass::Undetermined: return "Undetermined";
    }
    return "?";
}

const char* to_string(ConditionVerdict v) {
    switch (v) {
        case ConditionVerdict::Holds: return "Holds";
        case ConditionVerdict::Fails: return "Fails";
        case ConditionVerdict::Undetermined: return "Undetermined";
    }
    return "?";
}

RadiusSchedule RadiusSchedule::power_log(double c, double a, double bb, double b) {
    if (!(c > 0.0)) throw ConfigError("power-log scale must be positive");
    RadiusSchedule s;
    s.family_ = PowerLogParams{c, a, bb, b};
    return s;
}

RadiusSchedule RadiusSchedule::custom(std::vector<std::pair<std::uint64_t, double>> rows) {
    if (rows.empty()) throw ConfigError("custom schedule needs rows");
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        if (rows[i].first >= rows[i + 1].first) throw ConfigError("custom schedule rows must increase in n");
    for (auto& [n, r] : rows)
        if (!(r > 0.0)) throw ConfigError("custom schedule radii must be positive");
    RadiusSchedule s;
    s.family_ = CustomTable{std::move(rows)};
    return s;
}

RadiusSchedule RadiusSchedule::parse(std::string_view text) {
    if (text.rfind("powerlog:", 0) == 0) {
        auto parts = split(text.substr(9), ',');
        if (parts.size() != 4) throw ConfigError("powerlog takes c,a,bb,b");
        return power_log(parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]),
                         parse_double(parts[3]));
    }
    throw ConfigError("unknown schedule: " + std::string(text));
}

double RadiusSchedule::eval(std::uint64_t n) const {
    if (n < 1) throw ConfigError("schedules start at n = 1");
    if (const auto* p = std::get_if<PowerLogParams>(&family_)) {
        std::uint64_t m = std::max<std::uint64_t>(n, 3);
        double ln = std::log(static_cast<double>(m));
        double lln = std::log(ln);
        return p->c * std::pow(ln, p->a) * std::pow(lln, p->bb) / std::pow(static_cast<double>(m), p->b);
    }
    const auto& table = std::get<CustomTable>(family_).rows;
    auto it = std::upper_bound(table.begin(), table.end(), n,
                               [](std::uint64_t v, const auto& row) { return v < row.first; });
    if (it == table.begin()) return table.front().second;
    return std::prev(it)->second;
}

bool RadiusSchedule::check_monotone(std::uint64_t horizon) const {
    double prev = eval(1);
    for (std::uint64_t n = 2; n <= horizon; ++n) {
        double cur = eval(n);
        if (cur > prev) return false;
        prev = cur;
    }
    return true;
}

std::string RadiusSchedule::name() const {
    if (const auto* p = std::get_if<PowerLogParams>(&family_)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "powerlog:%g,%g,%g,%g", p->c, p->a, p->bb, p->b);
        return buf;
    }
    return "custom:" + std::to_string(std::get<CustomTable>(family_).rows.size()) + "rows";
}

SeriesReport classify_sum_n_rn(const RadiusSchedule& schedule, std::uint64_t evidence_horizon) {
    SeriesReport rep;
    rep.condition_id = "sum-n-rn";
    if (const auto* p = schedule.power_log_params()) {
        // sum n r_n = sum c n^{1-b} (log n)^a (loglog n)^bb
        rep.cls = bertrand_class(p->b - 1.0, p->a, p->bb);
        rep.note = "symbolic (power-log family)";
        return rep;
    }
    rep.cls = SeriesClass::Undetermined;
    rep.trace = partial_sum_trace([&](std::uint64_t n) { return static_cast<double>(n) * schedule.eval(n); },
                                  evidence_horizon);
    rep.note = "partial sums at dyadic horizons";
    return rep;
}

SeriesReport classify_liminf_condition(const RadiusSchedule& schedule, std::uint64_t evidence_horizon) {
    SeriesReport rep;
    rep.condition_id = "dyadic-liminf";
    if (const auto* p = schedule.power_log_params()) {
        // term_k = 1/(2^{2k} r_{2^k}) = 2^{k(b-2)} (k log 2)^{-a} (log(k log 2))^{-bb} / c
        if (p->b < 2.0) {
            rep.cls = SeriesClass::Converges; // geometric decay
        } else if (p->b > 2.0) {
            rep.cls = SeriesClass::Diverges; // geometric growth
        } else {
            // terms k^{-a} (log k)^{-bb} up to constants
            rep.cls = bertrand_class(p->a, -p->bb, 0.0);
        }
        rep.note = "symbolic (power-log family)";
        return rep;
    }
    rep.cls = SeriesClass::Undetermined;
    double sum = 0.0;
    for (std::uint64_t k = 0; k < 63 && (1ull << k) <= evidence_horizon; ++k) {
        std::uint64_t n = 1ull << k;
        sum += 1.0 / (std::ldexp(1.0, static_cast<int>(2 * k)) * schedule.eval(n));
        rep.trace.emplace_back(static_cast<double>(n), sum);
    }
    rep.note = "partial sums over dyadic indices";
    return rep;
}

CondensationReport cauchy_condensation_equivalent(const RadiusSchedule& schedule, std::uint64_t horizon) {
    CondensationReport rep;
    auto c_term = [&](std::uint64_t n) {
        double nn = static_cast<double>(n);
        return 1.0 / (nn * nn * nn * schedule.eval(n));
    };
    double prev = c_term(1);
    double sum = 0.0;
    std::uint64_t next_checkpoint = 8;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        double cur = c_term(n);
        if (n > 1 && cur > prev * (1.0 + 1e-12))
            throw NotMonotone("c_n = 1/(n^3 r_n) increases at n = " + std::to_string(n));
        prev = cur;
        sum += cur;
        if (n == next_checkpoint || n == horizon) {
            rep.direct_trace.emplace_back(static_cast<double>(n), sum);
            if (n == next_checkpoint) next_checkpoint *= 2;
        }
    }
    double csum = 0.0;
    for (std::uint64_t k = 0; k < 63 && (1ull << k) <= horizon; ++k) {
        std::uint64_t n = 1ull << k;
        csum += std::ldexp(1.0, static_cast<int>(k)) * c_term(n);
        rep.condensed_trace.emplace_back(static_cast<double>(n), csum);
    }
    double direct_total = rep.direct_trace.back().second;
    double condensed_total = rep.condensed_trace.back().second;
    rep.inconsistent = direct_total > 10.0 * condensed_total || condensed_total > 10.0 * direct_total;
    return rep;
}

MixingPairConditions mixing_pair_conditions(const RadiusSchedule& schedule,
                                            const std::function<double(double)>& ci_self_1,
                                            const std::function<double(double)>& ci_self_2,
                                            const std::function<double(double)>& ci_cross, double eps,
                                            std::uint64_t horizon, std::optional<double> constant) {
    MixingPairConditions out;
    out.growth.condition_id = "cross-integral-growth";
    out.ratio_1.condition_id = "self1-cross-ratio";
    out.ratio_2.condition_id = "self2-cross-ratio";
    bool growth_ok = true, ratio1_ok = true, ratio2_ok = true;
    for (std::uint64_t n = 8; n <= horizon; n *= 2) {
        double nn = static_cast<double>(n);
        double ln = std::log(nn);
        double lln = std::log(ln);
        double r = schedule.eval(n);
        double cross = ci_cross(r);
        double growth_target = std::pow(ln, 3.0) * std::pow(lln, 1.0 + eps) / (nn * nn);
        double ratio_target = nn / (ln * ln * std::pow(lln, 1.0 + eps));
        double g = cross / growth_target;
        double q1 = std::sqrt(ci_self_1(r)) / cross / ratio_target;
        double q2 = std::sqrt(ci_self_2(r)) / cross / ratio_target;
        out.growth.ratio_trace.emplace_back(nn, g);
        out.ratio_1.ratio_trace.emplace_back(nn, q1);
        out.ratio_2.ratio_trace.emplace_back(nn, q2);
        if (constant) {
            growth_ok = growth_ok && g >= 1.0 / *constant;
            ratio1_ok = ratio1_ok && q1 <= *constant;
            ratio2_ok = ratio2_ok && q2 <= *constant;
        }
    }
    auto trend_note = [](const ConditionReport& r) {
        return "trend last/first = " + std::to_string(r.ratio_trace.back().second / r.ratio_trace.front().second);
    };
    if (constant) {
        out.growth.verdict = growth_ok ? ConditionVerdict::Holds : ConditionVerdict::Fails;
        out.ratio_1.verdict = ratio1_ok ? ConditionVerdict::Holds : ConditionVerdict::Fails;
        out.ratio_2.verdict = ratio2_ok ? ConditionVerdict::Holds : ConditionVerdict::Fails;
    }
    out.growth.note = trend_note(out.growth);
    out.ratio_1.note = trend_note(out.ratio_1);
    out.ratio_2.note = trend_note(out.ratio_2);
    return out;
}

} // namespace orbitlab
