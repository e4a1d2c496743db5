#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "orbitlab/circle_point.hpp"

namespace orbitlab {

/// r_n = c (log n)^a (loglog n)^bb / n^b for n >= 3; r_1 = r_2 = r_3 because
/// the iterated logarithm only settles from n = 3 on.
struct PowerLogParams {
    double c = 1.0;
    double a = 0.0;
    double bb = 0.0;
    double b = 2.0;
};

struct CustomTable {
    // (n, r_n) rows, strictly increasing in n; lookup holds the last row's
    // value beyond the table.
    std::vector<std::pair<std::uint64_t, double>> rows;
};

enum class SeriesClass { Converges, Diverges, Undetermined };

struct SeriesReport {
    std::string condition_id;
    SeriesClass cls = SeriesClass::Undetermined;
    // (n, partial sum) evidence at dyadic horizons
    std::vector<std::pair<double, double>> trace;
    std::string note;
};

enum class ConditionVerdict { Holds, Fails, Undetermined };

struct ConditionReport {
    std::string condition_id;
    ConditionVerdict verdict = ConditionVerdict::Undetermined;
    std::vector<std::pair<double, double>> ratio_trace; // (n, ratio)
    std::string note;
};

class RadiusSchedule {
public:
    static RadiusSchedule power_log(double c, double a, double bb, double b);
    static RadiusSchedule custom(std::vector<std::pair<std::uint64_t, double>> rows);
    // "powerlog:c,a,bb,b" (same order as the CLI surface)
    static RadiusSchedule parse(std::string_view text);

    double eval(std::uint64_t n) const;
    RadiusThreshold threshold(std::uint64_t n) const { return radius_threshold(eval(n)); }

    bool is_power_log() const { return std::holds_alternative<PowerLogParams>(family_); }
    const PowerLogParams* power_log_params() const { return std::get_if<PowerLogParams>(&family_); }

    // r_n >= r_{n+1} for all n < horizon, checked directly.
    bool check_monotone(std::uint64_t horizon) const;

    std::string name() const;

private:
    std::variant<PowerLogParams, CustomTable> family_{PowerLogParams{}};
};

/// Series sum_n n r_n: symbolic classification for the power-log family,
/// partial-sum evidence otherwise.
SeriesReport classify_sum_n_rn(const RadiusSchedule& schedule, std::uint64_t evidence_horizon = 1u << 24);

/// Series sum_k 1/(2^{2k} r_{2^k}) over dyadic indices.
SeriesReport classify_liminf_condition(const RadiusSchedule& schedule, std::uint64_t evidence_horizon = 1u << 24);

struct CondensationReport {
    std::vector<std::pair<double, double>> direct_trace;    // partial sums of c_n = 1/(n^3 r_n)
    std::vector<std::pair<double, double>> condensed_trace; // partial sums of 2^k c_{2^k}
    bool inconsistent = false; // one trace bounded while the other exceeds 10x its bound
};

/// Both sides of the condensation equivalence for c_n = 1/(n^3 r_n); throws
/// NotMonotone if c_n increases anywhere before the horizon.
CondensationReport cauchy_condensation_equivalent(const RadiusSchedule& schedule, std::uint64_t horizon);

struct MixingPairConditions {
    ConditionReport growth;  // cross integral vs (log n)^3 (loglog n)^{1+eps} / n^2
    ConditionReport ratio_1; // sqrt(self integral 1) / cross integral vs n / ((log n)^2 (loglog n)^{1+eps})
    ConditionReport ratio_2; // same with the second self integral
};

/// The two-condition test for a mixing pair: requires callbacks returning the
/// self- and cross-correlation integrals at radius r.  Verdicts are boolean
/// only when an explicit constant is supplied; otherwise the ratio traces are
/// the whole answer.
MixingPairConditions mixing_pair_conditions(const RadiusSchedule& schedule,
                                            const std::function<double(double)>& ci_self_1,
                                            const std::function<double(double)>& ci_self_2,
                                            const std::function<double(double)>& ci_cross, double eps,
                                            std::uint64_t horizon, std::optional<double> constant = std::nullopt);

const char* to_string(SeriesClass c);
const char* to_string(ConditionVerdict v);

} // namespace orbitlab
