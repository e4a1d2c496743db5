#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitlab/dynamics.hpp"
#include "orbitlab/engine.hpp"
#include "orbitlab/schedules.hpp"

namespace orbitlab {

using ordered_json = nlohmann::ordered_json;

/// Fully determines every random draw of a run: trial t uses the stream
/// split_seed(base_seed, t * 4096 + attempt), so results are independent of
/// execution order and thread count.
struct ExperimentConfig {
    std::string experiment;
    std::string system1 = "kary:2";
    std::string system2;              // empty: same as system1
    bool single_orbit = false;
    std::string schedule;             // primary schedule
    std::string schedule_b;           // dichotomy partner (convergent)
    std::uint64_t trials = 100;
    std::uint64_t horizon = 1 << 14;
    std::uint64_t base_seed = 1;
    unsigned threads = 0;
    double gamma = 0.25;
    double epsilon = 0.1;
    double radius_factor = 1.0;       // e.g. 4 for the single-orbit variant
    std::vector<double> radii;        // expectation grid
    std::vector<std::uint64_t> ns;    // expectation grid
    int window_k0 = 4;                // early anchor (dyadic exponent)
    int window_k1 = 10;               // late anchor
    int k_lo = 8, k_hi = 14;          // checkpoint exponents (liminf family)
    std::vector<int> lags;            // mixing decay
    double psi_lo = 0.0, psi_hi = 0.5;
    double phi_lo = 0.0, phi_hi = 0.5;
    std::uint64_t samples = 100000;
    std::uint64_t nmax = 4096;        // pair-correlation ratio horizon

    static ExperimentConfig from_json(const ordered_json& j);
    static ExperimentConfig from_json_text(const std::string& text);
    ordered_json to_json() const;
    std::string canonical_text() const { return to_json().dump(2); }
    std::string hash() const;
};

struct ExperimentResult {
    // filename -> byte content; identical for any thread count
    std::map<std::string, std::string> files;
    ordered_json summary;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// --- small statistics helpers shared by experiments and tests ---

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);
void mean_sd(std::span<const double> v, double& mean, double& sd);

// One-sided sign test: P(Binomial(n, 1/2) >= k).
double sign_test_p(std::uint64_t k, std::uint64_t n);

// Per-trial orbit construction with deterministic resampling of degenerate
// seeds; returns the number of resamples through `attempts`.
OrbitStream make_trial_orbit(const SystemSpec& system, std::uint64_t horizon, std::uint64_t base_seed,
                             std::uint64_t trial, std::uint64_t salt, int& attempts);

} // namespace orbitlab
