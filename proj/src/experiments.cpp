#include "orbitlab/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "orbitlab/io.hpp"
#include "orbitlab/measures.hpp"
#include "orbitlab/oracles.hpp"
#include "orbitlab/parallel.hpp"

namespace orbitlab {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

int log2_floor_u64(std::uint64_t n) {
    int k = -1;
    while (n) {
        n >>= 1;
        ++k;
    }
    return k;
}

unsigned effective_threads(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    if (const char* env = std::getenv("ORBITLAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return resolve_threads(0);
}

SystemSpec parse_system1(const ExperimentConfig& cfg) { return SystemSpec::parse(cfg.system1); }
SystemSpec parse_system2(const ExperimentConfig& cfg) {
    return SystemSpec::parse(cfg.system2.empty() ? cfg.system1 : cfg.system2);
}

} // namespace

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw DegenerateFit("quantile of empty sample");
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double w = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - w) + v[hi] * w;
}

void mean_sd(std::span<const double> v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

double sign_test_p(std::uint64_t k, std::uint64_t n) {
    if (n == 0) return 1.0;
    // P(Bin(n,1/2) >= k) via log binomial coefficients
    double p = 0.0;
    for (std::uint64_t i = k; i <= n; ++i) {
        double lc = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                    std::lgamma(static_cast<double>(n - i) + 1.0);
        p += std::exp(lc - static_cast<double>(n) * kLn2);
    }
    return std::min(p, 1.0);
}

OrbitStream make_trial_orbit(const SystemSpec& system, std::uint64_t horizon, std::uint64_t base_seed,
                             std::uint64_t trial, std::uint64_t salt, int& attempts) {
    // Stream layout: trial in the high bits, salt (outer attempt / orbit slot)
    // and the resampling index below; streams never collide across trials.
    for (int attempt = 0; attempt < 63; ++attempt) {
        Rng rng(split_seed(base_seed, (trial << 20) + salt + static_cast<std::uint64_t>(attempt) * 4));
        try {
            OrbitStream orbit = OrbitStream::random(system, horizon, rng);
            orbit.point(horizon - 1); // force generation so degenerate seeds surface here
            return orbit;
        } catch (const DomainError&) {
            ++attempts; // e.g. Gauss orbit hit 0: resample (measure-zero event)
        }
    }
    throw DegenerateOrbit("seed resampling failed 63 times");
}

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j) {
    ExperimentConfig c;
    if (!j.contains("experiment")) throw ConfigError("config needs an \"experiment\" field");
    auto get = [&](const char* key, auto fallback) {
        using T = decltype(fallback);
        return j.contains(key) ? j.at(key).get<T>() : fallback;
    };
    c.experiment = j.at("experiment").get<std::string>();
    c.system1 = get("system1", std::string("kary:2"));
    c.system2 = get("system2", std::string(""));
    c.single_orbit = get("single_orbit", false);
    c.schedule = get("schedule", std::string(""));
    c.schedule_b = get("schedule_b", std::string(""));
    c.trials = get("trials", std::uint64_t{100});
    c.horizon = get("horizon", std::uint64_t{1} << 14);
    c.base_seed = get("base_seed", std::uint64_t{1});
    c.threads = get("threads", 0u);
    c.gamma = get("gamma", 0.25);
    c.epsilon = get("epsilon", 0.1);
    c.radius_factor = get("radius_factor", 1.0);
    c.radii = get("radii", std::vector<double>{});
    c.ns = get("ns", std::vector<std::uint64_t>{});
    c.window_k0 = get("window_k0", 4);
    c.window_k1 = get("window_k1", 10);
    c.k_lo = get("k_lo", 8);
    c.k_hi = get("k_hi", 14);
    c.lags = get("lags", std::vector<int>{});
    c.psi_lo = get("psi_lo", 0.0);
    c.psi_hi = get("psi_hi", 0.5);
    c.phi_lo = get("phi_lo", 0.0);
    c.phi_hi = get("phi_hi", 0.5);
    c.samples = get("samples", std::uint64_t{100000});
    c.nmax = get("nmax", std::uint64_t{4096});
    return c;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, true, true);
    return from_json(j);
}

ordered_json ExperimentConfig::to_json() const {
    // threads is an execution knob, not part of the experiment identity:
    // results must be byte-identical for any thread count
    ordered_json j;
    j["experiment"] = experiment;
    j["system1"] = system1;
    j["system2"] = system2;
    j["single_orbit"] = single_orbit;
    j["schedule"] = schedule;
    j["schedule_b"] = schedule_b;
    j["trials"] = trials;
    j["horizon"] = horizon;
    j["base_seed"] = base_seed;
    j["gamma"] = gamma;
    j["epsilon"] = epsilon;
    j["radius_factor"] = radius_factor;
    j["radii"] = radii;
    j["ns"] = ns;
    j["window_k0"] = window_k0;
    j["window_k1"] = window_k1;
    j["k_lo"] = k_lo;
    j["k_hi"] = k_hi;
    j["lags"] = lags;
    j["psi_lo"] = psi_lo;
    j["psi_hi"] = psi_hi;
    j["phi_lo"] = phi_lo;
    j["phi_hi"] = phi_hi;
    j["samples"] = samples;
    j["nmax"] = nmax;
    return j;
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical_text()); }

namespace {

void stamp(CsvBuilder& csv, const ExperimentConfig& cfg) {
    csv.comment(std::string(kToolVersion) + " " + cfg.experiment);
    csv.comment("config_hash=" + cfg.hash());
    csv.comment("base_seed=" + std::to_string(cfg.base_seed));
}

ordered_json base_summary(const ExperimentConfig& cfg) {
    ordered_json s;
    s["experiment"] = cfg.experiment;
    s["config_hash"] = cfg.hash();
    return s;
}

// ---------------------------------------------------------------- exponent
ExperimentResult run_exponent(const ExperimentConfig& cfg) {
    if (cfg.horizon < (1u << 12)) throw ConfigError("exponent runs need horizon >= 2^12");
    SystemSpec s1 = parse_system1(cfg);
    SystemSpec s2 = parse_system2(cfg);
    const int K = log2_floor_u64(cfg.horizon);
    auto cps = dyadic_checkpoints(cfg.horizon);
    const int k_first = (K + 1) / 2; // regression over the upper half of dyadic checkpoints

    std::vector<double> slopes(cfg.trials);
    std::vector<int> resamples(cfg.trials, 0);
    parallel_for(cfg.trials, effective_threads(cfg), [&](std::uint64_t t) {
        for (int outer = 0;; ++outer) {
            if (outer >= 64) throw DegenerateOrbit("trial kept collapsing");
            std::uint64_t salt = static_cast<std::uint64_t>(outer) * 1024;
            OrbitStream o1 = make_trial_orbit(s1, cfg.horizon, cfg.base_seed, t, salt, resamples[t]);
            std::vector<double> lx, ly;
            ClosenessProfile prof;
            if (cfg.single_orbit) {
                prof = single_orbit_profile(o1, cfg.horizon, {}, cps);
            } else {
                OrbitStream o2 = make_trial_orbit(s2, cfg.horizon, cfg.base_seed, t, salt + 512, resamples[t]);
                prof = closeness_profile(o1, o2, cfg.horizon, {}, cps);
            }
            bool degenerate = false;
            for (const auto& cp : prof.checkpoints) {
                if (log2_floor_u64(cp.n) < k_first || cp.empty) continue;
                if (cp.m_ticks == 0) {
                    degenerate = true; // periodic seed: M_n collapsed to 0
                    break;
                }
                lx.push_back(-std::log(static_cast<double>(cp.n)));
                ly.push_back(std::log(cp.m_value()));
            }
            if (degenerate) {
                resamples[t]++;
                continue;
            }
            slopes[t] = fit_line(lx, ly).slope;
            return;
        }
    });

    ExperimentResult res;
    CsvBuilder csv;
    stamp(csv, cfg);
    csv.header({"trial", "slope"});
    for (std::uint64_t t = 0; t < cfg.trials; ++t) csv.row({CsvBuilder::cell(t), CsvBuilder::cell(slopes[t])});
    res.files[cfg.experiment + ".csv"] = csv.str();

    int resampled = 0;
    for (int a : resamples) resampled += a;
    ordered_json s = base_summary(cfg);
    s["median_slope"] = median(slopes);
    s["iqr"] = {quantile(slopes, 0.25), quantile(slopes, 0.75)};
    s["fit_checkpoints"] = {1ull << k_first, cfg.horizon};
    s["resampled"] = resampled;
    res.summary = s;
    return res;
}

// ------------------------------------------------------------- expectation
ExperimentResult run_expectation(const ExperimentConfig& cfg) {
    if (cfg.ns.empty() || cfg.radii.empty()) throw ConfigError("expectation runs need \"ns\" and \"radii\"");
    SystemSpec s1 = parse_system1(cfg);
    SystemSpec s2 = parse_system2(cfg);
    std::uint64_t max_n = *std::max_element(cfg.ns.begin(), cfg.ns.end());
    Metric metric = s1.metric();

    const std::size_t cells = cfg.ns.size() * cfg.radii.size();
    std::vector<std::vector<double>> counts(cells); // per cell, per trial
    for (auto& c : counts) c.resize(cfg.trials);
    parallel_for(cfg.trials, effective_threads(cfg), [&](std::uint64_t t) {
        int na = 0;
        OrbitStream o1 = make_trial_orbit(s1, max_n, cfg.base_seed, t, 0, na);
        OrbitStream o2 = make_trial_orbit(s2, max_n, cfg.base_seed, t, 512, na);
        for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
            std::uint64_t n = cfg.ns[ni];
            std::vector<CirclePoint> a, b;
            for (std::uint64_t i = 0; i < n; ++i) {
                a.push_back(o1.point(i));
                b.push_back(o2.point(i));
            }
            for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
                auto count = count_cross_pairs(a, b, radius_threshold(cfg.radii[ri]), metric);
                counts[ni * cfg.radii.size() + ri][t] = static_cast<double>(count);
            }
        }
    });

    ExperimentResult res;
    CsvBuilder csv;
    stamp(csv, cfg);
    csv.header({"n", "r", "mean", "stderr", "target", "z"});
    ordered_json rows = ordered_json::array();
    MeasureSpec m1 = s1.default_measure();
    MeasureSpec m2 = s2.default_measure();
    for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
        for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
            double mean, sd;
            mean_sd(counts[ni * cfg.radii.size() + ri], mean, sd);
            double se = sd / std::sqrt(static_cast<double>(cfg.trials));
            double nn = static_cast<double>(cfg.ns[ni]);
            double target = nn * nn * cross_correlation_integral(m1, m2, cfg.radii[ri], metric);
            double z = se > 0.0 ? (mean - target) / se : (mean == target ? 0.0 : INFINITY);
            csv.row({CsvBuilder::cell(cfg.ns[ni]), CsvBuilder::cell(cfg.radii[ri]), CsvBuilder::cell(mean),
                     CsvBuilder::cell(se), CsvBuilder::cell(target), CsvBuilder::cell(z)});
            ordered_json row;
            row["n"] = cfg.ns[ni];
            row["r"] = cfg.radii[ri];
            row["mean"] = mean;
            row["stderr"] = se;
            row["target"] = target;
            row["z"] = z;
            rows.push_back(row);
        }
    }
    res.files[cfg.experiment + ".csv"] = csv.str();
    ordered_json s = base_summary(cfg);
    s["cells"] = rows;
    res.summary = s;
    return res;
}

// ---------------------------------------------------- dichotomy / windows
struct WindowStats {
    std::vector<double> window_fraction;   // per dyadic window k
    double early_fraction = 0.0;           // any hit in windows >= window_k0
    double late_fraction = 0.0;            // any hit in windows >= window_k1
    double sign_p = 1.0;                   // one-sided: early-only vs late-only trials
};

WindowStats window_stats(const std::vector<ScheduleOutcome>& outcomes, std::uint64_t trials, int k0, int k1) {
    WindowStats ws;
    if (outcomes.empty()) return ws;
    std::size_t windows = outcomes.front().window_hits.size();
    ws.window_fraction.assign(windows, 0.0);
    std::uint64_t early_only = 0, late_only = 0, early_any = 0, late_any = 0;
    for (const auto& oc : outcomes) {
        for (std::size_t k = 0; k < windows; ++k) ws.window_fraction[k] += oc.window_hits[k] ? 1.0 : 0.0;
        bool early = oc.any_hit_at_or_after(1ull << k0);
        bool late = oc.any_hit_at_or_after(1ull << k1);
        early_any += early;
        late_any += late;
        if (early && !late) ++early_only;
        if (!early && late) ++late_only;
    }
    for (auto& f : ws.window_fraction) f /= static_cast<double>(trials);
    ws.early_fraction = static_cast<double>(early_any) / static_cast<double>(trials);
    ws.late_fraction = static_cast<double>(late_any) / static_cast<double>(trials);
    ws.sign_p = sign_test_p(early_only, early_only + late_only);
    return ws;
}

ordered_json window_stats_json(const WindowStats& ws, int k0, int k1) {
    ordered_json j;
    j["window_fraction"] = ws.window_fraction;
    j["early_anchor_k"] = k0;
    j["late_anchor_k"] = k1;
    j["any_hit_after_early"] = ws.early_fraction;
    j["any_hit_after_late"] = ws.late_fraction;
    j["sign_test_p"] = ws.sign_p;
    return j;
}

ExperimentResult run_dichotomy(const ExperimentConfig& cfg) {
    if (cfg.schedule.empty() || cfg.schedule_b.empty())
        throw ConfigError("dichotomy runs need \"schedule\" (divergent) and \"schedule_b\" (convergent)");
    RadiusSchedule sa = RadiusSchedule::parse(cfg.schedule);
    RadiusSchedule sb = RadiusSchedule::parse(cfg.schedule_b);
    SeriesReport ca = classify_sum_n_rn(sa);
    SeriesReport cb = classify_sum_n_rn(sb);
    if (ca.cls != SeriesClass::Diverges || cb.cls != SeriesClass::Converges)
        throw ConfigError("expected schedule divergent and schedule_b convergent under sum n r_n");

    SystemSpec s1 = parse_system1(cfg);
    SystemSpec s2 = parse_system2(cfg);
    ScheduleThresholds ta = ScheduleThresholds::make(sa, cfg.horizon, cfg.radius_factor);
    ScheduleThresholds tb = ScheduleThresholds::make(sb, cfg.horizon, cfg.radius_factor);
    const ScheduleThresholds* scheds[2] = {&ta, &tb};
    auto cps = dyadic_checkpoints(cfg.horizon);

    std::vector<ScheduleOutcome> out_a(cfg.trials), out_b(cfg.trials);
    parallel_for(cfg.trials, effective_threads(cfg), [&](std::uint64_t t) {
        int na = 0;
        OrbitStream o1 = make_trial_orbit(s1, cfg.horizon, cfg.base_seed, t, 0, na);
        ClosenessProfile prof;
        if (cfg.single_orbit) {
            prof = single_orbit_profile(o1, cfg.horizon, scheds, cps);
        } else {
            OrbitStream o2 = make_trial_orbit(s2, cfg.horizon, cfg.base_seed, t, 512, na);
            prof = closeness_profile(o1, o2, cfg.horizon, scheds, cps);
        }
        out_a[t] = prof.outcomes[0];
        out_b[t] = prof.outcomes[1];
    });

    WindowStats wa = window_stats(out_a, cfg.trials, cfg.window_k0, cfg.window_k1);
    WindowStats wb = window_stats(out_b, cfg.trials, cfg.window_k0, cfg.window_k1);

    ExperimentResult res;
    CsvBuilder csv;
    stamp(csv, cfg);
    csv.header({"schedule", "k", "n_lo", "n_hi", "hit_fraction"});
    auto emit = [&](const RadiusSchedule& s, const WindowStats& ws) {
        for (std::size_t k = 0; k < ws.window_fraction.size(); ++k) {
            csv.row({s.name(), CsvBuilder::cell(static_cast<std::uint64_t>(k)), CsvBuilder::cell(std::uint64_t{1} << k),
                     CsvBuilder::cell((std::uint64_t{1} << (k + 1)) - 1), CsvBuilder::cell(ws.window_fraction[k])});
        }
    };
    emit(sa, wa);
    emit(sb, wb);
    res.files[cfg.experiment + ".csv"] = csv.str();

    ordered_json s = base_summary(cfg);
    s["divergent"] = window_stats_json(wa, cfg.window_k0, cfg.window_k1);
    s["convergent"] = window_stats_json(wb, cfg.window_k0, cfg.window_k1);
    bool decay = wb.late_fraction <= 0.5 * wb.early_fraction && wb.sign_p < 0.01;
    s["convergent_decay_verdict"] = decay ? "decays" : "no-decay";
    res.summary = s;
    return res;
}

// ----------------------------------------------------------------- liminf
ExperimentResult run_liminf(const ExperimentConfig& cfg) {
    if (cfg.schedule.empty()) throw ConfigError("liminf runs need a schedule");
    RadiusSchedule sched = RadiusSchedule::parse(cfg.schedule);
    SystemSpec s1 = parse_system1(cfg);
    SystemSpec s2 = parse_system2(cfg);
    if (cfg.k_hi < cfg.k_lo) throw ConfigError("k_hi below k_lo");
    if ((std::uint64_t{1} << cfg.k_hi) > cfg.horizon) throw ConfigError("horizon below 2^k_hi");

    std::vector<std::uint64_t> cps;
    for (int k = cfg.k_lo; k <= cfg.k_hi; ++k) cps.push_back(std::uint64_t{1} << k);
    std::vector<RadiusThreshold> thresholds;
    for (int k = cfg.k_lo; k <= cfg.k_hi; ++k)
        thresholds.push_back(radius_threshold(cfg.radius_factor * sched.eval(std::uint64_t{1} << k)));

    const std::size_t nk = cps.size();
    std::vector<std::vector<std::uint8_t>> hits(cfg.trials); // per trial, per k
    parallel_for(cfg.trials, effective_threads(cfg), [&](std::uint64_t t) {
        int na = 0;
        OrbitStream o1 = make_trial_orbit(s1, cfg.horizon, cfg.base_seed, t, 0, na);
        ClosenessProfile prof;
        if (cfg.single_orbit) {
            prof = single_orbit_profile(o1, std::uint64_t{1} << cfg.k_hi, {}, cps);
        } else {
            OrbitStream o2 = make_trial_orbit(s2, cfg.horizon, cfg.base_seed, t, 512, na);
            prof = closeness_profile(o1, o2, std::uint64_t{1} << cfg.k_hi, {}, cps);
        }
        auto& h = hits[t];
        h.resize(nk);
        for (std::size_t i = 0; i < nk; ++i)
            h[i] = !prof.checkpoints[i].empty && thresholds[i].admits(prof.checkpoints[i].m_ticks);
    });

    std::vector<double> per_k_fraction(nk, 0.0);
    std::vector<double> all_hit_fraction(nk, 0.0); // over [k_lo, k]
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        bool all = true;
        for (std::size_t i = 0; i < nk; ++i) {
            per_k_fraction[i] += hits[t][i];
            all = all && hits[t][i];
            all_hit_fraction[i] += all;
        }
    }
    for (auto& f : per_k_fraction) f /= static_cast<double>(cfg.trials);
    for (auto& f : all_hit_fraction) f /= static_cast<double>(cfg.trials);

    ExperimentResult res;
    CsvBuilder csv;
    stamp(csv, cfg);
    csv.header({"k", "n", "hit_fraction", "all_hit_fraction_from_k_lo"});
    for (std::size_t i = 0; i < nk; ++i) {
        csv.row({CsvBuilder::cell(static_cast<std::uint64_t>(cfg.k_lo) + i), CsvBuilder::cell(cps[i]),
                 CsvBuilder::cell(per_k_fraction[i]), CsvBuilder::cell(all_hit_fraction[i])});
    }
    res.files[cfg.experiment + ".csv"] = csv.str();

    ordered_json s = base_summary(cfg);
    s["per_k_hit_fraction"] = per_k_fraction;
    s["all_hit_fraction"] = all_hit_fraction.back();
    s["radius_factor"] = cfg.radius_factor;
    res.summary = s;
    return res;
}

// --------------------------------------------------------- rotation-mixed
ExperimentResult run_rotation_mixed(const ExperimentConfig& cfg) {
    SystemSpec s1 = parse_system1(cfg);
    SystemSpec s2 = parse_system2(cfg);
    if (s2.kind != SystemKind::Rotation) throw ConfigError("rotation-mixed needs system2 = rotation:*");
    if (s1.exactness() != Exactness::Exact || s1.kind != SystemKind::KAry)
        throw ConfigError("rotation-mixed pairs a k-ary system with the rotation");
    // periodic angles make the rotation orbit collapse; refuse them
    if (rotation_single_min_ticks(s2.alpha, std::min<std::uint64_t>(cfg.horizon, 1u << 16)) == 0)
        throw ConfigError("rotation angle is periodic at this horizon");

    RadiusSchedule sched = RadiusSchedule::parse(cfg.schedule);
    ScheduleThresholds ts = ScheduleThresholds::make(sched, cfg.horizon, cfg.radius_factor);
    const ScheduleThresholds* scheds[1] = {&ts};
    auto cps = dyadic_checkpoints(cfg.horizon);

    std::vector<ScheduleOutcome> outcomes(cfg.trials);
    std::vector<std::vector<std::pair<std::uint64_t, u128>>> m_values(cfg.trials);
    parallel_for(cfg.trials, effective_threads(cfg), [&](std::uint64_t t) {
        int na = 0;
        OrbitStream o1 = make_trial_orbit(s1, cfg.horizon, cfg.base_seed, t, 0, na);
        OrbitStream o2 = make_trial_orbit(s2, cfg.horizon, cfg.base_seed, t, 512, na);
        ClosenessProfile prof = closeness_profile(o1, o2, cfg.horizon, scheds, cps);
        outcomes[t] = prof.outcomes[0];
        for (const auto& cp : prof.checkpoints)
            if (!cp.empty) m_values[t].emplace_back(cp.n, cp.m_ticks);
    });
    WindowStats ws = window_stats(outcomes, cfg.trials, cfg.window_k0, cfg.window_k1);

    // all-checkpoint hit fractions over [k_lo, k_hi]
    std::uint64_t all_hits = 0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        bool all = true;
        for (const auto& [n, m] : m_values[t]) {
            int k = log2_floor_u64(n);
            if (k < cfg.k_lo || k > cfg.k_hi || (std::uint64_t{1} << k) != n) continue;
            all = all && radius_threshold(cfg.radius_factor * sched.eval(n)).admits(m);
        }
        all_hits += all;
    }

    DiophantineProfile dio = continued_fraction(s2.alpha, 120);
    DiophantineMargin margin = diophantine_condition(dio, DiophForm::LogSquared, cfg.epsilon, 1e12);

    ExperimentResult res;
    CsvBuilder csv;
    stamp(csv, cfg);
    csv.header({"k", "n_lo", "n_hi", "hit_fraction"});
    for (std::size_t k = 0; k < ws.window_fraction.size(); ++k)
        csv.row({CsvBuilder::cell(static_cast<std::uint64_t>(k)), CsvBuilder::cell(std::uint64_t{1} << k),
                 CsvBuilder::cell((std::uint64_t{1} << (k + 1)) - 1), CsvBuilder::cell(ws.window_fraction[k])});
    res.files[cfg.experiment + ".csv"] = csv.str();

    ordered_json s = base_summary(cfg);
    s["windows"] = window_stats_json(ws, cfg.window_k0, cfg.window_k1);
    s["all_hit_fraction"] = static_cast<double>(all_hits) / static_cast<double>(cfg.trials);
    s["diophantine_min_margin"] = margin.min_margin;
    s["diophantine_argmin_q"] = margin.argmin_q;
    res.summary = s;
    return res;
}

// ----------------------------------------------------------- mixing decay
ExperimentResult run_mixing_decay(const ExperimentConfig& cfg) {
    SystemSpec sys = parse_system1(cfg);
    if (cfg.lags.empty()) throw ConfigError("mixing-decay needs \"lags\"");
    if (cfg.samples < 100000) throw ConfigError("mixing-decay needs samples >= 1e5");
    int max_lag = *std::max_element(cfg.lags.begin(), cfg.lags.end());
    if (max_lag < 0) throw ConfigError("lags must be nonnegative");
    MeasureSpec measure = sys.default_measure();

    const std::size_t blocks = 64;
    const std::uint64_t per_block = cfg.samples / blocks;
    struct BlockAcc {
        std::vector<double> prod; // per lag: sum psi(x) phi(T^lag x)
        double psi_sum = 0.0, phi_sum = 0.0;
        std::vector<double> prod_sq;
    };
    std::vector<BlockAcc> accs(blocks);
    auto psi = [&](double x) { return x >= cfg.psi_lo && x < cfg.psi_hi ? 1.0 : 0.0; };
    auto phi = [&](double x) { return x >= cfg.phi_lo && x < cfg.phi_hi ? 1.0 : 0.0; };

    parallel_for(blocks, effective_threads(cfg), [&](std::uint64_t b) {
        Rng rng(split_seed(cfg.base_seed, b));
        auto& acc = accs[b];
        acc.prod.assign(cfg.lags.size(), 0.0);
        acc.prod_sq.assign(cfg.lags.size(), 0.0);
        auto horizon = static_cast<std::uint64_t>(max_lag) + 1;
        for (std::uint64_t i = 0; i < per_block; ++i) {
            for (int attempt = 0; attempt < 64; ++attempt) {
                try {
                    OrbitStream orbit = OrbitStream::random(sys, horizon, rng);
                    double x0 = orbit.point(0).value();
                    acc.psi_sum += psi(x0);
                    acc.phi_sum += phi(x0);
                    for (std::size_t li = 0; li < cfg.lags.size(); ++li) {
                        double v = psi(x0) * phi(orbit.point(static_cast<std::uint64_t>(cfg.lags[li])).value());
                        acc.prod[li] += v;
                        acc.prod_sq[li] += v * v;
                    }
                    break;
                } catch (const DomainError&) {
                    // resample the block's next draw
                }
            }
        }
    });

    const double M = static_cast<double>(per_block * blocks);
    double psi_mean = 0.0, phi_mean = 0.0;
    for (const auto& a : accs) {
        psi_mean += a.psi_sum;
        phi_mean += a.phi_sum;
    }
    psi_mean /= M;
    phi_mean /= M;

    ExperimentResult res;
    CsvBuilder csv;
    stamp(csv, cfg);
    csv.header({"lag", "cov", "stderr", "exact"});
    std::vector<double> fit_x, fit_y;
    ordered_json rows = ordered_json::array();
    for (std::size_t li = 0; li < cfg.lags.size(); ++li) {
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& a : accs) {
            sum += a.prod[li];
            sum_sq += a.prod_sq[li];
        }
        double prod_mean = sum / M;
        double var = std::max(0.0, sum_sq / M - prod_mean * prod_mean);
        double se = std::sqrt(var / M);
        double cov = prod_mean - psi_mean * phi_mean;
        double exact = std::numeric_limits<double>::quiet_NaN();
        if (sys.kind == SystemKind::KAry && sys.k == 2)
            exact = doubling_lag_covariance(cfg.psi_lo, cfg.psi_hi, cfg.phi_lo, cfg.phi_hi, cfg.lags[li]);
        csv.row({CsvBuilder::cell(static_cast<std::uint64_t>(cfg.lags[li])), CsvBuilder::cell(cov),
                 CsvBuilder::cell(se), CsvBuilder::cell(exact)});
        ordered_json row;
        row["lag"] = cfg.lags[li];
        row["cov"] = cov;
        row["stderr"] = se;
        if (!std::isnan(exact)) row["exact"] = exact;
        rows.push_back(row);
        // fit over lags whose signal clears the noise floor
        double signal = !std::isnan(exact) ? std::abs(exact) : std::abs(cov);
        if (signal > std::max(3.0 * se, 1e-14)) {
            fit_x.push_back(static_cast<double>(cfg.lags[li]));
            fit_y.push_back(std::log(signal));
        }
    }
    res.files[cfg.experiment + ".csv"] = csv.str();

    ordered_json s = base_summary(cfg);
    s["rows"] = rows;
    s["psi_mean"] = psi_mean;
    s["phi_mean"] = phi_mean;
    if (fit_x.size() >= 2) {
        double theta = -fit_line(fit_x, fit_y).slope;
        s["fitted_theta"] = theta;
        s["verdict"] = theta > 0.05 ? "Mixing" : "NonMixing";
    } else {
        s["verdict"] = fit_x.size() == 1 ? "DecaysBelowNoise" : "Insufficient";
    }
    res.summary = s;
    return res;
}

// -------------------------------------------- pair-correlation ratio trace
ExperimentResult run_chung_erdos_ratio(const ExperimentConfig& cfg) {
    RadiusSchedule sched = RadiusSchedule::parse(cfg.schedule);
    if (classify_sum_n_rn(sched).cls != SeriesClass::Diverges)
        throw ConfigError("the ratio trace needs a schedule with divergent sum n r_n");
    const std::uint64_t nmax = cfg.nmax;

    std::vector<double> r(nmax + 1);
    for (std::uint64_t j = 1; j <= nmax; ++j) r[j] = sched.eval(j);

    ExperimentResult res;
    CsvBuilder csv;
    stamp(csv, cfg);
    csv.header({"n", "pairs", "sum_j_rj", "numerator", "ratio", "numerator_tail_bound"});

    // numerator over the ordered family: pairs with equal index gaps keyed by
    // (j1 < j2), each occurring j1 times; gaps beyond the cutoff carry an
    // explicit bound instead of a value
    double num = 0.0, tail = 0.0, d_sum = 0.0;
    std::uint64_t next_cp = 2;
    ordered_json trace = ordered_json::array();
    std::vector<std::pair<double, double>> ratio_trace;
    for (std::uint64_t n = 1; n <= nmax; ++n) {
        d_sum += static_cast<double>(n) * r[n];
        for (std::uint64_t j1 = 1; j1 < n; ++j1) {
            auto gap = static_cast<int>(n - j1);
            if (gap > 50) {
                tail += static_cast<double>(j1) * std::ldexp(2.0 * r[n], -gap);
                continue;
            }
            num += static_cast<double>(j1) * pair_covariance_limit(gap, r[j1], r[n]);
        }
        if (n == next_cp || n == nmax) {
            double denom = (2.0 * d_sum) * (2.0 * d_sum);
            double ratio = num / denom;
            std::uint64_t pairs = n * (n + 1) / 2;
            csv.row({CsvBuilder::cell(n), CsvBuilder::cell(pairs), CsvBuilder::cell(d_sum), CsvBuilder::cell(num),
                     CsvBuilder::cell(ratio), CsvBuilder::cell(tail)});
            ordered_json row;
            row["n"] = n;
            row["sum_j_rj"] = d_sum;
            row["ratio"] = ratio;
            trace.push_back(row);
            ratio_trace.emplace_back(d_sum, ratio);
            if (n == next_cp) next_cp *= 2;
        }
    }
    res.files[cfg.experiment + ".csv"] = csv.str();

    // best ratio decrease between checkpoints where sum j r_j doubles
    double best_decrease = 0.0;
    for (std::size_t i = 0; i < ratio_trace.size(); ++i) {
        for (std::size_t j = i + 1; j < ratio_trace.size(); ++j) {
            if (ratio_trace[j].first >= 2.0 * ratio_trace[i].first && ratio_trace[i].second > 0.0) {
                best_decrease = std::max(best_decrease, 1.0 - ratio_trace[j].second / ratio_trace[i].second);
                break;
            }
        }
    }
    ordered_json s = base_summary(cfg);
    s["trace"] = trace;
    s["best_decrease_on_doubling"] = best_decrease;
    res.summary = s;
    return res;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult res;
    if (cfg.experiment == "exponent") res = run_exponent(cfg);
    else if (cfg.experiment == "expectation") res = run_expectation(cfg);
    else if (cfg.experiment == "dichotomy") res = run_dichotomy(cfg);
    else if (cfg.experiment == "liminf") res = run_liminf(cfg);
    else if (cfg.experiment == "rotation-mixed") res = run_rotation_mixed(cfg);
    else if (cfg.experiment == "mixing-decay") res = run_mixing_decay(cfg);
    else if (cfg.experiment == "chung-erdos-ratio") res = run_chung_erdos_ratio(cfg);
    else throw ConfigError("unknown experiment: " + cfg.experiment);
    res.files["summary.json"] = res.summary.dump(2) + "\n";
    return res;
}

} // namespace orbitlab
