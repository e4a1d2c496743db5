// orbitlab: minimal-orbit-distance laboratory for measure-preserving systems.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "orbitlab/engine.hpp"
#include "orbitlab/experiments.hpp"
#include "orbitlab/io.hpp"
#include "orbitlab/measures.hpp"
#include "orbitlab/oracles.hpp"

namespace fs = std::filesystem;
using namespace orbitlab;

namespace {

struct CliError {
    int code;
    std::string message;
};

void write_outputs(const fs::path& dir, const std::map<std::string, std::string>& files,
                   const std::string& config_json) {
    fs::create_directories(dir);
    Manifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.config_json = config_json;
    manifest.config_hash = sha256_hex(config_json);
    for (const auto& [name, content] : files) {
        write_text_file(dir / name, content);
        manifest.file_hashes[name] = sha256_hex(content);
    }
    write_manifest(dir, manifest);
}

CirclePoint parse_alpha(const std::string& text) {
    if (text == "golden") return golden_angle();
    if (text == "sqrt2m1") return sqrt2m1_angle();
    if (text.rfind("hex:", 0) == 0) return CirclePoint::from_hex(std::string_view(text).substr(4));
    throw ConfigError("alpha must be golden, sqrt2m1 or hex:<32 hex digits>");
}

std::string profile_csv(const ClosenessProfile& prof, const RadiusSchedule* sched, const std::string& header_note) {
    CsvBuilder csv;
    csv.comment(header_note);
    csv.header({"trial_id", "n", "M_n", "r_n", "hit_flag"});
    for (const auto& cp : prof.checkpoints) {
        double r = sched ? sched->eval(cp.n) : std::numeric_limits<double>::quiet_NaN();
        bool hit = sched && !cp.empty && radius_threshold(r).admits(cp.m_ticks);
        csv.row({"0", CsvBuilder::cell(cp.n), CsvBuilder::cell(cp.m_value()), CsvBuilder::cell(r),
                 hit ? "1" : "0"});
    }
    return csv.str();
}

// --- tiny CSV reader for the plot subcommand ---
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw ConfigError("no such column: " + name);
    }
};

CsvTable parse_csv(const std::string& content) {
    CsvTable table;
    std::istringstream in(content);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!have_header) {
            table.columns = cells;
            have_header = true;
        } else {
            table.rows.push_back(cells);
        }
    }
    return table;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"orbitlab: orbit-closeness simulation and exact verification"};
    app.require_subcommand(1);

    // ---- orbit-min ----
    auto* orbit_min = app.add_subcommand("orbit-min", "minimal-distance profile of an orbit pair");
    std::string om_sys1 = "kary:2", om_sys2, om_sched, om_out = ".";
    std::uint64_t om_seed = 1, om_n = 4096;
    bool om_single = false, om_plot = false;
    orbit_min->add_option("--system1", om_sys1, "first system");
    orbit_min->add_option("--system2", om_sys2, "second system (default: same as system1)");
    orbit_min->add_option("--schedule", om_sched, "radius schedule, e.g. powerlog:1,-1,0,2");
    orbit_min->add_option("--seed", om_seed, "base seed");
    orbit_min->add_option("--n", om_n, "horizon");
    orbit_min->add_flag("--single", om_single, "single-orbit profile (pairs i < j)");
    orbit_min->add_flag("--plot", om_plot, "write an SVG of the log-log profile");
    orbit_min->add_option("--out", om_out, "output directory");

    // ---- dimension ----
    auto* dimension = app.add_subcommand("dimension", "correlation dimension estimate");
    std::string dm_measure = "lebesgue", dm_method = "analytic", dm_metric, dm_out = ".";
    int dm_jlo = 4, dm_jhi = 14;
    std::uint64_t dm_samples = 100000, dm_seed = 1;
    dimension->add_option("--measure", dm_measure, "lebesgue | gauss | logistic4-acim");
    dimension->add_option("--method", dm_method, "analytic | paircount | quadrature");
    dimension->add_option("--metric", dm_metric, "circle | interval (default by measure)");
    dimension->add_option("--jlo", dm_jlo, "largest radius 2^-jlo");
    dimension->add_option("--jhi", dm_jhi, "smallest radius 2^-jhi");
    dimension->add_option("--samples", dm_samples, "pair-count sample size");
    dimension->add_option("--seed", dm_seed, "pair-count seed");
    dimension->add_option("--out", dm_out, "output directory");

    // ---- schedule-check ----
    auto* schedule_check = app.add_subcommand("schedule-check", "classify a radius schedule");
    std::string sc_sched, sc_condition = "sum-n-rn", sc_measure1 = "lebesgue", sc_measure2 = "lebesgue";
    double sc_eps = 0.1, sc_constant = 0.0;
    std::uint64_t sc_horizon = 1u << 24;
    schedule_check->add_option("--schedule", sc_sched, "schedule")->required();
    schedule_check->add_option("--condition", sc_condition, "sum-n-rn | dyadic-liminf | cauchy | mixing-pair");
    schedule_check->add_option("--horizon", sc_horizon, "evidence horizon");
    schedule_check->add_option("--eps", sc_eps, "epsilon for mixing-pair");
    schedule_check->add_option("--constant", sc_constant, "explicit constant for a boolean mixing-pair verdict");
    schedule_check->add_option("--measure1", sc_measure1, "self measure 1");
    schedule_check->add_option("--measure2", sc_measure2, "self measure 2");

    // ---- diophantine ----
    auto* diophantine = app.add_subcommand("diophantine", "continued fraction and approximation margins");
    std::string di_alpha = "golden", di_form = "exponent", di_out = ".";
    double di_eps = 0.1, di_sigma = 0.0, di_qmax = 1e6;
    std::size_t di_depth = 90;
    diophantine->add_option("--alpha", di_alpha, "golden | sqrt2m1 | hex:<32>");
    diophantine->add_option("--form", di_form, "log-squared | log-phi | exponent");
    diophantine->add_option("--eps", di_eps, "epsilon for log-squared");
    diophantine->add_option("--sigma", di_sigma, "exponent sigma");
    diophantine->add_option("--qmax", di_qmax, "largest denominator");
    diophantine->add_option("--depth", di_depth, "continued fraction depth");
    diophantine->add_option("--out", di_out, "output directory");

    // ---- oracle-check ----
    auto* oracle_check = app.add_subcommand("oracle-check", "evaluate a built-in exact oracle");
    std::string oc_which = "pair-covariance", oc_alpha = "golden";
    int oc_i1 = 0, oc_j1 = 1, oc_i2 = 1, oc_j2 = 2, oc_n = 3;
    double oc_r1 = 0.01, oc_r2 = 0.01, oc_r = 0.01;
    std::uint64_t oc_kmax = 0, oc_pairs = 10000, oc_seed = 1;
    oracle_check->add_option("--which", oc_which, "pair-covariance | short-return | cover | rotation");
    oracle_check->add_option("--i1", oc_i1);
    oracle_check->add_option("--j1", oc_j1);
    oracle_check->add_option("--i2", oc_i2);
    oracle_check->add_option("--j2", oc_j2);
    oracle_check->add_option("--r1", oc_r1);
    oracle_check->add_option("--r2", oc_r2);
    oracle_check->add_option("--r", oc_r);
    oracle_check->add_option("--n", oc_n);
    oracle_check->add_option("--kmax", oc_kmax);
    oracle_check->add_option("--pairs", oc_pairs);
    oracle_check->add_option("--seed", oc_seed);
    oracle_check->add_option("--alpha", oc_alpha);

    // ---- experiment ----
    auto* experiment = app.add_subcommand("experiment", "run a configured experiment");
    std::string ex_config, ex_out = ".";
    unsigned ex_threads = 0;
    bool ex_plot = false;
    experiment->add_option("--config", ex_config, "JSON config path")->required();
    experiment->add_option("--out", ex_out, "output directory");
    experiment->add_option("--threads", ex_threads, "worker threads (0: auto / ORBITLAB_THREADS)");
    experiment->add_flag("--plot", ex_plot, "emit an SVG plot when the experiment has one");

    // ---- plot ----
    auto* plot = app.add_subcommand("plot", "render a CSV as an SVG polyline chart");
    std::string pl_csv, pl_x, pl_y, pl_group, pl_out = "plot.svg", pl_title = "orbitlab";
    bool pl_logx = false, pl_logy = false;
    plot->add_option("--csv", pl_csv)->required();
    plot->add_option("--x", pl_x)->required();
    plot->add_option("--y", pl_y)->required();
    plot->add_option("--group", pl_group, "split series by this column");
    plot->add_option("--out", pl_out);
    plot->add_option("--title", pl_title);
    plot->add_flag("--logx", pl_logx);
    plot->add_flag("--logy", pl_logy);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    if (orbit_min->parsed()) {
        SystemSpec s1 = SystemSpec::parse(om_sys1);
        SystemSpec s2 = SystemSpec::parse(om_sys2.empty() ? om_sys1 : om_sys2);
        std::optional<RadiusSchedule> sched;
        if (!om_sched.empty()) sched = RadiusSchedule::parse(om_sched);
        Rng rng(split_seed(om_seed, 0));
        OrbitStream o1 = OrbitStream::random(s1, om_n, rng);
        ClosenessProfile prof;
        if (om_single) {
            prof = single_orbit_profile(o1, om_n, sched ? &*sched : nullptr);
        } else {
            OrbitStream o2 = OrbitStream::random(s2, om_n, rng);
            prof = closeness_profile(o1, o2, om_n, sched ? &*sched : nullptr);
        }
        ordered_json cfg;
        cfg["command"] = "orbit-min";
        cfg["system1"] = s1.name();
        cfg["system2"] = s2.name();
        cfg["single"] = om_single;
        cfg["schedule"] = om_sched;
        cfg["seed"] = om_seed;
        cfg["n"] = om_n;
        std::map<std::string, std::string> files;
        files["orbit-min.csv"] = profile_csv(prof, sched ? &*sched : nullptr,
                                             std::string(kToolVersion) + " orbit-min seed=" + std::to_string(om_seed));
        if (om_plot) {
            SvgSeries series;
            series.label = "M_n";
            for (const auto& cp : prof.checkpoints)
                if (!cp.empty && cp.m_ticks != 0) {
                    series.x.push_back(static_cast<double>(cp.n));
                    series.y.push_back(cp.m_value());
                }
            files["orbit-min.svg"] = render_svg_chart("minimal orbit distance", {series}, true, true);
        }
        write_outputs(om_out, files, cfg.dump(2));
        if (prof.first_hit) std::printf("first_hit %llu\n", static_cast<unsigned long long>(*prof.first_hit));
        std::printf("wrote %s/orbit-min.csv\n", om_out.c_str());
        return 0;
    }

    if (dimension->parsed()) {
        MeasureSpec measure = MeasureSpec::parse(dm_measure);
        Metric metric = measure.kind == MeasureKind::Lebesgue ? Metric::Circle : Metric::Interval;
        if (dm_metric == "circle") metric = Metric::Circle;
        else if (dm_metric == "interval") metric = Metric::Interval;
        else if (!dm_metric.empty()) throw ConfigError("metric must be circle or interval");
        CiMethod method;
        if (dm_method == "analytic") method = CiMethod::Analytic;
        else if (dm_method == "paircount") method = CiMethod::PairCount;
        else if (dm_method == "quadrature") method = CiMethod::Quadrature;
        else throw ConfigError("method must be analytic, paircount or quadrature");
        auto grid = dyadic_r_grid(dm_jlo, dm_jhi);
        PairCountParams params;
        params.samples = dm_samples;
        params.seed = dm_seed;
        CorrelationIntegral ci = correlation_integral(measure, grid, metric, method, params);
        CorrelationDimensionEstimate est = correlation_dimension(ci);
        CsvBuilder csv;
        csv.comment(std::string(kToolVersion) + " dimension");
        csv.header({"r", "value", "stderr", "method"});
        for (std::size_t i = 0; i < ci.r_grid.size(); ++i)
            csv.row({CsvBuilder::cell(ci.r_grid[i]), CsvBuilder::cell(ci.values[i]),
                     CsvBuilder::cell(ci.stderrs.empty() ? 0.0 : ci.stderrs[i]), dm_method});
        ordered_json cfg;
        cfg["command"] = "dimension";
        cfg["measure"] = dm_measure;
        cfg["method"] = dm_method;
        cfg["jlo"] = dm_jlo;
        cfg["jhi"] = dm_jhi;
        cfg["samples"] = dm_samples;
        cfg["seed"] = dm_seed;
        ordered_json summary;
        summary["slope"] = est.slope;
        summary["intercept"] = est.intercept;
        summary["residual_rms"] = est.residual_rms;
        summary["points_used"] = est.points_used;
        std::map<std::string, std::string> files;
        files["dimension.csv"] = csv.str();
        files["summary.json"] = summary.dump(2) + "\n";
        write_outputs(dm_out, files, cfg.dump(2));
        std::printf("slope %.17g\n", est.slope);
        return 0;
    }

    if (schedule_check->parsed()) {
        RadiusSchedule sched = RadiusSchedule::parse(sc_sched);
        if (sc_condition == "sum-n-rn") {
            std::printf("%s\n", to_string(classify_sum_n_rn(sched, sc_horizon).cls));
        } else if (sc_condition == "dyadic-liminf") {
            std::printf("%s\n", to_string(classify_liminf_condition(sched, sc_horizon).cls));
        } else if (sc_condition == "cauchy") {
            auto rep = cauchy_condensation_equivalent(sched, std::min<std::uint64_t>(sc_horizon, 1u << 26));
            std::printf("%s direct=%.17g condensed=%.17g\n", rep.inconsistent ? "Inconsistent" : "Consistent",
                        rep.direct_trace.back().second, rep.condensed_trace.back().second);
        } else if (sc_condition == "mixing-pair") {
            MeasureSpec m1 = MeasureSpec::parse(sc_measure1);
            MeasureSpec m2 = MeasureSpec::parse(sc_measure2);
            Metric metric = (m1.kind == MeasureKind::Lebesgue && m2.kind == MeasureKind::Lebesgue)
                                ? Metric::Circle
                                : Metric::Interval;
            auto self1 = [&](double r) { return cross_correlation_integral(m1, m1, r, metric); };
            auto self2 = [&](double r) { return cross_correlation_integral(m2, m2, r, metric); };
            auto cross = [&](double r) { return cross_correlation_integral(m1, m2, r, metric); };
            std::optional<double> constant;
            if (sc_constant > 0.0) constant = sc_constant;
            auto rep = mixing_pair_conditions(sched, self1, self2, cross, sc_eps,
                                              std::min<std::uint64_t>(sc_horizon, 1u << 20), constant);
            std::printf("growth %s (%s)\n", to_string(rep.growth.verdict), rep.growth.note.c_str());
            std::printf("ratio1 %s (%s)\n", to_string(rep.ratio_1.verdict), rep.ratio_1.note.c_str());
            std::printf("ratio2 %s (%s)\n", to_string(rep.ratio_2.verdict), rep.ratio_2.note.c_str());
        } else {
            throw ConfigError("unknown condition: " + sc_condition);
        }
        return 0;
    }

    if (diophantine->parsed()) {
        DiophantineProfile profile;
        if (di_alpha == "golden") profile = continued_fraction(QuadraticTag::Golden, di_depth);
        else if (di_alpha == "sqrt2m1") profile = continued_fraction(QuadraticTag::Sqrt2m1, di_depth);
        else profile = continued_fraction(parse_alpha(di_alpha), di_depth);
        DiophForm form;
        double param = 0.0;
        if (di_form == "log-squared") {
            form = DiophForm::LogSquared;
            param = di_eps;
        } else if (di_form == "log-phi") {
            form = DiophForm::LogPhi;
        } else if (di_form == "exponent") {
            form = DiophForm::Exponent;
            param = di_sigma;
        } else {
            throw ConfigError("form must be log-squared, log-phi or exponent");
        }
        DiophantineMargin margin = diophantine_condition(profile, form, param, di_qmax);
        ordered_json out;
        out["alpha"] = profile.alpha.hex();
        out["quotients"] = profile.quotients;
        ordered_json convs = ordered_json::array();
        for (const auto& c : profile.convergents) {
            ordered_json cj;
            cj["p"] = u128_to_string(c.p);
            cj["q"] = u128_to_string(c.q);
            cj["q_norm"] = c.q_norm;
            convs.push_back(cj);
        }
        out["convergents"] = convs;
        out["form"] = di_form;
        out["min_margin"] = margin.min_margin;
        out["argmin_q"] = margin.argmin_q;
        ordered_json trace = ordered_json::array();
        for (auto [q, m] : margin.trace) trace.push_back({q, m});
        out["margin_trace"] = trace;
        ordered_json cfg;
        cfg["command"] = "diophantine";
        cfg["alpha"] = di_alpha;
        cfg["form"] = di_form;
        cfg["qmax"] = di_qmax;
        cfg["depth"] = di_depth;
        std::map<std::string, std::string> files;
        files["diophantine.json"] = out.dump(2) + "\n";
        write_outputs(di_out, files, cfg.dump(2));
        std::printf("min_margin %.17g at q=%.17g\n", margin.min_margin, margin.argmin_q);
        return 0;
    }

    if (oracle_check->parsed()) {
        if (oc_which == "pair-covariance") {
            std::uint64_t kmax = oc_kmax ? oc_kmax : pair_covariance_default_kmax(oc_j2 - oc_j1, oc_r1, oc_r2);
            PairCovariance pc = pair_covariance_doubling(oc_i1, oc_j1, oc_i2, oc_j2, oc_r1, oc_r2, kmax);
            double limit = (oc_j2 - oc_j1 == oc_i2 - oc_i1) ? pair_covariance_limit(oc_j2 - oc_j1, oc_r1, oc_r2) : 0.0;
            std::printf("value %.17g tail_bound %.17g closed_form %.17g\n", pc.value, pc.tail_bound, limit);
        } else if (oc_which == "short-return") {
            std::printf("measure %.17g\n", short_return_measure_doubling(oc_r, oc_n));
        } else if (oc_which == "cover") {
            CircleCover cover = build_cover(oc_r);
            Rng rng(oc_seed);
            std::uint64_t bad = 0;
            int max_middle = 0;
            for (std::uint64_t i = 0; i < oc_pairs; ++i) {
                auto res = indicator_sandwich_check(cover, rng.next_point(), rng.next_point());
                if (!res.lower_ok || !res.upper_ok) ++bad;
                max_middle = std::max(max_middle, res.middle_sum);
            }
            std::printf("pairs %llu violations %llu max_middle %d\n", static_cast<unsigned long long>(oc_pairs),
                        static_cast<unsigned long long>(bad), max_middle);
        } else if (oc_which == "rotation") {
            CirclePoint alpha = parse_alpha(oc_alpha);
            u128 m = rotation_single_min_ticks(alpha, static_cast<std::uint64_t>(oc_n));
            std::printf("min_sep %.17g\n", ticks_to_double(m));
        } else {
            throw ConfigError("unknown oracle: " + oc_which);
        }
        return 0;
    }

    if (experiment->parsed()) {
        ExperimentConfig cfg = ExperimentConfig::from_json_text(read_text_file(ex_config));
        if (ex_threads > 0) cfg.threads = ex_threads;
        ExperimentResult result = run_experiment(cfg);
        if (ex_plot) {
            // window fraction or trace plots where the CSV shape supports one
            auto it = result.files.find(cfg.experiment + ".csv");
            if (it != result.files.end()) {
                // re-parse our own CSV: columns decide the picture
                CsvTable table = parse_csv(it->second);
                auto has = [&](const char* c) {
                    return std::find(table.columns.begin(), table.columns.end(), c) != table.columns.end();
                };
                std::vector<SvgSeries> series;
                if (has("hit_fraction") && has("k")) {
                    std::map<std::string, SvgSeries> by_group;
                    std::size_t kc = table.col("k"), fc = table.col("hit_fraction");
                    bool grouped = has("schedule");
                    for (const auto& row : table.rows) {
                        std::string g = grouped ? row[table.col("schedule")] : "hit_fraction";
                        by_group[g].label = g;
                        by_group[g].x.push_back(std::stod(row[kc]));
                        by_group[g].y.push_back(std::stod(row[fc]));
                    }
                    for (auto& [g, s] : by_group) series.push_back(s);
                    result.files[cfg.experiment + ".svg"] =
                        render_svg_chart(cfg.experiment, series, false, false);
                } else if (has("ratio")) {
                    SvgSeries s;
                    s.label = "ratio";
                    std::size_t nc = table.col("n"), rc = table.col("ratio");
                    for (const auto& row : table.rows) {
                        s.x.push_back(std::stod(row[nc]));
                        s.y.push_back(std::stod(row[rc]));
                    }
                    result.files[cfg.experiment + ".svg"] = render_svg_chart(cfg.experiment, {s}, true, true);
                } else if (has("cov") && has("lag")) {
                    SvgSeries s;
                    s.label = "|cov|";
                    std::size_t lc = table.col("lag"), cc = table.col("cov");
                    for (const auto& row : table.rows) {
                        s.x.push_back(std::stod(row[lc]));
                        s.y.push_back(std::abs(std::stod(row[cc])));
                    }
                    result.files[cfg.experiment + ".svg"] = render_svg_chart(cfg.experiment, {s}, false, true);
                }
            }
        }
        write_outputs(ex_out, result.files, cfg.canonical_text());
        std::printf("wrote %zu files to %s (config %s)\n", result.files.size() + 1, ex_out.c_str(),
                    cfg.hash().substr(0, 12).c_str());
        return 0;
    }

    if (plot->parsed()) {
        CsvTable table = parse_csv(read_text_file(pl_csv));
        std::map<std::string, SvgSeries> by_group;
        std::size_t xc = table.col(pl_x), yc = table.col(pl_y);
        std::optional<std::size_t> gc;
        if (!pl_group.empty()) gc = table.col(pl_group);
        for (const auto& row : table.rows) {
            std::string g = gc ? row[*gc] : pl_y;
            by_group[g].label = g;
            by_group[g].x.push_back(std::stod(row[xc]));
            by_group[g].y.push_back(std::stod(row[yc]));
        }
        std::vector<SvgSeries> series;
        for (auto& [g, s] : by_group) series.push_back(s);
        write_text_file(pl_out, render_svg_chart(pl_title, series, pl_logx, pl_logy));
        std::printf("wrote %s\n", pl_out.c_str());
        return 0;
    }

    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const PrecisionExhausted& e) {
        std::cerr << "precision error: " << e.what() << "\n";
        return 3;
    } catch (const NotMonotone& e) {
        std::cerr << "precondition error: " << e.what() << "\n";
        return 3;
    } catch (const InsufficientDigits& e) {
        std::cerr << "precondition error: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateOrbit& e) {
        std::cerr << "degenerate orbit: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateFit& e) {
        std::cerr << "degenerate fit: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
