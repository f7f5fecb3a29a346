// bfc.cpp - command-line front end for the comb delay-metrology toolkit.
//
// Exit codes: 0 success, 1 I/O or check failure, 2 configuration error,
// 3 parse error in an input file, 4 fit did not converge, 5 delay ambiguity.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bfc/bfc.hpp"

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Relative output paths land in BFC_OUTPUT_DIR when it is set.
std::filesystem::path resolve_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("BFC_OUTPUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p;
    }
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bfc::ExperimentConfig load_config(const std::string& preset_name, const std::string& config_file) {
    if (!config_file.empty())
        return bfc::config_from_json(nlohmann::ordered_json::parse(read_text(config_file)));
    return bfc::preset(preset_name);
}

nlohmann::ordered_json fit_result_json(const bfc::FitResult& fit) {
    nlohmann::ordered_json j;
    j["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : fit.params) j["params"][k] = v;
    j["ci95"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : fit.ci95) j["ci95"][k] = v;
    j["residual_norm"] = fit.residual_norm;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    return j;
}

void emit(const nlohmann::ordered_json& j, const std::string& out_file) {
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!out_file.empty()) write_text(resolve_output(out_file), text);
}

int run_simulate(const std::string& preset_name, const std::string& config_file,
                 std::optional<std::uint64_t> seed, bool expected_only, bool histogram,
                 double hist_offset, std::int64_t hist_events, const std::string& out_file,
                 const std::string& meta_file) {
    auto cfg = load_config(preset_name, config_file);

    if (histogram) {
        if (!seed) throw std::invalid_argument("simulate --histogram requires --seed");
        const auto hist = bfc::simulate_histogram(hist_offset, cfg.jitter_sigma_ps, hist_events,
                                                  cfg.hist_bin_width_ps, cfg.hist_span_ps, *seed);
        std::ostringstream csv;
        bfc::write_histogram_csv(csv, hist);
        const auto out_path = resolve_output(out_file);
        write_text(out_path, csv.str());
        nlohmann::ordered_json meta{{"true_offset_ps", hist_offset},
                                    {"jitter_sigma_ps", cfg.jitter_sigma_ps},
                                    {"events", hist_events},
                                    {"bin_width_ps", cfg.hist_bin_width_ps},
                                    {"span_ps", cfg.hist_span_ps},
                                    {"rng_seed", *seed}};
        if (!meta_file.empty()) write_text(resolve_output(meta_file), meta.dump(2) + "\n");
        std::int64_t kept = 0;
        for (auto c : hist.counts) kept += c;
        nlohmann::ordered_json summary{{"out", out_path.string()},
                                       {"bins", hist.bin_centers.size()},
                                       {"events_kept", kept},
                                       {"truncation_warning", hist.truncation_warning}};
        std::cout << summary.dump(2) << "\n";
        if (hist.truncation_warning)
            std::cerr << "warning: histogram span below 6 sigma; tails are clipped\n";
        return 0;
    }

    if (!expected_only && !seed)
        throw std::invalid_argument(
            "simulate: --seed is required when sampling counts (use --expected-only for the noiseless trace)");
    if (seed) cfg.acquisition.rng_seed = *seed;
    const auto scan = bfc::simulate_scan(cfg, expected_only ? std::nullopt : seed);

    std::ostringstream csv;
    bfc::write_interferogram_csv(csv, scan);
    const auto out_path = resolve_output(out_file);
    write_text(out_path, csv.str());
    const auto meta_path = resolve_output(meta_file);
    write_text(meta_path, bfc::config_to_json(cfg).dump(2) + "\n");

    nlohmann::ordered_json summary{{"out", out_path.string()},
                                   {"meta", meta_path.string()},
                                   {"points", scan.axis.size()},
                                   {"sampled", scan.has_counts()}};
    if (scan.has_counts()) {
        std::int64_t peak = 0;
        for (auto c : scan.counts) peak = std::max(peak, c);
        summary["peak_counts"] = peak;
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_fit(const std::string& scan_file, const std::string& meta_file, const std::string& hist_file,
            const std::vector<std::string>& free_params, const std::string& out_file) {
    bfc::FitResult fit;
    if (!hist_file.empty()) {
        std::istringstream is(read_text(hist_file));
        fit = bfc::fit_gaussian_histogram(bfc::read_histogram_csv(is));
    } else {
        if (scan_file.empty() || meta_file.empty())
            throw std::invalid_argument("fit: need --scan and --meta, or --histogram");
        const auto cfg = bfc::config_from_json(nlohmann::ordered_json::parse(read_text(meta_file)));
        std::istringstream is(read_text(scan_file));
        auto scan = bfc::read_interferogram_csv(is);
        scan.kind = cfg.scan.kind;
        scan.arm = cfg.scan.arm;
        bfc::FitModel model{bfc::make_state(cfg), bfc::make_mixing(cfg), cfg.signal, cfg.idler, free_params};
        fit = bfc::fit_interferogram(scan, model);
    }
    emit(fit_result_json(fit), out_file);
    if (!fit.converged) {
        std::cerr << "fit did not converge after " << fit.iterations << " iterations\n";
        return 4;
    }
    return 0;
}

int run_disambiguate(double hist_with, double hist_without, double fine_with, double fine_without,
                     double t_rep, double ci_with, double ci_without, const std::string& out_file) {
    const auto res =
        bfc::disambiguate(hist_with, hist_without, fine_with, fine_without, t_rep, ci_with, ci_without);
    emit(nlohmann::ordered_json{{"period_count", res.period_count},
                                {"coarse_diff_ps", res.coarse_diff_ps},
                                {"total_delay_ps", res.total_delay_ps},
                                {"ci95_half_width_ps", res.ci95_half_width_ps}},
         out_file);
    return 0;
}

int run_estimate_rf_phase(double delay, double reference, double fsr, double ci_delay,
                          double ci_reference, const std::string& out_file) {
    const double phase = bfc::estimate_rf_phase(delay, reference, fsr);
    nlohmann::ordered_json j{{"rf_phase_rad", phase}, {"rf_phase_deg", phase * 180.0 / std::numbers::pi}};
    if (ci_delay > 0.0 || ci_reference > 0.0) {
        const double ci = bfc::angular_rad_per_ps(fsr) * std::hypot(ci_delay, ci_reference);
        j["ci95_rad"] = ci;
        j["ci95_deg"] = ci * 180.0 / std::numbers::pi;
    }
    emit(j, out_file);
    return 0;
}

int run_optimize(const std::string& preset_name, const std::string& config_file, double depth_min,
                 double depth_max, double depth_step, int samples, const std::string& out_file) {
    const auto cfg = load_config(preset_name, config_file);
    if (!(depth_step > 0.0) || depth_max < depth_min)
        throw std::invalid_argument("optimize: bad depth grid");
    std::vector<double> grid;
    for (double m = depth_min; m <= depth_max + 1e-9; m += depth_step) grid.push_back(m);
    const auto map = bfc::slope_map(bfc::make_state(cfg), grid, samples);
    if (!out_file.empty()) {
        std::ostringstream csv;
        bfc::write_slope_map_csv(csv, map);
        write_text(resolve_output(out_file), csv.str());
    }
    nlohmann::ordered_json j{{"best_depth_signal_rad", map.best_depth_signal_rad},
                             {"best_depth_idler_rad", map.best_depth_idler_rad},
                             {"best_slope_per_ps", map.best_slope_per_ps},
                             {"grid_points", grid.size()}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_oracle_check(const std::string& preset_name, const std::string& config_file,
                     double filter_width, int grid_points, int delay_points, double threshold) {
    auto cfg = load_config(preset_name, config_file);
    if (filter_width > 0.0) cfg.filter_width_ghz = filter_width;
    if (delay_points < 3) throw std::invalid_argument("oracle-check: need at least 3 delay points");

    const auto state = bfc::make_state(cfg);
    const auto mixing = bfc::make_mixing(cfg);
    const double t_rep = state.t_rep_ps();
    std::vector<double> axis(static_cast<std::size_t>(delay_points));
    for (int i = 0; i < delay_points; ++i)
        axis[static_cast<std::size_t>(i)] = t_rep * static_cast<double>(i) / delay_points;

    const auto closed =
        bfc::scan_expected(state, mixing, cfg.signal, cfg.idler, axis, bfc::ScanKind::delay, bfc::ScanArm::signal);

    std::vector<double> integral(axis.size());
    bool warned = false;
    double peak = 0.0;
    for (std::size_t i = 0; i < axis.size(); ++i) {
        bfc::ChannelSettings s = cfg.signal;
        s.delay_ps = axis[i];
        const auto r = bfc::oracle_filter_integral(state, s, cfg.idler, cfg.filter_width_ghz, grid_points);
        integral[i] = r.value;
        warned = warned || r.regime_warning;
        peak = std::max(peak, r.value);
    }
    if (!(peak > 0.0)) throw std::runtime_error("oracle-check: integrated trace vanishes");

    double max_dev = 0.0;
    for (std::size_t i = 0; i < axis.size(); ++i)
        max_dev = std::max(max_dev, std::abs(integral[i] / peak - closed.expected[i]));

    nlohmann::ordered_json j{{"max_deviation", max_dev},
                             {"threshold", threshold},
                             {"passed", max_dev <= threshold},
                             {"filter_width_ghz", cfg.filter_width_ghz},
                             {"regime_warning", warned}};
    std::cout << j.dump(2) << "\n";
    if (warned)
        std::cerr << "warning: filter width is a large fraction of the comb spacing; "
                     "the isolated-bin trace model is stretched\n";
    return max_dev <= threshold ? 0 : 1;
}

int run_presets(const std::string& name) {
    if (name.empty()) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& n : bfc::preset_names()) j.push_back(n);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << bfc::config_to_json(bfc::preset(name)).dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and estimation toolkit for frequency-bin comb delay metrology"};
    app.require_subcommand(1);
    app.set_version_flag("--version", bfc::version_string);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a scan (or arrival-time histogram) from a configuration");
    std::string sim_preset, sim_config, sim_out = "scan.csv", sim_meta = "scan_meta.json";
    std::optional<std::uint64_t> sim_seed;
    bool sim_expected_only = false, sim_hist = false;
    double sim_hist_offset = 0.0;
    std::int64_t sim_hist_events = 5000;
    auto* sim_preset_opt = sim->add_option("--preset", sim_preset, "bundled configuration name");
    auto* sim_config_opt = sim->add_option("--config", sim_config, "configuration JSON file");
    sim_preset_opt->excludes(sim_config_opt);
    sim->add_option("--seed", sim_seed, "RNG seed for count sampling");
    sim->add_flag("--expected-only", sim_expected_only, "write the noiseless trace, no counts");
    sim->add_flag("--histogram", sim_hist, "simulate an arrival-time-difference histogram instead of a scan");
    sim->add_option("--offset", sim_hist_offset, "true arrival-time offset for --histogram, ps");
    sim->add_option("--events", sim_hist_events, "total events for --histogram");
    sim->add_option("--out", sim_out, "output CSV path");
    sim->add_option("--meta", sim_meta, "metadata JSON path");

    // fit
    auto* fit = app.add_subcommand("fit", "fit a recorded scan or histogram");
    std::string fit_scan, fit_meta, fit_hist, fit_out, fit_free;
    fit->add_option("--scan", fit_scan, "scan CSV (needs --meta)");
    fit->add_option("--meta", fit_meta, "metadata JSON written by simulate");
    fit->add_option("--histogram", fit_hist, "histogram CSV for a Gaussian centre fit");
    fit->add_option("--free", fit_free, "comma-separated free parameters "
                                        "(delay_offset, rf_phase, amplitude, beta2l, background)");
    fit->add_option("--out", fit_out, "also write the fit JSON here");

    // disambiguate
    auto* dis = app.add_subcommand("disambiguate", "combine histogram centres with fine delays");
    double dis_hw = 0, dis_hwo = 0, dis_fw = 0, dis_fwo = 0, dis_trep = 0, dis_cw = 0, dis_cwo = 0;
    std::string dis_out;
    dis->add_option("--hist-with", dis_hw, "histogram centre with the delay inserted, ps")->required();
    dis->add_option("--hist-without", dis_hwo, "histogram centre without the delay, ps")->required();
    dis->add_option("--fine-with", dis_fw, "fitted fine delay with the delay inserted, ps")->required();
    dis->add_option("--fine-without", dis_fwo, "fitted fine delay without the delay, ps")->required();
    dis->add_option("--t-rep", dis_trep, "repetition period, ps")->required();
    dis->add_option("--ci-fine-with", dis_cw, "95% CI half-width of --fine-with, ps");
    dis->add_option("--ci-fine-without", dis_cwo, "95% CI half-width of --fine-without, ps");
    dis->add_option("--out", dis_out, "also write the result JSON here");

    // estimate-rf-phase
    auto* rfp = app.add_subcommand("estimate-rf-phase", "drive phase from the trace displacement it causes");
    double rfp_delay = 0, rfp_ref = 0, rfp_fsr = 0, rfp_cid = 0, rfp_cir = 0;
    std::string rfp_out;
    rfp->add_option("--delay", rfp_delay, "fitted delay offset with the phase applied, ps")->required();
    rfp->add_option("--reference", rfp_ref, "fitted delay offset of the reference trace, ps")->required();
    rfp->add_option("--fsr", rfp_fsr, "comb spacing, GHz")->required();
    rfp->add_option("--ci-delay", rfp_cid, "95% CI half-width of --delay, ps");
    rfp->add_option("--ci-reference", rfp_cir, "95% CI half-width of --reference, ps");
    rfp->add_option("--out", rfp_out, "also write the result JSON here");

    // optimize
    auto* opt = app.add_subcommand("optimize", "map trace slope against modulation depths");
    std::string opt_preset, opt_config, opt_out;
    double opt_min = 0.5, opt_max = 6.0, opt_step = 0.05;
    int opt_samples = 1024;
    auto* opt_preset_opt = opt->add_option("--preset", opt_preset, "bundled configuration name");
    auto* opt_config_opt = opt->add_option("--config", opt_config, "configuration JSON file");
    opt_preset_opt->excludes(opt_config_opt);
    opt->add_option("--min", opt_min, "lowest modulation depth, rad");
    opt->add_option("--max", opt_max, "highest modulation depth, rad");
    opt->add_option("--step", opt_step, "depth grid step, rad");
    opt->add_option("--samples", opt_samples, "trace samples per period");
    opt->add_option("--out", opt_out, "slope map CSV path");

    // oracle-check
    auto* orc = app.add_subcommand("oracle-check",
                                   "compare the isolated-bin trace against the filtered spectral integral");
    std::string orc_preset, orc_config;
    double orc_width = 0.0, orc_threshold = 0.02;
    int orc_grid = 301, orc_points = 41;
    auto* orc_preset_opt = orc->add_option("--preset", orc_preset, "bundled configuration name");
    auto* orc_config_opt = orc->add_option("--config", orc_config, "configuration JSON file");
    orc_preset_opt->excludes(orc_config_opt);
    orc->add_option("--filter-width", orc_width, "override the per-bin filter width, GHz");
    orc->add_option("--grid", orc_grid, "quadrature grid points per bin");
    orc->add_option("--points", orc_points, "delay points compared over one period");
    orc->add_option("--threshold", orc_threshold, "maximum allowed peak-normalised deviation");

    // presets
    auto* pre = app.add_subcommand("presets", "list bundled configurations or print one as JSON");
    std::string pre_name;
    pre->add_option("--name", pre_name, "print this configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const bool fitting = fit->parsed();
    try {
        if (sim->parsed()) {
            if (sim_preset.empty() && sim_config.empty())
                throw std::invalid_argument("simulate: give --preset or --config");
            return run_simulate(sim_preset, sim_config, sim_seed, sim_expected_only, sim_hist,
                                sim_hist_offset, sim_hist_events, sim_out, sim_meta);
        }
        if (fit->parsed()) {
            std::vector<std::string> free_params;
            std::stringstream ss(fit_free);
            for (std::string item; std::getline(ss, item, ',');)
                if (!item.empty()) free_params.push_back(item);
            return run_fit(fit_scan, fit_meta, fit_hist, free_params, fit_out);
        }
        if (dis->parsed())
            return run_disambiguate(dis_hw, dis_hwo, dis_fw, dis_fwo, dis_trep, dis_cw, dis_cwo, dis_out);
        if (rfp->parsed())
            return run_estimate_rf_phase(rfp_delay, rfp_ref, rfp_fsr, rfp_cid, rfp_cir, rfp_out);
        if (opt->parsed()) {
            if (opt_preset.empty() && opt_config.empty())
                throw std::invalid_argument("optimize: give --preset or --config");
            return run_optimize(opt_preset, opt_config, opt_min, opt_max, opt_step, opt_samples, opt_out);
        }
        if (orc->parsed()) {
            if (orc_preset.empty() && orc_config.empty())
                throw std::invalid_argument("oracle-check: give --preset or --config");
            return run_oracle_check(orc_preset, orc_config, orc_width, orc_grid, orc_points, orc_threshold);
        }
        if (pre->parsed()) return run_presets(pre_name);
    } catch (const bfc::AmbiguityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const bfc::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fitting ? 4 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
