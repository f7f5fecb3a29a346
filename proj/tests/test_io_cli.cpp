#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bfc/io.hpp"
#include "bfc/presets.hpp"

using namespace bfc;
namespace fs = std::filesystem;

TEST_CASE("doubles format to shortest round-trip form") {
    for (double v : {0.0, 0.1, 1.0 / 3.0, -2.5, 1e-300, 12345.6789, 31.25, 5014.65}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-4.0) == "-4");
}

TEST_CASE("interferogram CSV round trips byte for byte") {
    Interferogram scan;
    scan.axis = {0.0, 0.55, 1.1};
    scan.expected = {0.25, 1.0, 1.0 / 3.0};

    SECTION("expected only") {
        std::ostringstream os;
        write_interferogram_csv(os, scan);
        CHECK(os.str().starts_with("axis,expected\n"));
        std::istringstream is(os.str());
        const auto back = read_interferogram_csv(is);
        CHECK(back.axis == scan.axis);
        CHECK(back.expected == scan.expected);
        CHECK_FALSE(back.has_counts());
        std::ostringstream os2;
        write_interferogram_csv(os2, back);
        CHECK(os2.str() == os.str());
    }

    SECTION("with counts") {
        scan.counts = {12, 3401, 77};
        std::ostringstream os;
        write_interferogram_csv(os, scan);
        CHECK(os.str().starts_with("axis,expected,counts\n"));
        std::istringstream is(os.str());
        const auto back = read_interferogram_csv(is);
        CHECK(back.counts == scan.counts);
        std::ostringstream os2;
        write_interferogram_csv(os2, back);
        CHECK(os2.str() == os.str());
    }
}

TEST_CASE("histogram CSV round trips and recovers the bin width") {
    TimeTagHistogram h;
    h.bin_width_ps = 2.0;
    h.bin_centers = {4999.0, 5001.0, 5003.0};
    h.counts = {10, 70, 11};
    std::ostringstream os;
    write_histogram_csv(os, h);
    std::istringstream is(os.str());
    const auto back = read_histogram_csv(is);
    CHECK(back.bin_centers == h.bin_centers);
    CHECK(back.counts == h.counts);
    CHECK(back.bin_width_ps == 2.0);
}

TEST_CASE("slope map CSV lists every grid cell") {
    SlopeMap map;
    map.depths = {4.0, 4.5};
    map.slopes = {1.0, 2.0, 3.0, 4.0};
    std::ostringstream os;
    write_slope_map_csv(os, map);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "depth_signal_rad,depth_idler_rad,slope_per_ps");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("parse failures carry line numbers") {
    {
        std::istringstream is("axis;expected\n0,1\n");
        CHECK_THROWS_AS(read_interferogram_csv(is), ParseError);
    }
    {
        std::istringstream is("axis,expected\n0,1\nbroken,x\n");
        try {
            (void)read_interferogram_csv(is);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line == 3);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    {
        std::istringstream is("axis,expected\n0,1,99\n");
        CHECK_THROWS_AS(read_interferogram_csv(is), ParseError);
    }
    {
        std::istringstream is("");
        CHECK_THROWS_AS(read_interferogram_csv(is), ParseError);
    }
    {
        std::istringstream is("bin_center_ps,counts\n1.0,5\n");
        CHECK_THROWS_AS(read_histogram_csv(is), ParseError);  // one bin: width unknown
    }
}

TEST_CASE("configuration JSON round trips") {
    for (const auto& name : preset_names()) {
        const auto cfg = preset(name);
        const auto back = config_from_json(config_to_json(cfg));
        CHECK(back.name == cfg.name);
        CHECK(back.half_dim == cfg.half_dim);
        CHECK(back.fsr_ghz == cfg.fsr_ghz);
        CHECK(back.offset_ghz == cfg.offset_ghz);
        CHECK(back.filter_width_ghz == cfg.filter_width_ghz);
        CHECK(back.signal.mod_depth_rad == cfg.signal.mod_depth_rad);
        CHECK(back.signal.quad_dispersion_ps2 == cfg.signal.quad_dispersion_ps2);
        CHECK(back.signal.linear_phase_increment_rad == cfg.signal.linear_phase_increment_rad);
        CHECK(back.scan.kind == cfg.scan.kind);
        CHECK(back.scan.arm == cfg.scan.arm);
        CHECK(back.scan.step == cfg.scan.step);
        CHECK(back.acquisition.pair_flux_hz == cfg.acquisition.pair_flux_hz);
        CHECK(back.equalize == cfg.equalize);
    }
    CHECK_THROWS_AS(preset("fig9"), std::invalid_argument);
}

TEST_CASE("scan axis construction") {
    const auto axis = make_axis({ScanKind::delay, ScanArm::signal, 0.0, 93.5, 0.55});
    REQUIRE(axis.size() == 171);
    CHECK(axis.front() == 0.0);
    CHECK_THAT(axis.back(), Catch::Matchers::WithinAbs(93.5, 1e-9));
}

// ---- command-line checks (driven through the installed binary) ----

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const char* cli_path() { return std::getenv("BFC_CLI"); }

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "bfc_cli_tests";
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const auto dir = work_dir();
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = env_prefix + "\"" + std::string(cli_path()) + "\" " + args + " > \"" +
                            out.string() + "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult res;
    if (WIFEXITED(status)) res.code = WEXITSTATUS(status);
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

}  // namespace

TEST_CASE("cli lists and prints bundled configurations") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    const auto list = run_cli("presets");
    REQUIRE(list.code == 0);
    const auto names = nlohmann::json::parse(list.out);
    CHECK(names.size() == 5);
    CHECK(std::find(names.begin(), names.end(), "fig4") != names.end());

    const auto one = run_cli("presets --name fig4");
    REQUIRE(one.code == 0);
    const auto j = nlohmann::json::parse(one.out);
    CHECK(j.at("fsr_ghz") == 20.0);
    CHECK(j.at("scan").at("arm") == "idler");

    CHECK(run_cli("presets --name fig9").code == 2);
}

TEST_CASE("cli simulates, writes files and fits them back") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    const auto dir = work_dir();
    const auto scan_csv = (dir / "scan.csv").string();
    const auto meta_json = (dir / "scan_meta.json").string();

    const auto sim = run_cli("simulate --preset fig3a --seed 7 --out \"" + scan_csv + "\" --meta \"" +
                             meta_json + "\"");
    REQUIRE(sim.code == 0);
    REQUIRE(fs::exists(scan_csv));
    REQUIRE(fs::exists(meta_json));
    {
        std::ifstream is(scan_csv);
        const auto scan = read_interferogram_csv(is);
        CHECK(scan.axis.size() == 171);
        CHECK(scan.has_counts());
    }

    const auto fit = run_cli("fit --scan \"" + scan_csv + "\" --meta \"" + meta_json + "\"");
    REQUIRE(fit.code == 0);
    const auto j = nlohmann::json::parse(fit.out);
    CHECK(j.at("converged") == true);
    // the recovered offset sits on the wrap boundary, so compare modulo a period
    const double off = j.at("params").at("delay_offset_ps").get<double>();
    CHECK(std::abs(bfc::wrap_centered(off - 15.625, 31.25)) < 0.3);
    CHECK(j.at("ci95").at("delay_offset_ps").get<double>() > 0.0);
}

TEST_CASE("cli refuses to sample without a seed") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    CHECK(run_cli("simulate --preset fig3a").code == 2);
    CHECK(run_cli("simulate --preset fig3a --expected-only").code == 0);
}

TEST_CASE("cli output dir redirects relative paths") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    const auto dir = work_dir() / "redirect";
    fs::remove_all(dir);
    const auto res = run_cli("simulate --preset fig3a --expected-only --out rel.csv --meta rel_meta.json",
                             "BFC_OUTPUT_DIR=\"" + dir.string() + "\" ");
    REQUIRE(res.code == 0);
    CHECK(fs::exists(dir / "rel.csv"));
    CHECK(fs::exists(dir / "rel_meta.json"));
}

TEST_CASE("cli fits simulated histograms") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    const auto dir = work_dir();
    const auto hist_csv = (dir / "hist.csv").string();
    const auto sim = run_cli("simulate --preset fig4 --histogram --offset 5000 --events 20000 --seed 3 "
                             "--out \"" + hist_csv + "\" --meta \"\"");
    REQUIRE(sim.code == 0);
    const auto fit = run_cli("fit --histogram \"" + hist_csv + "\"");
    REQUIRE(fit.code == 0);
    const auto j = nlohmann::json::parse(fit.out);
    CHECK(std::abs(j.at("params").at("center_ps").get<double>() - 5000.0) < 3.0);
}

TEST_CASE("cli disambiguation and phase readout") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    const auto ok = run_cli("disambiguate --hist-with 5002 --hist-without 0 --fine-with 14.65 "
                            "--fine-without 0 --t-rep 50");
    REQUIRE(ok.code == 0);
    const auto j = nlohmann::json::parse(ok.out);
    CHECK(j.at("period_count") == 100);
    CHECK(std::abs(j.at("total_delay_ps").get<double>() - 5014.65) < 1e-9);

    CHECK(run_cli("disambiguate --hist-with 5013 --hist-without 0 --fine-with 14.65 "
                  "--fine-without 0 --t-rep 50").code == 5);

    const auto phase = run_cli("estimate-rf-phase --delay -8.854 --reference 0 --fsr 32");
    REQUIRE(phase.code == 0);
    const auto pj = nlohmann::json::parse(phase.out);
    CHECK(std::abs(pj.at("rf_phase_deg").get<double>() - 102.0) < 0.05);
}

TEST_CASE("cli spectral-integral check passes on a bundled configuration") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    const auto res = run_cli("oracle-check --preset fig3a --points 15 --grid 301 --threshold 0.025");
    REQUIRE(res.code == 0);
    const auto j = nlohmann::json::parse(res.out);
    CHECK(j.at("passed") == true);
    CHECK(j.at("max_deviation").get<double>() < 0.025);
}

TEST_CASE("cli depth optimisation emits the map") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    const auto dir = work_dir();
    const auto map_csv = (dir / "map.csv").string();
    const auto res = run_cli("optimize --preset fig3a --min 4.0 --max 4.2 --step 0.1 --samples 256 "
                             "--out \"" + map_csv + "\"");
    REQUIRE(res.code == 0);
    const auto j = nlohmann::json::parse(res.out);
    CHECK(j.contains("best_depth_signal_rad"));
    CHECK(j.at("grid_points") == 3);
    std::ifstream is(map_csv);
    std::string line;
    int rows = -1;  // discount the header
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 9);
}

TEST_CASE("cli maps missing files and bad flags to distinct exit codes") {
    if (!cli_path()) SKIP("BFC_CLI not set");
    CHECK(run_cli("fit --scan /nonexistent/scan.csv --meta /nonexistent/meta.json").code == 1);
    CHECK(run_cli("simulate --preset fig3a --bogus-flag").code == 2);
    CHECK(run_cli("").code == 2);

    // malformed CSV is a parse error
    const auto dir = work_dir();
    const auto bad = dir / "bad.csv";
    std::ofstream(bad) << "axis,expected,counts\n1,2,xyz\n";
    const auto meta = dir / "bad_meta.json";
    std::ofstream(meta) << config_to_json(preset("fig3a")).dump();
    CHECK(run_cli("fit --scan \"" + bad.string() + "\" --meta \"" + meta.string() + "\"").code == 3);
}
