#include <array>
#include <sys/wait.h>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "approx_util.hpp"
#include "biphoton/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace biphoton;
using nlohmann::json;

namespace {

struct CliRun {
    int exit_code;
    std::string out;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(BIPHOTON_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    const int status = pclose(p);
    return {WEXITSTATUS(status), out};
}

}  // namespace

TEST_CASE("cli witness: spdc json output") {
    const CliRun r = run_cli("witness --c 35e-6");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["w"].get<double>() == approx_rel(0.4273, 1e-3));
    CHECK(std::abs(j["w"].get<double>() - 0.43) <= 0.01);
    CHECK(j["gaussian_bound_violated"].get<bool>());
    CHECK(j["p"].get<double>() == approx_rel(0.9112, 1e-4));
}

TEST_CASE("cli witness: gaussian product state") {
    const CliRun r = run_cli("witness --gaussian --p 1");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["w"].get<double>() == approx_rel(0.25, 1e-12));
    CHECK_FALSE(j["gaussian_bound_violated"].get<bool>());
}

TEST_CASE("cli: input validation exit code") {
    CHECK(run_cli("witness --c -1").exit_code == 2);
    CHECK(run_cli("witness --c 1e-4 --p 0.5").exit_code == 2);
    CHECK(run_cli("witness").exit_code == 2);
    CHECK(run_cli("witness --no-such-flag 1").exit_code == 2);
    CHECK(run_cli("nonsense-command").exit_code == 2);
}

TEST_CASE("cli: numerical failure exit code") {
    CHECK(run_cli("witness --c 35e-6 --max-subdiv 1 --rel-tol 1e-14 --abs-tol 1e-300")
              .exit_code == 3);
}

TEST_CASE("cli interval: json contract") {
    const CliRun r = run_cli("interval");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["status"] == "ok");
    CHECK(j["p_low"].get<double>() == approx_rel(0.556, 5e-3));
    CHECK(j["p_high"].get<double>() == approx_rel(2.620, 5e-3));

    const CliRun g = run_cli("interval --gaussian");
    CHECK(g.exit_code == 0);
    const json jg = json::parse(g.out);
    CHECK(jg["p_low"].is_null());
    CHECK(jg["p_high"].is_null());
    CHECK(jg["status"].get<std::string>().find("no violation") == 0);
}

TEST_CASE("cli sweep: header, row count, and the gaussian identity") {
    const CliRun r = run_cli("sweep --p-min 0.5 --p-max 2 --steps 3 --schmidt-n 256");
    CHECK(r.exit_code == 0);
    std::istringstream in(r.out);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "p,k_gaussian_1d,w_gaussian,k_spdc_1d,w_spdc");
    int rows = 0;
    double wg[3] = {0, 0, 0};
    while (std::getline(in, line)) {
        REQUIRE(rows < 3);
        double p, kg, w_g, ks, ws;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &p, &kg, &w_g, &ks, &ws) == 5);
        wg[rows] = w_g;
        CHECK(w_g == approx_rel(1.0 / (4.0 * kg * kg), 1e-11));  // csv carries 13 digits
        ++rows;
    }
    CHECK(rows == 3);
    CHECK(wg[0] == approx_rel(0.16, 1e-12));
    CHECK(wg[1] > 0.2);
    CHECK(wg[1] < 0.25);
    CHECK(wg[2] == approx_rel(0.16, 1e-12));
}

TEST_CASE("cli distribution: density integrates to one") {
    const CliRun r = run_cli("distribution --c 100e-6 --plane near --n 2048");
    CHECK(r.exit_code == 0);
    std::istringstream in(r.out);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "position_m,density_per_m");
    std::vector<double> xs, ds;
    while (std::getline(in, line)) {
        double x, d;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &x, &d) == 2);
        xs.push_back(x);
        ds.push_back(d);
    }
    REQUIRE(xs.size() == 2048);
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        integral += 0.5 * (ds[i] + ds[i + 1]) * (xs[i + 1] - xs[i]);
    CHECK(integral == approx_rel(1.0, 1e-6));
}

TEST_CASE("cli displace: z = 0 matches the near-field distribution") {
    const CliRun a = run_cli("displace --c 100e-6 --z 0 --n 512");
    CHECK(a.exit_code == 0);
    // grids differ between the two commands; compare peak density and width
    std::istringstream in(a.out);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "z_m,position_m,density_per_m");
    std::vector<double> xs, ds;
    while (std::getline(in, line)) {
        double z, x, d;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &z, &x, &d) == 3);
        CHECK(z == 0.0);
        xs.push_back(x);
        ds.push_back(d);
    }
    REQUIRE(xs.size() == 512);

    const SpdcBiphoton st = spdc_from_experiment(100e-6, 1.8e-2, 710e-9);
    const DensitySamples want =
        displaced_near_field(st, 0.0, 0.0, displaced_grid_halfwidth(st, 0.0), 512);
    for (std::size_t i = 0; i < xs.size(); i += 37) {
        CHECK(ds[i] == approx_rel(want.density[i], 1e-9));
    }
}

TEST_CASE("cli simulate + fit round trip") {
    const std::string scan_path = "/tmp/biphoton_test_scan.csv";
    const CliRun sim = run_cli("simulate --c 100e-6 --plane far --n-positions 61 "
                               "--peak-counts 2000 --seed 12 --output " + scan_path);
    CHECK(sim.exit_code == 0);

    const CliRun fit = run_cli("fit " + scan_path + " --c 100e-6");
    CHECK(fit.exit_code == 0);
    const json j = json::parse(fit.out);
    CHECK(j["converged"].get<bool>());
    CHECK(j["plane"] == "far");
    const double var = j["variance_m2"].get<double>();
    const double sig = j["variance_sigma_m2"].get<double>();
    // truth for this template state
    const SpdcBiphoton st = spdc_from_experiment(100e-6, 1.8e-2, 710e-9);
    const DetectionGeometry g(0.15, 50e-6, 4.7e-6);
    const double truth =
        aperture_convolve(far_field_coincidence(st, g, 0.0), g.slit_width).variance();
    CHECK(std::abs(var - truth) <= 4.0 * sig);
    CHECK(j.contains("variance_q_inv_m2"));
    std::remove(scan_path.c_str());
}

TEST_CASE("cli fit: missing scan file") {
    CHECK(run_cli("fit /tmp/definitely_missing_scan.csv --c 100e-6").exit_code == 2);
}

TEST_CASE("cli reproduce-table2: witness columns") {
    const CliRun r = run_cli("reproduce-table2");
    CHECK(r.exit_code == 0);
    std::istringstream in(r.out);
    std::string line;
    REQUIRE(std::getline(in, line));  // header
    const double expected_wt[6] = {0.033, 0.11, 0.19, 0.34, 0.38, 0.43};
    int i = 0;
    while (std::getline(in, line)) {
        int idx;
        double c, p, vx, vxs, vq, vqs, we, wes, wt;
        REQUIRE(std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &idx, &c,
                            &p, &vx, &vxs, &vq, &vqs, &we, &wes, &wt) == 10);
        CHECK(idx == i + 1);
        CHECK(std::abs(wt - expected_wt[i]) <= 0.015);
        CHECK(we == approx_rel(vx * vq, 1e-9));
        ++i;
    }
    CHECK(i == 6);
}

TEST_CASE("cli: byte-identical output across reruns") {
    for (const char* cmd :
         {"witness --c 45e-6", "sweep --p-min 0.5 --p-max 2 --steps 3 --schmidt-n 256",
          "interval --gaussian", "distribution --c 100e-6 --plane far --n 512",
          "simulate --c 70e-6 --plane near --n-positions 41 --peak-counts 300 --seed 5",
          "reproduce-table2"}) {
        const CliRun a = run_cli(cmd);
        const CliRun b = run_cli(cmd);
        CHECK(a.exit_code == 0);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("cli: config file mirrors flags, flags win") {
    const std::string cfg_path = "/tmp/biphoton_test_cfg.ini";
    {
        std::ofstream cfg(cfg_path);
        cfg << "c = 35e-6\nL = 1.8e-2\nlambda = 710e-9\n";
    }
    const CliRun from_cfg = run_cli("witness --config " + cfg_path);
    const CliRun from_flags = run_cli("witness --c 35e-6");
    CHECK(from_cfg.exit_code == 0);
    CHECK(from_cfg.out == from_flags.out);

    // the command line overrides the file
    const CliRun overridden = run_cli("witness --config " + cfg_path + " --c 45e-6");
    const CliRun direct = run_cli("witness --c 45e-6");
    CHECK(overridden.exit_code == 0);
    CHECK(overridden.out == direct.out);
    std::remove(cfg_path.c_str());
}

TEST_CASE("cmd bodies: in-process output matches the binary") {
    RunConfig config;
    config.pump_waist_c = 45e-6;
    std::ostringstream out;
    cmd_witness(config, out);
    const CliRun r = run_cli("witness --c 45e-6");
    CHECK(out.str() == r.out);
}
