#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"

#include "commands.hpp"
#include "dldn/cgx.hpp"
#include "dldn/instance_io.hpp"
#include "dldn/sim.hpp"

using namespace dldn;
using namespace dldn::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("dldn_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(DLDN_CLI_BIN) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cli exit codes: usage errors return 2") {
    CHECK(run_cli("generate --nodes 10") == 2);       // missing required flags
    CHECK(run_cli("nonsense") == 2);                  // unknown subcommand
    CHECK(run_cli("admit --instance /nonexistent.json") == 2);
    CHECK(run_cli("simulate") == 2);                  // neither files nor bundle
}

TEST_CASE("cli generate/admit/simulate round trip") {
    fs::path dir = fresh_dir("roundtrip");
    std::string inst = (dir / "i.json").string();
    std::string flows = (dir / "f.json").string();
    CHECK(run_cli("generate --nodes 12 --links 20 --level 10 --flows 6 --deadline-us 1000 "
                  "--seed 5 --out-instance " + inst + " --out-flows " + flows) == 0);
    CHECK(fs::exists(inst));
    CHECK(fs::exists(flows));

    std::string sol = (dir / "s.json").string();
    std::string rep = (dir / "r.csv").string();
    CHECK(run_cli("admit --instance " + inst + " --flows " + flows +
                  " --algorithm cgx --time-limit-s 20 --out-solution " + sol +
                  " --out-report " + rep) == 0);
    CHECK(fs::exists(sol));
    std::string report = slurp(rep);
    CHECK(report.rfind("iter,columns_added,lp_obj,wall_ms", 0) == 0);

    std::string osol = (dir / "o.json").string();
    CHECK(run_cli("admit --instance " + inst + " --flows " + flows +
                  " --algorithm ospf --out-solution " + osol + " --out-report " +
                  (dir / "or.csv").string()) == 0);
    AdmissionSolution cgx = load_solution_file(sol);
    AdmissionSolution ospf = load_solution_file(osol);
    CHECK(ospf.accepted_throughput_bps <= cgx.accepted_throughput_bps);

    // generated solutions simulate cleanly
    CHECK(run_cli("simulate --instance " + inst + " --flows " + flows + " --solution " + sol +
                  " --horizon-us 2000 --seed 4 --out-dir " + (dir / "sim").string()) == 0);
    CHECK(fs::exists(dir / "sim" / "trace.csv"));
    CHECK(fs::exists(dir / "sim" / "stats.csv"));
}

TEST_CASE("cli generate accepts zero flows") {
    fs::path dir = fresh_dir("zeroflows");
    std::string inst = (dir / "i.json").string();
    std::string flows = (dir / "f.json").string();
    CHECK(run_cli("generate --nodes 6 --links 8 --level 3 --flows 0 --deadline-us 500 "
                  "--out-instance " + inst + " --out-flows " + flows) == 0);
    CHECK(load_flows_file(flows).empty());
}

TEST_CASE("cli simulate rejects a corrupted solution with exit 2") {
    fs::path dir = fresh_dir("corrupt");
    BundleFiles files = write_sec5a_bundle(dir.string());
    AdmissionSolution sol = load_solution_file(files.solution);
    sol.flows[0].path = {"s1", "c3", "d1"};  // no such arcs
    save_solution_file(files.solution, sol);
    CHECK(run_cli("simulate --instance " + files.instance + " --flows " + files.flows +
                  " --solution " + files.solution + " --horizon-us 500") == 2);
}

TEST_CASE("cli simulate exits 4 when a queuing bound cannot hold") {
    fs::path dir = fresh_dir("bound4");
    BundleFiles files = write_sec5a_bundle(dir.string());
    InstanceFile fi = load_instance_file(files.instance);
    for (NodeSpec& n : fi.instance.nodes) {
        if (n.id == "c2") n.queuing_bound_ns = 1000;  // far below the 2T the gates need
    }
    std::vector<FlowSpec> flows = load_flows_file(files.flows);
    save_instance_file(files.instance, fi.instance);
    CHECK(run_cli("simulate --instance " + files.instance + " --flows " + files.flows +
                  " --solution " + files.solution + " --traffic " + files.traffic +
                  " --horizon-us 1000 --seed 42") == 4);
}

TEST_CASE("sec5a bundle files are valid and reproducible") {
    fs::path d1 = fresh_dir("bundle1");
    fs::path d2 = fresh_dir("bundle2");
    BundleFiles f1 = write_sec5a_bundle(d1.string());
    BundleFiles f2 = write_sec5a_bundle(d2.string());
    CHECK(slurp(f1.instance) == slurp(f2.instance));
    CHECK(slurp(f1.solution) == slurp(f2.solution));
    CHECK(slurp(f1.traffic) == slurp(f2.traffic));

    InstanceFile inst = load_instance_file(f1.instance);
    CHECK(validate_instance(inst.instance).ok());
    auto flows = load_flows_file(f1.flows);
    CHECK(flows.size() == 5);
    CHECK(validate_flows(inst.instance, flows).ok());
    auto sol = load_solution_file(f1.solution);
    CHECK(validate_simulation(inst.instance, flows, sol).ok());
}

TEST_CASE("compare sweep writes one row per axis point") {
    fs::path dir = fresh_dir("sweep");
    std::string manifest = (dir / "m.json").string();
    std::string out = (dir / "results.csv").string();
    {
        std::ofstream m(manifest);
        m << "{\"format\":\"dldn-manifest/1\","
          << "\"topology\":{\"nodes\":12,\"links\":20,\"level\":10,\"seed\":5},"
          << "\"flow_counts\":[3,6,9],"
          << "\"deadlines_us\":[400,700,1000],"
          << "\"flows_seed\":11,"
          << "\"time_limit_s\":10,"
          << "\"out_csv\":\"" << out << "\"}";
    }
    SweepResult res = run_sweep_manifest(manifest);
    CHECK(res.rows.size() == 9);
    CHECK(res.failures == 0);
    for (const SweepRow& r : res.rows) {
        CHECK(r.opt_gap_percent >= 0.0);
        if (r.gap_defined) CHECK(r.throughput_gap_percent >= 100.0 - 1e-9);
    }
    std::string csv = slurp(out);
    CHECK(csv.rfind("family,level,deadline_us,flows,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);  // header + 9 rows
}

TEST_CASE("DLDN_SEED environment variable sets the default seed") {
    fs::path dir = fresh_dir("envseed");
    std::string i1 = (dir / "a.json").string();
    std::string i2 = (dir / "b.json").string();
    std::string i3 = (dir / "c.json").string();
    std::string base = "generate --nodes 8 --links 12 --level 5 --flows 2 --deadline-us 800 ";
    int rc1 = std::system(("DLDN_SEED=77 " + std::string(DLDN_CLI_BIN) + " " + base +
                           "--out-instance " + i1 + " --out-flows " + (dir / "af.json").string() +
                           " >/dev/null 2>&1")
                              .c_str());
    int rc2 = std::system(("DLDN_SEED=77 " + std::string(DLDN_CLI_BIN) + " " + base +
                           "--out-instance " + i2 + " --out-flows " + (dir / "bf.json").string() +
                           " >/dev/null 2>&1")
                              .c_str());
    int rc3 = std::system((std::string(DLDN_CLI_BIN) + " " + base + "--seed 78 --out-instance " +
                           i3 + " --out-flows " + (dir / "cf.json").string() + " >/dev/null 2>&1")
                              .c_str());
    CHECK(WEXITSTATUS(rc1) == 0);
    CHECK(WEXITSTATUS(rc2) == 0);
    CHECK(WEXITSTATUS(rc3) == 0);
    CHECK(slurp(i1) == slurp(i2));
    CHECK(slurp(i1) != slurp(i3));
}
