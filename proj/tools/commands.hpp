#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dldn/gen.hpp"
#include "dldn/model.hpp"
#include "dldn/sim.hpp"

namespace dldn::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoIncumbent = 3;
inline constexpr int kExitBoundViolated = 4;

struct GenerateArgs {
    GenSpec spec;
    std::string out_instance = "instance.json";
    std::string out_flows = "flows.json";
};
int cmd_generate(const GenerateArgs& args);

struct AdmitArgs {
    std::string instance_path;
    std::string flows_path;  // optional; instance may embed flows
    std::string algorithm = "cgx";
    double time_limit_s = 300.0;
    double cg_share = 0.7;  // fraction of the budget spent on column generation
    std::string out_solution = "solution.json";
    std::string out_report = "report.csv";
    std::string dump_mps;  // debug: write the final master in MPS format
};
int cmd_admit(const AdmitArgs& args);

struct SimulateArgs {
    std::string instance_path;
    std::string flows_path;
    std::string solution_path;
    std::string traffic_path;  // optional
    double horizon_us = 40'000.0;
    std::uint64_t seed = 1;
    std::string bundle;  // "sec5a" writes and runs the canned scenario
    std::string out_dir = ".";
    std::string out_trace = "trace.csv";
    std::string out_stats = "stats.csv";
};
int cmd_simulate(const SimulateArgs& args);

struct CompareArgs {
    std::string manifest_path;
};
int cmd_compare(const CompareArgs& args);

// Canned proof-of-concept scenario: five shaped flows over a short chain with
// best-effort background, per-hop queuing bound 5 us. Files are written under
// dir with the given prefix.
struct BundleFiles {
    std::string instance;
    std::string flows;
    std::string solution;
    std::string traffic;
};
BundleFiles write_sec5a_bundle(const std::string& dir);

// Manifest-driven sweep; exposed for tests.
inline constexpr const char* kManifestFormat = "dldn-manifest/1";
struct SweepRow {
    std::string family;  // "level" or "deadline"
    int level = 0;
    double deadline_us = 0.0;
    int flow_count = 0;
    std::int64_t th_cgx_bps = 0;
    std::int64_t th_ospf_bps = 0;
    bool gap_defined = false;
    double throughput_gap_percent = 0.0;
    double opt_gap_percent = 0.0;
    std::int64_t wall_ms = 0;
    bool failed = false;
};
struct SweepResult {
    std::vector<SweepRow> rows;
    int failures = 0;
};
SweepResult run_sweep_manifest(const std::string& manifest_path);

} // namespace dldn::cli
