#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dldn/lp.hpp"
#include "dldn/model.hpp"

namespace dldn {

// One variable of the path-based formulation: a feasible (flow, path, pattern)
// choice together with the loads it places on arc and node rows.
struct Column {
    int flow_index = 0;
    PathPattern path_pattern;
};

struct DualValues {
    std::vector<double> lambda;  // per flow, routing rows
    std::vector<double> mu;      // per arc, capacity rows
    std::vector<double> omega;   // per node, buffer rows
};

struct FlowDecision {
    std::string flow_id;
    bool accepted = false;
    std::vector<NodeId> path;        // node ids src..dst when accepted
    TransmissionPattern pattern{};   // valid when accepted
};

struct AdmissionSolution {
    std::string algorithm;  // "cgx" or "ospf"
    std::vector<FlowDecision> flows;
    BitsPerSecond accepted_throughput_bps = 0;
    double upper_bound_bps = 0.0;   // LP bound (cgx only; 0 when not computed)
    double gap_percent = 0.0;
};

struct CgIteration {
    int iter = 0;
    int columns_added = 0;
    double lp_objective = 0.0;
    std::int64_t wall_ms = 0;
};

struct CgReport {
    int iterations = 0;
    double upper_bound = 0.0;  // final restricted LP value
    double integer_objective = 0.0;
    double gap_percent = 0.0;
    std::int64_t wall_ms = 0;
    std::string termination;  // certified | time-limit | iteration-cap
    std::vector<CgIteration> log;
    long bb_nodes = 0;
};

// Restricted master over the given columns: |F| routing rows, |A| arc rows,
// |V| buffer rows. Duplicate (flow, path, pattern) columns are dropped.
LinearProgram build_master(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                           const std::vector<Column>& columns);

// Exact constrained shortest path: minimize per-arc cost subject to a total
// delay budget. Label-setting over Pareto (cost, delay) labels; ties broken
// by (cost, delay, node id) so runs are reproducible.
struct CspResult {
    std::vector<int> arcs;
    double cost = 0.0;
    Nanoseconds delay_ns = 0;
};
std::optional<CspResult> csp_shortest_path(const NetworkInstance& inst,
                                           const std::vector<double>& arc_cost,
                                           const std::vector<Nanoseconds>& arc_delay_ns,
                                           Nanoseconds budget_ns, const NodeId& src,
                                           const NodeId& dst);

// Pricing for one (flow, pattern): returns the column of the cost-minimal
// delay-feasible path when it violates dual feasibility by more than
// eps_price = 1e-6 * R_f.
std::optional<Column> pricing(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                              int flow_index, int pattern_index, const DualValues& duals);

struct CgOptions {
    double time_limit_s = 210.0;   // column-generation share of the budget
    int max_iterations = 1000;
};

struct CgState {
    double upper_bound = 0.0;
    std::vector<Column> pool;
    DualValues duals;
    std::vector<CgIteration> log;
    bool certified = false;  // pricing exhausted (LP value equals the full relaxation)
    int iterations = 0;
};

CgState run_cg(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
               const CgOptions& opts = {});

struct RoundOptions {
    double time_limit_s = 90.0;
    bool augment_ospf = true;  // add the baseline's columns and warm-start from them
};

// 0-1 solve over the generated pool. The LP over the final (possibly
// augmented) pool is re-solved so the reported bound stays valid.
std::pair<AdmissionSolution, CgReport> round_ilp(const NetworkInstance& inst,
                                                 const std::vector<FlowSpec>& flows,
                                                 const CgState& cg, const RoundOptions& opts = {});

// (UB - Z) / UB * 100, clamped at zero; 0 when UB is 0.
double optimality_gap(double upper_bound, double integer_objective);

// Exact integer feasibility of a decoded solution against the DF constraints.
ValidationReport check_admission(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                                 const AdmissionSolution& sol);

// dldn-solution/1 documents.
inline constexpr const char* kSolutionFormat = "dldn-solution/1";
std::string solution_to_json(const AdmissionSolution& sol);
AdmissionSolution solution_from_json(const std::string& text);
void save_solution_file(const std::string& path, const AdmissionSolution& sol);
AdmissionSolution load_solution_file(const std::string& path);

void save_report_csv(const std::string& path, const CgReport& report);

} // namespace dldn
