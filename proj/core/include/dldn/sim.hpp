#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dldn/cgx.hpp"
#include "dldn/model.hpp"

namespace dldn {

// Per-node oscillator: cycle boundaries sit at offset + n*T*(1 + drift) in
// global time. Offsets are drawn per seed; drift defaults to ideal.
struct NodeClock {
    Nanoseconds offset_ns = 0;
    std::int32_t drift_ppm = 0;
};

Nanoseconds clock_opening(const NodeClock& clock, Nanoseconds cycle_ns, std::int64_t n);
std::int64_t clock_cycle_floor(const NodeClock& clock, Nanoseconds cycle_ns, Nanoseconds t);

// Damper state carried hop to hop: the parent's measured queuing delay and
// its bound.
struct DamperHeader {
    Nanoseconds q_prev_ns = 0;
    Nanoseconds q_bound_prev_ns = 0;
};

// E = t_in + P + (Q_prev - q_prev). Throws SimAbort when the header carries
// q > Q.
Nanoseconds compute_eligibility(Nanoseconds t_in_ns, Nanoseconds processing_ns,
                                const DamperHeader& header);

DamperHeader record_departure(Nanoseconds eligibility_ns, Nanoseconds t_out_ns,
                              Nanoseconds queuing_bound_ns);

struct SimAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceRow {
    int flow = -1;   // index into the flow list
    std::int64_t seq = 0;
    int hop = 0;
    int node = -1;   // index into instance nodes
    Nanoseconds t_in_ns = 0;
    Nanoseconds eligibility_ns = 0;
    Nanoseconds t_out_ns = 0;
    Nanoseconds q_ns = 0;  // t_out - E
    Nanoseconds d_ns = 0;  // damper hold (shaper wait at the ingress hop)
};

struct FlowStats {
    std::string flow_id;
    std::int64_t packets = 0;
    Nanoseconds min_e2e_ns = 0;
    Nanoseconds max_e2e_ns = 0;
    double mean_e2e_ns = 0.0;
    Nanoseconds jitter_ns = 0;      // max - min
    Nanoseconds bound_ns = 0;       // queuing bound of the egress node
    bool bound_ok = false;          // jitter <= bound
    bool pair_delay_constant = false;  // q + p + d == Q + P at every complete pair
};

struct SimFault {
    Nanoseconds time_ns = 0;
    std::string kind;   // cycle-overrun | buffer-overflow | reservation-overflow
    std::string detail;
};

struct BeFlow {
    NodeId src;
    NodeId dst;
    BitsPerSecond rate_bps = 0;
    Bytes packet_bytes = 1500;
};

struct SimConfig {
    Nanoseconds horizon_ns = 10'000'000;
    std::uint64_t seed = 1;
    std::int32_t max_drift_ppm = 0;  // per-node drift drawn in [-max, max]
    Bytes be_queue_bytes = 2'000'000;
};

struct SimResult {
    std::vector<TraceRow> trace;
    std::vector<FlowStats> stats;
    std::vector<SimFault> faults;
    std::vector<NodeClock> clocks;  // per node, for trace post-processing
    std::int64_t hp_delivered = 0;
    std::int64_t hp_inflight = 0;
    std::int64_t hp_dropped = 0;
    std::int64_t be_delivered = 0;
    std::int64_t be_dropped = 0;
    std::vector<std::string> warnings;
};

// Structural checks a solution must pass before it can be simulated, plus the
// per-cycle serialization fit: on every arc the admitted chunks of one cycle
// must drain within T.
ValidationReport validate_simulation(const NetworkInstance& inst,
                                     const std::vector<FlowSpec>& flows,
                                     const AdmissionSolution& sol);

// Deterministic event-driven run of the shaped/damped data plane. Sources are
// greedy leaky buckets (bursts of b at rate r); best-effort traffic fills gate
// gaps without ever delaying reserved packets.
SimResult run_simulation(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                         const AdmissionSolution& sol, const std::vector<BeFlow>& be_flows,
                         const SimConfig& config);

struct InvariantReport {
    std::vector<std::string> violations;
    std::int64_t packets_checked = 0;
    std::int64_t pairs_checked = 0;        // complete damper pairs (constant-delay law)
    std::int64_t same_cycle_pairs = 0;     // eligibility-gap pairs
    std::int64_t max_hops_seen = 0;
    bool ok() const { return violations.empty(); }
};

// Re-derives the data-plane laws from the raw trace: constant pair delay,
// eligibility-gap preservation (gap <= T), and the 2T queuing bound.
InvariantReport check_invariants(const SimResult& result, const NetworkInstance& inst,
                                 const std::vector<FlowSpec>& flows);

inline constexpr const char* kTrafficFormat = "dldn-traffic/1";
std::vector<BeFlow> load_traffic_file(const std::string& path);
void save_traffic_file(const std::string& path, const std::vector<BeFlow>& flows);
std::vector<BeFlow> traffic_from_json(const std::string& text);
std::string traffic_to_json(const std::vector<BeFlow>& flows);

void save_trace_csv(const std::string& path, const SimResult& result,
                    const NetworkInstance& inst, const std::vector<FlowSpec>& flows);
void save_stats_csv(const std::string& path, const SimResult& result);

} // namespace dldn
