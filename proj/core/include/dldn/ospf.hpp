#pragma once

#include <optional>
#include <vector>

#include "dldn/cgx.hpp"
#include "dldn/model.hpp"

namespace dldn {

struct OspfConfig {
    double weight_constant = 1e8;  // w_a = constant / (8 * c_a)
};

// Inverse-capacity link weights.
std::vector<double> ospf_weights(const NetworkInstance& inst, const OspfConfig& cfg = {});

// Greedy sequential admission: flows in input order, each on its weight-
// shortest path (Dijkstra, ties by node id) with the smallest-reservation
// pattern that still meets the deadline; accepted only when residual arc and
// buffer capacities allow.
AdmissionSolution ospf_admit(const NetworkInstance& inst, const std::vector<FlowSpec>& flows,
                             const OspfConfig& cfg = {});

// The baseline's (path, pattern) candidate for one flow, ignoring capacity.
// Used to seed the rounding pool.
std::optional<Column> ospf_candidate_column(const NetworkInstance& inst,
                                            const std::vector<FlowSpec>& flows, int flow_index,
                                            const OspfConfig& cfg = {});

// Th(CGX) / Th(OSPF) * 100; empty when the baseline accepted nothing.
std::optional<double> throughput_gap(const AdmissionSolution& cgx, const AdmissionSolution& ospf);

} // namespace dldn
