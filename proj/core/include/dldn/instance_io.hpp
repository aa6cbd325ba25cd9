#pragma once

#include <string>
#include <vector>

#include "dldn/model.hpp"

namespace dldn {

inline constexpr const char* kInstanceFormat = "dldn-instance/1";
inline constexpr const char* kFlowsFormat = "dldn-flows/1";

// The instance document may embed its flows; loaders accept both layouts.
struct InstanceFile {
    NetworkInstance instance;
    std::vector<FlowSpec> flows;  // empty when the file carries topology only
};

InstanceFile load_instance_file(const std::string& path);
std::vector<FlowSpec> load_flows_file(const std::string& path);

void save_instance_file(const std::string& path, const NetworkInstance& inst,
                        const std::vector<FlowSpec>* flows = nullptr);
void save_flows_file(const std::string& path, const std::vector<FlowSpec>& flows);

std::string instance_to_json(const NetworkInstance& inst, const std::vector<FlowSpec>* flows);
std::string flows_to_json(const std::vector<FlowSpec>& flows);
InstanceFile instance_from_json(const std::string& text);
std::vector<FlowSpec> flows_from_json(const std::string& text);

// Builds each flow's candidate pattern list from its least-delay path.
// Flows left with an empty list have no feasible shaping at all.
void attach_pattern_catalogs(const NetworkInstance& inst, std::vector<FlowSpec>& flows);

} // namespace dldn
