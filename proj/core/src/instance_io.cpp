#include "dldn/instance_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dldn {

using nlohmann::json;

namespace {

json instance_json(const NetworkInstance& inst, const std::vector<FlowSpec>* flows);

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

json flow_json(const FlowSpec& f) {
    json j;
    j["id"] = f.id;
    j["src"] = f.src;
    j["dst"] = f.dst;
    j["rate_bps"] = f.rate_bps;
    j["burst_bytes"] = f.burst_bytes;
    j["throughput_bps"] = f.throughput_bps;
    j["deadline_us"] = ns_to_us(f.deadline_ns);
    if (f.packet_bytes != 1500) j["packet_bytes"] = f.packet_bytes;
    return j;
}

FlowSpec flow_from(const json& j) {
    FlowSpec f;
    f.id = j.at("id").get<std::string>();
    f.src = j.at("src").get<std::string>();
    f.dst = j.at("dst").get<std::string>();
    f.rate_bps = j.at("rate_bps").get<std::int64_t>();
    f.burst_bytes = j.at("burst_bytes").get<std::int64_t>();
    f.throughput_bps = j.at("throughput_bps").get<std::int64_t>();
    f.deadline_ns = us_to_ns(j.at("deadline_us").get<double>());
    if (j.contains("packet_bytes")) f.packet_bytes = j.at("packet_bytes").get<std::int64_t>();
    return f;
}

json instance_json(const NetworkInstance& inst, const std::vector<FlowSpec>* flows) {
    json j;
    j["format"] = kInstanceFormat;
    j["cycle"] = {{"T_us", ns_to_us(inst.cycle.cycle_ns)},
                  {"HC", inst.cycle.hypercycle},
                  {"N", inst.cycle.queues_per_port}};
    json nodes = json::array();
    for (const NodeSpec& n : inst.nodes) {
        nodes.push_back({{"id", n.id},
                         {"Q_us", ns_to_us(n.queuing_bound_ns)},
                         {"P_us", ns_to_us(n.processing_ns)},
                         {"buffer_bytes", n.buffer_bytes}});
    }
    j["nodes"] = std::move(nodes);
    json arcs = json::array();
    for (const ArcSpec& a : inst.arcs) {
        arcs.push_back({{"tail", a.tail},
                        {"head", a.head},
                        {"prop_us", ns_to_us(a.prop_ns)},
                        {"capacity_bytes_per_cycle", a.capacity_bytes_per_cycle}});
    }
    j["arcs"] = std::move(arcs);
    if (flows) {
        json fs = json::array();
        for (const FlowSpec& f : *flows) fs.push_back(flow_json(f));
        j["flows"] = std::move(fs);
    }
    return j;
}

} // namespace

std::string instance_to_json(const NetworkInstance& inst, const std::vector<FlowSpec>* flows) {
    return instance_json(inst, flows).dump(2) + "\n";
}

std::string flows_to_json(const std::vector<FlowSpec>& flows) {
    json j;
    j["format"] = kFlowsFormat;
    json fs = json::array();
    for (const FlowSpec& f : flows) fs.push_back(flow_json(f));
    j["flows"] = std::move(fs);
    return j.dump(2) + "\n";
}

InstanceFile instance_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != kInstanceFormat) {
        throw std::runtime_error("not a " + std::string(kInstanceFormat) + " document");
    }
    InstanceFile out;
    const json& c = j.at("cycle");
    out.instance.cycle.cycle_ns = us_to_ns(c.at("T_us").get<double>());
    out.instance.cycle.hypercycle = c.at("HC").get<int>();
    out.instance.cycle.queues_per_port = c.at("N").get<int>();
    for (const json& n : j.at("nodes")) {
        NodeSpec ns;
        ns.id = n.at("id").get<std::string>();
        ns.queuing_bound_ns = us_to_ns(n.at("Q_us").get<double>());
        ns.processing_ns = us_to_ns(n.at("P_us").get<double>());
        ns.buffer_bytes = n.at("buffer_bytes").get<std::int64_t>();
        out.instance.nodes.push_back(std::move(ns));
    }
    for (const json& a : j.at("arcs")) {
        ArcSpec as;
        as.tail = a.at("tail").get<std::string>();
        as.head = a.at("head").get<std::string>();
        as.prop_ns = us_to_ns(a.at("prop_us").get<double>());
        as.capacity_bytes_per_cycle = a.at("capacity_bytes_per_cycle").get<std::int64_t>();
        out.instance.arcs.push_back(std::move(as));
    }
    out.instance.rebuild_indices();
    if (j.contains("flows")) {
        for (const json& f : j.at("flows")) out.flows.push_back(flow_from(f));
    }
    return out;
}

std::vector<FlowSpec> flows_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != kFlowsFormat) {
        throw std::runtime_error("not a " + std::string(kFlowsFormat) + " document");
    }
    std::vector<FlowSpec> out;
    for (const json& f : j.at("flows")) out.push_back(flow_from(f));
    return out;
}

InstanceFile load_instance_file(const std::string& path) {
    return instance_from_json(read_file(path));
}

std::vector<FlowSpec> load_flows_file(const std::string& path) {
    return flows_from_json(read_file(path));
}

void save_instance_file(const std::string& path, const NetworkInstance& inst,
                        const std::vector<FlowSpec>* flows) {
    write_file(path, instance_to_json(inst, flows));
}

void save_flows_file(const std::string& path, const std::vector<FlowSpec>& flows) {
    write_file(path, flows_to_json(flows));
}

void attach_pattern_catalogs(const NetworkInstance& inst, std::vector<FlowSpec>& flows) {
    for (FlowSpec& f : flows) {
        auto path = min_delay_path(inst, f.src, f.dst);
        Nanoseconds min_delay = path ? path_delay(inst, *path) : -1;
        f.patterns = build_pattern_catalog(f, inst.cycle, min_delay);
    }
}

} // namespace dldn
