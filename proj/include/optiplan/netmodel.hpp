#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optiplan/errors.hpp"

namespace optiplan::net {

enum class ResourceState { Free, InUse };

struct OpticalNode {
    std::string id;
    std::optional<std::string> core_site;  // collocated core site, if any
};

struct FiberSpan {
    std::string id;
    std::string a;  // optical node
    std::string b;  // optical node
    double length_km = 0.0;
    std::string srlg;
};

/// Router port + transponder pair at one site; the unit an IP link endpoint
/// consumes.
struct Tail {
    std::string id;
    std::string site;
    int capacity_units = 1;  // multiples of 100 GE
    ResourceState state = ResourceState::Free;
    int router = 0;  // router index at the site
};

struct Regen {
    std::string id;
    std::string site;  // optical node id
    ResourceState state = ResourceState::Free;
};

struct IpLink {
    std::string id;
    std::string a;  // core site
    std::string b;  // core site
    int capacity = 1;  // x 100 GE
    std::vector<std::string> optical_path;  // ordered fiber span ids
    std::vector<std::string> tails;         // exactly two
    std::vector<std::string> regens;        // regens consumed along the path
};

struct CoreSite {
    std::string id;
    int routers = 2;
    int spare_ports = 0;         // router ports not yet paired into a tail
    int spare_transponders = 0;  // transponders not yet paired into a tail
};

struct TeTunnel {
    std::string id;
    std::string src;
    std::string dst;
    int qos_class = 0;
    double demand = 0.0;  // same units as IpLink::capacity
    double latency_bound_ms = 1e9;
    std::vector<std::string> path;  // ip link ids, empty when unrouted
};

/// Demand per (src, dst, class); exactly K*N*(N-1) entries.
struct TrafficMatrix {
    int n_endpoints = 0;
    int n_classes = 0;
    struct Entry {
        std::string src;
        std::string dst;
        int qos_class = 0;
        double demand = 0.0;
    };
    std::vector<Entry> entries;
};

struct Violation {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string code;
    std::string subject;
    std::string message;
};

struct MultiLayerNetwork {
    std::vector<OpticalNode> optical_nodes;
    std::vector<FiberSpan> fiber_spans;
    std::vector<CoreSite> sites;
    std::vector<Tail> tails;
    std::vector<Regen> regens;
    std::vector<IpLink> ip_links;
    double system_reach_km = 1500.0;
    double propagation_us_per_km = 5.0;

    const OpticalNode* find_optical_node(const std::string& id) const;
    const FiberSpan* find_span(const std::string& id) const;
    const CoreSite* find_site(const std::string& id) const;
    Tail* find_tail(const std::string& id);
    const Tail* find_tail(const std::string& id) const;
    Regen* find_regen(const std::string& id);
    const Regen* find_regen(const std::string& id) const;
    const IpLink* find_link(const std::string& id) const;

    /// Optical node collocated with a core site (empty if none).
    std::string optical_node_of_site(const std::string& site) const;

    /// Total km of a link's optical path.
    double link_km(const IpLink& link) const;

    /// One-way latency of a link in milliseconds.
    double link_latency_ms(const IpLink& link) const;
};

/// Structural validation; returns one entry per violated invariant. An empty
/// list means the network is well formed (warnings count as entries too).
std::vector<Violation> validate(const MultiLayerNetwork& net);

struct OpticalRoute {
    std::vector<std::string> spans;
    std::vector<std::string> regen_sites;  // optical nodes, in path order
    double total_km = 0.0;
};

/// Shortest optical path by km between two optical nodes, with regens placed
/// greedily: walk the path accumulating km and drop a regen at the last node
/// before the running segment would exceed the system reach.
/// `avoid_srlgs`, when given, excludes spans in those groups.
OpticalRoute optical_route(const MultiLayerNetwork& net, const std::string& src_node,
                           const std::string& dst_node,
                           const std::vector<std::string>& avoid_srlgs = {});

/// Sum of link latencies over a connected chain of IP links, in ms.
double path_latency(const MultiLayerNetwork& net, const std::vector<std::string>& ip_links);

/// JSON document I/O, schema "optiplan-net-1".
MultiLayerNetwork network_from_json(const std::string& text);
std::string network_to_json(const MultiLayerNetwork& net);
MultiLayerNetwork load_network(const std::string& path);
void save_network(const MultiLayerNetwork& net, const std::string& path);

}  // namespace optiplan::net
