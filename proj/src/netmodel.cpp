#include "optiplan/netmodel.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace optiplan::net {

namespace {

template <typename T>
const T* find_by_id(const std::vector<T>& items, const std::string& id) {
    for (const auto& it : items) {
        if (it.id == id) return &it;
    }
    return nullptr;
}

template <typename T>
T* find_by_id(std::vector<T>& items, const std::string& id) {
    for (auto& it : items) {
        if (it.id == id) return &it;
    }
    return nullptr;
}

}  // namespace

const OpticalNode* MultiLayerNetwork::find_optical_node(const std::string& id) const {
    return find_by_id(optical_nodes, id);
}
const FiberSpan* MultiLayerNetwork::find_span(const std::string& id) const {
    return find_by_id(fiber_spans, id);
}
const CoreSite* MultiLayerNetwork::find_site(const std::string& id) const {
    return find_by_id(sites, id);
}
Tail* MultiLayerNetwork::find_tail(const std::string& id) { return find_by_id(tails, id); }
const Tail* MultiLayerNetwork::find_tail(const std::string& id) const {
    return find_by_id(tails, id);
}
Regen* MultiLayerNetwork::find_regen(const std::string& id) { return find_by_id(regens, id); }
const Regen* MultiLayerNetwork::find_regen(const std::string& id) const {
    return find_by_id(regens, id);
}
const IpLink* MultiLayerNetwork::find_link(const std::string& id) const {
    return find_by_id(ip_links, id);
}

std::string MultiLayerNetwork::optical_node_of_site(const std::string& site) const {
    for (const auto& node : optical_nodes) {
        if (node.core_site && *node.core_site == site) return node.id;
    }
    return {};
}

double MultiLayerNetwork::link_km(const IpLink& link) const {
    double km = 0.0;
    for (const auto& sid : link.optical_path) {
        const FiberSpan* s = find_span(sid);
        if (s) km += s->length_km;
    }
    return km;
}

double MultiLayerNetwork::link_latency_ms(const IpLink& link) const {
    return link_km(link) * propagation_us_per_km / 1000.0;
}

// ---------------------------------------------------------------------------
// validate

namespace {

void check_unique_ids(std::vector<Violation>& out, const std::vector<std::string>& ids,
                      const std::string& kind) {
    std::set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            out.push_back({Violation::Severity::Error, "duplicate-id", id,
                           kind + " id '" + id + "' is not unique"});
        }
    }
}

}  // namespace

std::vector<Violation> validate(const MultiLayerNetwork& net) {
    std::vector<Violation> out;

    std::vector<std::string> all_ids;
    for (const auto& n : net.optical_nodes) all_ids.push_back(n.id);
    check_unique_ids(out, all_ids, "optical node");
    all_ids.clear();
    for (const auto& s : net.fiber_spans) all_ids.push_back(s.id);
    check_unique_ids(out, all_ids, "fiber span");
    all_ids.clear();
    for (const auto& s : net.sites) all_ids.push_back(s.id);
    check_unique_ids(out, all_ids, "site");
    all_ids.clear();
    for (const auto& t : net.tails) all_ids.push_back(t.id);
    check_unique_ids(out, all_ids, "tail");
    all_ids.clear();
    for (const auto& r : net.regens) all_ids.push_back(r.id);
    check_unique_ids(out, all_ids, "regen");
    all_ids.clear();
    for (const auto& l : net.ip_links) all_ids.push_back(l.id);
    check_unique_ids(out, all_ids, "ip link");

    for (const auto& node : net.optical_nodes) {
        if (node.core_site && !net.find_site(*node.core_site)) {
            out.push_back({Violation::Severity::Error, "unknown-site", node.id,
                           "optical node '" + node.id + "' references unknown site '" +
                               *node.core_site + "'"});
        }
    }

    for (const auto& span : net.fiber_spans) {
        if (span.length_km <= 0.0) {
            out.push_back({Violation::Severity::Error, "bad-span-length", span.id,
                           "fiber span '" + span.id + "' has non-positive length"});
        }
        if (span.a == span.b) {
            out.push_back({Violation::Severity::Error, "span-loop", span.id,
                           "fiber span '" + span.id + "' has identical endpoints"});
        }
        for (const auto& end : {span.a, span.b}) {
            if (!net.find_optical_node(end)) {
                out.push_back({Violation::Severity::Error, "unknown-node", span.id,
                               "fiber span '" + span.id + "' references unknown node '" + end +
                                   "'"});
            }
        }
    }

    for (const auto& site : net.sites) {
        if (site.routers < 2) {
            out.push_back({Violation::Severity::Warning, "few-routers", site.id,
                           "site '" + site.id + "' has fewer than two core routers"});
        }
    }

    for (const auto& tail : net.tails) {
        if (!net.find_site(tail.site)) {
            out.push_back({Violation::Severity::Error, "unknown-site", tail.id,
                           "tail '" + tail.id + "' references unknown site '" + tail.site + "'"});
        }
        if (tail.capacity_units <= 0) {
            out.push_back({Violation::Severity::Error, "bad-capacity", tail.id,
                           "tail '" + tail.id + "' has non-positive capacity"});
        }
    }
    for (const auto& regen : net.regens) {
        if (!net.find_optical_node(regen.site)) {
            out.push_back({Violation::Severity::Error, "unknown-node", regen.id,
                           "regen '" + regen.id + "' must sit at an optical node"});
        }
    }

    // Reference counts for tails and regens.
    std::map<std::string, int> tail_refs;
    std::map<std::string, int> regen_refs;

    for (const auto& link : net.ip_links) {
        for (const auto& end : {link.a, link.b}) {
            if (!net.find_site(end)) {
                out.push_back({Violation::Severity::Error, "unknown-site", link.id,
                               "ip link '" + link.id + "' endpoint '" + end + "' unknown"});
            }
        }
        if (link.capacity <= 0) {
            out.push_back({Violation::Severity::Error, "bad-capacity", link.id,
                           "ip link '" + link.id + "' has non-positive capacity"});
        }
        if (link.tails.size() != 2) {
            out.push_back({Violation::Severity::Error, "tail-count", link.id,
                           "ip link '" + link.id + "' must use exactly two tails"});
        }
        for (const auto& tid : link.tails) {
            tail_refs[tid]++;
            if (!net.find_tail(tid)) {
                out.push_back({Violation::Severity::Error, "unknown-tail", link.id,
                               "ip link '" + link.id + "' references unknown tail '" + tid +
                                   "'"});
            }
        }
        for (const auto& rid : link.regens) {
            regen_refs[rid]++;
            if (!net.find_regen(rid)) {
                out.push_back({Violation::Severity::Error, "unknown-regen", link.id,
                               "ip link '" + link.id + "' references unknown regen '" + rid +
                                   "'"});
            }
        }

        // The optical path must chain the collocated optical nodes of the two
        // endpoint sites.
        const std::string start = net.optical_node_of_site(link.a);
        const std::string goal = net.optical_node_of_site(link.b);
        if (start.empty() || goal.empty()) {
            out.push_back({Violation::Severity::Error, "no-collocated-node", link.id,
                           "ip link '" + link.id + "' endpoint site lacks an optical node"});
            continue;
        }
        std::string at = start;
        bool chain_ok = !link.optical_path.empty();
        double segment_km = 0.0;
        double max_segment_km = 0.0;
        std::set<std::string> regen_sites;
        for (const auto& rid : link.regens) {
            const Regen* r = net.find_regen(rid);
            if (r) regen_sites.insert(r->site);
        }
        for (const auto& sid : link.optical_path) {
            const FiberSpan* span = net.find_span(sid);
            if (!span) {
                out.push_back({Violation::Severity::Error, "unknown-span", link.id,
                               "ip link '" + link.id + "' references unknown span '" + sid +
                                   "'"});
                chain_ok = false;
                break;
            }
            std::string next;
            if (span->a == at) {
                next = span->b;
            } else if (span->b == at) {
                next = span->a;
            } else {
                chain_ok = false;
                break;
            }
            segment_km += span->length_km;
            at = next;
            if (regen_sites.count(at)) {
                max_segment_km = std::max(max_segment_km, segment_km);
                segment_km = 0.0;
            }
        }
        max_segment_km = std::max(max_segment_km, segment_km);
        if (!chain_ok || at != goal) {
            out.push_back({Violation::Severity::Error, "broken-optical-path", link.id,
                           "ip link '" + link.id +
                               "' optical path does not connect its endpoints"});
        } else if (max_segment_km > net.system_reach_km) {
            std::ostringstream msg;
            msg << "ip link '" << link.id << "' has a " << max_segment_km
                << " km segment beyond the system reach of " << net.system_reach_km << " km";
            out.push_back(
                {Violation::Severity::Error, "segment-beyond-reach", link.id, msg.str()});
        }
    }

    for (const auto& [tid, count] : tail_refs) {
        if (count > 1) {
            out.push_back({Violation::Severity::Error, "tail-shared", tid,
                           "tail '" + tid + "' is used by more than one ip link"});
        }
    }
    for (const auto& tail : net.tails) {
        const int refs = tail_refs.count(tail.id) ? tail_refs.at(tail.id) : 0;
        if (tail.state == ResourceState::InUse && refs == 0) {
            out.push_back({Violation::Severity::Error, "tail-state", tail.id,
                           "tail '" + tail.id + "' is marked in-use but no link uses it"});
        }
        if (tail.state == ResourceState::Free && refs > 0) {
            out.push_back({Violation::Severity::Error, "tail-state", tail.id,
                           "tail '" + tail.id + "' is marked free but a link uses it"});
        }
        if (tail.router < 0 ||
            (net.find_site(tail.site) && tail.router >= net.find_site(tail.site)->routers)) {
            out.push_back({Violation::Severity::Error, "bad-router-index", tail.id,
                           "tail '" + tail.id + "' references a router index out of range"});
        }
    }
    for (const auto& regen : net.regens) {
        const int refs = regen_refs.count(regen.id) ? regen_refs.at(regen.id) : 0;
        if (regen.state == ResourceState::InUse && refs != 1) {
            out.push_back({Violation::Severity::Error, "regen-state", regen.id,
                           "in-use regen '" + regen.id + "' must be referenced by exactly one "
                           "link"});
        }
        if (regen.state == ResourceState::Free && refs > 0) {
            out.push_back({Violation::Severity::Error, "regen-state", regen.id,
                           "regen '" + regen.id + "' is marked free but a link uses it"});
        }
    }

    return out;
}

// ---------------------------------------------------------------------------
// optical_route

OpticalRoute optical_route(const MultiLayerNetwork& net, const std::string& src_node,
                           const std::string& dst_node,
                           const std::vector<std::string>& avoid_srlgs) {
    if (!net.find_optical_node(src_node) || !net.find_optical_node(dst_node)) {
        throw NoPath("unknown optical node");
    }
    if (src_node == dst_node) return {};

    const std::set<std::string> avoid(avoid_srlgs.begin(), avoid_srlgs.end());

    // Dijkstra by km over the span multigraph; deterministic tie-break on
    // (distance, node id).
    std::map<std::string, std::vector<const FiberSpan*>> adjacency;
    for (const auto& span : net.fiber_spans) {
        if (avoid.count(span.srlg)) continue;
        adjacency[span.a].push_back(&span);
        adjacency[span.b].push_back(&span);
    }

    std::map<std::string, double> dist;
    std::map<std::string, const FiberSpan*> via;
    using Item = std::pair<double, std::string>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
    dist[src_node] = 0.0;
    frontier.push({0.0, src_node});
    while (!frontier.empty()) {
        auto [d, node] = frontier.top();
        frontier.pop();
        if (d > dist[node] + 1e-12) continue;
        if (node == dst_node) break;
        for (const FiberSpan* span : adjacency[node]) {
            const std::string& next = (span->a == node) ? span->b : span->a;
            const double nd = d + span->length_km;
            auto it = dist.find(next);
            if (it == dist.end() || nd < it->second - 1e-12 ||
                (nd < it->second + 1e-12 && via[next] && span->id < via[next]->id)) {
                dist[next] = nd;
                via[next] = span;
                frontier.push({nd, next});
            }
        }
    }
    if (!dist.count(dst_node)) throw NoPath("no optical path from " + src_node + " to " + dst_node);

    std::vector<const FiberSpan*> spans;
    std::string at = dst_node;
    while (at != src_node) {
        const FiberSpan* span = via.at(at);
        spans.push_back(span);
        at = (span->a == at) ? span->b : span->a;
    }
    std::reverse(spans.begin(), spans.end());

    OpticalRoute route;
    double segment_km = 0.0;
    std::string node = src_node;
    for (const FiberSpan* span : spans) {
        if (span->length_km > net.system_reach_km) {
            throw UnreachableSegment("span '" + span->id + "' exceeds the system reach");
        }
        if (segment_km + span->length_km > net.system_reach_km) {
            route.regen_sites.push_back(node);
            segment_km = 0.0;
        }
        segment_km += span->length_km;
        route.total_km += span->length_km;
        route.spans.push_back(span->id);
        node = (span->a == node) ? span->b : span->a;
    }
    return route;
}

double path_latency(const MultiLayerNetwork& net, const std::vector<std::string>& ip_links) {
    if (ip_links.empty()) return 0.0;
    double ms = 0.0;
    std::string at;
    for (std::size_t i = 0; i < ip_links.size(); ++i) {
        const IpLink* link = net.find_link(ip_links[i]);
        if (!link) throw BrokenChain("unknown ip link '" + ip_links[i] + "'");
        if (i == 0) {
            at = link->b;
            if (ip_links.size() > 1) {
                const IpLink* next = net.find_link(ip_links[1]);
                if (next && (link->a == next->a || link->a == next->b)) at = link->a;
            }
        } else if (link->a == at) {
            at = link->b;
        } else if (link->b == at) {
            at = link->a;
        } else {
            throw BrokenChain("ip links do not form a connected chain");
        }
        ms += net.link_latency_ms(*link);
    }
    return ms;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ResourceState state_from_string(const std::string& s) {
    if (s == "free") return ResourceState::Free;
    if (s == "in-use") return ResourceState::InUse;
    throw ParseError("unknown resource state '" + s + "'");
}

std::string state_to_string(ResourceState s) {
    return s == ResourceState::Free ? "free" : "in-use";
}

}  // namespace

MultiLayerNetwork network_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid network JSON: ") + e.what());
    }
    try {
        if (doc.value("schema", "") != "optiplan-net-1") {
            throw ParseError("expected schema 'optiplan-net-1'");
        }
        MultiLayerNetwork net;
        net.system_reach_km = doc.at("system_reach_km").get<double>();
        net.propagation_us_per_km = doc.value("propagation_us_per_km", 5.0);
        for (const auto& j : doc.value("optical_nodes", json::array())) {
            OpticalNode node;
            node.id = j.at("id").get<std::string>();
            if (j.contains("core_site")) node.core_site = j.at("core_site").get<std::string>();
            net.optical_nodes.push_back(std::move(node));
        }
        for (const auto& j : doc.value("fiber_spans", json::array())) {
            net.fiber_spans.push_back({j.at("id").get<std::string>(),
                                       j.at("a").get<std::string>(),
                                       j.at("b").get<std::string>(),
                                       j.at("length_km").get<double>(),
                                       j.value("srlg", j.at("id").get<std::string>())});
        }
        for (const auto& j : doc.value("sites", json::array())) {
            net.sites.push_back({j.at("id").get<std::string>(), j.value("routers", 2),
                                 j.value("spare_ports", 0), j.value("spare_transponders", 0)});
        }
        for (const auto& j : doc.value("tails", json::array())) {
            net.tails.push_back({j.at("id").get<std::string>(), j.at("site").get<std::string>(),
                                 j.value("capacity_units", 1),
                                 state_from_string(j.value("state", "free")),
                                 j.value("router", 0)});
        }
        for (const auto& j : doc.value("regens", json::array())) {
            net.regens.push_back({j.at("id").get<std::string>(), j.at("site").get<std::string>(),
                                  state_from_string(j.value("state", "free"))});
        }
        for (const auto& j : doc.value("ip_links", json::array())) {
            IpLink link;
            link.id = j.at("id").get<std::string>();
            link.a = j.at("a").get<std::string>();
            link.b = j.at("b").get<std::string>();
            link.capacity = j.value("capacity", 1);
            link.optical_path = j.value("optical_path", std::vector<std::string>{});
            link.tails = j.value("tails", std::vector<std::string>{});
            link.regens = j.value("regens", std::vector<std::string>{});
            net.ip_links.push_back(std::move(link));
        }
        return net;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid network JSON: ") + e.what());
    }
}

std::string network_to_json(const MultiLayerNetwork& net) {
    json doc;
    doc["schema"] = "optiplan-net-1";
    doc["system_reach_km"] = net.system_reach_km;
    doc["propagation_us_per_km"] = net.propagation_us_per_km;
    doc["optical_nodes"] = json::array();
    for (const auto& node : net.optical_nodes) {
        json j{{"id", node.id}};
        if (node.core_site) j["core_site"] = *node.core_site;
        doc["optical_nodes"].push_back(std::move(j));
    }
    doc["fiber_spans"] = json::array();
    for (const auto& span : net.fiber_spans) {
        doc["fiber_spans"].push_back({{"id", span.id},
                                      {"a", span.a},
                                      {"b", span.b},
                                      {"length_km", span.length_km},
                                      {"srlg", span.srlg}});
    }
    doc["sites"] = json::array();
    for (const auto& site : net.sites) {
        doc["sites"].push_back({{"id", site.id},
                                {"routers", site.routers},
                                {"spare_ports", site.spare_ports},
                                {"spare_transponders", site.spare_transponders}});
    }
    doc["tails"] = json::array();
    for (const auto& tail : net.tails) {
        doc["tails"].push_back({{"id", tail.id},
                                {"site", tail.site},
                                {"capacity_units", tail.capacity_units},
                                {"state", state_to_string(tail.state)},
                                {"router", tail.router}});
    }
    doc["regens"] = json::array();
    for (const auto& regen : net.regens) {
        doc["regens"].push_back({{"id", regen.id},
                                 {"site", regen.site},
                                 {"state", state_to_string(regen.state)}});
    }
    doc["ip_links"] = json::array();
    for (const auto& link : net.ip_links) {
        doc["ip_links"].push_back({{"id", link.id},
                                   {"a", link.a},
                                   {"b", link.b},
                                   {"capacity", link.capacity},
                                   {"optical_path", link.optical_path},
                                   {"tails", link.tails},
                                   {"regens", link.regens}});
    }
    return doc.dump(2) + "\n";
}

MultiLayerNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open network file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return network_from_json(buf.str());
}

void save_network(const MultiLayerNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write network file '" + path + "'");
    out << network_to_json(net);
}

}  // namespace optiplan::net
