#include "optiplan/mlopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "optiplan/errors.hpp"

using nlohmann::json;

namespace optiplan::plan {

double cost(long long tails, long long regens, const CostModel& model) {
    if (tails < 0 || regens < 0) throw Error("resource counts must be non-negative");
    return static_cast<double>(tails) * model.tail_unit_cost +
           static_cast<double>(regens) * model.regen_cost_ratio * model.tail_unit_cost;
}

std::vector<net::TeTunnel> tunnels_from_matrix(const net::TrafficMatrix& tm,
                                               const std::vector<QosClass>& classes) {
    std::vector<net::TeTunnel> tunnels;
    tunnels.reserve(tm.entries.size());
    for (const auto& entry : tm.entries) {
        const QosClass* qos = nullptr;
        for (const auto& c : classes) {
            if (c.index == entry.qos_class) qos = &c;
        }
        if (!qos) throw Error("traffic entry references unknown QoS class");
        net::TeTunnel t;
        t.id = entry.src + "-" + entry.dst + "-c" + std::to_string(entry.qos_class);
        t.src = entry.src;
        t.dst = entry.dst;
        t.qos_class = entry.qos_class;
        t.demand = entry.demand;
        t.latency_bound_ms = qos->latency_bound_ms;
        tunnels.push_back(std::move(t));
    }
    return tunnels;
}

// ---------------------------------------------------------------------------
// CSPF routing

namespace {

/// Integer-indexed routing graph; built once per routing call so the
/// per-tunnel Dijkstra stays allocation-light.
struct RouteGraph {
    std::vector<const net::IpLink*> links;
    std::vector<double> residual;
    std::vector<double> latency;
    std::map<std::string, int> site_index;
    std::vector<std::vector<std::pair<int, int>>> adjacency;  // (link, other site)

    explicit RouteGraph(const net::MultiLayerNetwork& network) {
        for (const auto& site : network.sites) {
            site_index.emplace(site.id, static_cast<int>(site_index.size()));
        }
        adjacency.resize(site_index.size());
        std::vector<const net::IpLink*> ordered;
        for (const auto& link : network.ip_links) ordered.push_back(&link);
        std::sort(ordered.begin(), ordered.end(),
                  [](const net::IpLink* a, const net::IpLink* b) { return a->id < b->id; });
        for (const net::IpLink* link : ordered) {
            auto ia = site_index.find(link->a);
            auto ib = site_index.find(link->b);
            if (ia == site_index.end() || ib == site_index.end()) continue;
            const int idx = static_cast<int>(links.size());
            links.push_back(link);
            residual.push_back(static_cast<double>(link->capacity));
            latency.push_back(network.link_latency_ms(*link));
            adjacency[static_cast<std::size_t>(ia->second)].push_back({idx, ib->second});
            adjacency[static_cast<std::size_t>(ib->second)].push_back({idx, ia->second});
        }
    }

    /// Minimum-latency path over links with residual >= demand; empty when
    /// unreachable. Deterministic: edges are scanned in link-id order and
    /// only strict improvements relax.
    std::vector<int> shortest(int src, int dst, double demand, double* latency_out) const {
        const std::size_t n = adjacency.size();
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        std::vector<int> via_link(n, -1);
        std::vector<int> via_site(n, -1);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
        dist[static_cast<std::size_t>(src)] = 0.0;
        frontier.push({0.0, src});
        while (!frontier.empty()) {
            auto [d, site] = frontier.top();
            frontier.pop();
            if (d > dist[static_cast<std::size_t>(site)] + 1e-15) continue;
            if (site == dst) break;
            for (const auto& [link_idx, other] : adjacency[static_cast<std::size_t>(site)]) {
                if (residual[static_cast<std::size_t>(link_idx)] + 1e-9 < demand) continue;
                const double nd = d + latency[static_cast<std::size_t>(link_idx)];
                if (nd < dist[static_cast<std::size_t>(other)] - 1e-15) {
                    dist[static_cast<std::size_t>(other)] = nd;
                    via_link[static_cast<std::size_t>(other)] = link_idx;
                    via_site[static_cast<std::size_t>(other)] = site;
                    frontier.push({nd, other});
                }
            }
        }
        if (!std::isfinite(dist[static_cast<std::size_t>(dst)])) return {};
        if (latency_out) *latency_out = dist[static_cast<std::size_t>(dst)];
        std::vector<int> path;
        for (int at = dst; at != src; at = via_site[static_cast<std::size_t>(at)]) {
            path.push_back(via_link[static_cast<std::size_t>(at)]);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }
};

std::vector<const net::TeTunnel*> ordered_tunnels(const std::vector<net::TeTunnel>& tunnels,
                                                  OrderingPolicy policy) {
    std::vector<const net::TeTunnel*> order;
    order.reserve(tunnels.size());
    for (const auto& t : tunnels) order.push_back(&t);
    if (policy == OrderingPolicy::Default) {
        std::stable_sort(order.begin(), order.end(),
                         [](const net::TeTunnel* a, const net::TeTunnel* b) {
                             if (a->latency_bound_ms != b->latency_bound_ms) {
                                 return a->latency_bound_ms < b->latency_bound_ms;
                             }
                             if (a->demand != b->demand) return a->demand > b->demand;
                             return a->id < b->id;
                         });
    }
    return order;
}

}  // namespace

RoutingResult route_tunnels(const net::MultiLayerNetwork& network,
                            const std::vector<net::TeTunnel>& tunnels, OrderingPolicy policy) {
    RouteGraph graph(network);
    RoutingResult result;
    for (const net::TeTunnel* tunnel : ordered_tunnels(tunnels, policy)) {
        auto is = graph.site_index.find(tunnel->src);
        auto id = graph.site_index.find(tunnel->dst);
        if (is == graph.site_index.end() || id == graph.site_index.end()) {
            result.unrouted.push_back(tunnel->id);
            continue;
        }
        double latency = 0.0;
        const std::vector<int> path =
            graph.shortest(is->second, id->second, tunnel->demand, &latency);
        if (path.empty() || latency > tunnel->latency_bound_ms + 1e-12) {
            result.unrouted.push_back(tunnel->id);
            continue;
        }
        std::vector<std::string> ids;
        for (int link_idx : path) {
            graph.residual[static_cast<std::size_t>(link_idx)] -= tunnel->demand;
            const std::string& lid = graph.links[static_cast<std::size_t>(link_idx)]->id;
            result.link_load[lid] += tunnel->demand;
            ids.push_back(lid);
        }
        result.carried_demand += tunnel->demand;
        result.paths[tunnel->id] = std::move(ids);
    }
    std::sort(result.unrouted.begin(), result.unrouted.end());
    return result;
}

// ---------------------------------------------------------------------------
// FRR bypass

std::vector<std::string> compute_frr_bypass(
    const net::MultiLayerNetwork& network, const RoutingResult& routing,
    const std::string& protected_link,
    const std::optional<std::map<std::string, double>>& traffic_envelope) {
    const net::IpLink* target = network.find_link(protected_link);
    if (!target) throw Error("unknown protected link '" + protected_link + "'");

    const std::map<std::string, double>& envelope =
        traffic_envelope ? *traffic_envelope : routing.link_load;
    const double protected_load =
        envelope.count(protected_link) ? envelope.at(protected_link) : 0.0;

    std::set<std::string> protected_srlgs;
    for (const auto& sid : target->optical_path) {
        const net::FiberSpan* span = network.find_span(sid);
        if (span) protected_srlgs.insert(span->srlg);
    }

    auto diverse = [&](const net::IpLink& link) {
        if (link.id == protected_link) return false;
        for (const auto& sid : link.optical_path) {
            const net::FiberSpan* span = network.find_span(sid);
            if (span && protected_srlgs.count(span->srlg)) return false;
        }
        return true;
    };

    net::MultiLayerNetwork diverse_net = network;
    std::erase_if(diverse_net.ip_links, [&](const net::IpLink& l) { return !diverse(l); });

    // Pass 1: diversity only, to distinguish the two failure modes.
    {
        RouteGraph graph(diverse_net);
        std::fill(graph.residual.begin(), graph.residual.end(),
                  std::numeric_limits<double>::infinity());
        const int src = graph.site_index.at(target->a);
        const int dst = graph.site_index.at(target->b);
        if (graph.shortest(src, dst, 0.0, nullptr).empty()) {
            throw NoDiversePath("no SRLG-diverse bypass exists for link '" + protected_link +
                                "'");
        }
    }

    // Pass 2: diversity plus headroom for the protected load at every hop.
    RouteGraph graph(diverse_net);
    for (std::size_t i = 0; i < graph.links.size(); ++i) {
        const std::string& id = graph.links[i]->id;
        const double load = envelope.count(id) ? envelope.at(id) : 0.0;
        graph.residual[i] = static_cast<double>(graph.links[i]->capacity) - load;
    }
    const std::vector<int> path = graph.shortest(graph.site_index.at(target->a),
                                                 graph.site_index.at(target->b), protected_load,
                                                 nullptr);
    if (path.empty()) {
        throw NoCapacity("every SRLG-diverse bypass lacks capacity for link '" +
                         protected_link + "'");
    }
    std::vector<std::string> ids;
    for (int link_idx : path) ids.push_back(graph.links[static_cast<std::size_t>(link_idx)]->id);
    return ids;
}

// ---------------------------------------------------------------------------
// dynamic IP-link lifecycle

namespace {

struct EndpointPlan {
    enum class Source { FreeTail, Dfcc, Purchase };
    Source source = Source::FreeTail;
    std::string tail_id;  // existing free tail, when source == FreeTail
    int capacity = 1;
};

/// Free tail with the largest capacity (ties by id) at a site.
net::Tail* best_free_tail(net::MultiLayerNetwork& network, const std::string& site) {
    net::Tail* best = nullptr;
    for (auto& tail : network.tails) {
        if (tail.site != site || tail.state != net::ResourceState::Free) continue;
        if (!best || tail.capacity_units > best->capacity_units ||
            (tail.capacity_units == best->capacity_units && tail.id < best->id)) {
            best = &tail;
        }
    }
    return best;
}

int count_free_tails(const net::MultiLayerNetwork& network) {
    int n = 0;
    for (const auto& t : network.tails) n += t.state == net::ResourceState::Free ? 1 : 0;
    return n;
}

int count_free_regens(const net::MultiLayerNetwork& network) {
    int n = 0;
    for (const auto& r : network.regens) n += r.state == net::ResourceState::Free ? 1 : 0;
    return n;
}

/// Free regens covering the given optical-node sites, lowest ids first;
/// returns empty (with ok=false) when a site cannot be covered.
std::vector<std::string> pick_free_regens(net::MultiLayerNetwork& network,
                                          const std::vector<std::string>& sites, bool* ok) {
    std::vector<std::string> picked;
    std::set<std::string> used;
    *ok = true;
    for (const auto& site : sites) {
        const net::Regen* chosen = nullptr;
        for (const auto& regen : network.regens) {
            if (regen.site != site || regen.state != net::ResourceState::Free) continue;
            if (used.count(regen.id)) continue;
            if (!chosen || regen.id < chosen->id) chosen = &regen;
        }
        if (!chosen) {
            *ok = false;
            return {};
        }
        used.insert(chosen->id);
        picked.push_back(chosen->id);
    }
    return picked;
}

}  // namespace

std::vector<AdjustAction> topology_adjust(net::MultiLayerNetwork& network, AdjustTrigger trigger,
                                          const std::vector<net::TeTunnel>& traffic,
                                          bool allow_dfcc) {
    std::vector<AdjustAction> actions;

    if (trigger == AdjustTrigger::PeriodicCleanup) {
        // Remove links whose removal keeps every tunnel routable, greedily by
        // the spare-resource score.
        while (true) {
            std::string best_link;
            double best_score = -1.0;
            int best_regens = 0;
            for (const auto& link : network.ip_links) {
                net::MultiLayerNetwork trial = network;
                auto it = std::find_if(trial.ip_links.begin(), trial.ip_links.end(),
                                       [&](const net::IpLink& l) { return l.id == link.id; });
                for (const auto& tid : it->tails) {
                    if (auto* t = trial.find_tail(tid)) t->state = net::ResourceState::Free;
                }
                for (const auto& rid : it->regens) {
                    if (auto* r = trial.find_regen(rid)) r->state = net::ResourceState::Free;
                }
                trial.ip_links.erase(it);
                if (!route_tunnels(trial, traffic).unrouted.empty()) continue;
                const double score = count_free_tails(trial) + 0.4 * count_free_regens(trial);
                const int n_regens = static_cast<int>(link.regens.size());
                if (score > best_score + 1e-12 ||
                    (score > best_score - 1e-12 &&
                     (n_regens < best_regens ||
                      (n_regens == best_regens && link.id < best_link)))) {
                    best_score = score;
                    best_link = link.id;
                    best_regens = n_regens;
                }
            }
            if (best_link.empty()) break;
            auto it = std::find_if(network.ip_links.begin(), network.ip_links.end(),
                                   [&](const net::IpLink& l) { return l.id == best_link; });
            for (const auto& tid : it->tails) {
                if (auto* t = network.find_tail(tid)) t->state = net::ResourceState::Free;
            }
            for (const auto& rid : it->regens) {
                if (auto* r = network.find_regen(rid)) r->state = net::ResourceState::Free;
            }
            network.ip_links.erase(it);
            actions.push_back({AdjustAction::Kind::DeleteLink, best_link, "", "", "", ""});
        }
        return actions;
    }

    // Surge / failure: create links until the traffic routes.
    int serial = 0;
    while (true) {
        RoutingResult routing = route_tunnels(network, traffic);
        if (routing.unrouted.empty()) break;

        struct Candidate {
            std::string a, b;
            EndpointPlan plan_a, plan_b;
            std::vector<std::string> spans;
            std::vector<std::string> regen_ids;
            int capacity = 1;
            double score = 0.0;
            int n_regens = 0;
            double gain = 0.0;
        };
        std::vector<Candidate> candidates;

        std::vector<std::string> site_ids;
        for (const auto& site : network.sites) site_ids.push_back(site.id);
        std::sort(site_ids.begin(), site_ids.end());

        const int free_tails_now = count_free_tails(network);
        const int free_regens_now = count_free_regens(network);

        for (std::size_t i = 0; i < site_ids.size(); ++i) {
            for (std::size_t j = i + 1; j < site_ids.size(); ++j) {
                Candidate c;
                c.a = site_ids[i];
                c.b = site_ids[j];
                int free_tails_used = 0;
                bool viable = true;
                for (int side = 0; side < 2; ++side) {
                    const std::string& site = side == 0 ? c.a : c.b;
                    EndpointPlan& plan = side == 0 ? c.plan_a : c.plan_b;
                    if (net::Tail* tail = best_free_tail(network, site)) {
                        plan = {EndpointPlan::Source::FreeTail, tail->id, tail->capacity_units};
                        ++free_tails_used;
                    } else if (allow_dfcc) {
                        const net::CoreSite* cs = network.find_site(site);
                        if (cs && cs->spare_ports > 0 && cs->spare_transponders > 0) {
                            plan = {EndpointPlan::Source::Dfcc, "", 1};
                        } else {
                            viable = false;
                        }
                    } else {
                        viable = false;
                    }
                }
                if (!viable) continue;
                const std::string node_a = network.optical_node_of_site(c.a);
                const std::string node_b = network.optical_node_of_site(c.b);
                if (node_a.empty() || node_b.empty()) continue;
                net::OpticalRoute route;
                try {
                    route = net::optical_route(network, node_a, node_b);
                } catch (const Error&) {
                    continue;
                }
                bool regens_ok = true;
                c.regen_ids = pick_free_regens(network, route.regen_sites, &regens_ok);
                if (!regens_ok) continue;
                c.spans = route.spans;
                c.capacity = std::min(c.plan_a.capacity, c.plan_b.capacity);
                c.n_regens = static_cast<int>(c.regen_ids.size());
                c.score = (free_tails_now - free_tails_used) +
                          0.4 * (free_regens_now - c.n_regens);

                // Gain: demand of currently-unrouted tunnels this link unblocks.
                net::MultiLayerNetwork trial = network;
                net::IpLink link;
                link.id = "__candidate__";
                link.a = c.a;
                link.b = c.b;
                link.capacity = c.capacity;
                link.optical_path = c.spans;
                trial.ip_links.push_back(link);
                const RoutingResult after = route_tunnels(trial, traffic);
                c.gain = after.carried_demand - routing.carried_demand;
                if (c.gain > 1e-9) candidates.push_back(std::move(c));
            }
        }

        if (candidates.empty()) {
            throw InsufficientResources("no link candidate can absorb the unrouted traffic");
        }
        const Candidate* best = &candidates.front();
        for (const auto& c : candidates) {
            if (c.score > best->score + 1e-12) {
                best = &c;
            } else if (c.score > best->score - 1e-12) {
                if (c.n_regens < best->n_regens ||
                    (c.n_regens == best->n_regens &&
                     std::tie(c.a, c.b) < std::tie(best->a, best->b))) {
                    best = &c;
                }
            }
        }

        // Apply: recombine tails where needed, then create the link.
        std::vector<std::string> tail_ids;
        for (int side = 0; side < 2; ++side) {
            const std::string& site = side == 0 ? best->a : best->b;
            const EndpointPlan& plan = side == 0 ? best->plan_a : best->plan_b;
            if (plan.source == EndpointPlan::Source::FreeTail) {
                network.find_tail(plan.tail_id)->state = net::ResourceState::InUse;
                tail_ids.push_back(plan.tail_id);
            } else {
                auto* cs = const_cast<net::CoreSite*>(network.find_site(site));
                cs->spare_ports -= 1;
                cs->spare_transponders -= 1;
                net::Tail tail;
                tail.id = "T-dfcc-" + site + "-" + std::to_string(serial);
                tail.site = site;
                tail.capacity_units = 1;
                tail.state = net::ResourceState::InUse;
                network.tails.push_back(tail);
                tail_ids.push_back(tail.id);
                actions.push_back({AdjustAction::Kind::RecombineTail, "", site, "", tail.id,
                                   "fused spare router port with spare transponder"});
            }
        }
        for (const auto& rid : best->regen_ids) {
            network.find_regen(rid)->state = net::ResourceState::InUse;
        }
        net::IpLink link;
        link.id = "L-adj-" + best->a + "-" + best->b + "-" + std::to_string(serial);
        link.a = best->a;
        link.b = best->b;
        link.capacity = best->capacity;
        link.optical_path = best->spans;
        link.tails = tail_ids;
        link.regens = best->regen_ids;
        network.ip_links.push_back(link);
        actions.push_back({AdjustAction::Kind::CreateLink, link.id, best->a, best->b, "",
                           "wavelength setup takes about 2-3 minutes"});
        ++serial;
    }
    return actions;
}

// ---------------------------------------------------------------------------
// capacity planning

namespace {

net::TrafficMatrix scale_matrix(const net::TrafficMatrix& tm, double factor) {
    net::TrafficMatrix out = tm;
    for (auto& e : out.entries) e.demand *= factor;
    return out;
}

struct RouterKey {
    std::string site;
    int index = 0;
    bool operator<(const RouterKey& other) const {
        return std::tie(site, index) < std::tie(other.site, other.index);
    }
};

RouterKey parse_router(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return {text, -1};  // -1: every router at the site
    return {text.substr(0, slash), std::stoi(text.substr(slash + 1))};
}

/// Persistent per-ordering state: the base inventory plus everything bought
/// so far. Purchased capacity attaches to its link; purchased tails/regens
/// become free inventory reusable in later scenarios.
struct OrderingState {
    net::MultiLayerNetwork base;
    std::map<std::string, int> link_extra;  // purchased capacity units per link
    int attached_tails = 0;
    int attached_regens = 0;
    int purchase_serial = 0;
};

struct ScenarioView {
    net::MultiLayerNetwork n;
    std::set<std::string> cut_srlgs;
    std::set<std::string> dead_links;    // failed in this scenario
    std::map<std::string, int> dfcc_bonus_transponders;  // per site (mode 4)
};

ScenarioView make_view(const OrderingState& state, const FailureScenario* failure, int mode) {
    ScenarioView view;
    view.n = state.base;

    std::set<RouterKey> failed_routers;
    std::set<std::string> failed_equipment;
    if (failure) {
        for (const auto& r : failure->routers) failed_routers.insert(parse_router(r));
        for (const auto& s : failure->srlgs) view.cut_srlgs.insert(s);
        failed_equipment.insert(failure->equipment.begin(), failure->equipment.end());
    }

    auto router_failed = [&](const net::Tail& tail) {
        return failed_routers.count({tail.site, tail.router}) ||
               failed_routers.count({tail.site, -1});
    };

    // Classify tails and regens.
    std::set<std::string> dead_tails;
    for (const auto& tail : view.n.tails) {
        if (failed_equipment.count(tail.id)) {
            dead_tails.insert(tail.id);
        } else if (router_failed(tail)) {
            dead_tails.insert(tail.id);
            if (mode >= 4) view.dfcc_bonus_transponders[tail.site] += 1;  // transponder survives
        }
    }
    std::set<std::string> dead_regens;
    for (const auto& regen : view.n.regens) {
        if (failed_equipment.count(regen.id)) dead_regens.insert(regen.id);
    }

    // Classify links.
    for (const auto& link : view.n.ip_links) {
        bool dead = false;
        for (const auto& sid : link.optical_path) {
            const net::FiberSpan* span = view.n.find_span(sid);
            if (span && view.cut_srlgs.count(span->srlg)) dead = true;
        }
        for (const auto& tid : link.tails) {
            if (dead_tails.count(tid)) dead = true;
        }
        for (const auto& rid : link.regens) {
            if (dead_regens.count(rid)) dead = true;
        }
        if (dead) view.dead_links.insert(link.id);
    }

    // Surviving components of dead links are reusable from mode 3 on.
    for (const auto& link : view.n.ip_links) {
        if (!view.dead_links.count(link.id)) continue;
        if (mode >= 3) {
            for (const auto& tid : link.tails) {
                if (!dead_tails.count(tid)) {
                    view.n.find_tail(tid)->state = net::ResourceState::Free;
                }
            }
            for (const auto& rid : link.regens) {
                if (!dead_regens.count(rid)) {
                    view.n.find_regen(rid)->state = net::ResourceState::Free;
                }
            }
        }
    }

    // Drop dead links and apply purchased capacity to the survivors.
    std::vector<net::IpLink> alive;
    for (const auto& link : view.n.ip_links) {
        if (view.dead_links.count(link.id)) continue;
        net::IpLink l = link;
        auto it = state.link_extra.find(link.id);
        if (it != state.link_extra.end()) l.capacity += it->second;
        alive.push_back(std::move(l));
    }
    view.n.ip_links = std::move(alive);

    // Remove dead tails/regens entirely; they are unusable this scenario.
    std::erase_if(view.n.tails,
                  [&](const net::Tail& t) { return dead_tails.count(t.id) > 0; });
    std::erase_if(view.n.regens,
                  [&](const net::Regen& r) { return dead_regens.count(r.id) > 0; });
    return view;
}

struct PlanCandidate {
    enum class Kind { PurchaseUnit, Resize, Restore, NewLink };
    Kind kind = Kind::PurchaseUnit;
    std::string link_id;                  // PurchaseUnit / Resize / Restore
    std::string a, b;                     // NewLink
    double purchase_cost = 0.0;
    int buy_tails = 0;
    int buy_regens = 0;
    double gain = 0.0;
    std::string sort_key;
};

/// Demand of currently-unrouted tunnels that becomes routable on the
/// modified network.
double routing_gain(const net::MultiLayerNetwork& trial,
                    const std::vector<net::TeTunnel>& tunnels, double carried_before) {
    return route_tunnels(trial, tunnels).carried_demand - carried_before;
}

}  // namespace

PlanResult plan_capacity(const net::MultiLayerNetwork& network, const net::TrafficMatrix& base_tm,
                         const std::vector<QosClass>& classes,
                         const std::vector<FailureScenario>& failures,
                         const std::vector<SurgeScenario>& surges, int mode,
                         const PlanConfig& config, num::SeededRng& rng) {
    if (mode < 1 || mode > 4) throw Error("planning mode must be 1..4");

    // Scenario grid: (failures + none) x (surges + base).
    struct Combo {
        const FailureScenario* failure;
        const SurgeScenario* surge;
    };
    std::vector<Combo> combos;
    combos.push_back({nullptr, nullptr});
    for (const auto& s : surges) combos.push_back({nullptr, &s});
    for (const auto& f : failures) {
        combos.push_back({&f, nullptr});
        for (const auto& s : surges) combos.push_back({&f, &s});
    }

    std::optional<PlanResult> best;
    for (int ordering = 0; ordering < config.n_orderings; ++ordering) {
        num::SeededRng ordering_rng = rng.derive(static_cast<std::uint64_t>(ordering));
        std::vector<Combo> order = combos;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            const std::size_t j = i + static_cast<std::size_t>(ordering_rng.below(order.size() - i));
            std::swap(order[i], order[j]);
        }

        OrderingState state;
        state.base = network;
        std::vector<ScenarioRecord> records;

        for (const Combo& combo : order) {
            net::TrafficMatrix tm;
            if (mode == 1) {
                tm = scale_matrix(base_tm, config.uncertainty_factor);
            } else if (combo.surge) {
                tm = combo.surge->traffic;
            } else {
                tm = base_tm;
            }
            const std::vector<net::TeTunnel> tunnels = tunnels_from_matrix(tm, classes);

            ScenarioRecord record;
            record.failure_id = combo.failure ? combo.failure->id : "none";
            record.surge_id = combo.surge ? combo.surge->id : "base";

            ScenarioView view = make_view(state, combo.failure, mode);
            RoutingResult routing = route_tunnels(view.n, tunnels);
            int guard = 0;
            while (!routing.unrouted.empty() && guard++ < 200) {
                std::vector<PlanCandidate> candidates;

                // (a) purchase one more unit on an alive link (all modes)
                for (const auto& link : view.n.ip_links) {
                    const net::IpLink* base_link = state.base.find_link(link.id);
                    const int unit_regens =
                        base_link ? static_cast<int>(base_link->regens.size()) : 0;
                    PlanCandidate c;
                    c.kind = PlanCandidate::Kind::PurchaseUnit;
                    c.link_id = link.id;
                    c.buy_tails = 2;
                    c.buy_regens = unit_regens;
                    c.purchase_cost = cost(2, unit_regens, config.cost_model);
                    c.sort_key = "a:" + link.id;
                    net::MultiLayerNetwork trial = view.n;
                    for (auto& l : trial.ip_links) {
                        if (l.id == link.id) l.capacity += 1;
                    }
                    c.gain = routing_gain(trial, tunnels, routing.carried_demand);
                    if (c.gain > 1e-9) candidates.push_back(std::move(c));
                }

                // (b) mode >= 3: absorb a free tail pair into an alive link
                if (mode >= 3) {
                    for (const auto& link : view.n.ip_links) {
                        net::Tail* ta = best_free_tail(view.n, link.a);
                        net::Tail* tb = best_free_tail(view.n, link.b);
                        if (!ta || !tb) continue;
                        const int units = std::min(ta->capacity_units, tb->capacity_units);
                        PlanCandidate c;
                        c.kind = PlanCandidate::Kind::Resize;
                        c.link_id = link.id;
                        c.purchase_cost = 0.0;
                        c.sort_key = "b:" + link.id;
                        net::MultiLayerNetwork trial = view.n;
                        for (auto& l : trial.ip_links) {
                            if (l.id == link.id) l.capacity += units;
                        }
                        c.gain = routing_gain(trial, tunnels, routing.carried_demand);
                        if (c.gain > 1e-9) candidates.push_back(std::move(c));
                    }
                }

                // (c) mode >= 3: restore a dead link over a surviving fiber path
                if (mode >= 3) {
                    for (const auto& dead_id : view.dead_links) {
                        const net::IpLink* base_link = state.base.find_link(dead_id);
                        if (!base_link) continue;
                        if (view.n.find_link(dead_id + "~alt")) continue;  // already restored
                        net::Tail* ta = best_free_tail(view.n, base_link->a);
                        net::Tail* tb = best_free_tail(view.n, base_link->b);
                        if (!ta || !tb) continue;
                        const std::string node_a = view.n.optical_node_of_site(base_link->a);
                        const std::string node_b = view.n.optical_node_of_site(base_link->b);
                        if (node_a.empty() || node_b.empty()) continue;
                        net::OpticalRoute route;
                        try {
                            route = net::optical_route(
                                view.n, node_a, node_b,
                                {view.cut_srlgs.begin(), view.cut_srlgs.end()});
                        } catch (const Error&) {
                            continue;
                        }
                        bool regens_ok = true;
                        std::vector<std::string> regen_ids =
                            pick_free_regens(view.n, route.regen_sites, &regens_ok);
                        const int missing =
                            regens_ok ? 0
                                      : static_cast<int>(route.regen_sites.size());
                        // partial coverage counts as full purchase of the gap
                        PlanCandidate c;
                        c.kind = PlanCandidate::Kind::Restore;
                        c.link_id = dead_id;
                        c.buy_regens = missing;
                        c.purchase_cost = cost(0, missing, config.cost_model);
                        c.sort_key = "c:" + dead_id;
                        net::MultiLayerNetwork trial = view.n;
                        net::IpLink l = *base_link;
                        l.id = dead_id + "~alt";
                        l.capacity = std::min(ta->capacity_units, tb->capacity_units);
                        l.optical_path = route.spans;
                        trial.ip_links.push_back(l);
                        c.gain = routing_gain(trial, tunnels, routing.carried_demand);
                        if (c.gain > 1e-9) candidates.push_back(std::move(c));
                    }
                }

                // (d) mode 4: a brand-new link between any site pair
                if (mode >= 4) {
                    std::vector<std::string> site_ids;
                    for (const auto& site : view.n.sites) site_ids.push_back(site.id);
                    std::sort(site_ids.begin(), site_ids.end());
                    for (std::size_t i = 0; i < site_ids.size(); ++i) {
                        for (std::size_t j = i + 1; j < site_ids.size(); ++j) {
                            PlanCandidate c;
                            c.kind = PlanCandidate::Kind::NewLink;
                            c.a = site_ids[i];
                            c.b = site_ids[j];
                            c.sort_key = "d:" + c.a + ":" + c.b;
                            int capacity = std::numeric_limits<int>::max();
                            for (const auto& site : {c.a, c.b}) {
                                if (net::Tail* t = best_free_tail(view.n, site)) {
                                    capacity = std::min(capacity, t->capacity_units);
                                    continue;
                                }
                                const net::CoreSite* cs = view.n.find_site(site);
                                const int bonus = view.dfcc_bonus_transponders.count(site)
                                                      ? view.dfcc_bonus_transponders.at(site)
                                                      : 0;
                                if (cs && cs->spare_ports > 0 &&
                                    cs->spare_transponders + bonus > 0) {
                                    capacity = std::min(capacity, 1);  // DFCC-fused tail
                                } else {
                                    c.buy_tails += 1;
                                    capacity = std::min(capacity, 1);
                                }
                            }
                            const std::string node_a = view.n.optical_node_of_site(c.a);
                            const std::string node_b = view.n.optical_node_of_site(c.b);
                            if (node_a.empty() || node_b.empty()) continue;
                            net::OpticalRoute route;
                            try {
                                route = net::optical_route(
                                    view.n, node_a, node_b,
                                    {view.cut_srlgs.begin(), view.cut_srlgs.end()});
                            } catch (const Error&) {
                                continue;
                            }
                            bool regens_ok = true;
                            pick_free_regens(view.n, route.regen_sites, &regens_ok);
                            if (!regens_ok) {
                                c.buy_regens = static_cast<int>(route.regen_sites.size());
                            }
                            c.purchase_cost =
                                cost(c.buy_tails, c.buy_regens, config.cost_model);
                            net::MultiLayerNetwork trial = view.n;
                            net::IpLink l;
                            l.id = "L-new-" + c.a + "-" + c.b;
                            l.a = c.a;
                            l.b = c.b;
                            l.capacity = capacity;
                            l.optical_path = route.spans;
                            trial.ip_links.push_back(l);
                            c.gain = routing_gain(trial, tunnels, routing.carried_demand);
                            if (c.gain > 1e-9) candidates.push_back(std::move(c));
                        }
                    }
                }

                if (candidates.empty()) {
                    // Unlimited resources cannot bridge a disconnected fiber
                    // plant; anything else is an (expensive) modelling gap.
                    for (const auto& tid : routing.unrouted) {
                        for (const auto& tunnel : tunnels) {
                            if (tunnel.id != tid) continue;
                            const std::string na = view.n.optical_node_of_site(tunnel.src);
                            const std::string nb = view.n.optical_node_of_site(tunnel.dst);
                            try {
                                net::optical_route(
                                    view.n, na, nb,
                                    {view.cut_srlgs.begin(), view.cut_srlgs.end()});
                            } catch (const Error&) {
                                throw InfeasibleScenario(
                                    "optical plant cannot connect " + tunnel.src + " to " +
                                    tunnel.dst + " in scenario '" + record.failure_id + "'");
                            }
                        }
                    }
                    break;
                }

                const PlanCandidate* chosen = &candidates.front();
                for (const auto& c : candidates) {
                    if (c.purchase_cost < chosen->purchase_cost - 1e-12) {
                        chosen = &c;
                    } else if (c.purchase_cost < chosen->purchase_cost + 1e-12) {
                        if (c.gain > chosen->gain + 1e-12 ||
                            (c.gain > chosen->gain - 1e-12 && c.sort_key < chosen->sort_key)) {
                            chosen = &c;
                        }
                    }
                }

                // Apply the choice to the scenario view and persist purchases.
                switch (chosen->kind) {
                    case PlanCandidate::Kind::PurchaseUnit: {
                        state.link_extra[chosen->link_id] += 1;
                        state.attached_tails += 2;
                        state.attached_regens += chosen->buy_regens;
                        for (auto& l : view.n.ip_links) {
                            if (l.id == chosen->link_id) l.capacity += 1;
                        }
                        break;
                    }
                    case PlanCandidate::Kind::Resize: {
                        const net::IpLink* link = view.n.find_link(chosen->link_id);
                        net::Tail* ta = best_free_tail(view.n, link->a);
                        net::Tail* tb = best_free_tail(view.n, link->b);
                        const int units = std::min(ta->capacity_units, tb->capacity_units);
                        ta->state = net::ResourceState::InUse;
                        tb->state = net::ResourceState::InUse;
                        for (auto& l : view.n.ip_links) {
                            if (l.id == chosen->link_id) l.capacity += units;
                        }
                        break;
                    }
                    case PlanCandidate::Kind::Restore: {
                        const net::IpLink* base_link = state.base.find_link(chosen->link_id);
                        net::Tail* ta = best_free_tail(view.n, base_link->a);
                        net::Tail* tb = best_free_tail(view.n, base_link->b);
                        const std::string node_a = view.n.optical_node_of_site(base_link->a);
                        const std::string node_b = view.n.optical_node_of_site(base_link->b);
                        net::OpticalRoute route = net::optical_route(
                            view.n, node_a, node_b,
                            {view.cut_srlgs.begin(), view.cut_srlgs.end()});
                        // Purchased regens join the base inventory and serve
                        // this scenario immediately.
                        if (chosen->buy_regens > 0) {
                            for (const auto& site : route.regen_sites) {
                                net::Regen regen;
                                regen.id =
                                    "R-buy-" + std::to_string(state.purchase_serial++);
                                regen.site = site;
                                regen.state = net::ResourceState::Free;
                                state.base.regens.push_back(regen);
                                view.n.regens.push_back(regen);
                            }
                        }
                        bool regens_ok = true;
                        std::vector<std::string> regen_ids =
                            pick_free_regens(view.n, route.regen_sites, &regens_ok);
                        if (!regens_ok) break;
                        net::IpLink l = *base_link;
                        l.id = chosen->link_id + "~alt";
                        l.capacity = std::min(ta->capacity_units, tb->capacity_units);
                        l.optical_path = route.spans;
                        l.tails = {ta->id, tb->id};
                        l.regens = regen_ids;
                        ta->state = net::ResourceState::InUse;
                        tb->state = net::ResourceState::InUse;
                        for (const auto& rid : regen_ids) {
                            view.n.find_regen(rid)->state = net::ResourceState::InUse;
                        }
                        view.n.ip_links.push_back(l);
                        break;
                    }
                    case PlanCandidate::Kind::NewLink: {
                        std::vector<std::string> tail_ids;
                        int capacity = std::numeric_limits<int>::max();
                        for (const auto& site : {chosen->a, chosen->b}) {
                            if (net::Tail* t = best_free_tail(view.n, site)) {
                                t->state = net::ResourceState::InUse;
                                tail_ids.push_back(t->id);
                                capacity = std::min(capacity, t->capacity_units);
                                continue;
                            }
                            net::CoreSite* cs =
                                const_cast<net::CoreSite*>(view.n.find_site(site));
                            const int bonus = view.dfcc_bonus_transponders.count(site)
                                                  ? view.dfcc_bonus_transponders.at(site)
                                                  : 0;
                            net::Tail tail;
                            tail.id = "T-plan-" + std::to_string(state.purchase_serial++);
                            tail.site = site;
                            tail.capacity_units = 1;
                            tail.state = net::ResourceState::InUse;
                            capacity = std::min(capacity, 1);
                            if (cs && cs->spare_ports > 0 &&
                                cs->spare_transponders + bonus > 0) {
                                cs->spare_ports -= 1;
                                if (cs->spare_transponders > 0) {
                                    cs->spare_transponders -= 1;
                                } else {
                                    view.dfcc_bonus_transponders[site] -= 1;
                                }
                            } else {
                                // purchased tail persists as base inventory
                                net::Tail bought = tail;
                                bought.state = net::ResourceState::Free;
                                state.base.tails.push_back(bought);
                            }
                            view.n.tails.push_back(tail);
                            tail_ids.push_back(tail.id);
                        }
                        const std::string node_a = view.n.optical_node_of_site(chosen->a);
                        const std::string node_b = view.n.optical_node_of_site(chosen->b);
                        net::OpticalRoute route = net::optical_route(
                            view.n, node_a, node_b,
                            {view.cut_srlgs.begin(), view.cut_srlgs.end()});
                        if (chosen->buy_regens > 0) {
                            for (const auto& site : route.regen_sites) {
                                net::Regen regen;
                                regen.id =
                                    "R-buy-" + std::to_string(state.purchase_serial++);
                                regen.site = site;
                                regen.state = net::ResourceState::Free;
                                state.base.regens.push_back(regen);
                                view.n.regens.push_back(regen);
                            }
                        }
                        bool regens_ok = true;
                        std::vector<std::string> regen_ids =
                            pick_free_regens(view.n, route.regen_sites, &regens_ok);
                        if (!regens_ok) break;
                        net::IpLink l;
                        l.id = "L-new-" + chosen->a + "-" + chosen->b + "-" +
                               std::to_string(state.purchase_serial++);
                        l.a = chosen->a;
                        l.b = chosen->b;
                        l.capacity = capacity;
                        l.optical_path = route.spans;
                        l.tails = tail_ids;
                        l.regens = regen_ids;
                        for (const auto& rid : regen_ids) {
                            view.n.find_regen(rid)->state = net::ResourceState::InUse;
                        }
                        view.n.ip_links.push_back(l);
                        break;
                    }
                }
                record.added_tails += chosen->buy_tails;
                record.added_regens += chosen->buy_regens;
                routing = route_tunnels(view.n, tunnels);
            }
            record.feasible = routing.unrouted.empty();
            records.push_back(std::move(record));
        }

        PlanResult result;
        result.mode = mode;
        result.tails = static_cast<int>(state.base.tails.size()) + state.attached_tails;
        result.regens = static_cast<int>(state.base.regens.size()) + state.attached_regens;
        result.cost = cost(result.tails, result.regens, config.cost_model);
        result.records = std::move(records);
        result.best_ordering = static_cast<std::size_t>(ordering);
        if (!best || result.cost < best->cost - 1e-12) best = std::move(result);
    }
    return *best;
}

// ---------------------------------------------------------------------------
// scenario and result formats

namespace {

net::TrafficMatrix matrix_from_json(const json& j) {
    net::TrafficMatrix tm;
    std::set<std::string> endpoints;
    std::set<int> classes;
    for (const auto& e : j.at("entries")) {
        net::TrafficMatrix::Entry entry;
        entry.src = e.at("src").get<std::string>();
        entry.dst = e.at("dst").get<std::string>();
        entry.qos_class = e.value("class", 0);
        entry.demand = e.at("demand").get<double>();
        endpoints.insert(entry.src);
        endpoints.insert(entry.dst);
        classes.insert(entry.qos_class);
        tm.entries.push_back(std::move(entry));
    }
    tm.n_endpoints = static_cast<int>(endpoints.size());
    tm.n_classes = static_cast<int>(classes.size());
    return tm;
}

}  // namespace

ScenarioSet scenarios_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid scenario JSON: ") + e.what());
    }
    try {
        if (doc.value("schema", "") != "optiplan-scen-1") {
            throw ParseError("expected schema 'optiplan-scen-1'");
        }
        ScenarioSet set;
        for (const auto& j : doc.at("qos_classes")) {
            set.classes.push_back({j.at("index").get<int>(),
                                   j.at("latency_bound_ms").get<double>(),
                                   j.value("priority", 0)});
        }
        set.base_traffic = matrix_from_json(doc.at("base_traffic"));
        for (const auto& j : doc.value("failure_scenarios", json::array())) {
            FailureScenario f;
            f.id = j.at("id").get<std::string>();
            f.routers = j.value("routers", std::vector<std::string>{});
            f.srlgs = j.value("srlgs", std::vector<std::string>{});
            f.equipment = j.value("equipment", std::vector<std::string>{});
            set.failures.push_back(std::move(f));
        }
        for (const auto& j : doc.value("surge_scenarios", json::array())) {
            SurgeScenario s;
            s.id = j.at("id").get<std::string>();
            if (j.contains("scale")) {
                s.traffic = scale_matrix(set.base_traffic, j.at("scale").get<double>());
            } else {
                s.traffic = matrix_from_json(j.at("traffic"));
            }
            set.surges.push_back(std::move(s));
        }
        set.uncertainty_factor = doc.value("uncertainty_factor", 1.3);
        return set;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid scenario JSON: ") + e.what());
    }
}

ScenarioSet load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenarios_from_json(buf.str());
}

std::string plan_results_to_csv(const std::vector<PlanResult>& results) {
    const PlanResult* mode1 = nullptr;
    for (const auto& r : results) {
        if (r.mode == 1) mode1 = &r;
    }
    std::ostringstream out;
    out << "mode,tails,regens,cost,delta_pct_vs_mode1\n";
    char buf[64];
    for (const auto& r : results) {
        out << r.mode << ',' << r.tails << ',' << r.regens << ',';
        std::snprintf(buf, sizeof(buf), "%.10g", r.cost);
        out << buf << ',';
        if (mode1 && mode1->cost > 0.0) {
            std::snprintf(buf, sizeof(buf), "%.2f",
                          100.0 * (r.cost - mode1->cost) / mode1->cost);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::string plan_results_to_json(const std::vector<PlanResult>& results) {
    json doc;
    doc["schema"] = "optiplan-plan-1";
    doc["results"] = json::array();
    for (const auto& r : results) {
        json jr;
        jr["mode"] = r.mode;
        jr["tails"] = r.tails;
        jr["regens"] = r.regens;
        jr["cost"] = r.cost;
        jr["best_ordering"] = r.best_ordering;
        jr["scenarios"] = json::array();
        for (const auto& rec : r.records) {
            jr["scenarios"].push_back({{"failure", rec.failure_id},
                                       {"surge", rec.surge_id},
                                       {"feasible", rec.feasible},
                                       {"added_tails", rec.added_tails},
                                       {"added_regens", rec.added_regens}});
        }
        doc["results"].push_back(std::move(jr));
    }
    return doc.dump(2) + "\n";
}

}  // namespace optiplan::plan
