#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "optiplan/netmodel.hpp"
#include "optiplan/rng.hpp"

namespace optiplan::plan {

struct QosClass {
    int index = 0;
    double latency_bound_ms = 1e9;
    int priority = 0;
};

struct FailureScenario {
    std::string id;
    std::vector<std::string> routers;  // "<site>/<router index>"
    std::vector<std::string> srlgs;    // cut shared-risk groups
    std::vector<std::string> equipment;  // failed tail / regen ids
};

struct SurgeScenario {
    std::string id;
    net::TrafficMatrix traffic;
};

struct CostModel {
    double tail_unit_cost = 1.0;
    double regen_cost_ratio = 0.4;  // a 100 GE regen costs 40% of a tail
};

double cost(long long tails, long long regens, const CostModel& model = {});

/// Demand entries expanded into TE tunnels with per-class latency bounds.
std::vector<net::TeTunnel> tunnels_from_matrix(const net::TrafficMatrix& tm,
                                               const std::vector<QosClass>& classes);

// --- CSPF routing ------------------------------------------------------------

enum class OrderingPolicy {
    /// Ascending latency bound, then descending demand, then id.
    Default,
    /// Route in the order given.
    AsGiven,
};

struct RoutingResult {
    std::map<std::string, std::vector<std::string>> paths;  // tunnel -> link ids
    std::vector<std::string> unrouted;                      // tunnel ids
    std::map<std::string, double> link_load;
    double carried_demand = 0.0;
};

/// Ordered constrained-shortest-path routing: each tunnel takes the
/// minimum-latency path over links with residual capacity >= demand, subject
/// to its latency bound; infeasible tunnels are reported, not fatal.
RoutingResult route_tunnels(const net::MultiLayerNetwork& net,
                            const std::vector<net::TeTunnel>& tunnels,
                            OrderingPolicy policy = OrderingPolicy::Default);

// --- FRR bypass --------------------------------------------------------------

/// Shortest bypass between the protected link's endpoints that shares no SRLG
/// with its optical path and has headroom for the protected link's envelope
/// load at every hop. The envelope defaults to the routing's link loads.
/// Throws NoDiversePath when no SRLG-diverse route exists at all and
/// NoCapacity when diverse routes exist but none has the headroom.
std::vector<std::string> compute_frr_bypass(
    const net::MultiLayerNetwork& net, const RoutingResult& routing,
    const std::string& protected_link,
    const std::optional<std::map<std::string, double>>& traffic_envelope = std::nullopt);

// --- dynamic IP-link lifecycle ------------------------------------------------

enum class AdjustTrigger { Surge, Failure, PeriodicCleanup };

struct AdjustAction {
    enum class Kind { CreateLink, DeleteLink, RecombineTail };
    Kind kind = Kind::CreateLink;
    std::string link_id;
    std::string site_a;
    std::string site_b;
    std::string tail_id;  // for RecombineTail
    std::string note;
};

/// On surge/failure: create links from free tails (fusing a spare router port
/// with a spare transponder when a site has no whole free tail) until the
/// traffic routes, choosing at each step the candidate that leaves the most
/// spare resources (free tails + 0.4 * free regens). On periodic cleanup:
/// remove links whose removal keeps every tunnel routable, greedily by the
/// same score. The network is mutated according to the returned actions.
std::vector<AdjustAction> topology_adjust(net::MultiLayerNetwork& net, AdjustTrigger trigger,
                                          const std::vector<net::TeTunnel>& traffic,
                                          bool allow_dfcc = true);

// --- capacity planning ---------------------------------------------------------

struct ScenarioRecord {
    std::string failure_id;  // "none" for the nominal slot
    std::string surge_id;    // "base" for the nominal matrix
    bool feasible = false;
    int added_tails = 0;
    int added_regens = 0;
};

struct PlanResult {
    int mode = 1;
    int tails = 0;   // total inventory after planning
    int regens = 0;
    double cost = 0.0;
    std::vector<ScenarioRecord> records;  // from the winning ordering
    std::size_t best_ordering = 0;
};

struct PlanConfig {
    double uncertainty_factor = 1.3;  // mode-1 inflation of the base matrix
    CostModel cost_model;
    int n_orderings = 10;
};

/// Four planning modes over (failure x surge) scenario sweeps:
///   1 - surge matrices replaced by base x uncertainty_factor; fixed
///       IP<->optical mapping; only tunnel rerouting plus purchased parallel
///       capacity on surviving links.
///   2 - mode 1 with the forecast-driven surge matrices used as given.
///   3 - mode 2 plus per-scenario reuse of surviving components: failed links
///       re-routed over the fiber network with free regens, free tails
///       absorbed as extra capacity on a fixed link set.
///   4 - mode 3 plus a dynamic link set: new links from free tails and DFCC
///       port/transponder recombination.
/// Each of n_orderings random scenario orders is planned independently; the
/// cheapest outcome wins.
PlanResult plan_capacity(const net::MultiLayerNetwork& net, const net::TrafficMatrix& base_tm,
                         const std::vector<QosClass>& classes,
                         const std::vector<FailureScenario>& failures,
                         const std::vector<SurgeScenario>& surges, int mode,
                         const PlanConfig& config, num::SeededRng& rng);

// --- scenario file and result formats ------------------------------------------

struct ScenarioSet {
    std::vector<QosClass> classes;
    net::TrafficMatrix base_traffic;
    std::vector<FailureScenario> failures;
    std::vector<SurgeScenario> surges;
    double uncertainty_factor = 1.3;
};

/// JSON schema "optiplan-scen-1".
ScenarioSet scenarios_from_json(const std::string& text);
ScenarioSet load_scenarios(const std::string& path);

std::string plan_results_to_csv(const std::vector<PlanResult>& results);
std::string plan_results_to_json(const std::vector<PlanResult>& results);

}  // namespace optiplan::plan
