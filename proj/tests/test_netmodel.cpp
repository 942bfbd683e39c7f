#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "optiplan/netmodel.hpp"
#include "optiplan/rng.hpp"

using namespace optiplan;
using namespace optiplan::net;

namespace {

/// Four sites on a fiber ring with one cross link; all invariants hold.
MultiLayerNetwork sample_net() {
    MultiLayerNetwork n;
    n.system_reach_km = 1500.0;
    for (int i = 1; i <= 4; ++i) {
        const std::string s = "S" + std::to_string(i);
        n.sites.push_back({s, 2, 1, 1});
        n.optical_nodes.push_back({"O" + std::to_string(i), s});
    }
    auto span = [&](const std::string& id, const std::string& a, const std::string& b,
                    double km) { n.fiber_spans.push_back({id, a, b, km, "G-" + id}); };
    span("F12", "O1", "O2", 400.0);
    span("F23", "O2", "O3", 500.0);
    span("F34", "O3", "O4", 400.0);
    span("F41", "O4", "O1", 600.0);
    span("F13", "O1", "O3", 700.0);
    for (int i = 1; i <= 4; ++i) {
        const std::string s = "S" + std::to_string(i);
        for (int k = 0; k < 3; ++k) {
            n.tails.push_back({"T" + s + "-" + std::to_string(k), s, 1,
                               ResourceState::Free, k % 2});
        }
    }
    n.regens.push_back({"R-O2", "O2", ResourceState::Free});
    n.regens.push_back({"R-O3", "O3", ResourceState::Free});
    auto link = [&](const std::string& id, const std::string& a, const std::string& b,
                    std::vector<std::string> path, const std::string& ta,
                    const std::string& tb) {
        IpLink l;
        l.id = id;
        l.a = a;
        l.b = b;
        l.capacity = 4;
        l.optical_path = std::move(path);
        l.tails = {ta, tb};
        n.ip_links.push_back(l);
        n.find_tail(ta)->state = ResourceState::InUse;
        n.find_tail(tb)->state = ResourceState::InUse;
    };
    link("L12", "S1", "S2", {"F12"}, "TS1-0", "TS2-0");
    link("L23", "S2", "S3", {"F23"}, "TS2-1", "TS3-0");
    link("L34", "S3", "S4", {"F34"}, "TS3-1", "TS4-0");
    link("L41", "S4", "S1", {"F41"}, "TS4-1", "TS1-1");
    return n;
}

}  // namespace

TEST_CASE("well-formed sample network validates clean") {
    const auto violations = validate(sample_net());
    for (const auto& v : violations) MESSAGE(v.message);
    CHECK(violations.empty());
}

TEST_CASE("validate flags a segment beyond reach, naming the link") {
    MultiLayerNetwork n = sample_net();
    n.system_reach_km = 450.0;  // F23 is 500 km with no regen on L23
    const auto violations = validate(n);
    bool found = false;
    for (const auto& v : violations) {
        if (v.code == "segment-beyond-reach" && v.subject == "L23") found = true;
    }
    CHECK(found);
}

TEST_CASE("validate flags a tail shared by two links") {
    MultiLayerNetwork n = sample_net();
    n.ip_links[1].tails = {"TS2-0", "TS3-0"};  // TS2-0 already used by L12
    const auto violations = validate(n);
    bool found = false;
    for (const auto& v : violations) {
        if (v.code == "tail-shared" && v.subject == "TS2-0") found = true;
    }
    CHECK(found);
}

TEST_CASE("validate warns on single-router sites") {
    MultiLayerNetwork n = sample_net();
    n.sites[0].routers = 1;
    auto violations = validate(n);
    // tails on router index 1 become out of range too; look for the warning
    bool warned = false;
    for (const auto& v : violations) {
        if (v.code == "few-routers") {
            CHECK(v.severity == Violation::Severity::Warning);
            warned = true;
        }
    }
    CHECK(warned);
}

TEST_CASE("validate is idempotent and side-effect free") {
    MultiLayerNetwork n = sample_net();
    const std::string before = network_to_json(n);
    const auto v1 = validate(n);
    const auto v2 = validate(n);
    CHECK(v1.size() == v2.size());
    CHECK(network_to_json(n) == before);
}

TEST_CASE("optical_route: single span within reach has no regens") {
    MultiLayerNetwork n;
    n.system_reach_km = 1500.0;
    n.optical_nodes.push_back({"A", std::nullopt});
    n.optical_nodes.push_back({"B", std::nullopt});
    n.fiber_spans.push_back({"F", "A", "B", 100.0, "G"});
    const auto route = optical_route(n, "A", "B");
    CHECK(route.spans == std::vector<std::string>{"F"});
    CHECK(route.regen_sites.empty());
    CHECK(route.total_km == doctest::Approx(100.0));
}

TEST_CASE("optical_route: greedy regen placement on a 3x600 km chain") {
    MultiLayerNetwork n;
    n.system_reach_km = 1500.0;
    for (const char* id : {"A", "B", "C", "D"}) n.optical_nodes.push_back({id, std::nullopt});
    n.fiber_spans.push_back({"F1", "A", "B", 600.0, "G1"});
    n.fiber_spans.push_back({"F2", "B", "C", 600.0, "G2"});
    n.fiber_spans.push_back({"F3", "C", "D", 600.0, "G3"});
    const auto route = optical_route(n, "A", "D");
    // hand walk: 600, 1200 <= 1500, +600 would hit 1800 -> regen at C
    CHECK(route.regen_sites == std::vector<std::string>{"C"});
    CHECK(route.total_km == doctest::Approx(1800.0));
}

TEST_CASE("optical_route: disconnected nodes raise NoPath") {
    MultiLayerNetwork n;
    n.optical_nodes.push_back({"A", std::nullopt});
    n.optical_nodes.push_back({"B", std::nullopt});
    CHECK_THROWS_AS(optical_route(n, "A", "B"), NoPath);
}

TEST_CASE("optical_route: a single span beyond reach is unreachable") {
    MultiLayerNetwork n;
    n.system_reach_km = 500.0;
    n.optical_nodes.push_back({"A", std::nullopt});
    n.optical_nodes.push_back({"B", std::nullopt});
    n.fiber_spans.push_back({"F", "A", "B", 900.0, "G"});
    CHECK_THROWS_AS(optical_route(n, "A", "B"), UnreachableSegment);
}

TEST_CASE("optical_route matches exhaustive enumeration on random graphs") {
    num::SeededRng rng(314);
    for (int trial = 0; trial < 25; ++trial) {
        const int n_nodes = 4 + static_cast<int>(rng.below(5));  // 4..8
        MultiLayerNetwork n;
        n.system_reach_km = 1e9;  // no regen effects on km-optimality
        for (int i = 0; i < n_nodes; ++i) {
            n.optical_nodes.push_back({"N" + std::to_string(i), std::nullopt});
        }
        int span_id = 0;
        for (int i = 0; i < n_nodes; ++i) {
            for (int j = i + 1; j < n_nodes; ++j) {
                if (rng.uniform() < 0.55) {
                    n.fiber_spans.push_back({"F" + std::to_string(span_id++),
                                             "N" + std::to_string(i), "N" + std::to_string(j),
                                             50.0 + 950.0 * rng.uniform(),
                                             "G" + std::to_string(span_id)});
                }
            }
        }
        // exhaustive DFS over simple paths, the km oracle
        std::map<std::string, std::vector<const FiberSpan*>> adj;
        for (const auto& s : n.fiber_spans) {
            adj[s.a].push_back(&s);
            adj[s.b].push_back(&s);
        }
        double best = std::numeric_limits<double>::infinity();
        std::set<std::string> visited;
        const std::string src = "N0", dst = "N" + std::to_string(n_nodes - 1);
        auto dfs = [&](auto&& self, const std::string& at, double km) -> void {
            if (at == dst) {
                best = std::min(best, km);
                return;
            }
            visited.insert(at);
            for (const FiberSpan* s : adj[at]) {
                const std::string& next = s->a == at ? s->b : s->a;
                if (!visited.count(next)) self(self, next, km + s->length_km);
            }
            visited.erase(at);
        };
        dfs(dfs, src, 0.0);
        if (std::isinf(best)) {
            CHECK_THROWS_AS(optical_route(n, src, dst), NoPath);
        } else {
            const auto route = optical_route(n, src, dst);
            CHECK(route.total_km == doctest::Approx(best).epsilon(1e-9));
        }
    }
}

TEST_CASE("regen count equals ceil(total/reach)-1 on uniform chains") {
    for (int m : {2, 3}) {
        for (int k = 1; k <= 10; ++k) {
            MultiLayerNetwork n;
            const double span_km = 500.0;
            n.system_reach_km = m * span_km;
            for (int i = 0; i <= k; ++i) {
                n.optical_nodes.push_back({"N" + std::to_string(i), std::nullopt});
            }
            for (int i = 0; i < k; ++i) {
                n.fiber_spans.push_back({"F" + std::to_string(i), "N" + std::to_string(i),
                                         "N" + std::to_string(i + 1), span_km, "G"});
            }
            const auto route = optical_route(n, "N0", "N" + std::to_string(k));
            const int expected =
                static_cast<int>(std::ceil(k * span_km / n.system_reach_km)) - 1;
            CHECK(static_cast<int>(route.regen_sites.size()) == expected);
        }
    }
}

TEST_CASE("path_latency") {
    MultiLayerNetwork n = sample_net();
    CHECK(path_latency(n, {}) == 0.0);

    MultiLayerNetwork single;
    single.system_reach_km = 2000.0;
    single.sites.push_back({"A", 2, 0, 0});
    single.sites.push_back({"B", 2, 0, 0});
    single.optical_nodes.push_back({"OA", "A"});
    single.optical_nodes.push_back({"OB", "B"});
    single.fiber_spans.push_back({"F", "OA", "OB", 1000.0, "G"});
    IpLink l;
    l.id = "L";
    l.a = "A";
    l.b = "B";
    l.optical_path = {"F"};
    single.ip_links.push_back(l);
    CHECK(path_latency(single, {"L"}) == doctest::Approx(5.0));

    // two links 400 km + 600 km -> 5.0 ms
    const MultiLayerNetwork ring = sample_net();
    CHECK(path_latency(ring, {"L41", "L12"}) == doctest::Approx(5.0));
    CHECK_THROWS_AS(path_latency(ring, {"L12", "L34"}), BrokenChain);
}

TEST_CASE("network JSON round trip is stable") {
    const MultiLayerNetwork n = sample_net();
    const std::string a = network_to_json(n);
    const MultiLayerNetwork parsed = network_from_json(a);
    CHECK(network_to_json(parsed) == a);
    CHECK(parsed.ip_links.size() == n.ip_links.size());
    CHECK(parsed.system_reach_km == n.system_reach_km);
}

TEST_CASE("network JSON rejects wrong schema") {
    CHECK_THROWS_AS(network_from_json("{\"schema\":\"other\"}"), ParseError);
    CHECK_THROWS_AS(network_from_json("not json"), ParseError);
}
