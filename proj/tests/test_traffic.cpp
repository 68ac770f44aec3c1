#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "aoisim/common/rng.hpp"
#include "aoisim/traffic/assignment.hpp"
#include "aoisim/traffic/bpr.hpp"
#include "aoisim/traffic/network.hpp"
#include "aoisim/traffic/shortest_path.hpp"

using namespace aoisim;
using namespace aoisim::traffic;

namespace {

RoadNetwork two_node_net(double cost_link = 5.0) {
    RoadNetwork net;
    net.nodes = {0, 1};
    net.links.push_back({0, 0, 1, 100.0, cost_link, 30.0});
    net.links.push_back({1, 1, 0, 100.0, cost_link, 30.0});
    return net;
}

// 0 -> {1,2} -> 3, both routes cost 2 under unit link costs.
RoadNetwork diamond_net() {
    RoadNetwork net;
    net.nodes = {0, 1, 2, 3};
    net.links.push_back({0, 0, 1, 100.0, 1.0, 30.0});
    net.links.push_back({1, 1, 3, 100.0, 1.0, 30.0});
    net.links.push_back({2, 0, 2, 100.0, 1.0, 30.0});
    net.links.push_back({3, 2, 3, 100.0, 1.0, 30.0});
    net.links.push_back({4, 3, 0, 100.0, 1.0, 30.0});  // return edge for connectivity
    return net;
}

std::vector<double> free_flow_costs(const RoadNetwork& net) {
    std::vector<double> c(net.links.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = net.links[i].free_flow_time_s;
    return c;
}

// Exhaustive simple-path minimum cost, or infinity when unreachable.
double brute_force_cost(const RoadNetwork& net, const std::vector<double>& costs,
                        int origin, int dest) {
    auto out = net.out_links();
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> visited(net.nodes.size(), 0);
    std::function<void(int, double)> dfs = [&](int u, double acc) {
        if (u == dest) {
            best = std::min(best, acc);
            return;
        }
        visited[u] = 1;
        for (int lid : out[u]) {
            const Link& l = net.links[lid];
            if (!visited[l.to]) dfs(l.to, acc + costs[lid]);
        }
        visited[u] = 0;
    };
    dfs(origin, 0.0);
    return best;
}

// All simple paths origin->dest as link-id lists.
std::vector<std::vector<int>> enumerate_paths(const RoadNetwork& net, int origin,
                                              int dest) {
    auto out = net.out_links();
    std::vector<std::vector<int>> paths;
    std::vector<int> cur;
    std::vector<char> visited(net.nodes.size(), 0);
    std::function<void(int)> dfs = [&](int u) {
        if (u == dest) {
            paths.push_back(cur);
            return;
        }
        visited[u] = 1;
        for (int lid : out[u]) {
            const Link& l = net.links[lid];
            if (visited[l.to]) continue;
            cur.push_back(lid);
            dfs(l.to);
            cur.pop_back();
        }
        visited[u] = 0;
    };
    dfs(origin);
    return paths;
}

RoadNetwork random_graph(Rng& rng, int& origin, int& dest) {
    RoadNetwork net;
    int n = 2 + static_cast<int>(rng.uniform_int(7));  // 2..8 nodes
    for (int i = 0; i < n; ++i) net.nodes.push_back(i);
    int next_id = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b || rng.uniform() > 0.45) continue;
            net.links.push_back({next_id++, a, b, 100.0, rng.uniform(0.1, 10.0), 30.0});
        }
    origin = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    do {
        dest = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    } while (dest == origin);
    return net;
}

}  // namespace

TEST_CASE("bpr travel time matches the closed form", "[traffic][bpr]") {
    CHECK(bpr_travel_time(18.0, 0.0, 30.0) == Catch::Approx(18.0).epsilon(1e-14));
    CHECK(bpr_travel_time(18.0, 30.0, 30.0) == Catch::Approx(20.7).epsilon(1e-14));
    CHECK(bpr_travel_time(18.0, 60.0, 30.0) == Catch::Approx(61.2).epsilon(1e-14));
    // alpha = 0 kills the congestion term entirely
    CHECK(bpr_travel_time(18.0, 90.0, 30.0, 0.0, 4.0) == Catch::Approx(18.0));
    // non-default shape
    CHECK(bpr_travel_time(10.0, 3.0, 2.0, 0.5, 2.0) == Catch::Approx(21.25));
}

TEST_CASE("bpr travel time is strictly increasing in flow", "[traffic][bpr]") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        double t0 = rng.uniform(1.0, 60.0);
        double cap = rng.uniform(5.0, 100.0);
        double prev = bpr_travel_time(t0, 0.0, cap);
        for (double f = 5.0; f <= 200.0; f += 5.0) {
            double t = bpr_travel_time(t0, f, cap);
            CHECK(t > prev);
            prev = t;
        }
    }
}

TEST_CASE("bpr travel time rejects bad arguments", "[traffic][bpr]") {
    CHECK_THROWS_AS(bpr_travel_time(0.0, 1.0, 30.0), std::invalid_argument);
    CHECK_THROWS_AS(bpr_travel_time(-1.0, 1.0, 30.0), std::invalid_argument);
    CHECK_THROWS_AS(bpr_travel_time(18.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(bpr_travel_time(18.0, -0.1, 30.0), std::invalid_argument);
}

TEST_CASE("capacity estimate degrades linearly with staleness", "[traffic][bpr]") {
    CHECK(estimate_capacity(30.0, 0.0, 100.0, 10.0) == Catch::Approx(30.0));
    CHECK(estimate_capacity(30.0, 100.0, 100.0, 10.0) == Catch::Approx(20.0));
    CHECK(estimate_capacity(30.0, 50.0, 100.0, 10.0) == Catch::Approx(25.0));
    // delta_m = 0: staleness has no effect
    for (double aoi : {0.0, 13.0, 55.0, 100.0})
        CHECK(estimate_capacity(30.0, aoi, 100.0, 0.0) == Catch::Approx(30.0));
    // floored once the deviation swallows the capacity
    CHECK(estimate_capacity(30.0, 100.0, 100.0, 1e6) == Catch::Approx(kCapacityFloorVph));
    CHECK(estimate_capacity(30.0, 100.0, 100.0, 1e6, 2.5) == Catch::Approx(2.5));
}

TEST_CASE("capacity estimate is non-increasing in aoi and delta_m", "[traffic][bpr]") {
    for (double dm : {0.0, 5.0, 10.0, 20.0}) {
        double prev = estimate_capacity(30.0, 0.0, 100.0, dm);
        for (double aoi = 10.0; aoi <= 100.0; aoi += 10.0) {
            double c = estimate_capacity(30.0, aoi, 100.0, dm);
            CHECK(c <= prev);
            prev = c;
        }
    }
    for (double aoi : {0.0, 40.0, 100.0}) {
        double prev = estimate_capacity(30.0, aoi, 100.0, 0.0);
        for (double dm = 5.0; dm <= 40.0; dm += 5.0) {
            double c = estimate_capacity(30.0, aoi, 100.0, dm);
            CHECK(c <= prev);
            prev = c;
        }
    }
}

TEST_CASE("capacity estimate rejects bad arguments", "[traffic][bpr]") {
    CHECK_THROWS_AS(estimate_capacity(30.0, -1.0, 100.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_capacity(30.0, 101.0, 100.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_capacity(30.0, 1.0, 0.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_capacity(30.0, 1.0, 100.0, -5.0), std::invalid_argument);
}

TEST_CASE("dijkstra on a two-node network", "[traffic][dijkstra]") {
    RoadNetwork net = two_node_net(5.0);
    auto tree = dijkstra_tree(net, free_flow_costs(net), 0);
    CHECK(tree.dist[0] == 0.0);
    CHECK(tree.dist[1] == 5.0);
    CHECK(tree.pred_link[0] == -1);
    CHECK(tree.pred_link[1] == 0);
    auto path = shortest_path(net, free_flow_costs(net), 0, 1);
    REQUIRE(path.size() == 1);
    CHECK(path[0] == 0);
    CHECK(path_cost(path, free_flow_costs(net)) == 5.0);
}

TEST_CASE("dijkstra breaks cost ties toward the lowest link id", "[traffic][dijkstra]") {
    RoadNetwork net = diamond_net();
    auto costs = free_flow_costs(net);
    auto path = shortest_path(net, costs, 0, 3);
    REQUIRE(path.size() == 2);
    CHECK(path[0] == 0);
    CHECK(path[1] == 1);
    CHECK(path_cost(path, costs) == Catch::Approx(2.0));
    // perturb so the other branch wins outright
    costs[1] = 3.0;
    path = shortest_path(net, costs, 0, 3);
    REQUIRE(path.size() == 2);
    CHECK(path[0] == 2);
    CHECK(path[1] == 3);
}

TEST_CASE("dijkstra distances on the default grid match hand counts",
          "[traffic][dijkstra]") {
    RoadNetwork net = make_grid_network();
    auto tree = dijkstra_tree(net, free_flow_costs(net), 0);
    // along the top row, then down the last column
    CHECK(tree.dist[3] == Catch::Approx(3 * 18.0));
    CHECK(tree.dist[12] == Catch::Approx(3 * 31.0));
    CHECK(tree.dist[15] == Catch::Approx(3 * 18.0 + 3 * 31.0));
    CHECK(tree.dist[5] == Catch::Approx(18.0 + 31.0));
}

TEST_CASE("dijkstra equals exhaustive enumeration on random graphs",
          "[traffic][dijkstra]") {
    Rng rng(7);
    int solved = 0;
    for (int trial = 0; trial < 250; ++trial) {
        int origin = 0, dest = 0;
        RoadNetwork net = random_graph(rng, origin, dest);
        auto costs = free_flow_costs(net);
        double oracle = brute_force_cost(net, costs, origin, dest);
        if (std::isinf(oracle)) {
            CHECK_THROWS_AS(shortest_path(net, costs, origin, dest), NoPathError);
            continue;
        }
        auto path = shortest_path(net, costs, origin, dest);
        CHECK(path_cost(path, costs) == Catch::Approx(oracle).epsilon(1e-12));
        ++solved;
    }
    CHECK(solved > 100);  // the graph generator must exercise the solved branch
}

TEST_CASE("dijkstra rejects bad inputs", "[traffic][dijkstra]") {
    RoadNetwork net = two_node_net();
    std::vector<double> costs{1.0};
    CHECK_THROWS_AS(dijkstra_tree(net, costs, 0), std::invalid_argument);
    costs = {-1.0, 1.0};
    CHECK_THROWS_AS(dijkstra_tree(net, costs, 0), std::invalid_argument);
    CHECK_THROWS_AS(shortest_path(net, free_flow_costs(net), 0, 0),
                    std::invalid_argument);
}

TEST_CASE("all-or-nothing loads each od onto one path", "[traffic][assignment]") {
    RoadNetwork net = two_node_net();
    auto flows = all_or_nothing(net, free_flow_costs(net), {{0, 1, 7.0}});
    CHECK(flows.flow_vph[0] == Catch::Approx(7.0));
    CHECK(flows.flow_vph[1] == 0.0);

    // two ods sharing a link add up
    RoadNetwork chain;
    chain.nodes = {0, 1, 2};
    chain.links.push_back({0, 0, 1, 100.0, 1.0, 30.0});
    chain.links.push_back({1, 1, 2, 100.0, 1.0, 30.0});
    auto f2 = all_or_nothing(chain, free_flow_costs(chain),
                             {{0, 2, 3.0}, {1, 2, 4.0}});
    CHECK(f2.flow_vph[0] == Catch::Approx(3.0));
    CHECK(f2.flow_vph[1] == Catch::Approx(7.0));

    // diamond tie goes entirely to the tie-broken path
    RoadNetwork dia = diamond_net();
    auto f3 = all_or_nothing(dia, free_flow_costs(dia), {{0, 3, 10.0}});
    CHECK(f3.flow_vph[0] == Catch::Approx(10.0));
    CHECK(f3.flow_vph[1] == Catch::Approx(10.0));
    CHECK(f3.flow_vph[2] == 0.0);
    CHECK(f3.flow_vph[3] == 0.0);

    // zero demand contributes nothing
    auto f4 = all_or_nothing(dia, free_flow_costs(dia), {{0, 3, 0.0}});
    for (double f : f4.flow_vph) CHECK(f == 0.0);
}

TEST_CASE("all-or-nothing flows conserve demand at every node",
          "[traffic][assignment]") {
    RoadNetwork net = make_grid_network();
    auto flows = all_or_nothing(net, free_flow_costs(net), net.od_pairs);
    std::vector<double> balance(net.nodes.size(), 0.0);
    for (const Link& l : net.links) {
        balance[l.from] -= flows.flow_vph[l.id];
        balance[l.to] += flows.flow_vph[l.id];
    }
    for (const OdPair& od : net.od_pairs) {
        balance[od.origin] += od.demand_vph;
        balance[od.destination] -= od.demand_vph;
    }
    for (double b : balance) CHECK(b == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("frank-wolfe converges immediately on a single-route network",
          "[traffic][assignment]") {
    RoadNetwork net = two_node_net();
    std::vector<double> caps{30.0, 30.0};
    auto flows = frank_wolfe_ue(net, caps, {{0, 1, 12.0}});
    CHECK(flows.converged);
    CHECK(flows.iterations == 1);
    CHECK(flows.flow_vph[0] == Catch::Approx(12.0));
    REQUIRE_FALSE(flows.gap_trace.empty());
    CHECK(flows.gap_trace.back() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("frank-wolfe splits symmetric parallel links evenly",
          "[traffic][assignment]") {
    RoadNetwork net;
    net.nodes = {0, 1};
    net.links.push_back({0, 0, 1, 100.0, 10.0, 30.0});
    net.links.push_back({1, 0, 1, 100.0, 10.0, 30.0});
    net.links.push_back({2, 1, 0, 100.0, 10.0, 30.0});
    std::vector<double> caps{30.0, 30.0, 30.0};
    auto flows = frank_wolfe_ue(net, caps, {{0, 1, 40.0}});
    REQUIRE(flows.converged);
    CHECK(flows.flow_vph[0] == Catch::Approx(20.0).margin(0.2));
    CHECK(flows.flow_vph[1] == Catch::Approx(20.0).margin(0.2));
}

TEST_CASE("frank-wolfe matches the bisection oracle on two parallel links",
          "[traffic][assignment]") {
    RoadNetwork net;
    net.nodes = {0, 1};
    net.links.push_back({0, 0, 1, 100.0, 10.0, 30.0});
    net.links.push_back({1, 0, 1, 100.0, 20.0, 30.0});
    net.links.push_back({2, 1, 0, 100.0, 10.0, 30.0});
    std::vector<double> caps{30.0, 30.0, 30.0};
    // large enough that the slow link must carry flow (interior equilibrium)
    const double demand = 80.0;

    // 1-D oracle: find f0 equalizing the two route times
    auto t = [&](int lid, double f) {
        return bpr_travel_time(net.links[lid].free_flow_time_s, f, caps[lid]);
    };
    double lo = 0.0, hi = demand;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (t(0, mid) < t(1, demand - mid) ? lo : hi) = mid;
    }
    double f0_oracle = 0.5 * (lo + hi);
    REQUIRE(t(0, f0_oracle) == Catch::Approx(t(1, demand - f0_oracle)).epsilon(1e-6));

    FrankWolfeOptions opt;
    opt.tolerance = 1e-7;
    auto flows = frank_wolfe_ue(net, caps, {{0, 1, demand}}, opt);
    REQUIRE(flows.converged);
    CHECK(std::abs(flows.flow_vph[0] - f0_oracle) <= 0.005 * demand);
    CHECK(std::abs(flows.flow_vph[1] - (demand - f0_oracle)) <= 0.005 * demand);
    // Wardrop: both used routes carry equal times
    CHECK(t(0, flows.flow_vph[0]) ==
          Catch::Approx(t(1, flows.flow_vph[1])).epsilon(1e-3));
}

TEST_CASE("frank-wolfe satisfies wardrop equilibrium on enumerable networks",
          "[traffic][assignment]") {
    RoadNetwork net = diamond_net();
    // asymmetric free-flow times force a nontrivial split
    net.links[0].free_flow_time_s = 2.0;
    std::vector<double> caps(net.links.size(), 20.0);
    FrankWolfeOptions opt;
    opt.tolerance = 1e-7;
    auto flows = frank_wolfe_ue(net, caps, {{0, 3, 50.0}}, opt);
    REQUIRE(flows.converged);

    std::vector<double> cost(net.links.size());
    for (std::size_t i = 0; i < cost.size(); ++i)
        cost[i] = bpr_travel_time(net.links[i].free_flow_time_s, flows.flow_vph[i],
                                  caps[i]);
    auto paths = enumerate_paths(net, 0, 3);
    REQUIRE(paths.size() == 2);
    double used_cost = -1.0;
    for (const auto& p : paths) {
        double pc = path_cost(p, cost);
        double pf = flows.flow_vph[p[0]];
        if (pf > 1e-6) {
            if (used_cost < 0.0) used_cost = pc;
            CHECK(pc == Catch::Approx(used_cost).epsilon(1e-3));
        } else {
            CHECK(pc >= used_cost * (1.0 - 1e-3));
        }
    }

    // demand conservation across the cut into node 3
    CHECK(flows.flow_vph[1] + flows.flow_vph[3] == Catch::Approx(50.0).margin(1e-6));
}

TEST_CASE("frank-wolfe reports non-convergence at the iteration cap",
          "[traffic][assignment]") {
    GridSpec quiet;
    quiet.od_demand_vph = 0.0;
    RoadNetwork net = make_grid_network(quiet);
    std::vector<double> caps(net.links.size(), 30.0);
    FrankWolfeOptions opt;
    opt.tolerance = 1e-12;
    opt.max_iterations = 3;
    // one heavy corner-to-corner movement: the lattice offers many equal
    // free-flow routes, so congestion keeps flipping the shortest path
    auto flows = frank_wolfe_ue(net, caps, {{0, 15, 400.0}}, opt);
    CHECK_FALSE(flows.converged);
    CHECK(flows.iterations == 3);
    CHECK(flows.gap_trace.size() == 3);
    CHECK(flows.gap_trace.back() > opt.tolerance);
}

TEST_CASE("frank-wolfe gap trace ends below tolerance", "[traffic][assignment]") {
    RoadNetwork net = make_grid_network();
    std::vector<double> caps(net.links.size(), 30.0);
    auto flows = frank_wolfe_ue(net, caps, net.od_pairs);
    REQUIRE(flows.converged);
    CHECK(flows.gap_trace.back() <= 1e-4);
    CHECK(static_cast<int>(flows.gap_trace.size()) == flows.iterations);
}

TEST_CASE("frank-wolfe rejects bad inputs", "[traffic][assignment]") {
    RoadNetwork net = two_node_net();
    CHECK_THROWS_AS(frank_wolfe_ue(net, {30.0}, {{0, 1, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(frank_wolfe_ue(net, {30.0, 0.0}, {{0, 1, 1.0}}),
                    std::invalid_argument);
    FrankWolfeOptions opt;
    opt.tolerance = 0.0;
    CHECK_THROWS_AS(frank_wolfe_ue(net, {30.0, 30.0}, {{0, 1, 1.0}}, opt),
                    std::invalid_argument);
    RoadNetwork split;  // 1 -> 0 missing entirely, so od 1->0 has no route
    split.nodes = {0, 1};
    split.links.push_back({0, 0, 1, 100.0, 1.0, 30.0});
    CHECK_THROWS_AS(frank_wolfe_ue(split, {30.0}, {{1, 0, 1.0}}), NoPathError);
}

TEST_CASE("network metrics under zero flow fall back to free-flow means",
          "[traffic][assignment]") {
    RoadNetwork net = make_grid_network();
    LinkFlows flows;
    flows.flow_vph.assign(net.links.size(), 0.0);
    auto m = network_metrics(flows, net);
    CHECK(m.avg_travel_time_s == Catch::Approx((24 * 18.0 + 24 * 31.0) / 48.0));
    CHECK(m.avg_v_over_c == 0.0);
}

TEST_CASE("network metrics match a hand-computed two-link case",
          "[traffic][assignment]") {
    RoadNetwork net;
    net.nodes = {0, 1};
    net.links.push_back({0, 0, 1, 100.0, 10.0, 20.0});
    net.links.push_back({1, 0, 1, 100.0, 20.0, 30.0});
    LinkFlows flows;
    flows.flow_vph = {10.0, 30.0};
    auto m = network_metrics(flows, net);
    // t0 = 10*(1+0.15*0.5^4) = 10.09375, t1 = 20*(1+0.15) = 23
    CHECK(m.avg_travel_time_s ==
          Catch::Approx((10.0 * 10.09375 + 30.0 * 23.0) / 40.0).epsilon(1e-12));
    CHECK(m.avg_v_over_c == Catch::Approx((10.0 * 0.5 + 30.0 * 1.0) / 40.0));

    // capacity override rescales V/C
    auto m2 = network_metrics(flows, net, std::vector<double>{10.0, 30.0});
    CHECK(m2.avg_v_over_c == Catch::Approx((10.0 * 1.0 + 30.0 * 1.0) / 40.0));
    CHECK_THROWS_AS(network_metrics(flows, net, std::vector<double>{10.0}),
                    std::invalid_argument);
}

TEST_CASE("default grid equilibrium stays below the congestion knee",
          "[traffic][assignment]") {
    RoadNetwork net = make_grid_network();
    std::vector<double> caps(net.links.size());
    for (std::size_t i = 0; i < caps.size(); ++i) caps[i] = net.links[i].capacity_vph;
    auto flows = frank_wolfe_ue(net, caps, net.od_pairs);
    REQUIRE(flows.converged);
    auto m = network_metrics(flows, net, caps);
    // frozen reference solution for the default 16-node grid
    CHECK(m.avg_travel_time_s == Catch::Approx(24.6754).margin(0.02));
    CHECK(m.avg_v_over_c == Catch::Approx(0.453333).margin(0.002));
    CHECK(m.avg_v_over_c < 1.0);
}

TEST_CASE("grid generator produces the documented topology", "[traffic][network]") {
    RoadNetwork net = make_grid_network();
    CHECK(net.node_count() == 16);
    CHECK(net.link_count() == 48);
    CHECK(net.od_pairs.size() == 240);
    CHECK_NOTHROW(net.validate());
    int horizontal = 0, vertical = 0;
    for (const Link& l : net.links) {
        if (l.free_flow_time_s == 18.0) {
            ++horizontal;
            CHECK(l.length_m == 250.0);
        } else {
            CHECK(l.free_flow_time_s == 31.0);
            CHECK(l.length_m == 433.0);
            ++vertical;
        }
        CHECK(l.capacity_vph == 30.0);
    }
    CHECK(horizontal == 24);
    CHECK(vertical == 24);

    GridSpec no_demand;
    no_demand.od_demand_vph = 0.0;
    CHECK(make_grid_network(no_demand).od_pairs.empty());

    auto out = make_grid_network().out_links();
    for (const auto& ids : out) CHECK(std::is_sorted(ids.begin(), ids.end()));
}

TEST_CASE("network text format round-trips", "[traffic][network]") {
    RoadNetwork net = make_grid_network();
    std::stringstream ss;
    save_network(net, ss);
    RoadNetwork back = load_network(ss);
    REQUIRE(back.node_count() == net.node_count());
    REQUIRE(back.link_count() == net.link_count());
    REQUIRE(back.od_pairs.size() == net.od_pairs.size());
    for (int i = 0; i < net.link_count(); ++i) {
        CHECK(back.links[i].from == net.links[i].from);
        CHECK(back.links[i].to == net.links[i].to);
        CHECK(back.links[i].length_m == net.links[i].length_m);
        CHECK(back.links[i].free_flow_time_s == net.links[i].free_flow_time_s);
        CHECK(back.links[i].capacity_vph == net.links[i].capacity_vph);
    }
}

TEST_CASE("network loader flags malformed input with the line number",
          "[traffic][network]") {
    auto load = [](const std::string& text) {
        std::istringstream in(text);
        return load_network(in);
    };
    CHECK_NOTHROW(load("# comment only\n\nnode 0\nnode 1\n"
                       "link 0 0 1 100 5 30\nlink 1 1 0 100 5 30\nod 0 1 2\n"));
    CHECK_THROWS_WITH(load("node 0\nnode 1\nlink 0 0 1\n"),
                      Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(load("street 0\n"),
                      Catch::Matchers::ContainsSubstring("unknown record"));
    CHECK_THROWS_AS(load("node zero\n"), std::invalid_argument);
    CHECK_THROWS_AS(load_network_file("/nonexistent/net.txt"), std::invalid_argument);
}

TEST_CASE("network validation rejects structural defects", "[traffic][network]") {
    RoadNetwork net = two_node_net();
    net.od_pairs = {{0, 1, 1.0}};
    CHECK_NOTHROW(net.validate());

    RoadNetwork dup = net;
    dup.nodes = {0, 0};
    CHECK_THROWS_WITH(dup.validate(), Catch::Matchers::ContainsSubstring("duplicate"));

    RoadNetwork ghost = net;
    ghost.links[0].to = 9;
    CHECK_THROWS_WITH(ghost.validate(),
                      Catch::Matchers::ContainsSubstring("undeclared"));

    RoadNetwork ooo = net;
    std::swap(ooo.links[0].id, ooo.links[1].id);
    CHECK_THROWS_WITH(ooo.validate(),
                      Catch::Matchers::ContainsSubstring("ids must be 0..L-1"));

    RoadNetwork badcap = net;
    badcap.links[0].capacity_vph = 0.0;
    CHECK_THROWS_AS(badcap.validate(), std::invalid_argument);

    RoadNetwork selfod = net;
    selfod.od_pairs = {{0, 0, 1.0}};
    CHECK_THROWS_AS(selfod.validate(), std::invalid_argument);

    RoadNetwork negdemand = net;
    negdemand.od_pairs = {{0, 1, -1.0}};
    CHECK_THROWS_AS(negdemand.validate(), std::invalid_argument);

    // od present but no return edge: not strongly connected
    RoadNetwork oneway;
    oneway.nodes = {0, 1};
    oneway.links.push_back({0, 0, 1, 100.0, 1.0, 30.0});
    oneway.od_pairs = {{0, 1, 1.0}};
    CHECK_THROWS_WITH(oneway.validate(),
                      Catch::Matchers::ContainsSubstring("strongly connected"));
}
