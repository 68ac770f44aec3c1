#pragma once

#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "aoisim/traffic/network.hpp"

namespace aoisim::traffic {

struct NoPathError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest-path tree from one origin over non-negative link costs.
// pred_link[node] is the link entering `node` on its shortest path, -1 at the
// origin and for unreachable nodes. Ties are broken toward the lowest link id
// so repeated runs give identical paths.
struct ShortestPathTree {
    int origin = 0;
    std::vector<double> dist;
    std::vector<int> pred_link;
};

inline ShortestPathTree dijkstra_tree(const RoadNetwork& net,
                                      const std::vector<double>& link_costs,
                                      int origin,
                                      const std::vector<std::vector<int>>& out) {
    if (link_costs.size() != net.links.size())
        throw std::invalid_argument("dijkstra: cost vector size mismatch");
    for (double c : link_costs)
        if (c < 0.0) throw std::invalid_argument("dijkstra: negative link cost");

    const double inf = std::numeric_limits<double>::infinity();
    ShortestPathTree tree;
    tree.origin = origin;
    tree.dist.assign(net.nodes.size(), inf);
    tree.pred_link.assign(net.nodes.size(), -1);
    tree.dist[origin] = 0.0;

    using Entry = std::tuple<double, int, int>;  // dist, node, entry link id
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    pq.emplace(0.0, origin, -1);
    std::vector<char> settled(net.nodes.size(), 0);

    while (!pq.empty()) {
        auto [d, u, via] = pq.top();
        pq.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        for (int lid : out[u]) {
            const Link& l = net.links[lid];
            double nd = d + link_costs[lid];
            if (nd < tree.dist[l.to] ||
                (nd == tree.dist[l.to] && !settled[l.to] && lid < tree.pred_link[l.to])) {
                tree.dist[l.to] = nd;
                tree.pred_link[l.to] = lid;
                pq.emplace(nd, l.to, lid);
            }
        }
    }
    return tree;
}

inline ShortestPathTree dijkstra_tree(const RoadNetwork& net,
                                      const std::vector<double>& link_costs,
                                      int origin) {
    return dijkstra_tree(net, link_costs, origin, net.out_links());
}

// Path origin->destination as an ordered list of link ids.
inline std::vector<int> shortest_path(const RoadNetwork& net,
                                      const std::vector<double>& link_costs,
                                      int origin, int destination) {
    if (origin == destination)
        throw std::invalid_argument("shortest_path: origin equals destination");
    ShortestPathTree tree = dijkstra_tree(net, link_costs, origin);
    if (tree.pred_link[destination] < 0)
        throw NoPathError("shortest_path: destination " + std::to_string(destination) +
                          " unreachable from " + std::to_string(origin));
    std::vector<int> path;
    for (int node = destination; node != origin;) {
        int lid = tree.pred_link[node];
        path.push_back(lid);
        node = net.links[lid].from;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

inline double path_cost(const std::vector<int>& path,
                        const std::vector<double>& link_costs) {
    double c = 0.0;
    for (int lid : path) c += link_costs[lid];
    return c;
}

}  // namespace aoisim::traffic
