#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoisim::traffic {

struct Link {
    int id = 0;
    int from = 0;
    int to = 0;
    double length_m = 0.0;
    double free_flow_time_s = 0.0;
    double capacity_vph = 0.0;  // true capacity
};

struct OdPair {
    int origin = 0;
    int destination = 0;
    double demand_vph = 0.0;
};

// Directed road graph plus the trip table assigned onto it.
class RoadNetwork {
public:
    std::vector<int> nodes;
    std::vector<Link> links;
    std::vector<OdPair> od_pairs;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int link_count() const { return static_cast<int>(links.size()); }

    // Outgoing link ids per node, sorted ascending so that iteration order
    // (and therefore shortest-path tie-breaking) is deterministic.
    std::vector<std::vector<int>> out_links() const {
        std::vector<std::vector<int>> out(nodes.size());
        for (const Link& l : links) out[l.from].push_back(l.id);
        for (auto& v : out) std::sort(v.begin(), v.end());
        return out;
    }

    // Throws std::invalid_argument on any structural defect. Assignment on a
    // broken network must fail loudly rather than produce numbers.
    void validate() const {
        std::set<int> node_set(nodes.begin(), nodes.end());
        if (node_set.size() != nodes.size())
            throw std::invalid_argument("network: duplicate node id");
        for (const Link& l : links) {
            if (!node_set.count(l.from) || !node_set.count(l.to))
                throw std::invalid_argument("network: link " + std::to_string(l.id) +
                                            " references undeclared node");
            if (l.free_flow_time_s <= 0.0)
                throw std::invalid_argument("network: link " + std::to_string(l.id) +
                                            " free_flow_time must be > 0");
            if (l.capacity_vph <= 0.0)
                throw std::invalid_argument("network: link " + std::to_string(l.id) +
                                            " capacity must be > 0");
        }
        for (std::size_t i = 0; i < links.size(); ++i)
            if (links[i].id != static_cast<int>(i))
                throw std::invalid_argument("network: link ids must be 0..L-1 in order");
        for (const OdPair& od : od_pairs) {
            if (!node_set.count(od.origin) || !node_set.count(od.destination))
                throw std::invalid_argument("network: od pair references undeclared node");
            if (od.demand_vph < 0.0)
                throw std::invalid_argument("network: od demand must be >= 0");
            if (od.origin == od.destination)
                throw std::invalid_argument("network: od origin equals destination");
        }
        check_od_connectivity();
    }

private:
    std::vector<char> reach(int start, bool reverse) const {
        std::vector<std::vector<int>> adj(nodes.size());
        for (const Link& l : links)
            reverse ? adj[l.to].push_back(l.from) : adj[l.from].push_back(l.to);
        std::vector<char> seen(nodes.size(), 0);
        std::queue<int> q;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    q.push(v);
                }
        }
        return seen;
    }

    // Every node touched by an OD pair must be mutually reachable, otherwise
    // some demand cannot be routed.
    void check_od_connectivity() const {
        if (od_pairs.empty()) return;
        std::set<int> od_nodes;
        for (const OdPair& od : od_pairs) {
            od_nodes.insert(od.origin);
            od_nodes.insert(od.destination);
        }
        int anchor = *od_nodes.begin();
        std::vector<char> fwd = reach(anchor, false);
        std::vector<char> bwd = reach(anchor, true);
        for (int n : od_nodes)
            if (!fwd[n] || !bwd[n])
                throw std::invalid_argument(
                    "network: od nodes are not strongly connected (node " +
                    std::to_string(n) + ")");
    }
};

struct GridSpec {
    int rows = 4;
    int cols = 4;
    double horizontal_length_m = 250.0;
    double vertical_length_m = 433.0;
    double horizontal_fftime_s = 18.0;
    double vertical_fftime_s = 31.0;
    double capacity_vph = 30.0;
    double od_demand_vph = 1.0;  // per ordered node pair
};

// Urban grid: every edge of the lattice in both directions, all ordered node
// pairs as OD demand. The default spec gives 16 nodes / 48 links / 240 pairs.
inline RoadNetwork make_grid_network(const GridSpec& spec = {}) {
    RoadNetwork net;
    auto node_id = [&](int r, int c) { return r * spec.cols + c; };
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) net.nodes.push_back(node_id(r, c));

    auto add_link = [&](int from, int to, double len, double fft) {
        Link l;
        l.id = static_cast<int>(net.links.size());
        l.from = from;
        l.to = to;
        l.length_m = len;
        l.free_flow_time_s = fft;
        l.capacity_vph = spec.capacity_vph;
        net.links.push_back(l);
    };

    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c + 1 < spec.cols; ++c) {
            add_link(node_id(r, c), node_id(r, c + 1), spec.horizontal_length_m,
                     spec.horizontal_fftime_s);
            add_link(node_id(r, c + 1), node_id(r, c), spec.horizontal_length_m,
                     spec.horizontal_fftime_s);
        }
    for (int r = 0; r + 1 < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            add_link(node_id(r, c), node_id(r + 1, c), spec.vertical_length_m,
                     spec.vertical_fftime_s);
            add_link(node_id(r + 1, c), node_id(r, c), spec.vertical_length_m,
                     spec.vertical_fftime_s);
        }

    if (spec.od_demand_vph > 0.0)
        for (int a : net.nodes)
            for (int b : net.nodes)
                if (a != b) net.od_pairs.push_back({a, b, spec.od_demand_vph});
    return net;
}

// Plain text network format, one record per line:
//   node <id>
//   link <id> <from> <to> <length_m> <fftime_s> <capacity_vph>
//   od <origin> <destination> <demand_vph>
// Blank lines and lines starting with '#' are ignored.
inline RoadNetwork load_network(std::istream& in) {
    RoadNetwork net;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string::size_type hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string kind;
        if (!(ss >> kind)) continue;
        auto bad = [&](const std::string& what) {
            throw std::invalid_argument("network file line " + std::to_string(lineno) +
                                        ": " + what);
        };
        if (kind == "node") {
            int id;
            if (!(ss >> id)) bad("expected: node <id>");
            net.nodes.push_back(id);
        } else if (kind == "link") {
            Link l;
            if (!(ss >> l.id >> l.from >> l.to >> l.length_m >> l.free_flow_time_s >>
                  l.capacity_vph))
                bad("expected: link <id> <from> <to> <length_m> <fftime_s> <capacity_vph>");
            net.links.push_back(l);
        } else if (kind == "od") {
            OdPair od;
            if (!(ss >> od.origin >> od.destination >> od.demand_vph))
                bad("expected: od <origin> <destination> <demand_vph>");
            net.od_pairs.push_back(od);
        } else {
            bad("unknown record '" + kind + "'");
        }
    }
    net.validate();
    return net;
}

inline RoadNetwork load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("network file not found: " + path);
    return load_network(in);
}

inline void save_network(const RoadNetwork& net, std::ostream& out) {
    out << "# road network: nodes, links(id from to length_m fftime_s capacity_vph),"
        << " od(origin destination demand_vph)\n";
    for (int n : net.nodes) out << "node " << n << "\n";
    for (const Link& l : net.links)
        out << "link " << l.id << " " << l.from << " " << l.to << " " << l.length_m
            << " " << l.free_flow_time_s << " " << l.capacity_vph << "\n";
    for (const OdPair& od : net.od_pairs)
        out << "od " << od.origin << " " << od.destination << " " << od.demand_vph
            << "\n";
}

}  // namespace aoisim::traffic
