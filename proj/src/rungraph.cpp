#include "hlv/rungraph.hpp"

#include <algorithm>
#include <deque>

namespace hlv {

namespace {

// Iterative Tarjan; returns the SCC id per reachable vertex. SCC ids come
// out in reverse topological order: every edge leaving an SCC targets an
// SCC with a smaller id.
std::vector<int> tarjan_scc(const RunGraph& g, const std::vector<char>& reach, int& num_sccs) {
    size_t n = g.num_vertices();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    int next_index = 0;
    num_sccs = 0;

    struct Frame {
        int v;
        size_t edge;
    };
    for (size_t root = 0; root < n; root++) {
        if (!reach[root] || index[root] != -1) continue;
        std::vector<Frame> frames{{int(root), 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(int(root));
        on_stack[root] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.edge < g.adj[f.v].size()) {
                int w = g.adj[f.v][f.edge].to;
                f.edge++;
                if (!reach[w]) continue;
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                int v = f.v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().v] = std::min(low[frames.back().v], low[v]);
                if (low[v] == index[v]) {
                    for (;;) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = num_sccs;
                        if (w == v) break;
                    }
                    num_sccs++;
                }
            }
        }
    }
    return comp;
}

// Shortest path from `from` to `to` by BFS in edge order, both endpoints
// included. For from == to, finds a shortest non-empty cycle. Empty result
// means no path.
std::vector<int> bfs_path(const RunGraph& g, const std::vector<char>& reach, int from, int to) {
    size_t n = g.num_vertices();
    std::vector<int> parent(n, -1);
    std::vector<char> seen(n, 0);
    std::deque<int> work{from};
    seen[from] = 1;
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        for (const RunGraph::Edge& e : g.adj[v]) {
            if (!reach[e.to]) continue;
            if (e.to == to) {
                std::vector<int> path{to};
                for (int cur = v; cur != from; cur = parent[cur]) path.push_back(cur);
                path.push_back(from);
                std::reverse(path.begin(), path.end());
                return path;
            }
            if (!seen[e.to]) {
                seen[e.to] = 1;
                parent[e.to] = v;
                work.push_back(e.to);
            }
        }
    }
    return {};
}

} // namespace

AcceptanceResult check_accepting(const RunGraph& g) {
    size_t n = g.num_vertices();
    std::vector<char> reach(n, 0);
    std::vector<int> parent(n, -1);
    std::vector<int> order;
    std::deque<int> work;
    for (int v : g.initials) {
        if (!reach[v]) {
            reach[v] = 1;
            work.push_back(v);
        }
    }
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        order.push_back(v);
        for (const RunGraph::Edge& e : g.adj[v]) {
            if (!reach[e.to]) {
                reach[e.to] = 1;
                parent[e.to] = v;
                work.push_back(e.to);
            }
        }
    }

    int num_sccs = 0;
    std::vector<int> comp = tarjan_scc(g, reach, num_sccs);
    std::vector<int> scc_size(num_sccs, 0);
    std::vector<char> scc_cyclic(num_sccs, 0);
    for (size_t v = 0; v < n; v++) {
        if (!reach[v]) continue;
        scc_size[comp[v]]++;
        for (const RunGraph::Edge& e : g.adj[v])
            if (size_t(e.to) == v) scc_cyclic[comp[v]] = 1;
    }
    for (int c = 0; c < num_sccs; c++)
        if (scc_size[c] > 1) scc_cyclic[c] = 1;

    // A reachable rejecting vertex inside a cyclic SCC yields a witness: the
    // first such vertex in BFS discovery order, with the BFS stem recorded
    // during reachability and a shortest cycle back to it.
    for (int v : order) {
        if (!g.verts[v].rejecting || !scc_cyclic[comp[v]]) continue;
        RejectingLasso w;
        for (int cur = v; cur != -1; cur = parent[cur]) w.stem.push_back(cur);
        std::reverse(w.stem.begin(), w.stem.end());
        w.cycle = bfs_path(g, reach, v, v);
        return w;
    }

    // Accepting: lambda_n per SCC in reverse topological order (Tarjan's SCC
    // ids ensure targets are already final).
    Annotation a;
    a.lambda_b.assign(n, 0);
    a.lambda_n.assign(n, 0);
    std::vector<std::vector<int>> members(num_sccs);
    for (size_t v = 0; v < n; v++)
        if (reach[v]) members[comp[v]].push_back(int(v));
    std::vector<int64_t> scc_val(num_sccs, 0);
    for (int c = 0; c < num_sccs; c++) {
        for (int v : members[c]) {
            for (const RunGraph::Edge& e : g.adj[v]) {
                if (comp[e.to] == c) continue;
                int64_t cand = scc_val[comp[e.to]] + (g.verts[e.to].rejecting ? 1 : 0);
                scc_val[c] = std::max(scc_val[c], cand);
            }
        }
    }
    for (size_t v = 0; v < n; v++) {
        if (!reach[v]) continue;
        a.lambda_b[v] = 1;
        a.lambda_n[v] = scc_val[comp[v]];
    }
    return a;
}

bool validate_annotation(const RunGraph& g, const Annotation& a) {
    size_t n = g.num_vertices();
    if (a.lambda_b.size() != n || a.lambda_n.size() != n) return false;
    for (int v : g.initials)
        if (!a.lambda_b[v]) return false;
    for (size_t v = 0; v < n; v++) {
        if (a.lambda_n[v] < 0 || a.lambda_n[v] > int64_t(n)) return false;
        if (!a.lambda_b[v]) continue;
        for (const RunGraph::Edge& e : g.adj[v]) {
            if (!a.lambda_b[e.to]) return false;
            int64_t need = a.lambda_n[e.to] + (g.verts[e.to].rejecting ? 1 : 0);
            if (a.lambda_n[v] < need) return false;
        }
    }
    return true;
}

} // namespace hlv
