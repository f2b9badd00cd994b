#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hlv/rungraph.hpp"
#include "helpers.hpp"

#include <queue>

using namespace hlv;

namespace {

RunGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges, uint32_t rej_mask,
                    std::vector<int> initials = {0}) {
    RunGraph g;
    g.verts.resize(n);
    g.adj.resize(n);
    for (int v = 0; v < n; v++) g.verts[v].rejecting = (rej_mask >> v) & 1;
    for (auto& [a, b] : edges) g.adj[a].push_back({b, 0, 0, 0});
    g.initials = std::move(initials);
    return g;
}

// Reference decision: some rejecting vertex is reachable and lies on a cycle.
bool has_reachable_rejecting_cycle(const RunGraph& g) {
    int n = int(g.num_vertices());
    std::vector<char> reach(n, 0);
    std::queue<int> q;
    for (int v : g.initials)
        if (!reach[v]) { reach[v] = 1; q.push(v); }
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto& e : g.adj[v])
            if (!reach[e.to]) { reach[e.to] = 1; q.push(e.to); }
    }
    for (int r = 0; r < n; r++) {
        if (!reach[r] || !g.verts[r].rejecting) continue;
        // cycle through r: r reaches itself in >= 1 step
        std::vector<char> seen(n, 0);
        std::queue<int> bfs;
        for (auto& e : g.adj[r])
            if (!seen[e.to]) { seen[e.to] = 1; bfs.push(e.to); }
        while (!bfs.empty()) {
            int v = bfs.front();
            bfs.pop();
            for (auto& e : g.adj[v])
                if (!seen[e.to]) { seen[e.to] = 1; bfs.push(e.to); }
        }
        if (seen[r]) return true;
    }
    return false;
}

// The cycle lists its closing vertex again: [v, ..., v], so consecutive
// pairs cover every edge of the loop.
void check_lasso_shape(const RunGraph& g, const RejectingLasso& w) {
    REQUIRE(!w.stem.empty());
    REQUIRE(w.cycle.size() >= 2);
    CHECK(std::find(g.initials.begin(), g.initials.end(), w.stem.front()) != g.initials.end());
    auto has_edge = [&](int a, int b) {
        for (auto& e : g.adj[a])
            if (e.to == b) return true;
        return false;
    };
    for (size_t i = 0; i + 1 < w.stem.size(); i++) CHECK(has_edge(w.stem[i], w.stem[i + 1]));
    CHECK(w.cycle.front() == w.stem.back());
    CHECK(w.cycle.back() == w.cycle.front());
    for (size_t i = 0; i + 1 < w.cycle.size(); i++) CHECK(has_edge(w.cycle[i], w.cycle[i + 1]));
    bool rej = false;
    for (int v : w.cycle) rej |= g.verts[v].rejecting;
    CHECK(rej);
}

void check_graph(const RunGraph& g) {
    bool bad = has_reachable_rejecting_cycle(g);
    AcceptanceResult r = check_accepting(g);
    if (bad) {
        REQUIRE(std::holds_alternative<RejectingLasso>(r));
        check_lasso_shape(g, std::get<RejectingLasso>(r));
    } else {
        REQUIRE(std::holds_alternative<Annotation>(r));
        CHECK(validate_annotation(g, std::get<Annotation>(r)));
    }
}

} // namespace

TEST_CASE("every four-vertex graph agrees with the cycle oracle") {
    std::vector<std::pair<int, int>> all_edges;
    for (int a = 0; a < 4; a++)
        for (int b = 0; b < 4; b++) all_edges.emplace_back(a, b);
    for (uint32_t es = 0; es < (1u << 16); es++) {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < 16; i++)
            if ((es >> i) & 1) edges.push_back(all_edges[i]);
        for (uint32_t rej = 0; rej < 16; rej++) check_graph(make_graph(4, edges, rej));
    }
}

TEST_CASE("random larger graphs agree with the cycle oracle") {
    auto& rng = test_rng();
    for (int iter = 0; iter < 10000; iter++) {
        int n = 5 + int(rng() % 2);
        std::vector<std::pair<int, int>> edges;
        for (int a = 0; a < n; a++)
            for (int b = 0; b < n; b++)
                if (rng() % 100 < 30) edges.emplace_back(a, b);
        uint32_t rej = uint32_t(rng()) & ((1u << n) - 1);
        check_graph(make_graph(n, edges, rej));
    }
}

TEST_CASE("annotation certifies acceptance") {
    // chain into an accepting cycle, with a rejecting vertex on the stem
    RunGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 2}}, 0b0010);
    AcceptanceResult r = check_accepting(g);
    REQUIRE(std::holds_alternative<Annotation>(r));
    const Annotation& a = std::get<Annotation>(r);
    CHECK(validate_annotation(g, a));
    for (int v = 0; v < 4; v++) CHECK(a.lambda_b[v]);
    // path 0 -> 1 passes one rejecting vertex, so counts decrease along it
    CHECK(a.lambda_n[0] >= a.lambda_n[1] + 1);
    CHECK(a.lambda_n[1] >= a.lambda_n[2]);
}

TEST_CASE("tampered annotations are rejected") {
    RunGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 2}}, 0b0010);
    Annotation a = std::get<Annotation>(check_accepting(g));
    REQUIRE(validate_annotation(g, a));

    Annotation uncovered = a;
    uncovered.lambda_b[1] = 0;  // covered edge 0 -> 1 now leaves coverage
    CHECK(!validate_annotation(g, uncovered));

    Annotation wrong_count = a;
    wrong_count.lambda_n[0] = a.lambda_n[1];  // must exceed it by one
    CHECK(!validate_annotation(g, wrong_count));

    Annotation no_initial = a;
    no_initial.lambda_b[0] = 0;
    CHECK(!validate_annotation(g, no_initial));

    Annotation short_vec = a;
    short_vec.lambda_n.pop_back();
    CHECK(!validate_annotation(g, short_vec));
}

TEST_CASE("rejecting lasso witnesses are breadth-first minimal stems") {
    // two rejecting cycles; the closer one must be reported
    RunGraph g = make_graph(5, {{0, 1}, {1, 1}, {0, 2}, {2, 3}, {3, 4}, {4, 3}}, 0b01010);
    AcceptanceResult r = check_accepting(g);
    REQUIRE(std::holds_alternative<RejectingLasso>(r));
    const RejectingLasso& w = std::get<RejectingLasso>(r);
    check_lasso_shape(g, w);
    CHECK(w.stem == std::vector<int>{0, 1});
    CHECK(w.cycle == std::vector<int>{1, 1});
}

TEST_CASE("unreachable rejecting cycles are ignored") {
    RunGraph g = make_graph(3, {{0, 0}, {1, 2}, {2, 1}}, 0b110);
    AcceptanceResult r = check_accepting(g);
    REQUIRE(std::holds_alternative<Annotation>(r));
    const Annotation& a = std::get<Annotation>(r);
    CHECK(validate_annotation(g, a));
    CHECK(a.lambda_b[0]);
    CHECK(!a.lambda_b[1]);
    CHECK(!a.lambda_b[2]);
}

TEST_CASE("multiple initial vertices") {
    RunGraph g = make_graph(4, {{1, 1}, {2, 3}, {3, 2}}, 0b0100, {0, 2});
    AcceptanceResult r = check_accepting(g);
    REQUIRE(std::holds_alternative<RejectingLasso>(r));
    const RejectingLasso& w = std::get<RejectingLasso>(r);
    check_lasso_shape(g, w);
    CHECK(w.stem.front() == 2);
}

TEST_CASE("vertex with no outgoing edges is fine") {
    RunGraph g = make_graph(2, {{0, 1}}, 0b11);
    AcceptanceResult r = check_accepting(g);
    REQUIRE(std::holds_alternative<Annotation>(r));
    CHECK(validate_annotation(g, std::get<Annotation>(r)));
}
