// Run graphs (product of system copies, strategy, and a universal co-Buchi
// automaton), acceptance checking via bounded annotations, and the
// independent annotation validity checker.
#pragma once

#include "hlv/automata.hpp"
#include "hlv/tsys.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace hlv {

// Vertices are explicit; edges carry the data needed to decode
// counterexamples: the universal input letter consumed at this step, the
// fresh lookahead letter (equal to the consumed letter when lookahead = 0),
// and the existential letter chosen by the strategy.
struct RunGraph {
    struct Vertex {
        int univ_state = 0;        // state of the universal self-composition
        int exist_state = 0;       // state of the existential self-composition
        int strat_state = 0;
        std::vector<uint32_t> buffer;  // k pending universal letters
        int aut_state = 0;
        bool rejecting = false;
    };
    struct Edge {
        int to;
        uint32_t consumed;  // universal letter consumed at this position
        uint32_t fresh;     // universal letter entering the lookahead window
        uint32_t chosen;    // existential letter chosen by the strategy
    };
    std::vector<Vertex> verts;
    std::vector<std::vector<Edge>> adj;
    std::vector<int> initials;

    size_t num_vertices() const { return verts.size(); }
};

// lambda_b[v]: vertex is covered (reachable); lambda_n[v]: max number of
// rejecting vertices on any path leaving v. Valid when every covered edge
// target is covered and lambda_n[v] >= lambda_n[v'] + (v' rejecting ? 1 : 0).
struct Annotation {
    std::vector<char> lambda_b;
    std::vector<int64_t> lambda_n;
};

struct RejectingLasso {
    std::vector<int> stem;   // vertices from an initial vertex
    std::vector<int> cycle;  // cycle through a rejecting vertex; cycle[0] == stem.back()
};

using AcceptanceResult = std::variant<Annotation, RejectingLasso>;

// Decides whether the run graph is accepting (no reachable cycle through a
// rejecting vertex). Returns a valid annotation, or a witness lasso found by
// breadth-first search in edge order.
AcceptanceResult check_accepting(const RunGraph& g);

// Independent edge-by-edge check of the annotation conditions. Shares no
// logic with check_accepting.
bool validate_annotation(const RunGraph& g, const Annotation& a);

} // namespace hlv
