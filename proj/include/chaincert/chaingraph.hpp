// U-chain and epsilon-chain transition graphs over a sampled system, chain
// transitivity via strong connectivity, the trapping-set search behind the
// weak-incompressibility verdict, and the brute-force equivalence oracle.
#pragma once

#include "chaincert/errors.hpp"
#include "chaincert/geometry.hpp"
#include "chaincert/systems.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

namespace chaincert {

struct ChainGraph {
    int n = 0;
    std::vector<std::vector<int>> adj;  // sorted, deduplicated
    std::string tag;                    // "cover mesh=..." or "epsilon=..."
};

/// Sample membership lists per cover box; shared by graph construction and
/// loop verification.
struct CoverIndex {
    std::vector<std::vector<int>> members;  // box -> sample indices inside

    CoverIndex(const Cover& cover, std::span<const Point> sample) {
        members.resize(cover.size());
        for (std::size_t b = 0; b < cover.size(); ++b)
            for (std::size_t i = 0; i < sample.size(); ++i)
                if (cover.box(b).contains(sample[i])) members[b].push_back(static_cast<int>(i));
    }
};

/// Edge x -> y iff some cover box contains both f(x) and y.
inline ChainGraph chain_graph(const DiscreteSystem& sys, const Cover& cover) {
    if (!is_nice(cover, sys.sample)) throw NotNice("cover is not nice for the sample");
    CoverIndex ci(cover, sys.sample);
    ChainGraph g;
    g.n = sys.n();
    g.tag = "cover";
    g.adj.resize(sys.sample.size());
    for (int x = 0; x < g.n; ++x) {
        std::set<int> out;
        const Point& fx = sys.image_point(x);
        for (std::size_t b = 0; b < cover.size(); ++b) {
            if (!cover.box(b).contains(fx)) continue;
            out.insert(ci.members[b].begin(), ci.members[b].end());
        }
        g.adj[static_cast<std::size_t>(x)].assign(out.begin(), out.end());
    }
    return g;
}

/// Edge x -> y iff the max-metric distance from f(x) to y is strictly
/// below epsilon.
inline ChainGraph metric_chain_graph(const DiscreteSystem& sys, const Rat& epsilon) {
    if (!(epsilon > 0)) throw BadParams("epsilon must be positive");
    ChainGraph g;
    g.n = sys.n();
    g.tag = "epsilon=" + rat_str(epsilon);
    g.adj.resize(sys.sample.size());
    for (int x = 0; x < g.n; ++x) {
        const Point& fx = sys.image_point(x);
        for (int y = 0; y < g.n; ++y)
            if (max_distance(fx, sys.sample[static_cast<std::size_t>(y)]) < epsilon)
                g.adj[static_cast<std::size_t>(x)].push_back(y);
    }
    return g;
}

/// Functional graph: the single edge x -> f(x).
inline ChainGraph functional_graph(const DiscreteSystem& sys) {
    ChainGraph g;
    g.n = sys.n();
    g.tag = "functional";
    g.adj.resize(sys.sample.size());
    for (int x = 0; x < g.n; ++x) g.adj[static_cast<std::size_t>(x)] = {sys.image(x)};
    return g;
}

namespace detail {

// Kosaraju SCC; components come out in topological order of the
// condensation (sources first), deterministically.
inline std::vector<std::vector<int>> scc_partition(const ChainGraph& g) {
    int n = g.n;
    std::vector<std::vector<int>> radj(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u)
        for (int v : g.adj[static_cast<std::size_t>(u)]) radj[static_cast<std::size_t>(v)].push_back(u);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<int, std::size_t>> stack;
    for (int s = 0; s < n; ++s) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        seen[static_cast<std::size_t>(s)] = 1;
        stack.emplace_back(s, 0);
        while (!stack.empty()) {
            auto& [u, k] = stack.back();
            if (k < g.adj[static_cast<std::size_t>(u)].size()) {
                int v = g.adj[static_cast<std::size_t>(u)][k++];
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    stack.emplace_back(v, 0);
                }
            } else {
                order.push_back(u);
                stack.pop_back();
            }
        }
    }
    std::vector<std::vector<int>> classes;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (used[static_cast<std::size_t>(*it)]) continue;
        std::vector<int> cls;
        std::vector<int> dfs{*it};
        used[static_cast<std::size_t>(*it)] = 1;
        while (!dfs.empty()) {
            int u = dfs.back();
            dfs.pop_back();
            cls.push_back(u);
            for (int v : radj[static_cast<std::size_t>(u)]) {
                if (!used[static_cast<std::size_t>(v)]) {
                    used[static_cast<std::size_t>(v)] = 1;
                    dfs.push_back(v);
                }
            }
        }
        std::sort(cls.begin(), cls.end());
        classes.push_back(std::move(cls));
    }
    return classes;
}

}  // namespace detail

/// Chain transitive at this cover/epsilon iff the graph is a single
/// strongly connected component over all vertices.
inline bool is_chain_transitive(const ChainGraph& g) {
    return detail::scc_partition(g).size() == 1;
}

struct Components {
    std::vector<std::vector<int>> classes;           // topological order, members sorted
    std::vector<int> class_of;                       // vertex -> class id
    std::vector<std::pair<int, int>> condensation;   // edges between class ids, sorted
};

inline Components chain_components(const ChainGraph& g) {
    Components out;
    out.classes = detail::scc_partition(g);
    out.class_of.assign(static_cast<std::size_t>(g.n), -1);
    for (std::size_t k = 0; k < out.classes.size(); ++k)
        for (int v : out.classes[k]) out.class_of[static_cast<std::size_t>(v)] = static_cast<int>(k);
    std::set<std::pair<int, int>> edges;
    for (int u = 0; u < g.n; ++u)
        for (int v : g.adj[static_cast<std::size_t>(u)]) {
            int a = out.class_of[static_cast<std::size_t>(u)], b = out.class_of[static_cast<std::size_t>(v)];
            if (a != b) edges.emplace(a, b);
        }
    out.condensation.assign(edges.begin(), edges.end());
    return out;
}

/// Shortest path a ~> b by breadth-first search, neighbors visited in
/// ascending order; [a] when a == b; nullopt when unreachable.
inline std::optional<std::vector<int>> find_chain(const ChainGraph& g, int a, int b) {
    if (a < 0 || a >= g.n || b < 0 || b >= g.n) throw BadParams("find_chain: vertex out of range");
    if (a == b) return std::vector<int>{a};
    std::vector<int> parent(static_cast<std::size_t>(g.n), -1);
    std::queue<int> q;
    q.push(a);
    parent[static_cast<std::size_t>(a)] = a;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : g.adj[static_cast<std::size_t>(u)]) {
            if (parent[static_cast<std::size_t>(v)] != -1) continue;
            parent[static_cast<std::size_t>(v)] = u;
            if (v == b) {
                std::vector<int> path{v};
                while (v != a) {
                    v = parent[static_cast<std::size_t>(v)];
                    path.push_back(v);
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            q.push(v);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trapping sets

struct TrappingReport {
    struct Found {
        std::vector<std::size_t> boxes;  // indices into the cover
        std::vector<int> closure_cells;  // sample indices of closure(W ∩ S)
        std::vector<int> image_cells;    // their images
    };
    bool weakly_incompressible = false;
    bool exhaustive = true;
    std::optional<Found> trapping;
};

namespace detail {

// All rational predicates evaluated once; the subset scan is integer-only.
struct TrappingContext {
    std::vector<std::vector<int>> neighbors;          // within mesh, incl. self
    std::vector<std::vector<std::size_t>> point_boxes;  // boxes containing each point
    const CoverIndex& ci;

    TrappingContext(const DiscreteSystem& sys, const Cover& cover, const CoverIndex& ci)
        : ci(ci) {
        int n = sys.n();
        neighbors.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (max_distance(sys.sample[static_cast<std::size_t>(i)],
                                 sys.sample[static_cast<std::size_t>(j)]) <= sys.mesh)
                    neighbors[static_cast<std::size_t>(i)].push_back(j);
        point_boxes.resize(static_cast<std::size_t>(n));
        for (std::size_t b = 0; b < cover.size(); ++b)
            for (int i : ci.members[b]) point_boxes[static_cast<std::size_t>(i)].push_back(b);
    }
};

// Checks the trapping predicate for a set of box indices; fills the report
// cells on success.
inline bool check_trapping(const DiscreteSystem& sys, const Cover& cover,
                           const TrappingContext& ctx, const std::vector<std::size_t>& w,
                           TrappingReport::Found& found) {
    std::vector<char> in_w_boxes(cover.size(), 0);
    for (std::size_t b : w) in_w_boxes[b] = 1;
    std::vector<char> in_ws(static_cast<std::size_t>(sys.n()), 0);
    int count = 0;
    for (std::size_t b : w)
        for (int i : ctx.ci.members[b])
            if (!in_ws[static_cast<std::size_t>(i)]) { in_ws[static_cast<std::size_t>(i)] = 1; ++count; }
    if (count == 0 || count == sys.n()) return false;
    std::vector<int> closure;
    for (int i = 0; i < sys.n(); ++i)
        for (int j : ctx.neighbors[static_cast<std::size_t>(i)])
            if (in_ws[static_cast<std::size_t>(j)]) { closure.push_back(i); break; }
    std::vector<int> images;
    for (int i : closure) {
        int fi = sys.image(i);
        bool inside = false;
        for (std::size_t b : ctx.point_boxes[static_cast<std::size_t>(fi)])
            if (in_w_boxes[b]) { inside = true; break; }
        if (!inside) return false;
        images.push_back(fi);
    }
    found.boxes = w;
    found.closure_cells = closure;
    found.image_cells = images;
    return true;
}

}  // namespace detail

/// Searches unions W of cover boxes with ∅ ≠ W∩S ≠ S whose mesh-closure
/// maps back into W. Exhaustive in ascending bitmask order up to the
/// configured cap; above it, candidate unions are grown from condensation
/// sink classes and the verdict is marked non-exhaustive.
inline TrappingReport find_trapping_set(const DiscreteSystem& sys, const Cover& cover,
                                        const Caps& caps = {}) {
    if (!is_nice(cover, sys.sample)) throw NotNice("cover is not nice for the sample");
    CoverIndex ci(cover, sys.sample);
    detail::TrappingContext ctx(sys, cover, ci);
    TrappingReport report;
    std::size_t k = cover.size();
    if (static_cast<int>(k) <= caps.trapping_exhaustive_cap && k <= 30) {
        report.exhaustive = true;
        std::uint64_t full = (std::uint64_t(1) << k) - 1;
        for (std::uint64_t mask = 1; mask < full; ++mask) {
            std::vector<std::size_t> w;
            for (std::size_t b = 0; b < k; ++b)
                if (mask & (std::uint64_t(1) << b)) w.push_back(b);
            TrappingReport::Found found;
            if (detail::check_trapping(sys, cover, ctx, w, found)) {
                report.trapping = std::move(found);
                report.weakly_incompressible = false;
                return report;
            }
        }
        report.weakly_incompressible = true;
        return report;
    }
    // heuristic: grow absorbing unions from condensation sink classes
    report.exhaustive = false;
    ChainGraph g = chain_graph(sys, cover);
    Components comp = chain_components(g);
    std::vector<char> has_out(comp.classes.size(), 0);
    for (auto [a, b] : comp.condensation) has_out[static_cast<std::size_t>(a)] = 1;
    for (std::size_t cidx = 0; cidx < comp.classes.size(); ++cidx) {
        if (has_out[cidx]) continue;
        std::set<std::size_t> wset;
        for (int v : comp.classes[cidx])
            for (std::size_t b : ctx.point_boxes[static_cast<std::size_t>(v)]) wset.insert(b);
        for (int rounds = 0; rounds <= static_cast<int>(k); ++rounds) {
            std::vector<std::size_t> w(wset.begin(), wset.end());
            if (w.size() == k) break;
            TrappingReport::Found found;
            if (detail::check_trapping(sys, cover, ctx, w, found)) {
                report.trapping = std::move(found);
                report.weakly_incompressible = false;
                return report;
            }
            // add the boxes around escaping images and retry
            std::vector<char> in_ws(static_cast<std::size_t>(sys.n()), 0);
            for (std::size_t b : w)
                for (int i : ci.members[b]) in_ws[static_cast<std::size_t>(i)] = 1;
            std::size_t before = wset.size();
            for (int i = 0; i < sys.n(); ++i) {
                bool in_closure = false;
                for (int j : ctx.neighbors[static_cast<std::size_t>(i)])
                    if (in_ws[static_cast<std::size_t>(j)]) { in_closure = true; break; }
                if (!in_closure) continue;
                for (std::size_t b : ctx.point_boxes[static_cast<std::size_t>(sys.image(i))]) wset.insert(b);
            }
            if (wset.size() == before) break;
        }
    }
    report.weakly_incompressible = false;  // unknown; labeled by exhaustive=false
    return report;
}

/// Re-checks a reported trapping union from scratch.
inline bool reverify_trapping(const DiscreteSystem& sys, const Cover& cover,
                              const TrappingReport::Found& found) {
    CoverIndex ci(cover, sys.sample);
    detail::TrappingContext ctx(sys, cover, ci);
    TrappingReport::Found again;
    if (!detail::check_trapping(sys, cover, ctx, found.boxes, again)) return false;
    return again.closure_cells == found.closure_cells && again.image_cells == found.image_cells;
}

// ---------------------------------------------------------------------------
// Equivalence oracle

struct EquivalenceReport {
    bool strongly_connected = false;
    bool no_proper_invariant_subset = false;
    bool agree = false;
};

/// For a purely discrete system: strong connectivity of the functional
/// graph versus brute-force absence of proper nonempty f-invariant subsets.
inline EquivalenceReport equivalence_oracle(const DiscreteSystem& sys, const Caps& caps = {}) {
    if (sys.mesh != 0) throw BadParams("equivalence_oracle: system must be purely discrete");
    int n = sys.n();
    if (n > caps.equivalence_cap) throw TooLarge("equivalence_oracle: sample too large");
    EquivalenceReport rep;
    rep.strongly_connected = is_chain_transitive(functional_graph(sys));
    rep.no_proper_invariant_subset = true;
    std::uint32_t full = (std::uint32_t(1) << n) - 1;
    for (std::uint32_t mask = 1; mask < full && rep.no_proper_invariant_subset; ++mask) {
        bool invariant = true;
        for (int i = 0; i < n && invariant; ++i)
            if (mask & (std::uint32_t(1) << i))
                invariant = (mask >> sys.image(i)) & 1;
        if (invariant) rep.no_proper_invariant_subset = false;
    }
    rep.agree = rep.strongly_connected == rep.no_proper_invariant_subset;
    return rep;
}

}  // namespace chaincert
