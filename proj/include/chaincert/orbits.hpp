// Compliant loops, eventual-compliance certificates, the chain-walk
// certificate builder, the dense-set-meeting builder, and re-verification.
//
// A segment <x_i : m < i <= n> is a compliant x-loop for a nice cover U when
//   (1) the last point agrees with x on U's support coordinates,
//   (2) every point lies in the union of U,
//   (3) every box of U is hit,
//   (4) the first point lies in U*(f(U*(x) ∩ S)), and
//   (5) every later step satisfies x_{i+1} ∈ U*(f(U*(x_i) ∩ S)),
// where S is the sample and f the sample map. The verdict depends only on
// U's support coordinates; condition (1) compares on those coordinates so
// the locality holds exactly.
#pragma once

#include "chaincert/chaingraph.hpp"
#include "chaincert/errors.hpp"
#include "chaincert/geometry.hpp"
#include "chaincert/random.hpp"
#include "chaincert/systems.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chaincert {

struct LoopDiagnostics {
    std::array<bool, 5> cond{};      // conditions (1)..(5)
    std::vector<std::string> notes;  // one line per failed condition

    bool verified() const {
        for (bool c : cond)
            if (!c) return false;
        return true;
    }
};

struct LoopWitness {
    std::vector<Point> segment;
    Point base;
    Cover cover;
    LoopDiagnostics diag;

    bool verified() const { return diag.verified(); }
};

namespace detail {

// Membership structure for evaluating the loop step-predicate.
struct LoopContext {
    const DiscreteSystem& sys;
    const Cover& cover;
    CoverIndex ci;

    LoopContext(const DiscreteSystem& s, const Cover& c) : sys(s), cover(c), ci(c, s.sample) {}

    std::vector<std::size_t> boxes_of(const Point& p) const {
        std::vector<std::size_t> out;
        for (std::size_t b = 0; b < cover.size(); ++b)
            if (cover.box(b).contains(p)) out.push_back(b);
        return out;
    }

    // Box indices whose union is U*(f(U*(p) ∩ S)), given the boxes of p.
    std::vector<char> step_target_boxes(const std::vector<std::size_t>& p_boxes) const {
        std::vector<char> img(static_cast<std::size_t>(sys.n()), 0);
        for (std::size_t b : p_boxes)
            for (int i : ci.members[b]) img[static_cast<std::size_t>(sys.image(i))] = 1;
        std::vector<char> allowed(cover.size(), 0);
        for (std::size_t b = 0; b < cover.size(); ++b)
            for (int i : ci.members[b])
                if (img[static_cast<std::size_t>(i)]) { allowed[b] = 1; break; }
        // boxes meeting an image point that is not itself a sample point do
        // not arise: images are sample points by construction
        return allowed;
    }

    static bool hits(const std::vector<std::size_t>& boxes, const std::vector<char>& allowed) {
        for (std::size_t b : boxes)
            if (allowed[b]) return true;
        return false;
    }
};

inline LoopWitness evaluate_loop(const LoopContext& ctx, std::span<const Point> segment,
                                 const Point& base) {
    LoopWitness w{std::vector<Point>(segment.begin(), segment.end()), base,
                  ctx.cover, LoopDiagnostics{}};
    auto& d = w.diag;
    if (segment.empty()) {
        d.cond = {false, false, false, false, false};
        d.notes.push_back("segment is empty");
        return w;
    }
    std::vector<std::vector<std::size_t>> pt_boxes;
    pt_boxes.reserve(segment.size());
    for (const auto& p : segment) pt_boxes.push_back(ctx.boxes_of(p));

    // (1) last point returns to base on the cover's coordinates
    d.cond[0] = agree_on(segment.back(), base, ctx.cover.support());
    if (!d.cond[0]) d.notes.push_back("(1) last point does not return to the base point");

    // (2) all points inside the union of the cover
    d.cond[1] = true;
    for (std::size_t i = 0; i < segment.size(); ++i) {
        if (pt_boxes[i].empty()) {
            d.cond[1] = false;
            d.notes.push_back("(2) point " + std::to_string(i) + " lies outside the cover union");
            break;
        }
    }

    // (3) every box hit
    {
        std::vector<char> hit(ctx.cover.size(), 0);
        for (const auto& bs : pt_boxes)
            for (std::size_t b : bs) hit[b] = 1;
        d.cond[2] = true;
        for (std::size_t b = 0; b < ctx.cover.size(); ++b) {
            if (!hit[b]) {
                d.cond[2] = false;
                d.notes.push_back("(3) box " + std::to_string(b) + " is never hit");
                break;
            }
        }
    }

    // (4) wrap-around step from the base point
    {
        auto allowed = ctx.step_target_boxes(ctx.boxes_of(base));
        d.cond[3] = LoopContext::hits(pt_boxes.front(), allowed);
        if (!d.cond[3]) d.notes.push_back("(4) first point not reachable from the base star-image");
    }

    // (5) interior steps
    d.cond[4] = true;
    for (std::size_t i = 0; i + 1 < segment.size(); ++i) {
        auto allowed = ctx.step_target_boxes(pt_boxes[i]);
        if (!LoopContext::hits(pt_boxes[i + 1], allowed)) {
            d.cond[4] = false;
            d.notes.push_back("(5) step " + std::to_string(i) + " -> " + std::to_string(i + 1) +
                              " violates the star-image condition");
            break;
        }
    }
    return w;
}

}  // namespace detail

/// Evaluates the five loop conditions exactly; diagnostics flag every failed
/// condition.
inline LoopWitness is_compliant_loop(std::span<const Point> segment, const Cover& cover,
                                     const Point& base, const DiscreteSystem& sys) {
    detail::LoopContext ctx(sys, cover);
    return detail::evaluate_loop(ctx, segment, base);
}

/// Greedy earliest-threshold decomposition: scanning from each candidate
/// threshold, a cut is placed at every base-return that closes a verified
/// loop; the first threshold whose scan exactly exhausts the suffix wins.
/// Returns (threshold, cut positions); cuts are inclusive segment ends and
/// the final cut is the last index.
inline std::optional<std::pair<int, std::vector<int>>> decompose(std::span<const Point> seq,
                                                                 const Cover& cover,
                                                                 const Point& base,
                                                                 const DiscreteSystem& sys) {
    int n = static_cast<int>(seq.size());
    if (n == 0) return std::nullopt;
    detail::LoopContext ctx(sys, cover);
    std::vector<int> returns;  // candidate cut positions
    for (int i = 0; i < n; ++i)
        if (agree_on(seq[static_cast<std::size_t>(i)], base, cover.support())) returns.push_back(i);
    if (returns.empty()) return std::nullopt;
    std::map<std::pair<int, int>, bool> memo;
    auto verified = [&](int s, int e) {  // segment [s..e]
        auto key = std::make_pair(s, e);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        bool ok = detail::evaluate_loop(ctx, seq.subspan(static_cast<std::size_t>(s),
                                                         static_cast<std::size_t>(e - s + 1)),
                                        base)
                      .verified();
        memo.emplace(key, ok);
        return ok;
    };
    for (int m = 0; m < n; ++m) {
        int cur = m;
        std::vector<int> cuts;
        for (int r : returns) {
            if (r < cur) continue;
            if (verified(cur, r)) {
                cuts.push_back(r);
                cur = r + 1;
            }
        }
        if (!cuts.empty() && cur == n) return std::make_pair(m, cuts);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Certificates

struct ComplianceCertificate {
    Point base;
    std::vector<Point> sequence;
    std::vector<Cover> ladder;            // each fully refining its predecessor
    std::vector<int> thresholds;          // per cover: tail start position
    std::vector<std::vector<int>> cuts;   // per cover: inclusive loop ends
};

namespace detail {

// Closed walk from base visiting at least one sample point per cover box,
// assembled from shortest chains; guaranteed nonempty.
inline std::vector<int> closed_walk_all_boxes(const ChainGraph& g, int base,
                                              const CoverIndex& ci) {
    std::vector<int> walk{base};
    int cur = base;
    auto extend_to = [&](int t) {
        auto path = find_chain(g, cur, t);
        if (!path) throw NotChainTransitive(-1);
        walk.insert(walk.end(), path->begin() + 1, path->end());
        cur = t;
    };
    for (const auto& members : ci.members) extend_to(members.front());
    extend_to(base);
    if (walk.size() == 1) {
        int w = g.adj[static_cast<std::size_t>(base)].front();
        walk.push_back(w);
        cur = w;
        extend_to(base);
    }
    return walk;
}

// Shared assembly: one stage per cover, loops_per_stage identical closed
// walks per stage; cover i's cuts collect every loop end from stage i on.
inline ComplianceCertificate build_certificate(const DiscreteSystem& sys, int base_index,
                                               std::span<const Cover> stages,
                                               int loops_per_stage) {
    if (base_index < 0 || base_index >= sys.n()) throw BadParams("base index out of range");
    if (loops_per_stage < 1) throw BadParams("loops_per_stage must be >= 1");
    ComplianceCertificate cert;
    cert.base = sys.sample[static_cast<std::size_t>(base_index)];
    std::vector<int> stage_start(stages.size(), 0);
    std::vector<int> loop_ends;
    std::vector<int> loop_stage;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        const Cover& cover = stages[s];
        ChainGraph g = chain_graph(sys, cover);
        if (!is_chain_transitive(g)) throw NotChainTransitive(static_cast<int>(s));
        CoverIndex ci(cover, sys.sample);
        stage_start[s] = static_cast<int>(cert.sequence.size());
        std::vector<int> walk = closed_walk_all_boxes(g, base_index, ci);
        for (int rep = 0; rep < loops_per_stage; ++rep) {
            for (std::size_t i = 1; i < walk.size(); ++i)
                cert.sequence.push_back(sys.sample[static_cast<std::size_t>(walk[i])]);
            loop_ends.push_back(static_cast<int>(cert.sequence.size()) - 1);
            loop_stage.push_back(static_cast<int>(s));
        }
        cert.ladder.push_back(cover);
    }
    cert.thresholds.assign(stages.size(), 0);
    cert.cuts.resize(stages.size());
    for (std::size_t s = 0; s < stages.size(); ++s) {
        cert.thresholds[s] = stage_start[s];
        for (std::size_t l = 0; l < loop_ends.size(); ++l)
            if (loop_stage[l] >= static_cast<int>(s)) cert.cuts[s].push_back(loop_ends[l]);
    }
    return cert;
}

}  // namespace detail

/// The chain-walk certificate builder: stage m appends loops_per_stage
/// closed walks through every box of ladder[m], concatenated from shortest
/// chains in the stage's chain graph. Requires a strongly connected chain
/// graph at every ladder cover and a fully-refining ladder.
inline ComplianceCertificate bowen_sharkovsky(const DiscreteSystem& sys, int base_index,
                                              std::span<const Cover> ladder,
                                              int loops_per_stage = 2) {
    if (ladder.empty()) throw BadParams("ladder must be nonempty");
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
        if (!fully_refines(ladder[i + 1], ladder[i]))
            throw LadderNotRefining("ladder cover " + std::to_string(i + 1) +
                                    " does not fully refine its predecessor");
    return detail::build_certificate(sys, base_index, ladder, loops_per_stage);
}

/// Meets the dense sets D_U in target order: the working cover is replaced
/// by its common refinement with the next target and the sequence extended
/// by verified loops for the new cover. The certificate's ladder is the
/// sequence of working covers.
inline ComplianceCertificate generic_builder(const DiscreteSystem& sys, int base_index,
                                             std::span<const Cover> targets,
                                             int loops_per_meeting = 2) {
    if (targets.empty()) throw BadParams("targets must be nonempty");
    std::vector<Cover> working;
    for (std::size_t m = 0; m < targets.size(); ++m) {
        if (!is_nice(targets[m], sys.sample)) throw NotNice("target cover not nice for the sample");
        if (working.empty())
            working.push_back(targets[m]);
        else
            working.push_back(common_refinement(working.back(), targets[m], sys.sample));
    }
    return detail::build_certificate(sys, base_index, working, loops_per_meeting);
}

// ---------------------------------------------------------------------------
// Verification

struct Violation {
    int cover = -1;       // ladder index, -1 for structural issues
    int seg_begin = -1;   // inclusive sequence positions, -1 when n/a
    int seg_end = -1;
    int condition = 0;    // 1..5 loop conditions; 0 structural; 6 tail-cover;
                          // 7 tail-step; 9 refinement-transfer
    std::string message;
};

struct VerifyReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Re-checks a certificate from raw data only: ladder niceness and full
/// refinement, every cut segment beyond each threshold a verified loop for
/// its cover, the concatenated tail's direct compliance conditions, and the
/// refinement transfer of every finer-cover loop to every coarser cover.
inline VerifyReport verify_certificate(const ComplianceCertificate& cert,
                                       const DiscreteSystem& sys) {
    VerifyReport rep;
    auto structural = [&](const std::string& msg) {
        rep.violations.push_back({-1, -1, -1, 0, msg});
    };
    int n = static_cast<int>(cert.sequence.size());
    std::size_t covers = cert.ladder.size();
    if (covers == 0) structural("certificate has no ladder covers");
    if (cert.thresholds.size() != covers || cert.cuts.size() != covers)
        structural("thresholds/cuts do not match the ladder length");
    if (!rep.ok()) return rep;

    for (std::size_t c = 0; c < covers; ++c) {
        if (!is_nice(cert.ladder[c], sys.sample))
            rep.violations.push_back({static_cast<int>(c), -1, -1, 0, "ladder cover not nice for the sample"});
        if (c + 1 < covers && !fully_refines(cert.ladder[c + 1], cert.ladder[c]))
            rep.violations.push_back({static_cast<int>(c + 1), -1, -1, 0,
                                      "ladder cover does not fully refine its predecessor"});
        int m = cert.thresholds[c];
        const auto& cuts = cert.cuts[c];
        if (m < 0 || m >= n || cuts.empty() || cuts.back() != n - 1) {
            rep.violations.push_back({static_cast<int>(c), -1, -1, 0,
                                      "threshold/cuts do not decompose the tail"});
            continue;
        }
        int prev = m;
        bool shape_ok = true;
        for (int r : cuts) {
            if (r < prev || r >= n) { shape_ok = false; break; }
            prev = r + 1;
        }
        if (!shape_ok) {
            rep.violations.push_back({static_cast<int>(c), -1, -1, 0, "cut positions not increasing"});
            continue;
        }
    }
    if (!rep.ok()) return rep;

    // per-cover: loops, then the tail conditions directly
    for (std::size_t c = 0; c < covers; ++c) {
        const Cover& cover = cert.ladder[c];
        detail::LoopContext ctx(sys, cover);
        int m = cert.thresholds[c];
        int prev = m;
        for (int r : cert.cuts[c]) {
            auto w = detail::evaluate_loop(
                ctx,
                std::span<const Point>(cert.sequence).subspan(static_cast<std::size_t>(prev),
                                                              static_cast<std::size_t>(r - prev + 1)),
                cert.base);
            if (!w.verified()) {
                for (std::size_t k = 0; k < 5; ++k)
                    if (!w.diag.cond[k])
                        rep.violations.push_back({static_cast<int>(c), prev, r,
                                                  static_cast<int>(k) + 1,
                                                  w.diag.notes.empty() ? "loop condition failed"
                                                                       : w.diag.notes.front()});
            }
            prev = r + 1;
        }
        // eventual-compliance conditions (1) and (3) over the whole tail
        std::vector<std::vector<std::size_t>> tail_boxes;
        for (int i = m; i < n; ++i)
            tail_boxes.push_back(ctx.boxes_of(cert.sequence[static_cast<std::size_t>(i)]));
        for (int i = m; i < n; ++i) {
            if (tail_boxes[static_cast<std::size_t>(i - m)].empty()) {
                rep.violations.push_back({static_cast<int>(c), i, i, 6,
                                          "tail point lies outside the cover union"});
                break;
            }
        }
        for (int i = m; i + 1 < n; ++i) {
            auto allowed = ctx.step_target_boxes(tail_boxes[static_cast<std::size_t>(i - m)]);
            if (!detail::LoopContext::hits(tail_boxes[static_cast<std::size_t>(i + 1 - m)], allowed)) {
                rep.violations.push_back({static_cast<int>(c), i, i + 1, 7,
                                          "tail step violates the star-image condition"});
                break;
            }
        }
    }

    // refinement transfer: every finer-cover loop verifies against every
    // coarser ladder cover
    for (std::size_t ci = 0; ci < covers; ++ci) {
        detail::LoopContext ctx(sys, cert.ladder[ci]);
        for (std::size_t cj = ci + 1; cj < covers; ++cj) {
            int prev = cert.thresholds[cj];
            for (int r : cert.cuts[cj]) {
                auto w = detail::evaluate_loop(
                    ctx,
                    std::span<const Point>(cert.sequence)
                        .subspan(static_cast<std::size_t>(prev), static_cast<std::size_t>(r - prev + 1)),
                    cert.base);
                if (!w.verified())
                    rep.violations.push_back({static_cast<int>(ci), prev, r, 9,
                                              "loop of ladder cover " + std::to_string(cj) +
                                                  " fails against coarser cover " + std::to_string(ci)});
                prev = r + 1;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Perturbation invariance

struct PerturbReport {
    int trials = 0;
    int flips = 0;          // verdict or diagnostics changed
    bool control = false;   // a support coordinate was perturbed too
    std::vector<int> flip_trials;
};

/// Rewrites every coordinate outside the cover's support with fresh random
/// rationals (and adds fresh off-support coordinates), re-evaluates, and
/// reports any change in the verdict or the per-condition diagnostics. With
/// touch_support set, one support coordinate is perturbed as a negative
/// control and changes are expected.
inline PerturbReport perturb_invariance_check(const LoopWitness& witness,
                                              const DiscreteSystem& sys, int trials,
                                              std::uint64_t seed,
                                              bool touch_support = false) {
    PerturbReport rep;
    rep.trials = trials;
    rep.control = touch_support;
    const auto& support = witness.cover.support();
    auto in_support = [&](Coord c) {
        return std::binary_search(support.begin(), support.end(), c);
    };
    Coord fresh = 0;
    for (Coord c : support) fresh = std::max(fresh, c + 1);
    for (const auto& p : witness.segment)
        if (!p.coords().empty()) fresh = std::max(fresh, p.coords().rbegin()->first + 1);
    if (!witness.base.coords().empty())
        fresh = std::max(fresh, witness.base.coords().rbegin()->first + 1);

    detail::LoopContext ctx(sys, witness.cover);
    auto original = detail::evaluate_loop(ctx, witness.segment, witness.base);

    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        std::vector<Point> seg = witness.segment;
        for (auto& p : seg) {
            std::vector<Coord> off;
            for (const auto& [c, v] : p.coords())
                if (!in_support(c)) off.push_back(c);
            for (Coord c : off) p.set(c, rng.rational(1024));
            p.set(fresh + (static_cast<Coord>(t) % 3), rng.rational(1024));
            if (touch_support && !support.empty()) p.set(support.front(), rng.rational(1024));
        }
        auto perturbed = detail::evaluate_loop(ctx, seg, witness.base);
        if (perturbed.diag.cond != original.diag.cond) {
            ++rep.flips;
            rep.flip_trials.push_back(t);
        }
    }
    return rep;
}

}  // namespace chaincert
