// Points with sparse rational coordinates in [0,1], basic open boxes with
// rational interval constraints, finite nice covers, and the star/refinement
// calculus over them. Everything here is decided by exact rational
// comparison.
//
// Interval semantics: a constraint (lo, hi) on a coordinate denotes the
// relatively open subset of [0,1], i.e. (lo, hi) plus the endpoint 0 when
// lo = 0 and the endpoint 1 when hi = 1. Interior endpoints are strictly
// excluded. The constraint (0, 1) is therefore the whole coordinate and is
// dropped in canonical form.
#pragma once

#include "chaincert/errors.hpp"
#include "chaincert/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace chaincert {

// ---------------------------------------------------------------------------
// Intervals

struct Interval {
    Rat lo;
    Rat hi;

    friend bool operator==(const Interval& a, const Interval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
};

inline int interval_cmp(const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo ? -1 : 1;
    if (a.hi != b.hi) return a.hi < b.hi ? -1 : 1;
    return 0;
}

inline bool interval_is_full(const Interval& iv) { return iv.lo == 0 && iv.hi == 1; }

inline bool interval_contains(const Interval& iv, const Rat& v) {
    if (iv.lo < v && v < iv.hi) return true;
    if (v == 0 && iv.lo == 0) return true;
    if (v == 1 && iv.hi == 1) return true;
    return false;
}

// With the boundary-closure rule determined by the endpoint values,
// containment and overlap reduce to plain endpoint comparisons.
inline bool interval_subset(const Interval& inner, const Interval& outer) {
    return outer.lo <= inner.lo && inner.hi <= outer.hi;
}

inline bool interval_meets(const Interval& a, const Interval& b) {
    const Rat& lo = a.lo > b.lo ? a.lo : b.lo;
    const Rat& hi = a.hi < b.hi ? a.hi : b.hi;
    return lo < hi;
}

inline std::optional<Interval> interval_intersect(const Interval& a, const Interval& b) {
    Interval r{a.lo > b.lo ? a.lo : b.lo, a.hi < b.hi ? a.hi : b.hi};
    if (r.lo < r.hi) return r;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Points

/// A point of [0,1]^delta with finite support. Coordinates not stored read
/// as 0, so the map never stores zero values (canonical sparse form).
class Point {
public:
    Point() = default;

    explicit Point(std::map<Coord, Rat> coords) {
        for (auto& [c, v] : coords) {
            if (v < 0 || v > 1) throw BadParams("point coordinate outside [0,1]");
            if (v != 0) coords_.emplace(c, std::move(v));
        }
    }

    static Point single(Coord c, Rat v) {
        std::map<Coord, Rat> m;
        m.emplace(c, std::move(v));
        return Point(std::move(m));
    }

    const std::map<Coord, Rat>& coords() const { return coords_; }

    Rat get(Coord c) const {
        auto it = coords_.find(c);
        return it == coords_.end() ? Rat(0) : it->second;
    }

    /// Sets a coordinate, keeping the no-zeros invariant.
    void set(Coord c, const Rat& v) {
        if (v < 0 || v > 1) throw BadParams("point coordinate outside [0,1]");
        if (v == 0)
            coords_.erase(c);
        else
            coords_[c] = v;
    }

    friend bool operator==(const Point& a, const Point& b) { return a.coords_ == b.coords_; }

    /// Lexicographic order over coordinates ascending, absent = 0.
    friend bool operator<(const Point& a, const Point& b) {
        auto ia = a.coords_.begin(), ib = b.coords_.begin();
        while (ia != a.coords_.end() || ib != b.coords_.end()) {
            Coord ca = ia == a.coords_.end() ? ~Coord(0) : ia->first;
            Coord cb = ib == b.coords_.end() ? ~Coord(0) : ib->first;
            if (ca == cb) {
                if (ia->second != ib->second) return ia->second < ib->second;
                ++ia, ++ib;
            } else if (ca < cb) {
                // a has a nonzero value where b reads 0
                return false;
            } else {
                return true;
            }
        }
        return false;
    }

private:
    std::map<Coord, Rat> coords_;
};

/// Max-metric distance over the union of supports.
inline Rat max_distance(const Point& a, const Point& b) {
    Rat best(0);
    auto consider = [&](const Rat& x, const Rat& y) {
        Rat d = x > y ? x - y : y - x;
        if (d > best) best = d;
    };
    for (const auto& [c, v] : a.coords()) consider(v, b.get(c));
    for (const auto& [c, v] : b.coords()) {
        if (a.coords().count(c) == 0) consider(Rat(0), v);
    }
    return best;
}

inline bool agree_on(const Point& a, const Point& b, std::span<const Coord> coords) {
    for (Coord c : coords)
        if (a.get(c) != b.get(c)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Boxes

/// A basic open subset of [0,1]^delta: finitely many coordinate constraints,
/// each a (relatively) open rational interval. Unconstrained coordinates are
/// unrestricted.
class Box {
public:
    Box() = default;

    explicit Box(std::map<Coord, Interval> cons) {
        for (auto& [c, iv] : cons) {
            if (!(Rat(0) <= iv.lo && iv.lo < iv.hi && iv.hi <= Rat(1)))
                throw BadParams("box interval must satisfy 0 <= lo < hi <= 1");
            if (!interval_is_full(iv)) cons_.emplace(c, std::move(iv));
        }
    }

    static Box whole() { return Box(); }

    const std::map<Coord, Interval>& constraints() const { return cons_; }
    bool unconstrained() const { return cons_.empty(); }

    bool contains(const Point& p) const {
        for (const auto& [c, iv] : cons_)
            if (!interval_contains(iv, p.get(c))) return false;
        return true;
    }

    bool subset_of(const Box& other) const {
        for (const auto& [c, iv] : other.cons_) {
            auto it = cons_.find(c);
            if (it == cons_.end()) return false;  // our projection is all of [0,1]
            if (!interval_subset(it->second, iv)) return false;
        }
        return true;
    }

    bool meets(const Box& other) const {
        for (const auto& [c, iv] : cons_) {
            auto it = other.cons_.find(c);
            if (it != other.cons_.end() && !interval_meets(iv, it->second)) return false;
        }
        return true;
    }

    std::optional<Box> intersect(const Box& other) const {
        std::map<Coord, Interval> out = cons_;
        for (const auto& [c, iv] : other.cons_) {
            auto it = out.find(c);
            if (it == out.end()) {
                out.emplace(c, iv);
            } else {
                auto r = interval_intersect(it->second, iv);
                if (!r) return std::nullopt;
                it->second = *r;
            }
        }
        Box b;
        b.cons_ = std::move(out);
        return b;
    }

    friend bool operator==(const Box& a, const Box& b) { return a.cons_ == b.cons_; }

private:
    std::map<Coord, Interval> cons_;
};

/// Canonical box order: lexicographic over the (coordinate, lo, hi) triples.
inline int box_cmp(const Box& a, const Box& b) {
    auto ia = a.constraints().begin(), ib = b.constraints().begin();
    while (ia != a.constraints().end() && ib != b.constraints().end()) {
        if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
        int c = interval_cmp(ia->second, ib->second);
        if (c != 0) return c;
        ++ia, ++ib;
    }
    if (ia != a.constraints().end()) return 1;
    if (ib != b.constraints().end()) return -1;
    return 0;
}

inline bool box_less(const Box& a, const Box& b) { return box_cmp(a, b) < 0; }

// ---------------------------------------------------------------------------
// Covers

/// A finite cover candidate: a nonempty list of boxes, kept sorted in
/// canonical order with duplicates removed, plus the sorted union of all
/// constrained coordinates ("support"). Whether the cover is *nice* is
/// relative to a sample and checked by is_nice().
class Cover {
public:
    explicit Cover(std::vector<Box> boxes) : boxes_(std::move(boxes)) {
        if (boxes_.empty()) throw BadParams("cover must contain at least one box");
        std::sort(boxes_.begin(), boxes_.end(), box_less);
        boxes_.erase(std::unique(boxes_.begin(), boxes_.end()), boxes_.end());
        std::set<Coord> sup;
        for (const auto& b : boxes_)
            for (const auto& [c, iv] : b.constraints()) sup.insert(c);
        support_.assign(sup.begin(), sup.end());
    }

    const std::vector<Box>& boxes() const { return boxes_; }
    std::size_t size() const { return boxes_.size(); }
    const Box& box(std::size_t i) const { return boxes_[i]; }
    const std::vector<Coord>& support() const { return support_; }

    friend bool operator==(const Cover& a, const Cover& b) { return a.boxes_ == b.boxes_; }

private:
    std::vector<Box> boxes_;
    std::vector<Coord> support_;
};

// ---------------------------------------------------------------------------
// Operations

inline bool box_member(const Point& p, const Box& b) { return b.contains(p); }

/// Nice relative to the sample: every box meets the sample and the boxes
/// jointly cover it.
inline bool is_nice(const Cover& cover, std::span<const Point> sample) {
    if (sample.empty()) throw BadParams("is_nice: sample must be nonempty");
    for (const auto& b : cover.boxes()) {
        bool meets = false;
        for (const auto& p : sample)
            if (b.contains(p)) { meets = true; break; }
        if (!meets) return false;
    }
    for (const auto& p : sample) {
        bool covered = false;
        for (const auto& b : cover.boxes())
            if (b.contains(p)) { covered = true; break; }
        if (!covered) return false;
    }
    return true;
}

/// Indices of the boxes meeting at least one target point; the union of the
/// returned boxes is the star U*(targets).
inline std::vector<std::size_t> star_indices(const Cover& cover, std::span<const Point> targets) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cover.size(); ++i) {
        for (const auto& t : targets)
            if (cover.box(i).contains(t)) { out.push_back(i); break; }
    }
    return out;
}

inline std::vector<Box> star(const Cover& cover, std::span<const Point> targets) {
    std::vector<Box> out;
    for (std::size_t i : star_indices(cover, targets)) out.push_back(cover.box(i));
    return out;
}

/// Boxes of the cover meeting the given box geometrically.
inline std::vector<std::size_t> star_indices_of_box(const Cover& cover, const Box& b) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cover.size(); ++i)
        if (cover.box(i).meets(b)) out.push_back(i);
    return out;
}

/// u refines v: every box of u is contained in some box of v.
inline bool refines(const Cover& u, const Cover& v) {
    for (const auto& ub : u.boxes()) {
        bool ok = false;
        for (const auto& vb : v.boxes())
            if (ub.subset_of(vb)) { ok = true; break; }
        if (!ok) return false;
    }
    return true;
}

/// The full-refinement discipline: u refines v and every box of v contains
/// at least one box of u. Ladder covers obey this, which is what makes the
/// "every box hit" loop condition transfer to coarser covers.
inline bool fully_refines(const Cover& u, const Cover& v) {
    if (!refines(u, v)) return false;
    for (const auto& vb : v.boxes()) {
        bool ok = false;
        for (const auto& ub : u.boxes())
            if (ub.subset_of(vb)) { ok = true; break; }
        if (!ok) return false;
    }
    return true;
}

/// u star-refines v: for every box U of u, the union of the boxes of u
/// meeting U fits inside a single box of v. A union fits inside a box iff
/// each of its boxes does, so the check is exact interval arithmetic.
inline bool star_refines(const Cover& u, const Cover& v) {
    for (const auto& ub : u.boxes()) {
        std::vector<std::size_t> w = star_indices_of_box(u, ub);
        bool ok = false;
        for (const auto& vb : v.boxes()) {
            bool all = true;
            for (std::size_t i : w)
                if (!u.box(i).subset_of(vb)) { all = false; break; }
            if (all) { ok = true; break; }
        }
        if (!ok) return false;
    }
    return true;
}

/// Pairwise intersections that meet the sample. Nice when both inputs are
/// nice; refines both.
inline Cover common_refinement(const Cover& u, const Cover& v, std::span<const Point> sample) {
    std::vector<Box> out;
    for (const auto& ub : u.boxes()) {
        for (const auto& vb : v.boxes()) {
            auto w = ub.intersect(vb);
            if (!w) continue;
            bool meets = false;
            for (const auto& p : sample)
                if (w->contains(p)) { meets = true; break; }
            if (meets) out.push_back(std::move(*w));
        }
    }
    if (out.empty())
        throw EmptyResult("common_refinement: no pairwise intersection meets the sample");
    return Cover(std::move(out));
}

// ---------------------------------------------------------------------------
// Grid covers

/// The overlapping grid cells at mesh r on one coordinate: intervals
/// ((j-1)r, (j+1)r) clipped to [0,1], j = 0, 1, ... Boundary cells keep the
/// endpoints via the relative-open rule.
inline std::vector<Interval> grid_cells(const Rat& mesh) {
    if (!(mesh > 0 && mesh <= 1)) throw BadParams("grid mesh must lie in (0,1]");
    std::vector<Interval> cells;
    for (BigInt j = 0;; ++j) {
        Rat lo = Rat(j - 1) * mesh;
        if (lo >= 1) break;
        Rat hi = Rat(j + 1) * mesh;
        if (lo < 0) lo = 0;
        if (hi > 1) hi = 1;
        if (lo < hi) cells.push_back(Interval{lo, hi});
    }
    return cells;
}

/// Indices of the grid cells containing the value (one or two of them).
inline std::vector<std::size_t> grid_cells_containing(const std::vector<Interval>& cells,
                                                      const Rat& mesh, const Rat& v) {
    std::vector<std::size_t> out;
    BigInt j0 = rat_floor(v / mesh);
    for (BigInt j = j0 - 1; j <= j0 + 2; ++j) {
        if (j < 0 || j >= BigInt(cells.size())) continue;
        auto idx = j.convert_to<std::size_t>();
        if (interval_contains(cells[idx], v)) out.push_back(idx);
    }
    return out;
}

/// The sample-trimmed product grid cover at the given mesh over the given
/// coordinates: exactly the product cells touched by at least one sample
/// point. Nice for the sample by construction.
inline Cover grid_cover(std::span<const Coord> coords, const Rat& mesh,
                        std::span<const Point> sample) {
    if (sample.empty()) throw BadParams("grid_cover: sample must be nonempty");
    if (coords.empty()) return Cover({Box::whole()});
    std::vector<Interval> cells = grid_cells(mesh);
    std::set<std::vector<std::size_t>> combos;
    std::vector<std::vector<std::size_t>> per_coord(coords.size());
    for (const auto& p : sample) {
        for (std::size_t k = 0; k < coords.size(); ++k)
            per_coord[k] = grid_cells_containing(cells, mesh, p.get(coords[k]));
        std::vector<std::size_t> pick(coords.size(), 0);
        // enumerate the (at most 2^d) products of candidate cells
        while (true) {
            std::vector<std::size_t> combo(coords.size());
            for (std::size_t k = 0; k < coords.size(); ++k) combo[k] = per_coord[k][pick[k]];
            combos.insert(std::move(combo));
            std::size_t k = 0;
            while (k < coords.size()) {
                if (++pick[k] < per_coord[k].size()) break;
                pick[k] = 0;
                ++k;
            }
            if (k == coords.size()) break;
        }
    }
    std::vector<Box> boxes;
    for (const auto& combo : combos) {
        std::map<Coord, Interval> cons;
        for (std::size_t k = 0; k < coords.size(); ++k) cons.emplace(coords[k], cells[combo[k]]);
        boxes.emplace_back(std::move(cons));
    }
    return Cover(std::move(boxes));
}

inline std::vector<Coord> sample_support(std::span<const Point> sample) {
    std::set<Coord> sup;
    for (const auto& p : sample)
        for (const auto& [c, v] : p.coords()) sup.insert(c);
    return {sup.begin(), sup.end()};
}

/// Splits every box of the cover along its longest constrained interval into
/// two overlapping thirds-children and keeps the children meeting the
/// sample. The result fully refines the input.
inline Cover subdivide_cover(const Cover& u, std::span<const Point> sample) {
    std::vector<Coord> ssup = sample_support(sample);
    std::vector<Box> out;
    for (const auto& b : u.boxes()) {
        Coord split = 0;
        bool have = false;
        Rat best_len(0);
        for (const auto& [c, iv] : b.constraints()) {
            Rat len = iv.hi - iv.lo;
            if (!have || len > best_len) { split = c; best_len = len; have = true; }
        }
        Interval base{Rat(0), Rat(1)};
        if (!have) {
            // unconstrained box: introduce a constraint on the first sample
            // support coordinate, if any
            if (ssup.empty()) { out.push_back(b); continue; }
            split = ssup.front();
        } else {
            base = b.constraints().at(split);
        }
        Rat len = base.hi - base.lo;
        Interval left{base.lo, base.lo + len * Rat(2, 3)};
        Interval right{base.lo + len / 3, base.hi};
        for (const Interval& iv : {left, right}) {
            std::map<Coord, Interval> cons(b.constraints().begin(), b.constraints().end());
            cons[split] = iv;
            Box child{std::move(cons)};
            for (const auto& p : sample)
                if (child.contains(p)) { out.push_back(child); break; }
        }
    }
    return Cover(std::move(out));
}

/// Searches dyadic sample-trimmed grids of increasing depth until one
/// star-refines the input; star_refines is the acceptance oracle. The
/// verification runs over the produced boxes geometrically, but only boxes
/// meeting the sample are kept, so the guarantee is sample-level.
inline Cover star_refinement(const Cover& u, std::span<const Point> sample, int budget) {
    if (!is_nice(u, sample)) throw BadParams("star_refinement: input cover not nice for sample");
    std::set<Coord> sup(u.support().begin(), u.support().end());
    for (Coord c : sample_support(sample)) sup.insert(c);
    std::vector<Coord> coords(sup.begin(), sup.end());
    Rat mesh(1);
    for (int depth = 1; depth <= budget; ++depth) {
        mesh /= 2;
        Cover v = grid_cover(coords, mesh, sample);
        if (star_refines(v, u)) return v;
    }
    throw BudgetExhausted("star_refinement: no dyadic grid up to depth " +
                          std::to_string(budget) + " star-refines the cover");
}

}  // namespace chaincert
