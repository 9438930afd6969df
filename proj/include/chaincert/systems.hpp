// Sampled dynamical systems: a finite list of distinct rational points with
// a total self-map on sample indices, plus generators for the test-bed zoo,
// products, projection factors, the one-point-compactification shift, and
// omega-limit approximation.
#pragma once

#include "chaincert/errors.hpp"
#include "chaincert/geometry.hpp"
#include "chaincert/rational.hpp"

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace chaincert {

struct Caps {
    std::size_t product_size_cap = 200000;
    std::size_t onepoint_size_cap = 10000;
    std::size_t sft_size_cap = 100000;
    int trapping_exhaustive_cap = 20;
    int equivalence_cap = 12;
    long long fiber_cap = 64;
};

struct DiscreteSystem {
    std::vector<Point> sample;           // pairwise distinct
    std::vector<int> map;                // total: sample index -> sample index
    Rat mesh = Rat(0);                   // sample density parameter; 0 = purely discrete
    std::map<std::string, std::string> meta;  // generator descriptor

    int n() const { return static_cast<int>(sample.size()); }
    int image(int i) const { return map[static_cast<std::size_t>(i)]; }
    const Point& image_point(int i) const { return sample[static_cast<std::size_t>(map[static_cast<std::size_t>(i)])]; }

    void validate() const {
        if (sample.empty()) throw BadParams("system sample must be nonempty");
        if (map.size() != sample.size()) throw BadParams("system map must be total");
        for (int t : map)
            if (t < 0 || t >= n()) throw BadParams("system map image out of range");
        std::set<Point> seen(sample.begin(), sample.end());
        if (seen.size() != sample.size()) throw BadParams("sample points must be distinct");
    }
};

enum class ZooKind { tent, rotation, doubling, identity, sft, table };

inline const char* zoo_kind_name(ZooKind k) {
    switch (k) {
        case ZooKind::tent: return "tent";
        case ZooKind::rotation: return "rotation";
        case ZooKind::doubling: return "doubling";
        case ZooKind::identity: return "identity";
        case ZooKind::sft: return "sft";
        case ZooKind::table: return "table";
    }
    return "?";
}

struct ZooParams {
    Rat angle = Rat(0);                           // rotation
    std::vector<std::vector<int>> adjacency;      // sft
    int sft_depth = 3;                            // sft word length
    std::vector<Point> table_sample;              // table
    std::vector<int> table_map;                   // table
    Rat table_mesh = Rat(0);                      // table
};

namespace detail {

// Nearest value k/n to v within the net {lo..hi}/n; ties to the smaller k.
inline BigInt snap_index(const Rat& v, const BigInt& n, const BigInt& kmax) {
    Rat t = v * Rat(n);
    BigInt k = rat_floor(t);
    // round half down: k+1 is nearer only if frac(t) > 1/2
    if (t - Rat(k) > Rat(1, 2)) ++k;
    if (k < 0) k = 0;
    if (k > kmax) k = kmax;
    return k;
}

}  // namespace detail

/// Uniform-net samples of the classical zoo on coordinate 0. Interval maps
/// (tent, identity) use the closed net {0, r, ..., 1}; circle maps
/// (rotation, doubling) the half-open net {0, r, ..., 1-r}. Images are the
/// exact map values snapped to the nearest net point, ties toward the
/// smaller point, so certificates re-verify bit-exactly.
inline DiscreteSystem make_zoo_system(ZooKind kind, const ZooParams& params,
                                      const Rat& resolution, const Caps& caps = {}) {
    DiscreteSystem sys;
    sys.meta["kind"] = zoo_kind_name(kind);

    if (kind == ZooKind::table) {
        sys.sample = params.table_sample;
        sys.map = params.table_map;
        sys.mesh = params.table_mesh;
        sys.validate();
        return sys;
    }

    if (kind == ZooKind::sft) {
        const auto& adj = params.adjacency;
        std::size_t m = adj.size();
        if (m == 0) throw BadParams("sft adjacency must be nonempty");
        for (const auto& row : adj) {
            if (row.size() != m) throw BadParams("sft adjacency must be square");
            for (int x : row)
                if (x != 0 && x != 1) throw BadParams("sft adjacency entries must be 0/1");
        }
        for (std::size_t s = 0; s < m; ++s) {
            bool out = false;
            for (std::size_t t = 0; t < m; ++t) out = out || adj[s][t] == 1;
            if (!out) throw BadParams("sft dead state " + std::to_string(s));
        }
        int d = params.sft_depth;
        if (d < 1) throw BadParams("sft depth must be >= 1");
        // enumerate admissible words of length d in lexicographic order
        std::vector<std::vector<int>> words;
        std::vector<int> w;
        auto embed = [&](int s) { return Rat(s + 1, static_cast<long long>(m) + 1); };
        std::function<void(int)> rec = [&](int pos) {
            if (words.size() > caps.sft_size_cap) throw SizeCap("sft sample exceeds cap");
            if (pos == d) { words.push_back(w); return; }
            for (std::size_t s = 0; s < m; ++s) {
                if (pos > 0 && adj[static_cast<std::size_t>(w[static_cast<std::size_t>(pos) - 1])][s] == 0) continue;
                w.push_back(static_cast<int>(s));
                rec(pos + 1);
                w.pop_back();
            }
        };
        rec(0);
        std::map<std::vector<int>, int> index;
        for (std::size_t i = 0; i < words.size(); ++i) index[words[i]] = static_cast<int>(i);
        for (const auto& word : words) {
            std::map<Coord, Rat> cs;
            for (int j = 0; j < d; ++j) cs[static_cast<Coord>(j)] = embed(word[static_cast<std::size_t>(j)]);
            sys.sample.emplace_back(std::move(cs));
        }
        for (const auto& word : words) {
            std::vector<int> img(word.begin() + 1, word.end());
            int last = img.empty() ? word[0] : img.back();
            int next = -1;
            for (std::size_t t = 0; t < m; ++t)
                if (adj[static_cast<std::size_t>(last)][t] == 1) { next = static_cast<int>(t); break; }
            img.push_back(next);
            if (d == 1) img = {next};
            sys.map.push_back(index.at(img));
        }
        sys.mesh = Rat(0);
        sys.meta["states"] = std::to_string(m);
        sys.meta["depth"] = std::to_string(d);
        sys.validate();
        return sys;
    }

    if (!(resolution > 0 && resolution <= 1) || !is_unit_fraction(resolution))
        throw BadParams("resolution must be a positive unit fraction");
    BigInt nn = rat_den(resolution);
    bool closed = (kind == ZooKind::tent || kind == ZooKind::identity);
    BigInt kmax = closed ? nn : nn - 1;
    if (kind == ZooKind::rotation && !(params.angle >= 0 && params.angle < 1))
        throw BadParams("rotation angle must lie in [0,1)");

    std::vector<Rat> net;
    for (BigInt k = 0; k <= kmax; ++k) net.push_back(Rat(k) / Rat(nn));

    auto truth = [&](const Rat& x) -> Rat {
        switch (kind) {
            case ZooKind::tent: return x <= Rat(1, 2) ? x * 2 : Rat(2) - x * 2;
            case ZooKind::identity: return x;
            case ZooKind::rotation: {
                Rat v = x + params.angle;
                if (v >= 1) v -= 1;
                return v;
            }
            case ZooKind::doubling: {
                Rat v = x * 2;
                if (v >= 1) v -= 1;
                return v;
            }
            default: throw BadParams("unreachable");
        }
    };

    for (const Rat& x : net) sys.sample.push_back(Point::single(0, x));
    for (const Rat& x : net) {
        BigInt k = detail::snap_index(truth(x), nn, kmax);
        sys.map.push_back(k.convert_to<int>());
    }
    sys.mesh = resolution;
    sys.meta["resolution"] = rat_str(resolution);
    if (kind == ZooKind::rotation) sys.meta["angle"] = rat_str(params.angle);
    sys.validate();
    return sys;
}

/// Componentwise product; b's coordinates are shifted past a's.
inline DiscreteSystem product(const DiscreteSystem& a, const DiscreteSystem& b,
                              const Caps& caps = {}) {
    if (a.sample.size() * b.sample.size() > caps.product_size_cap)
        throw SizeCap("product sample would exceed the configured cap");
    Coord shift = 0;
    for (const auto& p : a.sample)
        if (!p.coords().empty()) shift = std::max(shift, p.coords().rbegin()->first + 1);
    if (shift == 0) shift = 1;
    DiscreteSystem out;
    out.mesh = std::max(a.mesh, b.mesh);
    out.meta["kind"] = "product";
    out.meta["shift"] = std::to_string(shift);
    for (const auto& pa : a.sample) {
        for (const auto& pb : b.sample) {
            std::map<Coord, Rat> cs(pa.coords().begin(), pa.coords().end());
            for (const auto& [c, v] : pb.coords()) cs[c + shift] = v;
            out.sample.emplace_back(std::move(cs));
        }
    }
    int nb = b.n();
    for (int ia = 0; ia < a.n(); ++ia)
        for (int ib = 0; ib < nb; ++ib)
            out.map.push_back(a.map[static_cast<std::size_t>(ia)] * nb + b.map[static_cast<std::size_t>(ib)]);
    out.validate();
    return out;
}

struct FactorDescriptor {
    std::vector<Coord> coords;  // sorted, nonempty
};

inline Point project_point(const Point& p, const FactorDescriptor& d) {
    std::map<Coord, Rat> cs;
    for (Coord c : d.coords) {
        Rat v = p.get(c);
        if (v != 0) cs[c] = v;
    }
    return Point(std::move(cs));
}

/// The induced factor on the retained coordinates. Throws Incompatible with
/// a witness pair when two sample points agree on the coordinates but their
/// images do not — the finite analogue of the projection-compatibility
/// condition failing.
inline DiscreteSystem projection_factor(const DiscreteSystem& sys, const FactorDescriptor& d) {
    if (d.coords.empty()) throw BadParams("factor descriptor must retain some coordinate");
    std::map<Point, int> index;           // projected point -> new index
    std::vector<int> rep;                 // new index -> witness old index
    std::vector<int> proj_of(sys.sample.size());
    DiscreteSystem out;
    for (std::size_t i = 0; i < sys.sample.size(); ++i) {
        Point q = project_point(sys.sample[i], d);
        auto it = index.find(q);
        if (it == index.end()) {
            int id = static_cast<int>(out.sample.size());
            index.emplace(q, id);
            out.sample.push_back(std::move(q));
            rep.push_back(static_cast<int>(i));
            proj_of[i] = id;
        } else {
            proj_of[i] = it->second;
        }
    }
    out.map.assign(out.sample.size(), -1);
    for (std::size_t i = 0; i < sys.sample.size(); ++i) {
        int src = proj_of[i];
        int dst = proj_of[static_cast<std::size_t>(sys.map[i])];
        if (out.map[static_cast<std::size_t>(src)] == -1)
            out.map[static_cast<std::size_t>(src)] = dst;
        else if (out.map[static_cast<std::size_t>(src)] != dst)
            throw Incompatible(rep[static_cast<std::size_t>(src)], static_cast<int>(i));
    }
    out.mesh = sys.mesh;
    out.meta = sys.meta;
    out.meta["kind"] = "factor(" + (sys.meta.count("kind") ? sys.meta.at("kind") : "?") + ")";
    out.validate();
    return out;
}

/// Circle embedding of Z ∪ {∞}: the point at parameter n has angle
/// pi + 2*atan(n), whose circle coordinates are exactly rational:
///   theta(n) = (n^2/(n^2+1), (n-1)^2 / (2(n^2+1))),  star = (1, 1/2).
/// Both ends of Z accumulate at the star point, so coarse covers connect
/// the far tails to star.
inline Point onepoint_theta(long long n) {
    BigInt nn = n;
    BigInt d = nn * nn + 1;
    Rat x(nn * nn, d);
    Rat y((nn - 1) * (nn - 1), 2 * d);
    std::map<Coord, Rat> cs;
    if (x != 0) cs[0] = x;
    if (y != 0) cs[1] = y;
    return Point(std::move(cs));
}

/// Truncated one-point-compactification shift over Z x Y. The map sends
/// (n,y) to (n+1,y) for n < n_max, (n_max,y) to star, and star to
/// (-n_max, y0); the last arc is the finite surrogate for the fixed star
/// point and is recorded in meta.
inline DiscreteSystem onepoint_shift(std::span<const Point> y_sample, int n_max,
                                     const Caps& caps = {}) {
    if (y_sample.empty()) throw BadParams("onepoint_shift: y sample must be nonempty");
    if (n_max < 0) throw BadParams("onepoint_shift: n_max must be >= 0");
    std::size_t count = static_cast<std::size_t>(2 * n_max + 1) * y_sample.size() + 1;
    if (count > caps.onepoint_size_cap) throw SizeCap("onepoint_shift sample exceeds cap");

    Coord shift = 2;  // theta occupies coordinates 0 and 1
    auto lift = [&](long long n, const Point& y) {
        Point p = onepoint_theta(n);
        std::map<Coord, Rat> cs(p.coords().begin(), p.coords().end());
        for (const auto& [c, v] : y.coords()) cs[c + shift] = v;
        return Point(std::move(cs));
    };

    DiscreteSystem out;
    std::map<std::pair<long long, std::size_t>, int> idx;
    for (long long n = -n_max; n <= n_max; ++n) {
        for (std::size_t yi = 0; yi < y_sample.size(); ++yi) {
            idx[{n, yi}] = static_cast<int>(out.sample.size());
            out.sample.push_back(lift(n, y_sample[yi]));
        }
    }
    int star = static_cast<int>(out.sample.size());
    {
        std::map<Coord, Rat> cs;
        cs[0] = Rat(1);
        cs[1] = Rat(1, 2);
        out.sample.push_back(Point(std::move(cs)));
    }
    out.map.assign(out.sample.size(), 0);
    for (long long n = -n_max; n <= n_max; ++n)
        for (std::size_t yi = 0; yi < y_sample.size(); ++yi)
            out.map[static_cast<std::size_t>(idx[{n, yi}])] =
                n < n_max ? idx[{n + 1, yi}] : star;
    out.map[static_cast<std::size_t>(star)] = idx[{-static_cast<long long>(n_max), 0}];
    out.mesh = Rat(0);
    out.meta["kind"] = "onepoint_shift";
    out.meta["n_max"] = std::to_string(n_max);
    out.meta["y_count"] = std::to_string(y_sample.size());
    out.meta["surrogate"] = "star -> (-n_max, y0) replaces the fixed star point";
    out.validate();
    return out;
}

struct OmegaLimit {
    std::vector<int> cycle;      // sorted; the orbit's eventual cycle
    std::vector<int> transient;  // pre-cycle prefix, truncated to burn_in
    bool transient_truncated = false;
};

/// The orbit of a finite map is eventually periodic; returns the cycle it
/// enters. burn_in only caps the reported transient diagnostics.
inline OmegaLimit omega_limit_approx(const DiscreteSystem& sys, int start, int burn_in) {
    if (start < 0 || start >= sys.n()) throw BadParams("omega_limit_approx: start out of range");
    if (burn_in < 0) throw BadParams("omega_limit_approx: burn_in must be >= 0");
    std::vector<int> pos(sys.sample.size(), -1);
    std::vector<int> order;
    int v = start;
    while (pos[static_cast<std::size_t>(v)] == -1) {
        pos[static_cast<std::size_t>(v)] = static_cast<int>(order.size());
        order.push_back(v);
        v = sys.image(v);
    }
    int entry = pos[static_cast<std::size_t>(v)];
    OmegaLimit out;
    out.cycle.assign(order.begin() + entry, order.end());
    std::sort(out.cycle.begin(), out.cycle.end());
    int tlen = entry;
    out.transient_truncated = tlen > burn_in;
    out.transient.assign(order.begin(), order.begin() + std::min(tlen, burn_in));
    return out;
}

}  // namespace chaincert
