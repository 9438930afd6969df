// The harmonic-walk lifting obstruction and the greedy conjugacy-refuting
// construction.
//
// p_Z(k) is the distance from H_k = sum_{1<=m<=k} 1/m to the nearest even
// integer. Values are exact rationals up to a cutoff (denominators are the
// running lcm, so updates stay big-by-small); beyond the cutoff they are
// dyadic approximants with a tracked one-sided error bound, and every
// verdict derived from them is certified against that bound.
#pragma once

#include "chaincert/errors.hpp"
#include "chaincert/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <tuple>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace chaincert {

class HarmonicWalk {
public:
    static constexpr int default_cutoff = 10000;
    static constexpr int default_bits = 128;

    static HarmonicWalk generate(int n, int exact_cutoff = default_cutoff,
                                 int bits = default_bits) {
        if (n < 1) throw BadParams("harmonic walk length must be >= 1");
        HarmonicWalk w;
        w.n_ = n;
        w.bits_ = bits;
        w.pow2_ = BigInt(1) << bits;
        BigInt num = 0, den = 1;
        w.dens_.push_back(den);
        int k_exact = std::min(n, exact_cutoff);
        for (int k = 1; k <= k_exact; ++k) {
            BigInt kk(k);
            BigInt g = boost::multiprecision::gcd(den, kk);
            BigInt c = kk / g;
            if (c != 1) {
                num *= c;
                den *= c;
                w.dens_.push_back(den);
            }
            num += den / kk;
            Entry e;
            e.den_idx = static_cast<int>(w.dens_.size()) - 1;
            BigInt fl = num / den;
            e.h_floor = fl.convert_to<long long>();
            BigInt e0 = (e.h_floor % 2 == 0) ? fl : fl - 1;
            BigInt d0 = num - e0 * den;
            BigInt d1 = (e0 + 2) * den - num;
            e.pz = d0 < d1 ? d0 : d1;
            w.entries_.push_back(std::move(e));
        }
        if (n > k_exact) {
            BigInt h = (num * w.pow2_) / den;  // floor; error < 2^-bits
            for (int k = k_exact + 1; k <= n; ++k) {
                h += w.pow2_ / k;
                Entry e;
                e.den_idx = -1;
                BigInt fl = h >> bits;
                e.h_floor = fl.convert_to<long long>();
                BigInt e0 = (e.h_floor % 2 == 0) ? fl : fl - 1;
                BigInt d0 = h - (e0 << bits);
                BigInt d1 = ((e0 + 2) << bits) - h;
                e.pz = d0 < d1 ? d0 : d1;
                w.entries_.push_back(std::move(e));
            }
            w.margin_ = BigInt(8) * (n - k_exact + 2);
        }
        return w;
    }

    int size() const { return n_; }
    int bits() const { return bits_; }
    bool exact(int k) const { return entry(k).den_idx >= 0; }

    /// Exact value by construction for exact entries; for dyadic entries the
    /// approximant itself (a legitimate rational within margin() of the true
    /// value).
    Rat value(int k) const {
        const Entry& e = entry(k);
        return Rat(e.pz, e.den_idx >= 0 ? dens_[static_cast<std::size_t>(e.den_idx)] : pow2_);
    }

    /// Certified error bound: 0 for exact entries.
    Rat margin() const { return margin_ == 0 ? Rat(0) : Rat(margin_, pow2_); }

    double approx(int k) const { return rat_approx(value(k)); }

    long long h_floor(int k) const { return entry(k).h_floor; }

    /// Certified: |p_Z(k+1) - p_Z(k)| <= bound.
    bool step_le(int k, const Rat& bound) const {
        auto [dnum, dden, margin_units] = step_raw(k);
        //  (dnum + 2*margin)/dden <= a/b
        BigInt lhs = (dnum + margin_units * margin_) * rat_den(bound);
        return lhs <= rat_num(bound) * dden;
    }

    /// Exact equality test for steps between exact entries.
    bool step_eq(int k, const Rat& q) const {
        if (!exact(k) || !exact(k + 1)) throw BadParams("step_eq requires exact entries");
        auto [dnum, dden, mu] = step_raw(k);
        return dnum * rat_den(q) == rat_num(q) * dden;
    }

    /// Certified containment of p_Z(k) in the closed interval [lo, hi].
    bool value_in(int k, const Rat& lo, const Rat& hi) const {
        const Entry& e = entry(k);
        if (e.den_idx >= 0) {
            const BigInt& den = dens_[static_cast<std::size_t>(e.den_idx)];
            return rat_num(lo) * den <= e.pz * rat_den(lo) &&
                   e.pz * rat_den(hi) <= rat_num(hi) * den;
        }
        return rat_num(lo) * pow2_ <= (e.pz - margin_) * rat_den(lo) &&
               (e.pz + margin_) * rat_den(hi) <= rat_num(hi) * pow2_;
    }

    struct Raw {
        const BigInt* num;
        const BigInt* den;
        bool exact;
    };
    Raw raw(int k) const {
        const Entry& e = entry(k);
        return {&e.pz, e.den_idx >= 0 ? &dens_[static_cast<std::size_t>(e.den_idx)] : &pow2_,
                e.den_idx >= 0};
    }

    const BigInt& pow2() const { return pow2_; }
    const BigInt& margin_num() const { return margin_; }

private:
    struct Entry {
        BigInt pz;
        int den_idx = 0;
        long long h_floor = 0;
    };

    const Entry& entry(int k) const {
        if (k < 1 || k > n_) throw OutOfRange("harmonic walk index out of range");
        return entries_[static_cast<std::size_t>(k) - 1];
    }

    // |p(k+1) - p(k)| as (numerator, denominator, margin units)
    std::tuple<BigInt, BigInt, BigInt> step_raw(int k) const {
        const Entry& a = entry(k);
        const Entry& b = entry(k + 1);
        if (a.den_idx >= 0 && b.den_idx >= 0) {
            const BigInt& da = dens_[static_cast<std::size_t>(a.den_idx)];
            const BigInt& db = dens_[static_cast<std::size_t>(b.den_idx)];
            BigInt mult = db / da;
            BigInt d = b.pz - a.pz * mult;
            if (d < 0) d = -d;
            return {std::move(d), db, BigInt(0)};
        }
        BigInt an = a.den_idx >= 0
                        ? (a.pz * pow2_) / dens_[static_cast<std::size_t>(a.den_idx)]
                        : a.pz;
        BigInt bn = b.den_idx >= 0
                        ? (b.pz * pow2_) / dens_[static_cast<std::size_t>(b.den_idx)]
                        : b.pz;
        BigInt d = bn - an;
        if (d < 0) d = -d;
        return {std::move(d), pow2_, BigInt(2)};
    }

    int n_ = 0;
    int bits_ = default_bits;
    BigInt pow2_;
    BigInt margin_ = 0;
    std::vector<BigInt> dens_;
    std::vector<Entry> entries_;
};

/// The exact walk as a list: p_Z(1..n).
inline std::vector<Rat> harmonic_walk(int n) {
    if (n < 1) throw BadParams("harmonic walk length must be >= 1");
    HarmonicWalk w = HarmonicWalk::generate(n, n);
    std::vector<Rat> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) out.push_back(w.value(k));
    return out;
}

/// Piecewise-linear map through (0,0), (2/3,1), (1,1/2).
inline Rat tent_like_pi(const Rat& t) {
    if (t < 0 || t > 1) throw OutOfDomain("tent_like_pi argument outside [0,1]");
    if (t <= Rat(2, 3)) return t * Rat(3, 2);
    return Rat(1) - (t - Rat(2, 3)) * Rat(3, 2);
}

// ---------------------------------------------------------------------------
// Lifting obstruction

struct LiftingReport {
    bool slowness_ok = false;  // sup step <= delta beyond m
    bool matching_ok = false;  // sup |p_Z - pi(p_y)| <= delta beyond m
    bool escape = false;       // some p_y(k) > 2/3 + eps beyond m
    double slowness_sup = 0;   // display approximations; verdicts are exact
    double matching_sup = 0;
    double escape_sup = 0;
    bool stabilized = true;    // m large enough for the asymptotic verdicts
    std::vector<std::string> failed;  // names of violated requirements
    std::string classification;
};

namespace detail {

inline void finish_lifting_report(LiftingReport& r) {
    if (!r.slowness_ok) r.failed.push_back("slowness");
    if (!r.matching_ok) r.failed.push_back("matching");
    if (!r.escape) r.failed.push_back("escape");
    if (r.slowness_ok && r.matching_ok && !r.escape) {
        r.classification = "obstructed: tail confined to [0, 2/3+eps]";
    } else if (r.failed.empty()) {
        r.classification = "all requirements met";
    } else {
        r.classification = "violates:";
        for (const auto& f : r.failed) r.classification += " " + f;
    }
}

}  // namespace detail

/// Checks an explicit candidate sequence against the internally generated
/// harmonic walk: slowness of the candidate, matching through the
/// piecewise-linear map, and escape past 2/3 + eps. Everything exact.
inline LiftingReport lifting_obstruction_check(std::span<const Rat> p_y, int m,
                                               const Rat& delta, const Rat& eps) {
    int n = static_cast<int>(p_y.size());
    if (n < 1) throw LengthMismatch("candidate sequence is empty");
    if (m < 1 || m > n) throw LengthMismatch("threshold m outside the candidate range");
    std::vector<Rat> pz = harmonic_walk(n);
    LiftingReport r;
    Rat slow(0), match(0), esc(0);
    for (int k = m; k <= n; ++k) {
        const Rat& y = p_y[static_cast<std::size_t>(k - 1)];
        if (y < 0 || y > 1) throw BadParams("candidate values must lie in [0,1]");
        if (k < n) {
            Rat d = p_y[static_cast<std::size_t>(k)] - y;
            if (d < 0) d = -d;
            if (d > slow) slow = d;
        }
        Rat dm = pz[static_cast<std::size_t>(k - 1)] - tent_like_pi(y);
        if (dm < 0) dm = -dm;
        if (dm > match) match = dm;
        if (y > esc) esc = y;
    }
    r.slowness_ok = slow <= delta;
    r.matching_ok = match <= delta;
    r.escape = esc > Rat(2, 3) + eps;
    r.slowness_sup = rat_approx(slow);
    r.matching_sup = rat_approx(match);
    r.escape_sup = rat_approx(esc);
    r.stabilized = Rat(2, 3) / Rat(m + 1) <= delta;
    detail::finish_lifting_report(r);
    return r;
}

enum class LiftCandidate { first_branch, constant_zero, branch_alternating };

inline const char* lift_candidate_name(LiftCandidate c) {
    switch (c) {
        case LiftCandidate::first_branch: return "first_branch";
        case LiftCandidate::constant_zero: return "constant";
        case LiftCandidate::branch_alternating: return "alternating";
    }
    return "?";
}

/// The three canonical candidates evaluated over a (possibly approximant)
/// walk. Candidate values are exact rationals built from the stored walk
/// values; matching against the true p_Z is certified using the walk's
/// margin. Scale: everything at index k lives over 12 * den(k).
inline LiftingReport lifting_check_builtin(const HarmonicWalk& walk, LiftCandidate cand,
                                           int m, const Rat& delta, const Rat& eps) {
    int n = walk.size();
    if (m < 1 || m > n) throw LengthMismatch("threshold m outside the walk range");
    auto y_num = [&](int k) -> BigInt {  // candidate numerator over 12*den(k)
        auto rv = walk.raw(k);
        switch (cand) {
            case LiftCandidate::first_branch: return 8 * *rv.num;
            case LiftCandidate::constant_zero: return BigInt(0);
            case LiftCandidate::branch_alternating:
                if (k % 2 == 1 && 2 * *rv.num >= *rv.den) return 16 * *rv.den - 8 * *rv.num;
                return 8 * *rv.num;
        }
        return BigInt(0);
    };
    LiftingReport r;
    bool slow_ok = true, match_ok = true, escape = false;
    double slow_sup = 0, match_sup = 0, esc_sup = 0;
    const BigInt& mar = walk.margin_num();
    for (int k = m; k <= n; ++k) {
        auto rv = walk.raw(k);
        BigInt y = y_num(k);
        BigInt D = 12 * *rv.den;
        // slowness: exact on the candidate values
        if (k < n) {
            auto rn = walk.raw(k + 1);
            BigInt yn = y_num(k + 1);
            BigInt mult = *rn.den / *rv.den;
            BigInt d = yn - y * mult;
            if (d < 0) d = -d;
            BigInt Dn = 12 * *rn.den;
            if (d * rat_den(delta) > rat_num(delta) * Dn) slow_ok = false;
            double ds = BigInt(d * 100000 / Dn).convert_to<double>() / 100000.0;
            if (ds > slow_sup) slow_sup = ds;
        }
        // matching: |p_Z - pi(p_y)|; pi(p_y) equals the stored walk value for
        // the inverting candidates and 0 for the constant one
        BigInt diff;
        if (cand == LiftCandidate::constant_zero)
            diff = 12 * *rv.num;
        else
            diff = 0;
        BigInt certified = diff + 12 * mar;
        if (certified * rat_den(delta) > rat_num(delta) * D) match_ok = false;
        double dmv = BigInt(certified * 100000 / D).convert_to<double>() / 100000.0;
        if (dmv > match_sup) match_sup = dmv;
        // escape: exact on the candidate values
        Rat bound = Rat(2, 3) + eps;
        if (y * rat_den(bound) > rat_num(bound) * D) escape = true;
        double yv = BigInt(y * 100000 / D).convert_to<double>() / 100000.0;
        if (yv > esc_sup) esc_sup = yv;
    }
    r.slowness_ok = slow_ok;
    r.matching_ok = match_ok;
    r.escape = escape;
    r.slowness_sup = slow_sup;
    r.matching_sup = match_sup;
    r.escape_sup = esc_sup;
    r.stabilized = Rat(2, 3) / Rat(m + 1) <= delta;
    detail::finish_lifting_report(r);
    return r;
}

/// Certified tail-density check: true iff every closed interval
/// [j/g, (j+1)/g], 0 <= j < g, contains some p_Z(k) with m <= k <= n.
/// Returns the missing interval indices.
inline std::vector<int> tail_density_missing(const HarmonicWalk& walk, int m, int granularity) {
    if (m < 1 || m > walk.size()) throw LengthMismatch("density threshold outside the walk");
    std::vector<char> hit(static_cast<std::size_t>(granularity), 0);
    for (int k = m; k <= walk.size(); ++k) {
        for (int j = 0; j < granularity; ++j) {
            if (hit[static_cast<std::size_t>(j)]) continue;
            if (walk.value_in(k, Rat(j, granularity), Rat(j + 1, granularity)))
                hit[static_cast<std::size_t>(j)] = 1;
        }
    }
    std::vector<int> missing;
    for (int j = 0; j < granularity; ++j)
        if (!hit[static_cast<std::size_t>(j)]) missing.push_back(j);
    return missing;
}

// ---------------------------------------------------------------------------
// Conjugacy refuter

struct PrefixMap {
    std::vector<long long> values;  // q(0..n-1)

    int n() const { return static_cast<int>(values.size()); }

    long long fiber_bound() const {
        std::unordered_map<long long, long long> count;
        long long best = 0;
        for (long long v : values) best = std::max(best, ++count[v]);
        return best;
    }
};

struct RefuterWitness {
    std::vector<long long> b;             // strictly increasing
    std::vector<long long> left;          // sorted q(B+1)
    std::vector<long long> right;         // sorted q(B)-1, zero entries dropped
    std::vector<long long> intersection;  // empty when verified
    std::vector<long long> dropped_zero;  // b with q(b) = 0
};

struct PrefixExhausted : Error {
    PrefixExhausted(RefuterWitness partial, int requested)
        : Error("PrefixExhausted",
                "prefix exhausted after " + std::to_string(partial.b.size()) + " of " +
                    std::to_string(requested) + " requested elements"),
          partial(std::move(partial)), requested(requested) {}
    RefuterWitness partial;
    int requested;
};

namespace detail {

inline RefuterWitness finalize_witness(std::vector<long long> b,
                                       const std::unordered_set<long long>& left,
                                       const std::unordered_set<long long>& right,
                                       std::vector<long long> dropped) {
    RefuterWitness w;
    w.b = std::move(b);
    w.left.assign(left.begin(), left.end());
    w.right.assign(right.begin(), right.end());
    std::sort(w.left.begin(), w.left.end());
    std::sort(w.right.begin(), w.right.end());
    std::set_intersection(w.left.begin(), w.left.end(), w.right.begin(), w.right.end(),
                          std::back_inserter(w.intersection));
    w.dropped_zero = std::move(dropped);
    return w;
}

}  // namespace detail

/// Greedy selection of b_0 < b_1 < ... within the prefix such that each new
/// b is (1) fresh, (2) q(b)-1 avoids the collected q(B+1), (3) q(b+1)
/// avoids the collected q(B)-1, and (4) q(b)-1 != q(b+1). The result
/// satisfies q(B+1) ∩ (q(B)-1) = ∅, verified exactly.
inline RefuterWitness refute_conjugacy(const PrefixMap& q, int k, long long fiber_cap = 64) {
    if (k < 1) throw BadParams("witness size must be >= 1");
    if (q.n() < 2) throw BadParams("prefix too short");
    {
        std::unordered_map<long long, long long> count;
        for (long long v : q.values) {
            if (++count[v] > fiber_cap) throw NotFiniteToOne(v, count[v]);
        }
    }
    std::vector<long long> b;
    std::vector<long long> dropped;
    std::unordered_set<long long> left, right;
    for (long long cand = 0; cand + 1 < q.n() && static_cast<int>(b.size()) < k; ++cand) {
        long long qb = q.values[static_cast<std::size_t>(cand)];
        long long qb1 = q.values[static_cast<std::size_t>(cand) + 1];
        if (qb > 0 && left.count(qb - 1)) continue;        // (2)
        if (right.count(qb1)) continue;                     // (3)
        if (qb > 0 && qb - 1 == qb1) continue;              // (4)
        b.push_back(cand);
        left.insert(qb1);
        if (qb > 0)
            right.insert(qb - 1);
        else
            dropped.push_back(cand);
    }
    RefuterWitness w = detail::finalize_witness(std::move(b), left, right, std::move(dropped));
    if (static_cast<int>(w.b.size()) < k) throw PrefixExhausted(std::move(w), k);
    if (!w.intersection.empty())
        throw Error("InternalError", "greedy selection produced a non-disjoint witness");
    return w;
}

struct ShiftGap {
    std::vector<long long> left;
    std::vector<long long> right;
    std::vector<long long> intersection;
    std::vector<long long> dropped_zero;
};

/// The set-level comparison of Q∘σ versus σ^{-1}∘Q on B: returns q(B+1),
/// q(B)-1 and their intersection.
inline ShiftGap induced_shift_gap(const PrefixMap& q, std::span<const long long> b_set) {
    std::set<long long> left, right;
    std::vector<long long> dropped;
    for (long long b : b_set) {
        if (b < 0 || b + 1 >= q.n()) throw OutOfRange("b or b+1 outside the prefix");
        left.insert(q.values[static_cast<std::size_t>(b) + 1]);
        long long qb = q.values[static_cast<std::size_t>(b)];
        if (qb > 0)
            right.insert(qb - 1);
        else
            dropped.push_back(b);
    }
    ShiftGap g;
    g.left.assign(left.begin(), left.end());
    g.right.assign(right.begin(), right.end());
    std::set_intersection(g.left.begin(), g.left.end(), g.right.begin(), g.right.end(),
                          std::back_inserter(g.intersection));
    g.dropped_zero = std::move(dropped);
    return g;
}

}  // namespace chaincert
