// JSON wire formats, the system spec loader, DOT and CSV exports, and
// atomic file output. All writers emit canonical forms (sorted coordinates,
// canonical rationals, fixed key order) so identical inputs produce
// byte-identical files.
#pragma once

#include "chaincert/chaingraph.hpp"
#include "chaincert/errors.hpp"
#include "chaincert/geometry.hpp"
#include "chaincert/orbits.hpp"
#include "chaincert/rational.hpp"
#include "chaincert/shiftlab.hpp"
#include "chaincert/systems.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace chaincert {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Geometry

inline Json point_to_json(const Point& p) {
    Json j = Json::object();
    for (const auto& [c, v] : p.coords()) j[std::to_string(c)] = rat_str(v);
    return j;
}

inline Point point_from_json(const Json& j) {
    if (!j.is_object()) throw BadParams("point must be a JSON object");
    std::map<Coord, Rat> cs;
    for (const auto& [k, v] : j.items())
        cs[static_cast<Coord>(std::stoul(k))] = parse_rat(v.get<std::string>());
    return Point(std::move(cs));
}

inline Json box_to_json(const Box& b) {
    Json j = Json::object();
    for (const auto& [c, iv] : b.constraints())
        j[std::to_string(c)] = Json::array({rat_str(iv.lo), rat_str(iv.hi)});
    return j;
}

inline Box box_from_json(const Json& j) {
    if (!j.is_object()) throw BadParams("box must be a JSON object");
    std::map<Coord, Interval> cs;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_array() || v.size() != 2) throw BadParams("box interval must be [lo, hi]");
        cs[static_cast<Coord>(std::stoul(k))] =
            Interval{parse_rat(v[0].get<std::string>()), parse_rat(v[1].get<std::string>())};
    }
    return Box(std::move(cs));
}

inline Json cover_to_json(const Cover& c) {
    Json boxes = Json::array();
    for (const auto& b : c.boxes()) boxes.push_back(box_to_json(b));
    return Json{{"boxes", std::move(boxes)}};
}

inline Cover cover_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("boxes")) throw BadParams("cover must carry a boxes array");
    std::vector<Box> boxes;
    for (const auto& b : j.at("boxes")) boxes.push_back(box_from_json(b));
    return Cover(std::move(boxes));
}

// ---------------------------------------------------------------------------
// Certificates

inline Json certificate_to_json(const ComplianceCertificate& cert) {
    Json j;
    j["base"] = point_to_json(cert.base);
    Json seq = Json::array();
    for (const auto& p : cert.sequence) seq.push_back(point_to_json(p));
    j["sequence"] = std::move(seq);
    Json lad = Json::array();
    for (const auto& c : cert.ladder) lad.push_back(cover_to_json(c));
    j["ladder"] = std::move(lad);
    j["thresholds"] = cert.thresholds;
    j["cuts"] = cert.cuts;
    return j;
}

inline ComplianceCertificate certificate_from_json(const Json& j) {
    ComplianceCertificate cert;
    cert.base = point_from_json(j.at("base"));
    for (const auto& p : j.at("sequence")) cert.sequence.push_back(point_from_json(p));
    for (const auto& c : j.at("ladder")) cert.ladder.push_back(cover_from_json(c));
    cert.thresholds = j.at("thresholds").get<std::vector<int>>();
    cert.cuts = j.at("cuts").get<std::vector<std::vector<int>>>();
    return cert;
}

// ---------------------------------------------------------------------------
// System specs

/// Spec file: {"kind": ..., "resolution": "1/64", "params": {...}}.
/// Product specs nest the factor specs under params.a / params.b;
/// onepoint_shift takes params.n_max and params.y_sample; table systems
/// list sample points, image indices, and an optional mesh.
inline DiscreteSystem system_from_spec(const Json& spec, const Caps& caps = {}) {
    if (!spec.is_object() || !spec.contains("kind")) throw BadParams("system spec needs a kind");
    std::string kind = spec.at("kind").get<std::string>();
    Json params = spec.value("params", Json::object());
    auto resolution = [&] {
        if (!spec.contains("resolution")) throw BadParams("system spec needs a resolution");
        return parse_rat(spec.at("resolution").get<std::string>());
    };
    if (kind == "product") {
        DiscreteSystem a = system_from_spec(params.at("a"), caps);
        DiscreteSystem b = system_from_spec(params.at("b"), caps);
        return product(a, b, caps);
    }
    if (kind == "onepoint_shift") {
        std::vector<Point> y;
        for (const auto& p : params.at("y_sample")) y.push_back(point_from_json(p));
        return onepoint_shift(y, params.at("n_max").get<int>(), caps);
    }
    ZooParams zp;
    ZooKind zk;
    if (kind == "tent") zk = ZooKind::tent;
    else if (kind == "rotation") zk = ZooKind::rotation;
    else if (kind == "doubling") zk = ZooKind::doubling;
    else if (kind == "identity") zk = ZooKind::identity;
    else if (kind == "sft") zk = ZooKind::sft;
    else if (kind == "table") zk = ZooKind::table;
    else throw BadParams("unknown system kind '" + kind + "'");
    if (zk == ZooKind::rotation) zp.angle = parse_rat(params.at("angle").get<std::string>());
    if (zk == ZooKind::sft) {
        zp.adjacency = params.at("adjacency").get<std::vector<std::vector<int>>>();
        zp.sft_depth = params.value("depth", 3);
        return make_zoo_system(zk, zp, Rat(1), caps);
    }
    if (zk == ZooKind::table) {
        for (const auto& p : params.at("sample")) zp.table_sample.push_back(point_from_json(p));
        zp.table_map = params.at("map").get<std::vector<int>>();
        if (params.contains("mesh")) zp.table_mesh = parse_rat(params.at("mesh").get<std::string>());
        return make_zoo_system(zk, zp, Rat(1), caps);
    }
    return make_zoo_system(zk, zp, resolution(), caps);
}

inline Json system_meta_json(const DiscreteSystem& sys) {
    Json j;
    for (const auto& [k, v] : sys.meta) j[k] = v;
    j["size"] = sys.n();
    j["mesh"] = rat_str(sys.mesh);
    return j;
}

// ---------------------------------------------------------------------------
// Reports

inline Json trapping_to_json(const TrappingReport& rep) {
    Json j;
    j["weakly_incompressible"] = rep.weakly_incompressible;
    j["exhaustive"] = rep.exhaustive;
    if (rep.trapping) {
        Json f;
        f["boxes"] = rep.trapping->boxes;
        f["closure"] = rep.trapping->closure_cells;
        f["images"] = rep.trapping->image_cells;
        j["trapping"] = std::move(f);
    } else {
        j["trapping"] = nullptr;
        if (!rep.exhaustive) j["note"] = "no trapping found (heuristic)";
    }
    return j;
}

inline Json violations_to_json(const VerifyReport& rep) {
    Json arr = Json::array();
    for (const auto& v : rep.violations) {
        Json j;
        j["cover"] = v.cover;
        j["segment"] = Json::array({v.seg_begin, v.seg_end});
        j["condition"] = v.condition;
        j["message"] = v.message;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline Json lifting_to_json(const LiftingReport& r) {
    Json j;
    j["slowness_ok"] = r.slowness_ok;
    j["matching_ok"] = r.matching_ok;
    j["escape"] = r.escape;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5f", r.slowness_sup);
    j["sup_slowness"] = buf;
    std::snprintf(buf, sizeof buf, "%.5f", r.matching_sup);
    j["sup_matching"] = buf;
    std::snprintf(buf, sizeof buf, "%.5f", r.escape_sup);
    j["sup_candidate"] = buf;
    j["stabilized"] = r.stabilized;
    j["failed"] = r.failed;
    j["classification"] = r.classification;
    return j;
}

inline Json witness_to_json(const RefuterWitness& w) {
    Json j;
    j["B"] = w.b;
    j["left"] = w.left;
    j["right"] = w.right;
    j["intersection"] = w.intersection;
    j["dropped_zero"] = w.dropped_zero;
    return j;
}

// ---------------------------------------------------------------------------
// DOT / CSV

inline std::string point_label(const Point& p) {
    std::string s = "{";
    bool first = true;
    for (const auto& [c, v] : p.coords()) {
        if (!first) s += ",";
        s += std::to_string(c) + ":" + rat_str(v);
        first = false;
    }
    return s + "}";
}

/// Vertices labeled by sample index and coordinates; condensation classes
/// rendered as clusters when requested.
inline std::string chain_graph_dot(const ChainGraph& g, const DiscreteSystem& sys,
                                   bool cluster_condensation = false) {
    std::ostringstream out;
    out << "digraph chain {\n";
    out << "  label=\"" << g.tag << "\";\n";
    if (cluster_condensation) {
        Components comp = chain_components(g);
        for (std::size_t k = 0; k < comp.classes.size(); ++k) {
            out << "  subgraph cluster_" << k << " {\n";
            for (int v : comp.classes[k])
                out << "    " << v << " [label=\"" << v << ": "
                    << point_label(sys.sample[static_cast<std::size_t>(v)]) << "\"];\n";
            out << "  }\n";
        }
    } else {
        for (int v = 0; v < g.n; ++v)
            out << "  " << v << " [label=\"" << v << ": "
                << point_label(sys.sample[static_cast<std::size_t>(v)]) << "\"];\n";
    }
    for (int u = 0; u < g.n; ++u)
        for (int v : g.adj[static_cast<std::size_t>(u)]) out << "  " << u << " -> " << v << ";\n";
    out << "}\n";
    return out.str();
}

/// Raw certificate sequence, one coordinate per column over the union
/// support.
inline std::string certificate_csv(const ComplianceCertificate& cert) {
    std::set<Coord> sup;
    for (const auto& p : cert.sequence)
        for (const auto& [c, v] : p.coords()) sup.insert(c);
    for (const auto& [c, v] : cert.base.coords()) sup.insert(c);
    std::ostringstream out;
    out << "index";
    for (Coord c : sup) out << ",c" << c;
    out << "\n";
    for (std::size_t i = 0; i < cert.sequence.size(); ++i) {
        out << i;
        for (Coord c : sup) out << "," << rat_str(cert.sequence[i].get(c));
        out << "\n";
    }
    return out.str();
}

/// Prefix map CSV: rows "n,q(n)"; a non-numeric first line is treated as a
/// header. All of 0..max must be present.
inline PrefixMap prefix_map_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::map<long long, long long> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) throw BadParams("prefix map rows must be 'n,q(n)'");
        try {
            long long idx = std::stoll(line.substr(0, comma));
            long long val = std::stoll(line.substr(comma + 1));
            if (idx < 0 || val < 0) throw BadParams("prefix map entries must be nonnegative");
            rows[idx] = val;
        } catch (const std::invalid_argument&) {
            if (first) { first = false; continue; }  // header row
            throw BadParams("malformed prefix map row: " + line);
        }
        first = false;
    }
    if (rows.empty()) throw BadParams("prefix map is empty");
    PrefixMap q;
    long long expect = 0;
    for (const auto& [idx, val] : rows) {
        if (idx != expect) throw BadParams("prefix map must cover 0..n-1 without gaps");
        q.values.push_back(val);
        ++expect;
    }
    return q;
}

inline std::string prefix_map_to_csv(const PrefixMap& q) {
    std::ostringstream out;
    for (std::size_t i = 0; i < q.values.size(); ++i) out << i << "," << q.values[i] << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadParams("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Write-temp-then-rename so observers never see partial output.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw BadParams("cannot write file: " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace chaincert
