// chaincert command line: analyze sampled systems for chain transitivity and
// trapping sets, build and verify compliance certificates, run the
// conjugacy refuter and the harmonic-walk lifting demo, export DOT/CSV.
//
// Exit codes: 0 success, 1 verification failure, 2 input error, 3 partial
// result. Outputs are deterministic for identical configs and are written
// atomically (temp file + rename). Errors are machine-readable JSON.

#include "chaincert/chaincert.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace chaincert;

namespace {

Json report_head(const std::string& command, Json config) {
    Json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = std::move(config);
    return j;
}

void emit(const Json& j, const std::string& out_path) {
    std::string text = j.dump(2) + "\n";
    if (!out_path.empty())
        atomic_write_file(out_path, text);
    else
        std::cout << text;
}

std::vector<Rat> parse_meshes(const std::vector<std::string>& meshes) {
    std::vector<Rat> out;
    for (const auto& m : meshes) {
        Rat r = parse_rat(m);
        if (!(r > 0 && r <= 1)) throw BadParams("mesh must lie in (0,1]: " + m);
        out.push_back(r);
    }
    return out;
}

struct SystemInput {
    DiscreteSystem sys;
    Json spec;
};

SystemInput load_system(const std::string& path, const Caps& caps) {
    Json spec;
    try {
        spec = Json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw BadParams(std::string("malformed system spec: ") + e.what());
    }
    return {system_from_spec(spec, caps), std::move(spec)};
}

int cmd_analyze(const std::string& system_path, const std::vector<std::string>& meshes,
                const std::string& out_path, const std::string& dot_path, int trap_cap,
                std::uint64_t seed) {
    Caps caps;
    caps.trapping_exhaustive_cap = trap_cap;
    SystemInput in = load_system(system_path, caps);
    std::vector<Rat> ms = parse_meshes(meshes);
    Json config{{"system", system_path}, {"meshes", meshes}, {"trap_cap", trap_cap},
                {"seed", seed}};
    Json rep = report_head("analyze", config);
    rep["system"] = system_meta_json(in.sys);
    Json covers = Json::array();
    std::vector<Coord> support = sample_support(in.sys.sample);
    for (const Rat& m : ms) {
        Cover cover = grid_cover(support, m, in.sys.sample);
        ChainGraph g = chain_graph(in.sys, cover);
        Components comp = chain_components(g);
        TrappingReport trap = find_trapping_set(in.sys, cover, caps);
        Json cj;
        cj["mesh"] = rat_str(m);
        cj["boxes"] = cover.size();
        cj["chain_transitive"] = is_chain_transitive(g);
        cj["weakly_incompressible"] = trap.weakly_incompressible;
        cj["trapping"] = trapping_to_json(trap)["trapping"];
        cj["exhaustive"] = trap.exhaustive;
        if (!trap.exhaustive && !trap.trapping) cj["note"] = "no trapping found (heuristic)";
        Json classes = Json::array();
        for (const auto& cls : comp.classes) classes.push_back(cls);
        cj["components"] = std::move(classes);
        covers.push_back(std::move(cj));
    }
    rep["covers"] = std::move(covers);
    emit(rep, out_path);
    if (!dot_path.empty()) {
        Cover cover = grid_cover(support, ms.back(), in.sys.sample);
        atomic_write_file(dot_path, chain_graph_dot(chain_graph(in.sys, cover), in.sys, true));
    }
    return 0;
}

int cmd_build(const std::string& system_path, const std::vector<std::string>& meshes,
              int base, int loops, const std::string& out_path, std::uint64_t seed) {
    Caps caps;
    SystemInput in = load_system(system_path, caps);
    std::vector<Rat> ms = parse_meshes(meshes);
    if (ms.empty()) throw BadParams("build requires at least one --mesh");
    for (std::size_t i = 0; i + 1 < ms.size(); ++i)
        if (!(ms[i + 1] < ms[i])) throw BadParams("ladder meshes must be strictly decreasing");
    Json config{{"system", system_path}, {"meshes", meshes}, {"base", base}, {"loops", loops},
                {"seed", seed}};
    std::vector<Coord> support = sample_support(in.sys.sample);
    std::vector<Cover> covers;
    for (const Rat& m : ms) covers.push_back(grid_cover(support, m, in.sys.sample));
    bool nested = true;
    for (std::size_t i = 0; i + 1 < covers.size(); ++i)
        if (!fully_refines(covers[i + 1], covers[i])) { nested = false; break; }
    ComplianceCertificate cert = nested ? bowen_sharkovsky(in.sys, base, covers, loops)
                                        : generic_builder(in.sys, base, covers, loops);
    Json file = report_head("build", config);
    file["builder"] = nested ? "bowen_sharkovsky" : "generic";
    Json cj = certificate_to_json(cert);
    for (auto& [k, v] : cj.items()) file[k] = std::move(v);
    emit(file, out_path);
    return 0;
}

int cmd_verify(const std::string& system_path, const std::string& cert_path,
               const std::string& out_path) {
    Caps caps;
    SystemInput in = load_system(system_path, caps);
    Json cj;
    try {
        cj = Json::parse(read_file(cert_path));
    } catch (const nlohmann::json::exception& e) {
        throw BadParams(std::string("malformed certificate: ") + e.what());
    }
    ComplianceCertificate cert = certificate_from_json(cj);
    VerifyReport vr = verify_certificate(cert, in.sys);
    Json config{{"system", system_path}, {"cert", cert_path}};
    Json rep = report_head("verify", config);
    rep["scope"] = "checks are relative to the certificate's ladder covers only";
    rep["ok"] = vr.ok();
    rep["sequence_length"] = cert.sequence.size();
    rep["covers"] = cert.ladder.size();
    rep["violations"] = violations_to_json(vr);
    emit(rep, out_path);
    return vr.ok() ? 0 : 1;
}

int cmd_refute(const std::string& map_path, int size, long long fiber_cap,
               const std::string& out_path) {
    PrefixMap q = prefix_map_from_csv(read_file(map_path));
    Json config{{"map", map_path}, {"size", size}, {"fiber_cap", fiber_cap}};
    try {
        RefuterWitness w = refute_conjugacy(q, size, fiber_cap);
        Json rep = report_head("refute", config);
        rep["prefix"] = q.n();
        rep["fiber_bound"] = q.fiber_bound();
        rep["found"] = w.b.size();
        rep["partial"] = false;
        Json wj = witness_to_json(w);
        for (auto& [k, v] : wj.items()) rep[k] = std::move(v);
        emit(rep, out_path);
        return 0;
    } catch (const PrefixExhausted& e) {
        Json rep = report_head("refute", config);
        rep["prefix"] = q.n();
        rep["fiber_bound"] = q.fiber_bound();
        rep["found"] = e.partial.b.size();
        rep["requested"] = e.requested;
        rep["partial"] = true;
        Json wj = witness_to_json(e.partial);
        for (auto& [k, v] : wj.items()) rep[k] = std::move(v);
        emit(rep, out_path);
        return 3;
    }
}

int cmd_demo_lifting(int n, int m, const std::string& delta_s, const std::string& eps_s,
                     const std::string& out_path) {
    if (n < 1) throw BadParams("--n must be >= 1");
    if (m <= 0) m = std::max(1, n / 2);
    Rat delta = parse_rat(delta_s), eps = parse_rat(eps_s);
    Json config{{"n", n}, {"m", m}, {"delta", delta_s}, {"eps", eps_s}};
    HarmonicWalk walk = HarmonicWalk::generate(n);
    Json rep = report_head("demo-lifting", config);
    rep["exact_prefix"] = std::min(n, static_cast<int>(HarmonicWalk::default_cutoff));
    rep["margin"] = rat_str(walk.margin());
    bool stabilized = true;
    Json cands = Json::array();
    for (LiftCandidate c : {LiftCandidate::first_branch, LiftCandidate::constant_zero,
                            LiftCandidate::branch_alternating}) {
        LiftingReport lr = lifting_check_builtin(walk, c, m, delta, eps);
        stabilized = stabilized && lr.stabilized;
        Json cj = lifting_to_json(lr);
        cj["name"] = lift_candidate_name(c);
        cands.push_back(std::move(cj));
    }
    rep["stabilized"] = stabilized;
    if (!stabilized) rep["note"] = "thresholds not yet stabilized; increase n or m";
    rep["candidates"] = std::move(cands);
    emit(rep, out_path);
    return 0;
}

int cmd_export_dot(const std::string& system_path, const std::string& mesh,
                   const std::string& out_path, bool clusters) {
    Caps caps;
    SystemInput in = load_system(system_path, caps);
    Rat m = parse_rat(mesh);
    Cover cover = grid_cover(sample_support(in.sys.sample), m, in.sys.sample);
    std::string dot = chain_graph_dot(chain_graph(in.sys, cover), in.sys, clusters);
    if (!out_path.empty())
        atomic_write_file(out_path, dot);
    else
        std::cout << dot;
    return 0;
}

int cmd_export_csv(const std::string& cert_path, const std::string& out_path) {
    ComplianceCertificate cert = certificate_from_json(Json::parse(read_file(cert_path)));
    std::string csv = certificate_csv(cert);
    if (!out_path.empty())
        atomic_write_file(out_path, csv);
    else
        std::cout << csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chain-recurrence analysis and compliance certificates"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
    app.require_subcommand(1);

    std::string system_path, cert_path, map_path, out_path, dot_path;
    std::vector<std::string> meshes;
    int base = 0, loops = 2, size = 32, n = 0, m = 0, trap_cap = 20;
    long long fiber_cap = 64;
    std::string delta = "1/100", eps = "1/10", mesh_one;
    std::uint64_t seed = 0;
    bool clusters = false;

    auto* analyze = app.add_subcommand("analyze", "chain/trapping analysis at grid covers");
    analyze->add_option("--system", system_path, "system spec JSON")->required();
    analyze->add_option("--mesh", meshes, "grid mesh (repeatable)")->required();
    analyze->add_option("--out", out_path, "report path (stdout if omitted)");
    analyze->add_option("--dot", dot_path, "DOT export of the finest-mesh chain graph");
    analyze->add_option("--trap-cap", trap_cap, "exhaustive trapping search cap");
    analyze->add_option("--seed", seed, "rng seed (recorded)");

    auto* build = app.add_subcommand("build", "build a compliance certificate");
    build->add_option("--system", system_path, "system spec JSON")->required();
    build->add_option("--mesh", meshes, "ladder mesh, coarse to fine (repeatable)")->required();
    build->add_option("--base", base, "base sample index");
    build->add_option("--loops", loops, "loops per stage");
    build->add_option("--out", out_path, "certificate path (stdout if omitted)");
    build->add_option("--seed", seed, "rng seed (recorded)");

    auto* verify = app.add_subcommand("verify", "re-verify a certificate from raw data");
    verify->add_option("--system", system_path, "system spec JSON")->required();
    verify->add_option("--cert", cert_path, "certificate path")->required();
    verify->add_option("--out", out_path, "report path (stdout if omitted)");

    auto* refute = app.add_subcommand("refute", "greedy conjugacy-refuting witness");
    refute->add_option("--map", map_path, "prefix map CSV (rows n,q(n))")->required();
    refute->add_option("--size", size, "requested witness size");
    refute->add_option("--fiber-cap", fiber_cap, "finite-to-one fiber cap");
    refute->add_option("--out", out_path, "witness path (stdout if omitted)");

    auto* demo = app.add_subcommand("demo-lifting", "harmonic-walk lifting obstruction demo");
    demo->add_option("--n", n, "walk length")->required();
    demo->add_option("--m", m, "tail threshold (default n/2)");
    demo->add_option("--delta", delta, "slack for slowness/matching");
    demo->add_option("--eps", eps, "escape margin past 2/3");
    demo->add_option("--out", out_path, "report path (stdout if omitted)");

    auto* exp = app.add_subcommand("export", "exports");
    exp->require_subcommand(1);
    auto* exp_dot = exp->add_subcommand("dot", "chain graph in DOT form");
    exp_dot->add_option("--system", system_path, "system spec JSON")->required();
    exp_dot->add_option("--mesh", mesh_one, "grid mesh")->required();
    exp_dot->add_option("--out", out_path, "output path (stdout if omitted)");
    exp_dot->add_flag("--clusters", clusters, "cluster condensation classes");
    auto* exp_csv = exp->add_subcommand("csv", "certificate sequence as CSV");
    exp_csv->add_option("--cert", cert_path, "certificate path")->required();
    exp_csv->add_option("--out", out_path, "output path (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze))
            return cmd_analyze(system_path, meshes, out_path, dot_path, trap_cap, seed);
        if (app.got_subcommand(build))
            return cmd_build(system_path, meshes, base, loops, out_path, seed);
        if (app.got_subcommand(verify)) return cmd_verify(system_path, cert_path, out_path);
        if (app.got_subcommand(refute)) return cmd_refute(map_path, size, fiber_cap, out_path);
        if (app.got_subcommand(demo)) return cmd_demo_lifting(n, m, delta, eps, out_path);
        if (app.got_subcommand(exp)) {
            if (exp->got_subcommand(exp_dot))
                return cmd_export_dot(system_path, mesh_one, out_path, clusters);
            return cmd_export_csv(cert_path, out_path);
        }
    } catch (const Error& e) {
        Json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
        std::cout << err.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        Json err{{"error", {{"code", "Error"}, {"message", e.what()}}}};
        std::cout << err.dump(2) << "\n";
        return 2;
    }
    return 2;
}
