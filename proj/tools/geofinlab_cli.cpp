// Command-line front end: every module quantity behind a subcommand, JSON
// reports on stdout (or --out, written atomically), CSV for the curve-style
// outputs.  All randomness flows from --seed; --threads is a hint passed to
// the parallel kernels, and reports are byte-identical across runs and
// thread counts.  Wall-clock timing is opt-in (--timing) so default output
// stays stable.
//
// Exit codes: 0 all assertions pass, 1 an assertion or internal invariant
// failed, 2 invalid input, 3 resource limit refused.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geofinlab/battery.hpp"
#include "geofinlab/boundary.hpp"
#include "geofinlab/cantor.hpp"
#include "geofinlab/digit_source.hpp"
#include "geofinlab/lattice.hpp"
#include "geofinlab/lorentz.hpp"
#include "geofinlab/margulis.hpp"
#include "geofinlab/mat2.hpp"
#include "geofinlab/parallel.hpp"
#include "geofinlab/rational.hpp"
#include "geofinlab/rng.hpp"

using nlohmann::json;
namespace gf = geofinlab;
namespace geo = geofinlab::geo;

namespace {

struct Global {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    int threads = 0;
    bool timing = false;
    json cfg = json::object();
    const CLI::Option* seed_opt = nullptr;
    const CLI::Option* threads_opt = nullptr;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot read file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::invalid_argument("cannot open for writing: " + tmp);
        f << text;
        f.flush();
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void emit(const Global& g, const std::string& text) {
    if (g.out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_atomic(g.out_path, text);
}

void emit_report(const Global& g, json& j, double wall_ms) {
    j["schema"] = "v1";
    if (g.timing) j["wall_ms"] = wall_ms;
    emit(g, j.dump(2) + "\n");
}

json load_config(const std::string& path) {
    try {
        json j = json::parse(read_file(path));
        if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
}

// Config value for `key` under `section` (dotted command path), applied only
// when the flag was not given explicitly: flags win over config.
template <class T>
void cfg_get(const Global& g, const std::string& section, const char* key,
             const CLI::Option* opt, T& var) {
    if (opt != nullptr && opt->count() > 0) return;
    auto sec = g.cfg.find(section);
    if (sec == g.cfg.end() || !sec->is_object()) return;
    auto val = sec->find(key);
    if (val == sec->end()) return;
    try {
        var = val->get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("config " + section + "." + key + ": " + e.what());
    }
}

void apply_global_config(Global& g) {
    if (g.cfg.contains("seed") && (g.seed_opt == nullptr || g.seed_opt->count() == 0))
        g.seed = g.cfg["seed"].get<std::uint64_t>();
    if (g.cfg.contains("threads") && (g.threads_opt == nullptr || g.threads_opt->count() == 0))
        g.threads = g.cfg["threads"].get<int>();
}

// ------------------------------------------------------------- parsers

std::vector<double> parse_doubles(const std::string& s, size_t want, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": bad number '" + tok + "'");
        }
    }
    if (out.size() != want)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(want) +
                                    " comma-separated numbers");
    return out;
}

geo::BoundaryPoint parse_endpoint(const std::string& tok) {
    if (tok == "inf" || tok == "+inf" || tok == "-inf") return geo::BoundaryPoint::inf();
    try {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return geo::BoundaryPoint(v);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad endpoint '" + tok + "' (number or inf)");
    }
}

geo::GeodesicLine parse_geodesic(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos || s.find(',', comma + 1) != std::string::npos)
        throw std::invalid_argument("line must be 'a,b': got '" + s + "'");
    return {parse_endpoint(s.substr(0, comma)), parse_endpoint(s.substr(comma + 1))};
}

// Family JSON: {"aprime": x, "intervals": [{"x": [num, den], "y": [num, den]}, ...]}
// (the shape `cantor synth` writes).
gf::IntervalFamily family_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("family parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("aprime") || !j.contains("intervals"))
        throw std::invalid_argument("family JSON needs 'aprime' and 'intervals'");
    std::vector<gf::Interval> ivs;
    for (const auto& e : j["intervals"]) {
        if (!e.is_object() || !e.contains("x") || !e.contains("y") || e["x"].size() != 2 ||
            e["y"].size() != 2)
            throw std::invalid_argument("family interval needs x:[num,den], y:[num,den]");
        ivs.push_back({gf::Rat(e["x"][0].get<long long>(), e["x"][1].get<long long>()),
                       gf::Rat(e["y"][0].get<long long>(), e["y"][1].get<long long>())});
    }
    return gf::make_family(std::move(ivs), j["aprime"].get<double>());
}

json family_to_json(const gf::IntervalFamily& fam) {
    json ivs = json::array();
    for (const auto& iv : fam.intervals) {
        ivs.push_back({{"x", {(long long)iv.x.num, (long long)iv.x.den}},
                       {"y", {(long long)iv.y.num, (long long)iv.y.den}}});
    }
    return json{{"aprime", fam.aprime}, {"intervals", ivs}};
}

// Chain descriptor JSON:
//   {"states": N, "kernel": [[...]], "alpha": [...], "beta": [...]?,
//    "T0": x, "T1": y}
struct ChainSpec {
    std::vector<std::vector<double>> kernel;
    gf::HeightFunction alpha;
    std::optional<gf::HeightFunction> beta;
    double t0 = 0.0;
    double t1 = 0.0;
};

ChainSpec read_chain_spec(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("chain parse error: ") + e.what());
    }
    for (const char* key : {"states", "kernel", "alpha", "T0", "T1"})
        if (!j.contains(key))
            throw std::invalid_argument(std::string("chain JSON missing '") + key + "'");
    ChainSpec spec;
    const size_t n = j["states"].get<size_t>();
    spec.kernel = j["kernel"].get<std::vector<std::vector<double>>>();
    spec.alpha = j["alpha"].get<std::vector<double>>();
    if (spec.kernel.size() != n || spec.alpha.size() != n)
        throw std::invalid_argument("chain JSON: kernel/alpha size must match states");
    if (j.contains("beta")) {
        spec.beta = j["beta"].get<std::vector<double>>();
        if (spec.beta->size() != n)
            throw std::invalid_argument("chain JSON: beta size must match states");
    }
    spec.t0 = j["T0"].get<double>();
    spec.t1 = j["T1"].get<double>();
    return spec;
}

gf::DigitSource make_source(const std::optional<double>& q, const std::string& src_path) {
    if (q.has_value() && !src_path.empty())
        throw std::invalid_argument("give exactly one of --q and --source");
    if (q.has_value()) return gf::bernoulli(*q);
    if (!src_path.empty()) return gf::digit_source_from_json(read_file(src_path));
    throw std::invalid_argument("need --q or --source");
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification toolkit for hyperbolic lattices, avoiding Cantor sets,\n"
                 "leafwise dimensions, and drift certificates"};
    app.fallthrough();
    app.require_subcommand(1);

    Global g;
    app.add_option("--config", g.config_path,
                   "JSON config file: {\"section.command\": {flag: value}}; explicit flags win");
    app.add_option("--out", g.out_path, "write the report to this file (atomic replace)");
    g.seed_opt = app.add_option("--seed", g.seed, "master seed (default 0)");
    g.threads_opt =
        app.add_option("--threads", g.threads,
                       "worker threads; 0 = GEOFINLAB_THREADS env or hardware default");
    app.add_flag("--timing", g.timing, "add wall-clock time to reports (off keeps bytes stable)");

    std::function<int()> action;

    // ---------------------------------------------------------------- geom
    auto* geom = app.add_subcommand("geom", "hyperbolic-plane and Lorentz-model quantities");
    geom->fallthrough();
    geom->require_subcommand(1);

    {
        auto* cmd = geom->add_subcommand("line-dist", "distance between two geodesics");
        auto l1 = std::make_shared<std::string>();
        auto l2 = std::make_shared<std::string>();
        auto* o1 = cmd->add_option("--l1", *l1, "endpoints 'a,b' (use --l1=-inf,b for -inf)");
        auto* o2 = cmd->add_option("--l2", *l2, "endpoints 'c,d'");
        cmd->callback([&, l1, l2, o1, o2] {
            action = [&, l1, l2, o1, o2]() -> int {
                cfg_get(g, "geom.line-dist", "l1", o1, *l1);
                cfg_get(g, "geom.line-dist", "l2", o2, *l2);
                double t0 = now_ms();
                auto r = geo::line_distance(parse_geodesic(*l1), parse_geodesic(*l2));
                json j{{"distance", r.distance}, {"degenerate", r.degenerate}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = geom->add_subcommand("qr", "Iwasawa factors of a determinant-one real matrix");
        auto gs = std::make_shared<std::string>();
        auto* og = cmd->add_option("--g", *gs, "entries 'a,b,c,d' (row-major, det = 1)");
        cmd->callback([&, gs, og] {
            action = [&, gs, og]() -> int {
                cfg_get(g, "geom.qr", "g", og, *gs);
                double t0 = now_ms();
                auto e = parse_doubles(*gs, 4, "--g");
                geo::Mat2r m{e[0], e[1], e[2], e[3]};
                auto f = geo::qr_decompose(m);
                json j{{"t", f.t},
                       {"s", f.s},
                       {"k", {f.k.a, f.k.b, f.k.c, f.k.d}},
                       {"siegel_height", geo::siegel_height(m)}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = geom->add_subcommand("psi", "constructive minimizer of ||g v||^2 over SL2(R)");
        auto vs = std::make_shared<std::string>();
        auto* ov = cmd->add_option("--v", *vs, "complex pair 'x_re,x_im,y_re,y_im'");
        cmd->callback([&, vs, ov] {
            action = [&, vs, ov]() -> int {
                cfg_get(g, "geom.psi", "v", ov, *vs);
                double t0 = now_ms();
                auto e = parse_doubles(*vs, 4, "--v");
                std::array<geo::cplx, 2> v{geo::cplx{e[0], e[1]}, geo::cplx{e[2], e[3]}};
                auto pm = geo::psi_constructive_minimizer(v);
                json j{{"psi_w0", geo::psi_form(v, geo::w0_matrix())},
                       {"min_value", pm.min_value},
                       {"g", {pm.g.a, pm.g.b, pm.g.c, pm.g.d}}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = geom->add_subcommand(
            "regulate", "rotations and flow time carrying a Q = -1 vector to the plane normal");
        auto vs = std::make_shared<std::string>();
        auto* ov = cmd->add_option("--v", *vs, "coordinates 'v1,v2,v3,v4' with Q(v) = -1");
        cmd->callback([&, vs, ov] {
            action = [&, vs, ov]() -> int {
                cfg_get(g, "geom.regulate", "v", ov, *vs);
                double t0 = now_ms();
                auto e = parse_doubles(*vs, 4, "--v");
                geo::Vec4 v{{e[0], e[1], e[2], e[3]}};
                auto reg = geo::hyperbolic_regulation(v);
                geo::Vec4 moved = reg.k_prime * (geo::lorentz_boost12(reg.t) * (reg.k * v));
                geo::Vec4 w0 = geo::plane_normal();
                double resid = 0.0;
                for (int i = 0; i < 4; ++i) resid = std::max(resid, std::abs(moved[i] - w0[i]));
                json flat_k = json::array(), flat_kp = json::array();
                for (int i = 0; i < 4; ++i)
                    for (int c = 0; c < 4; ++c) {
                        flat_k.push_back(reg.k.m[(size_t)i][(size_t)c]);
                        flat_kp.push_back(reg.k_prime.m[(size_t)i][(size_t)c]);
                    }
                json j{{"t", reg.t}, {"k", flat_k}, {"k_prime", flat_kp}, {"residual", resid}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = geom->add_subcommand("tube", "volume of a tube of given area and radius");
        auto area = std::make_shared<double>(0.0);
        auto tt = std::make_shared<double>(0.0);
        auto* oa = cmd->add_option("--area", *area, "cross-section area");
        auto* ot = cmd->add_option("--t0", *tt, "tube radius");
        cmd->callback([&, area, tt, oa, ot] {
            action = [&, area, tt, oa, ot]() -> int {
                cfg_get(g, "geom.tube", "area", oa, *area);
                cfg_get(g, "geom.tube", "t0", ot, *tt);
                double t0 = now_ms();
                json j{{"volume", geo::tube_volume(*area, *tt)}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    // ------------------------------------------------------------- lattice
    auto* lat = app.add_subcommand("lattice", "integral quadratic-form computations");
    lat->fallthrough();
    lat->require_subcommand(1);

    {
        auto* cmd = lat->add_subcommand("mod8", "2-adic insolubility count for the canonical form");
        auto a = std::make_shared<long long>(0);
        auto* oa = cmd->add_option("--a", *a, "form parameter, a = 1 (mod 8)");
        cmd->callback([&, a, oa] {
            action = [&, a, oa]() -> int {
                cfg_get(g, "lattice.mod8", "a", oa, *a);
                double t0 = now_ms();
                long long count = gf::mod8_solubility(gf::DiagonalForm::canonical(*a));
                json j{{"a", *a}, {"count", count}, {"pass", count == 0}};
                emit_report(g, j, now_ms() - t0);
                return count == 0 ? 0 : 1;
            };
        });
    }

    {
        auto* cmd = lat->add_subcommand("enumerate", "lattice vectors of Q = -1 up to a norm bound");
        auto a = std::make_shared<long long>(0);
        auto nb = std::make_shared<double>(0.0);
        auto* oa = cmd->add_option("--a", *a, "form parameter");
        auto* ob = cmd->add_option("--norm-bound", *nb, "embedded-norm bound");
        cmd->callback([&, a, nb, oa, ob] {
            action = [&, a, nb, oa, ob]() -> int {
                cfg_get(g, "lattice.enumerate", "a", oa, *a);
                cfg_get(g, "lattice.enumerate", "norm-bound", ob, *nb);
                double t0 = now_ms();
                auto vecs = gf::enumerate_q_minus_one(*a, *nb);
                json arr = json::array();
                for (const auto& v : vecs)
                    arr.push_back({{"m", {v.m[0], v.m[1], v.m[2], v.m[3]}},
                                   {"norm_sq", v.norm_sq}});
                json j{{"A", *a}, {"norm_bound", *nb}, {"count", (long long)vecs.size()},
                       {"vectors", arr}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = lat->add_subcommand("gap", "verify only +/-w0 lies below the norm gap");
        auto a = std::make_shared<long long>(0);
        auto* oa = cmd->add_option("--a", *a, "form parameter, a = 1 (mod 8)");
        cmd->callback([&, a, oa] {
            action = [&, a, oa]() -> int {
                cfg_get(g, "lattice.gap", "a", oa, *a);
                double t0 = now_ms();
                const double nb = std::sqrt((double)*a / 7.0);
                auto vecs = gf::enumerate_q_minus_one(*a, nb);
                auto res = gf::norm_gap_check(*a);
                json arr = json::array();
                for (const auto& v : vecs)
                    arr.push_back({{"m", {v.m[0], v.m[1], v.m[2], v.m[3]}},
                                   {"norm_sq", v.norm_sq}});
                json j{{"A", *a}, {"norm_bound", nb}, {"vectors", arr},
                       {"gap_holds", res.holds}};
                if (!res.holds && res.witness.has_value()) {
                    const auto& w = *res.witness;
                    j["witness"] = {{"m", {w.m[0], w.m[1], w.m[2], w.m[3]}},
                                    {"norm_sq", w.norm_sq}};
                }
                emit_report(g, j, now_ms() - t0);
                return res.holds ? 0 : 1;
            };
        });
    }

    {
        auto* cmd = lat->add_subcommand("separation", "separation constant and tube volume bound");
        auto a = std::make_shared<double>(0.0);
        auto c0 = std::make_shared<double>(0.0);
        auto c = std::make_shared<double>(1.0);
        auto area = std::make_shared<double>(0.0);
        auto* oa = cmd->add_option("--a", *a, "form parameter (scale)");
        auto* o0 = cmd->add_option("--c0", *c0, "additive constant");
        auto* oc = cmd->add_option("--c", *c, "multiplicative constant");
        auto* os = cmd->add_option("--area", *area, "plane-piece area");
        cmd->callback([&, a, c0, c, area, oa, o0, oc, os] {
            action = [&, a, c0, c, area, oa, o0, oc, os]() -> int {
                cfg_get(g, "lattice.separation", "a", oa, *a);
                cfg_get(g, "lattice.separation", "c0", o0, *c0);
                cfg_get(g, "lattice.separation", "c", oc, *c);
                cfg_get(g, "lattice.separation", "area", os, *area);
                double t0 = now_ms();
                json j{{"a", *a},
                       {"separation", gf::separation_constant(*a, *c0, *c)},
                       {"volume_lower_bound", gf::volume_lower_bound(*a, *area, *c0, *c)}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    // -------------------------------------------------------------- cantor
    auto* can = app.add_subcommand("cantor", "avoiding interval families and their dimension");
    can->fallthrough();
    can->require_subcommand(1);

    {
        auto* cmd = can->add_subcommand("synth", "synthesize a family meeting a separation level");
        auto aprime = std::make_shared<double>(0.0);
        auto count = std::make_shared<int>(0);
        auto* oap = cmd->add_option("--aprime", *aprime, "separation level (> 5000)");
        auto* oc = cmd->add_option("--count", *count, "number of intervals");
        cmd->callback([&, aprime, count, oap, oc] {
            action = [&, aprime, count, oap, oc]() -> int {
                cfg_get(g, "cantor.synth", "aprime", oap, *aprime);
                cfg_get(g, "cantor.synth", "count", oc, *count);
                double t0 = now_ms();
                gf::IntervalFamily fam = gf::synth_family(*aprime, *count, g.seed);
                json j = family_to_json(fam);
                j["count"] = (long long)fam.intervals.size();
                j["seed"] = g.seed;
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = can->add_subcommand("check", "exact separation check of a family file");
        auto path = std::make_shared<std::string>();
        auto* op = cmd->add_option("--family", *path, "family JSON (shape written by synth)");
        cmd->callback([&, path, op] {
            action = [&, path, op]() -> int {
                cfg_get(g, "cantor.check", "family", op, *path);
                double t0 = now_ms();
                gf::IntervalFamily fam = family_from_json(read_file(*path));
                gf::SeparationReport rep = gf::check_separation(fam);
                json viols = json::array();
                for (const auto& v : rep.violations)
                    viols.push_back(
                        {{"first", v.first}, {"second", v.second}, {"quantity", v.quantity}});
                json j{{"aprime", fam.aprime}, {"ok", rep.ok}, {"violations", viols}};
                emit_report(g, j, now_ms() - t0);
                return rep.ok ? 0 : 1;
            };
        });
    }

    {
        auto* cmd = can->add_subcommand(
            "run", "synthesize, sample avoidance paths, and estimate the box dimension");
        auto aprime = std::make_shared<double>(59049.0);
        auto count = std::make_shared<int>(50);
        auto depth = std::make_shared<int>(30);
        auto samples = std::make_shared<long long>(100000);
        auto* oap = cmd->add_option("--aprime", *aprime, "separation level (> 5000)");
        auto* oc = cmd->add_option("--count", *count, "number of intervals");
        auto* od = cmd->add_option("--depth", *depth, "path depth (<= 30)");
        auto* os = cmd->add_option("--samples", *samples, "number of sampled paths");
        cmd->callback([&, aprime, count, depth, samples, oap, oc, od, os] {
            action = [&, aprime, count, depth, samples, oap, oc, od, os]() -> int {
                cfg_get(g, "cantor.run", "aprime", oap, *aprime);
                cfg_get(g, "cantor.run", "count", oc, *count);
                cfg_get(g, "cantor.run", "depth", od, *depth);
                cfg_get(g, "cantor.run", "samples", os, *samples);
                double t0 = now_ms();
                if (*samples < 0) throw std::invalid_argument("--samples must be >= 0");
                if (*samples > 10'000'000)
                    throw std::length_error("--samples capped at 1e7");
                gf::IntervalFamily fam = gf::synth_family(*aprime, *count, g.seed);

                std::vector<char> broke((size_t)*samples, 0);
                gf::parallel_for((size_t)*samples, g.threads, [&](size_t i) {
                    try {
                        gf::sample_path_stream(fam, *depth, g.seed, (std::uint64_t)i);
                    } catch (const gf::invariant_violation&) {
                        broke[i] = 1;
                    }
                });
                long long violations = 0;
                for (char c : broke) violations += c;

                gf::DimensionReport box =
                    gf::box_dimension_estimate(fam, std::min(*depth, 20));
                gf::TreeReport tree = gf::path_tree_probabilities(fam, std::min(*depth, 8));

                json j{{"aprime", *aprime},
                       {"count", (long long)fam.intervals.size()},
                       {"depth", *depth},
                       {"samples", *samples},
                       {"seed", g.seed},
                       {"lower_bound", box.lower_bound},
                       {"box_estimate", box.box_estimate},
                       {"max_path_prob", tree.level_max_prob.back()},
                       {"invariant_violations", violations}};
                emit_report(g, j, now_ms() - t0);
                return violations == 0 ? 0 : 1;
            };
        });
    }

    {
        auto* cmd = can->add_subcommand("boxdim", "surviving triadic-interval counts per level");
        auto aprime = std::make_shared<double>(59049.0);
        auto count = std::make_shared<int>(50);
        auto depth = std::make_shared<int>(20);
        auto path = std::make_shared<std::string>();
        auto* oap = cmd->add_option("--aprime", *aprime, "separation level for synthesis");
        auto* oc = cmd->add_option("--count", *count, "number of intervals");
        auto* od = cmd->add_option("--depth", *depth, "deepest level (<= 20)");
        auto* op = cmd->add_option("--family", *path, "family JSON instead of synthesis");
        cmd->callback([&, aprime, count, depth, path, oap, oc, od, op] {
            action = [&, aprime, count, depth, path, oap, oc, od, op]() -> int {
                cfg_get(g, "cantor.boxdim", "aprime", oap, *aprime);
                cfg_get(g, "cantor.boxdim", "count", oc, *count);
                cfg_get(g, "cantor.boxdim", "depth", od, *depth);
                cfg_get(g, "cantor.boxdim", "family", op, *path);
                double t0 = now_ms();
                gf::IntervalFamily fam = path->empty()
                                             ? gf::synth_family(*aprime, *count, g.seed)
                                             : family_from_json(read_file(*path));
                gf::DimensionReport rep = gf::box_dimension_estimate(fam, *depth);
                std::string csv = "level,surviving_count\n";
                for (size_t k = 0; k < rep.surviving_counts.size(); ++k)
                    csv += std::to_string(k) + "," + std::to_string(rep.surviving_counts[k]) +
                           "\n";
                emit(g, csv);
                if (g.timing) std::fprintf(stderr, "wall_ms,%g\n", now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = can->add_subcommand("treeprob", "exact path-distribution tree probabilities");
        auto aprime = std::make_shared<double>(59049.0);
        auto count = std::make_shared<int>(10);
        auto levels = std::make_shared<int>(8);
        auto* oap = cmd->add_option("--aprime", *aprime, "separation level for synthesis");
        auto* oc = cmd->add_option("--count", *count, "number of intervals");
        auto* ol = cmd->add_option("--levels", *levels, "tree depth (<= 12)");
        cmd->callback([&, aprime, count, levels, oap, oc, ol] {
            action = [&, aprime, count, levels, oap, oc, ol]() -> int {
                cfg_get(g, "cantor.treeprob", "aprime", oap, *aprime);
                cfg_get(g, "cantor.treeprob", "count", oc, *count);
                cfg_get(g, "cantor.treeprob", "levels", ol, *levels);
                double t0 = now_ms();
                gf::IntervalFamily fam = gf::synth_family(*aprime, *count, g.seed);
                gf::TreeReport tree = gf::path_tree_probabilities(fam, *levels);
                json j{{"levels", tree.levels},
                       {"sums_to_one", tree.sums_to_one},
                       {"irregular_nodes", tree.irregular_nodes},
                       {"max_prob", tree.level_max_prob}};
                const double a2 = std::log(fam.aprime) / std::log(3.0) - 5.0;
                if (a2 > 2.0) {
                    json bounds = json::array();
                    for (int m = 0; m <= tree.levels; ++m)
                        bounds.push_back(gf::path_probability_bound(m, fam.aprime));
                    j["bound"] = bounds;
                }
                emit_report(g, j, now_ms() - t0);
                return tree.sums_to_one ? 0 : 1;
            };
        });
    }

    // ------------------------------------------------------------ leafwise
    auto* leaf = app.add_subcommand("leafwise", "unifilar digit sources and their dimension");
    leaf->fallthrough();
    leaf->require_subcommand(1);

    // Adds the shared --q/--source options and returns a deferred source
    // maker (the option counts are only meaningful after parsing).
    auto add_source_opts = [](CLI::App* cmd) {
        auto qv = std::make_shared<double>(0.0);
        auto src = std::make_shared<std::string>();
        auto* oq = cmd->add_option("--q", *qv, "single-state source with P(digit 0) = q");
        cmd->add_option("--source", *src, "digit-source JSON file");
        return std::function<gf::DigitSource()>([qv, src, oq] {
            std::optional<double> q;
            if (oq->count() > 0) q = *qv;
            return make_source(q, *src);
        });
    };

    {
        auto* cmd = leaf->add_subcommand("dimension", "exact leafwise dimension of a source");
        auto source = add_source_opts(cmd);
        cmd->callback([&, source] {
            action = [&, source]() -> int {
                double t0 = now_ms();
                gf::DigitSource s = source();
                double dim = gf::source_dimension(s);
                json j{{"dimension", dim}, {"entropy_rate_nats", dim * std::log(2.0)}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = leaf->add_subcommand("entropy", "Monte Carlo entropy rate of a source");
        auto source = add_source_opts(cmd);
        auto steps = std::make_shared<int>(64);
        auto samples = std::make_shared<long long>(100000);
        auto* ost = cmd->add_option("--steps", *steps, "digits per sampled stream");
        auto* osa = cmd->add_option("--samples", *samples, "number of streams");
        cmd->callback([&, source, steps, samples, ost, osa] {
            action = [&, source, steps, samples, ost, osa]() -> int {
                cfg_get(g, "leafwise.entropy", "steps", ost, *steps);
                cfg_get(g, "leafwise.entropy", "samples", osa, *samples);
                double t0 = now_ms();
                gf::DigitSource s = source();
                gf::EntropyReport rep = gf::run_chain(s, *steps, *samples, g.seed, g.threads);
                json j{{"dimension", rep.dimension},
                       {"entropy_estimate", rep.estimate},
                       {"stderr", rep.std_error},
                       {"target", rep.target}};
                if (s.num_states() <= 8) {
                    json curve = json::array();
                    for (int n : {4, 8, 16, 24})
                        curve.push_back({n, gf::un_l1_error(s, n)});
                    j["l1_curve"] = curve;
                }
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = leaf->add_subcommand("l1", "exact normalized-surprisal L1 error at depth n");
        auto source = add_source_opts(cmd);
        auto n = std::make_shared<int>(24);
        auto* on = cmd->add_option("--n", *n, "word depth (<= 24)");
        cmd->callback([&, source, n, on] {
            action = [&, source, n, on]() -> int {
                cfg_get(g, "leafwise.l1", "n", on, *n);
                double t0 = now_ms();
                gf::DigitSource s = source();
                json j{{"n", *n}, {"l1", gf::un_l1_error(s, *n)}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    {
        auto* cmd = leaf->add_subcommand("iterate", "exact word-mass vector after some levels");
        auto source = add_source_opts(cmd);
        auto levels = std::make_shared<int>(10);
        auto* ol = cmd->add_option("--levels", *levels, "word length (<= 20)");
        cmd->callback([&, source, levels, ol] {
            action = [&, source, levels, ol]() -> int {
                cfg_get(g, "leafwise.iterate", "levels", ol, *levels);
                double t0 = now_ms();
                gf::DigitSource s = source();
                std::vector<double> probs = gf::iterate_chain(s, *levels);
                double pmax = 0.0, pmin = 1.0;
                for (double p : probs) {
                    pmax = std::max(pmax, p);
                    pmin = std::min(pmin, p);
                }
                gf::UniformityGap ug = gf::uniformity_gap(probs);
                json j{{"levels", *levels},
                       {"max_prob", pmax},
                       {"min_prob", pmin},
                       {"max_gap", ug.max_gap},
                       {"entropy_deficit", ug.entropy_deficit}};
                if (*levels <= 12) j["probs"] = probs;
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    // ------------------------------------------------------------ margulis
    auto* mar = app.add_subcommand("margulis", "drift conditions and certified tail bounds");
    mar->fallthrough();
    mar->require_subcommand(1);

    {
        auto* cmd = mar->add_subcommand("check", "drift conditions of a chain descriptor");
        auto path = std::make_shared<std::string>();
        auto* op = cmd->add_option("--chain", *path, "chain descriptor JSON");
        cmd->callback([&, path, op] {
            action = [&, path, op]() -> int {
                cfg_get(g, "margulis.check", "chain", op, *path);
                double t0 = now_ms();
                ChainSpec spec = read_chain_spec(*path);
                gf::FiniteChain chain(spec.kernel);
                bool a_ok = gf::check_condition_a(chain, spec.alpha, spec.t1);
                double eps = gf::bad_set_measure(chain, spec.alpha, spec.t0, spec.t1);
                json j{{"states", chain.num_states()},
                       {"condition_a", a_ok},
                       {"epsilon", eps},
                       {"T0", spec.t0},
                       {"T1", spec.t1}};
                if (spec.beta.has_value())
                    j["condition_a_beta"] = gf::check_condition_a(chain, *spec.beta, spec.t1);
                emit_report(g, j, now_ms() - t0);
                return a_ok ? 0 : 1;
            };
        });
    }

    {
        auto* cmd = mar->add_subcommand("tail", "empirical tail against the certified bound (CSV)");
        auto path = std::make_shared<std::string>();
        auto tmax = std::make_shared<double>(50.0);
        auto* op = cmd->add_option("--chain", *path, "chain descriptor JSON");
        auto* ot = cmd->add_option("--tmax", *tmax, "largest height to tabulate");
        cmd->callback([&, path, tmax, op, ot] {
            action = [&, path, tmax, op, ot]() -> int {
                cfg_get(g, "margulis.tail", "chain", op, *path);
                cfg_get(g, "margulis.tail", "tmax", ot, *tmax);
                double t0 = now_ms();
                ChainSpec spec = read_chain_spec(*path);
                gf::FiniteChain chain(spec.kernel);
                gf::TailReport rep = gf::verify_tail(chain, spec.alpha, spec.t0, spec.t1);
                std::string csv = "t,tail,bound\n";
                char line[128];
                for (int k = 3; k * spec.t1 <= *tmax; ++k) {
                    double t = k * spec.t1;
                    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", t,
                                  gf::empirical_tail(chain, spec.alpha, t),
                                  gf::tail_bound(t, spec.t0, spec.t1, rep.epsilon));
                    csv += line;
                }
                emit(g, csv);
                if (g.timing) std::fprintf(stderr, "wall_ms,%g\n", now_ms() - t0);
                return rep.holds ? 0 : 1;
            };
        });
    }

    {
        auto* cmd = mar->add_subcommand("combine", "merge two heights and re-certify the result");
        auto path = std::make_shared<std::string>();
        auto* op = cmd->add_option("--chain", *path, "chain descriptor JSON with alpha and beta");
        cmd->callback([&, path, op] {
            action = [&, path, op]() -> int {
                cfg_get(g, "margulis.combine", "chain", op, *path);
                double t0 = now_ms();
                ChainSpec spec = read_chain_spec(*path);
                if (!spec.beta.has_value())
                    throw std::invalid_argument("combine needs 'beta' in the chain descriptor");
                gf::FiniteChain chain(spec.kernel);
                gf::CombineResult res =
                    gf::max_combine(chain, spec.alpha, *spec.beta, spec.t0, spec.t1);
                json j{{"gamma", res.gamma},
                       {"certificate",
                        {{"t0", res.certificate.t0},
                         {"t1", res.certificate.t1},
                         {"epsilon", res.certificate.epsilon},
                         {"condition_a_ok", res.certificate.condition_a_ok},
                         {"bad_set_mass", res.certificate.bad_set_mass},
                         {"ok", res.certificate.ok()}}}};
                emit_report(g, j, now_ms() - t0);
                return res.certificate.ok() ? 0 : 1;
            };
        });
    }

    {
        auto* cmd = mar->add_subcommand("repdecay", "averaged weight-2 expansion deficit");
        auto m = std::make_shared<int>(1);
        auto trials = std::make_shared<int>(1000);
        auto weight = std::make_shared<int>(2);
        auto* om = cmd->add_option("--m", *m, "flow exponent (1..12)");
        auto* otr = cmd->add_option("--trials", *trials, "random unit vectors");
        auto* ow = cmd->add_option("--weight", *weight, "representation weight (only 2)");
        cmd->callback([&, m, trials, weight, om, otr, ow] {
            action = [&, m, trials, weight, om, otr, ow]() -> int {
                cfg_get(g, "margulis.repdecay", "m", om, *m);
                cfg_get(g, "margulis.repdecay", "trials", otr, *trials);
                cfg_get(g, "margulis.repdecay", "weight", ow, *weight);
                double t0 = now_ms();
                double deficit = gf::rep_decay_deficit(*weight, *m, *trials, g.seed);
                json j{{"m", *m}, {"trials", *trials}, {"deficit", deficit}};
                emit_report(g, j, now_ms() - t0);
                return 0;
            };
        });
    }

    // --------------------------------------------------------------- suite
    {
        auto* cmd = app.add_subcommand(
            "suite", "run the pinned verification battery for an area (or 'all')");
        cmd->fallthrough();
        auto area = std::make_shared<std::string>();
        cmd->add_option("area", *area, "all | geometry | lattice | cantor | leafwise | margulis")
            ->required();
        cmd->callback([&, area] {
            action = [&, area]() -> int {
                auto results = gf::run_battery(*area, g.threads);
                int passed = 0;
                json arr = json::array();
                for (const auto& r : results) {
                    passed += r.pass ? 1 : 0;
                    if (g.timing)
                        std::printf("%s  criterion %2d  [%s] %s — %s (%.0f ms)\n",
                                    r.pass ? "PASS" : "FAIL", r.id, r.area.c_str(),
                                    r.name.c_str(), r.detail.c_str(), r.wall_ms);
                    else
                        std::printf("%s  criterion %2d  [%s] %s — %s\n",
                                    r.pass ? "PASS" : "FAIL", r.id, r.area.c_str(),
                                    r.name.c_str(), r.detail.c_str());
                    arr.push_back({{"id", r.id},
                                   {"area", r.area},
                                   {"name", r.name},
                                   {"pass", r.pass},
                                   {"detail", r.detail}});
                }
                std::printf("%d/%zu criteria passed\n", passed, results.size());
                if (!g.out_path.empty()) {
                    json j{{"schema", "v1"},
                           {"area", *area},
                           {"results", arr},
                           {"passed", passed},
                           {"total", (long long)results.size()}};
                    write_atomic(g.out_path, j.dump(2) + "\n");
                }
                return passed == (int)results.size() ? 0 : 1;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!g.config_path.empty()) g.cfg = load_config(g.config_path);
        apply_global_config(g);
        return action ? action() : 2;
    } catch (const gf::invariant_violation& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 1;
    } catch (const std::length_error& e) {
        std::fprintf(stderr, "resource limit: %s\n", e.what());
        return 3;
    } catch (const std::overflow_error& e) {
        std::fprintf(stderr, "resource limit: %s\n", e.what());
        return 3;
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "resource limit: out of memory\n");
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
