// End-to-end tests of the command-line front end: spawns the real binary
// (path injected by the build as CLI_PATH) and checks output bytes and exit
// codes.  Exit convention: 0 ok, 1 checked-property failure, 2 usage/domain
// error, 3 resource cap.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const std::string out_f = "cli_stdout.tmp";
    const std::string err_f = "cli_stderr.tmp";
    std::string cmd = env_prefix + "\"" CLI_PATH "\" " + args + " > " + out_f + " 2> " + err_f;
    int rc = std::system(cmd.c_str());
    RunResult r;
    if (WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
    r.out = slurp(out_f);
    r.err = slurp(err_f);
    std::remove(out_f.c_str());
    std::remove(err_f.c_str());
    return r;
}

}  // namespace

TEST_CASE("line distance with finite and infinite endpoints") {
    RunResult r = run_cli("geom line-dist --l1=-1,1 --l2=-7.38905609893065,7.38905609893065");
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("schema") == "v1");
    CHECK(j.at("distance").get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(j.at("degenerate").get<bool>() == false);
    CHECK_FALSE(j.contains("wall_ms"));  // no --timing keeps bytes stable

    // Leading -inf needs the --opt=value form so it is not read as a flag.
    RunResult v = run_cli("geom line-dist --l1=-inf,0 --l2=1,2");
    REQUIRE(v.code == 0);
    json jv = json::parse(v.out);
    // Vertical line against the semicircle over [1,2]: 2 asinh(1).
    CHECK(jv.at("distance").get<double>() ==
          doctest::Approx(1.762747174090086).epsilon(1e-9));

    // Missing arguments are a usage error.
    CHECK(run_cli("geom line-dist --l2=1,2").code == 2);
}

TEST_CASE("mod8 exit codes and config precedence") {
    RunResult ok = run_cli("lattice mod8 --a 17");
    REQUIRE(ok.code == 0);
    json j = json::parse(ok.out);
    CHECK(j.at("count").get<long long>() == 0);
    CHECK(j.at("pass").get<bool>() == true);

    // 16 is not 1 mod 8: rejected as a domain error.
    RunResult bad = run_cli("lattice mod8 --a 16");
    CHECK(bad.code == 2);
    CHECK_FALSE(bad.err.empty());

    {
        std::ofstream cfg("cli_cfg.tmp.json");
        cfg << R"({"lattice.mod8": {"a": 17}})";
    }
    RunResult fromcfg = run_cli("--config cli_cfg.tmp.json lattice mod8");
    CHECK(fromcfg.code == 0);
    CHECK(json::parse(fromcfg.out).at("a").get<long long>() == 17);
    // An explicit flag beats the config file.
    CHECK(run_cli("--config cli_cfg.tmp.json lattice mod8 --a 16").code == 2);
    std::remove("cli_cfg.tmp.json");
}

TEST_CASE("sampling reports are byte-identical across runs and thread counts") {
    const std::string base =
        "cantor run --aprime 59049 --count 8 --depth 10 --samples 300 --seed 7";
    CHECK(run_cli(base + " --threads 2 --out cli_a.tmp.json").code == 0);
    CHECK(run_cli(base + " --threads 5 --out cli_b.tmp.json").code == 0);
    CHECK(run_cli(base + " --threads 2 --out cli_c.tmp.json").code == 0);
    CHECK(run_cli(base + " --out cli_d.tmp.json", "GEOFINLAB_THREADS=3 ").code == 0);
    const std::string a = slurp("cli_a.tmp.json");
    CHECK(a == slurp("cli_b.tmp.json"));
    CHECK(a == slurp("cli_c.tmp.json"));
    CHECK(a == slurp("cli_d.tmp.json"));

    json j = json::parse(a);
    CHECK(j.at("samples").get<long long>() == 300);
    CHECK(j.at("invariant_violations").get<long long>() == 0);
    CHECK(j.at("lower_bound").get<double>() == doctest::Approx(0.8).epsilon(1e-9));
    for (const char* f : {"cli_a.tmp.json", "cli_b.tmp.json", "cli_c.tmp.json",
                          "cli_d.tmp.json"})
        std::remove(f);
}

TEST_CASE("battery areas and validation") {
    CHECK(run_cli("suite nosucharea").code == 2);
    RunResult r = run_cli("suite lattice");
    CHECK(r.code == 0);
    CHECK(r.out.find("[lattice]") != std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("2/2 criteria passed") != std::string::npos);
}

TEST_CASE("deterministic decay probe and exact dimension") {
    RunResult r1 = run_cli("margulis repdecay --m 3 --trials 20 --seed 1");
    RunResult r2 = run_cli("margulis repdecay --m 3 --trials 20 --seed 1");
    REQUIRE(r1.code == 0);
    CHECK(r1.out == r2.out);
    double deficit = json::parse(r1.out).at("deficit").get<double>();
    CHECK(deficit > 0.0);
    CHECK(deficit < 10.0);

    RunResult d = run_cli("leafwise dimension --q 0.1");
    REQUIRE(d.code == 0);
    json jd = json::parse(d.out);
    CHECK(jd.at("dimension").get<double>() ==
          doctest::Approx(0.4689955935892812).epsilon(1e-12));
    CHECK(jd.at("entropy_rate_nats").get<double>() ==
          doctest::Approx(0.32508297339144827).epsilon(1e-12));
}
