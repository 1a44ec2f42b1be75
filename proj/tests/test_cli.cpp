#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "test_support.hpp"

using testsupport::body_lines;
using testsupport::contains;
using testsupport::read_file;
using testsupport::split_csv;
using testsupport::split_lines;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("sddetem");
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.code = sddetem::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Per-process scratch directory for output files.
std::string tmp_path(const std::string& name) {
    static const std::filesystem::path dir = [] {
        auto p = std::filesystem::temp_directory_path() /
                 ("sddetem-cli-tests-" + std::to_string(::getpid()));
        std::filesystem::create_directories(p);
        return p;
    }();
    return (dir / name).string();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// Value of a "# config: key = value" echo line, or "" if absent.
std::string header_value(const std::string& content, const std::string& key) {
    const std::string prefix = "# config: " + key + " = ";
    for (const auto& line : split_lines(content)) {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return "";
}

}  // namespace

TEST_CASE("cli: help, missing subcommand, unknown flags") {
    const CliResult help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(contains(help.out, "simulate"));
    CHECK(contains(help.out, "price-lookback"));
    CHECK(help.err.empty());

    const CliResult subhelp = run({"simulate", "--help"});
    CHECK(subhelp.code == 0);
    CHECK(contains(subhelp.out, "--delta"));

    const CliResult none = run({});
    CHECK(none.code == 1);
    CHECK(contains(none.err, "error: "));

    const CliResult unknown = run({"simulate", "--no-such-flag", "1"});
    CHECK(unknown.code == 1);
    CHECK(contains(unknown.err, "error: "));
}

TEST_CASE("cli: single-path simulation file layout") {
    const std::string out = tmp_path("sim-single.csv");
    const CliResult r = run({"simulate", "--delta", "0.25", "--T", "1", "--seed", "9",
                             "--out", out});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());  // results go to the file, not the console

    const std::string content = read_file(out);
    const auto lines = split_lines(content);
    CHECK(lines[0] == "# sddetem 0.1.0");
    CHECK(lines[1] == "# command: simulate");
    CHECK(header_value(content, "alpha") == "4");
    CHECK(header_value(content, "mu") == "2");
    CHECK(header_value(content, "sigma") == "0.5");
    CHECK(header_value(content, "tau") == "2");
    CHECK(header_value(content, "xi0") == "0.20000000000000001");
    CHECK(header_value(content, "envelope") == "default");
    CHECK(header_value(content, "scheme") == "tem");
    CHECK(header_value(content, "delta") == "0.25");
    CHECK(header_value(content, "T") == "1");
    CHECK(header_value(content, "paths") == "1");
    CHECK(header_value(content, "seed") == "9");
    CHECK(contains(content, "# policy: envelope=default (u_min=0); "
                            "psi(delta)=1*delta^-0.25; delta_star=4.096e-05; "
                            "mode=warn"));
    CHECK(contains(content, "# psi[0.25]: nominal = "));
    CHECK(contains(content, "# kappa[0.25] = "));

    // Body: column header then k = -M..N with M = 8, N = 4.
    const auto body = body_lines(content);
    REQUIRE(body.size() == 1 + 13);
    CHECK(body[0] == "k,t,x");
    CHECK(body[1] == "-8,-2,0.20000000000000001");
    CHECK(body[2].rfind("-7,-1.75,", 0) == 0);
    CHECK(body[9] == "0,0,0.20000000000000001");
    CHECK(body[13].rfind("4,1,", 0) == 0);
}

TEST_CASE("cli: ensemble simulation carries the path id column") {
    const std::string out = tmp_path("sim-multi.csv");
    const CliResult r = run({"simulate", "--delta", "0.25", "--T", "0.5", "--paths", "3",
                             "--seed", "2", "--out", out});
    REQUIRE(r.code == 0);
    const auto body = body_lines(read_file(out));
    REQUIRE(body.size() == 1 + 3 * 11);  // header + 3 paths x (M + N + 1 = 11) rows
    CHECK(body[0] == "path_id,k,t,x");
    CHECK(body[1].rfind("0,-8,", 0) == 0);
    CHECK(body[12].rfind("1,-8,", 0) == 0);
    CHECK(body[23].rfind("2,-8,", 0) == 0);
}

TEST_CASE("cli: reruns and worker counts reproduce files byte-for-byte") {
    const std::string a = tmp_path("det-a.csv");
    const std::string b = tmp_path("det-b.csv");
    const std::string c = tmp_path("det-c.csv");
    const std::vector<std::string> base{"simulate", "--delta", "0.25",  "--T",
                                        "2",        "--paths", "70",    "--sigma",
                                        "0.5",      "--seed",  "5"};
    auto with = [&](const std::string& out, const std::string& workers) {
        auto args = base;
        args.insert(args.end(), {"--workers", workers, "--out", out});
        return run(args);
    };
    REQUIRE(with(a, "1").code == 0);
    REQUIRE(with(b, "4").code == 0);
    REQUIRE(with(c, "4").code == 0);
    const std::string ca = read_file(a);
    CHECK(ca == read_file(b));
    CHECK(ca == read_file(c));
    CHECK(!ca.empty());
}

TEST_CASE("cli: header echo rebuilds the exact command") {
    const std::string first = tmp_path("echo-1.csv");
    REQUIRE(run({"simulate", "--delta", "0.25", "--T", "1", "--paths", "3", "--sigma",
                 "0.7", "--seed", "12", "--out", first})
                .code == 0);
    const std::string content = read_file(first);

    // Feeding every "# config:" echo back as flags must reproduce the file exactly.
    std::vector<std::string> args{"simulate"};
    for (const auto& line : split_lines(content)) {
        const std::string prefix = "# config: ";
        if (line.rfind(prefix, 0) != 0) continue;
        const std::string kv = line.substr(prefix.size());
        const std::size_t sep = kv.find(" = ");
        REQUIRE(sep != std::string::npos);
        args.push_back("--" + kv.substr(0, sep));
        args.push_back(kv.substr(sep + 3));
    }
    const std::string second = tmp_path("echo-2.csv");
    args.insert(args.end(), {"--out", second});
    REQUIRE(run(args).code == 0);
    CHECK(read_file(second) == content);
}

TEST_CASE("cli: bundled worked-example preset and its header") {
    const std::string out = tmp_path("example.csv");
    // Small ensemble override keeps the test quick; the preset supplies the policy.
    const CliResult r = run({"example-5-3", "--delta", "1e-2", "--T", "1", "--paths",
                             "50", "--seed", "1", "--out", out});
    REQUIRE(r.code == 0);
    const std::string content = read_file(out);

    CHECK(contains(content, "# command: example-5-3"));
    CHECK(header_value(content, "envelope") == "paper_example");
    CHECK(header_value(content, "psi_scale") == "1");
    CHECK(header_value(content, "psi_exponent") == "0.66666666666666663");
    CHECK(header_value(content, "delta_star") == "1");
    CHECK(header_value(content, "strict_42") == "false");
    CHECK(header_value(content, "pool") == "terminal");
    CHECK(contains(content, "# policy: envelope=paper_example (u_min=1); "
                            "psi(delta)=1*delta^-0.666667; delta_star=1; mode=warn"));
    CHECK(contains(content, "# policy-warning: "));

    // Step-bound lines carry the frozen clamp values for delta = 1e-2.
    std::string psi_line, kappa_line;
    for (const auto& line : split_lines(content)) {
        if (line.rfind("# psi[1e-2]: ", 0) == 0) psi_line = line;
        if (line.rfind("# kappa[1e-2] = ", 0) == 0) kappa_line = line;
    }
    REQUIRE(!psi_line.empty());
    REQUIRE(!kappa_line.empty());
    const double psi_nominal = std::strtod(
        psi_line.substr(psi_line.find("nominal = ") + 10).c_str(), nullptr);
    const double kappa =
        std::strtod(kappa_line.substr(std::string("# kappa[1e-2] = ").size()).c_str(),
                    nullptr);
    CHECK(psi_nominal == doctest::Approx(21.544346900318837).epsilon(1e-13));
    CHECK(kappa == doctest::Approx(1.8205809258973795).epsilon(1e-11));

    const auto body = body_lines(content);
    REQUIRE(body.size() == 3);
    CHECK(body[0] == "method,min,mean,sd,kurt,skew,max");
    CHECK(split_csv(body[1])[0] == "tem");
    CHECK(split_csv(body[2])[0] == "bem");
}

TEST_CASE("cli: degenerate statistics print NA for the shape columns") {
    const std::string out = tmp_path("stats-na.csv");
    const CliResult r = run({"stats", "--sigma", "0", "--delta", "1e-2", "--T", "1",
                             "--paths", "10", "--out", out});
    REQUIRE(r.code == 0);
    const auto body = body_lines(read_file(out));
    REQUIRE(body.size() == 3);
    const auto tem = split_csv(body[1]);
    REQUIRE(tem.size() == 7);
    CHECK(tem[0] == "tem");
    CHECK(tem[3] == "0");   // sd of identical deterministic terminals
    CHECK(tem[4] == "NA");  // kurt
    CHECK(tem[5] == "NA");  // skew
    CHECK(tem[1] == tem[6]);  // min == max
}

TEST_CASE("cli: time pooling with a Lyapunov trace sidecar") {
    const std::string out = tmp_path("stats-beta.csv");
    const CliResult r = run({"stats", "--delta", "0.1", "--T", "1", "--paths", "12",
                             "--pool", "time", "--beta", "0.5", "--seed", "3", "--out",
                             out});
    REQUIRE(r.code == 0);
    CHECK(header_value(read_file(out), "pool") == "time");
    CHECK(header_value(read_file(out), "beta") == "0.5");

    const std::string side = read_file(out + ".lyapunov.csv");
    REQUIRE(!side.empty());
    CHECK(contains(side, "# lyapunov-excluded-paths: "));
    const auto body = body_lines(side);
    REQUIRE(body.size() == 1 + 11);  // t grid 0..1 at 0.1
    CHECK(body[0] == "t,mean_v");
    CHECK(split_csv(body[1])[0] == "0");
    CHECK(split_csv(body[11])[0] == "1");

    const CliResult bad = run({"stats", "--delta", "0.1", "--T", "1", "--paths", "12",
                               "--beta", "1.5", "--out", out});
    CHECK(bad.code == 1);
    CHECK(contains(bad.err, "beta must lie in (0, 1)"));

    const CliResult badpool = run({"stats", "--delta", "0.1", "--T", "1", "--paths",
                                   "12", "--pool", "bogus", "--out", out});
    CHECK(badpool.code == 1);
    CHECK(contains(badpool.err, "pool must be 'terminal' or 'time'"));
}

TEST_CASE("cli: convergence study output and plot sidecar") {
    const std::string out = tmp_path("conv.csv");
    const CliResult r = run({"converge", "--deltas", "4e-2,2e-2", "--tau", "0.2", "--T",
                             "0.4", "--xi0", "0.2", "--paths", "20", "--seed", "3",
                             "--plot-data", "--out", out});
    REQUIRE(r.code == 0);
    const std::string content = read_file(out);
    CHECK(header_value(content, "deltas") == "4e-2,2e-2");
    CHECK(header_value(content, "mode") == "pair");
    CHECK(contains(content, "# loglog-slope: "));
    CHECK(contains(content, "# loglog-slope-se: "));
    CHECK(contains(content, "# psi[4e-2]: "));
    CHECK(contains(content, "# psi[2e-2]: "));

    const auto body = body_lines(content);
    REQUIRE(body.size() == 3);
    CHECK(body[0] == "delta,error_median,error_mean,error_p90,n_paths");
    CHECK(split_csv(body[1])[0] == "4e-2");  // original spelling, coarse first
    CHECK(split_csv(body[2])[0] == "2e-2");
    CHECK(split_csv(body[1])[4] == "20");

    const std::string plot = read_file(out + ".plot.csv");
    const auto plot_lines = split_lines(plot);
    REQUIRE(plot_lines.size() == 3);
    CHECK(plot_lines[0] == "x,y");
    CHECK(split_csv(plot_lines[1])[0] == "0.040000000000000001");

    // Self mode against a shared reference step.
    const std::string out_self = tmp_path("conv-self.csv");
    const CliResult rs = run({"converge", "--deltas", "4e-2,2e-2", "--delta-ref", "1e-2",
                              "--mode", "self", "--tau", "0.2", "--T", "0.4", "--paths",
                              "10", "--seed", "3", "--out", out_self});
    REQUIRE(rs.code == 0);
    CHECK(header_value(read_file(out_self), "delta-ref") == "1e-2");
    CHECK(header_value(read_file(out_self), "mode") == "self");
}

TEST_CASE("cli: convergence study rejects inconsistent requests") {
    const std::string out = tmp_path("conv-bad.csv");
    auto conv = [&](const std::string& tau, const std::string& T,
                    std::vector<std::string> extra) {
        std::vector<std::string> args{"converge", "--tau", tau,     "--T", T,
                                      "--paths",  "5",   "--out", out};
        args.insert(args.end(), extra.begin(), extra.end());
        return run(args);
    };

    const CliResult no_deltas = conv("0.2", "0.4", {});
    CHECK(no_deltas.code == 1);
    CHECK(contains(no_deltas.err, "step-size list is required"));

    const CliResult not_nested = conv("0.2", "0.4", {"--deltas", "1e-2,3e-3"});
    CHECK(not_nested.code == 1);
    CHECK(contains(not_nested.err, "step sizes must be nested"));

    const CliResult bad_tau = conv("0.13", "0.4", {"--deltas", "4e-2,2e-2"});
    CHECK(bad_tau.code == 1);
    CHECK(contains(bad_tau.err, "tau must be an integer multiple of every step"));

    const CliResult bad_T = conv("0.2", "0.41", {"--deltas", "4e-2,2e-2"});
    CHECK(bad_T.code == 1);
    CHECK(contains(bad_T.err, "T must be an integer multiple of every step"));

    const CliResult bad_mode =
        conv("0.2", "0.4", {"--deltas", "4e-2,2e-2", "--mode", "bogus"});
    CHECK(bad_mode.code == 1);
    CHECK(contains(bad_mode.err, "mode must be 'pair' or 'self'"));

    const CliResult no_ref =
        conv("0.2", "0.4", {"--deltas", "4e-2,2e-2", "--mode", "self"});
    CHECK(no_ref.code == 1);
    CHECK(contains(no_ref.err, "self mode needs a reference step"));

    const CliResult stray_ref =
        conv("0.2", "0.4", {"--deltas", "4e-2,2e-2", "--delta-ref", "1e-2"});
    CHECK(stray_ref.code == 1);
    CHECK(contains(stray_ref.err, "delta-ref requires --mode self"));

    const CliResult xi_file =
        conv("0.2", "0.4", {"--deltas", "4e-2,2e-2", "--xi-file", "whatever"});
    CHECK(xi_file.code == 1);
    CHECK(contains(xi_file.err, "constant initial data only"));
}

TEST_CASE("cli: interpolation-gap command reports its scan geometry") {
    const std::string out = tmp_path("gap.csv");
    const CliResult r = run({"gap", "--delta", "0.1", "--T", "0.5", "--refine", "4",
                             "--p-exp", "2", "--paths", "30", "--seed", "9", "--out",
                             out});
    REQUIRE(r.code == 0);
    const auto body = body_lines(read_file(out));
    REQUIRE(body.size() == 2);
    CHECK(body[0] == "delta,p_exp,refine_factor,gap_moment,points,n_paths");
    const auto row = split_csv(body[1]);
    REQUIRE(row.size() == 6);
    CHECK(row[0] == "0.1");
    CHECK(row[1] == "2");
    CHECK(row[2] == "4");
    CHECK(std::strtod(row[3].c_str(), nullptr) > 0.0);
    CHECK(row[4] == "15");  // 5 coarse steps x 3 interior points
    CHECK(row[5] == "30");

    const CliResult bad_refine = run({"gap", "--delta", "0.1", "--T", "0.5", "--refine",
                                      "1", "--out", out});
    CHECK(bad_refine.code == 1);
    CHECK(contains(bad_refine.err, "refine must be >= 2"));

    const CliResult bad_p = run({"gap", "--delta", "0.1", "--T", "0.5", "--p-exp",
                                 "1.5", "--out", out});
    CHECK(bad_p.code == 1);
    CHECK(contains(bad_p.err, "p-exp must be >= 2"));
}

TEST_CASE("cli: exit probabilities anchored by the immediate-exit level") {
    const std::string out = tmp_path("exit.csv");
    // 1/1.05 > 0.2, so every path exits at index 0: probability exactly 1. The wide
    // band [1/5, 5] is never left on this horizon: probability exactly 0.
    const CliResult r = run({"exit-prob", "--delta", "1e-2", "--T", "0.5", "--paths",
                             "50", "--k-levels", "1.05,5", "--seed", "1", "--out", out});
    REQUIRE(r.code == 0);
    const auto body = body_lines(read_file(out));
    REQUIRE(body.size() == 3);
    CHECK(body[0] == "k_level,exit_probability,n_paths");
    CHECK(body[1] == "1.05,1,50");
    CHECK(body[2] == "5,0,50");

    const CliResult bad = run({"exit-prob", "--delta", "1e-2", "--T", "1", "--k-levels",
                               "1,5", "--out", out});
    CHECK(bad.code == 1);
    CHECK(contains(bad.err, "every level must exceed 1"));
}

TEST_CASE("cli: bond pricing row shape") {
    const std::string out = tmp_path("bond.csv");
    const CliResult r = run({"price-bond", "--delta", "1e-2", "--T", "1", "--paths",
                             "100", "--seed", "1", "--out", out});
    REQUIRE(r.code == 0);
    const auto body = body_lines(read_file(out));
    REQUIRE(body.size() == 2);
    CHECK(body[0] == "estimate,stderr,ci_lo,ci_hi,n,delta,seed");
    const auto row = split_csv(body[1]);
    REQUIRE(row.size() == 7);
    const double estimate = std::strtod(row[0].c_str(), nullptr);
    const double stderr_v = std::strtod(row[1].c_str(), nullptr);
    const double lo = std::strtod(row[2].c_str(), nullptr);
    const double hi = std::strtod(row[3].c_str(), nullptr);
    CHECK(estimate > 0.0);
    CHECK(estimate < 1.0);  // discount factor
    CHECK(stderr_v > 0.0);
    CHECK(lo < estimate);
    CHECK(estimate < hi);
    CHECK(row[4] == "100");
    CHECK(row[5] == "1e-2");
    CHECK(row[6] == "1");

    const CliResult few = run({"price-bond", "--delta", "1e-2", "--T", "1", "--paths",
                               "1", "--out", out});
    CHECK(few.code == 1);
    CHECK(contains(few.err, "paths must be >= 2 for pricing"));
}

TEST_CASE("cli: lookback pricing echoes its strike and validates it") {
    const std::string out = tmp_path("lookback.csv");
    const CliResult r = run({"price-lookback", "--delta", "1e-2", "--T", "1", "--paths",
                             "100", "--K", "1.5", "--seed", "1", "--out", out});
    REQUIRE(r.code == 0);
    const std::string content = read_file(out);
    CHECK(header_value(content, "K") == "1.5");
    CHECK(contains(content, "# command: price-lookback"));
    const auto row = split_csv(body_lines(content)[1]);
    // The worked-example paths start at the global minimum 0.2, so the payoff is the
    // constant 1.3 and the interval collapses to a point.
    CHECK(row[0] == "1.3");
    CHECK(row[1] == "0");

    const CliResult bad = run({"price-lookback", "--delta", "1e-2", "--T", "1",
                               "--paths", "100", "--K", "0", "--out", out});
    CHECK(bad.code == 1);
    CHECK(contains(bad.err, "strike must be positive"));
}

TEST_CASE("cli: initial segment files") {
    // M + 1 = 9 values for tau = 2 at delta = 0.25.
    const std::string ramp = tmp_path("xi-ramp.txt");
    {
        std::ostringstream ss;
        for (int i = 0; i <= 8; ++i) ss << (0.2 + 0.01 * i) << "\n";
        write_text(ramp, ss.str());
    }
    const std::string out = tmp_path("xi-run.csv");

    // Non-constant data without a Holder certificate is rejected.
    const CliResult no_cert = run({"simulate", "--delta", "0.25", "--T", "1",
                                   "--xi-file", ramp, "--out", out});
    CHECK(no_cert.code == 1);
    CHECK(contains(no_cert.err, "initial segment with D = 0 must be constant"));

    // With a matching certificate the run succeeds and echoes the file settings.
    const CliResult ok = run({"simulate", "--delta", "0.25", "--T", "1", "--xi-file",
                              ramp, "--holder-d", "0.05", "--holder-ell", "1", "--out",
                              out});
    REQUIRE(ok.code == 0);
    const std::string content = read_file(out);
    CHECK(header_value(content, "xi-file") == ramp);
    CHECK(header_value(content, "holder-d") == "0.050000000000000003");
    CHECK(header_value(content, "xi0").empty());  // replaced by the file keys
    CHECK(contains(body_lines(content)[1], "-8,-2,0.2"));

    // An insufficient certificate fails the admissibility check.
    const CliResult weak = run({"simulate", "--delta", "0.25", "--T", "1", "--xi-file",
                                ramp, "--holder-d", "0.01", "--out", out});
    CHECK(weak.code == 1);
    CHECK(contains(weak.err, "violates its Holder certificate"));

    // Wrong number of values.
    const std::string shorter = tmp_path("xi-short.txt");
    write_text(shorter, "0.2\n0.2\n0.2\n");
    const CliResult wrong = run({"simulate", "--delta", "0.25", "--T", "1", "--xi-file",
                                 shorter, "--out", out});
    CHECK(wrong.code == 1);
    CHECK(contains(wrong.err, "xi-file must hold exactly M+1 = 9 values"));

    // Bad token, reported with its line number.
    const std::string junk = tmp_path("xi-junk.txt");
    write_text(junk, "0.2\nnot-a-number\n0.2\n");
    const CliResult bad_tok = run({"simulate", "--delta", "0.25", "--T", "1",
                                   "--xi-file", junk, "--out", out});
    CHECK(bad_tok.code == 1);
    CHECK(contains(bad_tok.err, "xi-file line 2: invalid number 'not-a-number'"));

    const CliResult missing = run({"simulate", "--delta", "0.25", "--T", "1",
                                   "--xi-file", tmp_path("nope.txt"), "--out", out});
    CHECK(missing.code == 1);
    CHECK(contains(missing.err, "cannot read initial segment file"));
}

TEST_CASE("cli: config files merge under command-line flags") {
    const std::string cfg = tmp_path("run.cfg");
    write_text(cfg,
               "delta = 0.25\n"
               "T = 1\n"
               "seed = 7\n"
               "# comment line\n");
    const std::string out = tmp_path("cfg-out.csv");

    // T on the command line wins; delta and seed come from the file.
    const CliResult r = run({"simulate", "--config", cfg, "--T", "2", "--out", out});
    REQUIRE(r.code == 0);
    const std::string content = read_file(out);
    CHECK(header_value(content, "delta") == "0.25");
    CHECK(header_value(content, "T") == "2");
    CHECK(header_value(content, "seed") == "7");

    // --config=path spelling behaves identically.
    const std::string out2 = tmp_path("cfg-out2.csv");
    const CliResult r2 = run({"simulate", "--config=" + cfg, "--T", "2", "--out", out2});
    REQUIRE(r2.code == 0);
    CHECK(read_file(out2) == content);

    // plot-data is a presence flag: "true" in the file switches the sidecar on.
    const std::string conv_cfg = tmp_path("conv.cfg");
    write_text(conv_cfg, "plot-data = true\npaths = 10\n");
    const std::string conv_out = tmp_path("cfg-conv.csv");
    const CliResult rc = run({"converge", "--config", conv_cfg, "--deltas", "4e-2,2e-2",
                              "--tau", "0.2", "--T", "0.4", "--seed", "3", "--out",
                              conv_out});
    REQUIRE(rc.code == 0);
    CHECK(!read_file(conv_out + ".plot.csv").empty());

    // Unknown keys surface as unknown flags; malformed files name the line.
    const std::string bad_cfg = tmp_path("bad.cfg");
    write_text(bad_cfg, "bogus = 1\n");
    const CliResult rb = run({"simulate", "--config", bad_cfg, "--out", out});
    CHECK(rb.code == 1);
    CHECK(contains(rb.err, "error: "));

    const std::string mal_cfg = tmp_path("mal.cfg");
    write_text(mal_cfg, "just some text\n");
    const CliResult rm = run({"simulate", "--config", mal_cfg, "--out", out});
    CHECK(rm.code == 1);
    CHECK(contains(rm.err, "config line 1: expected key = value"));

    const CliResult rmiss = run({"simulate", "--config", tmp_path("nope.cfg"), "--out",
                                 out});
    CHECK(rmiss.code == 1);
    CHECK(contains(rmiss.err, "cannot read config file"));
}

TEST_CASE("cli: configuration errors exit 1 with named keys") {
    const std::string out = tmp_path("errs.csv");

    const CliResult grid = run({"simulate", "--delta", "3e-3", "--T", "1", "--out",
                                out});
    CHECK(grid.code == 1);
    CHECK(contains(grid.err, "tau must be an integer multiple of delta"));

    const CliResult horizon = run({"simulate", "--delta", "0.25", "--T", "1.1",
                                   "--out", out});
    CHECK(horizon.code == 1);
    CHECK(contains(horizon.err, "T must be an integer multiple of delta"));

    const CliResult scheme = run({"simulate", "--delta", "0.25", "--T", "1", "--scheme",
                                  "bogus", "--out", out});
    CHECK(scheme.code == 1);
    CHECK(contains(scheme.err, "scheme must be 'tem' or 'bem'"));

    const CliResult envelope = run({"simulate", "--delta", "0.25", "--T", "1",
                                    "--envelope", "bogus", "--out", out});
    CHECK(envelope.code == 1);
    CHECK(contains(envelope.err, "envelope must be 'default' or 'paper_example'"));

    const CliResult gamma = run({"simulate", "--delta", "0.25", "--T", "1", "--gamma",
                                 "0.5", "--out", out});
    CHECK(gamma.code == 1);
    CHECK(contains(gamma.err, "requires gamma > 1"));

    const CliResult moment = run({"simulate", "--delta", "0.25", "--T", "1", "--r", "1",
                                  "--theta", "0.8", "--out", out});
    CHECK(moment.code == 1);
    CHECK(contains(moment.err, "requires 1 + gamma > 2 (r + theta)"));

    const CliResult xi0 = run({"simulate", "--delta", "0.25", "--T", "1", "--xi0", "0",
                               "--out", out});
    CHECK(xi0.code == 1);
    CHECK(contains(xi0.err, "xi0 must be positive"));
}

TEST_CASE("cli: strict policies refuse desk-scale steps up front") {
    const std::string out = tmp_path("strict.csv");
    const CliResult r = run({"simulate", "--delta", "1e-2", "--T", "1", "--strict_42",
                             "true", "--out", out});
    CHECK(r.code == 1);
    CHECK(contains(r.err, "exceeds delta_star"));
    CHECK(contains(r.err, "under a strict policy"));
}

TEST_CASE("cli: numerical failures exit 2 with the failing step") {
    const std::string out = tmp_path("blowup.csv");
    const CliResult r = run({"simulate", "--alpha", "1e9", "--mu", "1e4", "--tau",
                             "0.02", "--delta", "0.01", "--T", "0.5", "--out", out});
    CHECK(r.code == 2);
    CHECK(contains(r.err, "numerical failure: "));
    CHECK(contains(r.err, "1e12 overflow guard"));
    CHECK(contains(r.err, "[step "));
}
