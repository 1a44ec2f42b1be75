#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sddetem/analysis.hpp"
#include "sddetem/config.hpp"
#include "sddetem/ensemble.hpp"
#include "sddetem/errors.hpp"
#include "sddetem/model.hpp"
#include "sddetem/noise.hpp"
#include "sddetem/pricing.hpp"
#include "sddetem/solver.hpp"
#include "sddetem/truncation.hpp"
#include "sddetem/version.hpp"

namespace sddetem {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Everything a subcommand can be configured with; each subcommand owns one instance so
// bundled commands can carry different defaults.
struct CommandSpec {
    // model
    double alpha = 4.0;
    double mu = 2.0;
    double sigma = 0.5;
    double gamma = 2.0;
    double r = 2.0 / 3.0;
    double theta = 0.6;
    std::string tau = "2";
    // initial data
    double xi0 = 0.2;
    std::string xi_file;
    double holder_d = 0.0;
    double holder_ell = 1.0;
    // truncation policy
    std::optional<double> psi_scale;
    std::optional<double> psi_exponent;
    std::optional<double> delta_star;
    std::string envelope = "default";
    bool strict_42 = false;
    // grid
    std::string delta = "1e-2";
    std::string horizon = "4";
    // ensemble
    std::size_t paths = 1;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string out;
    // command-specific
    std::string scheme = "tem";
    std::string pool = "terminal";
    std::optional<double> beta;
    double strike = 1.5;
    std::string k_levels = "5,10,20,50";
    std::string deltas;
    std::string delta_ref;
    std::string mode = "pair";
    std::size_t refine = 2;
    double p_exp = 2.0;
    bool plot_data = false;
};

ModelParams make_model(const CommandSpec& s, const Decimal& tau) {
    ModelParams p;
    p.alpha = s.alpha;
    p.mu = s.mu;
    p.sigma = s.sigma;
    p.gamma = s.gamma;
    p.r = s.r;
    p.theta = s.theta;
    p.tau = tau.value;
    return p;
}

TruncationPolicy build_policy(const CommandSpec& s, const ValidatedParams& vp) {
    PolicyOverrides o;
    o.psi_scale = s.psi_scale;
    o.psi_exponent = s.psi_exponent;
    o.delta_star = s.delta_star;
    o.strict_42 = s.strict_42;
    if (s.envelope == "default") {
        // model-derived envelope (the make_policy default)
    } else if (s.envelope == "paper_example") {
        o.envelope = example_envelope();
    } else {
        throw ConfigError("envelope must be 'default' or 'paper_example' (key envelope)");
    }
    return make_policy(vp, o);
}

struct GridBundle {
    SolverGrid grid;
    Decimal delta;
    Decimal tau;
    Decimal horizon;
};

GridBundle build_grid(const CommandSpec& s) {
    GridBundle b;
    b.delta = Decimal::parse(s.delta);
    b.tau = Decimal::parse(s.tau);
    b.horizon = Decimal::parse(s.horizon);
    if (!(b.delta.value > 0.0)) throw ConfigError("delta must be positive (key delta)");
    if (!(b.tau.value > 0.0)) throw ConfigError("tau must be positive (key tau)");
    if (!(b.horizon.value > 0.0)) throw ConfigError("T must be positive (key T)");
    const auto m = exact_ratio(b.tau, b.delta);
    if (!m || *m < 1)
        throw ConfigError("tau must be an integer multiple of delta (key delta)");
    const auto n = exact_ratio(b.horizon, b.delta);
    if (!n || *n < 1)
        throw ConfigError("T must be an integer multiple of delta (key delta)");
    b.grid.delta = b.delta.value;
    b.grid.lag_steps = static_cast<std::size_t>(*m);
    b.grid.steps = static_cast<std::size_t>(*n);
    return b;
}

InitialSegment build_init(const CommandSpec& s, const GridBundle& g) {
    if (s.xi_file.empty()) {
        if (!(s.xi0 > 0.0)) throw ConfigError("xi0 must be positive (key xi0)");
        return constant_initial(s.xi0, g.tau.value, g.grid.lag_steps);
    }
    std::ifstream in(s.xi_file);
    if (!in) throw ConfigError("cannot read initial segment file (key xi-file): " +
                               s.xi_file);
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        const std::string tok = line.substr(b, e - b + 1);
        try {
            values.push_back(Decimal::parse(tok).value);
        } catch (const ConfigError&) {
            throw ConfigError("xi-file line " + std::to_string(line_no) +
                              ": invalid number '" + tok + "'");
        }
    }
    if (values.size() != g.grid.lag_steps + 1)
        throw ConfigError("xi-file must hold exactly M+1 = " +
                          std::to_string(g.grid.lag_steps + 1) +
                          " values on the delta grid (key xi-file)");
    return InitialSegment(std::move(values), g.tau.value, s.holder_d, s.holder_ell);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file (key out): " + path);
    out << content;
    if (!out) throw ConfigError("failed writing output file (key out): " + path);
}

// Header block: every output is self-describing — echoing these keys back as flags
// reproduces the file byte-for-byte. Excludes out/workers (they do not affect content).
struct HeaderExtras {
    std::vector<std::pair<std::string, std::string>> keys;  // command-specific echo
    std::vector<std::string> lines;                         // extra comment lines
};

void write_header(std::ostream& os, const std::string& command, const CommandSpec& s,
                  const TruncationPolicy& policy, const GridBundle& g,
                  const std::vector<Decimal>& step_sizes, const HeaderExtras& extras) {
    os << "# sddetem " << version_string << "\n";
    os << "# command: " << command << "\n";
    auto echo = [&os](const std::string& key, const std::string& value) {
        os << "# config: " << key << " = " << value << "\n";
    };
    echo("alpha", fmt17(s.alpha));
    echo("mu", fmt17(s.mu));
    echo("sigma", fmt17(s.sigma));
    echo("gamma", fmt17(s.gamma));
    echo("r", fmt17(s.r));
    echo("theta", fmt17(s.theta));
    echo("tau", g.tau.text);
    if (s.xi_file.empty()) {
        echo("xi0", fmt17(s.xi0));
    } else {
        echo("xi-file", s.xi_file);
        echo("holder-d", fmt17(s.holder_d));
        echo("holder-ell", fmt17(s.holder_ell));
    }
    echo("envelope", policy.envelope().name);
    echo("psi_scale", fmt17(policy.psi_scale()));
    echo("psi_exponent", fmt17(policy.psi_exponent()));
    echo("delta_star", fmt17(policy.delta_star()));
    echo("strict_42", policy.strict_42() ? "true" : "false");
    for (const auto& kv : extras.keys) echo(kv.first, kv.second);
    echo("seed", std::to_string(s.seed));
    os << "# policy: " << policy.provenance() << "\n";
    for (const auto& w : policy.warnings()) os << "# policy-warning: " << w << "\n";
    for (const auto& d : step_sizes) {
        os << "# psi[" << d.text << "]: nominal = " << fmt17(policy.psi(d.value))
           << ", effective = " << fmt17(policy.effective_psi(d.value)) << "\n";
        os << "# kappa[" << d.text << "] = " << fmt17(clamp_bound(policy, d.value))
           << "\n";
    }
    for (const auto& line : extras.lines) os << "# " << line << "\n";
}

Scheme parse_scheme(const CommandSpec& s) {
    if (s.scheme == "tem") return Scheme::TEM;
    if (s.scheme == "bem") return Scheme::BEM;
    throw ConfigError("scheme must be 'tem' or 'bem' (key scheme)");
}

// ---------------------------------------------------------------- subcommand runners

void run_simulate(const CommandSpec& s) {
    const GridBundle g = build_grid(s);
    const ValidatedParams vp = validate_params(make_model(s, g.tau));
    const TruncationPolicy policy = build_policy(s, vp);
    const InitialSegment init = build_init(s, g);
    const Scheme scheme = parse_scheme(s);
    if (s.paths < 1) throw ConfigError("paths must be >= 1 (key paths)");

    HeaderExtras extras;
    extras.keys = {{"scheme", s.scheme},
                   {"delta", g.delta.text},
                   {"T", g.horizon.text},
                   {"paths", std::to_string(s.paths)}};
    std::ostringstream body;
    write_header(body, "simulate", s, policy, g, {g.delta}, extras);

    auto solve_one = [&](std::size_t pid) {
        const IncrementStream noise = generate(s.seed, pid, g.grid.delta, g.grid.steps);
        return scheme == Scheme::TEM ? solve_tem(policy, init, g.grid, noise)
                                     : solve_bem(vp, init, g.grid, noise);
    };
    const auto m = static_cast<std::ptrdiff_t>(g.grid.lag_steps);
    const auto n = static_cast<std::ptrdiff_t>(g.grid.steps);
    if (s.paths == 1) {
        body << "k,t,x\n";
        const SamplePath path = solve_one(0);
        for (std::ptrdiff_t k = -m; k <= n; ++k)
            body << k << ',' << fmt17(g.grid.time(k)) << ',' << fmt17(path.state(k))
                 << '\n';
    } else {
        body << "path_id,k,t,x\n";
        for_each_path_ordered(
            s.paths, resolve_workers(s.workers), solve_one,
            [&](std::size_t pid, SamplePath&& path) {
                for (std::ptrdiff_t k = -m; k <= n; ++k)
                    body << pid << ',' << k << ',' << fmt17(g.grid.time(k)) << ','
                         << fmt17(path.state(k)) << '\n';
            });
    }
    write_file(s.out, body.str());
}

std::string stats_row(const std::string& method, const SummaryStats& st) {
    std::string row = method;
    row += ',' + fmt17(st.min) + ',' + fmt17(st.mean) + ',' + fmt17(st.sd);
    row += ',' + (st.kurt ? fmt17(*st.kurt) : std::string("NA"));
    row += ',' + (st.skew ? fmt17(*st.skew) : std::string("NA"));
    row += ',' + fmt17(st.max);
    return row;
}

void run_stats(const CommandSpec& s, const std::string& command) {
    const GridBundle g = build_grid(s);
    const ValidatedParams vp = validate_params(make_model(s, g.tau));
    const TruncationPolicy policy = build_policy(s, vp);
    const InitialSegment init = build_init(s, g);
    if (s.paths < 2) throw ConfigError("paths must be >= 2 (key paths)");
    if (s.pool != "terminal" && s.pool != "time")
        throw ConfigError("pool must be 'terminal' or 'time' (key pool)");
    if (s.beta && !(*s.beta > 0.0 && *s.beta < 1.0))
        throw ConfigError("beta must lie in (0, 1) (key beta)");
    const bool pooled = s.pool == "time";

    std::vector<double> tem_samples, bem_samples;
    const std::size_t per_path = pooled ? g.grid.steps + 1 : 1;
    tem_samples.reserve(s.paths * per_path);
    bem_samples.reserve(s.paths * per_path);
    std::optional<LyapunovAccumulator> lyap;
    if (s.beta) lyap.emplace(g.grid, *s.beta);

    struct PathPair {
        SamplePath tem;
        SamplePath bem;
    };
    for_each_path_ordered(
        s.paths, resolve_workers(s.workers),
        [&](std::size_t pid) {
            const IncrementStream noise =
                generate(s.seed, pid, g.grid.delta, g.grid.steps);
            return PathPair{solve_tem(policy, init, g.grid, noise),
                            solve_bem(vp, init, g.grid, noise)};
        },
        [&](std::size_t, PathPair&& pair) {
            const auto n = static_cast<std::ptrdiff_t>(g.grid.steps);
            if (pooled) {
                for (std::ptrdiff_t k = 0; k <= n; ++k) {
                    tem_samples.push_back(pair.tem.state(k));
                    bem_samples.push_back(pair.bem.state(k));
                }
            } else {
                tem_samples.push_back(pair.tem.state(n));
                bem_samples.push_back(pair.bem.state(n));
            }
            if (lyap) lyap->add_path(pair.tem);
        });

    HeaderExtras extras;
    extras.keys = {{"delta", g.delta.text},
                   {"T", g.horizon.text},
                   {"paths", std::to_string(s.paths)},
                   {"pool", s.pool}};
    if (s.beta) extras.keys.push_back({"beta", fmt17(*s.beta)});
    std::ostringstream body;
    write_header(body, command, s, policy, g, {g.delta}, extras);
    body << "method,min,mean,sd,kurt,skew,max\n";
    body << stats_row("tem", summary_stats(tem_samples)) << '\n';
    body << stats_row("bem", summary_stats(bem_samples)) << '\n';
    write_file(s.out, body.str());

    if (lyap) {
        const LyapunovTrace trace = lyap->finalize();
        HeaderExtras lx = extras;
        lx.lines.push_back("lyapunov-excluded-paths: " +
                           std::to_string(trace.paths_excluded));
        std::ostringstream lbody;
        write_header(lbody, command, s, policy, g, {g.delta}, lx);
        lbody << "t,mean_v\n";
        for (std::size_t k = 0; k < trace.times.size(); ++k)
            lbody << fmt17(trace.times[k]) << ',' << fmt17(trace.mean_v[k]) << '\n';
        write_file(s.out + ".lyapunov.csv", lbody.str());
    }
}

void run_converge(const CommandSpec& s) {
    const Decimal tau = Decimal::parse(s.tau);
    const Decimal horizon = Decimal::parse(s.horizon);
    CommandSpec probe = s;  // reuse grid checks per step size below
    if (s.deltas.empty())
        throw ConfigError("a comma-separated step-size list is required (key deltas)");
    std::vector<Decimal> deltas;
    for (const auto& tok : split_commas(s.deltas)) deltas.push_back(Decimal::parse(tok));
    if (s.mode != "pair" && s.mode != "self")
        throw ConfigError("mode must be 'pair' or 'self' (key mode)");
    const bool self_ref = s.mode == "self";
    if (self_ref && s.delta_ref.empty())
        throw ConfigError("self mode needs a reference step (key delta-ref)");
    if (!self_ref && !s.delta_ref.empty())
        throw ConfigError("delta-ref requires --mode self (key delta-ref)");
    std::sort(deltas.begin(), deltas.end(),
              [](const Decimal& a, const Decimal& b) { return a.value > b.value; });
    const Decimal base = self_ref ? Decimal::parse(s.delta_ref) : deltas.back();
    if (!(base.value > 0.0))
        throw ConfigError("step sizes must be positive (key deltas)");
    for (const auto& d : deltas) {
        const auto f = exact_ratio(d, base);
        if (!f || *f < 1) throw ConfigError("step sizes must be nested");
        const auto m = exact_ratio(tau, d);
        if (!m || *m < 1)
            throw ConfigError("tau must be an integer multiple of every step (key tau)");
        const auto n = exact_ratio(horizon, d);
        if (!n || *n < 1)
            throw ConfigError("T must be an integer multiple of every step (key T)");
    }
    if (self_ref) {
        const auto m = exact_ratio(tau, base);
        const auto n = exact_ratio(horizon, base);
        if (!m || *m < 1 || !n || *n < 1)
            throw ConfigError(
                "tau and T must be integer multiples of the reference step "
                "(key delta-ref)");
    }
    if (s.paths < 1) throw ConfigError("paths must be >= 1 (key paths)");
    if (!s.xi_file.empty())
        throw ConfigError(
            "convergence studies support constant initial data only (key xi-file)");
    if (!(s.xi0 > 0.0)) throw ConfigError("xi0 must be positive (key xi0)");

    probe.delta = deltas.front().text;  // validate model against any one grid
    const GridBundle g0 = build_grid(probe);
    const ValidatedParams vp = validate_params(make_model(s, tau));
    const TruncationPolicy policy = build_policy(s, vp);

    ConvergenceConfig cc;
    for (const auto& d : deltas) cc.deltas.push_back(d.value);
    cc.delta_ref = self_ref ? base.value : 0.0;
    cc.horizon = horizon.value;
    cc.tau = tau.value;
    cc.xi0 = s.xi0;
    cc.n_paths = s.paths;
    cc.seed = s.seed;
    cc.mode = self_ref ? ComparisonMode::SelfReference : ComparisonMode::SchemePair;
    cc.workers = resolve_workers(s.workers);
    const ConvergenceResult res = convergence_study(policy, cc);

    HeaderExtras extras;
    extras.keys = {{"deltas", s.deltas}, {"mode", s.mode}};
    if (self_ref) extras.keys.push_back({"delta-ref", base.text});
    extras.keys.push_back({"T", horizon.text});
    extras.keys.push_back({"paths", std::to_string(s.paths)});
    extras.lines.push_back("loglog-slope: " + fmt17(res.slope));
    extras.lines.push_back("loglog-slope-se: " + fmt17(res.slope_se));
    std::ostringstream body;
    GridBundle gh = g0;
    write_header(body, "converge", s, policy, gh, deltas, extras);
    body << "delta,error_median,error_mean,error_p90,n_paths\n";
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto& row = res.rows[i];
        body << deltas[i].text << ',' << fmt17(row.error_median) << ','
             << fmt17(row.error_mean) << ',' << fmt17(row.error_p90) << ','
             << row.n_paths << '\n';
    }
    write_file(s.out, body.str());

    if (s.plot_data) {
        std::ostringstream plot;
        plot << "x,y\n";
        for (const auto& row : res.rows)
            plot << fmt17(row.delta) << ',' << fmt17(row.error_median) << '\n';
        write_file(s.out + ".plot.csv", plot.str());
    }
}

void run_gap(const CommandSpec& s) {
    const GridBundle g = build_grid(s);
    const ValidatedParams vp = validate_params(make_model(s, g.tau));
    const TruncationPolicy policy = build_policy(s, vp);
    const InitialSegment init = build_init(s, g);
    if (s.refine < 2) throw ConfigError("refine must be >= 2 (key refine)");
    if (!(s.p_exp >= 2.0)) throw ConfigError("p-exp must be >= 2 (key p-exp)");
    if (s.paths < 1) throw ConfigError("paths must be >= 1 (key paths)");

    const GapMomentResult res =
        gap_moment(policy, init, g.grid, s.refine, s.p_exp, s.paths, s.seed,
                   resolve_workers(s.workers));

    HeaderExtras extras;
    extras.keys = {{"delta", g.delta.text},
                   {"T", g.horizon.text},
                   {"refine", std::to_string(s.refine)},
                   {"p-exp", fmt17(s.p_exp)},
                   {"paths", std::to_string(s.paths)}};
    std::ostringstream body;
    write_header(body, "gap", s, policy, g, {g.delta}, extras);
    body << "delta,p_exp,refine_factor,gap_moment,points,n_paths\n";
    body << g.delta.text << ',' << fmt17(s.p_exp) << ',' << s.refine << ','
         << fmt17(res.max_moment) << ',' << res.points << ',' << res.n_paths << '\n';
    write_file(s.out, body.str());
}

void run_exit_prob(const CommandSpec& s) {
    const GridBundle g = build_grid(s);
    const ValidatedParams vp = validate_params(make_model(s, g.tau));
    const TruncationPolicy policy = build_policy(s, vp);
    const InitialSegment init = build_init(s, g);
    if (s.paths < 1) throw ConfigError("paths must be >= 1 (key paths)");
    std::vector<double> levels;
    for (const auto& tok : split_commas(s.k_levels)) {
        const Decimal d = Decimal::parse(tok);
        if (!(d.value > 1.0))
            throw ConfigError("every level must exceed 1 (key k-levels)");
        levels.push_back(d.value);
    }
    std::vector<std::size_t> exits(levels.size(), 0);
    for_each_path_ordered(
        s.paths, resolve_workers(s.workers),
        [&](std::size_t pid) {
            const IncrementStream noise =
                generate(s.seed, pid, g.grid.delta, g.grid.steps);
            const SamplePath path = solve_tem(policy, init, g.grid, noise);
            std::vector<bool> flags(levels.size());
            for (std::size_t i = 0; i < levels.size(); ++i)
                flags[i] =
                    first_exit_index(path, 1.0 / levels[i], levels[i]).has_value();
            return flags;
        },
        [&](std::size_t, std::vector<bool>&& flags) {
            for (std::size_t i = 0; i < levels.size(); ++i)
                if (flags[i]) ++exits[i];
        });

    HeaderExtras extras;
    extras.keys = {{"delta", g.delta.text},
                   {"T", g.horizon.text},
                   {"paths", std::to_string(s.paths)},
                   {"k-levels", s.k_levels}};
    std::ostringstream body;
    write_header(body, "exit-prob", s, policy, g, {g.delta}, extras);
    body << "k_level,exit_probability,n_paths\n";
    for (std::size_t i = 0; i < levels.size(); ++i)
        body << fmt17(levels[i]) << ','
             << fmt17(static_cast<double>(exits[i]) / static_cast<double>(s.paths))
             << ',' << s.paths << '\n';
    write_file(s.out, body.str());
}

void run_price(const CommandSpec& s, bool lookback) {
    const GridBundle g = build_grid(s);
    const ValidatedParams vp = validate_params(make_model(s, g.tau));
    const TruncationPolicy policy = build_policy(s, vp);
    const InitialSegment init = build_init(s, g);
    if (s.paths < 2) throw ConfigError("paths must be >= 2 for pricing (key paths)");
    if (lookback && !(s.strike > 0.0))
        throw ConfigError("strike must be positive (key K)");

    std::vector<double> samples;
    samples.reserve(s.paths);
    for_each_path_ordered(
        s.paths, resolve_workers(s.workers),
        [&](std::size_t pid) {
            const IncrementStream noise =
                generate(s.seed, pid, g.grid.delta, g.grid.steps);
            const SamplePath path = solve_tem(policy, init, g.grid, noise);
            return lookback ? lookback_payoff(path, s.strike) : bond_discount(path);
        },
        [&](std::size_t, double value) { samples.push_back(value); });
    const MCEstimate est = mc_estimate(samples);

    HeaderExtras extras;
    extras.keys = {{"delta", g.delta.text},
                   {"T", g.horizon.text},
                   {"paths", std::to_string(s.paths)}};
    if (lookback) extras.keys.push_back({"K", fmt17(s.strike)});
    std::ostringstream body;
    write_header(body, lookback ? "price-lookback" : "price-bond", s, policy, g,
                 {g.delta}, extras);
    body << "estimate,stderr,ci_lo,ci_hi,n,delta,seed\n";
    body << fmt17(est.mean) << ',' << fmt17(est.std_error) << ',' << fmt17(est.ci95_lo)
         << ',' << fmt17(est.ci95_hi) << ',' << est.n << ',' << g.delta.text << ','
         << s.seed << '\n';
    write_file(s.out, body.str());
}

// ------------------------------------------------------------------- CLI assembly

void attach_model_flags(CLI::App* sc, CommandSpec& s) {
    sc->add_option("--alpha", s.alpha, "mean-reversion speed alpha");
    sc->add_option("--mu", s.mu, "mean level mu");
    sc->add_option("--sigma", s.sigma, "diffusion scale sigma");
    sc->add_option("--gamma", s.gamma, "drift exponent gamma (> 1)");
    sc->add_option("--r", s.r, "delayed-state diffusion exponent r");
    sc->add_option("--theta", s.theta, "current-state diffusion exponent theta");
    sc->add_option("--tau", s.tau, "delay tau (exact decimal)");
    sc->add_option("--xi0", s.xi0, "constant initial value on [-tau, 0]");
    sc->add_option("--xi-file", s.xi_file,
                   "initial segment file: M+1 values on the delta grid, one per line");
    sc->add_option("--holder-d", s.holder_d, "Holder constant D of the initial segment");
    sc->add_option("--holder-ell", s.holder_ell,
                   "Holder exponent of the initial segment, in (0, 1]");
    sc->add_option("--psi_scale", s.psi_scale, "step-bound scale psi0 (>= 1)");
    sc->add_option("--psi_exponent", s.psi_exponent, "step-bound exponent q (> 0)");
    sc->add_option("--delta_star", s.delta_star, "maximal admissible step, in (0, 1]");
    sc->add_option("--envelope", s.envelope, "envelope: default | paper_example");
    sc->add_option("--strict_42", s.strict_42,
                   "true = reject non-conforming step bounds, false = warn");
    sc->add_option("--seed", s.seed, "master RNG seed");
    sc->add_option("--workers", s.workers, "worker threads (0 = hardware)");
}

struct Cli {
    CLI::App app{"delayed mean-reverting rate model: truncated explicit scheme, "
                 "drift-implicit comparator, convergence diagnostics, Monte Carlo "
                 "pricing"};
    std::vector<std::unique_ptr<CommandSpec>> specs;

    CommandSpec& new_spec() {
        specs.push_back(std::make_unique<CommandSpec>());
        return *specs.back();
    }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    try {
        // Merge a config file (key = value) under the command-line flags: keys present
        // in the file but not on the command line are appended as flags.
        std::vector<std::string> tokens;
        std::string config_path;
        for (int i = 1; i < argc; ++i) {
            const std::string t = argv[i];
            if (t == "--config") {
                if (i + 1 >= argc) throw ConfigError("--config needs a file path");
                config_path = argv[++i];
            } else if (t.rfind("--config=", 0) == 0) {
                config_path = t.substr(9);
            } else {
                tokens.push_back(t);
            }
        }
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file: " + config_path);
            const auto kv = parse_key_values(in);
            auto present = [&tokens](const std::string& flag) {
                for (const auto& t : tokens)
                    if (t == flag || t.rfind(flag + "=", 0) == 0) return true;
                return false;
            };
            for (const auto& [key, value] : kv) {
                const std::string flag = "--" + key;
                if (present(flag)) continue;
                if (key == "plot-data") {  // presence-style flag
                    if (value == "true" || value == "1") tokens.push_back(flag);
                    continue;
                }
                tokens.push_back(flag);
                tokens.push_back(value);
            }
        }

        Cli cli;
        cli.app.require_subcommand(1);

        auto* sim = cli.app.add_subcommand("simulate", "solve sample paths to CSV");
        CommandSpec& ssim = cli.new_spec();
        attach_model_flags(sim, ssim);
        sim->add_option("--scheme", ssim.scheme, "tem | bem");
        sim->add_option("--delta", ssim.delta, "step size (exact decimal)");
        sim->add_option("--T", ssim.horizon, "horizon (exact decimal)");
        sim->add_option("--paths", ssim.paths, "ensemble size");
        ssim.out = "simulate.csv";
        sim->add_option("--out", ssim.out, "output CSV path");
        sim->callback([&ssim] { run_simulate(ssim); });

        auto add_stats_like = [&](const std::string& name, const std::string& help,
                                  bool example) -> CLI::App* {
            auto* sc = cli.app.add_subcommand(name, help);
            CommandSpec& s = cli.new_spec();
            if (example) {
                s.envelope = "paper_example";
                s.psi_scale = 1.0;
                s.psi_exponent = 2.0 / 3.0;
                s.delta_star = 1.0;
            }
            s.paths = 10000;
            attach_model_flags(sc, s);
            sc->add_option("--delta", s.delta, "step size (exact decimal)");
            sc->add_option("--T", s.horizon, "horizon (exact decimal)");
            sc->add_option("--paths", s.paths, "ensemble size");
            sc->add_option("--pool", s.pool,
                           "sample population: terminal | time (all grid values)");
            sc->add_option("--beta", s.beta,
                           "also write a Lyapunov mean trace to <out>.lyapunov.csv");
            s.out = name + ".csv";
            sc->add_option("--out", s.out, "output CSV path");
            const std::string cname = name;
            CommandSpec* sp = &s;
            sc->callback([sp, cname] { run_stats(*sp, cname); });
            return sc;
        };
        add_stats_like("stats",
                       "distribution summary of both schemes on shared noise", false);
        add_stats_like("example-5-3",
                       "bundled worked-example configuration (quadratic envelope "
                       "override, psi = delta^-2/3, xi = 0.2)",
                       true);

        auto* con = cli.app.add_subcommand(
            "converge", "sup-error convergence study on shared coarsened noise");
        CommandSpec& scon = cli.new_spec();
        scon.paths = 500;
        attach_model_flags(con, scon);
        con->add_option("--deltas", scon.deltas, "comma-separated step sizes");
        con->add_option("--delta-ref", scon.delta_ref,
                        "reference step for self mode (exact decimal)");
        con->add_option("--mode", scon.mode, "pair (tem vs bem) | self (tem vs tem ref)");
        con->add_option("--T", scon.horizon, "horizon (exact decimal)");
        con->add_option("--paths", scon.paths, "ensemble size");
        con->add_flag("--plot-data", scon.plot_data,
                      "also write (x, y) pairs to <out>.plot.csv");
        scon.out = "converge.csv";
        con->add_option("--out", scon.out, "output CSV path");
        con->callback([&scon] { run_converge(scon); });

        auto* gap = cli.app.add_subcommand(
            "gap", "interpolation-gap moment between the continuous and step readouts");
        CommandSpec& sgap = cli.new_spec();
        sgap.paths = 2000;
        attach_model_flags(gap, sgap);
        gap->add_option("--delta", sgap.delta, "step size (exact decimal)");
        gap->add_option("--T", sgap.horizon, "horizon (exact decimal)");
        gap->add_option("--refine", sgap.refine, "refinement factor (>= 2)");
        gap->add_option("--p-exp", sgap.p_exp, "moment exponent p (>= 2)");
        gap->add_option("--paths", sgap.paths, "ensemble size");
        sgap.out = "gap.csv";
        gap->add_option("--out", sgap.out, "output CSV path");
        gap->callback([&sgap] { run_gap(sgap); });

        auto* exi = cli.app.add_subcommand(
            "exit-prob", "fraction of paths leaving [1/k, k] before the horizon");
        CommandSpec& sexi = cli.new_spec();
        sexi.paths = 10000;
        attach_model_flags(exi, sexi);
        exi->add_option("--delta", sexi.delta, "step size (exact decimal)");
        exi->add_option("--T", sexi.horizon, "horizon (exact decimal)");
        exi->add_option("--paths", sexi.paths, "ensemble size");
        exi->add_option("--k-levels", sexi.k_levels, "comma-separated levels k > 1");
        sexi.out = "exit-prob.csv";
        exi->add_option("--out", sexi.out, "output CSV path");
        exi->callback([&sexi] { run_exit_prob(sexi); });

        auto* pb = cli.app.add_subcommand(
            "price-bond", "Monte Carlo zero-coupon bond value with 95% CI");
        CommandSpec& spb = cli.new_spec();
        spb.paths = 10000;
        attach_model_flags(pb, spb);
        pb->add_option("--delta", spb.delta, "step size (exact decimal)");
        pb->add_option("--T", spb.horizon, "maturity (exact decimal)");
        pb->add_option("--paths", spb.paths, "ensemble size");
        spb.out = "price-bond.csv";
        pb->add_option("--out", spb.out, "output CSV path");
        pb->callback([&spb] { run_price(spb, false); });

        auto* pl = cli.app.add_subcommand(
            "price-lookback", "Monte Carlo fixed-strike lookback put with 95% CI");
        CommandSpec& spl = cli.new_spec();
        spl.paths = 10000;
        attach_model_flags(pl, spl);
        pl->add_option("--K", spl.strike, "strike");
        pl->add_option("--delta", spl.delta, "step size (exact decimal)");
        pl->add_option("--T", spl.horizon, "horizon (exact decimal)");
        pl->add_option("--paths", spl.paths, "ensemble size");
        spl.out = "price-lookback.csv";
        pl->add_option("--out", spl.out, "output CSV path");
        pl->callback([&spl] { run_price(spl, true); });

        std::vector<const char*> ptrs;
        ptrs.push_back(argc > 0 ? argv[0] : "sddetem");
        for (const auto& t : tokens) ptrs.push_back(t.c_str());
        try {
            cli.app.parse(static_cast<int>(ptrs.size()), ptrs.data());
        } catch (const CLI::CallForHelp&) {
            out << cli.app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out << cli.app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << "\n";
            return 1;
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const AssumptionViolation& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const PolicyViolation& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ImplicitStepFailure& e) {
        err << "numerical failure: " << e.what();
        if (e.step_index() >= 0) err << " [step " << e.step_index() << "]";
        err << "\n";
        return 2;
    } catch (const SolverFailure& e) {
        err << "numerical failure: " << e.what();
        if (e.step_index() >= 0) err << " [step " << e.step_index() << "]";
        err << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace sddetem
