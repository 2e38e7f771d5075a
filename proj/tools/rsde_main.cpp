// rsde: simulate rough-SDE drivers, verify moment/characteristic-function
// bounds, and run weak-convergence studies. Every run writes a manifest that
// re-executes bit-for-bit via `rsde rerun`.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rsde/driver.hpp"
#include "rsde/errors.hpp"
#include "rsde/fbm.hpp"
#include "rsde/io.hpp"
#include "rsde/kernels.hpp"
#include "rsde/manifest.hpp"
#include "rsde/momentlab.hpp"
#include "rsde/noise.hpp"
#include "rsde/parallel.hpp"
#include "rsde/philox.hpp"
#include "rsde/solver.hpp"
#include "rsde/stats.hpp"

using nlohmann::json;

namespace rsde::cli {

constexpr int EXIT_OK = 0;
constexpr int EXIT_INTERNAL = 1;
constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_VIOLATION = 3;

struct GlobalOpts {
    unsigned threads = thread_count();
    std::string kernel = "auto";
    std::string out_root = "out";
};

NoiseLaw law_from_string(const std::string& name, const std::string& atoms) {
    if (name == "rademacher")
        return NoiseLaw::rademacher();
    if (name == "uniform" || name == "scaled_uniform")
        return NoiseLaw::scaled_uniform();
    if (name == "asymmetric") // two-point law with mean 0, variance 1, k_eta = 2
        return NoiseLaw::custom_discrete({{-2.0, 0.2}, {0.5, 0.8}});
    if (name == "custom") {
        std::vector<std::pair<double, double>> parsed;
        std::string tok;
        std::stringstream ss(atoms);
        while (std::getline(ss, tok, ',')) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw domain_error("law atoms must look like v:p,v:p");
            parsed.emplace_back(std::stod(tok.substr(0, colon)),
                                std::stod(tok.substr(colon + 1)));
        }
        return NoiseLaw::custom_discrete(std::move(parsed));
    }
    throw domain_error("unknown law '" + name +
                       "' (rademacher|uniform|asymmetric|custom)");
}

HurstParam hurst_from(double H, bool classical) {
    if (classical) {
        if (H != 0.5)
            throw domain_error("--classical fixes H = 1/2; drop --H or set it to 0.5");
        return HurstParam::classical_brownian();
    }
    return HurstParam::rough(H); // throws with the (1/3, 1/2) message
}

std::string open_run_dir(const GlobalOpts& g, const ExperimentManifest& m) {
    const std::string dir = g.out_root + "/" + m.run_id().substr(0, 12);
    ensure_dir(dir);
    return dir;
}

// ---------------------------------------------------------------- simulate --

struct SimulateCfg {
    std::string kind = "donsker";
    double H = 0.4;
    bool classical = false;
    double eps = 0.1;
    std::size_t grid = 1024;
    std::size_t samples = 1;
    int dims = 1;
    std::uint64_t seed = 1;
    double horizon = 1.0;
    std::string law = "rademacher";
    std::string law_atoms;

    json to_json() const {
        return json{{"kind", kind},     {"H", H},           {"classical", classical},
                    {"eps", eps},       {"grid", grid},     {"samples", samples},
                    {"dims", dims},     {"seed", seed},     {"horizon", horizon},
                    {"law", law},       {"law_atoms", law_atoms}};
    }
    static SimulateCfg from_json(const json& j) {
        SimulateCfg c;
        c.kind = j.at("kind");
        c.H = j.at("H");
        c.classical = j.at("classical");
        c.eps = j.at("eps");
        c.grid = j.at("grid");
        c.samples = j.at("samples");
        c.dims = j.at("dims");
        c.seed = j.at("seed");
        c.horizon = j.at("horizon");
        c.law = j.at("law");
        c.law_atoms = j.at("law_atoms");
        return c;
    }
};

int run_simulate(const SimulateCfg& cfg, const GlobalOpts& g) {
    const HurstParam h = hurst_from(cfg.H, cfg.classical);
    if (cfg.kind != "donsker" && cfg.kind != "fbm")
        throw domain_error("--kind must be donsker or fbm");
    const auto times = uniform_grid(cfg.grid, cfg.horizon);

    ExperimentManifest man;
    man.subcommand = "simulate";
    man.config = cfg.to_json();
    man.kernel_backend = kernels::backend_name();
    man.threads = g.threads;
    man.started_at = iso_timestamp_now();
    const std::string dir = open_run_dir(g, man);

    for (std::size_t s = 0; s < cfg.samples; ++s) {
        const std::string name = "trajectory_" + std::to_string(s) + ".csv";
        const std::string path = dir + "/" + name;
        if (!file_exists(path)) {
            std::vector<double> values;
            if (cfg.kind == "donsker") {
                const NoiseLaw law = law_from_string(cfg.law, cfg.law_atoms);
                const RandomWalkNoise noise(cfg.eps, law, cfg.dims, cfg.seed, cfg.horizon,
                                            static_cast<std::uint32_t>(s));
                const DriverPath dp(noise, h);
                values.resize(times.size() * cfg.dims);
                for (std::size_t m = 0; m < times.size(); ++m)
                    dp.eval_all(times[m], values.data() + m * cfg.dims);
            } else {
                values = simulate_fbm(h, times, cfg.dims, cfg.seed,
                                      static_cast<std::uint32_t>(s))
                             .values;
            }
            write_trajectory_csv(path, times, values, cfg.dims);
        }
        man.add_output(dir, name);
    }
    man.finished_at = iso_timestamp_now();
    man.save(dir);
    std::printf("simulate: wrote %zu trajectories to %s\n", cfg.samples, dir.c_str());
    return EXIT_OK;
}

// ------------------------------------------------------------------ verify --

struct VerifyCfg {
    double H = 0.4;
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    std::size_t n_samples = 1000000;
    std::string laws = "rademacher,asymmetric";
    int m_even_max = 3;
    int m_odd_max = 2;
    std::vector<double> u_list{0.5, 1.0, 2.0};
    int fib_max = 30;
    int chen_triples = 25;
    std::uint64_t seed = 20240801;

    json to_json() const {
        return json{{"H", H},
                    {"eps_list", eps_list},
                    {"n_samples", n_samples},
                    {"laws", laws},
                    {"m_even_max", m_even_max},
                    {"m_odd_max", m_odd_max},
                    {"u_list", u_list},
                    {"fib_max", fib_max},
                    {"chen_triples", chen_triples},
                    {"seed", seed}};
    }
    static VerifyCfg from_json(const json& j) {
        VerifyCfg c;
        c.H = j.at("H");
        c.eps_list = j.at("eps_list").get<std::vector<double>>();
        c.n_samples = j.at("n_samples");
        c.laws = j.at("laws");
        c.m_even_max = j.at("m_even_max");
        c.m_odd_max = j.at("m_odd_max");
        c.u_list = j.at("u_list").get<std::vector<double>>();
        c.fib_max = j.at("fib_max");
        c.chen_triples = j.at("chen_triples");
        c.seed = j.at("seed");
        return c;
    }
};

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(tok);
    return out;
}

int run_verify(const VerifyCfg& cfg, const GlobalOpts& g) {
    const HurstParam h = HurstParam::rough(cfg.H);
    ExperimentManifest man;
    man.subcommand = "verify";
    man.config = cfg.to_json();
    man.kernel_backend = kernels::backend_name();
    man.threads = g.threads;
    man.started_at = iso_timestamp_now();
    const std::string dir = open_run_dir(g, man);

    json moment_reports = json::array();
    std::size_t violated = 0, respected = 0, inconclusive = 0;
    std::vector<std::string> inconclusive_list;

    auto tally = [&](const MomentReport& rep) {
        moment_reports.push_back(rep.to_json());
        switch (rep.verdict) {
        case Verdict::violated: ++violated; break;
        case Verdict::respected: ++respected; break;
        case Verdict::inconclusive:
            ++inconclusive;
            inconclusive_list.push_back(rep.check + "/" + rep.fname + "/" + rep.law +
                                        "/eps=" + format_double(rep.epsilon));
            break;
        }
    };

    const auto& corpus = builtin_corpus();
    for (const auto& law_name : split_csv(cfg.laws)) {
        const NoiseLaw law = law_from_string(law_name, "");
        for (double eps : cfg.eps_list) {
            const RandomWalkNoise noise(eps, law, 1, cfg.seed);
            McMomentConfig mc;
            mc.u_values = cfg.u_list;
            const auto stats = mc_moments(corpus, noise, cfg.n_samples, mc);
            for (std::size_t fi = 0; fi < corpus.size(); ++fi) {
                const auto& f = corpus[fi];
                tally(check_J1(f, noise));
                for (int m = 1; m <= cfg.m_even_max; ++m)
                    tally(check_even_moment(f, noise, m, stats[fi]));
                for (int m = 1; m <= cfg.m_odd_max; ++m)
                    tally(check_odd_moment(f, noise, m, stats[fi]));
                for (int m = 2; m <= cfg.m_even_max; ++m)
                    tally(check_Jm(f, noise, m, stats[fi]));
                for (double u : cfg.u_list)
                    tally(charfn_gap(f, noise, u, stats[fi]));
            }
        }
    }

    // Chen relation and diagonal convention on random triples.
    json chen_rows = json::array();
    std::size_t chen_failures = 0;
    const double eps_pool[3] = {0.3, 0.2, 0.1};
    for (int c = 0; c < cfg.chen_triples; ++c) {
        const auto blk =
            rng_block(cfg.seed, RngStream::test, 0, 1, static_cast<std::uint32_t>(c));
        const double eps = eps_pool[blk[0] % 3];
        const double Hc = 0.35 + 0.1 * u01(blk[1], blk[2]);
        double pts[3] = {u01(blk[2], blk[3]), u01(blk[3], blk[0]), u01(blk[0], blk[1])};
        std::sort(pts, pts + 3);
        const RandomWalkNoise noise(eps, NoiseLaw::rademacher(), 2, cfg.seed + c);
        const DriverPath dp(noise, HurstParam::rough(Hc));
        const auto def = dp.chen_defect(pts[0], pts[1], pts[2]);
        const double allowance = std::max(2.0 * def.quad_err_sum, 1e-12);
        const bool chen_ok = def.max_norm() <= std::max(allowance, 1e-8);

        QuadratureSpec quad;
        quad.enforce_tol = false;
        const auto a = dp.levy_area(pts[0], pts[2], quad);
        double diag_err = 0.0;
        for (int i = 1; i <= 2; ++i) {
            const double dx = dp.eval(i, pts[2]) - dp.eval(i, pts[0]);
            diag_err = std::max(diag_err, std::abs(a.entry(i, i) - 0.5 * dx * dx));
        }
        const bool diag_ok = diag_err <= 1e-8;
        if (!chen_ok || !diag_ok)
            ++chen_failures;
        chen_rows.push_back(json{{"eps", eps},
                                 {"H", Hc},
                                 {"s", pts[0]},
                                 {"u", pts[1]},
                                 {"t", pts[2]},
                                 {"defect_max", def.max_norm()},
                                 {"allowance", allowance},
                                 {"diag_err", diag_err},
                                 {"pass", chen_ok && diag_ok}});
    }

    json fib_rows = json::array();
    std::size_t fib_failures = 0;
    for (int n = 2; n <= cfg.fib_max; ++n) {
        const auto dc = decomposition_count(n);
        if (!dc.agree())
            ++fib_failures;
        fib_rows.push_back(json{{"n", n},
                                {"enumeration", dc.enumeration ? json(*dc.enumeration) : json()},
                                {"recurrence", dc.recurrence},
                                {"closed_form", dc.closed_form},
                                {"agree", dc.agree()}});
    }

    json report;
    report["schema_version"] = 1;
    report["config"] = cfg.to_json();
    report["moment_reports"] = moment_reports;
    report["chen"] = chen_rows;
    report["decomposition"] = fib_rows;
    report["summary"] = json{{"violated", violated},
                             {"respected", respected},
                             {"inconclusive", inconclusive},
                             {"inconclusive_list", inconclusive_list},
                             {"chen_failures", chen_failures},
                             {"fib_failures", fib_failures}};
    write_text_file(dir + "/verdicts.json", report.dump(2) + "\n");
    man.add_output(dir, "verdicts.json");
    man.finished_at = iso_timestamp_now();
    man.save(dir);

    std::printf("verify: %zu respected, %zu inconclusive, %zu violated; "
                "chen failures %zu, fib failures %zu\n",
                respected, inconclusive, violated, chen_failures, fib_failures);
    std::printf("verify: report in %s/verdicts.json\n", dir.c_str());
    return (violated + chen_failures + fib_failures) == 0 ? EXIT_OK : EXIT_VIOLATION;
}

// ---------------------------------------------------------------- converge --

struct ConvergeCfg {
    std::string preset = "scalar-linear";
    double H = 0.4;
    std::vector<double> eps_grid{0.3, 0.2, 0.1, 0.05};
    std::size_t samples = 10000;
    int replicates = 5;
    std::vector<double> times{1.0};
    std::uint64_t seed = 11;
    std::size_t fine_steps = 4096;
    std::size_t stride = 8;
    int substeps = 2;
    int perms = 0;
    std::string law = "rademacher";

    json to_json() const {
        return json{{"preset", preset},       {"H", H},
                    {"eps_grid", eps_grid},   {"samples", samples},
                    {"replicates", replicates}, {"times", times},
                    {"seed", seed},           {"fine_steps", fine_steps},
                    {"stride", stride},       {"substeps", substeps},
                    {"perms", perms},         {"law", law}};
    }
    static ConvergeCfg from_json(const json& j) {
        ConvergeCfg c;
        c.preset = j.at("preset");
        c.H = j.at("H");
        c.eps_grid = j.at("eps_grid").get<std::vector<double>>();
        c.samples = j.at("samples");
        c.replicates = j.at("replicates");
        c.times = j.at("times").get<std::vector<double>>();
        c.seed = j.at("seed");
        c.fine_steps = j.at("fine_steps");
        c.stride = j.at("stride");
        c.substeps = j.at("substeps");
        c.perms = j.at("perms");
        c.law = j.at("law");
        return c;
    }
};

VectorFieldSpec preset_field(const std::string& name) {
    if (name == "scalar-linear")
        return vf_scalar_linear();
    if (name == "noncommuting-2d")
        return vf_noncommuting_2d();
    if (name == "sigma-zero")
        return vf_zero_sigma_exp_drift();
    throw domain_error("unknown preset '" + name +
                       "' (scalar-linear|noncommuting-2d|sigma-zero)");
}

int run_converge(const ConvergeCfg& cfg, const GlobalOpts& g) {
    const HurstParam h = HurstParam::rough(cfg.H);
    const VectorFieldSpec vf = preset_field(cfg.preset);

    ExperimentManifest man;
    man.subcommand = "converge";
    man.config = cfg.to_json();
    man.kernel_backend = kernels::backend_name();
    man.threads = g.threads;
    man.started_at = iso_timestamp_now();
    const std::string dir = open_run_dir(g, man);

    SolutionStudyConfig sc;
    sc.eps_grid = cfg.eps_grid;
    sc.n_samples = cfg.samples;
    sc.times = cfg.times;
    sc.master_seed = cfg.seed;
    sc.law = law_from_string(cfg.law, "");
    sc.limit.fine_steps = cfg.fine_steps;
    sc.limit.stride = cfg.stride;
    sc.substeps_per_block = cfg.substeps;
    sc.n_permutations = cfg.perms;
    sc.lognormal_marginal = (cfg.preset == "scalar-linear");

    // Per-replicate cell files make interrupted runs resumable: a finished
    // replicate is never recomputed, and the assembled outputs are identical.
    ConvergenceStudy study;
    study.manifest_fragment = cfg.to_json();
    for (int rep = 0; rep < cfg.replicates; ++rep) {
        const std::string cell_name = "cells_rep" + std::to_string(rep) + ".json";
        const std::string cell_path = dir + "/" + cell_name;
        json cells;
        if (file_exists(cell_path)) {
            std::ifstream in(cell_path);
            in >> cells;
        } else {
            SolutionStudyConfig one = sc;
            one.n_replicates = 1;
            one.first_replicate = rep;
            const auto part = solution_law_test(vf, h, one);
            cells = json::array();
            for (const auto& c : part.cells)
                cells.push_back(json{{"eps", c.eps},
                                     {"statistic", c.statistic},
                                     {"value", c.value},
                                     {"p", c.p},
                                     {"seed", c.seed},
                                     {"replicate", c.replicate}});
            write_text_file(cell_path, cells.dump(2) + "\n");
            std::printf("converge: replicate %d done\n", rep);
        }
        for (const auto& c : cells) {
            StudyCell cell;
            cell.eps = c.at("eps");
            cell.statistic = c.at("statistic");
            cell.value = c.at("value");
            cell.p = c.at("p");
            cell.seed = c.at("seed");
            cell.replicate = c.at("replicate");
            study.cells.push_back(cell);
        }
        man.add_output(dir, cell_name);
    }

    write_study_csv(dir + "/study.csv", study);

    json summary = study.to_json();
    json trends = json::object();
    for (const std::string stat : {"energy", "ks_lognormal"}) {
        if (study.replicate_count(stat) > 0)
            trends[stat] = json{{"replicates", study.replicate_count(stat)},
                                {"decreasing", study.replicates_decreasing(stat)}};
    }
    summary["trends"] = trends;
    write_text_file(dir + "/study.json", summary.dump(2) + "\n");

    // per-eps series, ready for external plotting
    json plot = json::object();
    plot["schema_version"] = 1;
    json series = json::array();
    for (const std::string stat : {"energy", "ks_lognormal"}) {
        if (study.replicate_count(stat) == 0)
            continue;
        for (double eps : cfg.eps_grid) {
            std::vector<double> vals;
            for (const auto& c : study.cells)
                if (c.statistic == stat && c.eps == eps)
                    vals.push_back(c.value);
            double mean = 0.0;
            for (double v : vals)
                mean += v;
            if (!vals.empty())
                mean /= static_cast<double>(vals.size());
            series.push_back(json{{"statistic", stat}, {"eps", eps}, {"mean", mean},
                                  {"values", vals}});
        }
    }
    plot["series"] = series;
    write_text_file(dir + "/plotdata.json", plot.dump(2) + "\n");

    man.add_output(dir, "study.csv");
    man.add_output(dir, "study.json");
    man.add_output(dir, "plotdata.json");
    man.finished_at = iso_timestamp_now();
    man.save(dir);
    std::printf("converge: study written to %s\n", dir.c_str());
    return EXIT_OK;
}

// ------------------------------------------------------------------- rerun --

int run_rerun(const std::string& manifest_path, const GlobalOpts& g) {
    const auto man = ExperimentManifest::load(manifest_path);
    if (man.subcommand == "simulate")
        return run_simulate(SimulateCfg::from_json(man.config), g);
    if (man.subcommand == "verify")
        return run_verify(VerifyCfg::from_json(man.config), g);
    if (man.subcommand == "converge")
        return run_converge(ConvergeCfg::from_json(man.config), g);
    throw domain_error("manifest has unknown subcommand '" + man.subcommand + "'");
}

} // namespace rsde::cli

int main(int argc, char** argv) {
    using namespace rsde;
    using namespace rsde::cli;

    CLI::App app{"rough-SDE Donsker approximation lab"};
    app.fallthrough(); // global flags may follow the subcommand
    app.set_config("--config", "", "INI config file with [simulate]/[verify]/[converge] sections");

    GlobalOpts g;
    app.add_option("--threads", g.threads, "worker thread cap (results do not depend on it)");
    app.add_option("--kernel", g.kernel, "kernel backend: auto|scalar|avx2");
    app.add_option("--out", g.out_root, "output root directory");

    SimulateCfg sim;
    auto* cmd_sim = app.add_subcommand("simulate", "write driver or fBm trajectories");
    cmd_sim->add_option("--kind", sim.kind, "donsker|fbm");
    cmd_sim->add_option("--H", sim.H, "Hurst parameter in (1/3, 1/2)");
    cmd_sim->add_flag("--classical", sim.classical, "H = 1/2 Brownian sanity mode");
    cmd_sim->add_option("--eps", sim.eps, "approximation scale");
    cmd_sim->add_option("--grid", sim.grid, "output grid resolution");
    cmd_sim->add_option("--samples", sim.samples, "number of trajectories");
    cmd_sim->add_option("--dims", sim.dims, "number of components");
    cmd_sim->add_option("--seed", sim.seed, "master seed");
    cmd_sim->add_option("--T", sim.horizon, "time horizon");
    cmd_sim->add_option("--law", sim.law, "rademacher|uniform|asymmetric|custom");
    cmd_sim->add_option("--law-atoms", sim.law_atoms, "custom law atoms v:p,v:p");

    VerifyCfg ver;
    auto* cmd_ver = app.add_subcommand("verify", "run the bound verification suites");
    cmd_ver->add_option("--H", ver.H, "Hurst parameter");
    cmd_ver->add_option("--eps-list", ver.eps_list, "epsilon grid");
    cmd_ver->add_option("--n-samples", ver.n_samples, "Monte Carlo samples per ensemble");
    cmd_ver->add_option("--laws", ver.laws, "comma-separated law names");
    cmd_ver->add_option("--m-even-max", ver.m_even_max, "largest m for even moments");
    cmd_ver->add_option("--m-odd-max", ver.m_odd_max, "largest m for odd moments");
    cmd_ver->add_option("--u-list", ver.u_list, "u values for the characteristic function");
    cmd_ver->add_option("--fib-max", ver.fib_max, "largest n for decomposition counts");
    cmd_ver->add_option("--chen-triples", ver.chen_triples, "random Chen triples");
    cmd_ver->add_option("--seed", ver.seed, "master seed");

    ConvergeCfg con;
    auto* cmd_con = app.add_subcommand("converge", "epsilon-sweep weak convergence study");
    cmd_con->add_option("--preset", con.preset, "scalar-linear|noncommuting-2d|sigma-zero");
    cmd_con->add_option("--H", con.H, "Hurst parameter");
    cmd_con->add_option("--eps-grid", con.eps_grid, "epsilon grid, descending");
    cmd_con->add_option("--samples", con.samples, "samples per cell");
    cmd_con->add_option("--replicates", con.replicates, "seed replicates");
    cmd_con->add_option("--times", con.times, "observation times");
    cmd_con->add_option("--seed", con.seed, "master seed");
    cmd_con->add_option("--fine-steps", con.fine_steps, "fine fBm grid for the reference");
    cmd_con->add_option("--stride", con.stride, "coarsening stride for the rough solver");
    cmd_con->add_option("--substeps", con.substeps, "ODE sub-steps per block");
    cmd_con->add_option("--perms", con.perms, "permutation count for p-values");
    cmd_con->add_option("--law", con.law, "noise law");

    std::string manifest_path;
    auto* cmd_rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
    cmd_rerun->add_option("manifest", manifest_path, "path to manifest.json")->required();

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) // --help
            return app.exit(e);
        app.exit(e);
        return EXIT_CONFIG;
    }

    try {
        set_thread_count(g.threads);
        kernels::force(kernels::backend_from_name(g.kernel));
        if (cmd_sim->parsed())
            return run_simulate(sim, g);
        if (cmd_ver->parsed())
            return run_verify(ver, g);
        if (cmd_con->parsed())
            return run_converge(con, g);
        if (cmd_rerun->parsed())
            return run_rerun(manifest_path, g);
        return EXIT_CONFIG;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return EXIT_CONFIG;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return EXIT_INTERNAL;
    }
}
