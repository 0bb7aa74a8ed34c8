/// mpccert: stability certificates for MPC without terminal conditions.
///
///   mpccert constants --config cfg.json      gamma_k tables per sigma path
///   mpccert bounds --gamma-bar 2 --eps-o 0.5  analytic bounds for constant gamma
///   mpccert certify --config cfg.json        analytic and LP certificates
///   mpccert sweep --config cfg.json --q 1e-3,1e-2
///   mpccert simulate --config cfg.json       closed loop with diagnostics

#include "mpccert/certificates.hpp"
#include "mpccert/config.hpp"
#include "mpccert/io.hpp"
#include "mpccert/pipeline.hpp"
#include "mpccert/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <limits>

namespace {

using namespace mpccert;

struct Common {
    std::string config;
    std::string out;
    std::string prefix;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string lp_dump;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config, "Scenario JSON file")
        ->required()
        ->envname("MPCCERT_CONFIG")
        ->check(CLI::ExistingFile);
    app->add_option("-o,--out", c.out, "Output directory (overrides output.dir)")->envname("MPCCERT_OUT");
    app->add_option("--prefix", c.prefix, "Output file prefix (overrides output.prefix)");
    app->add_option("--seed", c.seed, "Seed for sampled checks")->envname("MPCCERT_SEED");
    app->add_option("-j,--threads", c.threads, "Worker threads")->envname("MPCCERT_THREADS")->check(CLI::PositiveNumber);
}

ScenarioConfig load(const Common& c, CLI::App* app) {
    ScenarioConfig cfg = load_config(c.config);
    if (!c.out.empty()) cfg.output.dir = c.out;
    if (!c.prefix.empty()) cfg.output.prefix = c.prefix;
    if (app->count("--seed") > 0 || std::getenv("MPCCERT_SEED")) cfg.seed = c.seed;
    if (c.threads > 0) cfg.threads = c.threads;
    return cfg;
}

std::string path_in(const ScenarioConfig& cfg, const std::string& name) { return cfg.output.dir + "/" + name; }

int run_certify(const ScenarioConfig& cfg, const std::string& lp_dump) {
    RunOptions ro;
    ro.threads = cfg.threads;
    ro.lp_dump_dir = lp_dump;
    const CertificationReport rep = run_certification(cfg, ro);
    const int rc = emit_reports(rep, cfg.output.dir, cfg.output.prefix);
    std::size_t failed = 0;
    for (const auto& r : rep.rows) failed += r.ok ? 0 : 1;
    std::printf("%s: %zu rows, %zu failed -> %s\n", cfg.name.c_str(), rep.rows.size(), failed,
                path_in(cfg, cfg.output.prefix + ".csv").c_str());
    return rc;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t end = std::min(s.find(',', pos), s.size());
        const std::string tok = s.substr(pos, end - pos);
        if (!tok.empty()) {
            if constexpr (std::is_same_v<T, int>)
                out.push_back(std::stoi(tok));
            else
                out.push_back(std::stod(tok));
        }
        pos = end + 1;
    }
    return out;
}

void print_bound(const char* name, double alpha, double n_min) {
    std::printf("%-6s alpha=%-14s n_min=%s\n", name, format_double(alpha).c_str(), format_double(n_min).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability certificates for MPC without terminal conditions"};
    app.require_subcommand(1);

    Common cc, ce, cs;
    auto* constants = app.add_subcommand("constants", "Estimate gamma_k (and gamma_kf) for each sigma path");
    add_common(constants, cc);

    auto* certify = app.add_subcommand("certify", "Analytic and LP certificates for the configured sweep");
    add_common(certify, ce);
    certify->add_option("--lp-dump", ce.lp_dump, "Directory for one LP file per LP row")->envname("MPCCERT_LP_DUMP");

    Common cw;
    std::string sq, sr, sN;
    auto* sweep = app.add_subcommand("sweep", "certify with the sweep lists given on the command line");
    add_common(sweep, cw);
    sweep->add_option("--lp-dump", cw.lp_dump, "Directory for one LP file per LP row")->envname("MPCCERT_LP_DUMP");
    sweep->add_option("--q", sq, "Comma-separated q values");
    sweep->add_option("--r", sr, "Comma-separated r values");
    sweep->add_option("--N", sN, "Comma-separated horizons");

    auto* simulate = app.add_subcommand("simulate", "Closed loop with Lyapunov and limit-cycle diagnostics");
    add_common(simulate, cs);

    double gbar = 0.0, eps_o = 1.0, gbar_f = -1.0, eps_f = std::numeric_limits<double>::infinity();
    int N = 5, K = 0;
    std::string sigma = "l";
    auto* bounds = app.add_subcommand("bounds", "All bounds for constant gamma_k = gamma_bar");
    bounds->add_option("--gamma-bar", gbar, "gamma_bar")->required()->check(CLI::NonNegativeNumber);
    bounds->add_option("--eps-o", eps_o, "eps_o (sigma = W)")->check(CLI::Range(0.0, 1.0));
    bounds->add_option("--gamma-f-bar", gbar_f, "gamma_f_bar; enables the terminal variants");
    bounds->add_option("--eps-f", eps_f, "eps_f of the terminal cost");
    bounds->add_option("-N,--horizon", N, "Horizon")->check(CLI::PositiveNumber);
    bounds->add_option("-K", K, "Length of the gamma sequence (default: max(N, 64))");
    bounds->add_option("--sigma", sigma, "l or W")->check(CLI::IsMember({"l", "W"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*constants) {
            const ScenarioConfig cfg = load(cc, constants);
            nlohmann::json meta;
            const auto tables = estimate_constants(cfg, &meta);
            for (const auto& t : tables) {
                const std::string file = path_in(cfg, cfg.output.prefix + "_" + t.suffix + ".csv");
                write_gamma_csv(file, t.gamma, t.mode, t.sampled);
                std::printf("%s: K=%zu -> %s\n", t.suffix.c_str(), t.gamma.size(), file.c_str());
            }
            write_file_atomic(path_in(cfg, cfg.output.prefix + "_constants.json"), meta.dump(2) + "\n");
            return 0;
        }
        if (*certify) return run_certify(load(ce, certify), ce.lp_dump);
        if (*sweep) {
            ScenarioConfig cfg = load(cw, sweep);
            if (!sq.empty()) cfg.sweep.q = parse_list<double>(sq);
            if (!sr.empty()) cfg.sweep.r = parse_list<double>(sr);
            if (!sN.empty()) cfg.sweep.N = parse_list<int>(sN);
            return run_certify(cfg, cw.lp_dump);
        }
        if (*simulate) {
            const ScenarioConfig cfg = load(cs, simulate);
            const SimulationSummary s = run_simulation(cfg);
            emit_simulation(s, cfg.output.dir, cfg.output.prefix);
            std::printf("%s: |x_T - x_s|=%s alpha=%s limit_cycle=%s violations=%zu -> %s\n", cfg.name.c_str(),
                        format_double(s.final_deviation).c_str(), format_double(s.alpha).c_str(),
                        s.limit_cycle.limit_cycle ? "yes" : "no", s.residual_violations,
                        path_in(cfg, cfg.output.prefix + "_trace.csv").c_str());
            return 0;
        }
        if (*bounds) {
            const int len = K > 0 ? K : std::max(N, 64);
            const bool is_w = sigma == "W";
            CertificationConstants c =
                CertificationConstants::constant(gbar, len, is_w ? SigmaMode::Storage : SigmaMode::StageCost,
                                                 is_w ? eps_o : 1.0);
            if (gbar_f < 0.0) {
                if (N >= 2) print_bound("thm1", alpha_thm1(c, N).alpha, n_min_thm1(c).n_min);
                if (is_w)
                    print_bound("thm3", alpha_hat_eq7(c, N).alpha, n_min_eq8(gbar, eps_o).n_min);
                else
                    print_bound("thm4", alpha_hat_eq9(c, N).alpha, n_min_eq15(gbar, std::numeric_limits<double>::infinity()).n_min);
                print_bound("lp6", alpha_lp6(c, N).alpha, lp_horizon_bound(c, nullptr, 64));
            } else {
                const TerminalConstants t = TerminalConstants::constant(gbar_f, len, eps_f);
                print_bound("thm5", alpha_thm5(c, t, N).alpha, n_min_thm5(c, t).n_min);
                if (is_w)
                    print_bound("thm8", alpha_hat_eq16(c, t, N).alpha, n_min_eq17(gbar_f, eps_o, eps_f).n_min);
                else
                    print_bound("thm7", alpha_hat_eq13(t, N).alpha, n_min_eq15(gbar_f, eps_f).n_min);
                print_bound("lp12", alpha_lp12(c, t, N).alpha, lp_horizon_bound(c, &t, 64));
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
