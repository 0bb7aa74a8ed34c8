#include "mpccert/pipeline.hpp"

#include "mpccert/certificates.hpp"
#include "mpccert/io.hpp"
#include "mpccert/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <thread>

namespace mpccert {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Constants of one sigma path at one parameter point.
struct PathData {
    std::string sigma;  // "l" or "W"
    CertificationConstants c;
    StateMeasure measure;
    StorageFunction storage;
    bool sampled = false;
    std::string note;
    json meta = json::object();
};

json jnum(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

GridSpec make_grid(const ScenarioConfig& cfg, int n) {
    GridSpec g;
    const auto& gc = cfg.analysis.grid;
    g.lo = gc.lo.empty() ? std::vector<double>(static_cast<std::size_t>(n), -5.0) : gc.lo;
    g.hi = gc.hi.empty() ? std::vector<double>(static_cast<std::size_t>(n), 5.0) : gc.hi;
    g.points = gc.points.empty() ? std::vector<int>(static_cast<std::size_t>(n), 5) : gc.points;
    return g;
}

/// A sigma path that does not apply to the plant and cost at hand.
struct NotApplicable : std::domain_error {
    using std::domain_error::domain_error;
};

void require_stage_measure(const QuadraticStageCost& cost, const MatrixXd& C) {
    if (!linalg::is_positive_definite(cost.state_weight(C)))
        throw NotApplicable("sigma = l_min is not positive definite (q = 0 with a rank-deficient output map)");
}

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

PathData build_path(const ScenarioConfig& cfg, const Plant& plant, const QuadraticStageCost& cost,
                    const std::string& sigma, int inner_threads) {
    PathData p;
    p.sigma = sigma == "stage_cost" ? "l" : "W";
    const MatrixXd& C = plant_C(plant);
    const int K = cfg.analysis.K;
    if (const auto* lin = std::get_if<LinearSystem>(&plant)) {
        if (sigma == "stage_cost") {
            require_stage_measure(cost, C);
            p.measure = StateMeasure::stage_cost_min(cost, C);
            p.c = CertificationConstants::stage_cost(gamma_linear_openloop(*lin, cost, p.measure, std::nullopt, K));
            p.c.gamma_bar = gamma_bar_linear(*lin, cost, p.measure, std::nullopt, K);
        } else {
            StorageOptions so;
            so.K = K;
            const auto syn = synthesize_storage_linear(
                *lin, cost, log_grid(cfg.analysis.eps_lo, cfg.analysis.eps_hi, cfg.analysis.eps_points), so);
            json cands = json::array();
            for (const auto& cd : syn.candidates)
                cands.push_back({{"eps_o", cd.eps_o},
                                 {"feasible", cd.feasible},
                                 {"gamma_bar", jnum(cd.gamma_bar)},
                                 {"n_min_eq8", jnum(cd.n_min)},
                                 {"backoff", cd.backoff},
                                 {"iterations", cd.iterations},
                                 {"note", cd.note}});
            p.meta["storage_candidates"] = cands;
            if (!syn.found) throw std::domain_error("no feasible quadratic storage on the eps_o grid");
            p.c = syn.constants;
            p.measure = syn.sigma;
            p.storage = syn.storage;
            const auto rep = verify_storage(plant, cost, p.storage, p.measure, 1.0, 1.0,
                                            cfg.analysis.storage_samples, cfg.seed);
            p.meta["storage_check"] = {{"pass", rep.pass},
                                       {"max_dissipation", jnum(rep.max_dissipation)},
                                       {"max_sandwich", jnum(rep.max_sandwich)},
                                       {"samples", rep.samples},
                                       {"exact_matrix_check", !rep.sampled}};
            if (!rep.pass) p.note = "storage check failed";
        }
    } else {
        const auto& sys = std::get<NonlinearSystem>(plant);
        const GridSpec grid = make_grid(cfg, sys.nx);
        GridGammaResult res;
        if (sigma == "stage_cost") {
            require_stage_measure(cost, C);
            p.measure = StateMeasure::stage_cost_min(cost, C);
            res = gamma_nonlinear_grid(sys, cost, GridMeasure::StageCostMin, 0, grid, K, 0.0, inner_threads);
            p.c = CertificationConstants::stage_cost(res.gamma);
        } else {
            res = gamma_nonlinear_grid(sys, cost, GridMeasure::Narx, cfg.analysis.nu, grid, K, 0.0, inner_threads);
            p.storage = narx_storage(cfg.analysis.nu);
            p.c = CertificationConstants::storage(res.gamma, p.storage.eps_o);
        }
        p.c.gamma_bar = max_of(res.gamma);
        p.sampled = true;
        p.meta["grid"] = {{"points_used", res.points_used},
                          {"points_skipped", res.points_skipped},
                          {"points_diverged", res.points_diverged}};
    }
    p.meta["gamma_bar"] = jnum(p.c.gamma_bar);
    p.meta["eps_o"] = p.c.eps_o;
    p.meta["gamma_1"] = p.c.gamma.empty() ? json(nullptr) : json(p.c.gamma.front());
    return p;
}

TerminalConstants build_terminal(const ScenarioConfig& cfg, const Plant& plant, const QuadraticStageCost& cost,
                                 const PathData& p, const TerminalConfig& tc, int inner_threads, std::string& note,
                                 bool& sampled, double* omega_t = nullptr) {
    const int K = cfg.analysis.K;
    TerminalConstants t;
    if (const auto* lin = std::get_if<LinearSystem>(&plant)) {
        if (tc.kind == "scaled") {
            double wt = 0.0;
            t = terminal_scaled_linear(*lin, cost, p.measure, tc.omega, K, &wt);
            if (omega_t) *omega_t = wt;
            note = "omega_t=" + format_double(wt);
        } else {
            t = terminal_finite_tail_linear(*lin, cost, p.measure, tc.M, K);
        }
    } else {
        if (tc.kind != "scaled") throw std::domain_error("finite-tail terminal constants are implemented for linear plants only");
        const auto& sys = std::get<NonlinearSystem>(plant);
        const GridSpec grid = make_grid(cfg, sys.nx);
        const auto res = p.sigma == "l"
                             ? gamma_nonlinear_grid(sys, cost, GridMeasure::StageCostMin, 0, grid, K, tc.omega, inner_threads)
                             : gamma_nonlinear_grid(sys, cost, GridMeasure::Narx, cfg.analysis.nu, grid, K, tc.omega,
                                                    inner_threads);
        t = terminal_constants_scaled(tc.omega, res.gamma_f.front());
        t.gamma_f = res.gamma_f;
        if (omega_t) *omega_t = tc.omega;
        sampled = true;
    }
    if (!t.eps_f_infinite() && t.eps_f < 0.0) {
        note += (note.empty() ? "" : " ") + std::string("eps_f=") + format_double(t.eps_f) + " raised to 0";
    }
    return normalize_terminal(t);
}

std::string sanitize(std::string s) {
    for (char& ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-') ch = '_';
    return s;
}

struct Evaluator {
    const ScenarioConfig& cfg;
    const RunOptions& opt;

    void dump(const DenseLp& lp, const ReportRow& row) const {
        if (opt.lp_dump_dir.empty()) return;
        const std::string file = opt.lp_dump_dir + "/" +
                                 sanitize(row.param + "_" + row.sigma + "_" + row.terminal + "_" +
                                          to_string(row.method) + "_N" + std::to_string(row.N)) +
                                 ".lp";
        write_lp_file(file, lp);
    }

    void eval(ReportRow& row, const CertificationConstants& c, const TerminalConstants* t) const {
        const int N = row.N;
        switch (row.method) {
            case Method::Thm1:
                row.n_min = n_min_thm1(c).n_min;
                if (N >= 2) {
                    row.alpha = alpha_thm1(c, N).alpha;
                } else {
                    row.alpha = kNaN;
                    row.note = "alpha undefined for N<=1";
                }
                break;
            case Method::Thm3:
                row.alpha = alpha_hat_eq7(c, N).alpha;
                row.n_min = n_min_eq8(c.gamma_bar, c.eps_o).n_min;
                break;
            case Method::Thm4:
                row.alpha = alpha_hat_eq9(c, N).alpha;
                row.n_min = n_min_eq15(c.gamma_bar, kInf).n_min;
                break;
            case Method::Lp6:
                dump(build_lp6(c, N), row);
                row.alpha = alpha_lp6(c, N).alpha;
                row.n_min = lp_horizon_bound(c, nullptr, cfg.analysis.lp_n_max);
                break;
            case Method::Thm5:
                row.alpha = alpha_thm5(c, *t, N).alpha;
                row.n_min = n_min_thm5(c, *t).n_min;
                break;
            case Method::Thm7:
                row.alpha = alpha_hat_eq13(*t, N).alpha;
                row.n_min = n_min_eq15(t->gamma_f_bar, t->eps_f).n_min;
                break;
            case Method::Thm8:
                row.alpha = alpha_hat_eq16(c, *t, N).alpha;
                row.n_min = n_min_eq17(t->gamma_f_bar, c.eps_o, t->eps_f).n_min;
                break;
            case Method::Lp12:
                dump(build_lp12(c, *t, N), row);
                row.alpha = alpha_lp12(c, *t, N).alpha;
                row.n_min = lp_horizon_bound(c, t, cfg.analysis.lp_n_max);
                break;
        }
    }
};

struct PointResult {
    std::vector<ReportRow> rows;
    json meta;
    double seconds = 0.0;
};

PointResult certify_point(const ScenarioConfig& cfg, const RunOptions& opt, const Plant& plant, const SweepPoint& pt,
                          int inner_threads) {
    const auto t0 = std::chrono::steady_clock::now();
    PointResult out;
    out.meta = {{"param", pt.param}, {"q", pt.q}, {"r", pt.r}, {"N", pt.N}};
    json paths = json::object();
    const Evaluator ev{cfg, opt};
    QuadraticStageCost cost;
    std::string cost_error;
    try {
        cost = build_cost(cfg, plant, pt.q, pt.r);
    } catch (const std::exception& e) {
        cost_error = e.what();
    }
    for (const auto& sigma : cfg.analysis.sigma) {
        const bool is_l = sigma == "stage_cost";
        const std::string tag = is_l ? "l" : "W";
        PathData p;
        std::string path_error = cost_error;
        bool applicable = true;
        if (path_error.empty()) {
            try {
                p = build_path(cfg, plant, cost, sigma, inner_threads);
            } catch (const NotApplicable& e) {
                path_error = e.what();
                applicable = false;
            } catch (const std::exception& e) {
                path_error = e.what();
            }
        }
        json pm = p.meta;
        if (!applicable)
            pm["not_applicable"] = path_error;
        else if (!path_error.empty())
            pm["error"] = path_error;
        json terms = json::object();
        for (const auto& tc : cfg.terminals) {
            const bool has_t = tc.kind != "none";
            std::vector<Method> methods =
                has_t ? std::vector<Method>{Method::Thm5, is_l ? Method::Thm7 : Method::Thm8}
                      : std::vector<Method>{Method::Thm1, is_l ? Method::Thm4 : Method::Thm3};
            if (cfg.analysis.lp) methods.push_back(has_t ? Method::Lp12 : Method::Lp6);
            TerminalConstants t;
            std::string t_note, t_error = path_error;
            bool sampled = p.sampled;
            if (has_t && t_error.empty()) {
                try {
                    t = build_terminal(cfg, plant, cost, p, tc, inner_threads, t_note, sampled);
                    terms[tc.kind] = {{"eps_f", jnum(t.eps_f)},
                                      {"c_f_lower", jnum(t.c_f_lower)},
                                      {"c_f_upper", jnum(t.c_f_upper)},
                                      {"gamma_1f", t.gamma_f.empty() ? json(nullptr) : json(t.gamma_f.front())},
                                      {"gamma_f_bar", jnum(t.gamma_f_bar)},
                                      {"note", t_note}};
                } catch (const std::exception& e) {
                    t_error = e.what();
                    terms[tc.kind] = {{"error", t_error}};
                }
            }
            for (Method m : methods) {
                ReportRow row;
                row.param = pt.param;
                row.q = pt.q;
                row.r = pt.r;
                row.N = pt.N;
                row.sigma = tag;
                row.method = m;
                row.terminal = tc.kind;
                row.sampled = sampled;
                row.gamma_bar = p.c.gamma_bar;
                row.eps_o = p.c.eps_o;
                row.eps_f = has_t ? t.eps_f : kInf;
                row.c_f_lower = t.c_f_lower;
                row.c_f_upper = t.c_f_upper;
                row.gamma_f_bar = t.gamma_f_bar;
                row.note = t_note;
                if (!applicable) {
                    row.applicable = false;
                    row.alpha = row.n_min = kNaN;
                    row.note = path_error;
                } else if (!t_error.empty()) {
                    row.ok = false;
                    row.alpha = row.n_min = kNaN;
                    row.note = t_error;
                } else {
                    try {
                        ev.eval(row, p.c, has_t ? &t : nullptr);
                        if (!p.note.empty()) row.note += (row.note.empty() ? "" : " ") + p.note;
                    } catch (const std::exception& e) {
                        row.ok = false;
                        row.alpha = row.n_min = kNaN;
                        row.note = e.what();
                    }
                }
                out.rows.push_back(row);
            }
        }
        pm["terminals"] = terms;
        paths[tag] = pm;
    }
    out.meta["paths"] = paths;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace

std::string ReportRow::method_label() const { return std::string(to_string(method)) + "/" + sigma; }

bool CertificationReport::failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return !r.ok; });
}

std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg) {
    const auto& s = cfg.sweep;
    const std::vector<double> qs = s.q.empty() ? std::vector<double>{cfg.cost.q} : s.q;
    const std::vector<double> rs = s.r.empty() ? std::vector<double>{cfg.cost.r} : s.r;
    const std::vector<int> Ns = s.N.empty() ? std::vector<int>{cfg.analysis.horizon} : s.N;
    std::vector<SweepPoint> pts;
    for (double q : qs)
        for (double r : rs)
            for (int N : Ns) {
                std::string param;
                auto add = [&](const std::string& part) { param += (param.empty() ? "" : ";") + part; };
                if (!s.q.empty()) add("q=" + format_double(q));
                if (!s.r.empty()) add("r=" + format_double(r));
                if (!s.N.empty()) add("N=" + std::to_string(N));
                if (param.empty()) param = "base";
                pts.push_back({q, r, N, param});
            }
    return pts;
}

double lp_horizon_bound(const CertificationConstants& c, const TerminalConstants* t, int n_max) {
    auto stab = [&](int N) { return (t ? alpha_lp12(c, *t, N) : alpha_lp6(c, N)).alpha > 0.0; };
    if (n_max < 1 || !stab(n_max)) return kInf;
    for (int N = n_max - 1; N >= 1; --N)
        if (!stab(N)) return static_cast<double>(N);
    return 0.0;
}

CertificationReport run_certification(const ScenarioConfig& cfg, const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const Plant plant = build_plant(cfg.model);
    const auto pts = sweep_points(cfg);
    if (!opt.lp_dump_dir.empty()) std::filesystem::create_directories(opt.lp_dump_dir);
    std::vector<PointResult> results(pts.size());
    const int T = std::max(1, std::min<int>(opt.threads, static_cast<int>(pts.size())));
    const int inner = pts.size() == 1 ? std::max(1, opt.threads) : 1;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < pts.size(); i = next++) results[i] = certify_point(cfg, opt, plant, pts[i], inner);
    };
    if (T == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < T; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    CertificationReport rep;
    rep.name = cfg.name;
    json points = json::array();
    json timing_points = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (auto& r : results[i].rows) rep.rows.push_back(std::move(r));
        points.push_back(results[i].meta);
        timing_points.push_back({{"param", pts[i].param}, {"seconds", results[i].seconds}});
    }
    rep.metadata = {{"name", cfg.name},
                    {"schema_version", 1},
                    {"config", to_json(cfg)},
                    {"points", points},
                    {"rows", rep.rows.size()},
                    {"failed_rows", std::count_if(rep.rows.begin(), rep.rows.end(), [](const ReportRow& r) { return !r.ok; })}};
    rep.timings = {{"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                   {"threads", opt.threads},
                   {"points", timing_points}};
    return rep;
}

std::vector<GammaTable> estimate_constants(const ScenarioConfig& cfg, json* meta) {
    const Plant plant = build_plant(cfg.model);
    const QuadraticStageCost cost = build_cost(cfg, plant, cfg.cost.q, cfg.cost.r);
    std::vector<GammaTable> out;
    json m = json::object();
    for (const auto& sigma : cfg.analysis.sigma) {
        const PathData p = build_path(cfg, plant, cost, sigma, cfg.threads);
        out.push_back({"gamma_" + p.sigma, p.c.gamma, sigma, p.sampled});
        json pm = p.meta;
        for (const auto& tc : cfg.terminals) {
            if (tc.kind == "none") continue;
            std::string note;
            bool sampled = p.sampled;
            const TerminalConstants t = build_terminal(cfg, plant, cost, p, tc, cfg.threads, note, sampled);
            out.push_back({"gamma_f_" + p.sigma + "_" + tc.kind, t.gamma_f, sigma + "+" + tc.kind, sampled});
            pm["terminals"][tc.kind] = {{"eps_f", jnum(t.eps_f)},
                                        {"c_f_lower", jnum(t.c_f_lower)},
                                        {"c_f_upper", jnum(t.c_f_upper)},
                                        {"gamma_f_bar", jnum(t.gamma_f_bar)},
                                        {"note", note}};
        }
        m[p.sigma] = pm;
    }
    if (meta) *meta = m;
    return out;
}

SimulationSummary run_simulation(const ScenarioConfig& cfg) {
    const auto& sc = cfg.simulation;
    const Plant plant = build_plant(cfg.model);
    const QuadraticStageCost cost = build_cost(cfg, plant, cfg.cost.q, cfg.cost.r);
    const int n = plant_n(plant);
    VectorXd x0;
    if (!sc.x0.empty()) {
        x0 = Eigen::Map<const VectorXd>(sc.x0.data(), static_cast<Eigen::Index>(sc.x0.size()));
    } else if (!sc.x0_offset.empty()) {
        x0 = cost.x_s + Eigen::Map<const VectorXd>(sc.x0_offset.data(), static_cast<Eigen::Index>(sc.x0_offset.size()));
    } else {
        throw std::invalid_argument("simulation: x0 or x0_offset is required");
    }
    if (x0.size() != n) throw std::invalid_argument("simulation: x0 has wrong size");

    SimulationSummary s;
    s.label = cfg.name;
    json meta;
    const PathData p = build_path(cfg, plant, cost, sc.sigma, cfg.threads);
    const bool linear = plant_is_linear(plant);
    TerminalCostSpec spec = TerminalCostSpec::none();
    std::optional<TerminalConstants> t;
    std::string t_note;
    double omega_t = 0.0;
    if (sc.terminal.kind == "scaled") {
        bool sampled = p.sampled;
        t = build_terminal(cfg, plant, cost, p, sc.terminal, cfg.threads, t_note, sampled, &omega_t);
        if (linear) {
            const MatrixXd Ps = p.measure.P_inv ? linalg::spd_inverse(*p.measure.P_inv) : p.measure.P;
            spec = TerminalCostSpec::scaled(omega_t, Ps);
        } else if (p.sigma == "l") {
            spec = TerminalCostSpec::scaled(sc.terminal.omega, cost.state_weight(plant_C(plant)));
        } else {
            spec = TerminalCostSpec::narx_scaled(sc.terminal.omega, cfg.analysis.nu);
        }
    } else if (sc.terminal.kind == "finite_tail") {
        spec = TerminalCostSpec::finite_tail(sc.terminal.M);
        if (linear) {
            bool sampled = false;
            t = build_terminal(cfg, plant, cost, p, sc.terminal, cfg.threads, t_note, sampled);
        } else {
            t_note = "no terminal constants for a nonlinear finite tail";
        }
    }
    const int N = sc.N;
    double alpha = kNaN;
    std::string alpha_method;
    try {
        if (sc.terminal.kind == "finite_tail" && !t) {
            alpha_method = "none";
        } else if (cfg.analysis.lp) {
            alpha = t ? alpha_lp12(p.c, *t, N).alpha : alpha_lp6(p.c, N).alpha;
            alpha_method = t ? "lp12" : "lp6";
        } else if (t) {
            alpha = p.sigma == "l" ? alpha_hat_eq13(*t, N).alpha : alpha_hat_eq16(p.c, *t, N).alpha;
            alpha_method = p.sigma == "l" ? "thm7" : "thm8";
        } else {
            alpha = p.sigma == "l" ? alpha_hat_eq9(p.c, N).alpha : alpha_hat_eq7(p.c, N).alpha;
            alpha_method = p.sigma == "l" ? "thm4" : "thm3";
        }
    } catch (const std::exception& e) {
        t_note += std::string(" certificate failed: ") + e.what();
    }
    s.alpha = alpha;

    OcpOptions oo;
    oo.tol_linear = sc.tol_linear;
    oo.tol_nonlinear = sc.tol_nonlinear;
    oo.max_outer = sc.max_outer;
    oo.cold_start = sc.cold_start;
    s.trace = closed_loop(plant, cost, spec, N, x0, sc.T, oo);

    const double alpha_used = std::isfinite(alpha) && alpha > 0.0 ? alpha : 0.0;
    StorageFunction W = p.storage;
    if (p.sigma == "l") W.eps_o = 1.0;
    s.trace.lyap_residual = lyapunov_residuals(s.trace, W, p.measure, alpha_used);
    for (std::size_t k = 0; k < s.trace.lyap_residual.size(); ++k)
        if (s.trace.lyap_residual[k] > 1e-6 * std::max(1.0, s.trace.value[k])) ++s.residual_violations;
    s.limit_cycle = detect_limit_cycle(s.trace, cost.x_s, plant_u_lo(plant), plant_u_hi(plant), sc.lc_theta,
                                       sc.lc_window, 1e6, sc.lc_sat_level);
    s.final_deviation = (s.trace.x.back() - cost.x_s).norm();
    std::size_t nonconv = 0;
    double cand_gap = -kInf;
    for (std::size_t k = 0; k < s.trace.ocp_converged.size(); ++k) {
        nonconv += s.trace.ocp_converged[k] ? 0 : 1;
        if (k > 0 && std::isfinite(s.trace.candidate_cost[k]))
            cand_gap = std::max(cand_gap, s.trace.value[k] - s.trace.candidate_cost[k]);
    }
    meta = {{"name", cfg.name},
            {"N", N},
            {"T", sc.T},
            {"sigma", p.sigma},
            {"terminal", sc.terminal.kind},
            {"omega_t", omega_t},
            {"terminal_note", t_note},
            {"alpha", jnum(alpha)},
            {"alpha_method", alpha_method},
            {"alpha_used_for_residuals", alpha_used},
            {"residual_violations", s.residual_violations},
            {"final_deviation", s.final_deviation},
            {"performance", s.trace.performance},
            {"ocp_nonconverged_steps", nonconv},
            {"max_value_minus_candidate", jnum(cand_gap)},
            {"limit_cycle",
             {{"detected", s.limit_cycle.limit_cycle},
              {"tail_min_norm", s.limit_cycle.tail_min_norm},
              {"tail_max_norm", s.limit_cycle.tail_max_norm},
              {"saturation_fraction", s.limit_cycle.saturation_fraction},
              {"max_input_level", s.limit_cycle.max_input_level}}},
            {"constants", p.meta},
            {"config", to_json(cfg)}};
    if (sc.performance_check) {
        const VInfinity vi = v_infty_oracle(plant, cost, x0, sc.oracle_horizon, oo);
        const double Wx0 = p.storage.kind == StorageKind::QuadraticForm ? p.storage.eval(x0) : 0.0;
        const double factor = t ? performance_factor_eq11(p.c, *t, N) : 1.0;
        const auto pc = performance_ratio(s.trace, Wx0, vi.value, alpha_used, factor);
        meta["performance_check"] = {{"status", to_string(pc.status)}, {"lhs", pc.lhs},
                                     {"rhs", pc.rhs},                  {"slack", pc.slack},
                                     {"tail", pc.tail},                {"v_inf", vi.value},
                                     {"v_inf_increment", vi.increment}, {"factor", factor}};
    }
    s.meta = meta;
    return s;
}

}  // namespace mpccert
