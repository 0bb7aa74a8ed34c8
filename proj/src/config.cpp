#include "mpccert/config.hpp"

#include "mpccert/io.hpp"

#include <set>
#include <stdexcept>

namespace mpccert {

using nlohmann::json;

namespace {

/// Object reader that rejects keys nobody asked for.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw std::invalid_argument("config: " + path_ + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument("config: " + path_ + "." + key + ": " + e.what());
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    const json& at(const char* key) const { return j_.at(key); }
    std::string sub(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw std::invalid_argument("config: unknown key " + path_ + "." + k);
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

MatrixXd to_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("config: " + path + " must be a non-empty matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_array() || static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols)
            throw std::invalid_argument("config: " + path + " has ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
    }
    return M;
}

VectorXd to_vector(const json& j, const std::string& path) {
    if (!j.is_array()) throw std::invalid_argument("config: " + path + " must be an array");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

json from_matrix(const MatrixXd& M) {
    json j = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
        j.push_back(row);
    }
    return j;
}

json from_vector(const VectorXd& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

TerminalConfig parse_terminal(const json& j, const std::string& path) {
    TerminalConfig t;
    Reader r(j, path);
    r.get("kind", t.kind);
    r.get("omega", t.omega);
    r.get("M", t.M);
    r.finish();
    if (t.kind != "none" && t.kind != "scaled" && t.kind != "finite_tail")
        throw std::invalid_argument("config: " + path + ".kind must be none, scaled or finite_tail");
    if (t.kind == "scaled" && !(t.omega > 0.0)) throw std::invalid_argument("config: " + path + ".omega must be > 0");
    if (t.kind == "finite_tail" && t.M < 1) throw std::invalid_argument("config: " + path + ".M must be >= 1");
    return t;
}

json terminal_json(const TerminalConfig& t) { return {{"kind", t.kind}, {"omega", t.omega}, {"M", t.M}}; }

}  // namespace

ScenarioConfig parse_config(const json& j) {
    ScenarioConfig c;
    Reader top(j, "config");
    top.get("name", c.name);
    top.get("seed", c.seed);
    top.get("threads", c.threads);

    if (top.has("model")) {
        Reader r(top.at("model"), "model");
        auto& m = c.model;
        r.get("type", m.type);
        r.get("L", m.L);
        r.get("mass", m.mass);
        r.get("k", m.k);
        r.get("d", m.d);
        r.get("h", m.h);
        r.get("u_max", m.u_max);
        r.get("substeps", m.substeps);
        if (r.has("four_tank")) {
            Reader f(r.at("four_tank"), "model.four_tank");
            auto& p = m.four_tank;
            f.get("area", p.area);
            f.get("a1", p.a1);
            f.get("a2", p.a2);
            f.get("a3", p.a3);
            f.get("a4", p.a4);
            f.get("g", p.g);
            f.get("split1", p.split1);
            f.get("split2", p.split2);
            f.get("us1", p.us1);
            f.get("us2", p.us2);
            f.get("u_max", p.u_max);
            f.get("Ts", p.Ts);
            f.finish();
        }
        if (r.has("A")) m.A = to_matrix(r.at("A"), "model.A");
        if (r.has("B")) m.B = to_matrix(r.at("B"), "model.B");
        if (r.has("C")) m.C = to_matrix(r.at("C"), "model.C");
        if (r.has("u_lo")) m.u_lo = to_vector(r.at("u_lo"), "model.u_lo");
        if (r.has("u_hi")) m.u_hi = to_vector(r.at("u_hi"), "model.u_hi");
        r.finish();
        if (m.type != "msd_chain" && m.type != "four_tank" && m.type != "linear")
            throw std::invalid_argument("config: model.type must be msd_chain, four_tank or linear");
        if (m.type == "linear" && (m.A.size() == 0 || m.B.size() == 0 || m.C.size() == 0 || m.u_lo.size() == 0 ||
                                   m.u_hi.size() == 0))
            throw std::invalid_argument("config: linear model needs A, B, C, u_lo and u_hi");
    }
    if (top.has("cost")) {
        Reader r(top.at("cost"), "cost");
        r.get("q", c.cost.q);
        r.get("r", c.cost.r);
        if (r.has("Qy")) c.cost.Qy = to_matrix(r.at("Qy"), "cost.Qy");
        if (r.has("x_s")) c.cost.x_s = to_vector(r.at("x_s"), "cost.x_s");
        if (r.has("u_s")) c.cost.u_s = to_vector(r.at("u_s"), "cost.u_s");
        r.finish();
        if (c.cost.q < 0.0 || !(c.cost.r > 0.0)) throw std::invalid_argument("config: need q >= 0 and r > 0");
    }
    if (top.has("analysis")) {
        Reader r(top.at("analysis"), "analysis");
        auto& a = c.analysis;
        r.get("sigma", a.sigma);
        r.get("eps_lo", a.eps_lo);
        r.get("eps_hi", a.eps_hi);
        r.get("eps_points", a.eps_points);
        r.get("K", a.K);
        r.get("nu", a.nu);
        r.get("horizon", a.horizon);
        r.get("lp", a.lp);
        r.get("lp_n_max", a.lp_n_max);
        r.get("storage_samples", a.storage_samples);
        if (r.has("grid")) {
            Reader g(r.at("grid"), "analysis.grid");
            g.get("lo", a.grid.lo);
            g.get("hi", a.grid.hi);
            g.get("points", a.grid.points);
            g.finish();
        }
        r.finish();
        for (const auto& s : a.sigma)
            if (s != "stage_cost" && s != "storage")
                throw std::invalid_argument("config: analysis.sigma entries must be stage_cost or storage");
        if (a.K < 1 || a.horizon < 1 || a.lp_n_max < 1 || a.eps_points < 1 || a.nu < 1)
            throw std::invalid_argument("config: analysis integers must be >= 1");
    }
    if (top.has("terminals")) {
        const json& t = top.at("terminals");
        if (!t.is_array()) throw std::invalid_argument("config: terminals must be an array");
        c.terminals.clear();
        for (std::size_t i = 0; i < t.size(); ++i)
            c.terminals.push_back(parse_terminal(t[i], "terminals[" + std::to_string(i) + "]"));
    }
    if (top.has("sweep")) {
        Reader r(top.at("sweep"), "sweep");
        r.get("q", c.sweep.q);
        r.get("r", c.sweep.r);
        r.get("N", c.sweep.N);
        r.finish();
    }
    if (top.has("simulation")) {
        Reader r(top.at("simulation"), "simulation");
        auto& s = c.simulation;
        r.get("enabled", s.enabled);
        r.get("x0", s.x0);
        r.get("x0_offset", s.x0_offset);
        r.get("T", s.T);
        r.get("N", s.N);
        r.get("sigma", s.sigma);
        if (r.has("terminal")) s.terminal = parse_terminal(r.at("terminal"), "simulation.terminal");
        r.get("tol_linear", s.tol_linear);
        r.get("tol_nonlinear", s.tol_nonlinear);
        r.get("max_outer", s.max_outer);
        r.get("cold_start", s.cold_start);
        r.get("lc_theta", s.lc_theta);
        r.get("lc_window", s.lc_window);
        r.get("lc_sat_level", s.lc_sat_level);
        r.get("performance_check", s.performance_check);
        r.get("oracle_horizon", s.oracle_horizon);
        r.finish();
        if (s.sigma != "stage_cost" && s.sigma != "storage")
            throw std::invalid_argument("config: simulation.sigma must be stage_cost or storage");
        if (s.T < 0 || s.N < 1) throw std::invalid_argument("config: simulation needs T >= 0 and N >= 1");
    }
    if (top.has("output")) {
        Reader r(top.at("output"), "output");
        r.get("dir", c.output.dir);
        r.get("prefix", c.output.prefix);
        r.finish();
    }
    top.finish();
    if (c.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: cannot parse " + path + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const ScenarioConfig& c) {
    json j;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    const auto& m = c.model;
    json model = {{"type", m.type}, {"L", m.L},         {"mass", m.mass},         {"k", m.k},
                  {"d", m.d},       {"h", m.h},         {"u_max", m.u_max},       {"substeps", m.substeps}};
    const auto& p = m.four_tank;
    model["four_tank"] = {{"area", p.area},     {"a1", p.a1},         {"a2", p.a2},   {"a3", p.a3},
                          {"a4", p.a4},         {"g", p.g},           {"split1", p.split1},
                          {"split2", p.split2}, {"us1", p.us1},       {"us2", p.us2}, {"u_max", p.u_max},
                          {"Ts", p.Ts}};
    if (m.A.size()) model["A"] = from_matrix(m.A);
    if (m.B.size()) model["B"] = from_matrix(m.B);
    if (m.C.size()) model["C"] = from_matrix(m.C);
    if (m.u_lo.size()) model["u_lo"] = from_vector(m.u_lo);
    if (m.u_hi.size()) model["u_hi"] = from_vector(m.u_hi);
    j["model"] = model;
    json cost = {{"q", c.cost.q}, {"r", c.cost.r}};
    if (c.cost.Qy) cost["Qy"] = from_matrix(*c.cost.Qy);
    if (c.cost.x_s) cost["x_s"] = from_vector(*c.cost.x_s);
    if (c.cost.u_s) cost["u_s"] = from_vector(*c.cost.u_s);
    j["cost"] = cost;
    const auto& a = c.analysis;
    j["analysis"] = {{"sigma", a.sigma},
                     {"eps_lo", a.eps_lo},
                     {"eps_hi", a.eps_hi},
                     {"eps_points", a.eps_points},
                     {"K", a.K},
                     {"nu", a.nu},
                     {"horizon", a.horizon},
                     {"lp", a.lp},
                     {"lp_n_max", a.lp_n_max},
                     {"storage_samples", a.storage_samples},
                     {"grid", {{"lo", a.grid.lo}, {"hi", a.grid.hi}, {"points", a.grid.points}}}};
    j["terminals"] = json::array();
    for (const auto& t : c.terminals) j["terminals"].push_back(terminal_json(t));
    j["sweep"] = {{"q", c.sweep.q}, {"r", c.sweep.r}, {"N", c.sweep.N}};
    const auto& s = c.simulation;
    j["simulation"] = {{"enabled", s.enabled},
                       {"x0", s.x0},
                       {"x0_offset", s.x0_offset},
                       {"T", s.T},
                       {"N", s.N},
                       {"sigma", s.sigma},
                       {"terminal", terminal_json(s.terminal)},
                       {"tol_linear", s.tol_linear},
                       {"tol_nonlinear", s.tol_nonlinear},
                       {"max_outer", s.max_outer},
                       {"cold_start", s.cold_start},
                       {"lc_theta", s.lc_theta},
                       {"lc_window", s.lc_window},
                       {"lc_sat_level", s.lc_sat_level},
                       {"performance_check", s.performance_check},
                       {"oracle_horizon", s.oracle_horizon}};
    j["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}};
    return j;
}

Plant build_plant(const ModelConfig& m) {
    if (m.type == "msd_chain") return msd_chain_model(m.L, m.mass, m.k, m.d, m.h, m.u_max);
    if (m.type == "four_tank") {
        NonlinearSystem s = four_tank_model(m.four_tank);
        s.substeps = m.substeps;
        return s;
    }
    LinearSystem s;
    s.A = m.A;
    s.B = m.B;
    s.C = m.C;
    s.u_lo = m.u_lo;
    s.u_hi = m.u_hi;
    s.validate();
    return s;
}

QuadraticStageCost build_cost(const ScenarioConfig& c, const Plant& plant, double q, double r) {
    const int n = plant_n(plant), m = plant_m(plant);
    const int p = static_cast<int>(plant_C(plant).rows());
    QuadraticStageCost cost = QuadraticStageCost::output_cost(n, m, p, q, r);
    if (const auto* nl = std::get_if<NonlinearSystem>(&plant); nl && nl->model_id == "four_tank") {
        auto [xs, us] = c.model.four_tank.setpoint();
        cost.x_s = xs;
        cost.u_s = us;
    }
    if (c.cost.Qy) cost.Qy = *c.cost.Qy;
    if (c.cost.x_s) cost.x_s = *c.cost.x_s;
    if (c.cost.u_s) cost.u_s = *c.cost.u_s;
    cost.validate(n, m, p);
    return cost;
}

}  // namespace mpccert
