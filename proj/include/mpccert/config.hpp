#pragma once

#include "mpccert/models.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpccert {

/// Built-in model or explicit discrete-time matrices.
struct ModelConfig {
    std::string type = "msd_chain";  // msd_chain | four_tank | linear
    int L = 6;
    double mass = 1.0, k = 10.0, d = 2.0, h = 1.0, u_max = 1.0;
    FourTankParams four_tank;
    int substeps = 1;
    MatrixXd A, B, C;
    VectorXd u_lo, u_hi;
};

struct CostConfig {
    double q = 1e-4;
    double r = 1e-5;
    std::optional<MatrixXd> Qy;  // identity when absent
    std::optional<VectorXd> x_s;  // model setpoint when absent
    std::optional<VectorXd> u_s;
};

struct GridConfig {
    std::vector<double> lo, hi;  // offsets from x_s; [-5, 5] per state when empty
    std::vector<int> points;     // 5 per state when empty
};

struct AnalysisConfig {
    std::vector<std::string> sigma = {"stage_cost", "storage"};
    double eps_lo = 1e-3, eps_hi = 1.0 - 1e-4;
    int eps_points = 4;
    int K = 400;
    GridConfig grid;
    int nu = 2;
    int horizon = 5;  // N at which alpha is reported
    bool lp = true;
    int lp_n_max = 64;
    int storage_samples = 200;
};

struct TerminalConfig {
    std::string kind = "none";  // none | scaled | finite_tail
    double omega = 10.0;
    int M = 10;
};

struct SweepConfig {
    std::vector<double> q, r;
    std::vector<int> N;
};

struct SimulationConfig {
    bool enabled = false;
    std::vector<double> x0;         // absolute state
    std::vector<double> x0_offset;  // relative to x_s, used when x0 is empty
    int T = 2000;
    int N = 5;
    std::string sigma = "stage_cost";  // measure used for the Lyapunov residuals
    TerminalConfig terminal;
    double tol_linear = 1e-8, tol_nonlinear = 1e-6;
    int max_outer = 100;
    bool cold_start = true;
    double lc_theta = 1e-2, lc_window = 0.25, lc_sat_level = 0.95;
    bool performance_check = false;
    int oracle_horizon = 500;
};

struct OutputConfig {
    std::string dir = "out";
    std::string prefix = "report";
};

struct ScenarioConfig {
    std::string name = "scenario";
    ModelConfig model;
    CostConfig cost;
    AnalysisConfig analysis;
    std::vector<TerminalConfig> terminals = {TerminalConfig{}};
    SweepConfig sweep;
    SimulationConfig simulation;
    OutputConfig output;
    std::uint64_t seed = 1;
    int threads = 1;
};

/// Validates the schema (unknown keys rejected) and fills defaults.
[[nodiscard]] ScenarioConfig parse_config(const nlohmann::json& j);
[[nodiscard]] ScenarioConfig load_config(const std::string& path);
/// Complete serialization, every defaulted field included.
[[nodiscard]] nlohmann::json to_json(const ScenarioConfig& c);

/// Plant and setpoint-aware cost for the given weights.
[[nodiscard]] Plant build_plant(const ModelConfig& m);
[[nodiscard]] QuadraticStageCost build_cost(const ScenarioConfig& c, const Plant& plant, double q, double r);

}  // namespace mpccert
