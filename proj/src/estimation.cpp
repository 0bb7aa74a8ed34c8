#include "mpccert/estimation.hpp"

#include "mpccert/io.hpp"
#include "mpccert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mpccert {

using linalg::sym;

double StateMeasure::eval(const VectorXd& x) const {
    const VectorXd d = x_s.size() ? VectorXd(x - x_s) : x;
    return d.dot(P * d);
}

StateMeasure StateMeasure::stage_cost_min(const QuadraticStageCost& cost, const MatrixXd& C) {
    StateMeasure s;
    s.mode = MeasureMode::StageCostMin;
    s.P = cost.state_weight(C);
    s.x_s = cost.x_s;
    return s;
}

StateMeasure StateMeasure::quadratic(const MatrixXd& P, const VectorXd& x_s) {
    StateMeasure s;
    s.mode = MeasureMode::QuadraticForm;
    s.P = sym(P);
    s.x_s = x_s;
    return s;
}

double StorageFunction::eval(const VectorXd& x) const {
    switch (kind) {
        case StorageKind::Zero: return 0.0;
        case StorageKind::QuadraticForm: {
            const VectorXd d = x_s.size() ? VectorXd(x - x_s) : x;
            return d.dot(P_o * d);
        }
        case StorageKind::NarxWeights:
            throw std::logic_error("NARX storage is evaluated from past stage costs");
    }
    return 0.0;
}

double StorageFunction::eval_narx(const std::vector<double>& past_costs) const {
    if (kind != StorageKind::NarxWeights) throw std::logic_error("eval_narx on a non-NARX storage");
    if (static_cast<int>(past_costs.size()) < nu) throw std::invalid_argument("eval_narx: need nu past costs");
    double w = 0.0;
    for (int j = 1; j <= nu; ++j) w += static_cast<double>(nu + 1 - j) / nu * past_costs[static_cast<std::size_t>(j - 1)];
    return w;
}

namespace {

double gen_max(const MatrixXd& G, const StateMeasure& sigma) {
    if (sigma.P_inv) return linalg::gen_eig_max_inv(G, *sigma.P_inv);
    return linalg::gen_eig_max(G, sigma.P);
}

}  // namespace

std::vector<double> gamma_linear_openloop(const LinearSystem& sys, const QuadraticStageCost& cost,
                                          const StateMeasure& sigma, const std::optional<MatrixXd>& P_f, int K) {
    sys.validate();
    if (K < 0) throw std::invalid_argument("gamma_linear_openloop: K must be >= 0");
    for (int i = 0; i < sys.m(); ++i)
        if (cost.u_s(i) < sys.u_lo(i) || cost.u_s(i) > sys.u_hi(i))
            throw std::invalid_argument("gamma_linear_openloop: u_s outside the input box");
    if (!sigma.P_inv && !linalg::is_positive_definite(sigma.P))
        throw std::domain_error("gamma_linear_openloop: P_sigma is not positive definite");
    const MatrixXd Q = cost.state_weight(sys.C);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(K));
    MatrixXd G = Q;
    MatrixXd Ak = sys.A;  // A^k
    for (int k = 1; k <= K; ++k) {
        MatrixXd Gk = G;
        if (P_f) Gk += Ak.transpose() * (*P_f) * Ak;
        out.push_back(gen_max(sym(Gk), sigma));
        G = sym(G + Ak.transpose() * Q * Ak);
        Ak = sys.A * Ak;
    }
    return out;
}

double gamma_bar_linear(const LinearSystem& sys, const QuadraticStageCost& cost, const StateMeasure& sigma,
                        const std::optional<MatrixXd>& P_f, int K) {
    const MatrixXd Q = cost.state_weight(sys.C);
    const MatrixXd Ginf = linalg::dlyap(sys.A, Q);
    double gb = gen_max(Ginf, sigma);
    for (double g : gamma_linear_openloop(sys, cost, sigma, P_f, K)) gb = std::max(gb, g);
    return gb;
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int p : points) s *= static_cast<std::size_t>(std::max(p, 0));
    return points.empty() ? 0 : s;
}

VectorXd GridSpec::point(std::size_t idx) const {
    const std::size_t d = points.size();
    VectorXd x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        const int p = points[i];
        const std::size_t j = idx % static_cast<std::size_t>(p);
        idx /= static_cast<std::size_t>(p);
        x(static_cast<Eigen::Index>(i)) = p == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * j / (p - 1);
    }
    return x;
}

GridGammaResult gamma_nonlinear_grid(const NonlinearSystem& sys, const QuadraticStageCost& cost, GridMeasure measure,
                                     int nu, const GridSpec& grid, int K, double omega, int threads) {
    sys.validate();
    const std::size_t total = grid.size();
    if (total == 0) throw std::invalid_argument("gamma_nonlinear_grid: empty grid");
    if (static_cast<int>(grid.points.size()) != sys.nx || grid.lo.size() != grid.points.size() ||
        grid.hi.size() != grid.points.size())
        throw std::invalid_argument("gamma_nonlinear_grid: grid dimension mismatch");
    if (measure == GridMeasure::Narx && nu < 1) throw std::invalid_argument("gamma_nonlinear_grid: nu must be >= 1");
    const StorageFunction W = measure == GridMeasure::Narx ? narx_storage(nu) : StorageFunction{};
    const bool with_f = omega > 0.0;

    struct Partial {
        std::vector<double> g, gf;
        std::size_t used = 0, skipped = 0, diverged = 0;
    };
    const int T = std::max(1, threads);
    std::vector<Partial> parts(static_cast<std::size_t>(T));
    for (auto& p : parts) {
        p.g.assign(static_cast<std::size_t>(K), 0.0);
        if (with_f) p.gf.assign(static_cast<std::size_t>(K), 0.0);
    }

    auto work = [&](int tid) {
        Partial& P = parts[static_cast<std::size_t>(tid)];
        std::vector<double> costs;  // stage costs along the open-loop run, history first
        for (std::size_t idx = static_cast<std::size_t>(tid); idx < total; idx += static_cast<std::size_t>(T)) {
            VectorXd x = (cost.x_s + grid.point(idx)).cwiseMax(sys.clamp_nonnegative ? 0.0 : -1e300);
            costs.clear();
            double sigma = 0.0;
            const int hist = measure == GridMeasure::Narx ? nu : 0;
            bool ok = true;
            for (int j = 0; j < hist; ++j) {
                costs.push_back(cost.eval(sys.C, x, cost.u_s));
                x = sys.step(x, cost.u_s);
            }
            if (measure == GridMeasure::Narx) {
                std::vector<double> past(costs.rbegin(), costs.rend());
                sigma = W.eval_narx(past);
            } else {
                sigma = cost.ell_min(sys.C, x);
            }
            if (!(sigma > 1e-12)) {
                ++P.skipped;
                continue;
            }
            double J = 0.0;
            for (int k = 1; k <= K; ++k) {
                const double l = cost.eval(sys.C, x, cost.u_s);
                costs.push_back(l);
                J += l;
                x = sys.step(x, cost.u_s);
                if (!x.allFinite() || !std::isfinite(J)) {
                    ok = false;
                    break;
                }
                P.g[static_cast<std::size_t>(k - 1)] = std::max(P.g[static_cast<std::size_t>(k - 1)], J / sigma);
                if (with_f) {
                    double Vf = 0.0;
                    if (measure == GridMeasure::Narx) {
                        std::vector<double> past(costs.rbegin(), costs.rbegin() + nu);
                        Vf = W.eval_narx(past);
                    } else {
                        Vf = cost.ell_min(sys.C, x);
                    }
                    P.gf[static_cast<std::size_t>(k - 1)] =
                        std::max(P.gf[static_cast<std::size_t>(k - 1)], (J + omega * Vf) / sigma);
                }
            }
            if (ok)
                ++P.used;
            else
                ++P.diverged;
        }
    };
    if (T == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < T; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }

    GridGammaResult res;
    res.gamma.assign(static_cast<std::size_t>(K), 0.0);
    if (with_f) res.gamma_f.assign(static_cast<std::size_t>(K), 0.0);
    for (const auto& p : parts) {
        for (int k = 0; k < K; ++k) {
            res.gamma[static_cast<std::size_t>(k)] = std::max(res.gamma[static_cast<std::size_t>(k)], p.g[static_cast<std::size_t>(k)]);
            if (with_f)
                res.gamma_f[static_cast<std::size_t>(k)] =
                    std::max(res.gamma_f[static_cast<std::size_t>(k)], p.gf[static_cast<std::size_t>(k)]);
        }
        res.points_used += p.used;
        res.points_skipped += p.skipped;
        res.points_diverged += p.diverged;
    }
    return res;
}

StorageFunction narx_storage(int nu) {
    if (nu < 1) throw std::invalid_argument("narx_storage: nu must be >= 1");
    StorageFunction W;
    W.kind = StorageKind::NarxWeights;
    W.nu = nu;
    W.eps_o = 1.0 / nu;
    return W;
}

std::vector<double> narx_dissipation_residuals(const StorageFunction& W, const std::vector<double>& stage_costs) {
    std::vector<double> out;
    const int nu = W.nu;
    for (std::size_t t = static_cast<std::size_t>(nu); t + 1 <= stage_costs.size(); ++t) {
        std::vector<double> past, next;
        for (int j = 1; j <= nu; ++j) past.push_back(stage_costs[t - static_cast<std::size_t>(j)]);
        for (int j = 0; j < nu; ++j) next.push_back(stage_costs[t - static_cast<std::size_t>(j)]);
        const double w = W.eval_narx(past);
        const double wn = W.eval_narx(next);
        out.push_back(wn - w + W.eps_o * w - stage_costs[t]);
    }
    return out;
}

std::vector<double> narx_telescoping_residuals(const StorageFunction& W, const std::vector<double>& stage_costs) {
    std::vector<double> out;
    const int nu = W.nu;
    for (std::size_t t = static_cast<std::size_t>(nu); t + 1 <= stage_costs.size(); ++t) {
        std::vector<double> past, next;
        double mean = 0.0;
        for (int j = 1; j <= nu; ++j) {
            past.push_back(stage_costs[t - static_cast<std::size_t>(j)]);
            mean += stage_costs[t - static_cast<std::size_t>(j)] / nu;
        }
        for (int j = 0; j < nu; ++j) next.push_back(stage_costs[t - static_cast<std::size_t>(j)]);
        out.push_back(W.eval_narx(next) - W.eval_narx(past) - stage_costs[t] + mean);
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_grid: need 0 < lo <= hi and n >= 1");
    std::vector<double> g;
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : std::pow(10.0, a + (b - a) * i / (n - 1)));
    return g;
}

MatrixXd dissipation_matrix(const LinearSystem& sys, const QuadraticStageCost& cost, const MatrixXd& P, double eps_o) {
    const int n = sys.n(), m = sys.m();
    const double eta = 1.0 - eps_o;
    const MatrixXd Q = cost.state_weight(sys.C);
    MatrixXd M(n + m, n + m);
    M.topLeftCorner(n, n) = eta * P + Q - sys.A.transpose() * P * sys.A;
    M.topRightCorner(n, m) = -sys.A.transpose() * P * sys.B;
    M.bottomLeftCorner(m, n) = -sys.B.transpose() * P * sys.A;
    M.bottomRightCorner(m, m) = cost.R - sys.B.transpose() * P * sys.B;
    return sym(M);
}

namespace {

struct InfoResult {
    MatrixXd H;
    int iterations = 0;
    bool converged = false;
    bool failed = false;
};

// Inverse of the maximal P with  W(Ax+Bu) <= eta W(x) + x'Qx + u'Ru  for all (x,u),
// augmented by a fictitious input so that H stays invertible.
InfoResult required_supply_info(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R, double eta,
                                double reg, int max_iters, double tol) {
    const int n = static_cast<int>(A.rows());
    const MatrixXd I = MatrixXd::Identity(n, n);
    MatrixXd Wb = sym(B * R.llt().solve(B.transpose()));
    Wb += reg * std::max(Wb.cwiseAbs().maxCoeff(), 1e-300) * I;
    InfoResult res;
    res.H = MatrixXd::Zero(n, n);
    const MatrixXd At = A.transpose();
    for (int it = 1; it <= max_iters; ++it) {
        Eigen::PartialPivLU<MatrixXd> lu(eta * I + Q * res.H);
        const MatrixXd X = lu.solve(At);
        MatrixXd Hn = sym(A * res.H * X + Wb);
        if (!Hn.allFinite()) {
            res.failed = true;
            res.iterations = it;
            return res;
        }
        const double d = (Hn - res.H).cwiseAbs().maxCoeff();
        res.H = std::move(Hn);
        res.iterations = it;
        if (d <= tol * res.H.cwiseAbs().maxCoeff()) {
            res.converged = true;
            break;
        }
    }
    return res;
}

/// Smallest generalized eigenvalue of the dissipation matrix of W = t P against
/// the supply l + eps sigma, in coordinates whitened by H = P^{-1} = L L'.
/// Sigma_w is L' P_sigma L.
double whitened_dissipation(const LinearSystem& sys, const MatrixXd& Q, const MatrixXd& R, const MatrixXd& H,
                            double t, double eps, const MatrixXd& Sigma_w) {
    const int n = sys.n(), m = sys.m();
    Eigen::LLT<MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) throw std::domain_error("whitened_dissipation: H not positive definite");
    const MatrixXd L = llt.matrixL();
    const auto Lt = llt.matrixL();
    const MatrixXd Ah = Lt.solve(MatrixXd(sys.A * L));
    const MatrixXd Bh = Lt.solve(sys.B);
    const MatrixXd Qh = sym(L.transpose() * Q * L);
    MatrixXd M(n + m, n + m);
    M.topLeftCorner(n, n) = t * MatrixXd::Identity(n, n) - eps * Sigma_w + Qh - t * Ah.transpose() * Ah;
    M.topRightCorner(n, m) = -t * Ah.transpose() * Bh;
    M.bottomLeftCorner(m, n) = -t * Bh.transpose() * Ah;
    M.bottomRightCorner(m, m) = R - t * Bh.transpose() * Bh;
    MatrixXd S = MatrixXd::Zero(n + m, n + m);
    S.topLeftCorner(n, n) = Qh + eps * Sigma_w;
    S.bottomRightCorner(m, m) = R;
    S.diagonal().array() += 1e-12 * S.cwiseAbs().maxCoeff();
    return linalg::gen_eig_min(sym(M), sym(S));
}

}  // namespace

StorageSynthesis synthesize_storage_linear(const LinearSystem& sys, const QuadraticStageCost& cost,
                                           const std::vector<double>& eps_grid, const StorageOptions& opt) {
    sys.validate();
    StorageSynthesis out;
    if (linalg::spectral_radius(sys.A) >= 1.0) {
        for (double e : eps_grid) out.candidates.push_back({e, false, 0.0, 0.0, 0.0, 0, "A is not Schur stable"});
        return out;
    }
    const MatrixXd Q = cost.state_weight(sys.C);
    const MatrixXd Ginf = linalg::dlyap(sys.A, Q);
    static const double backoffs[] = {1.0, 1.0 - 1e-12, 1.0 - 1e-10, 1.0 - 1e-8, 1.0 - 1e-6,
                                      1.0 - 1e-4, 0.99, 0.9, 0.5, 0.1};
    double best = std::numeric_limits<double>::infinity();
    for (double eps : eps_grid) {
        StorageCandidate cand;
        cand.eps_o = eps;
        if (!(eps > 0.0) || eps > 1.0) {
            cand.note = "eps_o outside (0,1]";
            out.candidates.push_back(cand);
            continue;
        }
        const InfoResult info = required_supply_info(sys.A, sys.B, Q, cost.R, 1.0 - eps, opt.regularization,
                                                     opt.max_iters, opt.tol);
        cand.iterations = info.iterations;
        if (info.failed || !linalg::is_positive_definite(info.H)) {
            cand.note = "required-supply iteration failed";
            out.candidates.push_back(cand);
            continue;
        }
        if (!info.converged) cand.note = "iteration cap reached";
        const MatrixXd P = linalg::spd_inverse(info.H);
        double t_ok = 0.0;
        for (double t : backoffs) {
            if (whitened_dissipation(sys, Q, cost.R, info.H, t, eps, t * MatrixXd::Identity(sys.n(), sys.n())) >=
                -1e-11) {
                t_ok = t;
                break;
            }
        }
        if (t_ok == 0.0) {
            cand.note = "no feasible scaling";
            out.candidates.push_back(cand);
            continue;
        }
        cand.feasible = true;
        cand.backoff = t_ok;
        const MatrixXd H_scaled = info.H / t_ok;
        cand.gamma_bar = linalg::gen_eig_max_inv(Ginf, H_scaled);
        cand.n_min = n_min_eq8(cand.gamma_bar, eps).n_min;
        out.candidates.push_back(cand);
        if (cand.n_min < best) {
            best = cand.n_min;
            out.found = true;
            out.storage.kind = StorageKind::QuadraticForm;
            out.storage.P_o = t_ok * P;
            out.storage.P_o_inv = H_scaled;
            out.storage.x_s = cost.x_s;
            out.storage.eps_o = eps;
        }
    }
    if (out.found) {
        out.sigma = StateMeasure::quadratic(out.storage.P_o, cost.x_s);
        out.sigma.P_inv = out.storage.P_o_inv;
        auto g = gamma_linear_openloop(sys, cost, out.sigma, std::nullopt, opt.K);
        double gb = linalg::gen_eig_max_inv(Ginf, *out.storage.P_o_inv);
        for (double v : g) gb = std::max(gb, v);
        out.constants = CertificationConstants::storage(std::move(g), out.storage.eps_o);
        out.constants.gamma_bar = gb;
    }
    return out;
}

StorageReport verify_storage(const Plant& plant, const QuadraticStageCost& cost, const StorageFunction& W,
                             const StateMeasure& sigma, double gamma_o_lower, double gamma_o_upper, int samples,
                             std::uint64_t seed, double tol) {
    StorageReport rep;
    const int n = plant_n(plant), m = plant_m(plant);
    const MatrixXd& C = plant_C(plant);
    const VectorXd& lo = plant_u_lo(plant);
    const VectorXd& hi = plant_u_hi(plant);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const double pnorm = W.kind == StorageKind::QuadraticForm ? W.P_o.cwiseAbs().maxCoeff() : 0.0;
    const double snorm = sigma.P.size() ? sigma.P.cwiseAbs().maxCoeff() : 0.0;
    const double qnorm = cost.state_weight(C).cwiseAbs().maxCoeff() + cost.R.cwiseAbs().maxCoeff();

    auto Wval = [&](const VectorXd& x) { return W.kind == StorageKind::Zero ? 0.0 : W.eval(x); };
    for (int s = 0; s < samples; ++s) {
        VectorXd dx(n);
        for (int i = 0; i < n; ++i) dx(i) = nd(rng);
        const double scale_x = std::pow(10.0, 4.0 * ud(rng) - 2.0);
        const VectorXd x = cost.x_s + scale_x * dx;
        VectorXd u(m);
        for (int i = 0; i < m; ++i) u(i) = lo(i) + (hi(i) - lo(i)) * ud(rng);
        const VectorXd xn = plant_step(plant, x, u);
        const double sx = sigma.eval(x);
        const double wx = Wval(x);
        const double l = cost.eval(C, x, u);
        const double mag = (pnorm + snorm + qnorm) * ((x - cost.x_s).squaredNorm() + (xn - cost.x_s).squaredNorm() +
                                                      (u - cost.u_s).squaredNorm()) + 1e-300;
        rep.max_dissipation = std::max(rep.max_dissipation, (Wval(xn) - wx + W.eps_o * sx - l) / mag);
        const double smag = (pnorm + snorm) * (x - cost.x_s).squaredNorm() + 1e-300;
        rep.max_sandwich = std::max(rep.max_sandwich, (gamma_o_lower * sx - wx) / smag);
        rep.max_sandwich = std::max(rep.max_sandwich, (wx - gamma_o_upper * sx) / smag);
        ++rep.samples;
    }
    // For a linear plant and a quadratic storage the dissipation inequality is a
    // matrix inequality; check it exactly as well.
    if (const auto* lin = std::get_if<LinearSystem>(&plant); lin && W.kind == StorageKind::QuadraticForm) {
        const MatrixXd Q = cost.state_weight(C);
        const MatrixXd H = W.P_o_inv ? *W.P_o_inv : linalg::spd_inverse(W.P_o);
        const MatrixXd L = MatrixXd(H.llt().matrixL());
        MatrixXd Sigma_w;
        if (sigma.P_inv) {
            const MatrixXd X = sigma.P_inv->llt().matrixL().solve(L);
            Sigma_w = sym(X.transpose() * X);
        } else {
            Sigma_w = sym(L.transpose() * sigma.P * L);
        }
        rep.max_dissipation =
            std::max(rep.max_dissipation, -whitened_dissipation(*lin, Q, cost.R, H, 1.0, W.eps_o, Sigma_w));
        rep.sampled = false;
    }
    rep.pass = rep.max_dissipation <= tol && rep.max_sandwich <= tol;
    return rep;
}

StorageFunction iss_storage_linear(const LinearSystem& sys, double eps_o) {
    const int n = sys.n(), m = sys.m();
    const InfoResult info = required_supply_info(sys.A, sys.B, MatrixXd::Zero(n, n), MatrixXd::Identity(m, m),
                                                 1.0 - eps_o, 1e-9, 400000, 1e-13);
    if (info.failed || !info.converged) throw std::domain_error("iss_storage_linear: A / sqrt(eta) is not stable");
    StorageFunction W;
    W.kind = StorageKind::QuadraticForm;
    W.P_o_inv = info.H;
    W.P_o = linalg::spd_inverse(info.H);
    W.x_s = VectorXd::Zero(n);
    W.eps_o = eps_o;
    return W;
}

std::pair<StorageFunction, CertificationConstants> rescale_for_input_regularization(const StorageFunction& W,
                                                                                    const CertificationConstants& c,
                                                                                    double r) {
    if (!(r > 0.0)) throw std::invalid_argument("rescale_for_input_regularization: r must be > 0");
    StorageFunction Ws = W;
    if (Ws.kind == StorageKind::QuadraticForm) {
        Ws.P_o = r * W.P_o;
        if (W.P_o_inv) Ws.P_o_inv = *W.P_o_inv / r;
    }
    CertificationConstants cs = c;
    for (double& g : cs.gamma) g /= r;
    cs.gamma_bar = c.gamma_bar / r;
    cs.eps_o = W.eps_o;
    cs.gamma_o_lower = cs.gamma_o_upper = 1.0;
    cs.sigma_mode = SigmaMode::Storage;
    return {Ws, cs};
}

namespace {

double gen_min(const MatrixXd& G, const StateMeasure& sigma) {
    if (sigma.P_inv) return linalg::gen_eig_min_inv(G, *sigma.P_inv);
    return linalg::gen_eig_min(G, sigma.P);
}

}  // namespace

TerminalConstants terminal_scaled_linear(const LinearSystem& sys, const QuadraticStageCost& cost,
                                         const StateMeasure& sigma, double omega, int K, double* omega_t) {
    if (!(omega > 0.0)) throw std::invalid_argument("terminal_scaled_linear: omega must be > 0");
    const MatrixXd Q = cost.state_weight(sys.C);
    const double wt = omega * gen_min(Q, sigma);
    if (!(wt > 0.0)) throw std::domain_error("terminal_scaled_linear: l_min does not dominate sigma");
    if (omega_t) *omega_t = wt;
    const MatrixXd Pf = sigma.P_inv ? MatrixXd(wt * linalg::spd_inverse(*sigma.P_inv)) : MatrixXd(wt * sigma.P);
    auto g = gamma_linear_openloop(sys, cost, sigma, Pf, K);
    TerminalConstants t = terminal_constants_scaled(wt, g.front());
    t.gamma_f = g;
    t.gamma_f_bar = gen_max(linalg::dlyap(sys.A, Q), sigma);
    for (double v : g) t.gamma_f_bar = std::max(t.gamma_f_bar, v);
    return t;
}

TerminalConstants terminal_finite_tail_linear(const LinearSystem& sys, const QuadraticStageCost& cost,
                                              const StateMeasure& sigma, int M, int K) {
    if (M < 1) throw std::invalid_argument("terminal_finite_tail_linear: M must be >= 1");
    const MatrixXd Q = cost.state_weight(sys.C);
    MatrixXd G = MatrixXd::Zero(sys.n(), sys.n());
    MatrixXd Ak = MatrixXd::Identity(sys.n(), sys.n());
    for (int j = 0; j < M; ++j) {
        G = sym(G + Ak.transpose() * Q * Ak);
        Ak = sys.A * Ak;
    }
    if (!linalg::is_positive_definite(G)) throw std::domain_error("terminal_finite_tail_linear: G_M is singular");
    TerminalConstants t;
    t.eps_f = linalg::gen_eig_max(sym(Ak.transpose() * Q * Ak), G);
    t.c_f_lower = gen_min(G, sigma);
    t.c_f_upper = gen_max(G, sigma);
    // gamma_kf: k stage costs followed by the M-step tail, all under u_s
    for (int k = 1; k <= K; ++k) {
        G = sym(G + Ak.transpose() * Q * Ak);
        Ak = sys.A * Ak;
        t.gamma_f.push_back(gen_max(G, sigma));
    }
    t.gamma_f_bar = gen_max(linalg::dlyap(sys.A, Q), sigma);
    for (double v : t.gamma_f) t.gamma_f_bar = std::max(t.gamma_f_bar, v);
    return normalize_terminal(t);
}

TerminalConstants normalize_terminal(TerminalConstants t) {
    if (!t.eps_f_infinite() && t.eps_f < 0.0) t.eps_f = 0.0;
    for (double v : t.gamma_f) t.gamma_f_bar = std::max(t.gamma_f_bar, v);
    if (!t.eps_f_infinite() && !t.gamma_f.empty()) {
        const double mid = t.gamma_f.front() / (1.0 + t.eps_f);
        t.c_f_lower = std::min(t.c_f_lower, mid);
        t.c_f_upper = std::max(t.c_f_upper, mid);
    }
    return t;
}

void write_gamma_csv(const std::string& path, const std::vector<double>& gamma, const std::string& mode, bool sampled) {
    std::ostringstream os;
    os << "k,gamma_k,mode,provenance\n";
    for (std::size_t k = 0; k < gamma.size(); ++k)
        os << (k + 1) << ',' << format_double(gamma[k]) << ',' << mode << ',' << (sampled ? "sampled" : "exact") << '\n';
    write_file_atomic(path, os.str());
}

}  // namespace mpccert
