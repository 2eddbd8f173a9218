#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "idkit/experiments.hpp"
#include "idkit/krr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace idkit;

namespace {

class PhaseTimer {
public:
    void start(const std::string& name) {
        name_ = name;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto t1 = std::chrono::steady_clock::now();
        seconds_[name_] += std::chrono::duration<double>(t1 - t0_).count();
    }
    const std::map<std::string, double>& seconds() const { return seconds_; }

private:
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
    std::map<std::string, double> seconds_;
};

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    std::ofstream out(dir / name);
    if (!out)
        throw std::invalid_argument("cannot write " + (dir / name).string());
    out.precision(10);
    return out;
}

std::string join_theta(const Eigen::VectorXd& theta) {
    std::string s;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (i)
            s += ';';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.8g", theta(i));
        s += buf;
    }
    return s;
}

void write_manifest(const fs::path& dir, const std::string& experiment, const json& config,
                    const PhaseTimer& timer, const json& extra = json::object()) {
    json m;
    m["experiment"] = experiment;
    m["config"] = config;
    m["versions"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"cli11", CLI11_VERSION},
        {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                     "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
    };
    m["timings_s"] = timer.seconds();
    for (auto it = extra.begin(); it != extra.end(); ++it)
        m[it.key()] = it.value();
    std::ofstream out = open_out(dir, "manifest.json");
    out << m.dump(2) << "\n";
}

struct Options {
    std::uint64_t seed = 0;
    std::string out = "runs/out";
    std::string data;
    double gamma = -1.0;  // < 0: use the experiment default
    double sigma = -1.0;
    std::string grid;  // "NxM"
    int runs = 0;      // 0: default per experiment
    unsigned jobs = 1;
    bool no_kernel = false;
    bool ut_explicit_weights = false;
    bool warm_start = false;
};

std::pair<int, int> parse_grid(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos)
        throw std::invalid_argument("--grid expects NxM, e.g. 10x10");
    int n = 0, m = 0;
    try {
        n = std::stoi(s.substr(0, x));
        m = std::stoi(s.substr(x + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("--grid expects NxM, e.g. 10x10");
    }
    if (n < 1 || m < 1)
        throw std::invalid_argument("--grid sizes must be positive");
    return {n, m};
}

// -------------------------------------------------------------- academic

int cmd_academic(const Options& opt) {
    PhaseTimer timer;
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    experiments::AcademicConfig cfg;
    cfg.seed = opt.seed;
    const double sigma_prop = opt.sigma > 0 ? opt.sigma : 0.54;
    const double gamma_prop = opt.gamma > 0 ? opt.gamma : 0.11;
    const double sigma_dm = 0.1, gamma_dm = 0.01;
    const double sigma_krr = 10.0, gamma_krr = 0.01;

    timer.start("generate");
    const experiments::AcademicData data = experiments::gen_academic(cfg);
    timer.stop();

    timer.start("fit");
    const auto table =
        experiments::academic_table(data, cfg, sigma_prop, gamma_prop, sigma_dm, gamma_dm, sigma_krr, gamma_krr);
    timer.stop();

    std::ofstream out = open_out(dir, "methods.csv");
    out << "method,sigma,gamma,theta_err,rmse_test,fit_test,theta_hat\n";
    for (const auto& row : table) {
        out << experiments::method_name(row.method) << "," << row.sigma << "," << row.gamma << ","
            << row.theta_err << "," << row.rmse_tst << "," << row.fit_tst << "," << join_theta(row.theta_hat)
            << "\n";
        std::printf("%-9s rmse_test %.4f  fit_test %7.3f%%  theta_err %s\n",
                    experiments::method_name(row.method), row.rmse_tst, row.fit_tst,
                    std::isnan(row.theta_err) ? "-" : std::to_string(row.theta_err).c_str());
    }

    const json config = {{"seed", cfg.seed},          {"sigma_proposed", sigma_prop},
                         {"gamma_proposed", gamma_prop}, {"sigma_dm", sigma_dm},
                         {"gamma_dm", gamma_dm},      {"sigma_krr", sigma_krr},
                         {"gamma_krr", gamma_krr},    {"noise_std", cfg.noise_std},
                         {"n_train", cfg.n_train},    {"n_val", cfg.n_val},
                         {"n_test", cfg.n_test}};
    write_manifest(dir, "academic", config, timer);
    return 0;
}

// ------------------------------------------------------------------ grid

int cmd_grid(const Options& opt) {
    PhaseTimer timer;
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    experiments::AcademicConfig cfg;
    cfg.seed = opt.seed;
    int ns = 50, ng = 50;
    if (!opt.grid.empty())
        std::tie(ns, ng) = parse_grid(opt.grid);
    const auto grids = experiments::GridSearchConfig::log_grid(ns, ng);

    timer.start("generate");
    const experiments::AcademicData data = experiments::gen_academic(cfg);
    timer.stop();

    timer.start("sweep");
    const experiments::GridResult res =
        experiments::grid_search(experiments::Method::Proposed, data.train, data.val, experiments::academic_physics(),
                                 kernels::KernelFamily::Laplacian, grids, opt.jobs);
    timer.stop();

    std::ofstream surf = open_out(dir, "surface.csv");
    surf << "sigma,gamma,val_rmse\n";
    for (int i = 0; i < grids.sigmas.size(); ++i)
        for (int j = 0; j < grids.gammas.size(); ++j)
            surf << grids.sigmas(i) << "," << grids.gammas(j) << "," << res.surface(i, j) << "\n";

    std::ofstream sweep = open_out(dir, "gamma_sweep.csv");
    sweep << "gamma,val_rmse\n";
    for (int j = 0; j < grids.gammas.size(); ++j)
        sweep << grids.gammas(j) << "," << res.surface(res.i, j) << "\n";

    std::printf("argmin sigma %.4f  gamma %.4f  val_rmse %.4f  (failed cells: %d)\n", res.sigma, res.gamma,
                res.val_rmse, res.failed_cells);

    const json config = {{"seed", cfg.seed}, {"grid", std::to_string(ns) + "x" + std::to_string(ng)},
                         {"jobs", opt.jobs}};
    const json extra = {{"sigma_star", res.sigma},
                        {"gamma_star", res.gamma},
                        {"val_rmse", res.val_rmse},
                        {"failed_cells", res.failed_cells}};
    write_manifest(dir, "grid", config, timer, extra);
    return 0;
}

// ------------------------------------------------------------ montecarlo

int cmd_montecarlo(const Options& opt) {
    PhaseTimer timer;
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    experiments::AcademicConfig base;
    base.seed = opt.seed;
    const int n_runs = opt.runs > 0 ? opt.runs : 200;
    int ns = 10, ng = 10;
    if (!opt.grid.empty())
        std::tie(ns, ng) = parse_grid(opt.grid);
    const auto grids = experiments::GridSearchConfig::log_grid(ns, ng);

    timer.start("runs");
    const experiments::MonteCarloResult res = experiments::monte_carlo(n_runs, base, grids, opt.jobs);
    timer.stop();

    std::ofstream runs = open_out(dir, "runs.csv");
    runs << "run,seed,method,sigma,gamma,theta_err,rmse_test,fit_test\n";
    for (const auto& row : res.rows)
        runs << row.run << "," << row.seed << "," << experiments::method_name(row.score.method) << ","
             << row.score.sigma << "," << row.score.gamma << "," << row.score.theta_err << ","
             << row.score.rmse_tst << "," << row.score.fit_tst << "\n";

    std::ofstream table = open_out(dir, "stats.csv");
    table << "method,theta_err_mean,theta_err_std,rmse_mean,rmse_std,fit_mean,fit_std\n";
    for (int m = 0; m < 5; ++m) {
        const auto method = static_cast<experiments::Method>(m);
        const auto& st = res.stats[m];
        table << experiments::method_name(method) << "," << st.theta_err_mean << "," << st.theta_err_std << ","
              << st.rmse_mean << "," << st.rmse_std << "," << st.fit_mean << "," << st.fit_std << "\n";
        std::printf("%-9s theta_err %.3f+-%.3f  rmse %.3f+-%.3f  fit %.2f+-%.2f\n",
                    experiments::method_name(method), st.theta_err_mean, st.theta_err_std, st.rmse_mean,
                    st.rmse_std, st.fit_mean, st.fit_std);
    }
    if (res.failures)
        std::printf("failed runs: %d of %d (excluded)\n", res.failures, res.n_runs);

    const json config = {{"seed", base.seed},
                         {"runs", n_runs},
                         {"grid", std::to_string(ns) + "x" + std::to_string(ng)},
                         {"jobs", opt.jobs}};
    const json extra = {{"failures", res.failures}};
    write_manifest(dir, "montecarlo", config, timer, extra);
    return 0;
}

// ------------------------------------------------------------------- cts

int cmd_cts(const Options& opt) {
    PhaseTimer timer;
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    experiments::CtsDataset ds;
    json dataset_note;
    if (!opt.data.empty()) {
        const fs::path est = fs::path(opt.data) / "cts_est.csv";
        const fs::path val = fs::path(opt.data) / "cts_val.csv";
        ds = experiments::load_cts_csv(est.string(), val.string());
        dataset_note = {{"kind", "csv"}, {"est", est.string()}, {"val", val.string()}};
    } else if (fs::exists("data/cts_est.csv") && fs::exists("data/cts_val.csv")) {
        ds = experiments::load_cts_csv("data/cts_est.csv", "data/cts_val.csv");
        dataset_note = {{"kind", "csv"}, {"est", "data/cts_est.csv"}, {"val", "data/cts_val.csv"}};
    } else {
        const experiments::SynthCts synth = experiments::gen_cts_synthetic(opt.seed);
        ds = synth.data;
        dataset_note = {{"kind", "synthetic"}, {"k_true", join_theta(synth.k_true)}};
        std::printf("no dataset found; using the synthetic self-test generator (seed %llu)\n",
                    static_cast<unsigned long long>(opt.seed));
    }

    experiments::CtsConfig cfg;
    if (opt.gamma > 0)
        cfg.gamma = opt.gamma;
    if (opt.sigma > 0)
        cfg.sigma = opt.sigma;
    cfg.no_kernel = opt.no_kernel;
    cfg.ut_explicit_weights = opt.ut_explicit_weights;
    cfg.warm_start = opt.warm_start;

    timer.start("identify");
    const experiments::CtsResult res = experiments::run_cts(ds, cfg);
    timer.stop();

    std::ofstream table = open_out(dir, "variants.csv");
    table << "variant,split,pred_rmse,pred_fit,sim_rmse,sim_fit\n";
    auto emit = [&](const char* variant, const experiments::CtsVariantResult& var) {
        for (const auto& [split, ev] : {std::pair{"est", var.est}, std::pair{"val", var.val}}) {
            table << variant << "," << split << "," << ev.pred_rmse << "," << ev.pred_fit << "," << ev.sim_rmse
                  << "," << ev.sim_fit << "\n";
            std::printf("%-12s %-3s  pred rmse %.4f fit %6.2f%%   sim rmse %.4f fit %6.2f%%\n", variant, split,
                        ev.pred_rmse, ev.pred_fit, ev.sim_rmse, ev.sim_fit);
        }
        std::printf("%-12s k_hat [%s]\n", variant, join_theta(var.k_hat).c_str());
    };
    if (res.kernel_ran)
        emit("kernel", res.kernel);
    emit("physics_only", res.physics_only);
    if (res.sqrt_guard_hits)
        std::printf("sqrt guard engaged %ld times\n", res.sqrt_guard_hits);

    std::ofstream overlay = open_out(dir, "overlay.csv");
    overlay << "t,y,pred,sim\n";
    for (Eigen::Index t = 0; t < res.val_y.size(); ++t)
        overlay << t << "," << res.val_y(t) << "," << res.val_pred(t) << "," << res.val_sim(t) << "\n";

    const json config = {{"seed", opt.seed},
                         {"gamma", cfg.gamma},
                         {"sigma", cfg.sigma},
                         {"no_kernel", cfg.no_kernel},
                         {"ut_explicit_weights", cfg.ut_explicit_weights},
                         {"warm_start", cfg.warm_start},
                         {"Ts", ds.Ts}};
    json extra = {{"dataset", dataset_note},
                  {"sqrt_guard_hits", res.sqrt_guard_hits},
                  {"k_hat_physics_only", join_theta(res.physics_only.k_hat)},
                  {"smoothed_initial_state", join_theta(res.smoothed_initial_state)}};
    if (res.kernel_ran)
        extra["k_hat_kernel"] = join_theta(res.kernel.k_hat);
    write_manifest(dir, "cts", config, timer, extra);
    return 0;
}

// -------------------------------------------------------------- selftest

// Minimal Kalman filter/smoother for a linear system, written directly from
// the closed-form recursions so the sigma-point code has an independent
// reference inside the shipped binary as well.
struct LinearSystem {
    Eigen::MatrixXd A, B;
    Eigen::RowVectorXd C;
    Eigen::MatrixXd Q, P0;
    double R = 0.1;
    Eigen::VectorXd x0;
};

void linear_kf_rts(const LinearSystem& sys, const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                   std::vector<Eigen::VectorXd>& xf, std::vector<Eigen::VectorXd>& xs) {
    const int T = static_cast<int>(y.size());
    const int n = static_cast<int>(sys.x0.size());
    std::vector<Eigen::VectorXd> mp(T + 1), mf(T + 1);
    std::vector<Eigen::MatrixXd> Pp(T + 1), Pf(T + 1);
    mf[0] = sys.x0;
    Pf[0] = sys.P0;
    for (int t = 1; t <= T; ++t) {
        mp[t] = sys.A * mf[t - 1] + sys.B * U.row(t - 1).transpose();
        Pp[t] = sys.A * Pf[t - 1] * sys.A.transpose() + sys.Q;
        const double s = (sys.C * Pp[t] * sys.C.transpose())(0) + sys.R;
        const Eigen::VectorXd k = Pp[t] * sys.C.transpose() / s;
        mf[t] = mp[t] + k * (y(t - 1) - (sys.C * mp[t])(0));
        Pf[t] = (Eigen::MatrixXd::Identity(n, n) - k * sys.C) * Pp[t];
    }
    std::vector<Eigen::VectorXd> ms(T + 1);
    std::vector<Eigen::MatrixXd> Ps(T + 1);
    ms[T] = mf[T];
    Ps[T] = Pf[T];
    for (int t = T - 1; t >= 0; --t) {
        const Eigen::MatrixXd G = Pf[t] * sys.A.transpose() * Pp[t + 1].inverse();
        ms[t] = mf[t] + G * (ms[t + 1] - mp[t + 1]);
        Ps[t] = Pf[t] + G * (Ps[t + 1] - Pp[t + 1]) * G.transpose();
    }
    xf = mf;
    xs = ms;
}

int cmd_selftest(const Options& opt) {
    int passed = 0, failed = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
        (ok ? passed : failed) += 1;
    };
    Rng rng(opt.seed + 17);

    {  // weighting-matrix identities
        bool ok = true;
        for (int rep = 0; rep < 20 && ok; ++rep) {
            const int T = 3 + rep % 12;
            const int d = 1 + rep % 3;
            const Eigen::MatrixXd X =
                Eigen::MatrixXd::NullaryExpr(T, d, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-2, 2); });
            kernels::KernelSpec spec;
            switch (rep % 4) {
            case 0: spec = kernels::KernelSpec::gaussian(0.7); break;
            case 1: spec = kernels::KernelSpec::laplacian(1.3); break;
            case 2: spec = kernels::KernelSpec::polynomial(0.5, 2); break;
            default: spec = kernels::KernelSpec::linear(); break;
            }
            const double gamma = 0.05 + 0.3 * (rep % 5);
            const Eigen::MatrixXd K = kernels::gram_matrix(spec, X).K;
            const Eigen::MatrixXd Psi = embed::psi_matrix(K, gamma);
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(T, T);
            const Eigen::MatrixXd Psi1 = I - K * Psi;
            const Eigen::MatrixXd Psi2 = gamma * Psi.transpose() * K * Psi;
            ok = ok && ((Psi1.transpose() * Psi1 + Psi2) - gamma * Psi).norm() <= 1e-9 * (gamma * Psi).norm();
            ok = ok && ((K + gamma * I) * Psi - I).norm() <= 1e-9 * std::sqrt(static_cast<double>(T));
        }
        check("weighting-matrix identities", ok);
    }

    {  // sigma-point filter vs linear closed form
        bool ok = true;
        for (int rep = 0; rep < 3 && ok; ++rep) {
            LinearSystem sys;
            sys.A = Eigen::MatrixXd::NullaryExpr(2, 2, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-0.4, 0.4); });
            sys.A.diagonal().array() += 0.4;
            sys.B = Eigen::MatrixXd::NullaryExpr(2, 1, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
            sys.C = Eigen::RowVectorXd::NullaryExpr(1, 2, [&](Eigen::Index, Eigen::Index) { return rng.uniform(0.5, 1.5); });
            sys.Q = 0.05 * Eigen::MatrixXd::Identity(2, 2);
            sys.P0 = 0.3 * Eigen::MatrixXd::Identity(2, 2);
            sys.R = 0.1;
            sys.x0 = rng.normal_vector(2);
            const int T = 40;
            const Eigen::MatrixXd U = Eigen::MatrixXd::NullaryExpr(T, 1, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
            Eigen::VectorXd y(T);
            Eigen::VectorXd x = sys.x0;
            for (int t = 0; t < T; ++t) {
                x = sys.A * x + sys.B * U.row(t).transpose() + 0.1 * rng.normal_vector(2);
                y(t) = (sys.C * x)(0) + 0.1 * rng.normal();
            }

            smoother::StateSpaceModel model;
            model.n = 2;
            model.n_u = 1;
            model.f = [&sys](const Eigen::VectorXd& xx, const Eigen::VectorXd& uu, const Eigen::VectorXd&) {
                return Eigen::VectorXd(sys.A * xx + sys.B * uu);
            };
            model.g = [&sys](const Eigen::VectorXd& xx, const Eigen::VectorXd&, const Eigen::VectorXd&) {
                return (sys.C * xx)(0);
            };
            smoother::NoiseConfig noise{sys.Q, sys.R, sys.P0, sys.x0};
            const auto w = smoother::UtWeights::wan_merwe(2);
            auto traj = smoother::ukf_filter(model, Eigen::VectorXd(), noise, w, U, y);
            smoother::urtss_smooth(model, Eigen::VectorXd(), noise, w, U, traj);

            std::vector<Eigen::VectorXd> xf, xs;
            linear_kf_rts(sys, U, y, xf, xs);
            for (int t = 0; t <= T && ok; ++t) {
                ok = ok && (traj.filtered_mean[t] - xf[t]).norm() <= 1e-8;
                ok = ok && (traj.smoothed_mean[t] - xs[t]).norm() <= 1e-8;
            }
        }
        check("sigma-point filter/smoother matches the linear closed form", ok);
    }

    {  // finite-difference gradient consistency of the reduced objective
        bool ok = true;
        for (int rep = 0; rep < 5 && ok; ++rep) {
            const int T = 25;
            Dataset data;
            data.X = Eigen::MatrixXd::NullaryExpr(T, 1, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
            data.y = rng.normal_vector(T);
            const auto physics = experiments::academic_physics();
            embed::EmbedProblem problem(data, physics, kernels::KernelSpec::laplacian(0.8), 0.2);
            const Eigen::VectorXd th = rng.normal_vector(5);
            for (int i = 0; i < 5 && ok; ++i) {
                auto fd = [&](double h) {
                    Eigen::VectorXd tp = th, tm = th;
                    tp(i) += h;
                    tm(i) -= h;
                    return (problem.reduced_objective(tp) - problem.reduced_objective(tm)) / (2 * h);
                };
                const double g1 = fd(1e-4), g2 = fd(1e-5);
                ok = ok && std::abs(g1 - g2) <= 1e-3 * (1.0 + std::abs(g1));
            }
        }
        check("finite-difference gradients are step-size stable", ok);
    }

    {  // closed form vs iterative optimizer
        bool ok = true;
        for (int rep = 0; rep < 5 && ok; ++rep) {
            const int T = 30;
            Dataset data;
            data.X = Eigen::MatrixXd::NullaryExpr(T, 1, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
            data.y = rng.normal_vector(T);
            const auto physics = experiments::academic_physics();
            embed::EmbedProblem problem(data, physics, kernels::KernelSpec::gaussian(0.9), 0.15);
            const auto closed = embed::fit_affine(problem);
            embed::EmbedConfig ecfg;
            ecfg.theta0 = Eigen::VectorXd::Zero(5);
            const auto iter = embed::fit_nonlinear(problem, ecfg);
            ok = (closed.theta_star - iter.theta_star).norm() <= 1e-5 * (1.0 + closed.theta_star.norm());
        }
        check("closed form agrees with the iterative optimizer", ok);
    }

    {  // reductions: no physics -> ridge weights; huge gamma -> least squares
        const int T = 40;
        Dataset data;
        data.X = Eigen::MatrixXd::NullaryExpr(T, 1, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
        data.y = rng.normal_vector(T);
        const auto spec = kernels::KernelSpec::laplacian(1.0);
        const auto puree = embed::fit_krr_only(data, spec, 0.3);
        const auto direct = krr::krr_weights(kernels::gram_matrix(spec, data.X).K, data.y, 0.3);
        bool ok = (puree.omega_star - direct).norm() <= 1e-8;

        const auto physics = experiments::academic_physics();
        const auto big = embed::fit_affine(data, physics, spec, 1e12);
        const auto ls = embed::fit_ls(data, physics);
        ok = ok && (big.theta_star - ls.theta_star).norm() <= 1e-4 * (1.0 + ls.theta_star.norm());
        check("pure-kernel and large-gamma reductions", ok);
    }

    {  // metric spot values
        Eigen::VectorXd y(2), yh(2);
        y << 0, 2;
        yh << 1, 1;
        bool ok = std::abs(rmse(y, yh) - 1.0) <= 1e-12 && std::abs(fit_percent(y, yh)) <= 1e-9;
        ok = ok && std::abs(fit_percent(y, y) - 100.0) <= 1e-12;
        check("error metrics reproduce hand-computed values", ok);
    }

    std::printf("selftest: %d passed, %d failed\n", passed, failed);
    return failed == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"physics-informed kernel system identification toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key=value file mirrored by the flags (flags win)");

    Options opt;
    app.add_option("--seed", opt.seed, "master RNG seed");
    app.add_option("--out", opt.out, "output directory");
    app.add_option("--data", opt.data, "directory holding cts_est.csv / cts_val.csv");
    app.add_option("--gamma", opt.gamma, "regularization weight override");
    app.add_option("--sigma", opt.sigma, "kernel bandwidth override");
    app.add_option("--grid", opt.grid, "hyperparameter grid size NxM");
    app.add_option("--runs", opt.runs, "number of Monte Carlo runs");
    app.add_option("--jobs", opt.jobs, "worker threads");
    app.add_flag("--no-kernel", opt.no_kernel, "disable the kernel correction (cts)");
    app.add_flag("--ut-explicit-weights", opt.ut_explicit_weights, "fixed explicit sigma-point weights a=2.74, wm0=0.33, wc0=2.33, wi=0.67 (cts)");
    app.add_flag("--warm-start", opt.warm_start, "seed the kernel fit from a physics-only pass (cts)");

    app.add_subcommand("academic", "fixed-hyperparameter method comparison table");
    app.add_subcommand("grid", "validation-RMSE hyperparameter sweep");
    app.add_subcommand("montecarlo", "perturbed-parameter statistical study");
    app.add_subcommand("cts", "two-tank benchmark identification");
    app.add_subcommand("selftest", "built-in oracle and property checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand("academic"))
            return cmd_academic(opt);
        if (app.got_subcommand("grid"))
            return cmd_grid(opt);
        if (app.got_subcommand("montecarlo"))
            return cmd_montecarlo(opt);
        if (app.got_subcommand("cts"))
            return cmd_cts(opt);
        return cmd_selftest(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
}
