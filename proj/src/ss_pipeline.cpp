#include "idkit/ss_pipeline.hpp"

#include <cmath>
#include <string>

namespace idkit::ss_pipeline {

RegressorSet build_regressors(RegressorLayout layout, const std::vector<Eigen::VectorXd>& xs,
                              const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y) {
    const std::ptrdiff_t Tx = static_cast<std::ptrdiff_t>(xs.size());
    const std::ptrdiff_t Tu = static_cast<std::ptrdiff_t>(u.size());
    const std::ptrdiff_t Ty = y.size();
    if (Tx < 1 || Tu < 1 || Ty < 1)
        throw std::invalid_argument("build_regressors: empty inputs");
    const Eigen::Index n = xs[0].size();
    const Eigen::Index n_u = u[0].size();

    std::ptrdiff_t t_max = 0;
    Eigen::Index dim = 0;
    if (layout == RegressorLayout::General) {
        // z_t = [xs_{t-1}, u_{t-1}, u_t] -> y_t
        t_max = std::min({Tx, Tu - 1, Ty - 1});
        dim = n + 2 * n_u;
    } else {
        // z_t = [xs1_{t-1}, y_t, u_{t-1}] -> y_{t+1}
        t_max = std::min({Tx, Tu, Ty - 2});
        dim = 2 + n_u;
    }
    if (t_max < 1)
        throw std::invalid_argument("build_regressors: horizon too short for the layout");

    RegressorSet set;
    set.Z.resize(t_max, dim);
    set.targets.resize(t_max);
    for (std::ptrdiff_t t = 1; t <= t_max; ++t) {
        Eigen::VectorXd z(dim);
        if (layout == RegressorLayout::General) {
            z.head(n) = xs[t - 1];
            z.segment(n, n_u) = u[t - 1];
            z.tail(n_u) = u[t];
            set.targets(t - 1) = y(t);
        } else {
            z(0) = xs[t - 1](0);
            z(1) = y(t);
            z.tail(n_u) = u[t - 1];
            set.targets(t - 1) = y(t + 1);
        }
        if (!z.allFinite())
            throw std::invalid_argument("build_regressors: non-finite regressor at step " + std::to_string(t));
        set.Z.row(t - 1) = z.transpose();
    }
    return set;
}

namespace {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const numerical_error& e) {
        throw numerical_error(std::string("run_algorithm1[") + stage + "]: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("run_algorithm1[") + stage + "]: " + e.what());
    }
}

} // namespace

Algorithm1Result run_algorithm1(const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y,
                                const Algorithm1Config& cfg) {
    const std::ptrdiff_t T = y.size();
    if (static_cast<std::ptrdiff_t>(u.size()) != T)
        throw std::invalid_argument("run_algorithm1: inputs and outputs disagree in length");
    if (T < 3)
        throw std::invalid_argument("run_algorithm1: horizon too short");

    // Smooth on (u_0..u_{T-2}, y_1..y_{T-1}), so index t of the trajectory
    // lines up with index t of the data arrays and entry 0 is the prior.
    Algorithm1Result out;
    run_stage("smoothing", [&] {
        Eigen::MatrixXd U(T - 1, cfg.ss_model.n_u);
        for (std::ptrdiff_t t = 0; t + 1 < T; ++t)
            U.row(t) = u[t].transpose();
        const Eigen::VectorXd y_s = y.segment(1, T - 1);
        out.trajectory = smoother::ukf_filter(cfg.ss_model, cfg.theta0, cfg.noise, cfg.weights, U, y_s);
        smoother::urtss_smooth(cfg.ss_model, cfg.theta0, cfg.noise, cfg.weights, U, out.trajectory);
        return 0;
    });

    out.smoothed_initial_state = out.trajectory.smoothed_mean[0];

    run_stage("regressors", [&] {
        out.regressors = build_regressors(cfg.layout, out.trajectory.smoothed_mean, u, y);
        return 0;
    });

    run_stage("identification", [&] {
        Dataset data{out.regressors.Z, out.regressors.targets};
        embed::EmbedConfig ecfg;
        ecfg.gamma = cfg.gamma;
        ecfg.spec = cfg.spec;
        ecfg.max_iters = cfg.max_iters;
        ecfg.theta0 = cfg.theta0;
        if (!cfg.use_kernel)
            out.model.fit = embed::fit_nls(data, cfg.physics, ecfg);
        else if (cfg.physics.affine)
            out.model.fit = embed::fit_affine(data, cfg.physics, cfg.spec, cfg.gamma);
        else
            out.model.fit = embed::fit_nonlinear(data, cfg.physics, ecfg);
        return 0;
    });

    out.model.physics = cfg.physics;
    out.model.spec = cfg.spec;
    return out;
}

namespace {

// Open-loop state track under the identified parameters: x_0 = y_0 * ones,
// x_t = f(x_{t-1}, u_{t-1}, theta*).
std::vector<Eigen::VectorXd> open_loop_states(const PredictorModel& model, const Algorithm1Config& cfg,
                                              const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y) {
    const std::ptrdiff_t T = y.size();
    std::vector<Eigen::VectorXd> xs(T);
    xs[0] = Eigen::VectorXd::Constant(cfg.ss_model.n, y(0));
    for (std::ptrdiff_t t = 1; t < T; ++t) {
        xs[t] = cfg.ss_model.f(xs[t - 1], u[t - 1], model.fit.theta_star);
        if (!xs[t].allFinite())
            throw numerical_error("open-loop state track diverged at step " + std::to_string(t));
    }
    return xs;
}

EvalReport evaluate_cts(const PredictorModel& model, const Algorithm1Config& cfg,
                        const std::vector<Eigen::VectorXd>& xs,
                        const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y,
                        bool feed_back) {
    if (cfg.layout != RegressorLayout::Cts)
        throw std::invalid_argument("evaluate: output-feedback (cts) layout required");
    const std::ptrdiff_t T = y.size();
    if (T < 3 || static_cast<std::ptrdiff_t>(u.size()) != T)
        throw std::invalid_argument("evaluate: need matching u/y with at least three samples");

    const Eigen::Index n_u = u[0].size();
    EvalReport rep;
    rep.predicted = y;  // entries 0 and 1 seed the recursion and stay unscored
    rep.scored_from = 2;

    for (std::ptrdiff_t t = 1; t + 1 < T; ++t) {
        Eigen::VectorXd z(2 + n_u);
        z(0) = xs[t - 1](0);
        z(1) = feed_back ? rep.predicted(t) : y(t);
        z.tail(n_u) = u[t - 1];
        const double yhat = model.predict(z);
        if (!std::isfinite(yhat))
            throw numerical_error("evaluate: prediction diverged at step " + std::to_string(t + 1));
        rep.predicted(t + 1) = yhat;
    }

    const Eigen::Index m = T - rep.scored_from;
    const Eigen::VectorXd y_sc = y.segment(rep.scored_from, m);
    const Eigen::VectorXd p_sc = rep.predicted.segment(rep.scored_from, m);
    rep.rmse = rmse(y_sc, p_sc);
    rep.fit = fit_percent(y_sc, p_sc);
    return rep;
}

} // namespace

EvalReport evaluate_prediction(const PredictorModel& model, const Algorithm1Config& cfg,
                               const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y) {
    return evaluate_cts(model, cfg, open_loop_states(model, cfg, u, y), u, y, false);
}

EvalReport evaluate_prediction(const PredictorModel& model, const Algorithm1Config& cfg,
                               const std::vector<Eigen::VectorXd>& xs,
                               const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y) {
    if (static_cast<std::ptrdiff_t>(xs.size()) < y.size())
        throw std::invalid_argument("evaluate_prediction: state track shorter than the data");
    return evaluate_cts(model, cfg, xs, u, y, false);
}

EvalReport evaluate_simulation(const PredictorModel& model, const Algorithm1Config& cfg,
                               const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y) {
    return evaluate_cts(model, cfg, open_loop_states(model, cfg, u, y), u, y, true);
}

} // namespace idkit::ss_pipeline
