#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "idkit/ss_pipeline.hpp"

using namespace idkit;
using ss_pipeline::RegressorLayout;

namespace {

std::vector<Eigen::VectorXd> scalars(std::initializer_list<double> vals) {
    std::vector<Eigen::VectorXd> out;
    for (double v : vals)
        out.push_back(Eigen::VectorXd::Constant(1, v));
    return out;
}

Eigen::VectorXd vec(std::initializer_list<double> vals) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals)
        v(i++) = x;
    return v;
}

} // namespace

TEST_CASE("output-feedback regressors pair the lagged state, current output, and lagged input") {
    const auto set = ss_pipeline::build_regressors(RegressorLayout::Cts, scalars({7, 8, 9}),
                                                   scalars({4, 5, 6}), vec({1, 2, 3}));
    REQUIRE(set.Z.rows() == 1);
    REQUIRE(set.Z.cols() == 3);
    CHECK(set.Z(0, 0) == 7.0);
    CHECK(set.Z(0, 1) == 2.0);
    CHECK(set.Z(0, 2) == 4.0);
    CHECK(set.targets(0) == 3.0);
}

TEST_CASE("general regressors stack the lagged state with both inputs") {
    const auto set = ss_pipeline::build_regressors(RegressorLayout::General, scalars({7, 8, 9}),
                                                   scalars({4, 5, 6}), vec({1, 2, 3}));
    REQUIRE(set.Z.rows() == 2);
    REQUIRE(set.Z.cols() == 3);
    CHECK(set.Z.row(0) == Eigen::RowVector3d(7, 4, 5));
    CHECK(set.targets(0) == 2.0);
    CHECK(set.Z.row(1) == Eigen::RowVector3d(8, 5, 6));
    CHECK(set.targets(1) == 3.0);
}

TEST_CASE("regressor construction rejects a horizon that leaves no rows") {
    CHECK_THROWS_WITH_AS(ss_pipeline::build_regressors(RegressorLayout::Cts, scalars({7}),
                                                       scalars({4}), vec({1, 2})),
                         doctest::Contains("horizon too short"), std::invalid_argument);
}

TEST_CASE("non-finite smoothed states are rejected during regressor construction") {
    auto xs = scalars({7, 8, 9});
    xs[0](0) = std::nan("");
    CHECK_THROWS_AS(ss_pipeline::build_regressors(RegressorLayout::Cts, xs, scalars({4, 5, 6}),
                                                  vec({1, 2, 3})),
                    std::invalid_argument);
}

namespace {

// scalar linear plant used by the end-to-end checks
ss_pipeline::Algorithm1Config linear_config(bool use_kernel) {
    ss_pipeline::Algorithm1Config cfg;
    cfg.ss_model.n = 1;
    cfg.ss_model.n_u = 1;
    cfg.ss_model.f = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(1, 0.8 * x(0) + 0.5 * u(0));
    };
    cfg.ss_model.g = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return x(0);
    };
    cfg.noise.P_e = 0.01 * Eigen::MatrixXd::Identity(1, 1);
    cfg.noise.P_w = 0.01;
    cfg.noise.P0 = Eigen::MatrixXd::Identity(1, 1);
    cfg.noise.x0 = Eigen::VectorXd::Zero(1);
    cfg.weights = smoother::UtWeights::wan_merwe(1);
    // one-step output model on z = [x_{t-1}, u_{t-1}, u_t]
    cfg.physics = embed::PhysicsModel::affine_pair(
        2, [](const Eigen::VectorXd&) { return 0.0; },
        [](const Eigen::VectorXd& z) {
            return (Eigen::VectorXd(2) << z(0), z(1)).finished();
        });
    cfg.theta0 = Eigen::VectorXd::Zero(2);
    cfg.spec = kernels::KernelSpec::gaussian(1.5);
    cfg.gamma = 0.2;
    cfg.layout = RegressorLayout::General;
    cfg.use_kernel = use_kernel;
    return cfg;
}

void simulate_linear(Rng& rng, int T, std::vector<Eigen::VectorXd>& u, Eigen::VectorXd& y) {
    u.resize(T);
    y.resize(T);
    double x = 0.0;
    for (int t = 0; t < T; ++t) {
        u[t] = Eigen::VectorXd::Constant(1, rng.uniform(-1, 1));
        y(t) = x + 0.05 * rng.normal();
        x = 0.8 * x + 0.5 * u[t](0) + 0.05 * rng.normal();
    }
}

} // namespace

TEST_CASE("the full pipeline recovers the one-step map of a linear plant") {
    Rng rng(83);
    std::vector<Eigen::VectorXd> u;
    Eigen::VectorXd y;
    simulate_linear(rng, 150, u, y);
    const auto cfg = linear_config(false);
    const auto res = ss_pipeline::run_algorithm1(u, y, cfg);
    // y_t ~ 0.8 x_{t-1} + 0.5 u_{t-1}
    CHECK(res.model.fit.theta_star(0) == doctest::Approx(0.8).epsilon(0.25));
    CHECK(res.model.fit.theta_star(1) == doctest::Approx(0.5).epsilon(0.25));
    CHECK(res.smoothed_initial_state.size() == 1);
    REQUIRE(res.trajectory.smoothed_mean.size() == 150);
    CHECK(static_cast<Eigen::Index>(res.regressors.Z.rows()) == res.regressors.targets.size());
}

TEST_CASE("kernel-on pipeline completes and keeps everything finite") {
    Rng rng(89);
    std::vector<Eigen::VectorXd> u;
    Eigen::VectorXd y;
    simulate_linear(rng, 100, u, y);
    const auto cfg = linear_config(true);
    const auto res = ss_pipeline::run_algorithm1(u, y, cfg);
    CHECK(res.model.fit.theta_star.allFinite());
    CHECK(res.model.fit.omega_star.allFinite());
    CHECK(res.model.fit.omega_star.size() == res.regressors.targets.size());
}

TEST_CASE("pipeline failures carry the failing stage in the message") {
    Rng rng(97);
    std::vector<Eigen::VectorXd> u;
    Eigen::VectorXd y;
    simulate_linear(rng, 20, u, y);
    auto cfg = linear_config(false);
    cfg.noise.x0 = Eigen::VectorXd::Zero(2);  // wrong state dimension
    try {
        ss_pipeline::run_algorithm1(u, y, cfg);
        FAIL("expected a failure");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("run_algorithm1[smoothing]") != std::string::npos);
    }
    CHECK_THROWS_AS(ss_pipeline::run_algorithm1({u[0], u[1]}, y.head(2), cfg), std::invalid_argument);
}

namespace {

// CTS-style scalar plant: the input drifts slowly so u_{t-1} is an adequate
// stand-in for u_t inside the output-feedback regressor.
ss_pipeline::Algorithm1Config drift_config() {
    ss_pipeline::Algorithm1Config cfg;
    cfg.ss_model.n = 1;
    cfg.ss_model.n_u = 1;
    cfg.ss_model.f = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(1, 0.9 * x(0) + 0.2 * u(0));
    };
    cfg.ss_model.g = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return x(0);
    };
    cfg.noise.P_e = 0.01 * Eigen::MatrixXd::Identity(1, 1);
    cfg.noise.P_w = 0.01;
    cfg.noise.P0 = Eigen::MatrixXd::Identity(1, 1);
    cfg.weights = smoother::UtWeights::wan_merwe(1);
    cfg.physics = embed::PhysicsModel::affine_pair(
        3, [](const Eigen::VectorXd&) { return 0.0; },
        [](const Eigen::VectorXd& z) { return Eigen::VectorXd(z); });
    cfg.theta0 = Eigen::VectorXd::Zero(3);
    cfg.spec = kernels::KernelSpec::gaussian(2.0);
    cfg.gamma = 0.3;
    cfg.layout = RegressorLayout::Cts;
    return cfg;
}

void simulate_drift(Rng& rng, int T, std::vector<Eigen::VectorXd>& u, Eigen::VectorXd& y) {
    u.resize(T);
    y.resize(T);
    double x = 0.5;
    for (int t = 0; t < T; ++t) {
        u[t] = Eigen::VectorXd::Constant(1, std::sin(2 * M_PI * t / 80.0));
        y(t) = x + 0.03 * rng.normal();
        x = 0.9 * x + 0.2 * u[t](0) + 0.02 * rng.normal();
    }
}

} // namespace

TEST_CASE("evaluation seeds the first two outputs and scores the rest") {
    Rng rng(101);
    std::vector<Eigen::VectorXd> u;
    Eigen::VectorXd y;
    simulate_drift(rng, 120, u, y);
    auto cfg = drift_config();
    cfg.noise.x0 = Eigen::VectorXd::Constant(1, y(0));
    const auto res = ss_pipeline::run_algorithm1(u, y, cfg);

    const auto pred = ss_pipeline::evaluate_prediction(res.model, cfg, u, y);
    CHECK(pred.scored_from == 2);
    CHECK(pred.predicted(0) == y(0));
    CHECK(pred.predicted(1) == y(1));
    CHECK(pred.predicted.size() == y.size());

    const auto sim = ss_pipeline::evaluate_simulation(res.model, cfg, u, y);
    CHECK(pred.rmse <= sim.rmse + 1e-12);
    CHECK(pred.rmse < 0.2);  // the plant is nearly linear and well excited
}

TEST_CASE("training-state overload scores against the smoothed track") {
    Rng rng(103);
    std::vector<Eigen::VectorXd> u;
    Eigen::VectorXd y;
    simulate_drift(rng, 100, u, y);
    auto cfg = drift_config();
    cfg.noise.x0 = Eigen::VectorXd::Constant(1, y(0));
    const auto res = ss_pipeline::run_algorithm1(u, y, cfg);
    const auto pred = ss_pipeline::evaluate_prediction(res.model, cfg, res.trajectory.smoothed_mean, u, y);
    CHECK(pred.rmse < 0.2);
    std::vector<Eigen::VectorXd> short_track(5, Eigen::VectorXd::Zero(1));
    CHECK_THROWS_AS(ss_pipeline::evaluate_prediction(res.model, cfg, short_track, u, y),
                    std::invalid_argument);
}

TEST_CASE("evaluation refuses the general layout") {
    Rng rng(107);
    std::vector<Eigen::VectorXd> u;
    Eigen::VectorXd y;
    simulate_linear(rng, 60, u, y);
    const auto cfg = linear_config(false);
    const auto res = ss_pipeline::run_algorithm1(u, y, cfg);
    CHECK_THROWS_AS(ss_pipeline::evaluate_prediction(res.model, cfg, u, y), std::invalid_argument);
}
