#pragma once

#include <vector>

#include "idkit/embed.hpp"
#include "idkit/smoother.hpp"

namespace idkit::ss_pipeline {

// How the regression input z_t is assembled from smoothed states, inputs,
// and measurements (all arrays 0-based on one shared time axis):
//   General: z_t = [xs_{t-1}, u_{t-1}, u_t]        -> target y_t
//   Cts:     z_t = [xs1_{t-1}, y_t, u_{t-1}]       -> target y_{t+1}
enum class RegressorLayout { General, Cts };

struct RegressorSet {
    Eigen::MatrixXd Z;        // one regressor per row
    Eigen::VectorXd targets;
};

// xs holds one smoothed state per time step (xs[0] is the smoothed initial
// state); u and y are aligned input/output samples. Boundary samples lacking
// a lag or a lead are dropped.
RegressorSet build_regressors(RegressorLayout layout, const std::vector<Eigen::VectorXd>& xs,
                              const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y);

// One-step output predictor: physics xi(z, theta*) plus kernel correction.
struct PredictorModel {
    embed::PhysicsModel physics;
    kernels::KernelSpec spec;
    embed::EmbedResult fit;

    double predict(const Eigen::VectorXd& z) const {
        return embed::predict_embed(fit, physics, spec, z);
    }
};

struct Algorithm1Config {
    smoother::StateSpaceModel ss_model;   // nominal model for smoothing
    Eigen::VectorXd theta0;               // nominal parameters (also the optimizer start)
    smoother::NoiseConfig noise;
    smoother::UtWeights weights;
    embed::PhysicsModel physics;          // one-step output map xi(z, theta)
    kernels::KernelSpec spec;
    double gamma = 0.1;
    RegressorLayout layout = RegressorLayout::General;
    bool use_kernel = true;               // false: plain nonlinear least squares, delta == 0
    int max_iters = 500;
};

struct Algorithm1Result {
    PredictorModel model;
    smoother::SmoothedTrajectory trajectory;
    RegressorSet regressors;
    Eigen::VectorXd smoothed_initial_state;
};

// Smoothing -> regressor construction -> joint (theta, delta) estimation.
// u and y are the raw 0-based data arrays (equal length); the smoother runs
// on (u_0..u_{T-2}, y_1..y_{T-1}) so smoothed states align with the data axis.
Algorithm1Result run_algorithm1(const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y,
                                const Algorithm1Config& cfg);

struct EvalReport {
    double rmse = 0.0;
    double fit = 0.0;
    Eigen::VectorXd predicted;  // aligned with y; leading unscored entries copied from y
    int scored_from = 0;        // first index that contributes to the metrics
};

// One-step-ahead evaluation on a CTS-layout series: z_t is built from the
// measured y_t and the open-loop state track, the score covers t >= 2.
EvalReport evaluate_prediction(const PredictorModel& model, const Algorithm1Config& cfg,
                               const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y);

// Same, but with a caller-supplied state track (the smoothed states on the
// data the model was identified from).
EvalReport evaluate_prediction(const PredictorModel& model, const Algorithm1Config& cfg,
                               const std::vector<Eigen::VectorXd>& xs,
                               const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y);

// Free-run evaluation: the measured output inside z_t is replaced by the
// previous prediction and the hidden state is propagated open-loop through
// the nominal f with the identified parameters.
EvalReport evaluate_simulation(const PredictorModel& model, const Algorithm1Config& cfg,
                               const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& y);

} // namespace idkit::ss_pipeline
