#pragma once

#include <optional>
#include <vector>

#include "idkit/common.hpp"

namespace idkit::smoother {

// Discrete-time model x_{t+1} = f(x_t, u_t, theta) + e_t, y_t = g(x_t, u_t, theta) + w_t
// with scalar measurements.
struct StateSpaceModel {
    int n = 0;    // state dimension
    int n_u = 0;  // input dimension
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&)> f;
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&)> g;
};

struct NoiseConfig {
    Eigen::MatrixXd P_e;  // process-noise covariance (n x n)
    double P_w = 0.0;     // measurement-noise variance
    Eigen::MatrixXd P0;   // initial state covariance
    Eigen::VectorXd x0;   // initial state mean
};

// Unscented-transform weights. wan_merwe derives the standard set from
// (alpha, beta, kappa); explicit_weights pins every value directly and skips
// the normalization check (used to mirror reported literal weights).
struct UtWeights {
    double a = 1.0;       // sigma-point scale sqrt(n + lambda)
    Eigen::VectorXd wm;   // mean weights, size 2n+1
    Eigen::VectorXd wc;   // covariance weights, size 2n+1

    static UtWeights wan_merwe(int n, double alpha = 1.0, double beta = 2.0,
                               std::optional<double> kappa = std::nullopt);  // kappa defaults to 3-n
    static UtWeights explicit_weights(int n, double a, double wm0, double wc0, double wi);
};

// Columns are the 2n+1 sigma points: mean, mean + a L_i, mean - a L_i with
// L the lower Cholesky factor of cov (jitter ladder on failure).
Eigen::MatrixXd sigma_points(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const UtWeights& w);

// Filtered and smoothed moments over a horizon. Index t runs 0..T where
// entry 0 holds the prior (x0, P0); smoothed entries are filled by
// urtss_smooth with smoothed[T] == filtered[T].
struct SmoothedTrajectory {
    std::vector<Eigen::VectorXd> filtered_mean;
    std::vector<Eigen::MatrixXd> filtered_cov;
    std::vector<Eigen::VectorXd> smoothed_mean;
    std::vector<Eigen::MatrixXd> smoothed_cov;

    int horizon() const { return static_cast<int>(filtered_mean.size()) - 1; }
};

// Forward pass. U row t is the input u_t for t = 0..T-1; y(t) is the
// measurement at time t+1 (so y holds y_1..y_T). The output map for the
// final update reuses u_{T-1} since no later input exists.
SmoothedTrajectory ukf_filter(const StateSpaceModel& model, const Eigen::VectorXd& theta,
                              const NoiseConfig& noise, const UtWeights& w,
                              const Eigen::MatrixXd& U, const Eigen::VectorXd& y);

// Backward pass; fills the smoothed fields of traj in place.
void urtss_smooth(const StateSpaceModel& model, const Eigen::VectorXd& theta,
                  const NoiseConfig& noise, const UtWeights& w,
                  const Eigen::MatrixXd& U, SmoothedTrajectory& traj);

} // namespace idkit::smoother
