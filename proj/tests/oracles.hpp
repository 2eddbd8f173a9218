#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

// Reference implementations used only by the test suite. Everything here is
// deliberately written from first principles (no shared code with the
// library) so disagreements point at the code under test.
namespace oracles {

// Gaussian elimination with partial pivoting; throws std::runtime_error on a
// (numerically) singular matrix.
Eigen::VectorXd solve_linear(Eigen::MatrixXd A, Eigen::VectorXd b);
Eigen::MatrixXd solve_linear_multi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
Eigen::MatrixXd invert(const Eigen::MatrixXd& A);

// Linear-Gaussian state-space system x+ = A x + B u + e, y = C x + w.
struct LinearSystem {
    Eigen::MatrixXd A, B;
    Eigen::RowVectorXd C;
    Eigen::MatrixXd Q;   // process-noise covariance
    double R = 0.0;      // measurement-noise variance
    Eigen::MatrixXd P0;  // initial covariance
    Eigen::VectorXd x0;  // initial mean
};

struct KalmanTrack {
    // index 0 holds the prior; index t the estimate after y_t
    std::vector<Eigen::VectorXd> filtered_mean, smoothed_mean;
    std::vector<Eigen::MatrixXd> filtered_cov, smoothed_cov;
};

// Exact Kalman filter + Rauch-Tung-Striebel smoother recursions; U has one
// input row per step, y one measurement per step.
KalmanTrack kalman_filter_smoother(const LinearSystem& sys, const Eigen::MatrixXd& U,
                                   const Eigen::VectorXd& y);

// Dense 1-D minimization of fn over [lo, hi] by exhaustive grid refinement.
double grid_minimize(const std::function<double(double)>& fn, double lo, double hi, int levels = 4,
                     int points = 200);

} // namespace oracles
