#pragma once

#include "idkit/common.hpp"
#include "idkit/kernels.hpp"

namespace idkit::krr {

// Fitted kernel ridge regressor: prediction is omega' * kernel_row(x).
struct KrrModel {
    kernels::KernelSpec spec;
    Eigen::MatrixXd X_train;
    Eigen::VectorXd omega;
    double gamma = 0.0;
};

// Solves (K + gamma I) omega = y by Cholesky (never explicit inversion).
KrrModel fit_krr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const kernels::KernelSpec& spec, double gamma);

// Same solve against a precomputed Gram matrix (reused by callers that
// already paid for K).
Eigen::VectorXd krr_weights(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double gamma);

double predict_krr(const KrrModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd predict_krr(const KrrModel& model, const Eigen::MatrixXd& X);

} // namespace idkit::krr
