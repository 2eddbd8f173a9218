#pragma once

#include <Eigen/Dense>

#include "idkit/common.hpp"

namespace idkit::kernels {

enum class KernelFamily { Gaussian, Laplacian, Polynomial, Linear };

// One positive-definite kernel with its hyperparameters. Use the factories;
// they validate the parameter ranges.
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double sigma = 1.0;   // bandwidth (Gaussian, Laplacian)
    double offset = 0.0;  // c (Polynomial)
    int degree = 2;       // d (Polynomial)
    Eigen::MatrixXd P;    // metric (Linear); empty means identity

    static KernelSpec gaussian(double sigma);
    static KernelSpec laplacian(double sigma);
    static KernelSpec polynomial(double offset, int degree);
    static KernelSpec linear();
    static KernelSpec linear(const Eigen::MatrixXd& P);

    const char* family_name() const;
};

// Gram matrix plus the diagonal jitter that downstream factorizations may
// add; gram_matrix itself always returns jitter = 0.
struct GramMatrix {
    Eigen::MatrixXd K;
    double jitter = 0.0;
};

double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& xp);

// K_ij = k(x_i, x_j) for rows x_i of X. The upper triangle is computed and
// mirrored, so the result is symmetric by construction.
GramMatrix gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X);

// [k(x, x_1), ..., k(x, x_T)] against the rows of X_train.
Eigen::VectorXd kernel_row(const KernelSpec& spec, const Eigen::MatrixXd& X_train, const Eigen::VectorXd& x);

} // namespace idkit::kernels
