#include "idkit/krr.hpp"

namespace idkit::krr {

Eigen::VectorXd krr_weights(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double gamma) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("krr: gamma must be positive");
    if (K.rows() != y.size())
        throw std::invalid_argument("krr: Gram matrix and targets disagree in size");
    Eigen::MatrixXd A = K;
    A.diagonal().array() += gamma;
    return cholesky_with_jitter(A).solve(y);
}

KrrModel fit_krr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const kernels::KernelSpec& spec, double gamma) {
    if (X.rows() != y.size() || y.size() < 1)
        throw std::invalid_argument("fit_krr: need matching inputs and outputs, at least one sample");
    KrrModel m;
    m.spec = spec;
    m.X_train = X;
    m.gamma = gamma;
    m.omega = krr_weights(kernels::gram_matrix(spec, X).K, y, gamma);
    return m;
}

double predict_krr(const KrrModel& model, const Eigen::VectorXd& x) {
    return model.omega.dot(kernels::kernel_row(model.spec, model.X_train, x));
}

Eigen::VectorXd predict_krr(const KrrModel& model, const Eigen::MatrixXd& X) {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd xi = X.row(i).transpose();
        out(i) = predict_krr(model, xi);
    }
    return out;
}

} // namespace idkit::krr

