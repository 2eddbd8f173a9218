#include "idkit/kernels.hpp"

#include <cmath>

namespace idkit::kernels {

KernelSpec KernelSpec::gaussian(double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("gaussian kernel: sigma must be positive");
    KernelSpec s;
    s.family = KernelFamily::Gaussian;
    s.sigma = sigma;
    return s;
}

KernelSpec KernelSpec::laplacian(double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("laplacian kernel: sigma must be positive");
    KernelSpec s;
    s.family = KernelFamily::Laplacian;
    s.sigma = sigma;
    return s;
}

KernelSpec KernelSpec::polynomial(double offset, int degree) {
    if (degree < 1)
        throw std::invalid_argument("polynomial kernel: degree must be >= 1");
    KernelSpec s;
    s.family = KernelFamily::Polynomial;
    s.offset = offset;
    s.degree = degree;
    return s;
}

KernelSpec KernelSpec::linear() {
    KernelSpec s;
    s.family = KernelFamily::Linear;
    return s;
}

KernelSpec KernelSpec::linear(const Eigen::MatrixXd& P) {
    if (P.rows() != P.cols())
        throw std::invalid_argument("linear kernel: P must be square");
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("linear kernel: P must be symmetric");
    KernelSpec s;
    s.family = KernelFamily::Linear;
    s.P = P;
    return s;
}

const char* KernelSpec::family_name() const {
    switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplacian: return "laplacian";
    case KernelFamily::Polynomial: return "polynomial";
    case KernelFamily::Linear: return "linear";
    }
    return "unknown";
}

double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& xp) {
    if (x.size() != xp.size())
        throw std::invalid_argument("eval_kernel: input dimensions differ");
    switch (spec.family) {
    case KernelFamily::Gaussian:
        return std::exp(-(x - xp).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
    case KernelFamily::Laplacian:
        return std::exp(-(x - xp).lpNorm<1>() / spec.sigma);
    case KernelFamily::Polynomial:
        return std::pow(x.dot(xp) + spec.offset, spec.degree);
    case KernelFamily::Linear:
        if (spec.P.size() == 0)
            return x.dot(xp);
        if (spec.P.rows() != x.size())
            throw std::invalid_argument("eval_kernel: P dimension does not match inputs");
        return x.dot(spec.P * xp);
    }
    throw std::invalid_argument("eval_kernel: unknown kernel family");
}

GramMatrix gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X) {
    const Eigen::Index T = X.rows();
    if (T < 1)
        throw std::invalid_argument("gram_matrix: need at least one input");

    GramMatrix g;
    g.K.resize(T, T);
    for (Eigen::Index i = 0; i < T; ++i) {
        for (Eigen::Index j = i; j < T; ++j) {
            const double v = eval_kernel(spec, X.row(i), X.row(j));
            g.K(i, j) = v;
            g.K(j, i) = v;
        }
    }
    return g;
}

Eigen::VectorXd kernel_row(const KernelSpec& spec, const Eigen::MatrixXd& X_train, const Eigen::VectorXd& x) {
    const Eigen::Index T = X_train.rows();
    if (X_train.cols() != x.size())
        throw std::invalid_argument("kernel_row: input dimension does not match training inputs");
    Eigen::VectorXd row(T);
    for (Eigen::Index j = 0; j < T; ++j)
        row(j) = eval_kernel(spec, x, X_train.row(j));
    return row;
}

} // namespace idkit::kernels
