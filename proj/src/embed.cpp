#include "idkit/embed.hpp"

#include <cmath>
#include <limits>

#include "idkit/krr.hpp"

namespace idkit::embed {

Eigen::VectorXd ParameterBox::project(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd out = theta;
    if (lower.size() > 0) {
        if (lower.size() != theta.size())
            throw std::invalid_argument("ParameterBox: lower bound dimension mismatch");
        out = out.cwiseMax(lower);
    }
    if (upper.size() > 0) {
        if (upper.size() != theta.size())
            throw std::invalid_argument("ParameterBox: upper bound dimension mismatch");
        out = out.cwiseMin(upper);
    }
    return out;
}

bool ParameterBox::contains(const Eigen::VectorXd& theta, double tol) const {
    if (lower.size() > 0 && ((theta - lower).minCoeff() < -tol))
        return false;
    if (upper.size() > 0 && ((upper - theta).minCoeff() < -tol))
        return false;
    return true;
}

PhysicsModel PhysicsModel::general(int n_theta,
                                   std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> f,
                                   ParameterBox box) {
    if (n_theta < 0 || !f)
        throw std::invalid_argument("PhysicsModel::general: need n_theta >= 0 and a callable f");
    PhysicsModel m;
    m.n_theta = n_theta;
    m.general_f = std::move(f);
    m.box = std::move(box);
    return m;
}

PhysicsModel PhysicsModel::affine_pair(int n_theta,
                                       std::function<double(const Eigen::VectorXd&)> f0,
                                       std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f_vec,
                                       ParameterBox box) {
    if (n_theta < 1 || !f0 || !f_vec)
        throw std::invalid_argument("PhysicsModel::affine_pair: need n_theta >= 1 and both callables");
    PhysicsModel m;
    m.n_theta = n_theta;
    m.f0 = std::move(f0);
    m.f_vec = std::move(f_vec);
    m.affine = true;
    m.general_f = [f0 = m.f0, f_vec = m.f_vec](const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
        return f0(x) + f_vec(x).dot(theta);
    };
    m.box = std::move(box);
    return m;
}

PhysicsModel PhysicsModel::none() {
    PhysicsModel m;
    m.n_theta = 0;
    m.general_f = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
    return m;
}

Eigen::VectorXd PhysicsModel::output_stack(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index t = 0; t < X.rows(); ++t)
        out(t) = general_f(X.row(t).transpose(), theta);
    return out;
}

Eigen::MatrixXd PhysicsModel::feature_matrix(const Eigen::MatrixXd& X) const {
    if (!affine)
        throw std::invalid_argument("feature_matrix: physics model has no affine structure");
    Eigen::MatrixXd F(X.rows(), n_theta);
    for (Eigen::Index t = 0; t < X.rows(); ++t) {
        Eigen::VectorXd row = f_vec(X.row(t).transpose());
        if (row.size() != n_theta)
            throw std::invalid_argument("feature_matrix: f_vec returned wrong dimension");
        F.row(t) = row.transpose();
    }
    return F;
}

Eigen::VectorXd PhysicsModel::f0_stack(const Eigen::MatrixXd& X) const {
    if (!affine)
        throw std::invalid_argument("f0_stack: physics model has no affine structure");
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index t = 0; t < X.rows(); ++t)
        out(t) = f0(X.row(t).transpose());
    return out;
}

EmbedProblem::EmbedProblem(Dataset data, PhysicsModel physics, kernels::KernelSpec spec, double gamma)
    : data_(std::move(data)), physics_(std::move(physics)), spec_(std::move(spec)), gamma_(gamma) {
    if (data_.X.rows() != data_.y.size() || data_.y.size() < 1)
        throw std::invalid_argument("EmbedProblem: inputs and outputs disagree in size");
    gram_ = kernels::gram_matrix(spec_, data_.X);
    init_factor();
}

EmbedProblem::EmbedProblem(Dataset data, PhysicsModel physics, kernels::KernelSpec spec, double gamma,
                           kernels::GramMatrix gram)
    : data_(std::move(data)), physics_(std::move(physics)), spec_(std::move(spec)), gamma_(gamma),
      gram_(std::move(gram)) {
    if (data_.X.rows() != data_.y.size() || data_.y.size() < 1)
        throw std::invalid_argument("EmbedProblem: inputs and outputs disagree in size");
    if (gram_.K.rows() != data_.y.size() || gram_.K.cols() != data_.y.size())
        throw std::invalid_argument("EmbedProblem: Gram matrix does not match the dataset");
    init_factor();
}

void EmbedProblem::init_factor() {
    if (!(gamma_ > 0.0))
        throw std::invalid_argument("EmbedProblem: gamma must be positive");
    Eigen::MatrixXd A = gram_.K;
    A.diagonal().array() += gamma_;
    chol_ = cholesky_with_jitter(A);
}

Eigen::VectorXd EmbedProblem::residual_weights(const Eigen::VectorXd& theta) const {
    return chol_.solve(data_.y - physics_.output_stack(data_.X, theta));
}

double EmbedProblem::reduced_objective(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd r = data_.y - physics_.output_stack(data_.X, theta);
    const Eigen::VectorXd omega = chol_.solve(r);
    const Eigen::VectorXd k_omega = gram_.K * omega;
    return (r - k_omega).squaredNorm() + gamma_ * omega.dot(k_omega);
}

Eigen::MatrixXd psi_matrix(const Eigen::MatrixXd& K, double gamma) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("psi_matrix: gamma must be positive");
    Eigen::MatrixXd A = K;
    A.diagonal().array() += gamma;
    const Eigen::Index T = K.rows();
    return cholesky_with_jitter(A).solve(Eigen::MatrixXd::Identity(T, T));
}

namespace {

// theta = pinv(A) b with a relative singular-value cutoff
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double rel_cutoff) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut = sv.size() > 0 ? rel_cutoff * sv(0) : 0.0;
    Eigen::VectorXd coeffs = svd.matrixU().transpose() * b;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        coeffs(i) = sv(i) > cut ? coeffs(i) / sv(i) : 0.0;
    return svd.matrixV() * coeffs;
}

struct BfgsOutcome {
    Eigen::VectorXd x;
    double fx = 0.0;
    std::vector<double> trace;
    bool converged = false;
    int iterations = 0;
};

// BFGS with box projection and Armijo backtracking. Gradients by central
// finite differences unless an analytic callback is given.
BfgsOutcome projected_bfgs(const std::function<double(const Eigen::VectorXd&)>& obj,
                           const Eigen::VectorXd& x0, const ParameterBox& box,
                           int max_iters, double grad_tol, double step_tol,
                           const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient) {
    const double armijo_c = 1e-4;
    const Eigen::Index n = x0.size();

    auto grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        if (gradient)
            return gradient(x);
        Eigen::VectorXd g(n);
        Eigen::VectorXd probe = x;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double h = std::max(1e-6, 1e-6 * std::abs(x(i)));
            probe(i) = x(i) + h;
            const double fp = obj(probe);
            probe(i) = x(i) - h;
            const double fm = obj(probe);
            probe(i) = x(i);
            g(i) = (fp - fm) / (2.0 * h);
        }
        return g;
    };

    BfgsOutcome out;
    Eigen::VectorXd x = box.project(x0);
    double fx = obj(x);
    if (!std::isfinite(fx))
        throw std::invalid_argument("projected_bfgs: objective not finite at the initial point");
    out.trace.push_back(fx);

    Eigen::VectorXd best_x = x;
    double best_f = fx;

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = grad(x);

    for (int iter = 0; iter < max_iters; ++iter) {
        const Eigen::VectorXd pg = x - box.project(x - g);
        if (pg.lpNorm<Eigen::Infinity>() <= grad_tol) {
            out.converged = true;
            break;
        }

        Eigen::VectorXd d = -H * g;
        bool line_ok = false;
        Eigen::VectorXd x_new;
        double f_new = 0.0;
        for (int pass = 0; pass < 2 && !line_ok; ++pass) {
            double t = 1.0;
            for (int halvings = 0; halvings < 60; ++halvings) {
                const Eigen::VectorXd trial = box.project(x + t * d);
                const double slope = g.dot(trial - x);
                if (slope < 0.0) {
                    const double f_trial = obj(trial);
                    if (f_trial <= fx + armijo_c * slope) {
                        x_new = trial;
                        f_new = f_trial;
                        line_ok = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if (!line_ok) {
                // stale curvature can produce a bad direction; retry steepest
                H.setIdentity();
                d = -g;
            }
        }
        if (!line_ok)
            break; // no acceptable step left; stop at the current iterate

        const Eigen::VectorXd s = x_new - x;
        out.iterations = iter + 1;
        out.trace.push_back(f_new);
        if (f_new < best_f) {
            best_f = f_new;
            best_x = x_new;
        }

        if (s.lpNorm<Eigen::Infinity>() <= step_tol) {
            x = x_new;
            fx = f_new;
            out.converged = true;
            break;
        }

        const Eigen::VectorXd g_new = grad(x_new);
        const Eigen::VectorXd yv = g_new - g;
        const double rho = s.dot(yv);
        if (rho > 1e-12 * s.norm() * yv.norm()) {
            // expanded form of (I - s y'/rho) H (I - y s'/rho) + s s'/rho
            const Eigen::VectorXd Hy = H * yv;
            const double yHy = yv.dot(Hy);
            H -= (s * Hy.transpose() + Hy * s.transpose()) / rho;
            H += s * s.transpose() * ((1.0 + yHy / rho) / rho);
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }

    if (fx <= best_f) {
        best_f = fx;
        best_x = x;
    }
    out.x = best_x;
    out.fx = best_f;
    return out;
}

} // namespace

EmbedResult fit_nonlinear(const EmbedProblem& problem, const EmbedConfig& cfg,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient) {
    const PhysicsModel& physics = problem.physics();
    EmbedResult res;
    res.method_tag = "nonlinear";
    res.support_inputs = problem.data().X;

    if (physics.n_theta == 0) {
        res.theta_star.resize(0);
        res.omega_star = problem.residual_weights(res.theta_star);
        res.objective = problem.reduced_objective(res.theta_star);
        res.objective_trace = {res.objective};
        return res;
    }

    Eigen::VectorXd theta0 = cfg.theta0;
    if (theta0.size() == 0)
        theta0 = Eigen::VectorXd::Zero(physics.n_theta);
    if (theta0.size() != physics.n_theta)
        throw std::invalid_argument("fit_nonlinear: theta0 has wrong dimension");

    auto obj = [&](const Eigen::VectorXd& th) { return problem.reduced_objective(th); };
    BfgsOutcome run = projected_bfgs(obj, theta0, physics.box, cfg.max_iters,
                                     cfg.gradient_tolerance, cfg.step_tolerance, gradient);

    res.theta_star = run.x;
    res.omega_star = problem.residual_weights(run.x);
    res.objective = run.fx;
    res.objective_trace = std::move(run.trace);
    res.converged = run.converged;
    res.iterations = run.iterations;
    return res;
}

EmbedResult fit_nonlinear(const Dataset& data, const PhysicsModel& physics, const EmbedConfig& cfg,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient) {
    EmbedProblem problem(data, physics, cfg.spec, cfg.gamma);
    return fit_nonlinear(problem, cfg, gradient);
}

EmbedResult fit_affine(const EmbedProblem& problem) {
    const PhysicsModel& physics = problem.physics();
    if (!physics.affine)
        throw std::invalid_argument("fit_affine: physics model has no affine structure");
    const Dataset& data = problem.data();
    if (data.y.size() < physics.n_theta)
        throw std::invalid_argument("fit_affine: fewer samples than parameters");

    const Eigen::MatrixXd F = physics.feature_matrix(data.X);
    const Eigen::VectorXd Y0 = data.y - physics.f0_stack(data.X);
    const Eigen::MatrixXd psi_F = problem.factor().solve(F);
    const Eigen::VectorXd psi_Y0 = problem.factor().solve(Y0);
    const Eigen::MatrixXd A = F.transpose() * psi_F;
    const Eigen::VectorXd b = F.transpose() * psi_Y0;

    EmbedResult res;
    res.method_tag = "affine_closed_form";
    res.support_inputs = data.X;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd_F(F);
    const Eigen::VectorXd& sv = svd_F.singularValues();
    const bool full_rank = sv.size() > 0 && sv(sv.size() - 1) > 1e-10 * sv(0);
    if (full_rank) {
        res.theta_star = Eigen::LDLT<Eigen::MatrixXd>(A).solve(b);
    } else {
        res.theta_star = pinv_solve(A, b, 1e-10);
        res.rank_deficient = true;
    }

    res.omega_star = psi_Y0 - psi_F * res.theta_star;
    res.objective = problem.reduced_objective(res.theta_star);
    res.objective_trace = {res.objective};
    return res;
}

EmbedResult fit_affine(const Dataset& data, const PhysicsModel& physics,
                       const kernels::KernelSpec& spec, double gamma) {
    EmbedProblem problem(data, physics, spec, gamma);
    return fit_affine(problem);
}

EmbedResult fit_ls(const Dataset& data, const PhysicsModel& physics) {
    if (!physics.affine)
        throw std::invalid_argument("fit_ls: physics model has no affine structure");
    const Eigen::MatrixXd F = physics.feature_matrix(data.X);
    const Eigen::VectorXd Y0 = data.y - physics.f0_stack(data.X);

    EmbedResult res;
    res.method_tag = "ls";
    res.support_inputs = data.X;
    res.theta_star = F.colPivHouseholderQr().solve(Y0);
    res.objective = (Y0 - F * res.theta_star).squaredNorm();
    res.objective_trace = {res.objective};
    return res;
}

EmbedResult fit_dm(const EmbedProblem& problem) {
    EmbedResult res = fit_ls(problem.data(), problem.physics());
    res.method_tag = "dm";
    res.omega_star = problem.residual_weights(res.theta_star);
    res.objective = problem.reduced_objective(res.theta_star);
    res.objective_trace = {res.objective};
    return res;
}

EmbedResult fit_dm(const Dataset& data, const PhysicsModel& physics,
                   const kernels::KernelSpec& spec, double gamma) {
    EmbedProblem problem(data, physics, spec, gamma);
    return fit_dm(problem);
}

EmbedResult fit_krr_only(const EmbedProblem& problem) {
    EmbedResult res;
    res.method_tag = "krr_only";
    res.support_inputs = problem.data().X;
    res.theta_star.resize(0);
    res.omega_star = problem.factor().solve(problem.data().y);
    const Eigen::VectorXd k_omega = problem.K() * res.omega_star;
    res.objective = (problem.data().y - k_omega).squaredNorm() + problem.gamma() * res.omega_star.dot(k_omega);
    res.objective_trace = {res.objective};
    return res;
}

EmbedResult fit_krr_only(const Dataset& data, const kernels::KernelSpec& spec, double gamma) {
    EmbedProblem problem(data, PhysicsModel::none(), spec, gamma);
    return fit_krr_only(problem);
}

EmbedResult fit_nls(const Dataset& data, const PhysicsModel& physics, const EmbedConfig& cfg) {
    if (physics.n_theta < 1)
        throw std::invalid_argument("fit_nls: model has no parameters to fit");
    Eigen::VectorXd theta0 = cfg.theta0;
    if (theta0.size() == 0)
        theta0 = Eigen::VectorXd::Zero(physics.n_theta);
    if (theta0.size() != physics.n_theta)
        throw std::invalid_argument("fit_nls: theta0 has wrong dimension");

    auto obj = [&](const Eigen::VectorXd& th) {
        return (data.y - physics.output_stack(data.X, th)).squaredNorm();
    };
    BfgsOutcome run = projected_bfgs(obj, theta0, physics.box, cfg.max_iters,
                                     cfg.gradient_tolerance, cfg.step_tolerance, {});

    EmbedResult res;
    res.method_tag = "ls";
    res.support_inputs = data.X;
    res.theta_star = run.x;
    res.objective = run.fx;
    res.objective_trace = std::move(run.trace);
    res.converged = run.converged;
    res.iterations = run.iterations;
    return res;
}

double predict_embed(const EmbedResult& result, const PhysicsModel& physics,
                     const kernels::KernelSpec& spec, const Eigen::VectorXd& x) {
    double value = physics.general_f ? physics.general_f(x, result.theta_star) : 0.0;
    if (result.omega_star.size() > 0)
        value += result.omega_star.dot(kernels::kernel_row(spec, result.support_inputs, x));
    return value;
}

Eigen::VectorXd predict_embed(const EmbedResult& result, const PhysicsModel& physics,
                              const kernels::KernelSpec& spec, const Eigen::MatrixXd& X) {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd xi = X.row(i).transpose();
        out(i) = predict_embed(result, physics, spec, xi);
    }
    return out;
}

} // namespace idkit::embed
