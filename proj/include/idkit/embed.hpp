#pragma once

#include <string>
#include <vector>

#include "idkit/common.hpp"
#include "idkit/kernels.hpp"

namespace idkit::embed {

// Component-wise box constraints; empty bounds mean unconstrained.
struct ParameterBox {
    Eigen::VectorXd lower, upper;

    bool empty() const { return lower.size() == 0 && upper.size() == 0; }
    Eigen::VectorXd project(const Eigen::VectorXd& theta) const;
    bool contains(const Eigen::VectorXd& theta, double tol = 0.0) const;
};

// Parametric physical prior: a general map general_f(x, theta), optionally
// with affine structure general_f(x, theta) = f0(x) + f_vec(x)' theta.
struct PhysicsModel {
    int n_theta = 0;
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> general_f;
    std::function<double(const Eigen::VectorXd&)> f0;              // affine only
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f_vec;  // affine only
    bool affine = false;
    ParameterBox box;

    static PhysicsModel general(int n_theta,
                                std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> f,
                                ParameterBox box = {});
    // general_f is synthesized from the pair, so the two views always agree.
    static PhysicsModel affine_pair(int n_theta,
                                    std::function<double(const Eigen::VectorXd&)> f0,
                                    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f_vec,
                                    ParameterBox box = {});
    // No physics at all: f == 0, n_theta == 0 (pure-kernel reduction).
    static PhysicsModel none();

    // [f(x_1, theta), ..., f(x_T, theta)] over the rows of X
    Eigen::VectorXd output_stack(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) const;
    // F(x) with rows f_vec(x_t)' (affine models only)
    Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd f0_stack(const Eigen::MatrixXd& X) const;
};

struct EmbedConfig {
    double gamma = 0.1;
    kernels::KernelSpec spec;
    int max_iters = 500;
    double gradient_tolerance = 1e-8;
    double step_tolerance = 1e-10;
    Eigen::VectorXd theta0;
};

struct EmbedResult {
    Eigen::VectorXd theta_star;
    Eigen::VectorXd omega_star;        // empty when the kernel part is disabled
    Eigen::MatrixXd support_inputs;    // training inputs backing omega_star
    std::vector<double> objective_trace;
    std::string method_tag;            // nonlinear | affine_closed_form | ls | dm | krr_only
    bool converged = true;
    bool rank_deficient = false;
    int iterations = 0;
    double objective = 0.0;
};

// One dataset + kernel + gamma, with the Cholesky factor of (K + gamma I)
// computed once and reused for every candidate theta.
class EmbedProblem {
public:
    EmbedProblem(Dataset data, PhysicsModel physics, kernels::KernelSpec spec, double gamma);
    // Same, but trusts a Gram matrix the caller already computed for
    // (spec, data.X) — the grid-search hot path reuses one per sigma.
    EmbedProblem(Dataset data, PhysicsModel physics, kernels::KernelSpec spec, double gamma,
                 kernels::GramMatrix gram);

    // omega(theta) = (K + gamma I)^{-1} (y - Gamma(theta))
    Eigen::VectorXd residual_weights(const Eigen::VectorXd& theta) const;
    // p(theta) = |y - Gamma(theta) - K omega|^2 + gamma omega' K omega
    double reduced_objective(const Eigen::VectorXd& theta) const;

    const Dataset& data() const { return data_; }
    const PhysicsModel& physics() const { return physics_; }
    const kernels::KernelSpec& spec() const { return spec_; }
    const Eigen::MatrixXd& K() const { return gram_.K; }
    double gamma() const { return gamma_; }
    const CholFactor& factor() const { return chol_; }

private:
    void init_factor();

    Dataset data_;
    PhysicsModel physics_;
    kernels::KernelSpec spec_;
    double gamma_;
    kernels::GramMatrix gram_;
    CholFactor chol_;
};

// Psi = (K + gamma I)^{-1}, formed explicitly (diagnostic / algebra checks).
Eigen::MatrixXd psi_matrix(const Eigen::MatrixXd& K, double gamma);

// Projected-BFGS minimization of the reduced objective; gradient by central
// finite differences unless `gradient` is supplied. The EmbedProblem
// overloads reuse the caller's factorization (cfg.spec/cfg.gamma ignored).
EmbedResult fit_nonlinear(const Dataset& data, const PhysicsModel& physics, const EmbedConfig& cfg,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient = {});
EmbedResult fit_nonlinear(const EmbedProblem& problem, const EmbedConfig& cfg,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient = {});

// Closed form for affine physics; switches to a pseudoinverse (and flags
// rank_deficient) when F loses column rank.
EmbedResult fit_affine(const Dataset& data, const PhysicsModel& physics,
                       const kernels::KernelSpec& spec, double gamma);
EmbedResult fit_affine(const EmbedProblem& problem);

// Ordinary least squares on the affine features; omega is left empty.
EmbedResult fit_ls(const Dataset& data, const PhysicsModel& physics);

// Two-step baseline: LS for theta, then kernel ridge on the LS residuals.
EmbedResult fit_dm(const Dataset& data, const PhysicsModel& physics,
                   const kernels::KernelSpec& spec, double gamma);
EmbedResult fit_dm(const EmbedProblem& problem);

// Pure kernel ridge baseline (no physics term).
EmbedResult fit_krr_only(const Dataset& data, const kernels::KernelSpec& spec, double gamma);
EmbedResult fit_krr_only(const EmbedProblem& problem);

// Physics-only nonlinear least squares (kernel disabled), same optimizer as
// fit_nonlinear on the plain squared-residual objective.
EmbedResult fit_nls(const Dataset& data, const PhysicsModel& physics, const EmbedConfig& cfg);

double predict_embed(const EmbedResult& result, const PhysicsModel& physics,
                     const kernels::KernelSpec& spec, const Eigen::VectorXd& x);
Eigen::VectorXd predict_embed(const EmbedResult& result, const PhysicsModel& physics,
                              const kernels::KernelSpec& spec, const Eigen::MatrixXd& X);

} // namespace idkit::embed
