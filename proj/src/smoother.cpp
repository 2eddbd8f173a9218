#include "idkit/smoother.hpp"

#include <cmath>
#include <string>

namespace idkit::smoother {

UtWeights UtWeights::wan_merwe(int n, double alpha, double beta, std::optional<double> kappa) {
    if (n < 1)
        throw std::invalid_argument("UtWeights: state dimension must be positive");
    const double k = kappa.value_or(3.0 - n);
    const double lambda = alpha * alpha * (n + k) - n;
    if (!(n + lambda > 0.0))
        throw std::invalid_argument("UtWeights: n + lambda must be positive");

    UtWeights w;
    w.a = std::sqrt(n + lambda);
    w.wm.resize(2 * n + 1);
    w.wc.resize(2 * n + 1);
    w.wm(0) = lambda / (n + lambda);
    w.wc(0) = w.wm(0) + 1.0 - alpha * alpha + beta;
    const double wi = 1.0 / (2.0 * (n + lambda));
    for (int i = 1; i <= 2 * n; ++i) {
        w.wm(i) = wi;
        w.wc(i) = wi;
    }
    if (std::abs(w.wm.sum() - 1.0) > 1e-12)
        throw numerical_error("UtWeights: mean weights failed to normalize");
    return w;
}

UtWeights UtWeights::explicit_weights(int n, double a, double wm0, double wc0, double wi) {
    if (n < 1)
        throw std::invalid_argument("UtWeights: state dimension must be positive");
    if (!(a > 0.0))
        throw std::invalid_argument("UtWeights: scale a must be positive");
    UtWeights w;
    w.a = a;
    w.wm.resize(2 * n + 1);
    w.wc.resize(2 * n + 1);
    w.wm(0) = wm0;
    w.wc(0) = wc0;
    for (int i = 1; i <= 2 * n; ++i) {
        w.wm(i) = wi;
        w.wc(i) = wi;
    }
    return w;
}

Eigen::MatrixXd sigma_points(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const UtWeights& w) {
    const Eigen::Index n = mean.size();
    if (cov.rows() != n || cov.cols() != n)
        throw std::invalid_argument("sigma_points: covariance does not match the mean");
    const Eigen::MatrixXd L = cholesky_with_jitter(cov).matrix_l();
    Eigen::MatrixXd pts(n, 2 * n + 1);
    pts.col(0) = mean;
    for (Eigen::Index i = 0; i < n; ++i) {
        pts.col(1 + i) = mean + w.a * L.col(i);
        pts.col(1 + n + i) = mean - w.a * L.col(i);
    }
    return pts;
}

namespace {

void symmetrize(Eigen::MatrixXd& P) {
    P = 0.5 * (P + P.transpose()).eval();
}

struct Prediction {
    Eigen::MatrixXd propagated;  // f applied to each sigma point, column-wise
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;         // includes P_e
};

Prediction predict_state(const StateSpaceModel& model, const Eigen::VectorXd& theta,
                         const NoiseConfig& noise, const UtWeights& w,
                         const Eigen::MatrixXd& pts, const Eigen::VectorXd& u, int step) {
    const Eigen::Index n = pts.rows();
    const Eigen::Index m = pts.cols();
    Prediction pr;
    pr.propagated.resize(n, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        pr.propagated.col(i) = model.f(pts.col(i), u, theta);
        if (!pr.propagated.col(i).allFinite())
            throw numerical_error("ukf: state propagation diverged at step " + std::to_string(step));
    }
    pr.mean = pr.propagated * w.wm;
    pr.cov = noise.P_e;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd d = pr.propagated.col(i) - pr.mean;
        pr.cov += w.wc(i) * d * d.transpose();
    }
    symmetrize(pr.cov);
    return pr;
}

} // namespace

SmoothedTrajectory ukf_filter(const StateSpaceModel& model, const Eigen::VectorXd& theta,
                              const NoiseConfig& noise, const UtWeights& w,
                              const Eigen::MatrixXd& U, const Eigen::VectorXd& y) {
    const int T = static_cast<int>(y.size());
    if (T < 1)
        throw std::invalid_argument("ukf_filter: need at least one measurement");
    if (U.rows() != T)
        throw std::invalid_argument("ukf_filter: inputs and measurements disagree in length");
    if (noise.x0.size() != model.n || noise.P0.rows() != model.n)
        throw std::invalid_argument("ukf_filter: initial moments do not match the state dimension");

    SmoothedTrajectory traj;
    traj.filtered_mean.resize(T + 1);
    traj.filtered_cov.resize(T + 1);
    traj.filtered_mean[0] = noise.x0;
    traj.filtered_cov[0] = noise.P0;

    for (int t = 1; t <= T; ++t) {
        if (!std::isfinite(y(t - 1)))
            throw numerical_error("ukf: measurement not finite at step " + std::to_string(t));
        // time update through f(., u_{t-1})
        const Eigen::MatrixXd pts = sigma_points(traj.filtered_mean[t - 1], traj.filtered_cov[t - 1], w);
        const Prediction pr = predict_state(model, theta, noise, w, pts, U.row(t - 1).transpose(), t);

        // measurement update with y_t through g(., u_t); the final step
        // reuses the last available input
        const Eigen::VectorXd u_meas = U.row(std::min(t, T - 1)).transpose();
        const Eigen::MatrixXd mpts = sigma_points(pr.mean, pr.cov, w);
        Eigen::VectorXd z(mpts.cols());
        for (Eigen::Index i = 0; i < mpts.cols(); ++i) {
            z(i) = model.g(mpts.col(i), u_meas, theta);
            if (!std::isfinite(z(i)))
                throw numerical_error("ukf: output map diverged at step " + std::to_string(t));
        }
        const double z_mean = z.dot(w.wm);
        double s = noise.P_w;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(model.n);
        for (Eigen::Index i = 0; i < mpts.cols(); ++i) {
            const double dz = z(i) - z_mean;
            s += w.wc(i) * dz * dz;
            c += w.wc(i) * dz * (mpts.col(i) - pr.mean);
        }
        if (!(s > 0.0))
            throw numerical_error("ukf: innovation variance not positive at step " + std::to_string(t));

        const Eigen::VectorXd gain = c / s;
        traj.filtered_mean[t] = pr.mean + gain * (y(t - 1) - z_mean);
        Eigen::MatrixXd P = pr.cov - gain * s * gain.transpose();
        symmetrize(P);
        traj.filtered_cov[t] = std::move(P);
    }
    return traj;
}

void urtss_smooth(const StateSpaceModel& model, const Eigen::VectorXd& theta,
                  const NoiseConfig& noise, const UtWeights& w,
                  const Eigen::MatrixXd& U, SmoothedTrajectory& traj) {
    const int T = traj.horizon();
    if (T < 1)
        throw std::invalid_argument("urtss_smooth: run ukf_filter first");
    if (U.rows() != T)
        throw std::invalid_argument("urtss_smooth: inputs do not match the filtered horizon");

    traj.smoothed_mean.assign(T + 1, Eigen::VectorXd());
    traj.smoothed_cov.assign(T + 1, Eigen::MatrixXd());
    traj.smoothed_mean[T] = traj.filtered_mean[T];
    traj.smoothed_cov[T] = traj.filtered_cov[T];

    for (int t = T - 1; t >= 0; --t) {
        const Eigen::MatrixXd pts = sigma_points(traj.filtered_mean[t], traj.filtered_cov[t], w);
        const Prediction pr = predict_state(model, theta, noise, w, pts, U.row(t).transpose(), t);

        Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(model.n, model.n);
        for (Eigen::Index i = 0; i < pts.cols(); ++i)
            cross += w.wc(i) * (pts.col(i) - traj.filtered_mean[t]) * (pr.propagated.col(i) - pr.mean).transpose();

        // gain = cross * inv(pr.cov), via the factor of the predicted covariance
        const Eigen::MatrixXd gain = cholesky_with_jitter(pr.cov).solve(cross.transpose()).transpose();

        traj.smoothed_mean[t] = traj.filtered_mean[t] + gain * (traj.smoothed_mean[t + 1] - pr.mean);
        Eigen::MatrixXd P = traj.filtered_cov[t] + gain * (traj.smoothed_cov[t + 1] - pr.cov) * gain.transpose();
        symmetrize(P);
        traj.smoothed_cov[t] = std::move(P);
    }
}

} // namespace idkit::smoother
