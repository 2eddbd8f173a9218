#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

Eigen::VectorXd solve_linear(Eigen::MatrixXd A, Eigen::VectorXd b) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || b.size() != n)
        throw std::runtime_error("solve_linear: shape mismatch");
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(piv, col)))
                piv = r;
        if (std::abs(A(piv, col)) < 1e-300)
            throw std::runtime_error("solve_linear: singular matrix");
        if (piv != col) {
            A.row(piv).swap(A.row(col));
            std::swap(b(piv), b(col));
        }
        for (int r = col + 1; r < n; ++r) {
            const double m = A(r, col) / A(col, col);
            if (m == 0.0)
                continue;
            for (int c = col; c < n; ++c)
                A(r, c) -= m * A(col, c);
            b(r) -= m * b(col);
        }
    }
    Eigen::VectorXd x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b(r);
        for (int c = r + 1; c < n; ++c)
            s -= A(r, c) * x(c);
        x(r) = s / A(r, r);
    }
    return x;
}

Eigen::MatrixXd solve_linear_multi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd X(A.rows(), B.cols());
    for (int c = 0; c < B.cols(); ++c)
        X.col(c) = solve_linear(A, B.col(c));
    return X;
}

Eigen::MatrixXd invert(const Eigen::MatrixXd& A) {
    return solve_linear_multi(A, Eigen::MatrixXd::Identity(A.rows(), A.rows()));
}

KalmanTrack kalman_filter_smoother(const LinearSystem& sys, const Eigen::MatrixXd& U,
                                   const Eigen::VectorXd& y) {
    const int T = static_cast<int>(y.size());
    const int n = static_cast<int>(sys.x0.size());
    std::vector<Eigen::VectorXd> mp(T + 1), mf(T + 1);
    std::vector<Eigen::MatrixXd> Pp(T + 1), Pf(T + 1);
    mf[0] = sys.x0;
    Pf[0] = sys.P0;
    for (int t = 1; t <= T; ++t) {
        mp[t] = sys.A * mf[t - 1] + sys.B * U.row(t - 1).transpose();
        Pp[t] = sys.A * Pf[t - 1] * sys.A.transpose() + sys.Q;
        const double s = (sys.C * Pp[t] * sys.C.transpose())(0) + sys.R;
        const Eigen::VectorXd k = Pp[t] * sys.C.transpose() / s;
        mf[t] = mp[t] + k * (y(t - 1) - (sys.C * mp[t])(0));
        Pf[t] = (Eigen::MatrixXd::Identity(n, n) - k * sys.C) * Pp[t];
    }
    KalmanTrack track;
    track.filtered_mean = mf;
    track.filtered_cov = Pf;
    track.smoothed_mean.assign(T + 1, Eigen::VectorXd());
    track.smoothed_cov.assign(T + 1, Eigen::MatrixXd());
    track.smoothed_mean[T] = mf[T];
    track.smoothed_cov[T] = Pf[T];
    for (int t = T - 1; t >= 0; --t) {
        const Eigen::MatrixXd G = Pf[t] * sys.A.transpose() * invert(Pp[t + 1]);
        track.smoothed_mean[t] = mf[t] + G * (track.smoothed_mean[t + 1] - mp[t + 1]);
        track.smoothed_cov[t] =
            Pf[t] + G * (track.smoothed_cov[t + 1] - Pp[t + 1]) * G.transpose();
    }
    return track;
}

double grid_minimize(const std::function<double(double)>& fn, double lo, double hi, int levels,
                     int points) {
    double best_x = lo, best_v = fn(lo);
    for (int level = 0; level < levels; ++level) {
        for (int i = 0; i <= points; ++i) {
            const double x = lo + (hi - lo) * i / points;
            const double v = fn(x);
            if (v < best_v) {
                best_v = v;
                best_x = x;
            }
        }
        const double span = (hi - lo) / points;
        lo = best_x - span;
        hi = best_x + span;
    }
    return best_x;
}

} // namespace oracles
