#include "idkit/common.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

namespace idkit {

CholFactor cholesky_with_jitter(const Eigen::MatrixXd& A, int max_retries) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("cholesky_with_jitter: matrix must be square");

    const Eigen::Index n = A.rows();
    CholFactor f;
    f.llt.compute(A);
    if (f.llt.info() == Eigen::Success)
        return f;

    double jitter = 1e-10 * std::abs(A.trace()) / static_cast<double>(n);
    if (jitter <= 0.0)
        jitter = 1e-10;
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        Eigen::MatrixXd shifted = A;
        shifted.diagonal().array() += jitter;
        f.llt.compute(shifted);
        if (f.llt.info() == Eigen::Success) {
            f.jitter = jitter;
            return f;
        }
        jitter *= 10.0;
    }
    throw numerical_error("cholesky_with_jitter: matrix not positive definite after jitter escalation");
}

double Rng::uniform() {
    // 53-bit mantissa draw, uniform on [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 bounded away from 0 so the log is finite
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

Eigen::VectorXd Rng::uniform_vector(Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = uniform(lo, hi);
    return v;
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n, double mean, double stddev) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = normal(mean, stddev);
    return v;
}

namespace {
// splitmix64 finalizer; decorrelates consecutive stream labels
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream) {
    return mix64(master_seed ^ mix64(stream));
}

Rng Rng::substream(std::uint64_t master_seed, std::uint64_t stream) {
    return Rng(derive_seed(master_seed, stream));
}

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    if (y.size() != yhat.size() || y.size() < 1)
        throw std::invalid_argument("rmse: need equal nonempty vectors");
    return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

double fit_percent(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    if (y.size() != yhat.size() || y.size() < 1)
        throw std::invalid_argument("fit_percent: need equal nonempty vectors");
    const double err = (y - yhat).norm();
    const double denom = (y.array() - y.mean()).matrix().norm();
    if (denom == 0.0) {
        if (err == 0.0)
            return 100.0;
        throw std::invalid_argument("fit_percent: constant targets with nonzero error");
    }
    return 100.0 * (1.0 - err / denom);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned jobs) {
    if (n == 0)
        return;
    const unsigned workers = std::min<std::size_t>(jobs == 0 ? 1 : jobs, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                next.store(n); // stop handing out work
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();

    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace idkit
