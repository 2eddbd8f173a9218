#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace idkit {

// Thrown when a linear-algebra step cannot be completed even after the
// jitter escalation ladder (failed factorization, diverged recursion, ...).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Regression data: one input per row of X, aligned scalar outputs in y.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    Eigen::Index size() const { return y.size(); }
};

// Cholesky factor of A + jitter*I for a symmetric matrix A that should be
// positive (semi)definite up to roundoff.
struct CholFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;

    // resolves for any dense right-hand side, vector or matrix
    template <class Rhs>
    auto solve(const Eigen::MatrixBase<Rhs>& b) const { return llt.solve(b.derived()); }
    Eigen::MatrixXd matrix_l() const { return llt.matrixL(); }
};

// Tries a plain LLT first; on failure retries with jitter 1e-10*trace(A)/n
// on the diagonal, escalating x10 per retry. After max_retries jittered
// attempts the matrix is declared indefinite and numerical_error is thrown.
CholFactor cholesky_with_jitter(const Eigen::MatrixXd& A, int max_retries = 3);

// Deterministic random source. Draws are generated explicitly (not through
// std::distribution objects) so sequences are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1)
    double uniform();
    double uniform(double lo, double hi);
    // standard normal via Box-Muller; draws are paired internally
    double normal();
    double normal(double mean, double stddev);

    Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi);
    Eigen::VectorXd normal_vector(Eigen::Index n, double mean = 0.0, double stddev = 1.0);

    // Independent generator derived from a master seed and a stream label;
    // the mixing keeps nearby labels decorrelated.
    static Rng substream(std::uint64_t master_seed, std::uint64_t stream);

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// The seed Rng::substream(master_seed, stream) is built from, for callers
// that need to record or forward it.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream);

// Runs fn(i) for i in [0, n) on up to `jobs` threads (inline when jobs <= 1).
// The first exception thrown by a worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned jobs);

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

// 100 * (1 - |y - yhat| / |y - mean(y)|). A constant target is reported as
// 100 when the error is exactly zero and rejected otherwise.
double fit_percent(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

} // namespace idkit
