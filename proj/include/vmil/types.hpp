#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace vmil {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when an operation's precondition or a documented invariant is broken.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Bad user input: config files, CLI arguments, unknown keys. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unrecoverable runtime failure (non-finite loss, I/O mid-run). CLI maps this to exit code 3.
struct RuntimeAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A pretrained backbone was requested but its weights cannot be loaded.
struct BackboneUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A train/test split satisfying class coverage cannot be built.
struct InfeasibleSplit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

inline void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) throw ContractViolation(what + ": non-finite values");
}

// Flat named view over a parameter tensor; the common currency of the
// optimizer, checkpoint container and gradient checker.
struct TensorRef {
    std::string name;
    double* data;
    Eigen::Index rows, cols;

    Eigen::Index size() const { return rows * cols; }
};

}  // namespace vmil
