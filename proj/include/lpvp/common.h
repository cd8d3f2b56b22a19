#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lpvp {

/// Failure categories surfaced by the library. The C API maps each onto a
/// status code, and the CLI onto an exit code.
enum class ErrorKind {
  kDomain,         // argument outside the mathematical domain of an operation
  kConfig,         // malformed or inconsistent configuration
  kSynthesis,      // infeasible or non-stabilizable synthesis problem
  kConvergence,    // iteration limit reached
  kInterpolation,  // singular interpolated Lyapunov matrix
  kNumerical,      // ill-conditioning or non-finite values
  kSimulation,     // closed-loop simulation diverged
  kVerification,   // post-hoc check failed
  kIo,             // file read/write failure
};

const char* ToString(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Throw(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void Require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) Throw(kind, what);
}

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

}  // namespace lpvp
