#ifndef ASYMFLOW_ERRORS_HPP
#define ASYMFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace asymflow {

// Error taxonomy shared by the whole library. The CLI maps these onto
// process exit codes (input -> 1, numerical -> 2).

/// Malformed or inconsistent caller input (dimension mismatch, bad config).
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A point lies outside the model domain.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// An operation was requested on a model that cannot support it
/// (e.g. tangent-space operations on a metric with no tangent structure).
class ModelError : public std::runtime_error {
public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative scheme failed to converge; carries the final residual.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// Problem size exceeds a documented cap.
class SizeError : public std::runtime_error {
public:
  explicit SizeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace asymflow

#endif
