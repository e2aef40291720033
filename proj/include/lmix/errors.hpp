#ifndef LMIX_ERRORS_HPP
#define LMIX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lmix {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function was evaluated outside its domain (e.g. ψ beyond its effective domain).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double offending)
      : Error(what), offending_(offending) {}
  double offending() const noexcept { return offending_; }

 private:
  double offending_;
};

/// Quadrature, factorization or iteration failed to reach the requested accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied inconsistent arguments or malformed input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Every optimizer start failed to produce a finite objective.
class EstimationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace lmix

#endif  // LMIX_ERRORS_HPP
