#ifndef BPIDA_ERRORS_HPP
#define BPIDA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bpida {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedInstance : public Error {
 public:
  using Error::Error;
};

class Unsolvable : public Error {
 public:
  using Error::Error;
};

/// An explicit DFS stack or block-shared stack exceeded its capacity. The
/// configuration is undersized; no node was dropped.
class StackOverflow : public Error {
 public:
  using Error::Error;
};

class IterationLimit : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DeadlockDetected : public Error {
 public:
  using Error::Error;
};

class EmptyRun : public Error {
 public:
  using Error::Error;
};

/// Raised by the verifier. `counterexample()` holds the offending instance in
/// instance-file syntax so it can be replayed with `solve`.
class OracleMismatch : public Error {
 public:
  OracleMismatch(const std::string& what, std::string counterexample)
      : Error(what), counterexample_(std::move(counterexample)) {}

  const std::string& counterexample() const noexcept { return counterexample_; }

 private:
  std::string counterexample_;
};

}  // namespace bpida

#endif  // BPIDA_ERRORS_HPP
