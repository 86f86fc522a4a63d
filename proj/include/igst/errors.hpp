#pragma once

#include <stdexcept>
#include <string>

namespace igst {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidKnotVector : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when the spatial Jacobian degenerates inside a mesh element.
class SingularJacobian : public Error {
 public:
  SingularJacobian(long element, const std::string& what)
      : Error(what), element_(element) {}
  long element() const { return element_; }

 private:
  long element_;
};

/// Raised by the linear solver; dof() is the unknown whose pivot vanished, or -1.
class SingularMatrix : public Error {
 public:
  SingularMatrix(long dof, const std::string& what) : Error(what), dof_(dof) {}
  long dof() const { return dof_; }

 private:
  long dof_;
};

/// The iterative solver stopped before reaching its residual target.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace igst
