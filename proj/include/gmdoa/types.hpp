#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace gmdoa {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using CRowVector = Eigen::RowVectorXcd;

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Base of every error raised by the library. The message can be prefixed with
// context (iteration, cycle, source index) while the exception propagates.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}
  const char* what() const noexcept override { return message_.c_str(); }
  void add_context(const std::string& context) { message_ = context + ": " + message_; }

 private:
  std::string message_;
};

// Argument outside its mathematical domain (e.g. an angle not in (0, pi)).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Mismatched dimensions or otherwise malformed structure.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Non-finite intermediate or result.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Weighted Gram matrix stays singular after regularization.
class DegenerateGeometryError : public NumericError {
 public:
  DegenerateGeometryError(std::string message, Eigen::Index snapshot)
      : NumericError(std::move(message)), snapshot_(snapshot) {}
  Eigen::Index snapshot() const { return snapshot_; }

 private:
  Eigen::Index snapshot_;
};

// Invalid configuration value; `field()` is the dotted key path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace gmdoa
