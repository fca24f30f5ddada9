#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace energymimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix shapes disagree (e.g. subcarriers with different M or K).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Gram matrix too ill-conditioned for the K x K solve.
class SingularChannelError : public Error {
 public:
  using Error::Error;
};

/// QoS target cannot be met. `deficit` and `minimal_antennas` are filled when known.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what, double deficit = 0.0,
                           int minimal_antennas = 0)
      : Error(what), deficit_(deficit), minimal_antennas_(minimal_antennas) {}

  double deficit() const noexcept { return deficit_; }
  int minimal_antennas() const noexcept { return minimal_antennas_; }

 private:
  double deficit_;
  int minimal_antennas_;
};

/// Instance larger than a solver's size guard.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text; `line` is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }

}  // namespace energymimo
