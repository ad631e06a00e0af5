#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace gsync {

using Index = Eigen::Index;
using cdouble = std::complex<double>;

enum class Field { real, complex };

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename S>
inline constexpr Field field_of = is_complex<S>::value ? Field::complex : Field::real;

std::string to_string(Field f);
Field parse_field(const std::string& s);

/// Real part of the Frobenius inner product, Re tr(A B*).
template <typename DerivedA, typename DerivedB>
double real_inner(const Eigen::MatrixBase<DerivedA>& a,
                  const Eigen::MatrixBase<DerivedB>& b) {
  if constexpr (is_complex<typename DerivedA::Scalar>::value) {
    return (a.array() * b.array().conjugate()).real().sum();
  } else {
    return (a.array() * b.array()).sum();
  }
}

inline double real_part(double x) { return x; }
inline double real_part(const cdouble& x) { return x.real(); }

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Iterative method failed; carries the iteration count and the best estimate
/// reached before giving up.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long iterations = 0,
                 double best_estimate = 0.0)
      : std::runtime_error(what), iterations_(iterations), best_(best_estimate) {}
  long iterations() const { return iterations_; }
  double best_estimate() const { return best_; }

 private:
  long iterations_;
  double best_;
};

}  // namespace gsync
