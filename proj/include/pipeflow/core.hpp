#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pipeflow {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2 = Vector2<double>;
using Mat2 = Matrix2<double>;
using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Negative part [z]^- = (|z| - z) / 2.
template <typename Scalar>
Scalar negative_part(const Scalar& z)
{
    using std::abs;
    return (abs(z) - z) / Scalar(2);
}

/// Generalized derivative of the negative part; 0 is chosen at the kink.
inline double negative_part_slope(double z) { return z < 0.0 ? -1.0 : 0.0; }

// Error hierarchy. Every failure the library reports derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    SingularMatrix(Index pivot, const std::string& what)
        : Error(what), pivot_(pivot) {}
    Index pivot() const { return pivot_; }

private:
    Index pivot_;
};

class NoConvergence : public Error {
public:
    NoConvergence(std::size_t iterations, const std::string& what)
        : Error(what), iterations_(iterations) {}
    std::size_t iterations() const { return iterations_; }

private:
    std::size_t iterations_;
};

class NegativeInflux : public Error {
public:
    using Error::Error;
};

class CompatibilityError : public Error {
public:
    using Error::Error;
};

class LineSearchFailure : public Error {
public:
    using Error::Error;
};

class ContinuationStalled : public Error {
public:
    using Error::Error;
};

class ConstantsMissing : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(int line, int column, const std::string& message)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                message),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace pipeflow
